#include "mcg/energynet.hpp"

#include <numeric>
#include <stdexcept>

#include "mcg/random.hpp"

namespace mcg {

namespace {

void check_range(const Range& r, const char* name) {
    if (!(r.lo < r.hi)) throw std::invalid_argument(std::string(name) + ": lower bound must be below upper");
}

// Global allocation matrix T = [T_1^1 ... T_m^{n_m}], w x q.
Eigen::MatrixXd global_alloc(const EIScenario& sc) {
    const Dimensions& d = sc.dims;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(d.coupling_rows(), d.strategy_dim());
    for (int a = 0; a < d.total_agents(); ++a) {
        const int j = d.cluster_of(a);
        T.middleCols(d.block_offset(j, d.rank_of(a)), d.decision_dim(j)) = sc.prosumers[a].alloc;
    }
    return T;
}

}  // namespace

WeightedGraph build_graph(const GraphSpec& g, int nodes) {
    switch (g.kind) {
        case GraphKind::complete:
            return WeightedGraph::complete(nodes, g.weight);
        case GraphKind::ring:
            return WeightedGraph::ring(nodes, g.weight);
        case GraphKind::star:
            return WeightedGraph::star(nodes, g.weight);
        case GraphKind::custom:
            return WeightedGraph::from_edges(nodes, g.edges);
    }
    throw std::logic_error("unknown graph kind");
}

EIScenario generate_scenario(std::uint64_t seed, const std::vector<int>& sizes, int utilities,
                             std::vector<int> decision_dims, const EIRanges& ranges,
                             const EITopology& topology) {
    check_range(ranges.capacity, "capacity");
    check_range(ranges.constraint_rhs, "constraint_rhs");
    check_range(ranges.price, "price");
    check_range(ranges.slope, "slope");
    check_range(ranges.cost_linear, "cost_linear");
    check_range(ranges.cost_quadratic, "cost_quadratic");
    if (decision_dims.empty()) decision_dims.assign(sizes.size(), utilities);

    EIScenario sc;
    sc.dims = Dimensions::create(sizes, decision_dims, utilities);
    sc.offset_coef = ranges.offset_coef;
    sc.seed = seed;
    sc.topology = topology;
    sc.ranges = ranges;

    Rng rng(seed);
    const Dimensions& d = sc.dims;
    const int w = d.coupling_rows();
    sc.prosumers.resize(d.total_agents());
    for (int a = 0; a < d.total_agents(); ++a) {
        const int qj = d.decision_dim(d.cluster_of(a));
        ProsumerData& p = sc.prosumers[a];
        p.capacity = rng.uniform_vector(qj, ranges.capacity.lo, ranges.capacity.hi);
        p.cost_quad_diag = rng.uniform_vector(qj, ranges.cost_quadratic.lo, ranges.cost_quadratic.hi);
        p.cost_lin = rng.uniform_vector(qj, ranges.cost_linear.lo, ranges.cost_linear.hi);
        p.price = rng.uniform_vector(w, ranges.price.lo, ranges.price.hi);
        p.slope = rng.uniform_vector(w, ranges.slope.lo, ranges.slope.hi);
        p.alloc = Eigen::MatrixXd::Zero(w, qj);
        if (qj == w) {
            p.alloc.setIdentity();
        } else {
            // round-robin over utilities, then a seeded shuffle of the assignment
            std::vector<int> perm(w);
            std::iota(perm.begin(), perm.end(), 0);
            for (int k = w - 1; k > 0; --k) std::swap(perm[k], perm[rng.index(k + 1)]);
            for (int e = 0; e < qj; ++e) p.alloc(perm[e % w], e) = 1.0;
        }
    }
    sc.A.resize(d.cluster_count());
    sc.b.resize(d.cluster_count());
    for (int j = 0; j < d.cluster_count(); ++j) {
        const int qj = d.decision_dim(j);
        sc.A[j].resize(w, qj);
        for (int r = 0; r < w; ++r)
            for (int c = 0; c < qj; ++c) sc.A[j](r, c) = rng.uniform();
        sc.b[j] = rng.uniform_vector(w, ranges.constraint_rhs.lo, ranges.constraint_rhs.hi);
    }
    return sc;
}

Eigen::VectorXd ei_payoff_gradient(const EIScenario& sc, int j, int i,
                                   const Eigen::VectorXd& cluster_strategy,
                                   const Eigen::VectorXd& outside_estimates) {
    const Dimensions& d = sc.dims;
    const int qj = d.decision_dim(j);
    if (cluster_strategy.size() != d.cluster_span(j))
        throw std::invalid_argument("cluster strategy has wrong length");
    if (outside_estimates.size() != d.strategy_dim() - d.cluster_span(j))
        throw std::invalid_argument("outside estimates have wrong length");

    // assemble the full view: own cluster real, everyone else estimated
    Eigen::VectorXd view(d.strategy_dim());
    const int head = d.cluster_offset(j);
    view.segment(0, head) = outside_estimates.segment(0, head);
    view.segment(head, d.cluster_span(j)) = cluster_strategy;
    view.segment(head + d.cluster_span(j), d.strategy_dim() - head - d.cluster_span(j)) =
        outside_estimates.segment(head, outside_estimates.size() - head);

    Eigen::VectorXd total = Eigen::VectorXd::Zero(d.coupling_rows());
    for (int a = 0; a < d.total_agents(); ++a) {
        const int ja = d.cluster_of(a);
        total += sc.prosumers[a].alloc *
                 view.segment(d.block_offset(ja, d.rank_of(a)), d.decision_dim(ja));
    }

    const int self = d.agent_id(j, i);
    const ProsumerData& me = sc.prosumers[self];
    const Eigen::VectorXd x_i = cluster_strategy.segment(i * qj, qj);

    Eigen::VectorXd market = me.slope.asDiagonal() * total;
    market += me.slope.asDiagonal() * (me.alloc * x_i);
    for (int xi = 0; xi < d.agents_in(j); ++xi) {
        if (xi == i) continue;
        const ProsumerData& mate = sc.prosumers[d.agent_id(j, xi)];
        market += mate.slope.asDiagonal() * (mate.alloc * cluster_strategy.segment(xi * qj, qj));
    }
    return 2.0 * me.cost_quad_diag.cwiseProduct(x_i) + me.cost_lin -
           me.alloc.transpose() * me.price + me.alloc.transpose() * market;
}

double ei_payoff_value(const EIScenario& sc, int j, int i, const Eigen::VectorXd& view) {
    const Dimensions& d = sc.dims;
    if (view.size() != d.strategy_dim())
        throw std::invalid_argument("strategy view has wrong length");
    Eigen::VectorXd total = Eigen::VectorXd::Zero(d.coupling_rows());
    for (int a = 0; a < d.total_agents(); ++a) {
        const int ja = d.cluster_of(a);
        total += sc.prosumers[a].alloc *
                 view.segment(d.block_offset(ja, d.rank_of(a)), d.decision_dim(ja));
    }
    const ProsumerData& me = sc.prosumers[d.agent_id(j, i)];
    const Eigen::VectorXd x_i = view.segment(d.block_offset(j, i), d.decision_dim(j));
    const Eigen::VectorXd sold = me.alloc * x_i;
    const double production = x_i.dot(me.cost_quad_diag.cwiseProduct(x_i)) + me.cost_lin.dot(x_i) -
                              sc.offset_coef * (i + 1);
    return production - (me.price - me.slope.asDiagonal() * total).dot(sold);
}

GameSpec build_ei_gamespec(const EIScenario& sc) {
    const Dimensions& d = sc.dims;
    const Eigen::MatrixXd T = global_alloc(sc);

    QuadraticModel model;
    model.agent_terms.resize(d.total_agents());
    std::vector<Box> boxes(d.total_agents());
    for (int a = 0; a < d.total_agents(); ++a) {
        const int j = d.cluster_of(a);
        const int i = d.rank_of(a);
        const int off = d.block_offset(j, i);
        const int qj = d.decision_dim(j);
        const ProsumerData& p = sc.prosumers[a];

        QuadraticTerm& t = model.agent_terms[a];
        t.quad = Eigen::MatrixXd::Zero(d.strategy_dim(), d.strategy_dim());
        t.quad.block(off, off, qj, qj) += Eigen::MatrixXd(p.cost_quad_diag.asDiagonal());
        t.quad.middleCols(off, qj) += T.transpose() * p.slope.asDiagonal() * p.alloc;
        t.lin = Eigen::VectorXd::Zero(d.strategy_dim());
        t.lin.segment(off, qj) = p.cost_lin - p.alloc.transpose() * p.price;
        t.constant = -sc.offset_coef * (i + 1);

        boxes[a].lower = Eigen::VectorXd::Zero(qj);
        boxes[a].upper = p.capacity;
    }

    ClusterTopology topo;
    for (int j = 0; j < d.cluster_count(); ++j)
        topo.inner.push_back(build_graph(sc.topology.inner, d.agents_in(j)));
    topo.leader = build_graph(sc.topology.leader, d.cluster_count());

    CouplingConstraint coupling{sc.A, sc.b};
    return make_game_spec(d, std::move(model), std::move(boxes), std::move(coupling),
                          std::move(topo));
}

}  // namespace mcg
