#include "mcg/game.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mcg/random.hpp"

namespace mcg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double finite_difference_block(const GameSpec& spec, int j, int owner, int wrt, int coord,
                               Eigen::VectorXd view) {
    const auto& model = std::get<CallbackModel>(spec.payoffs);
    const int col = spec.dims.block_offset(j, wrt) + coord;
    const double h = 1e-5 * std::max(1.0, std::abs(view(col)));
    const double save = view(col);
    view(col) = save + h;
    const double up = model.value(j, owner, view);
    view(col) = save - h;
    const double down = model.value(j, owner, view);
    return (up - down) / (2.0 * h);
}

void check_callback_gradients(const GameSpec& spec) {
    const auto& model = std::get<CallbackModel>(spec.payoffs);
    if (!model.value || !model.grad)
        throw std::invalid_argument("callback payoff model needs both value and grad");
    Rng rng(0x9e3779b97f4a7c15ULL);
    for (int trial = 0; trial < 3; ++trial) {
        Eigen::VectorXd view = rng.normal_vector(spec.dims.strategy_dim());
        for (int j = 0; j < spec.dims.cluster_count(); ++j) {
            for (int owner = 0; owner < spec.dims.agents_in(j); ++owner) {
                for (int wrt = 0; wrt < spec.dims.agents_in(j); ++wrt) {
                    Eigen::VectorXd g = model.grad(j, owner, wrt, view);
                    if (g.size() != spec.dims.decision_dim(j))
                        throw std::invalid_argument("callback gradient block has wrong size");
                    for (int s = 0; s < g.size(); ++s) {
                        const double fd = finite_difference_block(spec, j, owner, wrt, s, view);
                        const double scale = std::max({1.0, std::abs(fd), std::abs(g(s))});
                        if (std::abs(g(s) - fd) > 1e-5 * scale)
                            throw std::invalid_argument(
                                "callback gradient fails the finite-difference check");
                    }
                }
            }
        }
    }
}

}  // namespace

Dimensions Dimensions::create(std::vector<int> agents_per_cluster, std::vector<int> decision_dims,
                              int coupling_rows) {
    if (agents_per_cluster.empty()) throw std::invalid_argument("need at least one cluster");
    if (decision_dims.size() != agents_per_cluster.size())
        throw std::invalid_argument("decision_dims must have one entry per cluster");
    if (coupling_rows <= 0) throw std::invalid_argument("coupling_rows must be positive");

    Dimensions d;
    d.agents_ = std::move(agents_per_cluster);
    d.dims_ = std::move(decision_dims);
    d.coupling_rows_ = coupling_rows;
    const int m = d.cluster_count();
    d.cluster_offset_.resize(m);
    d.agent_base_.resize(m);
    for (int j = 0; j < m; ++j) {
        if (d.agents_[j] <= 0 || d.dims_[j] <= 0)
            throw std::invalid_argument("cluster sizes and decision dims must be positive");
        d.cluster_offset_[j] = d.strategy_dim_;
        d.agent_base_[j] = d.total_agents_;
        d.strategy_dim_ += d.agents_[j] * d.dims_[j];
        d.duplicated_dim_ += d.agents_[j] * d.agents_[j] * d.dims_[j];
        d.total_agents_ += d.agents_[j];
        for (int i = 0; i < d.agents_[j]; ++i) {
            d.cluster_of_.push_back(j);
            d.rank_of_.push_back(i);
        }
    }
    return d;
}

GameSpec make_game_spec(Dimensions dims, PayoffModel payoffs, std::vector<Box> boxes,
                        CouplingConstraint coupling, ClusterTopology topology,
                        std::vector<ProxFn> prox_overrides) {
    GameSpec spec;
    spec.dims = std::move(dims);
    spec.payoffs = std::move(payoffs);
    spec.boxes = std::move(boxes);
    spec.coupling = std::move(coupling);
    spec.topology = std::move(topology);
    spec.prox_overrides = std::move(prox_overrides);

    const Dimensions& d = spec.dims;
    const int m = d.cluster_count();

    if (static_cast<int>(spec.boxes.size()) != d.total_agents())
        throw std::invalid_argument("need one box per agent");
    for (int a = 0; a < d.total_agents(); ++a) {
        const int qj = d.decision_dim(d.cluster_of(a));
        const auto& box = spec.boxes[a];
        if (box.lower.size() != qj || box.upper.size() != qj)
            throw std::invalid_argument("box bound size mismatch");
        if ((box.lower.array() > box.upper.array()).any())
            throw std::invalid_argument("empty box: lower bound exceeds upper bound");
    }
    if (static_cast<int>(spec.coupling.A.size()) != m ||
        static_cast<int>(spec.coupling.b.size()) != m)
        throw std::invalid_argument("coupling needs one (A, b) pair per cluster");
    for (int j = 0; j < m; ++j) {
        if (spec.coupling.A[j].rows() != d.coupling_rows() ||
            spec.coupling.A[j].cols() != d.decision_dim(j))
            throw std::invalid_argument("coupling matrix size mismatch");
        if (spec.coupling.b[j].size() != d.coupling_rows())
            throw std::invalid_argument("coupling rhs size mismatch");
    }
    if (static_cast<int>(spec.topology.inner.size()) != m)
        throw std::invalid_argument("topology needs one inner graph per cluster");
    for (int j = 0; j < m; ++j)
        if (spec.topology.inner[j].node_count() != d.agents_in(j))
            throw std::invalid_argument("inner graph size must match the cluster size");
    if (spec.topology.leader.node_count() != m)
        throw std::invalid_argument("leader graph must have one node per cluster");
    const TopologyVerdict verdict = validate_topology(spec.topology);
    if (!verdict.ok) throw std::invalid_argument("topology rejected: " + verdict.detail);
    if (!spec.prox_overrides.empty() &&
        static_cast<int>(spec.prox_overrides.size()) != d.total_agents())
        throw std::invalid_argument("prox overrides must be empty or one slot per agent");

    spec.laplacians = build_laplacians(spec.topology);

    if (const auto* quad = spec.quadratic()) {
        if (static_cast<int>(quad->agent_terms.size()) != d.total_agents())
            throw std::invalid_argument("quadratic model needs one term per agent");
        const int q = d.strategy_dim();
        for (const auto& t : quad->agent_terms) {
            if (t.quad.rows() != q || t.quad.cols() != q || t.lin.size() != q)
                throw std::invalid_argument("quadratic term size mismatch");
        }
        spec.cluster_quad.assign(m, Eigen::MatrixXd::Zero(q, q));
        spec.cluster_lin.assign(m, Eigen::VectorXd::Zero(q));
        for (int a = 0; a < d.total_agents(); ++a) {
            const int j = d.cluster_of(a);
            const auto& t = quad->agent_terms[a];
            spec.cluster_quad[j] += t.quad + t.quad.transpose();
            spec.cluster_lin[j] += t.lin;
        }
    } else {
        check_callback_gradients(spec);
    }
    return spec;
}

Eigen::VectorXd own_strategies(const Dimensions& dims, const Eigen::VectorXd& estimates) {
    if (estimates.size() != dims.estimate_dim())
        throw std::invalid_argument("estimate vector has wrong length");
    Eigen::VectorXd x(dims.strategy_dim());
    for (int a = 0; a < dims.total_agents(); ++a) {
        const int j = dims.cluster_of(a);
        const int off = dims.block_offset(j, dims.rank_of(a));
        x.segment(off, dims.decision_dim(j)) =
            estimates.segment(dims.copy_offset(a) + off, dims.decision_dim(j));
    }
    return x;
}

Eigen::VectorXd scatter_own(const Dimensions& dims, const Eigen::VectorXd& strategy) {
    if (strategy.size() != dims.strategy_dim())
        throw std::invalid_argument("strategy vector has wrong length");
    Eigen::VectorXd est = Eigen::VectorXd::Zero(dims.estimate_dim());
    for (int a = 0; a < dims.total_agents(); ++a) {
        const int j = dims.cluster_of(a);
        const int off = dims.block_offset(j, dims.rank_of(a));
        est.segment(dims.copy_offset(a) + off, dims.decision_dim(j)) =
            strategy.segment(off, dims.decision_dim(j));
    }
    return est;
}

Eigen::VectorXd strip_own_cluster(const Dimensions& dims, const Eigen::VectorXd& estimates) {
    if (estimates.size() != dims.estimate_dim())
        throw std::invalid_argument("estimate vector has wrong length");
    Eigen::VectorXd out(dims.estimate_dim() - dims.duplicated_dim());
    int pos = 0;
    for (int a = 0; a < dims.total_agents(); ++a) {
        const int j = dims.cluster_of(a);
        const int copy = dims.copy_offset(a);
        const int head = dims.cluster_offset(j);
        const int tail = dims.strategy_dim() - head - dims.cluster_span(j);
        out.segment(pos, head) = estimates.segment(copy, head);
        pos += head;
        out.segment(pos, tail) = estimates.segment(copy + head + dims.cluster_span(j), tail);
        pos += tail;
    }
    return out;
}

Eigen::VectorXd synchronize_cluster_blocks(const Dimensions& dims, Eigen::VectorXd estimates) {
    const Eigen::VectorXd x = own_strategies(dims, estimates);
    for (int a = 0; a < dims.total_agents(); ++a) {
        const int j = dims.cluster_of(a);
        estimates.segment(dims.copy_offset(a) + dims.cluster_offset(j), dims.cluster_span(j)) =
            x.segment(dims.cluster_offset(j), dims.cluster_span(j));
    }
    return estimates;
}

double synchronization_error(const Dimensions& dims, const Eigen::VectorXd& estimates) {
    const Eigen::VectorXd x = own_strategies(dims, estimates);
    double err = 0.0;
    for (int a = 0; a < dims.total_agents(); ++a) {
        const int j = dims.cluster_of(a);
        err = std::max(err, (estimates.segment(dims.copy_offset(a) + dims.cluster_offset(j),
                                               dims.cluster_span(j)) -
                             x.segment(dims.cluster_offset(j), dims.cluster_span(j)))
                                .cwiseAbs()
                                .maxCoeff());
    }
    return err;
}

bool is_synchronized(const Dimensions& dims, const Eigen::VectorXd& estimates, double tol) {
    return synchronization_error(dims, estimates) <= tol;
}

Eigen::VectorXd cluster_gradient_block(const GameSpec& spec, int j, int i,
                                       const Eigen::VectorXd& view) {
    const Dimensions& d = spec.dims;
    const int off = d.block_offset(j, i);
    const int qj = d.decision_dim(j);
    if (spec.quadratic()) {
        return spec.cluster_quad[j].middleRows(off, qj) * view + spec.cluster_lin[j].segment(off, qj);
    }
    const auto& model = std::get<CallbackModel>(spec.payoffs);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(qj);
    for (int owner = 0; owner < d.agents_in(j); ++owner) g += model.grad(j, owner, i, view);
    return g;
}

Eigen::VectorXd extended_gradient_unchecked(const GameSpec& spec,
                                            const Eigen::VectorXd& estimates) {
    const Dimensions& d = spec.dims;
    if (estimates.size() != d.estimate_dim())
        throw std::invalid_argument("estimate vector has wrong length");
    Eigen::VectorXd out(d.strategy_dim());
    for (int a = 0; a < d.total_agents(); ++a) {
        const int j = d.cluster_of(a);
        const int i = d.rank_of(a);
        out.segment(d.block_offset(j, i), d.decision_dim(j)) = cluster_gradient_block(
            spec, j, i, estimates.segment(d.copy_offset(a), d.strategy_dim()));
    }
    return out;
}

Eigen::VectorXd extended_pseudogradient(const GameSpec& spec, const Eigen::VectorXd& estimates) {
    const double err = synchronization_error(spec.dims, estimates);
    if (err > 1e-12)
        throw std::invalid_argument("estimates are not synchronized (deviation " +
                                    std::to_string(err) + ")");
    return extended_gradient_unchecked(spec, estimates);
}

Eigen::VectorXd full_pseudogradient(const GameSpec& spec, const Eigen::VectorXd& x) {
    const Dimensions& d = spec.dims;
    if (x.size() != d.strategy_dim())
        throw std::invalid_argument("strategy vector has wrong length");
    Eigen::VectorXd out(d.strategy_dim());
    for (int a = 0; a < d.total_agents(); ++a) {
        const int j = d.cluster_of(a);
        const int i = d.rank_of(a);
        out.segment(d.block_offset(j, i), d.decision_dim(j)) = cluster_gradient_block(spec, j, i, x);
    }
    return out;
}

Eigen::VectorXd prox_local(const GameSpec& spec, int j, int i, const Eigen::VectorXd& v,
                           double step) {
    if (step <= 0.0) throw std::invalid_argument("prox step must be positive");
    const int a = spec.dims.agent_id(j, i);
    if (!spec.prox_overrides.empty() && spec.prox_overrides[a])
        return spec.prox_overrides[a](v, step);
    const auto& box = spec.boxes[a];
    return v.cwiseMax(box.lower).cwiseMin(box.upper);
}

PayoffValue payoff_value(const GameSpec& spec, int j, int i, const Eigen::VectorXd& view) {
    const Dimensions& d = spec.dims;
    if (view.size() != d.strategy_dim())
        throw std::invalid_argument("strategy view has wrong length");
    const int a = d.agent_id(j, i);
    const auto& box = spec.boxes[a];
    const Eigen::VectorXd xi = view.segment(d.block_offset(j, i), d.decision_dim(j));
    if ((xi.array() < box.lower.array()).any() || (xi.array() > box.upper.array()).any())
        return {kInf, false};
    if (const auto* quad = spec.quadratic()) {
        const auto& t = quad->agent_terms[a];
        return {view.dot(t.quad * view) + t.lin.dot(view) + t.constant, true};
    }
    return {std::get<CallbackModel>(spec.payoffs).value(j, i, view), true};
}

AffineMap assemble_full_map(const GameSpec& spec) {
    if (!spec.quadratic())
        throw std::invalid_argument("affine assembly requires a quadratic payoff model");
    const Dimensions& d = spec.dims;
    AffineMap map;
    map.matrix.resize(d.strategy_dim(), d.strategy_dim());
    map.offset.resize(d.strategy_dim());
    for (int a = 0; a < d.total_agents(); ++a) {
        const int j = d.cluster_of(a);
        const int off = d.block_offset(j, d.rank_of(a));
        const int qj = d.decision_dim(j);
        map.matrix.middleRows(off, qj) = spec.cluster_quad[j].middleRows(off, qj);
        map.offset.segment(off, qj) = spec.cluster_lin[j].segment(off, qj);
    }
    return map;
}

AffineMap assemble_extended_map(const GameSpec& spec) {
    if (!spec.quadratic())
        throw std::invalid_argument("affine assembly requires a quadratic payoff model");
    const Dimensions& d = spec.dims;
    AffineMap map;
    map.matrix = Eigen::MatrixXd::Zero(d.strategy_dim(), d.estimate_dim());
    map.offset.resize(d.strategy_dim());
    for (int a = 0; a < d.total_agents(); ++a) {
        const int j = d.cluster_of(a);
        const int off = d.block_offset(j, d.rank_of(a));
        const int qj = d.decision_dim(j);
        map.matrix.block(off, d.copy_offset(a), qj, d.strategy_dim()) =
            spec.cluster_quad[j].middleRows(off, qj);
        map.offset.segment(off, qj) = spec.cluster_lin[j].segment(off, qj);
    }
    return map;
}

}  // namespace mcg
