#include "mcg/solver.hpp"

#include <cmath>
#include <limits>

namespace mcg {

namespace {

Eigen::VectorXd leader_copy(const Dimensions& d, const Eigen::VectorXd& est, int cluster) {
    return est.segment(d.copy_offset(d.agent_id(cluster, 0)), d.strategy_dim());
}

// Per-agent neighborhood sums of the estimate diffusion (inner graph plus
// leader graph for leaders), as full q-sized vectors.
std::vector<Eigen::VectorXd> diffusion_terms(const GameSpec& spec, const Eigen::VectorXd& est) {
    const Dimensions& d = spec.dims;
    std::vector<Eigen::VectorXd> out(d.total_agents());
    for (int a = 0; a < d.total_agents(); ++a) {
        const int j = d.cluster_of(a);
        const int i = d.rank_of(a);
        const auto& W = spec.topology.inner[j].weights();
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(d.strategy_dim());
        const auto copy_a = est.segment(d.copy_offset(a), d.strategy_dim());
        for (int xi = 0; xi < d.agents_in(j); ++xi) {
            const double w = W(i, xi);
            if (w == 0.0) continue;
            acc += w * (copy_a - est.segment(d.copy_offset(d.agent_id(j, xi)), d.strategy_dim()));
        }
        if (i == 0) {
            const auto& WL = spec.topology.leader.weights();
            for (int l = 0; l < d.cluster_count(); ++l) {
                const double w = WL(j, l);
                if (w == 0.0) continue;
                acc += w * (leader_copy(d, est, j) - leader_copy(d, est, l));
            }
        }
        out[a] = std::move(acc);
    }
    return out;
}

std::vector<Eigen::VectorXd> gradient_terms(const GameSpec& spec, const Eigen::VectorXd& est) {
    const Dimensions& d = spec.dims;
    std::vector<Eigen::VectorXd> out(d.total_agents());
    for (int a = 0; a < d.total_agents(); ++a)
        out[a] = cluster_gradient_block(spec, d.cluster_of(a), d.rank_of(a),
                                        est.segment(d.copy_offset(a), d.strategy_dim()));
    return out;
}

// Leader-graph mismatch between cluster j's leader strategy and the other
// leaders' estimates of it.
Eigen::VectorXd leader_strategy_gap(const GameSpec& spec, const Eigen::VectorXd& est, int j) {
    const Dimensions& d = spec.dims;
    const auto& WL = spec.topology.leader.weights();
    const int off = d.block_offset(j, 0);
    const int qj = d.decision_dim(j);
    const Eigen::VectorXd own = est.segment(d.copy_offset(d.agent_id(j, 0)) + off, qj);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(qj);
    for (int l = 0; l < d.cluster_count(); ++l) {
        const double w = WL(j, l);
        if (w == 0.0) continue;
        acc += w * (own - est.segment(d.copy_offset(d.agent_id(l, 0)) + off, qj));
    }
    return acc;
}

Eigen::VectorXd lambda_diffusion(const GameSpec& spec, const Eigen::VectorXd& lambda, int j,
                                 int i) {
    const Dimensions& d = spec.dims;
    const auto& W = spec.topology.inner[j].weights();
    const int qj = d.decision_dim(j);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(qj);
    const auto own = lambda.segment(d.block_offset(j, i), qj);
    for (int xi = 0; xi < d.agents_in(j); ++xi) {
        const double w = W(i, xi);
        if (w == 0.0) continue;
        acc += w * (own - lambda.segment(d.block_offset(j, xi), qj));
    }
    return acc;
}

Eigen::VectorXd strategy_diffusion(const GameSpec& spec, const Eigen::VectorXd& x, int j, int i) {
    return lambda_diffusion(spec, x, j, i);  // same neighborhood sum, strategy layout
}

Eigen::VectorXd leader_block_diffusion(const GameSpec& spec, const Eigen::VectorXd& v, int j) {
    const Dimensions& d = spec.dims;
    const auto& WL = spec.topology.leader.weights();
    const int w = d.coupling_rows();
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(w);
    const auto own = v.segment(j * w, w);
    for (int l = 0; l < d.cluster_count(); ++l) {
        const double wt = WL(j, l);
        if (wt == 0.0) continue;
        acc += wt * (own - v.segment(l * w, w));
    }
    return acc;
}

void write_own_strategies(const Dimensions& d, const Eigen::VectorXd& x, Eigen::VectorXd& est) {
    for (int a = 0; a < d.total_agents(); ++a) {
        const int j = d.cluster_of(a);
        const int off = d.block_offset(j, d.rank_of(a));
        est.segment(d.copy_offset(a) + off, d.decision_dim(j)) = x.segment(off, d.decision_dim(j));
    }
}

const char* nonfinite_block(const StackedState& s) {
    if (!s.estimates.allFinite()) return "estimate";
    if (!s.aux.allFinite()) return "aux";
    if (!s.lambda.allFinite()) return "lambda";
    if (!s.mu.allFinite()) return "mu";
    return nullptr;
}

}  // namespace

std::pair<StackedState, StackedState> fbf_step(const GameSpec& spec, const Preconditioner& psi,
                                               double gain, const StackedState& s) {
    const StackedState a0 = apply_forward(spec, gain, s);
    const StackedState half = resolvent(spec, psi, s - psi.inverse_apply(a0));
    const StackedState a1 = apply_forward(spec, gain, half);
    StackedState next = half + psi.inverse_apply(a0 - a1);
    next.estimates = synchronize_cluster_blocks(spec.dims, std::move(next.estimates));
    return {half, next};
}

StackedState agent_half_step_1(const GameSpec& spec, const StepConfig& steps,
                               const StackedState& s) {
    const Dimensions& d = spec.dims;
    const int w = d.coupling_rows();
    const Eigen::VectorXd x = own_strategies(d, s.estimates);
    const auto grads = gradient_terms(spec, s.estimates);
    const auto diff = diffusion_terms(spec, s.estimates);

    StackedState out = s;
    Eigen::VectorXd x_new(d.strategy_dim());
    for (int a = 0; a < d.total_agents(); ++a) {
        const int j = d.cluster_of(a);
        const int i = d.rank_of(a);
        const int off = d.block_offset(j, i);
        const int qj = d.decision_dim(j);
        Eigen::VectorXd t = grads[a];
        if (i == 0) t += spec.coupling.A[j].transpose() * s.mu.segment(j * w, w);
        if (i == 0) t += steps.gain * leader_strategy_gap(spec, s.estimates, j);
        t += lambda_diffusion(spec, s.lambda, j, i);
        x_new.segment(off, qj) =
            prox_local(spec, j, i, x.segment(off, qj) - steps.rho[a] * t, steps.rho[a]);

        // estimates of the other clusters
        const double scale = steps.gain * steps.rho[a];
        const int copy = d.copy_offset(a);
        const int head = d.cluster_offset(j);
        const int tail = d.strategy_dim() - head - d.cluster_span(j);
        out.estimates.segment(copy, head) -= scale * diff[a].segment(0, head);
        out.estimates.segment(copy + head + d.cluster_span(j), tail) -=
            scale * diff[a].segment(head + d.cluster_span(j), tail);

        out.lambda.segment(off, qj) =
            s.lambda.segment(off, qj) + steps.tau[a] * strategy_diffusion(spec, x, j, i);
    }
    for (int j = 0; j < d.cluster_count(); ++j) {
        out.aux.segment(j * w, w) =
            s.aux.segment(j * w, w) - steps.sigma[j] * leader_block_diffusion(spec, s.mu, j);
        const Eigen::VectorXd drive = leader_block_diffusion(spec, s.aux, j) +
                                      spec.coupling.A[j] * x.segment(d.block_offset(j, 0),
                                                                     d.decision_dim(j)) -
                                      spec.coupling.b[j];
        out.mu.segment(j * w, w) =
            (s.mu.segment(j * w, w) + steps.nu[j] * drive).cwiseMax(0.0);
    }
    write_own_strategies(d, x_new, out.estimates);
    out.estimates = synchronize_cluster_blocks(d, std::move(out.estimates));
    return out;
}

StackedState agent_half_step_2(const GameSpec& spec, const StepConfig& steps,
                               const StackedState& s, const StackedState& half) {
    const Dimensions& d = spec.dims;
    const int w = d.coupling_rows();
    const Eigen::VectorXd x_s = own_strategies(d, s.estimates);
    const Eigen::VectorXd x_h = own_strategies(d, half.estimates);
    const auto grads_s = gradient_terms(spec, s.estimates);
    const auto grads_h = gradient_terms(spec, half.estimates);
    const auto diff_s = diffusion_terms(spec, s.estimates);
    const auto diff_h = diffusion_terms(spec, half.estimates);

    StackedState out = half;
    Eigen::VectorXd x_next(d.strategy_dim());
    for (int a = 0; a < d.total_agents(); ++a) {
        const int j = d.cluster_of(a);
        const int i = d.rank_of(a);
        const int off = d.block_offset(j, i);
        const int qj = d.decision_dim(j);

        Eigen::VectorXd t = x_h.segment(off, qj);
        if (i == 0)
            t += steps.gain * steps.rho[a] *
                 (leader_strategy_gap(spec, s.estimates, j) -
                  leader_strategy_gap(spec, half.estimates, j));
        Eigen::VectorXd inner = lambda_diffusion(spec, s.lambda, j, i) -
                                lambda_diffusion(spec, half.lambda, j, i);
        inner += grads_s[a] - grads_h[a];
        if (i == 0)
            inner += spec.coupling.A[j].transpose() *
                     (s.mu.segment(j * w, w) - half.mu.segment(j * w, w));
        x_next.segment(off, qj) = t + steps.rho[a] * inner;

        const double scale = steps.gain * steps.rho[a];
        const Eigen::VectorXd delta = diff_s[a] - diff_h[a];
        const int copy = d.copy_offset(a);
        const int head = d.cluster_offset(j);
        const int tail = d.strategy_dim() - head - d.cluster_span(j);
        out.estimates.segment(copy, head) += scale * delta.segment(0, head);
        out.estimates.segment(copy + head + d.cluster_span(j), tail) +=
            scale * delta.segment(head + d.cluster_span(j), tail);

        out.lambda.segment(off, qj) =
            half.lambda.segment(off, qj) -
            steps.tau[a] * (strategy_diffusion(spec, x_s, j, i) -
                            strategy_diffusion(spec, x_h, j, i));
    }
    for (int j = 0; j < d.cluster_count(); ++j) {
        out.aux.segment(j * w, w) =
            half.aux.segment(j * w, w) + steps.sigma[j] * (leader_block_diffusion(spec, s.mu, j) -
                                                           leader_block_diffusion(spec, half.mu, j));
        // no projection here: the coupling multiplier may leave the orthant
        const Eigen::VectorXd drive =
            leader_block_diffusion(spec, s.aux, j) - leader_block_diffusion(spec, half.aux, j) +
            spec.coupling.A[j] * (x_s.segment(d.block_offset(j, 0), d.decision_dim(j)) -
                                  x_h.segment(d.block_offset(j, 0), d.decision_dim(j)));
        out.mu.segment(j * w, w) = half.mu.segment(j * w, w) - steps.nu[j] * drive;
    }
    write_own_strategies(d, x_next, out.estimates);
    out.estimates = synchronize_cluster_blocks(d, std::move(out.estimates));
    return out;
}

StackedState default_initial_state(const GameSpec& spec) {
    const Dimensions& d = spec.dims;
    Eigen::VectorXd x(d.strategy_dim());
    for (int a = 0; a < d.total_agents(); ++a) {
        const int j = d.cluster_of(a);
        const auto& box = spec.boxes[a];
        Eigen::VectorXd mid(d.decision_dim(j));
        for (int t = 0; t < mid.size(); ++t) {
            const double lo = box.lower(t);
            const double hi = box.upper(t);
            if (std::isfinite(lo) && std::isfinite(hi))
                mid(t) = 0.5 * (lo + hi);
            else
                mid(t) = std::min(std::max(0.0, lo), hi);  // 0 clamped into the box
        }
        x.segment(d.block_offset(j, d.rank_of(a)), mid.size()) = mid;
    }
    StackedState s = StackedState::zeros(d);
    for (int a = 0; a < d.total_agents(); ++a)
        s.estimates.segment(d.copy_offset(a), d.strategy_dim()) = x;
    return s;
}

RunTrace run(const GameSpec& spec, const StepConfig& steps, const SolverOptions& options,
             const StackedState& initial) {
    const Dimensions& d = spec.dims;
    steps.validate(d);
    if (options.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
    if (options.tol_fixed_point <= 0.0 || options.tol_consensus <= 0.0)
        throw std::invalid_argument("tolerances must be positive");
    if (options.record_every < 1) throw std::invalid_argument("record_every must be at least 1");
    if (initial.estimates.size() != d.estimate_dim() || initial.aux.size() != d.multiplier_dim() ||
        initial.lambda.size() != d.strategy_dim() || initial.mu.size() != d.multiplier_dim())
        throw std::invalid_argument("initial state has wrong block sizes");

    const Preconditioner psi = Preconditioner::from_steps(d, steps);
    const Eigen::VectorXd total_b =
        [&] {
            Eigen::VectorXd b = Eigen::VectorXd::Zero(d.coupling_rows());
            for (int j = 0; j < d.cluster_count(); ++j) b += spec.coupling.b[j];
            return b;
        }();

    RunTrace trace;
    trace.lockstep = options.realization == Realization::lockstep;
    trace.has_reference = options.reference.has_value();

    StackedState s = initial;
    if (!is_synchronized(d, s.estimates)) {
        s.estimates = synchronize_cluster_blocks(d, std::move(s.estimates));
        trace.initial_sync_applied = true;
    }

    for (long k = 0; k < options.max_iters; ++k) {
        StackedState half, next;
        double gap = std::numeric_limits<double>::quiet_NaN();
        switch (options.realization) {
            case Realization::compact:
                std::tie(half, next) = fbf_step(spec, psi, steps.gain, s);
                break;
            case Realization::agent_level:
                half = agent_half_step_1(spec, steps, s);
                next = agent_half_step_2(spec, steps, s, half);
                break;
            case Realization::lockstep: {
                auto [ch, cn] = fbf_step(spec, psi, steps.gain, s);
                const StackedState ah = agent_half_step_1(spec, steps, s);
                const StackedState an = agent_half_step_2(spec, steps, s, ah);
                gap = std::max(ch.inf_diff(ah), cn.inf_diff(an));
                if (!(gap <= options.lockstep_abort)) throw LockstepError(k, gap);
                half = std::move(ch);
                next = std::move(cn);
                break;
            }
        }
        if (const char* block = nonfinite_block(half)) throw DivergenceError(k, block);
        if (const char* block = nonfinite_block(next)) throw DivergenceError(k, block);

        const double fp = next.inf_diff(s);
        const Eigen::VectorXd x = own_strategies(d, next.estimates);
        const double intra = cluster_laplacian_apply(spec, x).norm();
        const bool converged = fp <= options.tol_fixed_point && intra <= options.tol_consensus;
        const bool last = k + 1 == options.max_iters;

        if (k % options.record_every == 0 || converged || last) {
            TraceRow row;
            row.k = k;
            row.fixed_point_residual = fp;
            row.intra_consensus = intra;
            row.estimate_consensus = estimate_diffusion(spec, next.estimates).norm();
            row.multiplier_consensus = leader_laplacian_apply(spec, next.mu).norm();
            Eigen::VectorXd agg = -total_b;
            const Eigen::VectorXd per_cluster = coupling_apply(spec, x);
            for (int j = 0; j < d.cluster_count(); ++j)
                agg += per_cluster.segment(j * d.coupling_rows(), d.coupling_rows());
            row.constraint_violation = agg.cwiseMax(0.0).norm();
            row.mu_negativity = std::max(0.0, -next.mu.minCoeff());
            if (options.reference) {
                row.psi_distance = psi.norm(next - *options.reference);
                row.estimate_error = (next.estimates - options.reference->estimates).norm();
            }
            row.lockstep_gap = gap;
            if (trace.rows.empty() || trace.rows.back().k < k) trace.rows.push_back(row);
        }

        s = std::move(next);
        trace.iterations = k + 1;
        if (converged) {
            trace.converged = true;
            break;
        }
    }
    trace.final_state = std::move(s);
    return trace;
}

KktResidual kkt_residual(const GameSpec& spec, const StackedState& s) {
    const Dimensions& d = spec.dims;
    KktResidual r;
    const Eigen::VectorXd x = own_strategies(d, s.estimates);
    const Eigen::VectorXd g = extended_pseudogradient(spec, s.estimates) +
                              cluster_laplacian_apply(spec, s.lambda) +
                              coupling_adjoint(spec, s.mu);
    double acc = 0.0;
    for (int a = 0; a < d.total_agents(); ++a) {
        const int j = d.cluster_of(a);
        const int i = d.rank_of(a);
        const int off = d.block_offset(j, i);
        const int qj = d.decision_dim(j);
        acc += (x.segment(off, qj) -
                prox_local(spec, j, i, x.segment(off, qj) - g.segment(off, qj), 1.0))
                   .squaredNorm();
    }
    r.stationarity = std::sqrt(acc);
    const Eigen::VectorXd drive =
        leader_laplacian_apply(spec, s.aux) + coupling_apply(spec, x) - stacked_b(spec);
    r.complementarity = (s.mu - (s.mu + drive).cwiseMax(0.0)).norm();
    r.consensus = cluster_laplacian_apply(spec, x).norm();
    return r;
}

std::optional<StackedState> refine_fixed_point(const GameSpec& spec, const StackedState& approx) {
    if (!spec.quadratic()) return std::nullopt;
    const Dimensions& d = spec.dims;
    const int nq = d.estimate_dim();
    const int wm = d.multiplier_dim();
    const int q = d.strategy_dim();
    const int w = d.coupling_rows();
    const int total = nq + 2 * wm + q;
    const int col_aux = nq, col_lam = nq + wm, col_mu = nq + wm + q;

    const AffineMap ext = assemble_extended_map(spec);
    const Eigen::MatrixXd lam_dense = debug::dense_cluster_laplacian(spec);
    const Eigen::VectorXd x = own_strategies(d, approx.estimates);

    const int rows = (d.total_agents() - 1) * q + q + 2 * wm;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(rows, total);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
    int row = 0;

    // all copies equal the first agent's copy
    for (int a = 1; a < d.total_agents(); ++a)
        for (int c = 0; c < q; ++c) {
            J(row, d.copy_offset(a) + c) = 1.0;
            J(row, c) = -1.0;
            ++row;
        }

    // stationarity or active bound, one row per strategy coordinate
    for (int a = 0; a < d.total_agents(); ++a) {
        const int j = d.cluster_of(a);
        const int i = d.rank_of(a);
        const int qj = d.decision_dim(j);
        const auto& box = spec.boxes[a];
        for (int t = 0; t < qj; ++t) {
            const int coord = d.block_offset(j, i) + t;
            const double v = x(coord);
            const double tol = 1e-7 * (1.0 + std::abs(v));
            double bound = std::numeric_limits<double>::quiet_NaN();
            if (std::isfinite(box.lower(t)) && std::abs(v - box.lower(t)) <= tol)
                bound = box.lower(t);
            else if (std::isfinite(box.upper(t)) && std::abs(v - box.upper(t)) <= tol)
                bound = box.upper(t);
            if (std::isfinite(bound)) {
                J(row, d.copy_offset(a) + coord) = 1.0;
                rhs(row) = bound;
            } else {
                J.block(row, 0, 1, nq) = ext.matrix.row(coord);
                J.block(row, col_lam, 1, q) = lam_dense.row(coord);
                if (i == 0)
                    for (int r = 0; r < w; ++r)
                        J(row, col_mu + j * w + r) = spec.coupling.A[j](r, t);
                rhs(row) = -ext.offset(coord);
            }
            ++row;
        }
    }

    // leader-graph consensus of the coupling multipliers
    for (int j = 0; j < d.cluster_count(); ++j)
        for (int r = 0; r < w; ++r) {
            for (int l = 0; l < d.cluster_count(); ++l)
                J(row, col_mu + l * w + r) = spec.laplacians.leader(j, l);
            ++row;
        }

    // coupling feasibility rows: active components pinned, inactive mu zeroed
    for (int j = 0; j < d.cluster_count(); ++j)
        for (int r = 0; r < w; ++r) {
            if (approx.mu(j * w + r) > 1e-7) {
                const int leader = d.agent_id(j, 0);
                for (int t = 0; t < d.decision_dim(j); ++t)
                    J(row, d.copy_offset(leader) + d.block_offset(j, 0) + t) =
                        -spec.coupling.A[j](r, t);
                for (int l = 0; l < d.cluster_count(); ++l)
                    J(row, col_aux + l * w + r) = -spec.laplacians.leader(j, l);
                rhs(row) = -spec.coupling.b[j](r);
            } else {
                J(row, col_mu + j * w + r) = 1.0;
            }
            ++row;
        }

    const Eigen::VectorXd v0 = debug::flatten(approx);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(J);
    const Eigen::VectorXd delta = cod.solve(rhs - J * v0);
    const Eigen::VectorXd refined = v0 + delta;
    const double resid = (J * refined - rhs).cwiseAbs().maxCoeff();
    const double scale = 1.0 + rhs.cwiseAbs().maxCoeff();
    if (!refined.allFinite() || resid > 1e-8 * scale) return std::nullopt;
    return debug::unflatten(d, refined);
}

}  // namespace mcg
