#include "mcg/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace mcg {

StackedState StackedState::zeros(const Dimensions& dims) {
    StackedState s;
    s.estimates = Eigen::VectorXd::Zero(dims.estimate_dim());
    s.aux = Eigen::VectorXd::Zero(dims.multiplier_dim());
    s.lambda = Eigen::VectorXd::Zero(dims.strategy_dim());
    s.mu = Eigen::VectorXd::Zero(dims.multiplier_dim());
    return s;
}

bool StackedState::all_finite() const {
    return estimates.allFinite() && aux.allFinite() && lambda.allFinite() && mu.allFinite();
}

double StackedState::inf_diff(const StackedState& other) const {
    double d = (estimates - other.estimates).cwiseAbs().maxCoeff();
    d = std::max(d, (aux - other.aux).cwiseAbs().maxCoeff());
    d = std::max(d, (lambda - other.lambda).cwiseAbs().maxCoeff());
    d = std::max(d, (mu - other.mu).cwiseAbs().maxCoeff());
    return d;
}

double StackedState::squared_norm() const {
    return estimates.squaredNorm() + aux.squaredNorm() + lambda.squaredNorm() + mu.squaredNorm();
}

StackedState& StackedState::operator+=(const StackedState& o) {
    estimates += o.estimates;
    aux += o.aux;
    lambda += o.lambda;
    mu += o.mu;
    return *this;
}

StackedState& StackedState::operator-=(const StackedState& o) {
    estimates -= o.estimates;
    aux -= o.aux;
    lambda -= o.lambda;
    mu -= o.mu;
    return *this;
}

StackedState operator+(StackedState a, const StackedState& b) { return a += b; }
StackedState operator-(StackedState a, const StackedState& b) { return a -= b; }

StackedState operator*(double t, StackedState s) {
    s.estimates *= t;
    s.aux *= t;
    s.lambda *= t;
    s.mu *= t;
    return s;
}

double dot(const StackedState& a, const StackedState& b) {
    return a.estimates.dot(b.estimates) + a.aux.dot(b.aux) + a.lambda.dot(b.lambda) +
           a.mu.dot(b.mu);
}

Preconditioner Preconditioner::from_steps(const Dimensions& dims, const StepConfig& steps) {
    steps.validate(dims);
    Preconditioner p;
    p.rho_ = steps.rho;
    p.step_est_.resize(dims.estimate_dim());
    p.step_lam_.resize(dims.strategy_dim());
    for (int a = 0; a < dims.total_agents(); ++a) {
        const int j = dims.cluster_of(a);
        p.step_est_.segment(dims.copy_offset(a), dims.strategy_dim()).setConstant(steps.rho[a]);
        p.step_lam_.segment(dims.block_offset(j, dims.rank_of(a)), dims.decision_dim(j))
            .setConstant(steps.tau[a]);
    }
    p.step_aux_.resize(dims.multiplier_dim());
    p.step_mu_.resize(dims.multiplier_dim());
    for (int j = 0; j < dims.cluster_count(); ++j) {
        p.step_aux_.segment(j * dims.coupling_rows(), dims.coupling_rows())
            .setConstant(steps.sigma[j]);
        p.step_mu_.segment(j * dims.coupling_rows(), dims.coupling_rows()).setConstant(steps.nu[j]);
    }
    return p;
}

StackedState Preconditioner::apply(const StackedState& s) const {
    StackedState out = s;
    out.estimates.array() /= step_est_.array();
    out.aux.array() /= step_aux_.array();
    out.lambda.array() /= step_lam_.array();
    out.mu.array() /= step_mu_.array();
    return out;
}

StackedState Preconditioner::inverse_apply(const StackedState& s) const {
    StackedState out = s;
    out.estimates.array() *= step_est_.array();
    out.aux.array() *= step_aux_.array();
    out.lambda.array() *= step_lam_.array();
    out.mu.array() *= step_mu_.array();
    return out;
}

double Preconditioner::norm(const StackedState& s) const {
    double acc = (s.estimates.array().square() / step_est_.array()).sum();
    acc += (s.aux.array().square() / step_aux_.array()).sum();
    acc += (s.lambda.array().square() / step_lam_.array()).sum();
    acc += (s.mu.array().square() / step_mu_.array()).sum();
    return std::sqrt(acc);
}

double Preconditioner::min_weight() const {
    const double biggest =
        std::max(std::max(step_est_.maxCoeff(), step_aux_.maxCoeff()),
                 std::max(step_lam_.maxCoeff(), step_mu_.maxCoeff()));
    return 1.0 / biggest;
}

Eigen::VectorXd stacked_b(const GameSpec& spec) {
    const Dimensions& d = spec.dims;
    Eigen::VectorXd out(d.multiplier_dim());
    for (int j = 0; j < d.cluster_count(); ++j)
        out.segment(j * d.coupling_rows(), d.coupling_rows()) = spec.coupling.b[j];
    return out;
}

Eigen::VectorXd coupling_apply(const GameSpec& spec, const Eigen::VectorXd& x) {
    const Dimensions& d = spec.dims;
    if (x.size() != d.strategy_dim())
        throw std::invalid_argument("strategy vector has wrong length");
    Eigen::VectorXd out(d.multiplier_dim());
    for (int j = 0; j < d.cluster_count(); ++j)
        out.segment(j * d.coupling_rows(), d.coupling_rows()) =
            spec.coupling.A[j] * x.segment(d.block_offset(j, 0), d.decision_dim(j));
    return out;
}

Eigen::VectorXd coupling_adjoint(const GameSpec& spec, const Eigen::VectorXd& mu) {
    const Dimensions& d = spec.dims;
    if (mu.size() != d.multiplier_dim())
        throw std::invalid_argument("multiplier vector has wrong length");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(d.strategy_dim());
    for (int j = 0; j < d.cluster_count(); ++j)
        out.segment(d.block_offset(j, 0), d.decision_dim(j)) =
            spec.coupling.A[j].transpose() * mu.segment(j * d.coupling_rows(), d.coupling_rows());
    return out;
}

Eigen::VectorXd cluster_laplacian_apply(const GameSpec& spec, const Eigen::VectorXd& v) {
    const Dimensions& d = spec.dims;
    if (v.size() != d.strategy_dim())
        throw std::invalid_argument("strategy vector has wrong length");
    Eigen::VectorXd out(d.strategy_dim());
    for (int j = 0; j < d.cluster_count(); ++j) {
        const int qj = d.decision_dim(j);
        const int nj = d.agents_in(j);
        Eigen::Map<const Eigen::MatrixXd> in(v.data() + d.cluster_offset(j), qj, nj);
        Eigen::Map<Eigen::MatrixXd> res(out.data() + d.cluster_offset(j), qj, nj);
        res.noalias() = in * spec.laplacians.per_cluster[j];
    }
    return out;
}

Eigen::VectorXd leader_laplacian_apply(const GameSpec& spec, const Eigen::VectorXd& v) {
    const Dimensions& d = spec.dims;
    if (v.size() != d.multiplier_dim())
        throw std::invalid_argument("multiplier vector has wrong length");
    Eigen::Map<const Eigen::MatrixXd> in(v.data(), d.coupling_rows(), d.cluster_count());
    Eigen::VectorXd out(d.multiplier_dim());
    Eigen::Map<Eigen::MatrixXd> res(out.data(), d.coupling_rows(), d.cluster_count());
    res.noalias() = in * spec.laplacians.leader;
    return out;
}

Eigen::VectorXd estimate_diffusion(const GameSpec& spec, const Eigen::VectorXd& estimates) {
    const Dimensions& d = spec.dims;
    if (estimates.size() != d.estimate_dim())
        throw std::invalid_argument("estimate vector has wrong length");
    Eigen::Map<const Eigen::MatrixXd> in(estimates.data(), d.strategy_dim(), d.total_agents());
    Eigen::VectorXd out(d.estimate_dim());
    Eigen::Map<Eigen::MatrixXd> res(out.data(), d.strategy_dim(), d.total_agents());
    res.noalias() = in * spec.laplacians.combined;
    return out;
}

StackedState apply_phi(const GameSpec& spec, const StackedState& s) {
    const Dimensions& d = spec.dims;
    StackedState out;
    out.estimates =
        scatter_own(d, cluster_laplacian_apply(spec, s.lambda) + coupling_adjoint(spec, s.mu));
    out.aux = leader_laplacian_apply(spec, s.mu);
    const Eigen::VectorXd x = own_strategies(d, s.estimates);
    out.lambda = -cluster_laplacian_apply(spec, x);
    out.mu = -coupling_apply(spec, x) - leader_laplacian_apply(spec, s.aux);
    return out;
}

StackedState apply_forward(const GameSpec& spec, double gain, const StackedState& s) {
    StackedState out = apply_phi(spec, s);
    out.estimates += scatter_own(spec.dims, extended_pseudogradient(spec, s.estimates));
    out.estimates += gain * estimate_diffusion(spec, s.estimates);
    out.mu += stacked_b(spec);
    return out;
}

StackedState resolvent(const GameSpec& spec, const Preconditioner& psi, const StackedState& s) {
    const Dimensions& d = spec.dims;
    StackedState out = s;
    for (int a = 0; a < d.total_agents(); ++a) {
        const int j = d.cluster_of(a);
        const int i = d.rank_of(a);
        const int off = d.copy_offset(a) + d.block_offset(j, i);
        out.estimates.segment(off, d.decision_dim(j)) =
            prox_local(spec, j, i, s.estimates.segment(off, d.decision_dim(j)), psi.rho(a));
    }
    out.mu = s.mu.cwiseMax(0.0);
    out.estimates = synchronize_cluster_blocks(d, std::move(out.estimates));
    return out;
}

namespace debug {

Eigen::VectorXd flatten(const StackedState& s) {
    Eigen::VectorXd v(s.size());
    v << s.estimates, s.aux, s.lambda, s.mu;
    return v;
}

StackedState unflatten(const Dimensions& dims, const Eigen::VectorXd& v) {
    StackedState s;
    int pos = 0;
    s.estimates = v.segment(pos, dims.estimate_dim());
    pos += dims.estimate_dim();
    s.aux = v.segment(pos, dims.multiplier_dim());
    pos += dims.multiplier_dim();
    s.lambda = v.segment(pos, dims.strategy_dim());
    pos += dims.strategy_dim();
    s.mu = v.segment(pos, dims.multiplier_dim());
    return s;
}

Eigen::MatrixXd dense_selector_own(const GameSpec& spec) {
    const Dimensions& d = spec.dims;
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(d.strategy_dim(), d.estimate_dim());
    for (int a = 0; a < d.total_agents(); ++a) {
        const int off = d.block_offset(d.cluster_of(a), d.rank_of(a));
        for (int s = 0; s < d.decision_dim(d.cluster_of(a)); ++s)
            R(off + s, d.copy_offset(a) + off + s) = 1.0;
    }
    return R;
}

Eigen::MatrixXd dense_selector_outside(const GameSpec& spec) {
    const Dimensions& d = spec.dims;
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d.estimate_dim() - d.duplicated_dim(), d.estimate_dim());
    int row = 0;
    for (int a = 0; a < d.total_agents(); ++a) {
        const int j = d.cluster_of(a);
        for (int c = 0; c < d.strategy_dim(); ++c) {
            if (c >= d.cluster_offset(j) && c < d.cluster_offset(j) + d.cluster_span(j)) continue;
            S(row++, d.copy_offset(a) + c) = 1.0;
        }
    }
    return S;
}

Eigen::MatrixXd dense_cluster_laplacian(const GameSpec& spec) {
    const Dimensions& d = spec.dims;
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d.strategy_dim(), d.strategy_dim());
    for (int j = 0; j < d.cluster_count(); ++j) {
        const int qj = d.decision_dim(j);
        const auto& Lj = spec.laplacians.per_cluster[j];
        for (int i = 0; i < d.agents_in(j); ++i)
            for (int k = 0; k < d.agents_in(j); ++k)
                L.block(d.block_offset(j, i), d.block_offset(j, k), qj, qj) =
                    Lj(i, k) * Eigen::MatrixXd::Identity(qj, qj);
    }
    return L;
}

Eigen::MatrixXd dense_leader_laplacian(const GameSpec& spec) {
    const Dimensions& d = spec.dims;
    const int w = d.coupling_rows();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d.multiplier_dim(), d.multiplier_dim());
    for (int j = 0; j < d.cluster_count(); ++j)
        for (int l = 0; l < d.cluster_count(); ++l)
            L.block(j * w, l * w, w, w) =
                spec.laplacians.leader(j, l) * Eigen::MatrixXd::Identity(w, w);
    return L;
}

Eigen::MatrixXd dense_coupling(const GameSpec& spec) {
    const Dimensions& d = spec.dims;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(d.multiplier_dim(), d.strategy_dim());
    for (int j = 0; j < d.cluster_count(); ++j)
        C.block(j * d.coupling_rows(), d.block_offset(j, 0), d.coupling_rows(),
                d.decision_dim(j)) = spec.coupling.A[j];
    return C;
}

Eigen::MatrixXd dense_estimate_diffusion(const GameSpec& spec) {
    const Dimensions& d = spec.dims;
    const int q = d.strategy_dim();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d.estimate_dim(), d.estimate_dim());
    for (int a = 0; a < d.total_agents(); ++a)
        for (int b = 0; b < d.total_agents(); ++b)
            out.block(a * q, b * q, q, q) =
                spec.laplacians.combined(a, b) * Eigen::MatrixXd::Identity(q, q);
    return out;
}

Eigen::MatrixXd dense_phi(const GameSpec& spec) {
    const Dimensions& d = spec.dims;
    const int nq = d.estimate_dim();
    const int wm = d.multiplier_dim();
    const int q = d.strategy_dim();
    const int total = nq + 2 * wm + q;
    const Eigen::MatrixXd R = dense_selector_own(spec);
    const Eigen::MatrixXd L = dense_cluster_laplacian(spec);
    const Eigen::MatrixXd L0 = dense_leader_laplacian(spec);
    const Eigen::MatrixXd C = dense_coupling(spec);

    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(total, total);
    const int z0 = nq, l0 = nq + wm, m0 = nq + wm + q;
    phi.block(0, l0, nq, q) = R.transpose() * L.transpose();
    phi.block(0, m0, nq, wm) = R.transpose() * C.transpose();
    phi.block(z0, m0, wm, wm) = L0;
    phi.block(l0, 0, q, nq) = -L * R;
    phi.block(m0, 0, wm, nq) = -C * R;
    phi.block(m0, z0, wm, wm) = -L0;
    return phi;
}

}  // namespace debug

}  // namespace mcg
