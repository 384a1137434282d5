#include "mcg/certify.hpp"

#include <cmath>
#include <stdexcept>

#include "mcg/random.hpp"

namespace mcg {

namespace {

double spectral_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

GameConstants exact_constants(const GameSpec& spec) {
    if (!spec.quadratic())
        throw std::invalid_argument("exact constants require a quadratic payoff model");
    GameConstants c;
    c.mode = ConstantsMode::exact;
    c.certified = true;
    const AffineMap full = assemble_full_map(spec);
    const Eigen::MatrixXd sym = 0.5 * (full.matrix + full.matrix.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    c.eta = eig.eigenvalues().minCoeff();
    c.kappa0 = spectral_norm(full.matrix);
    c.kappa = spectral_norm(assemble_extended_map(spec).matrix);
    return c;
}

GameConstants sampled_constants(const GameSpec& spec, int samples, std::uint64_t seed) {
    GameConstants c;
    c.mode = ConstantsMode::sampled;
    c.certified = false;
    c.eta = std::numeric_limits<double>::infinity();
    Rng rng(seed);
    const Dimensions& d = spec.dims;
    for (int t = 0; t < samples; ++t) {
        const Eigen::VectorXd x = rng.normal_vector(d.strategy_dim());
        const Eigen::VectorXd y = rng.normal_vector(d.strategy_dim());
        const double dist = (x - y).norm();
        if (dist < 1e-12) continue;
        const Eigen::VectorXd df = full_pseudogradient(spec, x) - full_pseudogradient(spec, y);
        c.kappa0 = std::max(c.kappa0, df.norm() / dist);
        c.eta = std::min(c.eta, df.dot(x - y) / (dist * dist));

        const Eigen::VectorXd ex = rng.normal_vector(d.estimate_dim());
        const Eigen::VectorXd ey = rng.normal_vector(d.estimate_dim());
        const double edist = (ex - ey).norm();
        if (edist < 1e-12) continue;
        const Eigen::VectorXd de =
            extended_gradient_unchecked(spec, ex) - extended_gradient_unchecked(spec, ey);
        c.kappa = std::max(c.kappa, de.norm() / edist);
    }
    if (!std::isfinite(c.eta)) c.eta = 0.0;
    return c;
}

}  // namespace

GameConstants compute_constants(const GameSpec& spec, ConstantsMode mode, int samples,
                                std::uint64_t seed) {
    if (mode == ConstantsMode::exact) return exact_constants(spec);
    if (samples < 2) throw std::invalid_argument("sampled constants need at least 2 samples");
    return sampled_constants(spec, samples, seed);
}

double minimum_gain(const GameConstants& constants, double connectivity) {
    if (constants.eta <= 0.0)
        throw std::invalid_argument("gain threshold undefined: eta must be positive");
    if (connectivity <= 0.0)
        throw std::invalid_argument("gain threshold undefined: connectivity must be positive");
    const double s = constants.kappa0 + constants.kappa;
    return (s * s + 4.0 * constants.eta * constants.kappa) / (4.0 * constants.eta * connectivity);
}

MonotoneMatrix monotone_matrix(const GameConstants& constants, double gain, double connectivity,
                               int total_agents) {
    if (total_agents < 1) throw std::invalid_argument("total_agents must be at least 1");
    MonotoneMatrix out;
    const double off = -(constants.kappa + constants.kappa0) /
                       (2.0 * std::sqrt(static_cast<double>(total_agents)));
    out.m << constants.eta / total_agents, off, off, gain * connectivity - constants.kappa;
    // closed-form eigenvalue of the symmetric 2x2
    const double tr = out.m(0, 0) + out.m(1, 1);
    const double det = out.m(0, 0) * out.m(1, 1) - off * off;
    out.s_min = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
    out.psd = out.s_min >= -1e-12;
    return out;
}

double lipschitz_bound(const GameConstants& constants, double gain, double s_max_L,
                       double s_max_L0, double delta_A) {
    if (gain < 0.0 || s_max_L < 0.0 || s_max_L0 < 0.0 || delta_A < 0.0)
        throw std::invalid_argument("lipschitz_bound inputs must be nonnegative");
    const double ell1 = constants.kappa + gain * (s_max_L + s_max_L0);
    const double ell2 = 2.0 * s_max_L + 2.0 * s_max_L0 + 2.0 * delta_A;
    return ell1 + ell2;
}

StepVerdict validate_steps(const StepConfig& steps, double ell_A) {
    if (ell_A <= 0.0) throw std::invalid_argument("ell_A must be positive");
    StepVerdict v;
    auto any_nonpositive = [](const std::vector<double>& xs) {
        for (double x : xs)
            if (x <= 0.0) return true;
        return false;
    };
    if (any_nonpositive(steps.rho) || any_nonpositive(steps.tau) ||
        any_nonpositive(steps.sigma) || any_nonpositive(steps.nu)) {
        v.ok = false;
        v.detail = "all step sizes must be strictly positive";
        return v;
    }
    const double limit = 1.0 / ell_A;
    const double biggest = steps.max_step();
    v.margin = limit - biggest;
    v.ok = biggest < limit;  // open interval: the boundary is rejected
    v.detail = v.ok ? "max step " + std::to_string(biggest) + " below limit " +
                          std::to_string(limit)
                    : "max step " + std::to_string(biggest) + " not below limit " +
                          std::to_string(limit);
    return v;
}

Certificate build_certificate(const GameSpec& spec, const StepConfig& steps, int samples,
                              std::uint64_t seed) {
    Certificate cert;
    const bool quadratic = spec.quadratic() != nullptr;
    cert.constants = compute_constants(
        spec, quadratic ? ConstantsMode::exact : ConstantsMode::sampled, samples, seed);
    if (!quadratic)
        cert.notes.push_back(
            "constants are sampled lower bounds, not certified; verdicts are advisory");

    const LaplacianSet& lap = spec.laplacians;
    cert.s2_combined = algebraic_connectivity(lap.combined);
    cert.s2_literal_L = second_smallest_eigenvalue(lap.block_diag);
    cert.s2_literal_L0 = second_smallest_eigenvalue(lap.leader);
    cert.s_max_L = spectral_max(lap.block_diag);
    cert.s_max_L0 = spectral_max(lap.leader);
    for (const auto& A : spec.coupling.A) cert.delta_A = std::max(cert.delta_A, spectral_norm(A));

    cert.gain = steps.gain;
    if (cert.constants.eta > 0.0 && cert.s2_combined > 0.0) {
        cert.c_min = minimum_gain(cert.constants, cert.s2_combined);
        cert.c_ok = steps.gain >= cert.c_min;
    } else {
        cert.c_min = std::numeric_limits<double>::quiet_NaN();
        cert.c_ok = false;
        cert.notes.push_back("gain threshold undefined: eta or connectivity not positive");
    }
    const double literal = cert.s2_literal_L + cert.s2_literal_L0;
    if (cert.constants.eta > 0.0 && literal > 0.0)
        cert.c_min_literal = minimum_gain(cert.constants, literal);
    else
        cert.c_min_literal = std::numeric_limits<double>::quiet_NaN();
    cert.notes.push_back(
        "default connectivity is the smallest positive eigenvalue of the combined Laplacian; "
        "the literal per-matrix value degenerates to zero for more than one cluster");

    cert.ell_A1 = cert.constants.kappa + steps.gain * (cert.s_max_L + cert.s_max_L0);
    cert.ell_A2 = 2.0 * cert.s_max_L + 2.0 * cert.s_max_L0 + 2.0 * cert.delta_A;
    cert.ell_A = cert.ell_A1 + cert.ell_A2;
    cert.notes.push_back(
        "primal Lipschitz part scales both Laplacian spectral radii by the gain (the larger of "
        "the two published variants)");

    cert.monotone = monotone_matrix(cert.constants, steps.gain, cert.s2_combined,
                                    spec.dims.total_agents());
    const StepVerdict sv = validate_steps(steps, cert.ell_A);
    cert.max_step = steps.max_step();
    cert.step_limit = 1.0 / cert.ell_A;
    cert.steps_ok = sv.ok;
    return cert;
}

}  // namespace mcg
