#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcg/game.hpp"
#include "mcg/steps.hpp"

namespace mcg {

enum class ConstantsMode { exact, sampled };

// Strong-monotonicity modulus and Lipschitz constants of the pseudo-gradient
// maps. Exact values come from the spectra of the assembled affine maps and
// are only available for quadratic models; sampled values are empirical lower
// bounds and carry certified = false.
struct GameConstants {
    double eta = 0.0;     // strong monotonicity of the full map
    double kappa0 = 0.0;  // Lipschitz constant of the full map
    double kappa = 0.0;   // Lipschitz constant of the extended map
    ConstantsMode mode = ConstantsMode::exact;
    bool certified = true;
};

struct MonotoneMatrix {
    Eigen::Matrix2d m;
    double s_min = 0.0;
    bool psd = false;
};

struct StepVerdict {
    bool ok = false;
    double margin = 0.0;  // 1/ell_A - max step
    std::string detail;
};

struct Certificate {
    GameConstants constants;
    double s2_combined = 0.0;   // smallest positive eigenvalue of the combined Laplacian
    double s2_literal_L = 0.0;  // literal second-smallest eigenvalue of the block diagonal
    double s2_literal_L0 = 0.0;
    double s_max_L = 0.0;
    double s_max_L0 = 0.0;
    double delta_A = 0.0;  // max over clusters of the coupling matrix spectral norm
    double c_min = 0.0;    // threshold with the combined connectivity (default)
    double c_min_literal = 0.0;
    double gain = 0.0;
    double ell_A = 0.0;
    double ell_A1 = 0.0;
    double ell_A2 = 0.0;
    MonotoneMatrix monotone;
    double max_step = 0.0;
    double step_limit = 0.0;  // 1/ell_A
    bool c_ok = false;
    bool steps_ok = false;
    std::vector<std::string> notes;
};

// Exact mode requires a quadratic model (throws otherwise); sampled mode draws
// `samples` seeded random pairs and reports empirical bounds.
GameConstants compute_constants(const GameSpec& spec, ConstantsMode mode, int samples = 1000,
                                std::uint64_t seed = 1);

// Threshold on the consensus gain: ((kappa0+kappa)^2 + 4 eta kappa) /
// (4 eta connectivity). Throws when eta or the connectivity is not positive.
double minimum_gain(const GameConstants& constants, double connectivity);

// The 2x2 matrix whose positive semidefiniteness certifies restricted
// monotonicity of the forward operator's primal block.
MonotoneMatrix monotone_matrix(const GameConstants& constants, double gain, double connectivity,
                               int total_agents);

// Lipschitz bound of the forward operator. Both Laplacian terms of the primal
// part are scaled by the gain (the conservative variant).
double lipschitz_bound(const GameConstants& constants, double gain, double s_max_L,
                       double s_max_L0, double delta_A);

// Accepts iff all steps are strictly positive and the largest is strictly
// below 1 / ell_A.
StepVerdict validate_steps(const StepConfig& steps, double ell_A);

Certificate build_certificate(const GameSpec& spec, const StepConfig& steps, int samples = 1000,
                              std::uint64_t seed = 1);

}  // namespace mcg
