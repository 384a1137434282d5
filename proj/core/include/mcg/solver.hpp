#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mcg/operators.hpp"

namespace mcg {

enum class Realization { compact, agent_level, lockstep };

struct SolverOptions {
    long max_iters = 200000;
    double tol_fixed_point = 1e-8;   // on ||next - current||_inf
    double tol_consensus = 1e-6;     // on the intra-cluster consensus residual
    long record_every = 1;
    Realization realization = Realization::compact;
    std::optional<StackedState> reference;  // enables distance traces
    double lockstep_abort = 1e-6;
};

struct TraceRow {
    long k = 0;
    double fixed_point_residual = 0.0;
    double intra_consensus = 0.0;
    double estimate_consensus = 0.0;
    double multiplier_consensus = 0.0;
    double constraint_violation = 0.0;
    double psi_distance = std::numeric_limits<double>::quiet_NaN();
    double estimate_error = std::numeric_limits<double>::quiet_NaN();
    double mu_negativity = 0.0;
    double lockstep_gap = std::numeric_limits<double>::quiet_NaN();
};

struct RunTrace {
    std::vector<TraceRow> rows;
    StackedState final_state;
    long iterations = 0;
    bool converged = false;
    bool has_reference = false;
    bool lockstep = false;
    bool initial_sync_applied = false;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(long k, const std::string& block)
        : std::runtime_error("non-finite value in the " + block + " block at iteration " +
                             std::to_string(k)),
          iteration(k) {}
    long iteration;
};

class LockstepError : public std::runtime_error {
public:
    LockstepError(long k, double gap)
        : std::runtime_error("compact and agent-level realizations disagree by " +
                             std::to_string(gap) + " at iteration " + std::to_string(k)),
          iteration(k),
          gap(gap) {}
    long iteration;
    double gap;
};

// One two-phase step: forward evaluation, resolvent, corrective forward
// evaluation. Returns the intermediate and the next iterate, both with
// synchronized estimates.
std::pair<StackedState, StackedState> fbf_step(const GameSpec& spec, const Preconditioner& psi,
                                               double gain, const StackedState& s);

// Message-level realization of the same two phases, written agent by agent
// with explicit neighborhood sums. Leader-only terms are gated by the leader
// weights; the second phase consumes differences between the two evaluation
// points and applies no projection to mu.
StackedState agent_half_step_1(const GameSpec& spec, const StepConfig& steps,
                               const StackedState& s);
StackedState agent_half_step_2(const GameSpec& spec, const StepConfig& steps,
                               const StackedState& s, const StackedState& half);

StackedState default_initial_state(const GameSpec& spec);

RunTrace run(const GameSpec& spec, const StepConfig& steps, const SolverOptions& options,
             const StackedState& initial);

struct KktResidual {
    double stationarity = 0.0;    // natural-map residual of the primal block
    double complementarity = 0.0; // fixed-point residual of the mu block
    double consensus = 0.0;       // intra-cluster strategy consensus
};

KktResidual kkt_residual(const GameSpec& spec, const StackedState& s);

// Projects an approximate limit of the iteration onto the solution manifold by
// one minimum-norm Newton step on the active-set KKT system. Quadratic models
// only; returns nothing when the model is not quadratic or the refined point
// fails verification.
std::optional<StackedState> refine_fixed_point(const GameSpec& spec, const StackedState& approx);

}  // namespace mcg
