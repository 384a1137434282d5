#pragma once

#include <Eigen/Dense>

#include <functional>
#include <variant>
#include <vector>

#include "mcg/graph.hpp"

namespace mcg {

// Sizes and index maps of a multi-cluster game.
//
// A "strategy vector" stacks every agent's decision block cluster by cluster
// (dimension q = sum n_j * q_j). An "estimate vector" stacks one full q-sized
// copy of the strategy vector per agent (dimension n * q); agent a's copy
// holds its view of the whole game, with the own-cluster block kept equal to
// the true cluster strategies.
class Dimensions {
public:
    static Dimensions create(std::vector<int> agents_per_cluster, std::vector<int> decision_dims,
                             int coupling_rows);

    int cluster_count() const { return static_cast<int>(agents_.size()); }
    int coupling_rows() const { return coupling_rows_; }
    int total_agents() const { return total_agents_; }
    int strategy_dim() const { return strategy_dim_; }
    int estimate_dim() const { return total_agents_ * strategy_dim_; }
    int multiplier_dim() const { return coupling_rows_ * cluster_count(); }
    // Dimension of the own-cluster copies duplicated across cluster mates
    // (sum n_j^2 q_j); estimate_dim() - duplicated_dim() is the size of the
    // stripped outside-cluster estimates.
    int duplicated_dim() const { return duplicated_dim_; }

    int agents_in(int j) const { return agents_[j]; }
    int decision_dim(int j) const { return dims_[j]; }
    int cluster_span(int j) const { return agents_[j] * dims_[j]; }
    int cluster_offset(int j) const { return cluster_offset_[j]; }
    int block_offset(int j, int i) const { return cluster_offset_[j] + i * dims_[j]; }

    int agent_id(int j, int i) const { return agent_base_[j] + i; }
    int cluster_of(int a) const { return cluster_of_[a]; }
    int rank_of(int a) const { return rank_of_[a]; }
    bool is_leader(int a) const { return rank_of_[a] == 0; }
    int copy_offset(int a) const { return a * strategy_dim_; }

    const std::vector<int>& agents_per_cluster() const { return agents_; }
    const std::vector<int>& decision_dims() const { return dims_; }

private:
    std::vector<int> agents_;
    std::vector<int> dims_;
    int coupling_rows_ = 0;
    int total_agents_ = 0;
    int strategy_dim_ = 0;
    int duplicated_dim_ = 0;
    std::vector<int> cluster_offset_;
    std::vector<int> agent_base_;
    std::vector<int> cluster_of_;
    std::vector<int> rank_of_;
};

// Per-agent box constraint; entries may be +-infinity.
struct Box {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

// One agent's smooth payoff as a quadratic form of the full strategy vector:
//   f(v) = v' quad v + lin' v + constant.
struct QuadraticTerm {
    Eigen::MatrixXd quad;
    Eigen::VectorXd lin;
    double constant = 0.0;
};

struct QuadraticModel {
    std::vector<QuadraticTerm> agent_terms;  // flat agent order
};

// Smooth payoffs supplied as callbacks. value(j, i, view) evaluates agent
// (j,i)'s payoff at a full strategy view. grad(j, owner, wrt, view) evaluates
// the gradient block of agent `owner`'s payoff with respect to agent `wrt`'s
// decision, both agents living in cluster j. Gradients are checked against
// finite differences when the game spec is built.
struct CallbackModel {
    std::function<double(int, int, const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(int, int, int, const Eigen::VectorXd&)> grad;
};

using PayoffModel = std::variant<QuadraticModel, CallbackModel>;

// Coupling constraint sum_j A[j] x_leader^j <= sum_j b[j], carried by the
// leader agent of each cluster.
struct CouplingConstraint {
    std::vector<Eigen::MatrixXd> A;  // per cluster, coupling_rows x q_j
    std::vector<Eigen::VectorXd> b;  // per cluster, coupling_rows
};

// Optional replacement for the default box projection of one agent's
// nonsmooth term: (v, step) -> argmin_u h(u) + ||u - v||^2 / (2 step).
using ProxFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)>;

struct GameSpec {
    Dimensions dims;
    PayoffModel payoffs;
    std::vector<Box> boxes;  // flat agent order
    CouplingConstraint coupling;
    ClusterTopology topology;
    LaplacianSet laplacians;
    std::vector<ProxFn> prox_overrides;  // empty entries fall back to box projection

    // Per-cluster aggregates of the quadratic terms (symmetrized), cached for
    // gradient evaluation; empty for callback models.
    std::vector<Eigen::MatrixXd> cluster_quad;
    std::vector<Eigen::VectorXd> cluster_lin;

    const QuadraticModel* quadratic() const { return std::get_if<QuadraticModel>(&payoffs); }
};

// Validates mutual consistency of all parts (dimension checks, connected
// topology, nonempty boxes, finite-difference check for callback gradients)
// and precomputes the cached aggregates.
GameSpec make_game_spec(Dimensions dims, PayoffModel payoffs, std::vector<Box> boxes,
                        CouplingConstraint coupling, ClusterTopology topology,
                        std::vector<ProxFn> prox_overrides = {});

// --- estimate vector bookkeeping ------------------------------------------

// Collects every agent's own decision block from its copy (the action of the
// own-strategy selector).
Eigen::VectorXd own_strategies(const Dimensions& dims, const Eigen::VectorXd& estimates);

// Scatters a strategy vector into the own-decision slots of an otherwise zero
// estimate vector (the adjoint of own_strategies).
Eigen::VectorXd scatter_own(const Dimensions& dims, const Eigen::VectorXd& strategy);

// Concatenates every agent's copy with its own-cluster block removed.
Eigen::VectorXd strip_own_cluster(const Dimensions& dims, const Eigen::VectorXd& estimates);

// Overwrites every agent's own-cluster block with the true cluster strategies
// taken from the owners' copies. Idempotent.
Eigen::VectorXd synchronize_cluster_blocks(const Dimensions& dims, Eigen::VectorXd estimates);

// Largest deviation between any own-cluster copy entry and the owner's value.
double synchronization_error(const Dimensions& dims, const Eigen::VectorXd& estimates);

bool is_synchronized(const Dimensions& dims, const Eigen::VectorXd& estimates, double tol = 1e-12);

// --- payoffs and gradients --------------------------------------------------

// Sum of the cluster's payoff gradients with respect to agent (j,i)'s decision,
// evaluated at a full strategy view.
Eigen::VectorXd cluster_gradient_block(const GameSpec& spec, int j, int i,
                                       const Eigen::VectorXd& view);

// Stacked per-agent cluster gradients, each evaluated at that agent's own copy.
// Requires a synchronized estimate vector; throws std::invalid_argument when
// own-cluster blocks disagree beyond 1e-12.
Eigen::VectorXd extended_pseudogradient(const GameSpec& spec, const Eigen::VectorXd& estimates);

// Same map extended to arbitrary (possibly unsynchronized) estimate vectors by
// evaluating each agent's block at its own copy. Coincides with
// extended_pseudogradient on synchronized inputs.
Eigen::VectorXd extended_gradient_unchecked(const GameSpec& spec, const Eigen::VectorXd& estimates);

// Full-information pseudo-gradient: every agent's block evaluated at the true
// strategy vector.
Eigen::VectorXd full_pseudogradient(const GameSpec& spec, const Eigen::VectorXd& x);

// Proximal step of agent (j,i)'s nonsmooth term: box projection by default, or
// the agent's prox override.
Eigen::VectorXd prox_local(const GameSpec& spec, int j, int i, const Eigen::VectorXd& v,
                           double step);

struct PayoffValue {
    double value = 0.0;
    bool feasible = true;  // own decision inside the box
};

// Payoff of agent (j,i) at a full strategy view; reports +infinity with
// feasible=false when the agent's decision violates its box.
PayoffValue payoff_value(const GameSpec& spec, int j, int i, const Eigen::VectorXd& view);

// --- affine structure (quadratic models only) -------------------------------

struct AffineMap {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd offset;
};

// Full-information pseudo-gradient as an affine map F(x) = matrix x + offset.
AffineMap assemble_full_map(const GameSpec& spec);

// Extended pseudo-gradient as an affine map of the (unsynchronized) estimate
// vector, matrix of size q x (n q).
AffineMap assemble_extended_map(const GameSpec& spec);

}  // namespace mcg
