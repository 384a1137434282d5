#pragma once

#include <Eigen/Dense>

#include "mcg/game.hpp"
#include "mcg/steps.hpp"

namespace mcg {

// Stacked iterate (estimates, aux, lambda, mu). Every serialization uses this
// block order.
struct StackedState {
    Eigen::VectorXd estimates;  // n * q
    Eigen::VectorXd aux;        // w * m
    Eigen::VectorXd lambda;     // q
    Eigen::VectorXd mu;         // w * m

    static StackedState zeros(const Dimensions& dims);

    long size() const { return estimates.size() + aux.size() + lambda.size() + mu.size(); }
    bool all_finite() const;
    double inf_diff(const StackedState& other) const;
    double squared_norm() const;

    StackedState& operator+=(const StackedState& o);
    StackedState& operator-=(const StackedState& o);
};

StackedState operator+(StackedState a, const StackedState& b);
StackedState operator-(StackedState a, const StackedState& b);
StackedState operator*(double t, StackedState s);
double dot(const StackedState& a, const StackedState& b);

// Diagonal preconditioner of inverse step sizes: weight 1/rho_a on agent a's
// whole estimate copy, 1/sigma_j on cluster j's aux block, 1/tau_a on agent
// a's lambda block, 1/nu_j on cluster j's mu block.
class Preconditioner {
public:
    static Preconditioner from_steps(const Dimensions& dims, const StepConfig& steps);

    StackedState apply(const StackedState& s) const;          // multiply by Psi
    StackedState inverse_apply(const StackedState& s) const;  // multiply by Psi^{-1}
    double norm(const StackedState& s) const;                 // Psi-induced norm
    double min_weight() const;                                // s_min(Psi)

    double rho(int agent) const { return rho_[agent]; }

private:
    // per-coordinate step sizes, block order (estimates, aux, lambda, mu)
    Eigen::VectorXd step_est_, step_aux_, step_lam_, step_mu_;
    std::vector<double> rho_;
};

// --- building blocks ---------------------------------------------------------

Eigen::VectorXd stacked_b(const GameSpec& spec);  // col(b^j), length w*m

// Per-cluster coupling action on a strategy vector: block j is A^j times the
// leader block of cluster j.
Eigen::VectorXd coupling_apply(const GameSpec& spec, const Eigen::VectorXd& x);

// Adjoint: scatters A^j' mu^j into the leader blocks of a strategy vector.
Eigen::VectorXd coupling_adjoint(const GameSpec& spec, const Eigen::VectorXd& mu);

// Block-diagonal cluster Laplacian acting on strategy-shaped vectors (each
// cluster's Laplacian applied across its agents' blocks).
Eigen::VectorXd cluster_laplacian_apply(const GameSpec& spec, const Eigen::VectorXd& v);

// Leader Laplacian acting on per-cluster w-blocks (aux / mu shaped vectors).
Eigen::VectorXd leader_laplacian_apply(const GameSpec& spec, const Eigen::VectorXd& v);

// Combined consensus diffusion on estimate vectors: every agent's copy is
// diffused over its inner graph, leader copies additionally over the leader
// graph. Annihilates exactly the all-copies-equal subspace.
Eigen::VectorXd estimate_diffusion(const GameSpec& spec, const Eigen::VectorXd& estimates);

// --- operators ----------------------------------------------------------------

// Skew coupling of the stacked iterate.
StackedState apply_phi(const GameSpec& spec, const StackedState& s);

// Single-valued forward operator: stacked pseudo-gradient plus gain-weighted
// consensus diffusion on the estimate block, the coupling constants on the mu
// block, plus the skew coupling. Requires synchronized estimates.
StackedState apply_forward(const GameSpec& spec, double gain, const StackedState& s);

// Resolvent of the preconditioned nonsmooth part: proximal step on each
// agent's own decision block (weight rho_a), projection of mu onto the
// nonnegative orthant, everything else unchanged, followed by cluster
// synchronization of the estimates.
StackedState resolvent(const GameSpec& spec, const Preconditioner& psi, const StackedState& s);

// Dense assemblies of the matrix-free operators, for validation on small
// instances only.
namespace debug {

Eigen::VectorXd flatten(const StackedState& s);
StackedState unflatten(const Dimensions& dims, const Eigen::VectorXd& v);

Eigen::MatrixXd dense_phi(const GameSpec& spec);
Eigen::MatrixXd dense_estimate_diffusion(const GameSpec& spec);  // (nq) x (nq)
Eigen::MatrixXd dense_selector_own(const GameSpec& spec);        // q x (nq)
Eigen::MatrixXd dense_selector_outside(const GameSpec& spec);    // (nq - dup) x (nq)
Eigen::MatrixXd dense_coupling(const GameSpec& spec);            // (wm) x q
Eigen::MatrixXd dense_cluster_laplacian(const GameSpec& spec);   // q x q
Eigen::MatrixXd dense_leader_laplacian(const GameSpec& spec);    // (wm) x (wm)

}  // namespace debug

}  // namespace mcg
