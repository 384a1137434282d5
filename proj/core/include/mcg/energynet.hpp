#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "mcg/game.hpp"

namespace mcg {

struct Range {
    double lo = 0.0;
    double hi = 1.0;
};

// Sampling ranges of the energy-market scenario generator.
struct EIRanges {
    Range capacity{5.0, 10.0};        // storage capacity (box upper bound)
    Range constraint_rhs{1.0, 2.0};   // per-cluster coupling budget
    Range price{10.0, 20.0};          // demand intercept per utility
    Range slope{1.0, 3.0};            // demand slope per utility
    Range cost_linear{1.0, 2.0};
    Range cost_quadratic{1.0, 8.0};   // diagonal production cost entries
    double offset_coef = 3.0;         // constant payoff offset times the 1-based agent index
};

enum class GraphKind { complete, ring, star, custom };

struct GraphSpec {
    GraphKind kind = GraphKind::complete;
    double weight = 1.0;
    std::vector<std::tuple<int, int, double>> edges;  // used when kind == custom (1-based)
};

struct EITopology {
    GraphSpec inner;   // applied to every cluster
    GraphSpec leader;
};

// One prosumer: quadratic production cost, storage capacity, per-utility
// demand intercept/slope, and the allocation matrix routing decision
// components to utilities (each column has exactly one 1).
struct ProsumerData {
    Eigen::VectorXd cost_quad_diag;  // q_j
    Eigen::VectorXd cost_lin;        // q_j
    Eigen::VectorXd capacity;        // q_j
    Eigen::VectorXd price;           // w
    Eigen::VectorXd slope;           // w
    Eigen::MatrixXd alloc;           // w x q_j
};

struct EIScenario {
    Dimensions dims;
    std::vector<ProsumerData> prosumers;  // flat agent order
    std::vector<Eigen::MatrixXd> A;       // per cluster, w x q_j
    std::vector<Eigen::VectorXd> b;       // per cluster, w
    double offset_coef = 3.0;
    std::uint64_t seed = 0;
    EITopology topology;
    EIRanges ranges;
};

// Deterministic in (seed, arguments). The default arguments reproduce the
// benchmark shape: clusters of 4, 2 and 3 prosumers competing for 2 utilities
// with two-dimensional decisions.
EIScenario generate_scenario(std::uint64_t seed, const std::vector<int>& sizes = {4, 2, 3},
                             int utilities = 2, std::vector<int> decision_dims = {},
                             const EIRanges& ranges = {}, const EITopology& topology = {});

WeightedGraph build_graph(const GraphSpec& g, int nodes);

// Closed-form cluster gradient of prosumer (j,i): the sum of the cluster's
// payoff gradients with respect to x_i^j, evaluated at the cluster strategy
// plus the prosumer's estimates of everyone outside the cluster. Written
// directly from the payoff definition, independent of the GameSpec path.
Eigen::VectorXd ei_payoff_gradient(const EIScenario& sc, int j, int i,
                                   const Eigen::VectorXd& cluster_strategy,
                                   const Eigen::VectorXd& outside_estimates);

double ei_payoff_value(const EIScenario& sc, int j, int i, const Eigen::VectorXd& view);

// Quadratic GameSpec with boxes [0, capacity] and the scenario topology.
GameSpec build_ei_gamespec(const EIScenario& sc);

}  // namespace mcg
