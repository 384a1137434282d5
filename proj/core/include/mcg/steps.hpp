#pragma once

#include <vector>

#include "mcg/game.hpp"

namespace mcg {

// Fixed step sizes of the iteration: one primal step (rho) and one
// intra-cluster multiplier step (tau) per agent, one auxiliary step (sigma)
// and one coupling-multiplier step (nu) per cluster, plus the consensus
// strength `gain`.
struct StepConfig {
    std::vector<double> rho;
    std::vector<double> tau;
    std::vector<double> sigma;
    std::vector<double> nu;
    double gain = 0.0;

    static StepConfig uniform(const Dimensions& dims, double step, double gain);

    // Throws std::invalid_argument unless every step is strictly positive and
    // the per-agent/per-cluster vectors match the dimensions.
    void validate(const Dimensions& dims) const;

    double max_step() const;
};

}  // namespace mcg
