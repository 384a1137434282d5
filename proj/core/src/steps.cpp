#include "mcg/steps.hpp"

#include <algorithm>
#include <stdexcept>

namespace mcg {

StepConfig StepConfig::uniform(const Dimensions& dims, double step, double gain) {
    StepConfig s;
    s.rho.assign(dims.total_agents(), step);
    s.tau.assign(dims.total_agents(), step);
    s.sigma.assign(dims.cluster_count(), step);
    s.nu.assign(dims.cluster_count(), step);
    s.gain = gain;
    return s;
}

void StepConfig::validate(const Dimensions& dims) const {
    const auto n = static_cast<std::size_t>(dims.total_agents());
    const auto m = static_cast<std::size_t>(dims.cluster_count());
    if (rho.size() != n || tau.size() != n)
        throw std::invalid_argument("rho and tau need one entry per agent");
    if (sigma.size() != m || nu.size() != m)
        throw std::invalid_argument("sigma and nu need one entry per cluster");
    auto positive = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0; });
    };
    if (!positive(rho) || !positive(tau) || !positive(sigma) || !positive(nu))
        throw std::invalid_argument("all step sizes must be strictly positive");
    if (gain <= 0.0) throw std::invalid_argument("consensus gain must be positive");
}

double StepConfig::max_step() const {
    double s = 0.0;
    for (double v : rho) s = std::max(s, v);
    for (double v : tau) s = std::max(s, v);
    for (double v : sigma) s = std::max(s, v);
    for (double v : nu) s = std::max(s, v);
    return s;
}

}  // namespace mcg
