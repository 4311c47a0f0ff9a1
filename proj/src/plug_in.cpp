#include "exo/plug_in.hpp"

#include <cmath>

namespace exo {

double plug_in_l1_bound(int d, int horizon, int k, int episodes, double delta) {
    if (k < 2) throw ContractError("plug_in_l1_bound: needs k >= 2");
    const double n = static_cast<double>(horizon) * (k - 1);
    return std::sqrt(4.0 * (d + 2.0 * std::log(2.0 * episodes / delta)) / n);
}

double plug_in_regret_bound(int d, int horizon, int episodes, double delta) {
    return 9.0 * std::pow(horizon, 1.5) *
           std::sqrt((d + 2.0 * std::log(2.0 * episodes / delta)) * episodes);
}

PlugIn::PlugIn(const ExoMdp& structure)
    : structure_(structure), counts_(static_cast<std::size_t>(structure.n_exo()), 0.0) {
    if (!structure.time_homogeneous()) {
        throw ContractError("PlugIn: needs a time-homogeneous exogenous process");
    }
}

ProbVec PlugIn::estimate() const { return ProbVec::from_counts(counts_); }

EpisodePolicy PlugIn::current_policy() {
    if (!policy_) policy_ = dp_solve(structure_, {estimate()}).policy;
    return *policy_;
}

void PlugIn::observe_episode(const Trajectory& trajectory) {
    if (trajectory.exo.size() != trajectory.steps.size() || trajectory.exo.empty()) {
        throw ModeError("plug-in needs the exogenous symbol of every stage");
    }
    for (int xi : trajectory.exo) {
        if (xi < 0 || xi >= structure_.n_exo()) throw ContractError("PlugIn: symbol out of range");
        counts_[static_cast<std::size_t>(xi)] += 1.0;
        ++total_;
    }
    policy_.reset();
}

}  // namespace exo
