#pragma once

// Plug-in method: estimate the exogenous distribution from observed draws
// and act optimally for the estimate.

#include <optional>
#include <vector>

#include "exo/core.hpp"
#include "exo/learner.hpp"

namespace exo {

/// ||p - p_hat^k||_1 bound after k - 1 episodes of H draws each, holding
/// with probability 1 - delta simultaneously over K episodes.
double plug_in_l1_bound(int d, int horizon, int k, int episodes, double delta);

/// Regret bound 9 H^{3/2} sqrt((d + 2 log(2K/delta)) K).
double plug_in_regret_bound(int d, int horizon, int episodes, double delta);

class PlugIn : public Learner {
public:
    /// `structure` carries f and g; its schedule is ignored.
    explicit PlugIn(const ExoMdp& structure);

    std::string name() const override { return "plug_in"; }
    ObservationMode required_mode() const override { return ObservationMode::Full; }

    /// dp_solve under the current estimate (uniform before any data).
    EpisodePolicy current_policy() override;

    /// Throws ModeError when the trajectory carries no exogenous symbols.
    void observe_episode(const Trajectory& trajectory) override;

    const std::vector<double>& counts() const { return counts_; }
    long long total() const { return total_; }
    ProbVec estimate() const;

private:
    ExoMdp structure_;
    std::vector<double> counts_;
    long long total_ = 0;
    std::optional<Policy> policy_;
};

}  // namespace exo
