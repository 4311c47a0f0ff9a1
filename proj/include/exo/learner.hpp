#pragma once

// Common interface for online learners and the episode loop that drives
// them against an environment with exact per-episode valuation.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "exo/core.hpp"

namespace exo {

using EpisodePolicy = std::variant<Policy, StochasticPolicy>;

double policy_value(const ExoMdp& mdp, const ExoSchedule& schedule, const EpisodePolicy& policy);

/// An online learner. Each episode the driver asks for the policy to play,
/// rolls it out, and hands the resulting trajectory back.
class Learner {
public:
    virtual ~Learner() = default;

    virtual std::string name() const = 0;

    /// Observation regime this learner needs. Learners that only use
    /// (s, a, r, s') report ObservationMode::None.
    virtual ObservationMode required_mode() const { return ObservationMode::None; }

    virtual EpisodePolicy current_policy() = 0;
    virtual void observe_episode(const Trajectory& trajectory) = 0;
};

/// Plays uniformly random actions and never learns.
class RandomLearner : public Learner {
public:
    RandomLearner(int horizon, int n_states, int n_actions)
        : policy_(StochasticPolicy::uniform(horizon, n_states, n_actions)) {}

    std::string name() const override { return "random"; }
    EpisodePolicy current_policy() override { return policy_; }
    void observe_episode(const Trajectory&) override {}

private:
    StochasticPolicy policy_;
};

/// Fixed deterministic policy; used for oracle baselines.
class FixedPolicyLearner : public Learner {
public:
    FixedPolicyLearner(std::string name, Policy policy)
        : name_(std::move(name)), policy_(std::move(policy)) {}

    std::string name() const override { return name_; }
    EpisodePolicy current_policy() override { return policy_; }
    void observe_episode(const Trajectory&) override {}

private:
    std::string name_;
    Policy policy_;
};

struct EpisodeOutcome {
    int episode;         // 1-based
    double value;        // exact V_1^{pi_k}(s_1) under the true schedule
    double episode_return;
    double seconds;      // learner + rollout wall-clock
};

/// Roll `policy` out once. Stochastic policies draw their actions from a
/// stream split off `rng`.
Trajectory rollout_episode(const ExoMdp& mdp, const EpisodePolicy& policy, Rng& rng,
                           ObservationMode mode);

/// Run `episodes` episodes of `learner` on `mdp` (whose schedule is the
/// true one). Episode k uses Rng::stream(experiment, seed, k). Throws
/// ModeError if the learner needs more than `mode` provides.
std::vector<EpisodeOutcome> run_learner(const ExoMdp& mdp, Learner& learner, int episodes,
                                        ObservationMode mode, std::uint64_t experiment,
                                        std::uint64_t seed);

}  // namespace exo
