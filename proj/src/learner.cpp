#include "exo/learner.hpp"

#include <chrono>

namespace exo {

double policy_value(const ExoMdp& mdp, const ExoSchedule& schedule, const EpisodePolicy& policy) {
    return std::visit([&](const auto& p) { return policy_value(mdp, schedule, p); }, policy);
}

Trajectory rollout_episode(const ExoMdp& mdp, const EpisodePolicy& policy, Rng& rng,
                           ObservationMode mode) {
    if (const auto* det = std::get_if<Policy>(&policy)) {
        return rollout_episode(mdp, *det, rng, mode);
    }
    const auto& stochastic = std::get<StochasticPolicy>(policy);
    Rng action_rng = rng.split(1);
    ActionRule rule = [&](int stage, int s) { return stochastic.sample(stage, s, action_rng); };
    return rollout_episode(mdp, rule, rng, mode);
}

std::vector<EpisodeOutcome> run_learner(const ExoMdp& mdp, Learner& learner, int episodes,
                                        ObservationMode mode, std::uint64_t experiment,
                                        std::uint64_t seed) {
    if (episodes < 1) throw ContractError("run_learner: need at least one episode");
    if (learner.required_mode() == ObservationMode::Full && mode != ObservationMode::Full) {
        throw ModeError(learner.name() + " needs full observation of the exogenous symbols");
    }
    using Clock = std::chrono::steady_clock;
    std::vector<EpisodeOutcome> out;
    out.reserve(static_cast<std::size_t>(episodes));
    for (int k = 1; k <= episodes; ++k) {
        const auto start = Clock::now();
        EpisodePolicy policy = learner.current_policy();
        Rng rng = Rng::stream(experiment, seed, static_cast<std::uint64_t>(k));
        Trajectory trajectory = rollout_episode(mdp, policy, rng, mode);
        learner.observe_episode(trajectory);
        const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
        out.push_back({k, policy_value(mdp, mdp.schedule(), policy), episode_return(trajectory),
                       seconds});
    }
    return out;
}

}  // namespace exo
