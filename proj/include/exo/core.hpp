#pragma once

// Exo-MDP data model, episode dynamics, exact dynamic programming and exact
// policy evaluation.
//
// Stages are 0-based throughout the library: an episode of horizon H visits
// stages t = 0, ..., H-1, and value tables carry one extra terminal row
// t = H that is identically zero.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "exo/errors.hpp"
#include "exo/rng.hpp"

namespace exo {

inline constexpr double kProbSumTolerance = 1e-12;

/// Probability vector over a finite exogenous alphabet {0, ..., d-1}.
class ProbVec {
public:
    ProbVec() = default;

    /// Throws ContractError if any entry is negative/non-finite or the entries
    /// do not sum to one within kProbSumTolerance.
    explicit ProbVec(std::vector<double> probs);

    static ProbVec uniform(int d);
    static ProbVec point_mass(int d, int j);

    /// Normalized counts; uniform when every count is zero.
    static ProbVec from_counts(std::span<const double> counts);

    int size() const { return static_cast<int>(probs_.size()); }
    double operator[](int j) const { return probs_[static_cast<std::size_t>(j)]; }
    std::span<const double> values() const { return probs_; }

    double l1_distance(const ProbVec& other) const;

    friend bool operator==(const ProbVec&, const ProbVec&) = default;

private:
    std::vector<double> probs_;
};

/// One distribution (time-homogeneous) or one per stage (time-inhomogeneous).
using ExoSchedule = std::vector<ProbVec>;

/// Distribution in effect at `stage` of a schedule.
const ProbVec& stage_distribution(const ExoSchedule& schedule, int stage);

/// Raw tables used to construct an ExoMdp. Tables are dense and indexed
/// [s][a][j] in row-major order.
struct ExoMdpTables {
    int n_states = 0;
    int n_actions = 0;
    int n_exo = 0;
    int horizon = 0;
    int start_state = 0;
    std::vector<int> next;       // f(s, a, xi)
    std::vector<double> reward;  // g(s, a, xi) in [0, 1]
    ExoSchedule exo_dist;
    /// Optional censored observation emitted alongside each transition
    /// (e.g. realized sales); empty when the environment has none.
    std::vector<int> observation;
};

/// Immutable, validated Exo-MDP: deterministic f and g driven by an i.i.d.
/// (per stage) exogenous draw.
class ExoMdp {
public:
    explicit ExoMdp(ExoMdpTables tables);

    int n_states() const { return t_.n_states; }
    int n_actions() const { return t_.n_actions; }
    int n_exo() const { return t_.n_exo; }
    int horizon() const { return t_.horizon; }
    int start_state() const { return t_.start_state; }

    int next_state(int s, int a, int j) const { return t_.next[index(s, a, j)]; }
    double reward(int s, int a, int j) const { return t_.reward[index(s, a, j)]; }

    /// The d successor states of (s, a), one per exogenous symbol.
    std::span<const int> next_row(int s, int a) const {
        return {t_.next.data() + index(s, a, 0), static_cast<std::size_t>(t_.n_exo)};
    }
    std::span<const double> reward_row(int s, int a) const {
        return {t_.reward.data() + index(s, a, 0), static_cast<std::size_t>(t_.n_exo)};
    }

    bool has_observation() const { return !t_.observation.empty(); }
    int observation(int s, int a, int j) const { return t_.observation[index(s, a, j)]; }

    bool time_homogeneous() const { return t_.exo_dist.size() == 1; }
    const ExoSchedule& schedule() const { return t_.exo_dist; }
    const ProbVec& exo_distribution(int stage) const {
        return stage_distribution(t_.exo_dist, stage);
    }

    /// Same f and g under a different exogenous schedule.
    ExoMdp with_schedule(ExoSchedule schedule) const;

    /// Copy whose schedule is uniform, for handing the known structure
    /// (f, g) to a learner without the true distribution.
    ExoMdp structure_only() const;

    /// Throws ContractError unless s, a, j are in range.
    void check_indices(int s, int a, int j) const;

    /// Throws ContractError unless `schedule` is usable with this MDP.
    void check_schedule(const ExoSchedule& schedule) const;

private:
    std::size_t index(int s, int a, int j) const {
        return (static_cast<std::size_t>(s) * static_cast<std::size_t>(t_.n_actions) +
                static_cast<std::size_t>(a)) *
                   static_cast<std::size_t>(t_.n_exo) +
               static_cast<std::size_t>(j);
    }

    ExoMdpTables t_;
};

/// Draw an exogenous symbol by inverse CDF on one uniform draw.
int sample_exogenous(const ProbVec& p, Rng& rng);

struct StepResult {
    int next_state;
    double reward;
};

/// One transition of the known dynamics: (f(s,a,xi), g(s,a,xi)).
StepResult step(const ExoMdp& mdp, int s, int a, int xi);

/// Deterministic tabular policy pi[t][s].
class Policy {
public:
    Policy() = default;
    Policy(int horizon, int n_states, std::vector<int> actions);

    static Policy constant(int horizon, int n_states, int action);

    int horizon() const { return horizon_; }
    int n_states() const { return n_states_; }
    int action(int stage, int s) const {
        return actions_[static_cast<std::size_t>(stage) * static_cast<std::size_t>(n_states_) +
                        static_cast<std::size_t>(s)];
    }
    void set_action(int stage, int s, int a) {
        actions_[static_cast<std::size_t>(stage) * static_cast<std::size_t>(n_states_) +
                 static_cast<std::size_t>(s)] = a;
    }
    const std::vector<int>& table() const { return actions_; }

    friend bool operator==(const Policy&, const Policy&) = default;

private:
    int horizon_ = 0;
    int n_states_ = 0;
    std::vector<int> actions_;
};

/// Tabular policy mapping (t, s) to a distribution over actions.
class StochasticPolicy {
public:
    StochasticPolicy(int horizon, int n_states, int n_actions, std::vector<double> probs);

    static StochasticPolicy uniform(int horizon, int n_states, int n_actions);

    int horizon() const { return horizon_; }
    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }
    std::span<const double> distribution(int stage, int s) const;
    int sample(int stage, int s, Rng& rng) const;

private:
    int horizon_;
    int n_states_;
    int n_actions_;
    std::vector<double> probs_;
};

/// Episode-level mixture: one member is drawn uniformly at the start of each
/// episode and followed for the whole episode.
class MixturePolicy {
public:
    explicit MixturePolicy(std::vector<Policy> members);

    const std::vector<Policy>& members() const { return members_; }
    const Policy& draw(Rng& rng) const;

private:
    std::vector<Policy> members_;
};

/// Throws ContractError on an empty list or inconsistent member shapes.
MixturePolicy uniform_mixture_policy(std::vector<Policy> policies);

/// V[t][s] for t = 0..H; row H is zero.
class ValueTable {
public:
    ValueTable() = default;
    ValueTable(int horizon, int n_states)
        : horizon_(horizon),
          n_states_(n_states),
          values_(static_cast<std::size_t>(horizon + 1) * static_cast<std::size_t>(n_states),
                  0.0) {}

    int horizon() const { return horizon_; }
    int n_states() const { return n_states_; }
    double at(int stage, int s) const { return values_[offset(stage, s)]; }
    double& at(int stage, int s) { return values_[offset(stage, s)]; }
    std::span<const double> stage(int t) const {
        return {values_.data() + offset(t, 0), static_cast<std::size_t>(n_states_)};
    }

private:
    std::size_t offset(int stage, int s) const {
        return static_cast<std::size_t>(stage) * static_cast<std::size_t>(n_states_) +
               static_cast<std::size_t>(s);
    }

    int horizon_ = 0;
    int n_states_ = 0;
    std::vector<double> values_;
};

struct Solution {
    Policy policy;
    ValueTable values;
};

/// Backward induction with expectation over the exogenous draw. Ties in the
/// argmax go to the smallest action index.
Solution dp_solve(const ExoMdp& mdp, const ExoSchedule& schedule);
Solution dp_solve(const ExoMdp& mdp);

/// Exact value tables of a fixed policy (no Monte Carlo).
ValueTable evaluate_policy(const ExoMdp& mdp, const ExoSchedule& schedule, const Policy& policy);
ValueTable evaluate_policy(const ExoMdp& mdp, const ExoSchedule& schedule,
                           const StochasticPolicy& policy);

/// V_1^pi(s_1) under `schedule`.
double policy_value(const ExoMdp& mdp, const ExoSchedule& schedule, const Policy& policy);
double policy_value(const ExoMdp& mdp, const ExoSchedule& schedule,
                    const StochasticPolicy& policy);
double policy_value(const ExoMdp& mdp, const ExoSchedule& schedule, const MixturePolicy& policy);

/// Value gap bound between two MDPs whose rewards differ by at most eps_r
/// and whose kernels differ by at most eps_p in L1, per stage.
double simulation_gap_bound(double eps_r, double eps_p, int horizon);

/// P(. | s, a) under `p`, as a dense vector over next states.
std::vector<double> induced_kernel(const ExoMdp& mdp, const ProbVec& p, int s, int a);

/// E[g(s, a, xi)] under `p`.
double expected_reward(const ExoMdp& mdp, const ProbVec& p, int s, int a);

enum class ObservationMode { Full, None };

/// What the learner sees at one stage. Deliberately carries no exogenous
/// symbol: only the censored observation, when the environment emits one.
struct Step {
    int state;
    int action;
    double reward;
    int next_state;
    std::optional<int> observation;
};

struct Trajectory {
    std::vector<Step> steps;
    /// Exogenous symbols, one per stage; empty unless run in Full mode.
    std::vector<int> exo;
};

/// Chooses the action at (stage, state).
using ActionRule = std::function<int(int stage, int state)>;

Trajectory rollout_episode(const ExoMdp& mdp, const ActionRule& rule, Rng& rng,
                           ObservationMode mode);
Trajectory rollout_episode(const ExoMdp& mdp, const Policy& policy, Rng& rng,
                           ObservationMode mode);

double episode_return(const Trajectory& trajectory);

}  // namespace exo
