#include "exo/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

namespace exo {

namespace {

std::string describe(const char* what, int value, int bound) {
    std::ostringstream os;
    os << what << " " << value << " out of range [0, " << bound << ")";
    return os.str();
}

}  // namespace

ProbVec::ProbVec(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) {
        throw ContractError("ProbVec: empty probability vector");
    }
    double total = 0.0;
    for (double p : probs_) {
        if (!std::isfinite(p) || p < 0.0) {
            throw ContractError("ProbVec: entries must be finite and non-negative");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > kProbSumTolerance) {
        std::ostringstream os;
        os.precision(17);
        os << "ProbVec: entries sum to " << total << ", not 1";
        throw ContractError(os.str());
    }
}

ProbVec ProbVec::uniform(int d) {
    if (d <= 0) {
        throw ContractError("ProbVec::uniform: d must be positive");
    }
    std::vector<double> p(static_cast<std::size_t>(d), 1.0 / d);
    // Absorb rounding so the sum is exact enough for the validator.
    double rest = 1.0 - std::accumulate(p.begin(), p.end() - 1, 0.0);
    p.back() = rest;
    return ProbVec(std::move(p));
}

ProbVec ProbVec::point_mass(int d, int j) {
    if (j < 0 || j >= d) {
        throw ContractError(describe("ProbVec::point_mass: symbol", j, d));
    }
    std::vector<double> p(static_cast<std::size_t>(d), 0.0);
    p[static_cast<std::size_t>(j)] = 1.0;
    return ProbVec(std::move(p));
}

ProbVec ProbVec::from_counts(std::span<const double> counts) {
    double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (total <= 0.0) {
        return uniform(static_cast<int>(counts.size()));
    }
    std::vector<double> p(counts.begin(), counts.end());
    for (double& x : p) {
        x /= total;
    }
    return ProbVec(std::move(p));
}

double ProbVec::l1_distance(const ProbVec& other) const {
    if (other.size() != size()) {
        throw ContractError("ProbVec::l1_distance: size mismatch");
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < probs_.size(); ++j) {
        acc += std::abs(probs_[j] - other.probs_[j]);
    }
    return acc;
}

const ProbVec& stage_distribution(const ExoSchedule& schedule, int stage) {
    return schedule.size() == 1 ? schedule.front() : schedule.at(static_cast<std::size_t>(stage));
}

ExoMdp::ExoMdp(ExoMdpTables tables) : t_(std::move(tables)) {
    if (t_.n_states <= 0 || t_.n_actions <= 0 || t_.n_exo <= 0 || t_.horizon <= 0) {
        throw ContractError("ExoMdp: cardinalities and horizon must be positive");
    }
    if (t_.start_state < 0 || t_.start_state >= t_.n_states) {
        throw ContractError(describe("ExoMdp: start state", t_.start_state, t_.n_states));
    }
    const std::size_t cells = static_cast<std::size_t>(t_.n_states) *
                              static_cast<std::size_t>(t_.n_actions) *
                              static_cast<std::size_t>(t_.n_exo);
    if (t_.next.size() != cells || t_.reward.size() != cells) {
        throw ContractError("ExoMdp: transition/reward tables have wrong size");
    }
    if (!t_.observation.empty() && t_.observation.size() != cells) {
        throw ContractError("ExoMdp: observation table has wrong size");
    }
    for (int s_next : t_.next) {
        if (s_next < 0 || s_next >= t_.n_states) {
            throw ContractError(describe("ExoMdp: transition target", s_next, t_.n_states));
        }
    }
    for (double r : t_.reward) {
        if (!(r >= 0.0 && r <= 1.0)) {
            throw ContractError("ExoMdp: rewards must lie in [0, 1]");
        }
    }
    check_schedule(t_.exo_dist);
}

void ExoMdp::check_schedule(const ExoSchedule& schedule) const {
    if (schedule.size() != 1 && schedule.size() != static_cast<std::size_t>(t_.horizon)) {
        throw ContractError("ExoMdp: schedule must hold 1 or H distributions");
    }
    for (const ProbVec& p : schedule) {
        if (p.size() != t_.n_exo) {
            throw ContractError("ExoMdp: distribution length differs from |Xi|");
        }
    }
}

ExoMdp ExoMdp::with_schedule(ExoSchedule schedule) const {
    ExoMdpTables copy = t_;
    copy.exo_dist = std::move(schedule);
    return ExoMdp(std::move(copy));
}

ExoMdp ExoMdp::structure_only() const { return with_schedule({ProbVec::uniform(t_.n_exo)}); }

void ExoMdp::check_indices(int s, int a, int j) const {
    if (s < 0 || s >= t_.n_states) throw ContractError(describe("state", s, t_.n_states));
    if (a < 0 || a >= t_.n_actions) throw ContractError(describe("action", a, t_.n_actions));
    if (j < 0 || j >= t_.n_exo) throw ContractError(describe("exogenous symbol", j, t_.n_exo));
}

int sample_exogenous(const ProbVec& p, Rng& rng) {
    const double u = rng.uniform();
    double cdf = 0.0;
    const int d = p.size();
    for (int j = 0; j < d; ++j) {
        cdf += p[j];
        if (u < cdf) {
            return j;
        }
    }
    // u landed in the rounding slack above the accumulated CDF; return the
    // last symbol carrying mass.
    for (int j = d - 1; j >= 0; --j) {
        if (p[j] > 0.0) return j;
    }
    return d - 1;
}

StepResult step(const ExoMdp& mdp, int s, int a, int xi) {
    mdp.check_indices(s, a, xi);
    return {mdp.next_state(s, a, xi), mdp.reward(s, a, xi)};
}

Policy::Policy(int horizon, int n_states, std::vector<int> actions)
    : horizon_(horizon), n_states_(n_states), actions_(std::move(actions)) {
    if (actions_.size() != static_cast<std::size_t>(horizon) * static_cast<std::size_t>(n_states)) {
        throw ContractError("Policy: table size must be H * |S|");
    }
    for (int a : actions_) {
        if (a < 0) throw ContractError("Policy: negative action index");
    }
}

Policy Policy::constant(int horizon, int n_states, int action) {
    return Policy(horizon, n_states,
                  std::vector<int>(static_cast<std::size_t>(horizon) *
                                       static_cast<std::size_t>(n_states),
                                   action));
}

StochasticPolicy::StochasticPolicy(int horizon, int n_states, int n_actions,
                                   std::vector<double> probs)
    : horizon_(horizon), n_states_(n_states), n_actions_(n_actions), probs_(std::move(probs)) {
    const std::size_t rows = static_cast<std::size_t>(horizon) * static_cast<std::size_t>(n_states);
    if (probs_.size() != rows * static_cast<std::size_t>(n_actions)) {
        throw ContractError("StochasticPolicy: table size must be H * |S| * |A|");
    }
    for (std::size_t r = 0; r < rows; ++r) {
        // Validates the row as a distribution.
        ProbVec(std::vector<double>(probs_.begin() + static_cast<std::ptrdiff_t>(r * n_actions),
                                    probs_.begin() +
                                        static_cast<std::ptrdiff_t>((r + 1) * n_actions)));
    }
}

StochasticPolicy StochasticPolicy::uniform(int horizon, int n_states, int n_actions) {
    std::vector<double> probs;
    probs.reserve(static_cast<std::size_t>(horizon) * n_states * n_actions);
    const ProbVec row = ProbVec::uniform(n_actions);
    for (int r = 0; r < horizon * n_states; ++r) {
        probs.insert(probs.end(), row.values().begin(), row.values().end());
    }
    return StochasticPolicy(horizon, n_states, n_actions, std::move(probs));
}

std::span<const double> StochasticPolicy::distribution(int stage, int s) const {
    const std::size_t row = static_cast<std::size_t>(stage) * static_cast<std::size_t>(n_states_) +
                            static_cast<std::size_t>(s);
    return {probs_.data() + row * static_cast<std::size_t>(n_actions_),
            static_cast<std::size_t>(n_actions_)};
}

int StochasticPolicy::sample(int stage, int s, Rng& rng) const {
    auto dist = distribution(stage, s);
    const double u = rng.uniform();
    double cdf = 0.0;
    for (int a = 0; a < n_actions_; ++a) {
        cdf += dist[static_cast<std::size_t>(a)];
        if (u < cdf) return a;
    }
    return n_actions_ - 1;
}

MixturePolicy::MixturePolicy(std::vector<Policy> members) : members_(std::move(members)) {
    if (members_.empty()) {
        throw ContractError("MixturePolicy: no member policies");
    }
    for (const Policy& p : members_) {
        if (p.horizon() != members_.front().horizon() ||
            p.n_states() != members_.front().n_states()) {
            throw ContractError("MixturePolicy: member policies have inconsistent shapes");
        }
    }
}

const Policy& MixturePolicy::draw(Rng& rng) const {
    return members_[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(members_.size())))];
}

MixturePolicy uniform_mixture_policy(std::vector<Policy> policies) {
    return MixturePolicy(std::move(policies));
}

namespace {

double backup(const ExoMdp& mdp, const ProbVec& p, std::span<const double> v_next, int s, int a) {
    auto next = mdp.next_row(s, a);
    auto rew = mdp.reward_row(s, a);
    double q = 0.0;
    for (int j = 0; j < mdp.n_exo(); ++j) {
        const auto jj = static_cast<std::size_t>(j);
        q += p[j] * (rew[jj] + v_next[static_cast<std::size_t>(next[jj])]);
    }
    return q;
}

void check_policy_shape(const ExoMdp& mdp, int horizon, int n_states) {
    if (horizon != mdp.horizon() || n_states != mdp.n_states()) {
        throw ContractError("policy shape does not match the MDP");
    }
}

}  // namespace

Solution dp_solve(const ExoMdp& mdp, const ExoSchedule& schedule) {
    mdp.check_schedule(schedule);
    const int H = mdp.horizon();
    const int S = mdp.n_states();
    ValueTable values(H, S);
    Policy policy = Policy::constant(H, S, 0);
    for (int t = H - 1; t >= 0; --t) {
        const ProbVec& p = stage_distribution(schedule, t);
        auto v_next = values.stage(t + 1);
        for (int s = 0; s < S; ++s) {
            double best = -1.0;
            int best_a = 0;
            for (int a = 0; a < mdp.n_actions(); ++a) {
                const double q = backup(mdp, p, v_next, s, a);
                if (q > best) {
                    best = q;
                    best_a = a;
                }
            }
            values.at(t, s) = best;
            policy.set_action(t, s, best_a);
        }
    }
    return {std::move(policy), std::move(values)};
}

Solution dp_solve(const ExoMdp& mdp) { return dp_solve(mdp, mdp.schedule()); }

ValueTable evaluate_policy(const ExoMdp& mdp, const ExoSchedule& schedule, const Policy& policy) {
    mdp.check_schedule(schedule);
    check_policy_shape(mdp, policy.horizon(), policy.n_states());
    const int H = mdp.horizon();
    const int S = mdp.n_states();
    ValueTable values(H, S);
    for (int t = H - 1; t >= 0; --t) {
        const ProbVec& p = stage_distribution(schedule, t);
        auto v_next = values.stage(t + 1);
        for (int s = 0; s < S; ++s) {
            const int a = policy.action(t, s);
            if (a >= mdp.n_actions()) throw ContractError("policy action out of range");
            values.at(t, s) = backup(mdp, p, v_next, s, a);
        }
    }
    return values;
}

ValueTable evaluate_policy(const ExoMdp& mdp, const ExoSchedule& schedule,
                           const StochasticPolicy& policy) {
    mdp.check_schedule(schedule);
    check_policy_shape(mdp, policy.horizon(), policy.n_states());
    if (policy.n_actions() != mdp.n_actions()) {
        throw ContractError("stochastic policy action count does not match the MDP");
    }
    const int H = mdp.horizon();
    const int S = mdp.n_states();
    ValueTable values(H, S);
    for (int t = H - 1; t >= 0; --t) {
        const ProbVec& p = stage_distribution(schedule, t);
        auto v_next = values.stage(t + 1);
        for (int s = 0; s < S; ++s) {
            auto dist = policy.distribution(t, s);
            double v = 0.0;
            for (int a = 0; a < mdp.n_actions(); ++a) {
                const double w = dist[static_cast<std::size_t>(a)];
                if (w > 0.0) v += w * backup(mdp, p, v_next, s, a);
            }
            values.at(t, s) = v;
        }
    }
    return values;
}

double policy_value(const ExoMdp& mdp, const ExoSchedule& schedule, const Policy& policy) {
    return evaluate_policy(mdp, schedule, policy).at(0, mdp.start_state());
}

double policy_value(const ExoMdp& mdp, const ExoSchedule& schedule,
                    const StochasticPolicy& policy) {
    return evaluate_policy(mdp, schedule, policy).at(0, mdp.start_state());
}

double policy_value(const ExoMdp& mdp, const ExoSchedule& schedule, const MixturePolicy& policy) {
    double total = 0.0;
    for (const Policy& member : policy.members()) {
        total += policy_value(mdp, schedule, member);
    }
    return total / static_cast<double>(policy.members().size());
}

double simulation_gap_bound(double eps_r, double eps_p, int horizon) {
    if (eps_r < 0.0 || eps_p < 0.0) {
        throw ContractError("simulation_gap_bound: tolerances must be non-negative");
    }
    const double H = horizon;
    return H * eps_r + H * (H - 1.0) / 2.0 * eps_p;
}

std::vector<double> induced_kernel(const ExoMdp& mdp, const ProbVec& p, int s, int a) {
    std::vector<double> kernel(static_cast<std::size_t>(mdp.n_states()), 0.0);
    auto next = mdp.next_row(s, a);
    for (int j = 0; j < mdp.n_exo(); ++j) {
        kernel[static_cast<std::size_t>(next[static_cast<std::size_t>(j)])] += p[j];
    }
    return kernel;
}

double expected_reward(const ExoMdp& mdp, const ProbVec& p, int s, int a) {
    auto rew = mdp.reward_row(s, a);
    double r = 0.0;
    for (int j = 0; j < mdp.n_exo(); ++j) r += p[j] * rew[static_cast<std::size_t>(j)];
    return r;
}

Trajectory rollout_episode(const ExoMdp& mdp, const ActionRule& rule, Rng& rng,
                           ObservationMode mode) {
    Trajectory traj;
    traj.steps.reserve(static_cast<std::size_t>(mdp.horizon()));
    int s = mdp.start_state();
    for (int t = 0; t < mdp.horizon(); ++t) {
        const int a = rule(t, s);
        const int xi = sample_exogenous(mdp.exo_distribution(t), rng);
        const StepResult r = step(mdp, s, a, xi);
        Step st{s, a, r.reward, r.next_state, std::nullopt};
        if (mdp.has_observation()) st.observation = mdp.observation(s, a, xi);
        traj.steps.push_back(st);
        if (mode == ObservationMode::Full) traj.exo.push_back(xi);
        s = r.next_state;
    }
    return traj;
}

Trajectory rollout_episode(const ExoMdp& mdp, const Policy& policy, Rng& rng,
                           ObservationMode mode) {
    check_policy_shape(mdp, policy.horizon(), policy.n_states());
    return rollout_episode(
        mdp, [&policy](int t, int s) { return policy.action(t, s); }, rng, mode);
}

double episode_return(const Trajectory& trajectory) {
    double total = 0.0;
    for (const Step& st : trajectory.steps) total += st.reward;
    return total;
}

}  // namespace exo
