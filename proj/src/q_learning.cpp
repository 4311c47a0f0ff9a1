#include "exo/q_learning.hpp"

#include <algorithm>
#include <cmath>

namespace exo {

QLearning::QLearning(int horizon, int n_states, int n_actions, QLearningConfig config)
    : horizon_(horizon), n_states_(n_states), n_actions_(n_actions), config_(config) {
    if (horizon < 1 || n_states < 1 || n_actions < 1) {
        throw ContractError("QLearning: horizon, states and actions must be >= 1");
    }
    if (config.planned_episodes < 1 || !(config.delta > 0.0 && config.delta < 1.0) ||
        !(config.bonus_scale >= 0.0)) {
        throw ContractError("QLearning: invalid configuration");
    }
    log_term_ = std::log(2.0 * n_states * n_actions * horizon *
                         static_cast<double>(config.planned_episodes) / config.delta);
    const std::size_t cells = static_cast<std::size_t>(horizon) * n_states * n_actions;
    q_.assign(cells, static_cast<double>(horizon));
    n_.assign(cells, 0);
}

double QLearning::learning_rate(int t) const {
    return (horizon_ + 1.0) / (horizon_ + static_cast<double>(t));
}

double QLearning::bonus(int t) const {
    const double H = horizon_;
    return config_.bonus_scale * std::sqrt(H * H * H * log_term_ / t);
}

double QLearning::value(int h, int s) const {
    if (h == horizon_) return 0.0;
    const double* row = q_.data() + index(h, s, 0);
    return std::min(static_cast<double>(horizon_), *std::max_element(row, row + n_actions_));
}

void QLearning::update(int h, int s, int a, double reward, int s_next) {
    if (h < 0 || h >= horizon_ || s < 0 || s >= n_states_ || a < 0 || a >= n_actions_ ||
        s_next < 0 || s_next >= n_states_) {
        throw ContractError("QLearning::update: index out of range");
    }
    const std::size_t i = index(h, s, a);
    const int t = ++n_[i];
    const double alpha = learning_rate(t);
    const double target = reward + value(h + 1, s_next) + bonus(t);
    q_[i] = std::min(static_cast<double>(horizon_), (1.0 - alpha) * q_[i] + alpha * target);
}

EpisodePolicy QLearning::current_policy() {
    Policy policy = Policy::constant(horizon_, n_states_, 0);
    for (int h = 0; h < horizon_; ++h) {
        for (int s = 0; s < n_states_; ++s) {
            const double* row = q_.data() + index(h, s, 0);
            policy.set_action(h, s, static_cast<int>(std::max_element(row, row + n_actions_) - row));
        }
    }
    return policy;
}

void QLearning::observe_episode(const Trajectory& trajectory) {
    int h = 0;
    for (const Step& st : trajectory.steps) {
        update(h++, st.state, st.action, st.reward, st.next_state);
    }
}

}  // namespace exo
