#pragma once

// Tabular Q-learning with UCB-Hoeffding exploration bonuses.

#include <vector>

#include "exo/core.hpp"
#include "exo/learner.hpp"

namespace exo {

struct QLearningConfig {
    double bonus_scale = 1.0;  // c_b
    double delta = 0.05;
    int planned_episodes = 1;  // K, enters the log term of the bonus
};

class QLearning : public Learner {
public:
    QLearning(int horizon, int n_states, int n_actions, QLearningConfig config);

    std::string name() const override { return "q_learning"; }
    EpisodePolicy current_policy() override;
    void observe_episode(const Trajectory& trajectory) override;

    /// Update for one visit of (h, s, a) with reward r and successor s'.
    void update(int h, int s, int a, double reward, int s_next);

    double q(int h, int s, int a) const { return q_[index(h, s, a)]; }
    int visits(int h, int s, int a) const { return n_[index(h, s, a)]; }
    /// min{H, max_a Q_h(s, a)}; zero at h = H.
    double value(int h, int s) const;

    double learning_rate(int t) const;
    double bonus(int t) const;

private:
    std::size_t index(int h, int s, int a) const {
        return (static_cast<std::size_t>(h) * n_states_ + static_cast<std::size_t>(s)) *
                   static_cast<std::size_t>(n_actions_) +
               static_cast<std::size_t>(a);
    }

    int horizon_;
    int n_states_;
    int n_actions_;
    QLearningConfig config_;
    double log_term_;
    std::vector<double> q_;
    std::vector<int> n_;
};

}  // namespace exo
