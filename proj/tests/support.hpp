#pragma once

// Random instances and brute-force oracles shared by the unit tests and the
// acceptance binary. Oracles here avoid the library's own DP code paths.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "exo/core.hpp"

namespace exo::testing {

inline ProbVec random_probvec(std::mt19937_64& gen, int d, bool allow_zeros = true) {
    std::exponential_distribution<double> expo(1.0);
    std::bernoulli_distribution zero(0.2);
    std::vector<double> w(static_cast<std::size_t>(d));
    double total = 0.0;
    for (double& x : w) {
        x = (allow_zeros && zero(gen)) ? 0.0 : expo(gen);
        total += x;
    }
    if (total <= 0.0) {
        w[0] = 1.0;
        total = 1.0;
    }
    for (double& x : w) x /= total;
    // Fold the rounding residue into the largest entry.
    double sum = 0.0;
    std::size_t big = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        sum += w[i];
        if (w[i] > w[big]) big = i;
    }
    w[big] += 1.0 - sum;
    return ProbVec(std::move(w));
}

inline ExoMdp random_exo_mdp(std::mt19937_64& gen, int S, int A, int d, int H,
                             bool binary_rewards = false) {
    std::uniform_int_distribution<int> state(0, S - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    ExoMdpTables t;
    t.n_states = S;
    t.n_actions = A;
    t.n_exo = d;
    t.horizon = H;
    t.start_state = state(gen);
    const std::size_t cells = static_cast<std::size_t>(S) * A * d;
    for (std::size_t c = 0; c < cells; ++c) {
        t.next.push_back(state(gen));
        t.reward.push_back(binary_rewards ? (coin(gen) ? 1.0 : 0.0) : unit(gen));
    }
    t.exo_dist = {random_probvec(gen, d)};
    return ExoMdp(std::move(t));
}

/// V_1^pi(s_1) by pushing the state distribution forward stage by stage.
inline double forward_value(const ExoMdp& mdp, const ExoSchedule& schedule,
                            const std::function<double(int, int, int)>& action_prob) {
    const int S = mdp.n_states();
    const int A = mdp.n_actions();
    std::vector<double> mass(static_cast<std::size_t>(S), 0.0);
    mass[static_cast<std::size_t>(mdp.start_state())] = 1.0;
    double total = 0.0;
    for (int t = 0; t < mdp.horizon(); ++t) {
        const ProbVec& p = stage_distribution(schedule, t);
        std::vector<double> next(static_cast<std::size_t>(S), 0.0);
        for (int s = 0; s < S; ++s) {
            const double m = mass[static_cast<std::size_t>(s)];
            if (m == 0.0) continue;
            for (int a = 0; a < A; ++a) {
                const double pa = action_prob(t, s, a);
                if (pa == 0.0) continue;
                for (int j = 0; j < mdp.n_exo(); ++j) {
                    const double w = m * pa * p[j];
                    total += w * mdp.reward(s, a, j);
                    next[static_cast<std::size_t>(mdp.next_state(s, a, j))] += w;
                }
            }
        }
        mass = std::move(next);
    }
    return total;
}

inline double forward_value(const ExoMdp& mdp, const ExoSchedule& schedule, const Policy& pi) {
    return forward_value(mdp, schedule,
                         [&](int t, int s, int a) { return pi.action(t, s) == a ? 1.0 : 0.0; });
}

/// Best value over every deterministic Markov policy, by enumeration.
inline double enumerate_best_value(const ExoMdp& mdp, const ExoSchedule& schedule) {
    const int H = mdp.horizon();
    const int S = mdp.n_states();
    const int A = mdp.n_actions();
    const int cells = H * S;
    std::vector<int> actions(static_cast<std::size_t>(cells), 0);
    double best = -1.0;
    while (true) {
        best = std::max(best, forward_value(mdp, schedule, Policy(H, S, actions)));
        int i = 0;
        while (i < cells && ++actions[static_cast<std::size_t>(i)] == A) {
            actions[static_cast<std::size_t>(i)] = 0;
            ++i;
        }
        if (i == cells) break;
    }
    return best;
}

}  // namespace exo::testing
