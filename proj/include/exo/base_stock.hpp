#pragma once

// Online base-stock control: a one-dimensional stochastic convex bandit
// search over the base-stock level, and exact base-stock baselines.

#include <map>
#include <vector>

#include "exo/environments.hpp"
#include "exo/learner.hpp"

namespace exo {

/// Epoch-based search for the minimizer of a convex function on [lower,
/// upper] from noisy evaluations in [0, 1].
///
/// Each round i probes the quartile points B_l, B_c, B_r of the working
/// interval ceil(2 log K / gamma_i^2) times each, gamma_i = 2^-i, and
/// forms LB = mean - gamma_i, UB = mean + gamma_i. A side is discarded when
/// its confidence interval lies above the other side's or above the
/// centre's by gamma_i; otherwise the next round halves gamma_i.
class ConvexBanditSearch {
public:
    ConvexBanditSearch(double lower, double upper, int total_episodes);

    /// Point whose evaluation is requested next.
    double next_point() const { return probes_[static_cast<std::size_t>(probe_)]; }

    /// Feed the noisy cost observed at next_point().
    void record(double cost);

    double left() const { return left_; }
    double right() const { return right_; }
    int epoch() const { return epoch_; }
    int round() const { return round_; }
    double gamma() const;
    long long samples_per_probe() const { return per_probe_; }
    const std::vector<double>& probes() const { return probes_; }

private:
    void start_round();

    double left_;
    double right_;
    double log_k_;
    int epoch_ = 1;
    int round_ = 1;
    int probe_ = 0;
    long long per_probe_ = 0;
    long long taken_ = 0;
    std::vector<double> probes_;
    std::vector<double> sums_;
};

struct BaseStockLevel {
    int level;
    double value;  // exact V_1 under the model's true demand distribution
};

/// Exact value of every integer level 0..(L+1)d, in level order.
std::vector<BaseStockLevel> base_stock_values(const InventoryModel& model);

/// Best integer level; ties go to the smallest level.
BaseStockLevel best_base_stock(const InventoryModel& model);

/// Convex bandit search over base-stock levels played on an inventory model. Each episode's total
/// cost divided by H is one sample; the real-valued probe point is rounded
/// to the nearest integer level when played.
class OnlineBaseStock : public Learner {
public:
    OnlineBaseStock(const InventoryModel& model, int planned_episodes);

    std::string name() const override { return "online_base_stock"; }
    EpisodePolicy current_policy() override;
    void observe_episode(const Trajectory& trajectory) override;

    const ConvexBanditSearch& search() const { return search_; }
    int current_level() const;

private:
    InventoryModel model_;
    ConvexBanditSearch search_;
    std::map<int, Policy> cache_;
};

}  // namespace exo
