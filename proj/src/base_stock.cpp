#include "exo/base_stock.hpp"

#include <algorithm>
#include <cmath>

namespace exo {

namespace {
constexpr int kMaxRound = 24;
}

ConvexBanditSearch::ConvexBanditSearch(double lower, double upper, int total_episodes)
    : left_(lower), right_(upper), log_k_(std::log(std::max(total_episodes, 1))) {
    if (!(lower < upper)) throw ContractError("ConvexBanditSearch: need lower < upper");
    if (total_episodes < 1) throw ContractError("ConvexBanditSearch: need K >= 1");
    start_round();
}

double ConvexBanditSearch::gamma() const { return std::ldexp(1.0, -round_); }

void ConvexBanditSearch::start_round() {
    const double g = gamma();
    per_probe_ = std::max(1LL, static_cast<long long>(std::ceil(2.0 * log_k_ / (g * g))));
    const double width = right_ - left_;
    probes_ = {left_ + width / 4.0, (left_ + right_) / 2.0, right_ - width / 4.0};
    sums_.assign(3, 0.0);
    probe_ = 0;
    taken_ = 0;
}

void ConvexBanditSearch::record(double cost) {
    sums_[static_cast<std::size_t>(probe_)] += cost;
    if (++taken_ < per_probe_) return;
    taken_ = 0;
    if (++probe_ < 3) return;

    const double g = gamma();
    const double n = static_cast<double>(per_probe_);
    const double mean_l = sums_[0] / n;
    const double mean_c = sums_[1] / n;
    const double mean_r = sums_[2] / n;
    const double lb_l = mean_l - g;
    const double lb_r = mean_r - g;
    const double ub_l = mean_l + g;
    const double ub_r = mean_r + g;
    const double ub_c = mean_c + g;
    const double worst_lb = std::max(lb_l, lb_r);
    if (worst_lb >= std::min(ub_l, ub_r) || worst_lb >= ub_c + g) {
        if (lb_l >= lb_r) {
            left_ = probes_[0];
        } else {
            right_ = probes_[2];
        }
        ++epoch_;
        round_ = 1;
    } else if (round_ < kMaxRound) {
        ++round_;
    }
    start_round();
}

std::vector<BaseStockLevel> base_stock_values(const InventoryModel& model) {
    const int top = (model.lead_time() + 1) * model.demand_support();
    std::vector<BaseStockLevel> out;
    out.reserve(static_cast<std::size_t>(top) + 1);
    for (int b = 0; b <= top; ++b) {
        out.push_back({b, policy_value(model.mdp(), model.mdp().schedule(),
                                       base_stock_policy(model, b))});
    }
    return out;
}

BaseStockLevel best_base_stock(const InventoryModel& model) {
    const auto values = base_stock_values(model);
    BaseStockLevel best = values.front();
    for (const auto& v : values) {
        if (v.value > best.value) best = v;
    }
    return best;
}

OnlineBaseStock::OnlineBaseStock(const InventoryModel& model, int planned_episodes)
    : model_(model),
      search_(0.0, static_cast<double>((model.lead_time() + 1) * model.demand_support()),
              planned_episodes) {}

int OnlineBaseStock::current_level() const {
    return static_cast<int>(std::lround(search_.next_point()));
}

EpisodePolicy OnlineBaseStock::current_policy() {
    const int level = current_level();
    auto it = cache_.find(level);
    if (it == cache_.end()) it = cache_.emplace(level, base_stock_policy(model_, level)).first;
    return it->second;
}

void OnlineBaseStock::observe_episode(const Trajectory& trajectory) {
    const double H = model_.mdp().horizon();
    search_.record(std::clamp((H - episode_return(trajectory)) / H, 0.0, 1.0));
}

}  // namespace exo
