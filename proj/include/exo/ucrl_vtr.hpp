#pragma once

// UCRL-VTR: optimistic value-targeted regression with variance-weighted
// ridge estimates, on raw or rank-reduced linear-mixture features.

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "exo/core.hpp"
#include "exo/learner.hpp"
#include "exo/linear_mixture.hpp"

namespace exo {

struct UcrlVtrConfig {
    double delta = 0.05;
    double norm_bound = 1.0;   // B; the ridge parameter is lambda = 1 / B^2
    double bonus_scale = 1.0;  // multiplies all three confidence radii
    /// Plan with the true expected rewards instead of estimating them.
    bool known_rewards = false;
    bool rank_reduction = false;
    /// Clip Q at the number of remaining stages H - h instead of H.
    bool clip_remaining = false;
    /// Among actions tied at the clipped maximum, prefer the larger
    /// unclipped optimistic value before the smaller index.
    bool optimistic_ties = false;
};

struct Bonuses {
    double hat;
    double check;
    double tilde;
};

Bonuses beta_bonuses(int k, int dim, double lambda, double delta, double norm_bound, int horizon);

/// Ridge statistics for one stage: the variance-weighted first-moment
/// system (gram, moment, theta) and the unweighted second-moment system
/// (gram2, moment2, theta2). The Cholesky factors and estimates reflect
/// the statistics as of the last refresh().
struct RidgeStage {
    Eigen::MatrixXd gram;
    Eigen::VectorXd moment;
    Eigen::VectorXd theta;
    Eigen::MatrixXd gram2;
    Eigen::VectorXd moment2;
    Eigen::VectorXd theta2;
    Eigen::LLT<Eigen::MatrixXd> chol;
    Eigen::LLT<Eigen::MatrixXd> chol2;
};

class UcrlVtrState {
public:
    UcrlVtrState(int horizon, int dim, double lambda);

    int horizon() const { return static_cast<int>(stages_.size()); }
    int dim() const { return dim_; }
    double lambda() const { return lambda_; }

    /// Current episode index k, starting at 1.
    int episode() const { return episode_; }
    void advance_episode() { ++episode_; }

    RidgeStage& stage(int h) { return stages_[static_cast<std::size_t>(h)]; }
    const RidgeStage& stage(int h) const { return stages_[static_cast<std::size_t>(h)]; }

    /// Refactor every Gram matrix and re-solve theta and theta2.
    void refresh();

private:
    int dim_;
    double lambda_;
    int episode_ = 1;
    std::vector<RidgeStage> stages_;
};

/// Feature access for the learner: phi_V(s, a) = sum_s' phi(s'|s,a) V(s'),
/// which for Exo-MDPs is the vector (V(f(s, a, j)))_j, optionally projected
/// onto the row space of the information matrix.
class UcrlFeatures {
public:
    explicit UcrlFeatures(const ExoMdp& structure);
    UcrlFeatures(const ExoMdp& structure, RankReduction reduction);

    int dim() const { return dim_; }
    bool reduced() const { return reduction_.has_value(); }
    const ExoMdp& structure() const { return structure_; }
    const std::optional<RankReduction>& reduction() const { return reduction_; }

    /// Fills `out` (dim x S*A) with phi_V, or phi_{V^2} when `squared`.
    void value_features(std::span<const double> v, bool squared, Eigen::MatrixXd& out) const;
    Eigen::VectorXd value_feature(int s, int a, std::span<const double> v, bool squared) const;

    /// Reward features, dim x S*A.
    const Eigen::MatrixXd& reward_features() const { return reward_; }

    /// The learner-space parameter matching p: p itself, or P^T p.
    Eigen::VectorXd parameter(const ProbVec& p) const;

private:
    ExoMdp structure_;
    std::optional<RankReduction> reduction_;
    int dim_;
    Eigen::MatrixXd reward_;
    mutable Eigen::MatrixXd scratch_;
};

/// Expected reward E[g(s, a, xi)] per stage, laid out [h][s][a].
std::vector<double> expected_reward_table(const ExoMdp& mdp, const ExoSchedule& schedule);

struct UcrlPlan {
    Policy policy;
    std::vector<double> q;  // [h][s][a]
    ValueTable values;
};

/// Optimistic backward induction. `known_reward`, when given, is an
/// [h][s][a] table of expected rewards; otherwise rewards are estimated
/// optimistically from the same ridge system.
UcrlPlan ucrl_plan(const UcrlVtrState& state, const UcrlFeatures& features,
                   const UcrlVtrConfig& config, const std::vector<double>* known_reward);

/// What one observation contributed to the stage statistics.
struct ObservationRecord {
    Eigen::VectorXd phi_v;
    Eigen::VectorXd phi_v2;
    double sigma2;
    double target;
    double target2;
    std::optional<Eigen::VectorXd> phi_r;
    double reward;
};

/// Accumulate one transition at stage h into the stage statistics. Uses the
/// factors from the last refresh(); call state.refresh() once the episode
/// has been fully observed.
ObservationRecord ucrl_observe(UcrlVtrState& state, const UcrlFeatures& features,
                               const UcrlVtrConfig& config, int h, const Step& step,
                               std::span<const double> v_next);

class UcrlVtr : public Learner {
public:
    /// `structure` carries f and g; its schedule is ignored. With
    /// config.known_rewards, `known_reward` must hold the true [h][s][a]
    /// expected rewards.
    UcrlVtr(const ExoMdp& structure, UcrlVtrConfig config,
            std::optional<std::vector<double>> known_reward = std::nullopt);

    std::string name() const override { return "ucrl_vtr"; }
    EpisodePolicy current_policy() override;
    void observe_episode(const Trajectory& trajectory) override;

    const UcrlVtrState& state() const { return state_; }
    const UcrlFeatures& features() const { return features_; }
    const UcrlVtrConfig& config() const { return config_; }

private:
    UcrlVtrConfig config_;
    UcrlFeatures features_;
    UcrlVtrState state_;
    std::optional<std::vector<double>> known_reward_;
    std::optional<UcrlPlan> plan_;
};

/// Build the feature view used by UcrlVtr for `structure` under `config`.
UcrlFeatures make_ucrl_features(const ExoMdp& structure, const UcrlVtrConfig& config);

}  // namespace exo
