#include "exo/ucrl_vtr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace exo {

Bonuses beta_bonuses(int k, int dim, double lambda, double delta, double norm_bound, int horizon) {
    if (k < 1 || dim < 1 || horizon < 1) throw ContractError("beta_bonuses: k, dim, H must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ContractError("beta_bonuses: delta must be in (0,1)");
    if (!(lambda > 0.0)) throw ContractError("beta_bonuses: lambda must be positive");
    const double kd = k;
    const double d = dim;
    const double H = horizon;
    const double H2 = H * H;
    const double H4 = H2 * H2;
    const double log_det = std::log(1.0 + kd / lambda);
    const double log_conf = std::log(4.0 * kd * kd * H / delta);
    const double base = std::sqrt(lambda) * norm_bound;
    Bonuses b;
    b.hat = 8.0 * std::sqrt(d * log_det * log_conf) + 4.0 * std::sqrt(d) * log_conf + base;
    b.check = 8.0 * d * std::sqrt(log_det * log_conf) + 4.0 * std::sqrt(d) * log_conf + base;
    b.tilde = 8.0 * std::sqrt(d * H4 * std::log(1.0 + kd * H4 / (d * lambda)) * log_conf) +
              4.0 * H2 * log_conf + base;
    return b;
}

UcrlVtrState::UcrlVtrState(int horizon, int dim, double lambda) : dim_(dim), lambda_(lambda) {
    if (horizon < 1 || dim < 1) throw ContractError("UcrlVtrState: horizon and dim must be >= 1");
    if (!(lambda > 0.0)) throw ContractError("UcrlVtrState: lambda must be positive");
    stages_.resize(static_cast<std::size_t>(horizon));
    for (RidgeStage& st : stages_) {
        st.gram = lambda * Eigen::MatrixXd::Identity(dim, dim);
        st.gram2 = st.gram;
        st.moment = Eigen::VectorXd::Zero(dim);
        st.moment2 = Eigen::VectorXd::Zero(dim);
        st.theta = Eigen::VectorXd::Zero(dim);
        st.theta2 = Eigen::VectorXd::Zero(dim);
        st.chol.compute(st.gram);
        st.chol2.compute(st.gram2);
    }
}

void UcrlVtrState::refresh() {
    for (RidgeStage& st : stages_) {
        st.chol.compute(st.gram);
        st.chol2.compute(st.gram2);
        if (st.chol.info() != Eigen::Success || st.chol2.info() != Eigen::Success) {
            throw ContractError("UcrlVtrState: Gram matrix lost positive definiteness");
        }
        st.theta = st.chol.solve(st.moment);
        st.theta2 = st.chol2.solve(st.moment2);
    }
}

// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd raw_reward_features(const ExoMdp& mdp) {
    const int A = mdp.n_actions();
    Eigen::MatrixXd r(mdp.n_exo(), mdp.n_states() * A);
    for (int s = 0; s < mdp.n_states(); ++s) {
        for (int a = 0; a < A; ++a) {
            const auto row = mdp.reward_row(s, a);
            for (int j = 0; j < mdp.n_exo(); ++j) r(j, s * A + a) = row[static_cast<std::size_t>(j)];
        }
    }
    return r;
}

}  // namespace

UcrlFeatures::UcrlFeatures(const ExoMdp& structure)
    : structure_(structure), dim_(structure.n_exo()), reward_(raw_reward_features(structure)) {}

UcrlFeatures::UcrlFeatures(const ExoMdp& structure, RankReduction reduction)
    : structure_(structure), reduction_(std::move(reduction)) {
    if (reduction_->projector.rows() != structure.n_exo()) {
        throw ContractError("UcrlFeatures: projector does not match the exogenous alphabet");
    }
    dim_ = reduction_->rank;
    reward_ = reduction_->projector.transpose() * raw_reward_features(structure);
}

void UcrlFeatures::value_features(std::span<const double> v, bool squared,
                                  Eigen::MatrixXd& out) const {
    const int S = structure_.n_states();
    const int A = structure_.n_actions();
    const int d = structure_.n_exo();
    Eigen::MatrixXd& raw = reduced() ? scratch_ : out;
    raw.resize(d, S * A);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const auto next = structure_.next_row(s, a);
            double* col = raw.data() + static_cast<std::ptrdiff_t>(s * A + a) * d;
            for (int j = 0; j < d; ++j) {
                const double x = v[static_cast<std::size_t>(next[static_cast<std::size_t>(j)])];
                col[j] = squared ? x * x : x;
            }
        }
    }
    if (reduced()) {
        out.resize(dim_, S * A);
        out.noalias() = reduction_->projector.transpose() * raw;
    }
}

Eigen::VectorXd UcrlFeatures::value_feature(int s, int a, std::span<const double> v,
                                            bool squared) const {
    const auto next = structure_.next_row(s, a);
    Eigen::VectorXd raw(structure_.n_exo());
    for (int j = 0; j < structure_.n_exo(); ++j) {
        const double x = v[static_cast<std::size_t>(next[static_cast<std::size_t>(j)])];
        raw(j) = squared ? x * x : x;
    }
    if (!reduced()) return raw;
    return reduction_->projector.transpose() * raw;
}

Eigen::VectorXd UcrlFeatures::parameter(const ProbVec& p) const {
    if (reduced()) return reduction_->parameter(p);
    return Eigen::Map<const Eigen::VectorXd>(p.values().data(), p.size());
}

UcrlFeatures make_ucrl_features(const ExoMdp& structure, const UcrlVtrConfig& config) {
    if (!config.rank_reduction) return UcrlFeatures(structure);
    const FeatureSet features = build_features(structure);
    const InfoMatrix info = build_info_matrix(features);
    RankReduction reduction = config.known_rewards ? rank_reduce(info)
                                                   : rank_reduce_with_rewards(features, info);
    return UcrlFeatures(structure, std::move(reduction));
}

std::vector<double> expected_reward_table(const ExoMdp& mdp, const ExoSchedule& schedule) {
    mdp.check_schedule(schedule);
    const int H = mdp.horizon();
    const int S = mdp.n_states();
    const int A = mdp.n_actions();
    std::vector<double> table(static_cast<std::size_t>(H) * S * A);
    for (int h = 0; h < H; ++h) {
        const ProbVec& p = stage_distribution(schedule, h);
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                table[(static_cast<std::size_t>(h) * S + s) * A + a] = expected_reward(mdp, p, s, a);
            }
        }
    }
    return table;
}

// ---------------------------------------------------------------------------

UcrlPlan ucrl_plan(const UcrlVtrState& state, const UcrlFeatures& features,
                   const UcrlVtrConfig& config, const std::vector<double>* known_reward) {
    const ExoMdp& mdp = features.structure();
    const int H = mdp.horizon();
    const int S = mdp.n_states();
    const int A = mdp.n_actions();
    const int SA = S * A;
    if (state.horizon() != H || state.dim() != features.dim()) {
        throw ContractError("ucrl_plan: state does not match the features");
    }
    if (known_reward && known_reward->size() != static_cast<std::size_t>(H) * SA) {
        throw ContractError("ucrl_plan: known reward table has the wrong size");
    }
    const double Hd = H;
    const double beta = config.bonus_scale *
                        beta_bonuses(state.episode(), state.dim(), state.lambda(), config.delta,
                                     config.norm_bound, H)
                            .hat;

    UcrlPlan plan{Policy::constant(H, S, 0), std::vector<double>(static_cast<std::size_t>(H) * SA),
                  ValueTable(H, S)};
    Eigen::MatrixXd phi;
    Eigen::MatrixXd work;
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd bonus;
    Eigen::RowVectorXd reward(SA);
    Eigen::RowVectorXd raw_reward(SA);
    for (int h = H - 1; h >= 0; --h) {
        const RidgeStage& st = state.stage(h);
        if (known_reward) {
            reward = Eigen::Map<const Eigen::RowVectorXd>(
                known_reward->data() + static_cast<std::ptrdiff_t>(h) * SA, SA);
            raw_reward = reward;
        } else {
            const Eigen::MatrixXd& phi_r = features.reward_features();
            work = phi_r;
            st.chol.matrixL().solveInPlace(work);
            raw_reward.noalias() = st.theta.transpose() * phi_r;
            raw_reward += beta * work.colwise().norm();
            reward = raw_reward.cwiseMax(0.0).cwiseMin(1.0);
        }

        features.value_features(plan.values.stage(h + 1), false, phi);
        mean.noalias() = st.theta.transpose() * phi;
        work = phi;
        st.chol.matrixL().solveInPlace(work);
        bonus = work.colwise().norm();

        const double cap = config.clip_remaining ? Hd - h : Hd;
        double* q = plan.q.data() + static_cast<std::ptrdiff_t>(h) * SA;
        for (int s = 0; s < S; ++s) {
            int best = 0;
            double best_q = -1.0;
            double best_raw = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < A; ++a) {
                const int sa = s * A + a;
                const double optimistic = mean(sa) + beta * bonus(sa);
                const double value = std::clamp(reward(sa) + optimistic, 0.0, cap);
                const double raw = raw_reward(sa) + optimistic;
                q[sa] = value;
                const bool better =
                    value > best_q ||
                    (config.optimistic_ties && value == best_q && raw > best_raw);
                if (better) {
                    best_q = value;
                    best_raw = raw;
                    best = a;
                }
            }
            plan.policy.set_action(h, s, best);
            plan.values.at(h, s) = best_q;
        }
    }
    return plan;
}

ObservationRecord ucrl_observe(UcrlVtrState& state, const UcrlFeatures& features,
                               const UcrlVtrConfig& config, int h, const Step& step,
                               std::span<const double> v_next) {
    const ExoMdp& mdp = features.structure();
    if (h < 0 || h >= state.horizon()) throw ContractError("ucrl_observe: stage out of range");
    mdp.check_indices(step.state, step.action, 0);
    if (step.next_state < 0 || step.next_state >= mdp.n_states() ||
        v_next.size() != static_cast<std::size_t>(mdp.n_states())) {
        throw ContractError("ucrl_observe: next state or value table out of range");
    }
    const double H = state.horizon();
    const Bonuses b = beta_bonuses(state.episode(), state.dim(), state.lambda(), config.delta,
                                   config.norm_bound, state.horizon());
    const double beta_check = config.bonus_scale * b.check;
    const double beta_tilde = config.bonus_scale * b.tilde;

    RidgeStage& st = state.stage(h);
    ObservationRecord rec;
    rec.phi_v = features.value_feature(step.state, step.action, v_next, false);
    rec.phi_v2 = features.value_feature(step.state, step.action, v_next, true);
    rec.target = v_next[static_cast<std::size_t>(step.next_state)];
    rec.target2 = rec.target * rec.target;
    rec.reward = step.reward;

    const double first = std::clamp(rec.phi_v.dot(st.theta), 0.0, H);
    const double second = std::clamp(rec.phi_v2.dot(st.theta2), 0.0, H * H);
    const double variance = second - first * first;
    const double width = st.chol.matrixL().solve(rec.phi_v).norm();
    const double width2 = st.chol2.matrixL().solve(rec.phi_v2).norm();
    const double correction =
        std::min(H * H, 2.0 * H * beta_check * width) + std::min(H * H, beta_tilde * width2);
    rec.sigma2 = std::max(H * H / state.dim(), variance + correction);

    const double w = 1.0 / rec.sigma2;
    st.gram.selfadjointView<Eigen::Lower>().rankUpdate(rec.phi_v, w);
    st.gram.triangularView<Eigen::StrictlyUpper>() = st.gram.transpose();
    st.moment += w * rec.target * rec.phi_v;
    st.gram2.selfadjointView<Eigen::Lower>().rankUpdate(rec.phi_v2, 1.0);
    st.gram2.triangularView<Eigen::StrictlyUpper>() = st.gram2.transpose();
    st.moment2 += rec.target2 * rec.phi_v2;

    if (!config.known_rewards) {
        const int sa = step.state * mdp.n_actions() + step.action;
        Eigen::VectorXd phi_r = features.reward_features().col(sa);
        st.gram.selfadjointView<Eigen::Lower>().rankUpdate(phi_r, 1.0);
        st.gram.triangularView<Eigen::StrictlyUpper>() = st.gram.transpose();
        st.moment += step.reward * phi_r;
        rec.phi_r = std::move(phi_r);
    }
    return rec;
}

// ---------------------------------------------------------------------------

UcrlVtr::UcrlVtr(const ExoMdp& structure, UcrlVtrConfig config,
                 std::optional<std::vector<double>> known_reward)
    : config_(config),
      features_(make_ucrl_features(structure, config)),
      state_(structure.horizon(), features_.dim(), 1.0 / (config.norm_bound * config.norm_bound)),
      known_reward_(std::move(known_reward)) {
    if (!(config.norm_bound > 0.0)) throw ContractError("UcrlVtr: norm bound must be positive");
    if (!(config.bonus_scale >= 0.0)) throw ContractError("UcrlVtr: bonus scale must be >= 0");
    if (config.known_rewards != known_reward_.has_value()) {
        throw ContractError("UcrlVtr: known_rewards needs exactly one expected reward table");
    }
}

EpisodePolicy UcrlVtr::current_policy() {
    if (!plan_) {
        plan_ = ucrl_plan(state_, features_, config_, known_reward_ ? &*known_reward_ : nullptr);
    }
    return plan_->policy;
}

void UcrlVtr::observe_episode(const Trajectory& trajectory) {
    if (!plan_) current_policy();
    const int H = state_.horizon();
    if (trajectory.steps.size() != static_cast<std::size_t>(H)) {
        throw ContractError("UcrlVtr: trajectory length differs from the horizon");
    }
    for (int h = 0; h < H; ++h) {
        ucrl_observe(state_, features_, config_, h, trajectory.steps[static_cast<std::size_t>(h)],
                     plan_->values.stage(h + 1));
    }
    state_.refresh();
    state_.advance_episode();
    plan_.reset();
}

}  // namespace exo
