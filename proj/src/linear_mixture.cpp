#include "exo/linear_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace exo {

FeatureSet::FeatureSet(int n_states, int n_actions, int n_exo,
                       std::vector<std::vector<TransitionFeature>> transition,
                       Eigen::MatrixXd reward)
    : n_states_(n_states),
      n_actions_(n_actions),
      n_exo_(n_exo),
      transition_(std::move(transition)),
      reward_(std::move(reward)) {
    if (transition_.size() != static_cast<std::size_t>(n_states_) * n_actions_ ||
        reward_.rows() != static_cast<Eigen::Index>(n_states_) * n_actions_ ||
        reward_.cols() != n_exo_) {
        throw ContractError("FeatureSet: table shapes do not match cardinalities");
    }
}

Eigen::VectorXd FeatureSet::phi_p(int s, int a, int s_next) const {
    for (const TransitionFeature& e : transition_entries(s, a)) {
        if (e.next_state == s_next) return e.phi;
    }
    return Eigen::VectorXd::Zero(n_exo_);
}

void FeatureSet::flip_transition_bit(int s, int a, int s_next, int j) {
    auto& entries = transition_[static_cast<std::size_t>(pair(s, a))];
    auto it = std::find_if(entries.begin(), entries.end(),
                           [s_next](const TransitionFeature& e) { return e.next_state == s_next; });
    if (it == entries.end()) {
        TransitionFeature e{s_next, Eigen::VectorXd::Zero(n_exo_)};
        e.phi(j) = 1.0;
        entries.push_back(std::move(e));
        std::sort(entries.begin(), entries.end(),
                  [](const auto& x, const auto& y) { return x.next_state < y.next_state; });
        return;
    }
    it->phi(j) = it->phi(j) != 0.0 ? 0.0 : 1.0;
}

FeatureSet build_features(const ExoMdp& mdp) {
    const int S = mdp.n_states();
    const int A = mdp.n_actions();
    const int d = mdp.n_exo();
    std::vector<std::vector<TransitionFeature>> transition(static_cast<std::size_t>(S) * A);
    Eigen::MatrixXd reward(static_cast<Eigen::Index>(S) * A, d);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            std::map<int, Eigen::VectorXd> groups;
            auto next = mdp.next_row(s, a);
            auto rew = mdp.reward_row(s, a);
            for (int j = 0; j < d; ++j) {
                auto [it, inserted] = groups.try_emplace(next[static_cast<std::size_t>(j)]);
                if (inserted) it->second = Eigen::VectorXd::Zero(d);
                it->second(j) = 1.0;
                reward(s * A + a, j) = rew[static_cast<std::size_t>(j)];
            }
            auto& entries = transition[static_cast<std::size_t>(s) * A + a];
            entries.reserve(groups.size());
            for (auto& [s_next, phi] : groups) entries.push_back({s_next, std::move(phi)});
        }
    }
    return FeatureSet(S, A, d, std::move(transition), std::move(reward));
}

int numerical_rank(const Eigen::VectorXd& singular_values, std::int64_t rows, std::int64_t cols) {
    if (singular_values.size() == 0 || singular_values(0) <= 0.0) return 0;
    const double threshold =
        static_cast<double>(std::max(rows, cols)) * singular_values(0) * 1e-10;
    int r = 0;
    for (Eigen::Index i = 0; i < singular_values.size(); ++i) {
        if (singular_values(i) > threshold) ++r;
    }
    return r;
}

namespace {

struct Spectrum {
    Eigen::VectorXd values;
    Eigen::MatrixXd right;
};

Spectrum thin_svd(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) {
        return {Eigen::VectorXd(), Eigen::MatrixXd::Zero(m.cols(), 0)};
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
    return {svd.singularValues(), svd.matrixV()};
}

}  // namespace

InfoMatrix build_info_matrix(const FeatureSet& features) {
    const int S = features.n_states();
    const int A = features.n_actions();
    const int d = features.n_exo();
    InfoMatrix info;
    info.total_rows = static_cast<std::int64_t>(S) * S * A;
    std::size_t nnz = 0;
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) nnz += features.transition_entries(s, a).size();
    }
    info.rows.resize(static_cast<Eigen::Index>(nnz), d);
    info.keys.reserve(nnz);
    Eigen::Index row = 0;
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            for (const TransitionFeature& e : features.transition_entries(s, a)) {
                if (e.phi.isZero()) continue;
                info.rows.row(row++) = e.phi.transpose();
                info.keys.push_back({s, a, e.next_state});
            }
        }
    }
    info.rows.conservativeResize(row, d);
    Spectrum spec = thin_svd(info.rows);
    info.singular_values = std::move(spec.values);
    info.right_singular_vectors = std::move(spec.right);
    info.rank = numerical_rank(info.singular_values, info.total_rows, d);
    return info;
}

Eigen::VectorXd RankReduction::parameter(const ProbVec& p) const {
    Eigen::VectorXd v(p.size());
    for (int j = 0; j < p.size(); ++j) v(j) = p[j];
    return projector.transpose() * v;
}

RankReduction rank_reduce(const InfoMatrix& info) {
    RankReduction red;
    red.rank = info.rank;
    red.projector = info.right_singular_vectors.leftCols(info.rank);
    return red;
}

RankReduction rank_reduce_with_rewards(const FeatureSet& features, const InfoMatrix& info) {
    const Eigen::Index d = features.n_exo();
    const Eigen::Index reward_rows = static_cast<Eigen::Index>(features.n_states()) *
                                     features.n_actions();
    Eigen::MatrixXd stacked(info.rows.rows() + reward_rows, d);
    stacked.topRows(info.rows.rows()) = info.rows;
    for (int s = 0; s < features.n_states(); ++s) {
        for (int a = 0; a < features.n_actions(); ++a) {
            stacked.row(info.rows.rows() + s * features.n_actions() + a) =
                features.phi_r(s, a).transpose();
        }
    }
    Spectrum spec = thin_svd(stacked);
    RankReduction red;
    red.rank = numerical_rank(spec.values, info.total_rows + reward_rows, d);
    red.projector = spec.right.leftCols(red.rank);
    return red;
}

double verify_linear_representation(const ExoMdp& mdp, const FeatureSet& features,
                                    const ProbVec& p) {
    if (features.n_states() != mdp.n_states() || features.n_actions() != mdp.n_actions() ||
        features.n_exo() != mdp.n_exo() || p.size() != mdp.n_exo()) {
        throw ContractError("verify_linear_representation: shape mismatch");
    }
    Eigen::Map<const Eigen::VectorXd> pv(p.values().data(), p.size());
    std::vector<double> via_features(static_cast<std::size_t>(mdp.n_states()));
    double worst = 0.0;
    for (int s = 0; s < mdp.n_states(); ++s) {
        for (int a = 0; a < mdp.n_actions(); ++a) {
            const std::vector<double> direct = induced_kernel(mdp, p, s, a);
            std::fill(via_features.begin(), via_features.end(), 0.0);
            for (const TransitionFeature& e : features.transition_entries(s, a)) {
                via_features[static_cast<std::size_t>(e.next_state)] = e.phi.dot(pv);
            }
            for (std::size_t k = 0; k < direct.size(); ++k) {
                worst = std::max(worst, std::abs(direct[k] - via_features[k]));
            }
            worst = std::max(worst, std::abs(features.phi_r(s, a).dot(pv) -
                                             expected_reward(mdp, p, s, a)));
        }
    }
    return worst;
}

double verify_linear_representation(const ExoMdp& mdp, const ProbVec& p) {
    return verify_linear_representation(mdp, build_features(mdp), p);
}

double TabularMdp::mean_reward(int s, int a) const {
    double r = 0.0;
    for (std::size_t k = 0; k < reward_values.size(); ++k) {
        r += reward_prob(s, a, static_cast<int>(k)) * reward_values[k];
    }
    return r;
}

void TabularMdp::validate() const {
    if (n_states <= 0 || n_actions <= 0 || horizon <= 0 || reward_values.empty()) {
        throw ContractError("TabularMdp: empty dimensions");
    }
    if (start_state < 0 || start_state >= n_states) {
        throw ContractError("TabularMdp: start state out of range");
    }
    const std::size_t pairs = static_cast<std::size_t>(n_states) * n_actions;
    if (transition.size() != pairs * n_states ||
        reward_probs.size() != pairs * reward_values.size()) {
        throw ContractError("TabularMdp: table sizes do not match dimensions");
    }
    for (double r : reward_values) {
        if (!(r >= 0.0 && r <= 1.0)) throw ContractError("TabularMdp: rewards must lie in [0, 1]");
    }
    for (std::size_t i = 0; i < pairs; ++i) {
        // Each row must be a distribution.
        ProbVec(std::vector<double>(transition.begin() + static_cast<std::ptrdiff_t>(i * n_states),
                                    transition.begin() +
                                        static_cast<std::ptrdiff_t>((i + 1) * n_states)));
        const std::size_t m = reward_values.size();
        ProbVec(std::vector<double>(reward_probs.begin() + static_cast<std::ptrdiff_t>(i * m),
                                    reward_probs.begin() + static_cast<std::ptrdiff_t>((i + 1) * m)));
    }
}

double lifted_alphabet_size(const TabularMdp& mdp) {
    const double pairs = static_cast<double>(mdp.n_states) * mdp.n_actions;
    return std::pow(static_cast<double>(mdp.n_states), pairs) *
           std::pow(static_cast<double>(mdp.reward_values.size()), pairs);
}

ExoMdp lift_discrete_mdp(const TabularMdp& mdp, std::uint64_t cap) {
    mdp.validate();
    const double required = lifted_alphabet_size(mdp);
    if (required > static_cast<double>(cap)) {
        std::ostringstream os;
        os << "lift_discrete_mdp: exogenous alphabet needs " << required
           << " symbols, above the cap of " << cap;
        throw CapacityError(os.str(), required);
    }

    struct Option {
        int next_state;
        int reward_index;
        double prob;
    };
    const int S = mdp.n_states;
    const int A = mdp.n_actions;
    const int m = static_cast<int>(mdp.reward_values.size());
    const int coords = S * A;
    std::vector<std::vector<Option>> support(static_cast<std::size_t>(coords));
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            auto& opts = support[static_cast<std::size_t>(s * A + a)];
            for (int sn = 0; sn < S; ++sn) {
                for (int k = 0; k < m; ++k) {
                    const double w = mdp.kernel(s, a, sn) * mdp.reward_prob(s, a, k);
                    if (w > 0.0) opts.push_back({sn, k, w});
                }
            }
        }
    }
    std::size_t n_exo = 1;
    for (const auto& opts : support) n_exo *= opts.size();

    ExoMdpTables t;
    t.n_states = S;
    t.n_actions = A;
    t.n_exo = static_cast<int>(n_exo);
    t.horizon = mdp.horizon;
    t.start_state = mdp.start_state;
    t.next.assign(static_cast<std::size_t>(coords) * n_exo, 0);
    t.reward.assign(static_cast<std::size_t>(coords) * n_exo, 0.0);
    std::vector<double> probs(n_exo, 1.0);

    // Mixed-radix enumeration of the pruned product space; coordinate 0 is
    // the least significant digit.
    std::vector<std::size_t> digit(static_cast<std::size_t>(coords), 0);
    for (std::size_t x = 0; x < n_exo; ++x) {
        for (int c = 0; c < coords; ++c) {
            const Option& o = support[static_cast<std::size_t>(c)][digit[static_cast<std::size_t>(c)]];
            const std::size_t cell = static_cast<std::size_t>(c) * n_exo + x;
            t.next[cell] = o.next_state;
            t.reward[cell] = mdp.reward_values[static_cast<std::size_t>(o.reward_index)];
            probs[x] *= o.prob;
        }
        for (int c = 0; c < coords; ++c) {
            auto& dg = digit[static_cast<std::size_t>(c)];
            if (++dg < support[static_cast<std::size_t>(c)].size()) break;
            dg = 0;
        }
    }
    t.exo_dist = {ProbVec(std::move(probs))};
    return ExoMdp(std::move(t));
}

Solution solve_tabular(const TabularMdp& mdp) {
    mdp.validate();
    const int S = mdp.n_states;
    const int A = mdp.n_actions;
    ValueTable values(mdp.horizon, S);
    Policy policy = Policy::constant(mdp.horizon, S, 0);
    for (int t = mdp.horizon - 1; t >= 0; --t) {
        for (int s = 0; s < S; ++s) {
            double best = -1.0;
            int best_a = 0;
            for (int a = 0; a < A; ++a) {
                double q = mdp.mean_reward(s, a);
                for (int sn = 0; sn < S; ++sn) q += mdp.kernel(s, a, sn) * values.at(t + 1, sn);
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

}  // namespace exo
