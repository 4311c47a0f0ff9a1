#pragma once

// Linear-mixture view of an Exo-MDP: transition/reward features that are
// linear in the exogenous distribution, the stacked information matrix, its
// SVD-based rank reduction, and the lifting of a generic tabular MDP into
// an Exo-MDP.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "exo/core.hpp"

namespace exo {

/// phi_p(s' | s, a) for one successor s' that is reachable under some symbol.
struct TransitionFeature {
    int next_state;
    Eigen::VectorXd phi;  // length d, 0/1 entries
};

/// Features of the linear-mixture representation:
///   P(s' | s, a) = phi_p(s' | s, a) . p     R(s, a) = phi_r(s, a) . p
///
/// phi_p is stored sparsely: only successors with a non-zero feature
/// vector are kept, sorted by next state. Missing successors have the zero
/// feature.
class FeatureSet {
public:
    FeatureSet(int n_states, int n_actions, int n_exo,
               std::vector<std::vector<TransitionFeature>> transition, Eigen::MatrixXd reward);

    int n_states() const { return n_states_; }
    int n_actions() const { return n_actions_; }
    int n_exo() const { return n_exo_; }

    Eigen::VectorXd phi_p(int s, int a, int s_next) const;
    Eigen::VectorXd phi_r(int s, int a) const { return reward_.row(pair(s, a)).transpose(); }

    std::span<const TransitionFeature> transition_entries(int s, int a) const {
        return transition_[static_cast<std::size_t>(pair(s, a))];
    }

    /// Toggle one bit of phi_p(s' | s, a). Exposed for perturbation checks.
    void flip_transition_bit(int s, int a, int s_next, int j);

private:
    int pair(int s, int a) const { return s * n_actions_ + a; }

    int n_states_;
    int n_actions_;
    int n_exo_;
    std::vector<std::vector<TransitionFeature>> transition_;
    Eigen::MatrixXd reward_;  // rows (s, a), columns xi
};

FeatureSet build_features(const ExoMdp& mdp);

/// Row index (s, a, s') of the information matrix.
struct InfoRowKey {
    int state;
    int action;
    int next_state;
};

/// Stacked transition features F with rows (s, a, s') in lexicographic
/// order. Only the non-zero rows are materialized; all-zero rows affect
/// neither the singular values nor the row space.
struct InfoMatrix {
    Eigen::MatrixXd rows;
    std::vector<InfoRowKey> keys;
    std::int64_t total_rows = 0;  // |S|^2 |A|
    Eigen::VectorXd singular_values;
    Eigen::MatrixXd right_singular_vectors;  // d x min(nnz rows, d)
    int rank = 0;
};

/// Numerical rank: count of sigma_i > max(rows, cols) * sigma_1 * 1e-10.
int numerical_rank(const Eigen::VectorXd& singular_values, std::int64_t rows, std::int64_t cols);

InfoMatrix build_info_matrix(const FeatureSet& features);

/// Projection onto the r-dimensional row space of F.
///
/// For every feature phi in that row space and every p,
///   (P^T phi) . (P^T p) == phi . p,
/// so a learner can work with r-dimensional features and parameter
/// theta = P^T p instead of the d-dimensional originals.
struct RankReduction {
    Eigen::MatrixXd projector;  // d x r, orthonormal columns
    int rank = 0;

    Eigen::VectorXd reduce(const Eigen::VectorXd& phi) const {
        return projector.transpose() * phi;
    }
    Eigen::VectorXd parameter(const ProbVec& p) const;
    Eigen::VectorXd reduced_phi(const FeatureSet& features, int s, int a, int s_next) const {
        return reduce(features.phi_p(s, a, s_next));
    }
};

RankReduction rank_reduce(const InfoMatrix& info);

/// Projector spanning the rows of F together with every reward feature
/// phi_r(s, a). Coincides with rank_reduce(info) whenever the reward
/// features already lie in the row space of F.
RankReduction rank_reduce_with_rewards(const FeatureSet& features, const InfoMatrix& info);

/// Largest deviation between the feature-based kernel/reward and the direct
/// summation over exogenous symbols.
double verify_linear_representation(const ExoMdp& mdp, const FeatureSet& features,
                                    const ProbVec& p);
double verify_linear_representation(const ExoMdp& mdp, const ProbVec& p);

/// Finite-horizon tabular MDP with a finite reward support.
struct TabularMdp {
    int n_states = 0;
    int n_actions = 0;
    int horizon = 0;
    int start_state = 0;
    std::vector<double> transition;     // T[s][a][s']
    std::vector<double> reward_values;  // support, each in [0, 1]
    std::vector<double> reward_probs;   // [s][a][k] over reward_values

    double kernel(int s, int a, int s_next) const {
        return transition[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s_next];
    }
    double reward_prob(int s, int a, int k) const {
        return reward_probs[(static_cast<std::size_t>(s) * n_actions + a) * reward_values.size() +
                            static_cast<std::size_t>(k)];
    }
    double mean_reward(int s, int a) const;

    /// Throws ContractError on malformed tables.
    void validate() const;
};

/// Size of the lifted exogenous alphabet before pruning:
/// |S|^(|S||A|) * |R|^(|S||A|).
double lifted_alphabet_size(const TabularMdp& mdp);

inline constexpr std::uint64_t kDefaultLiftCap = 1'000'000;

/// Recast a tabular MDP as an Exo-MDP whose exogenous symbol is the tuple of
/// independent per-(s, a) successor and reward draws. Zero-probability
/// tuples are pruned. Throws CapacityError when the unpruned alphabet
/// exceeds `cap`.
ExoMdp lift_discrete_mdp(const TabularMdp& mdp, std::uint64_t cap = kDefaultLiftCap);

/// Backward induction directly on the tabular kernel.
Solution solve_tabular(const TabularMdp& mdp);

}  // namespace exo
