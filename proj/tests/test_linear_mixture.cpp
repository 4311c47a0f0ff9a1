#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "exo/environments.hpp"
#include "exo/linear_mixture.hpp"
#include "support.hpp"

using namespace exo;
using exo::testing::random_exo_mdp;
using exo::testing::random_probvec;

namespace {

TabularMdp random_tabular(std::mt19937_64& gen, int S, int A, int H) {
    TabularMdp m;
    m.n_states = S;
    m.n_actions = A;
    m.horizon = H;
    m.reward_values = {0.0, 1.0};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int sa = 0; sa < S * A; ++sa) {
        const ProbVec row = random_probvec(gen, S);
        for (int s2 = 0; s2 < S; ++s2) m.transition.push_back(row[s2]);
        const double q = unit(gen) < 0.2 ? 1.0 : unit(gen);
        m.reward_probs.push_back(1.0 - q);
        m.reward_probs.push_back(q);
    }
    return m;
}

}  // namespace

TEST_CASE("features reproduce kernels and rewards") {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 60; ++trial) {
        const int S = 1 + static_cast<int>(gen() % 5);
        const int A = 1 + static_cast<int>(gen() % 5);
        const int d = 1 + static_cast<int>(gen() % 6);
        const ExoMdp mdp = random_exo_mdp(gen, S, A, d, 2);
        const ProbVec p = random_probvec(gen, d);
        CHECK(verify_linear_representation(mdp, p) <= 1e-12);

        const FeatureSet f = build_features(mdp);
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                double total = 0.0;
                for (const TransitionFeature& e : f.transition_entries(s, a)) {
                    for (int j = 0; j < d; ++j) {
                        CHECK(e.phi(j) == (mdp.next_state(s, a, j) == e.next_state ? 1.0 : 0.0));
                    }
                    total += e.phi.sum();
                }
                CHECK(total == d);  // every symbol leads somewhere
                for (int j = 0; j < d; ++j) CHECK(f.phi_r(s, a)(j) == mdp.reward(s, a, j));
            }
        }
    }
}

TEST_CASE("a flipped feature bit is detected") {
    std::mt19937_64 gen(4);
    ExoMdp mdp = random_exo_mdp(gen, 3, 2, 4, 2);
    mdp = mdp.with_schedule({ProbVec({0.1, 0.2, 0.3, 0.4})});
    FeatureSet f = build_features(mdp);
    const int target = mdp.next_state(0, 0, 2);
    f.flip_transition_bit(0, 0, target, 2);
    CHECK(verify_linear_representation(mdp, f, mdp.exo_distribution(0)) >= 0.3 - 1e-12);
}

TEST_CASE("numerical rank threshold") {
    Eigen::VectorXd sv(3);
    sv << 1.0, 1e-3, 1e-12;
    CHECK(numerical_rank(sv, 10, 3) == 2);
    sv << 1.0, 1e-3, 2e-9;
    CHECK(numerical_rank(sv, 10, 3) == 3);
    CHECK(numerical_rank(Eigen::VectorXd::Zero(2), 4, 2) == 0);
}

TEST_CASE("infection model has rank 4 over 8 symbols") {
    const ExoMdp mdp = make_infection(0.3, 0.1, 0.4, 10);
    const InfoMatrix info = build_info_matrix(build_features(mdp));
    CHECK(mdp.n_exo() == 8);
    CHECK(info.rank == 4);
    CHECK(info.total_rows == 8);
}

TEST_CASE("inventory information matrix has full rank d + 1") {
    for (int L : {0, 1, 2}) {
        for (int d : {3, 5}) {
            InventoryParams p;
            p.horizon = 3;
            p.lead_time = L;
            p.demand_support = d;
            p.demand_dist = truncated_poisson(2.0, d);
            const InventoryModel m = make_inventory(p);
            const InfoMatrix info = build_info_matrix(build_features(m.mdp()));
            CHECK(info.rank == d + 1);
        }
    }
}

TEST_CASE("rank reduction preserves every inner product") {
    std::mt19937_64 gen(23);
    const ExoMdp mdp = make_infection(0.3, 0.1, 0.4, 4);
    const FeatureSet f = build_features(mdp);
    const InfoMatrix info = build_info_matrix(f);
    const RankReduction red = rank_reduce(info);
    CHECK(red.rank == 4);
    CHECK((red.projector.transpose() * red.projector -
           Eigen::MatrixXd::Identity(red.rank, red.rank))
              .norm() < 1e-12);
    for (int trial = 0; trial < 20; ++trial) {
        const ProbVec p = random_probvec(gen, 8);
        const Eigen::VectorXd theta = red.parameter(p);
        for (int s = 0; s < 2; ++s) {
            for (int a = 0; a < 2; ++a) {
                const auto kernel = induced_kernel(mdp, p, s, a);
                for (int s2 = 0; s2 < 2; ++s2) {
                    CHECK(std::abs(red.reduced_phi(f, s, a, s2).dot(theta) -
                                   kernel[static_cast<std::size_t>(s2)]) < 1e-9);
                }
            }
        }
    }

    // Rewards outside the row space of F enlarge the projector.
    std::mt19937_64 g2(8);
    const ExoMdp rnd = random_exo_mdp(g2, 1, 3, 4, 2);
    const FeatureSet rf = build_features(rnd);
    const InfoMatrix ri = build_info_matrix(rf);
    CHECK(ri.rank == 1);
    const RankReduction both = rank_reduce_with_rewards(rf, ri);
    CHECK(both.rank == 4);
    const ProbVec p = random_probvec(g2, 4);
    for (int a = 0; a < 3; ++a) {
        CHECK(std::abs(both.reduce(rf.phi_r(0, a)).dot(both.parameter(p)) -
                       expected_reward(rnd, p, 0, a)) < 1e-12);
    }
}

TEST_CASE("lifting a tabular MDP preserves values and kernels") {
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 20; ++trial) {
        const int S = 2 + static_cast<int>(gen() % 2);
        const int A = 1 + static_cast<int>(gen() % 2);
        const TabularMdp tab = random_tabular(gen, S, A, 3);
        const ExoMdp lifted = lift_discrete_mdp(tab);
        CHECK(lifted.n_exo() <= lifted_alphabet_size(tab));
        CHECK(dp_solve(lifted).values.at(0, 0) ==
              doctest::Approx(solve_tabular(tab).values.at(0, 0)).epsilon(1e-12));
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const auto k = induced_kernel(lifted, lifted.exo_distribution(0), s, a);
                double tv = 0.0;
                for (int s2 = 0; s2 < S; ++s2) {
                    tv += std::abs(k[static_cast<std::size_t>(s2)] - tab.kernel(s, a, s2));
                }
                CHECK(tv / 2.0 <= 1e-12);
                CHECK(expected_reward(lifted, lifted.exo_distribution(0), s, a) ==
                      doctest::Approx(tab.mean_reward(s, a)));
            }
        }
    }
}

TEST_CASE("lifted alphabet size and capacity") {
    TabularMdp m;
    m.n_states = 3;
    m.n_actions = 2;
    m.horizon = 1;
    m.reward_values = {0.0, 1.0};
    m.transition.assign(18, 1.0 / 3.0);
    m.reward_probs.assign(12, 0.5);
    CHECK(lifted_alphabet_size(m) == doctest::Approx(std::pow(3.0, 6) * std::pow(2.0, 6)));
    CHECK_THROWS_AS(lift_discrete_mdp(m, 1000), CapacityError);
    CHECK(lift_discrete_mdp(m).n_exo() == 729 * 64);

    m.transition[0] = 2.0;
    CHECK_THROWS_AS(m.validate(), ContractError);
}
