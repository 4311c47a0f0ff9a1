#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/LU>

#include "exo/base_stock.hpp"
#include "exo/environments.hpp"
#include "exo/plug_in.hpp"
#include "exo/q_learning.hpp"
#include "exo/ucrl_vtr.hpp"
#include "support.hpp"

using namespace exo;
using exo::testing::random_exo_mdp;
using exo::testing::random_probvec;

namespace {

void set_oracle(UcrlVtrState& state, const UcrlFeatures& features, const ProbVec& p) {
    const Eigen::VectorXd theta = features.parameter(p);
    for (int h = 0; h < state.horizon(); ++h) {
        state.stage(h).theta = theta;
        state.stage(h).theta2 = theta;
    }
}

// Same dynamics with the exogenous labels permuted: f'(s, a, j) = f(s, a, perm[j]).
ExoMdp relabel(const ExoMdp& mdp, const std::vector<int>& perm) {
    ExoMdpTables t;
    t.n_states = mdp.n_states();
    t.n_actions = mdp.n_actions();
    t.n_exo = mdp.n_exo();
    t.horizon = mdp.horizon();
    t.start_state = mdp.start_state();
    for (int s = 0; s < t.n_states; ++s) {
        for (int a = 0; a < t.n_actions; ++a) {
            for (int j = 0; j < t.n_exo; ++j) {
                t.next.push_back(mdp.next_state(s, a, perm[static_cast<std::size_t>(j)]));
                t.reward.push_back(mdp.reward(s, a, perm[static_cast<std::size_t>(j)]));
            }
        }
    }
    std::vector<double> q(static_cast<std::size_t>(t.n_exo));
    for (int j = 0; j < t.n_exo; ++j) {
        q[static_cast<std::size_t>(j)] = mdp.exo_distribution(0)[perm[static_cast<std::size_t>(j)]];
    }
    t.exo_dist = {ProbVec(std::move(q))};
    return ExoMdp(std::move(t));
}

}  // namespace

TEST_CASE("confidence radii") {
    const Bonuses b = beta_bonuses(10, 4, 1.0, 0.05, 1.0, 5);
    CHECK(b.hat == doctest::Approx(166.4258075490136).epsilon(1e-12));
    CHECK(b.check == doctest::Approx(247.0785372332586).epsilon(1e-12));
    CHECK(b.tilde == doctest::Approx(4591.892848053737).epsilon(1e-12));
    CHECK(beta_bonuses(20, 4, 1.0, 0.05, 1.0, 5).hat > b.hat);
    CHECK_THROWS_AS(beta_bonuses(0, 4, 1.0, 0.05, 1.0, 5), ContractError);
    CHECK_THROWS_AS(beta_bonuses(1, 4, 1.0, 1.5, 1.0, 5), ContractError);
}

TEST_CASE("oracle parameter with zero bonus reproduces the DP solution") {
    std::mt19937_64 gen(77);
    for (int trial = 0; trial < 30; ++trial) {
        const ExoMdp mdp = random_exo_mdp(gen, 1 + static_cast<int>(gen() % 4),
                                          1 + static_cast<int>(gen() % 3),
                                          1 + static_cast<int>(gen() % 5), 4);
        const Solution sol = dp_solve(mdp);
        for (bool reduced : {false, true}) {
            UcrlVtrConfig config;
            config.bonus_scale = 0.0;
            config.rank_reduction = reduced;
            const UcrlFeatures features = make_ucrl_features(mdp.structure_only(), config);
            UcrlVtrState state(mdp.horizon(), features.dim(), 1.0);
            set_oracle(state, features, mdp.exo_distribution(0));
            const UcrlPlan plan = ucrl_plan(state, features, config, nullptr);
            for (int h = 0; h <= mdp.horizon(); ++h) {
                for (int s = 0; s < mdp.n_states(); ++s) {
                    CHECK(std::abs(plan.values.at(h, s) - sol.values.at(h, s)) < 1e-9);
                }
            }
            CHECK(std::abs(policy_value(mdp, mdp.schedule(), plan.policy) -
                           sol.values.at(0, mdp.start_state())) < 1e-9);

            config.known_rewards = true;
            const auto table = expected_reward_table(mdp, mdp.schedule());
            const UcrlPlan known = ucrl_plan(state, features, config, &table);
            CHECK(std::abs(known.values.at(0, mdp.start_state()) -
                           sol.values.at(0, mdp.start_state())) < 1e-9);
        }
    }
}

TEST_CASE("incremental ridge statistics match a batch solve") {
    std::mt19937_64 gen(12);
    const ExoMdp mdp = random_exo_mdp(gen, 3, 2, 4, 3);
    UcrlVtrConfig config;
    config.bonus_scale = 0.25;
    UcrlVtr learner(mdp.structure_only(), config);
    const int H = mdp.horizon();
    const int d = mdp.n_exo();

    std::vector<Eigen::MatrixXd> gram(static_cast<std::size_t>(H), Eigen::MatrixXd::Identity(d, d));
    std::vector<Eigen::VectorXd> moment(static_cast<std::size_t>(H), Eigen::VectorXd::Zero(d));
    UcrlVtrState shadow(H, d, 1.0);
    const UcrlFeatures features(mdp.structure_only());
    for (int k = 0; k < 15; ++k) {
        const EpisodePolicy pi = learner.current_policy();
        const UcrlPlan plan = ucrl_plan(shadow, features, config, nullptr);
        CHECK(std::get<Policy>(pi) == plan.policy);
        Rng rng = Rng::stream(0, 1, static_cast<std::uint64_t>(k));
        const Trajectory tr = rollout_episode(mdp, pi, rng, ObservationMode::None);
        for (int h = 0; h < H; ++h) {
            const ObservationRecord rec = ucrl_observe(shadow, features, config, h,
                                                       tr.steps[static_cast<std::size_t>(h)],
                                                       plan.values.stage(h + 1));
            CHECK(rec.sigma2 >= H * H / static_cast<double>(d) - 1e-12);
            REQUIRE(rec.phi_r.has_value());
            auto& G = gram[static_cast<std::size_t>(h)];
            auto& m = moment[static_cast<std::size_t>(h)];
            G += rec.phi_v * rec.phi_v.transpose() / rec.sigma2 + *rec.phi_r * rec.phi_r->transpose();
            m += rec.phi_v * rec.target / rec.sigma2 + *rec.phi_r * rec.reward;
        }
        shadow.refresh();
        shadow.advance_episode();
        learner.observe_episode(tr);
    }
    for (int h = 0; h < H; ++h) {
        const auto& G = gram[static_cast<std::size_t>(h)];
        const Eigen::VectorXd batch = G.fullPivLu().solve(moment[static_cast<std::size_t>(h)]);
        CHECK((learner.state().stage(h).gram - G).norm() < 1e-9 * G.norm());
        CHECK((learner.state().stage(h).theta - batch).norm() < 1e-8 * (1.0 + batch.norm()));
    }
    CHECK(learner.state().episode() == 16);
}

TEST_CASE("UCRL-VTR is blind to the labelling of exogenous symbols") {
    std::mt19937_64 gen(41);
    const ExoMdp mdp = random_exo_mdp(gen, 3, 3, 5, 3);
    const std::vector<int> perm = {3, 0, 4, 1, 2};
    const ExoMdp other = relabel(mdp, perm);
    UcrlVtrConfig config;
    config.bonus_scale = 0.05;
    config.optimistic_ties = true;
    UcrlVtr a(mdp.structure_only(), config);
    UcrlVtr b(other.structure_only(), config);
    for (int k = 0; k < 30; ++k) {
        const Policy pa = std::get<Policy>(a.current_policy());
        const Policy pb = std::get<Policy>(b.current_policy());
        CHECK(pa == pb);
        Rng rng = Rng::stream(3, 0, static_cast<std::uint64_t>(k));
        const Trajectory tr = rollout_episode(mdp, pa, rng, ObservationMode::None);
        a.observe_episode(tr);
        b.observe_episode(tr);
    }
    for (int h = 0; h < mdp.horizon(); ++h) {
        const Eigen::VectorXd& ta = a.state().stage(h).theta;
        const Eigen::VectorXd& tb = b.state().stage(h).theta;
        for (int j = 0; j < 5; ++j) {
            CHECK(std::abs(tb(j) - ta(perm[static_cast<std::size_t>(j)])) < 1e-9);
        }
    }
}

TEST_CASE("UCRL-VTR argument checks") {
    const ExoMdp mdp = make_circle_toy();
    UcrlVtrConfig config;
    config.known_rewards = true;
    CHECK_THROWS_AS(UcrlVtr(mdp.structure_only(), config), ContractError);
    config.known_rewards = false;
    config.norm_bound = 0.0;
    CHECK_THROWS_AS(UcrlVtr(mdp.structure_only(), config), ContractError);
    UcrlVtr ok(mdp.structure_only(), UcrlVtrConfig{});
    CHECK_THROWS_AS(ok.observe_episode(Trajectory{}), ContractError);
}

TEST_CASE("plug-in estimates from exogenous counts") {
    const ExoMdp mdp = make_circle_toy();
    PlugIn learner(mdp.structure_only());
    CHECK(learner.required_mode() == ObservationMode::Full);
    CHECK(learner.estimate() == ProbVec::uniform(4));
    const auto out = run_learner(mdp, learner, 40, ObservationMode::Full, 0, 5);
    CHECK(out.size() == 40);
    CHECK(learner.total() == 40 * mdp.horizon());
    const ProbVec est = learner.estimate();
    for (int j = 0; j < 4; ++j) {
        CHECK(est[j] == doctest::Approx(learner.counts()[static_cast<std::size_t>(j)] / 200.0));
    }
    PlugIn blind(mdp.structure_only());
    CHECK_THROWS_AS(run_learner(mdp, blind, 3, ObservationMode::None, 0, 0), ModeError);
    Rng rng(1);
    const Trajectory tr =
        rollout_episode(mdp, Policy::constant(5, 1, 0), rng, ObservationMode::None);
    CHECK_THROWS_AS(blind.observe_episode(tr), ModeError);
}

TEST_CASE("plug-in bounds") {
    const double b = plug_in_l1_bound(4, 5, 3, 200, 0.05);
    CHECK(b == doctest::Approx(std::sqrt(4.0 * (4.0 + 2.0 * std::log(8000.0)) / 10.0)));
    CHECK_THROWS_AS(plug_in_l1_bound(4, 5, 1, 200, 0.05), ContractError);
    CHECK(plug_in_regret_bound(4, 5, 100, 0.05) ==
          doctest::Approx(9.0 * std::pow(5.0, 1.5) * std::sqrt((4.0 + 2.0 * std::log(4000.0)) * 100.0)));
}

TEST_CASE("plug-in concentration holds uniformly over episodes") {
    const ProbVec p({0.1, 0.2, 0.3, 0.4});
    const int d = 4, H = 5, K = 60, seeds = 200;
    int held = 0;
    for (int seed = 0; seed < seeds; ++seed) {
        std::vector<double> counts(4, 0.0);
        bool ok = true;
        for (int k = 1; k <= K; ++k) {
            if (k >= 2) {
                const ProbVec est = ProbVec::from_counts(counts);
                ok &= p.l1_distance(est) <= plug_in_l1_bound(d, H, k, K, 0.05);
            }
            Rng rng = Rng::stream(9, static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(k));
            for (int h = 0; h < H; ++h) counts[static_cast<std::size_t>(sample_exogenous(p, rng))] += 1.0;
        }
        held += ok;
    }
    CHECK(held >= 0.95 * seeds);
}

TEST_CASE("Q-learning update arithmetic") {
    QLearningConfig config;
    config.bonus_scale = 0.5;
    config.planned_episodes = 10;
    QLearning q(3, 2, 2, config);
    const double log_term = std::log(2.0 * 2 * 2 * 3 * 10 / 0.05);
    CHECK(q.learning_rate(1) == 1.0);
    CHECK(q.learning_rate(3) == doctest::Approx(4.0 / 6.0));
    CHECK(q.bonus(4) == doctest::Approx(0.5 * std::sqrt(27.0 * log_term / 4.0)));
    CHECK(q.q(0, 0, 0) == 3.0);
    CHECK(q.value(3, 0) == 0.0);

    q.update(2, 0, 1, 0.4, 1);
    CHECK(q.visits(2, 0, 1) == 1);
    CHECK(q.q(2, 0, 1) == doctest::Approx(std::min(3.0, 0.4 + q.bonus(1))));
    const double before = q.q(2, 0, 1);
    q.update(2, 0, 1, 0.0, 1);
    const double a2 = q.learning_rate(2);
    CHECK(q.q(2, 0, 1) == doctest::Approx(std::min(3.0, (1.0 - a2) * before + a2 * q.bonus(2))));
    QLearningConfig small;
    small.bonus_scale = 0.01;
    QLearning r(1, 1, 1, small);
    r.update(0, 0, 0, 0.6, 0);
    r.update(0, 0, 0, 0.2, 0);
    CHECK(r.q(0, 0, 0) == doctest::Approx((0.6 + r.bonus(1)) / 3.0 + 2.0 * (0.2 + r.bonus(2)) / 3.0));
    CHECK(q.value(2, 0) == doctest::Approx(3.0));  // action 0 still at its initial value
    CHECK_THROWS_AS(q.update(3, 0, 0, 0.0, 0), ContractError);
}

TEST_CASE("Q-learning greedy policy follows the table") {
    QLearningConfig config;
    config.bonus_scale = 0.0;
    QLearning q(1, 1, 3, config);
    q.update(0, 0, 0, 0.2, 0);
    q.update(0, 0, 2, 0.9, 0);
    q.update(0, 0, 1, 0.5, 0);
    CHECK(std::get<Policy>(q.current_policy()).action(0, 0) == 2);
}

TEST_CASE("convex search keeps the minimizer of noise-free convex costs") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> where(0.0, 10.0);
    for (int trial = 0; trial < 30; ++trial) {
        const double x_star = where(gen);
        const auto f = [&](double x) { return std::min(1.0, std::abs(x - x_star) / 10.0); };
        ConvexBanditSearch search(0.0, 10.0, 1000);
        CHECK(search.samples_per_probe() == static_cast<long long>(std::ceil(8.0 * std::log(1000.0))));
        for (int i = 0; i < 200000; ++i) search.record(f(search.next_point()));
        CHECK(search.left() <= x_star + 1e-12);
        CHECK(search.right() >= x_star - 1e-12);
        CHECK(search.right() - search.left() < 10.0);
        CHECK(search.epoch() > 1);
    }
}

TEST_CASE("convex search converges on a noisy quadratic") {
    const double x_star = 6.3;
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> noise(-0.1, 0.1);
    ConvexBanditSearch search(0.0, 10.0, 400000);
    const auto probes = search.probes();
    CHECK(probes == std::vector<double>{2.5, 5.0, 7.5});
    for (int i = 0; i < 400000; ++i) {
        const double x = search.next_point();
        const double f = 0.2 + 0.5 * (x - x_star) * (x - x_star) / 40.0;
        search.record(std::clamp(f + noise(gen), 0.0, 1.0));
    }
    CHECK(search.left() <= x_star);
    CHECK(search.right() >= x_star);
    CHECK(std::abs(search.next_point() - x_star) < 2.0);
}

TEST_CASE("online base-stock starts at the first quartile and plays base-stock policies") {
    const InventoryModel m = make_inventory(scenario_params("II"));
    OnlineBaseStock learner(m, 1000);
    CHECK(learner.current_level() == 3);  // lround(10 / 4)
    const Policy pi = std::get<Policy>(learner.current_policy());
    CHECK(pi == base_stock_policy(m, 3));
    const auto values = base_stock_values(m);
    CHECK(values.size() == 11);
    CHECK(best_base_stock(m).level == 6);
}
