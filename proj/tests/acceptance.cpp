// Acceptance gate: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>

#include "exo/base_stock.hpp"
#include "exo/environments.hpp"
#include "exo/harness.hpp"
#include "exo/linear_mixture.hpp"
#include "exo/plug_in.hpp"
#include "exo/ucrl_vtr.hpp"
#include "support.hpp"

using namespace exo;
using exo::testing::enumerate_best_value;
using exo::testing::random_exo_mdp;
using exo::testing::random_probvec;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome infection_rank() {
    const ExoMdp mdp = make_infection(0.3, 0.1, 0.4, 10);
    const InfoMatrix info = build_info_matrix(build_features(mdp));
    return {info.rank == 4 && mdp.n_exo() == 8,
            fmt("d=%d rank=%d", mdp.n_exo(), info.rank)};
}

Outcome inventory_rank() {
    bool ok = true;
    std::string detail;
    for (int L : {1, 2}) {
        for (int d : {3, 5}) {
            InventoryParams p;
            p.horizon = 5;
            p.lead_time = L;
            p.demand_support = d;
            p.demand_dist = truncated_poisson(2.0, d);
            const InventoryModel m = make_inventory(p);
            const int r = build_info_matrix(build_features(m.mdp())).rank;
            ok &= r == d + 1;
            detail += fmt("%s(L=%d,d=%d) rank=%d", detail.empty() ? "" : " ", L, d, r);
        }
    }
    return {ok, detail};
}

Outcome linear_representation() {
    std::mt19937_64 gen(301);
    double worst = 0.0;
    double worst_reduced = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int S = 1 + static_cast<int>(gen() % 5);
        const int A = 1 + static_cast<int>(gen() % 5);
        const int d = 1 + static_cast<int>(gen() % 6);
        const ExoMdp mdp = random_exo_mdp(gen, S, A, d, 2);
        const ProbVec p = random_probvec(gen, d);
        const FeatureSet f = build_features(mdp);
        worst = std::max(worst, verify_linear_representation(mdp, f, p));
        const RankReduction red = rank_reduce(build_info_matrix(f));
        const Eigen::VectorXd theta = red.parameter(p);
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                const auto kernel = induced_kernel(mdp, p, s, a);
                for (int s2 = 0; s2 < S; ++s2) {
                    worst_reduced = std::max(
                        worst_reduced, std::abs(red.reduced_phi(f, s, a, s2).dot(theta) -
                                                kernel[static_cast<std::size_t>(s2)]));
                }
            }
        }
    }
    return {worst <= 1e-12 && worst_reduced <= 1e-9,
            fmt("max deviation %.3g, rank-reduced %.3g", worst, worst_reduced)};
}

Outcome lifting() {
    std::mt19937_64 gen(404);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst_v = 0.0;
    double worst_tv = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        TabularMdp m;
        m.n_states = 2 + static_cast<int>(gen() % 2);
        m.n_actions = 1 + static_cast<int>(gen() % 2);
        m.horizon = 1 + static_cast<int>(gen() % 4);
        m.reward_values = {0.0, 1.0};
        for (int sa = 0; sa < m.n_states * m.n_actions; ++sa) {
            const ProbVec row = random_probvec(gen, m.n_states);
            for (int s2 = 0; s2 < m.n_states; ++s2) m.transition.push_back(row[s2]);
            const double q = unit(gen);
            m.reward_probs.push_back(1.0 - q);
            m.reward_probs.push_back(q);
        }
        const ExoMdp lifted = lift_discrete_mdp(m);
        worst_v = std::max(worst_v, std::abs(dp_solve(lifted).values.at(0, 0) -
                                             solve_tabular(m).values.at(0, 0)));
        for (int s = 0; s < m.n_states; ++s) {
            for (int a = 0; a < m.n_actions; ++a) {
                const auto k = induced_kernel(lifted, lifted.exo_distribution(0), s, a);
                double tv = 0.0;
                for (int s2 = 0; s2 < m.n_states; ++s2) {
                    tv += std::abs(k[static_cast<std::size_t>(s2)] - m.kernel(s, a, s2));
                }
                worst_tv = std::max(worst_tv, tv / 2.0);
            }
        }
    }
    return {worst_v <= 1e-9 && worst_tv <= 1e-12,
            fmt("max value gap %.3g, max TV %.3g", worst_v, worst_tv)};
}

Outcome dp_oracle() {
    std::mt19937_64 gen(505);
    double worst = 0.0;
    int instances = 0;
    long long policies = 0;
    while (instances < 100) {
        const int S = 1 + static_cast<int>(gen() % 3);
        const int A = 1 + static_cast<int>(gen() % 3);
        const int H = 1 + static_cast<int>(gen() % 4);
        const double count = std::pow(A, S * H);
        if (count > 1e4) continue;
        const ExoMdp mdp = random_exo_mdp(gen, S, A, 1 + static_cast<int>(gen() % 4), H);
        worst = std::max(worst, std::abs(dp_solve(mdp).values.at(0, mdp.start_state()) -
                                         enumerate_best_value(mdp, mdp.schedule())));
        policies += static_cast<long long>(count);
        ++instances;
    }
    return {worst <= 1e-9, fmt("%d instances, %lld policies, max gap %.3g", instances, policies,
                                worst)};
}

Outcome simulation_lemma() {
    std::mt19937_64 gen(606);
    int violations = 0;
    double tightest = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        const int S = 1 + static_cast<int>(gen() % 4);
        const int A = 1 + static_cast<int>(gen() % 3);
        const int d = 1 + static_cast<int>(gen() % 5);
        const int H = 1 + static_cast<int>(gen() % 6);
        const ExoMdp mdp = random_exo_mdp(gen, S, A, d, H);
        const ProbVec q = random_probvec(gen, d);
        std::vector<int> acts(static_cast<std::size_t>(S * H));
        for (int& a : acts) a = static_cast<int>(gen() % static_cast<unsigned>(A));
        const Policy pi(H, S, acts);
        const double gap =
            std::abs(policy_value(mdp, mdp.schedule(), pi) - policy_value(mdp, {q}, pi));
        const double eps = mdp.exo_distribution(0).l1_distance(q);
        const double bound = H * eps + H * (H - 1) / 2.0 * eps;
        if (gap > bound + 1e-12) ++violations;
        if (bound > 0.0) tightest = std::max(tightest, gap / bound);
    }
    return {violations == 0, fmt("violations=%d, max gap/bound=%.3f", violations, tightest)};
}

Outcome plug_in_concentration() {
    const ProbVec p({0.1, 0.2, 0.3, 0.4});
    const int d = 4, H = 5, K = 200, seeds = 1000;
    int held = 0;
    for (int seed = 0; seed < seeds; ++seed) {
        std::vector<double> counts(4, 0.0);
        bool ok = true;
        for (int k = 1; k <= K && ok; ++k) {
            if (k >= 2) {
                ok = p.l1_distance(ProbVec::from_counts(counts)) <= plug_in_l1_bound(d, H, k, K, 0.05);
            }
            Rng rng = Rng::stream(7, static_cast<std::uint64_t>(seed), static_cast<std::uint64_t>(k));
            for (int h = 0; h < H; ++h) counts[static_cast<std::size_t>(sample_exogenous(p, rng))] += 1.0;
        }
        held += ok;
    }
    const double frac = held / static_cast<double>(seeds);
    return {frac >= 0.95, fmt("bound held for all k on %.1f%% of seeds", 100.0 * frac)};
}

std::vector<double> mean_inst_regret(const ExoMdp& mdp, const std::function<std::unique_ptr<Learner>()>& make,
                                     int K, ObservationMode mode, int seeds) {
    const double vstar = dp_solve(mdp).values.at(0, mdp.start_state());
    std::vector<double> inst(static_cast<std::size_t>(K), 0.0);
    for (int seed = 0; seed < seeds; ++seed) {
        auto learner = make();
        const auto out = run_learner(mdp, *learner, K, mode, 1, static_cast<std::uint64_t>(seed));
        for (const EpisodeOutcome& o : out) {
            inst[static_cast<std::size_t>(o.episode - 1)] += (vstar - o.value) / seeds;
        }
    }
    return inst;
}

Outcome regret_rate() {
    const ExoMdp mdp = make_circle_toy();
    const auto inst = mean_inst_regret(
        mdp, [&] { return std::make_unique<PlugIn>(mdp.structure_only()); }, 1000,
        ObservationMode::Full, 20);
    double r250 = 0.0, r1000 = 0.0;
    for (int k = 0; k < 1000; ++k) {
        r1000 += inst[static_cast<std::size_t>(k)];
        if (k < 250) r250 += inst[static_cast<std::size_t>(k)];
    }
    const double ratio = r1000 / r250;
    return {ratio >= 1.6 && ratio <= 2.6,
            fmt("circle toy: Regret(250)=%.3f Regret(1000)=%.3f ratio=%.3f", r250, r1000, ratio)};
}

Outcome ucrl_sublinear() {
    const ExoMdp mdp = make_circle_toy();
    UcrlVtrConfig config;
    config.bonus_scale = kDefaultUcrlBonusScale;
    config.optimistic_ties = true;
    const int K = 2000;
    const auto inst = mean_inst_regret(
        mdp, [&] { return std::make_unique<UcrlVtr>(mdp.structure_only(), config); }, K,
        ObservationMode::None, 20);
    double first = 0.0, last = 0.0;
    for (int i = 0; i < K / 10; ++i) {
        first += inst[static_cast<std::size_t>(i)];
        last += inst[static_cast<std::size_t>(K - 1 - i)];
    }
    first /= K / 10;
    last /= K / 10;

    // Oracle parameter and zero bonus against dp_solve.
    std::mt19937_64 gen(909);
    double worst = 0.0;
    std::vector<ExoMdp> cases = {mdp};
    for (int i = 0; i < 30; ++i) cases.push_back(random_exo_mdp(gen, 3, 3, 4, 5));
    for (const ExoMdp& m : cases) {
        UcrlVtrConfig oracle;
        oracle.bonus_scale = 0.0;
        const UcrlFeatures features(m.structure_only());
        UcrlVtrState state(m.horizon(), features.dim(), 1.0);
        for (int h = 0; h < m.horizon(); ++h) {
            state.stage(h).theta = features.parameter(m.exo_distribution(0));
        }
        const UcrlPlan plan = ucrl_plan(state, features, oracle, nullptr);
        const Solution sol = dp_solve(m);
        for (int h = 0; h < m.horizon(); ++h) {
            for (int s = 0; s < m.n_states(); ++s) {
                worst = std::max(worst, std::abs(plan.values.at(h, s) - sol.values.at(h, s)));
            }
        }
    }
    return {last <= 0.25 * first && worst <= 1e-9,
            fmt("first 10%%=%.4f last 10%%=%.4f (%.3f of first); oracle plan max gap %.3g",
                first, last, last / first, worst)};
}

Outcome table2_scenario_one() {
    Table2Options options;
    options.episodes = 1000;
    options.seeds = 20;
    options.threads = 0;
    const auto rows = run_table2("I", options);
    auto row = [&](const char* name) -> const Table2Row& {
        for (const auto& r : rows) {
            if (r.algorithm == name) return r;
        }
        throw std::logic_error("missing row");
    };
    const InventoryModel m = make_inventory(scenario_params("I"));
    const double v_opt = dp_solve(m.mdp()).values.at(0, 0);
    const double v_bs = best_base_stock(m).value;
    const double raw_opt = m.total_cost(v_opt, CostNormalization::Raw);
    const double max_opt = m.total_cost(v_opt, CostNormalization::MaxNormalized);
    const double raw_bs = m.total_cost(v_bs, CostNormalization::Raw);
    const double max_bs = m.total_cost(v_bs, CostNormalization::MaxNormalized);
    const auto within = [](double x, double target) { return std::abs(x - target) <= 0.1 * target; };
    const bool opt_ok = within(raw_opt, 25.0) || within(max_opt, 25.0);
    const bool bs_ok = within(raw_bs, 48.8) || within(max_bs, 48.8);
    const double ucrl = row("UCRL-VTR").cost.mean;
    const double ql = row("QLearning").cost.mean;
    const double rnd = row("Random").cost.mean;
    const bool order_ok = ucrl < ql && ql < rnd;
    return {opt_ok && bs_ok && order_ok,
            fmt("C*=%.3f raw / %.4f max-normalized (target 25.0) %s; best base-stock=%.3f raw / "
                "%.4f max-normalized (target 48.8) %s; final UCRL-VTR=%.3f QLearning=%.3f "
                "Random=%.3f ordering %s",
                raw_opt, max_opt, opt_ok ? "ok" : "MISS", raw_bs, max_bs, bs_ok ? "ok" : "MISS",
                ucrl, ql, rnd, order_ok ? "ok" : "MISS")};
}

Outcome scenario_two_ordering() {
    const InventoryModel m = make_inventory(scenario_params("II"));
    const double c_opt = m.total_cost(dp_solve(m.mdp()).values.at(0, 0));
    const double c_bs = m.total_cost(best_base_stock(m).value);
    const int K = 1000, seeds = 20;
    double plug = 0.0, obs = 0.0;
    for (int seed = 0; seed < seeds; ++seed) {
        PlugIn p(m.mdp().structure_only());
        plug += m.total_cost(
                    run_learner(m.mdp(), p, K, ObservationMode::Full, 2, static_cast<std::uint64_t>(seed))
                        .back()
                        .value) /
                seeds;
        OnlineBaseStock o(m, K);
        obs += m.total_cost(
                   run_learner(m.mdp(), o, K, ObservationMode::None, 2, static_cast<std::uint64_t>(seed))
                       .back()
                       .value) /
               seeds;
    }
    const bool close = std::abs(c_bs - c_opt) <= 0.02 * c_opt;
    return {close && obs > plug,
            fmt("C*=%.3f best base-stock=%.3f; final PlugIn=%.3f OnlineBaseStock=%.3f", c_opt,
                c_bs, plug, obs)};
}

Outcome hard_instances() {
    bool ok = true;
    std::string detail;
    for (auto [d, H, K] : {std::tuple{4, 5, 100}, std::tuple{6, 8, 1000}}) {
        HardInstanceParams hp;
        hp.d = d;
        hp.horizon = H;
        hp.episodes = K;
        std::vector<int> z(static_cast<std::size_t>(d / 2));
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = i % 2 == 0 ? 1 : -1;
        hp.z_tilde = {z};
        const ExoMdp mdp = make_hard_stationary(hp);
        const double c = hard_instance_gap(K);
        const double vstar = raw_value(dp_solve(mdp).values.at(0, mdp.start_state()), H);
        double worst = std::abs(vstar - H * c * d);
        const int best = hypercube_index(z);
        for (int a = 0; a < (1 << (d / 2)); ++a) {
            const int mismatch = std::popcount(static_cast<unsigned>(a ^ best));
            const double v = raw_value(
                policy_value(mdp, mdp.schedule(), Policy::constant(H, mdp.n_states(), a)), H);
            worst = std::max(worst, std::abs((vstar - v) - 4.0 * c * H * mismatch));
        }
        ok &= worst <= 1e-9;
        detail += fmt("%s(d=%d,H=%d,K=%d) V*=%.6f max err %.2g", detail.empty() ? "" : " ", d, H, K, vstar, worst);
    }
    return {ok, detail};
}

Outcome base_stock_convexity() {
    const InventoryModel m = make_inventory(scenario_params("II"));
    const int n = 10000;
    std::vector<double> mean(11), se(11);
    for (int b = 0; b <= 10; ++b) {
        const Policy pi = base_stock_policy(m, b);
        double sum = 0.0, sq = 0.0;
        for (int k = 0; k < n; ++k) {
            Rng rng = Rng::stream(13, static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(k));
            const double cost =
                m.total_cost(episode_return(rollout_episode(m.mdp(), pi, rng, ObservationMode::None)));
            sum += cost;
            sq += cost * cost;
        }
        mean[static_cast<std::size_t>(b)] = sum / n;
        const double var = (sq - sum * sum / n) / (n - 1);
        se[static_cast<std::size_t>(b)] = std::sqrt(var / n);
    }
    double worst_z = 1e300;
    for (std::size_t b = 1; b + 1 <= 10; ++b) {
        const double d2 = mean[b - 1] - 2.0 * mean[b] + mean[b + 1];
        const double s = std::sqrt(se[b - 1] * se[b - 1] + 4.0 * se[b] * se[b] + se[b + 1] * se[b + 1]);
        worst_z = std::min(worst_z, d2 / s);
    }
    std::string curve;
    for (double c : mean) curve += fmt(curve.empty() ? "%.1f" : " %.1f", c);
    return {worst_z >= -3.0, fmt("min second difference %.2f standard errors; C(b)=%s", worst_z,
                                 curve.c_str())};
}

struct Criterion {
    int id;
    double limit_seconds;
    Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, 1.0, infection_rank},          {2, 10.0, inventory_rank},
        {3, 600.0, linear_representation}, {4, 600.0, lifting},
        {5, 600.0, dp_oracle},             {6, 600.0, simulation_lemma},
        {7, 60.0, plug_in_concentration},  {8, 300.0, regret_rate},
        {9, 600.0, ucrl_sublinear},        {10, 1800.0, table2_scenario_one},
        {11, 1800.0, scenario_two_ordering}, {12, 10.0, hard_instances},
        {13, 300.0, base_stock_convexity},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const Criterion& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.limit_seconds;
        const bool pass = out.pass && in_time;
        failed += !pass;
        std::printf("CRITERION %2d: %s  %s  [%.2fs, limit %.0fs%s]\n", c.id, pass ? "PASS" : "FAIL",
                    out.detail.c_str(), secs, c.limit_seconds, in_time ? "" : ", TOO SLOW");
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
