#include "exo/environments.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace exo {

ProbVec truncated_poisson(double lambda, int d) {
    if (!(lambda >= 0.0) || d < 0) {
        throw ContractError("truncated_poisson: need lambda >= 0 and d >= 0");
    }
    std::vector<double> p(static_cast<std::size_t>(d) + 1, 0.0);
    if (lambda == 0.0) {
        p[0] = 1.0;
        return ProbVec(std::move(p));
    }
    double below = 0.0;
    for (int j = 0; j < d; ++j) {
        p[static_cast<std::size_t>(j)] =
            std::exp(-lambda + j * std::log(lambda) - std::lgamma(j + 1.0));
        below += p[static_cast<std::size_t>(j)];
    }
    p[static_cast<std::size_t>(d)] = std::max(0.0, 1.0 - below);
    return ProbVec(std::move(p));
}

// ---------------------------------------------------------------------------
// Inventory
// ---------------------------------------------------------------------------

namespace {

std::vector<int> decode_state(int s, int base, int lead_time) {
    std::vector<int> comp(static_cast<std::size_t>(lead_time) + 1);
    for (int k = lead_time; k >= 0; --k) {
        comp[static_cast<std::size_t>(k)] = s % base;
        s /= base;
    }
    return comp;
}

int encode_state(std::span<const int> components, int base) {
    int s = 0;
    for (int c : components) s = s * base + c;
    return s;
}

}  // namespace

std::vector<int> InventoryModel::decode(int s) const {
    return decode_state(s, params_.demand_support + 1, params_.lead_time);
}

int InventoryModel::encode(std::span<const int> components) const {
    return encode_state(components, params_.demand_support + 1);
}

int InventoryModel::inventory(int s) const { return decode(s).front(); }

int InventoryModel::pipeline_total(int s) const {
    auto comp = decode(s);
    int total = 0;
    for (std::size_t k = 1; k < comp.size(); ++k) total += comp[k];
    return total;
}

namespace {

// On-hand stock available to meet demand at this stage.
int on_hand(const std::vector<int>& comp, int order, int lead_time) {
    return comp[0] + (lead_time > 0 ? comp[1] : order);
}

double stage_cost(const InventoryParams& p, int stock, int demand) {
    return p.holding_cost * std::max(stock - demand, 0) +
           p.lost_sales_penalty * std::max(demand - stock, 0);
}

}  // namespace

double InventoryModel::raw_cost(int s, int a, int demand) const {
    return stage_cost(params_, on_hand(decode(s), a, params_.lead_time), demand);
}

double InventoryModel::total_cost(double value) const {
    return total_cost(value, params_.cost_normalization);
}

double InventoryModel::total_cost(double value, CostNormalization normalization) const {
    const double normalized = static_cast<double>(params_.horizon) - value;
    return normalization == CostNormalization::Raw ? cost_scale_ * normalized : normalized;
}

InventoryModel make_inventory(const InventoryParams& params) {
    const int d = params.demand_support;
    const int L = params.lead_time;
    if (d < 0 || L < 0 || params.horizon <= 0) {
        throw ContractError("make_inventory: need d >= 0, L >= 0, H > 0");
    }
    if (params.holding_cost < 0.0 || params.lost_sales_penalty < 0.0) {
        throw ContractError("make_inventory: costs must be non-negative");
    }
    if (params.demand_dist.size() != d + 1) {
        throw ContractError("make_inventory: demand distribution must cover {0..d}");
    }
    const double states = std::pow(static_cast<double>(d + 1), L + 1);
    if (states > static_cast<double>(params.state_cap)) {
        std::ostringstream os;
        os << "make_inventory: " << states << " endogenous states exceed the cap of "
           << params.state_cap;
        throw CapacityError(os.str(), states);
    }
    const int S = static_cast<int>(states);
    const int A = d + 1;
    const int X = d + 1;

    ExoMdpTables t;
    t.n_states = S;
    t.n_actions = A;
    t.n_exo = X;
    t.horizon = params.horizon;
    t.start_state = 0;
    const std::size_t cells = static_cast<std::size_t>(S) * A * X;
    t.next.resize(cells);
    t.reward.resize(cells);
    t.observation.resize(cells);
    std::vector<double> cost(cells);

    std::vector<int> succ(static_cast<std::size_t>(L) + 1);
    double cost_scale = 0.0;
    for (int s = 0; s < S; ++s) {
        const std::vector<int> comp = decode_state(s, d + 1, L);
        for (int a = 0; a < A; ++a) {
            const int stock = on_hand(comp, a, L);
            for (int D = 0; D < X; ++D) {
                const std::size_t cell = (static_cast<std::size_t>(s) * A + a) * X + D;
                succ[0] = std::min(std::max(stock - D, 0), d);
                for (int k = 1; k < L; ++k) succ[static_cast<std::size_t>(k)] = comp[static_cast<std::size_t>(k) + 1];
                if (L > 0) succ[static_cast<std::size_t>(L)] = a;
                t.next[cell] = encode_state(succ, d + 1);
                t.observation[cell] = std::min(stock, D);
                cost[cell] = stage_cost(params, stock, D);
                cost_scale = std::max(cost_scale, cost[cell]);
            }
        }
    }
    if (cost_scale <= 0.0) cost_scale = 1.0;
    for (std::size_t c = 0; c < cells; ++c) {
        t.reward[c] = std::clamp(1.0 - cost[c] / cost_scale, 0.0, 1.0);
    }
    t.exo_dist = {params.demand_dist};
    return InventoryModel(params, ExoMdp(std::move(t)), cost_scale);
}

InventoryParams scenario_params(const std::string& name) {
    InventoryParams p;
    double rate = 0.0;
    if (name == "I" || name == "1" || name == "scenario_1") {
        p.horizon = 25;
        p.lead_time = 2;
        p.holding_cost = 6.0;
        p.lost_sales_penalty = 1.0;
        p.demand_support = 8;
        rate = 3.0;
    } else if (name == "II" || name == "2" || name == "scenario_2") {
        p.horizon = 20;
        p.lead_time = 0;
        p.holding_cost = 6.0;
        p.lost_sales_penalty = 4.0;
        p.demand_support = 10;
        rate = 7.0;
    } else if (name == "III" || name == "3" || name == "scenario_3") {
        p.horizon = 20;
        p.lead_time = 0;
        p.holding_cost = 8.0;
        p.lost_sales_penalty = 3.0;
        p.demand_support = 25;
        rate = 7.0;
    } else {
        throw ContractError("unknown inventory scenario '" + name + "'");
    }
    p.demand_dist = truncated_poisson(rate, p.demand_support);
    return p;
}

InventoryParams toy_params() {
    InventoryParams p;
    p.horizon = 4;
    p.lead_time = 0;
    p.holding_cost = 1.0;
    p.lost_sales_penalty = 1.0;
    p.demand_support = 3;
    p.demand_dist = ProbVec({0.2, 0.3125, 0.2875, 0.2});
    return p;
}

int base_stock_action(double level, int inventory, int pipeline_total, int max_order) {
    if (level < 0.0) throw ContractError("base_stock_action: level must be non-negative");
    const double gap = level - inventory - pipeline_total;
    if (gap <= 0.0) return 0;
    return std::min(static_cast<int>(std::floor(gap + 1e-9)), max_order);
}

Policy base_stock_policy(const InventoryModel& model, double level) {
    const ExoMdp& mdp = model.mdp();
    Policy policy = Policy::constant(mdp.horizon(), mdp.n_states(), 0);
    for (int s = 0; s < mdp.n_states(); ++s) {
        const int a = base_stock_action(level, model.inventory(s), model.pipeline_total(s),
                                        model.demand_support());
        for (int t = 0; t < mdp.horizon(); ++t) policy.set_action(t, s, a);
    }
    return policy;
}

// ---------------------------------------------------------------------------
// Infection
// ---------------------------------------------------------------------------

ProbVec infection_distribution(double p0, double p1, double p2) {
    for (double p : {p0, p1, p2}) {
        if (!(p >= 0.0 && p <= 1.0)) throw ContractError("infection: probabilities must be in [0,1]");
    }
    const double q[3] = {p0, p1, 1.0 - p2};
    std::vector<double> probs(8);
    for (int j = 0; j < 8; ++j) {
        double w = 1.0;
        for (int bit = 0; bit < 3; ++bit) {
            const bool one = (j >> (2 - bit)) & 1;
            w *= one ? q[bit] : 1.0 - q[bit];
        }
        probs[static_cast<std::size_t>(j)] = w;
    }
    return ProbVec(std::move(probs));
}

ExoMdp make_infection(double p0, double p1, double p2, int horizon) {
    ExoMdpTables t;
    t.n_states = 2;
    t.n_actions = 2;
    t.n_exo = 8;
    t.horizon = horizon;
    t.start_state = 0;
    t.next.resize(32);
    t.reward.resize(32);
    for (int s = 0; s < 2; ++s) {
        for (int a = 0; a < 2; ++a) {
            // Which coordinate of xi decides the next state.
            const int coord = s == 0 ? a : 2;
            for (int j = 0; j < 8; ++j) {
                const std::size_t cell = static_cast<std::size_t>((s * 2 + a) * 8 + j);
                t.next[cell] = (j >> (2 - coord)) & 1;
                t.reward[cell] = s == 0 ? 1.0 : 0.0;
            }
        }
    }
    t.exo_dist = {infection_distribution(p0, p1, p2)};
    return ExoMdp(std::move(t));
}

// ---------------------------------------------------------------------------
// Hard instances
// ---------------------------------------------------------------------------

void HardInstanceParams::validate(std::size_t expected_vectors) const {
    if (d <= 0 || d % 2 != 0) throw ContractError("hard instance: d must be positive and even");
    if (episodes <= 0 || 10.0 * episodes < static_cast<double>(d) * d) {
        throw ContractError("hard instance: need K >= d^2 / 10");
    }
    if (horizon <= 0) throw ContractError("hard instance: horizon must be positive");
    if (z_tilde.size() != expected_vectors) {
        throw ContractError("hard instance: wrong number of sign vectors");
    }
    for (const auto& z : z_tilde) {
        if (z.size() != static_cast<std::size_t>(d / 2)) {
            throw ContractError("hard instance: sign vectors must have d/2 entries");
        }
        for (int v : z) {
            if (v != 1 && v != -1) throw ContractError("hard instance: signs must be +1 or -1");
        }
    }
}

double hard_instance_gap(int episodes) { return 0.1 * std::sqrt(2.0 / (5.0 * episodes)); }

ProbVec hard_instance_distribution(std::span<const int> z_tilde, double c) {
    const int d = static_cast<int>(z_tilde.size()) * 2;
    std::vector<double> p(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < z_tilde.size(); ++i) {
        p[2 * i] = 1.0 / d + c * z_tilde[i];
        p[2 * i + 1] = 1.0 / d - c * z_tilde[i];
    }
    return ProbVec(std::move(p));
}

std::vector<int> hypercube_action(int action_index, int d) {
    std::vector<int> a(static_cast<std::size_t>(d));
    for (int i = 0; i < d / 2; ++i) {
        const int z = ((action_index >> i) & 1) ? 1 : -1;
        a[static_cast<std::size_t>(2 * i)] = z;
        a[static_cast<std::size_t>(2 * i + 1)] = -z;
    }
    return a;
}

int hypercube_index(std::span<const int> z) {
    int idx = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] > 0) idx |= 1 << i;
    }
    return idx;
}

double raw_value(double stored_value, int stages) { return 2.0 * stored_value - stages; }

namespace {

double stored_reward(int raw) { return (raw + 1) / 2.0; }

int hypercube_actions(int d) {
    if (d / 2 > 20) throw ContractError("hard instance: d too large for an explicit action set");
    return 1 << (d / 2);
}

}  // namespace

ExoMdp make_circle_toy(const CircleToyParams& params) {
    if (params.n_circle < 1 || params.horizon < 1) {
        throw ContractError("circle toy needs n_circle >= 1 and horizon >= 1");
    }
    const double k = params.tilt / std::sqrt(2.0);
    const double cp = std::cos(params.phi);
    const double sp = std::sin(params.phi);
    ProbVec p(std::vector<double>{0.25 + k * cp, 0.25 - k * cp, 0.25 + k * sp, 0.25 - k * sp});
    ExoMdpTables t;
    t.n_states = 1;
    t.n_actions = 4 + params.n_circle;
    t.n_exo = 4;
    t.horizon = params.horizon;
    t.start_state = 0;
    t.next.assign(static_cast<std::size_t>(t.n_actions * 4), 0);
    t.reward.reserve(static_cast<std::size_t>(t.n_actions * 4));
    for (int a = 0; a < 4; ++a) {
        for (int j = 0; j < 4; ++j) t.reward.push_back(a == j ? 1.0 : 0.0);
    }
    const double pi = std::acos(-1.0);
    for (int i = 0; i < params.n_circle; ++i) {
        const double th = 2.0 * pi * i / params.n_circle;
        const double c = params.amp * std::cos(th);
        const double s = params.amp * std::sin(th);
        for (double g : {params.base + c, params.base - c, params.base + s, params.base - s}) {
            if (g < 0.0 || g > 1.0) throw ContractError("circle toy reward outside [0, 1]");
            t.reward.push_back(g);
        }
    }
    t.exo_dist = {std::move(p)};
    return ExoMdp(std::move(t));
}

ExoMdp make_exo_bandit(const HardInstanceParams& params) {
    HardInstanceParams p = params;
    p.horizon = 1;
    return make_hard_stationary(p);
}

ExoMdp make_hard_stationary(const HardInstanceParams& params) {
    params.validate(1);
    const int d = params.d;
    const int H = params.horizon;
    const int A = hypercube_actions(d);
    const double c = hard_instance_gap(params.episodes);
    // State 0 is s_1; state 1 + 2(h-2) + (r > 0) is (h, r) for h = 2..H.
    const int S = 1 + 2 * (H - 1);
    auto latched = [](int h, int r) { return 1 + 2 * (h - 2) + (r > 0 ? 1 : 0); };

    ExoMdpTables t;
    t.n_states = S;
    t.n_actions = A;
    t.n_exo = d;
    t.horizon = H;
    t.start_state = 0;
    t.next.resize(static_cast<std::size_t>(S) * A * d);
    t.reward.resize(t.next.size());
    for (int a = 0; a < A; ++a) {
        const std::vector<int> av = hypercube_action(a, d);
        for (int j = 0; j < d; ++j) {
            const int r = av[static_cast<std::size_t>(j)];
            const std::size_t cell = static_cast<std::size_t>(a) * d + j;
            t.next[cell] = H >= 2 ? latched(2, r) : 0;
            t.reward[cell] = stored_reward(r);
        }
    }
    for (int h = 2; h <= H; ++h) {
        for (int r : {-1, 1}) {
            const int s = latched(h, r);
            const int s_next = latched(std::min(h + 1, H), r);
            for (int a = 0; a < A; ++a) {
                for (int j = 0; j < d; ++j) {
                    const std::size_t cell = (static_cast<std::size_t>(s) * A + a) * d + j;
                    t.next[cell] = s_next;
                    t.reward[cell] = stored_reward(r);
                }
            }
        }
    }
    t.exo_dist = {hard_instance_distribution(params.z_tilde.front(), c)};
    return ExoMdp(std::move(t));
}

ExoMdp make_hard_nonstationary(const HardInstanceParams& params) {
    const int H = params.horizon;
    if (H <= 0 || H % 2 != 0) throw ContractError("hard nonstationary: H must be even");
    const int half = H / 2;
    params.validate(static_cast<std::size_t>(half));
    const int d = params.d;
    if (d <= half) throw ContractError("hard nonstationary: need d > H/2");
    const int A = hypercube_actions(d);
    const double c = hard_instance_gap(params.episodes);

    // rc: 0 = no reward latched yet, 1 = -1, 2 = +1.
    auto state = [half](int h, int i, int rc) { return 1 + ((h - 1) * half + (i - 1)) * 3 + rc; };
    auto code = [](int r) { return r > 0 ? 2 : 1; };
    auto raw_of = [](int rc) { return rc == 0 ? 0 : (rc == 2 ? 1 : -1); };
    const int S = 1 + H * half * 3;

    ExoMdpTables t;
    t.n_states = S;
    t.n_actions = A;
    t.n_exo = d;
    t.horizon = H + 1;
    t.start_state = 0;
    t.next.resize(static_cast<std::size_t>(S) * A * d);
    t.reward.resize(t.next.size());
    auto cell = [A, d](int s, int a, int j) {
        return (static_cast<std::size_t>(s) * A + a) * d + j;
    };
    for (int a = 0; a < A; ++a) {
        for (int j = 0; j < d; ++j) {
            t.next[cell(0, a, j)] = state(1, j < half ? j + 1 : 1, 0);
            t.reward[cell(0, a, j)] = stored_reward(0);
        }
    }
    for (int h = 1; h <= H; ++h) {
        const int hn = std::min(h + 1, H);
        for (int i = 1; i <= half; ++i) {
            for (int rc = 0; rc < 3; ++rc) {
                const int s = state(h, i, rc);
                const int raw = h > half ? raw_of(rc) : 0;
                for (int a = 0; a < A; ++a) {
                    const std::vector<int> av = hypercube_action(a, d);
                    for (int j = 0; j < d; ++j) {
                        int next_rc = rc;
                        if (rc == 0 && h == i) next_rc = code(av[static_cast<std::size_t>(j)]);
                        t.next[cell(s, a, j)] = state(hn, i, next_rc);
                        t.reward[cell(s, a, j)] = stored_reward(raw);
                    }
                }
            }
        }
    }
    std::vector<double> draw(static_cast<std::size_t>(d), 0.0);
    for (int j = 0; j < half; ++j) draw[static_cast<std::size_t>(j)] = 1.0 / half;
    t.exo_dist.reserve(static_cast<std::size_t>(H) + 1);
    t.exo_dist.push_back(ProbVec(std::move(draw)));
    for (int h = 1; h <= H; ++h) {
        t.exo_dist.push_back(h <= half
                                 ? hard_instance_distribution(
                                       params.z_tilde[static_cast<std::size_t>(h - 1)], c)
                                 : ProbVec::uniform(d));
    }
    return ExoMdp(std::move(t));
}

}  // namespace exo
