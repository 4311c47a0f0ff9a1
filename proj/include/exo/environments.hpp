#pragma once

// Concrete Exo-MDP instances: lost-sales inventory control with lead time,
// a two-state infection/vaccination model, and the hypercube hard instances
// used for regret lower bounds.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "exo/core.hpp"

namespace exo {

/// Demand distribution on {0, ..., d}: Poisson pmf below d, with the tail
/// mass P(D >= d) folded into d.
ProbVec truncated_poisson(double lambda, int d);

// ---------------------------------------------------------------------------
// Inventory control
// ---------------------------------------------------------------------------

enum class CostNormalization { Raw, MaxNormalized };

struct InventoryParams {
    int horizon = 1;
    int lead_time = 0;
    double holding_cost = 1.0;
    double lost_sales_penalty = 1.0;
    int demand_support = 1;  // demand and orders take values in {0, ..., d}
    ProbVec demand_dist;
    CostNormalization cost_normalization = CostNormalization::Raw;
    std::int64_t state_cap = 2'000'000;
};

/// Lost-sales inventory as an Exo-MDP.
///
/// State (I, O_{t-L}, ..., O_{t-1}); action = order O_t in {0..d}; the
/// order placed L stages ago arrives before demand is realized. On-hand
/// inventory is capped at d. Rewards are 1 - cost / c_max so they lie in
/// [0, 1]; costs are recovered with total_cost().
class InventoryModel {
public:
    const ExoMdp& mdp() const { return mdp_; }
    const InventoryParams& params() const { return params_; }

    int lead_time() const { return params_.lead_time; }
    int demand_support() const { return params_.demand_support; }

    /// Largest single-stage raw cost; the reward normalizer.
    double stage_cost_scale() const { return cost_scale_; }

    std::vector<int> decode(int s) const;
    int encode(std::span<const int> components) const;
    int inventory(int s) const;
    /// Sum of the L outstanding orders in state s.
    int pipeline_total(int s) const;

    double raw_cost(int s, int a, int demand) const;

    /// Expected total cost matching an expected total reward, in the units
    /// selected by params().cost_normalization.
    double total_cost(double value) const;
    double total_cost(double value, CostNormalization normalization) const;

    friend InventoryModel make_inventory(const InventoryParams& params);

private:
    InventoryModel(InventoryParams params, ExoMdp mdp, double cost_scale)
        : params_(std::move(params)), mdp_(std::move(mdp)), cost_scale_(cost_scale) {}

    InventoryParams params_;
    ExoMdp mdp_;
    double cost_scale_;
};

/// Throws CapacityError when (d+1)^(L+1) exceeds params.state_cap.
InventoryModel make_inventory(const InventoryParams& params);

/// Preset scenarios "I", "II", "III" (H, L, h, p, d, Poisson rate).
InventoryParams scenario_params(const std::string& name);

/// Four-symbol newsvendor used for regret-rate checks: demand in {0..3},
/// H = 4, unit holding and lost-sales costs, a near-tie between two order
/// levels.
InventoryParams toy_params();

/// (b - I - pipeline)^+ capped at max_order.
int base_stock_action(double level, int inventory, int pipeline_total, int max_order);

/// Deterministic policy ordering up to `level` at every stage.
Policy base_stock_policy(const InventoryModel& model, double level);

// ---------------------------------------------------------------------------
// Infection model
// ---------------------------------------------------------------------------

/// Distribution over xi = (xi0, xi1, xi2) in {0,1}^3, symbol index
/// 4*xi0 + 2*xi1 + xi2, with independent xi0 ~ Bern(P0), xi1 ~ Bern(P1),
/// xi2 ~ Bern(1 - P2).
ProbVec infection_distribution(double p0, double p1, double p2);

/// States {0 = healthy, 1 = infected}, actions {0 = no vaccine, 1 = vaccine}.
/// Reward 1 while healthy, 0 while infected.
ExoMdp make_infection(double p0, double p1, double p2, int horizon);

// ---------------------------------------------------------------------------
// Circle toy
// ---------------------------------------------------------------------------

/// Single-state Exo-MDP with d = 4. Actions 0..3 pay [xi == j]; actions
/// 4.. lie on a circle, g = base + amp (cos t, -cos t, sin t, -sin t) with
/// t = 2 pi i / n_circle. p = 1/4 + (tilt / sqrt 2)(cos phi, -cos phi,
/// sin phi, -sin phi).
struct CircleToyParams {
    int horizon = 5;
    int n_circle = 16;
    double base = 0.85;
    double amp = 0.1;
    double tilt = 0.0175;
    double phi = 0.3;
};

ExoMdp make_circle_toy(const CircleToyParams& params = {});

// ---------------------------------------------------------------------------
// Hard instances
// ---------------------------------------------------------------------------

struct HardInstanceParams {
    int d = 2;         // even
    int episodes = 1;  // K, fixes the perturbation size c
    int horizon = 1;
    /// Sign vectors in {-1, +1}^(d/2): one for the stationary instances,
    /// H/2 for the nonstationary one.
    std::vector<std::vector<int>> z_tilde;

    void validate(std::size_t expected_vectors) const;
};

/// c = (1/10) sqrt(2 / (5K)).
double hard_instance_gap(int episodes);

/// p(Z~) = (1/d + c Z~_1, 1/d - c Z~_1, ...).
ProbVec hard_instance_distribution(std::span<const int> z_tilde, double c);

/// Hypercube action a(Z) = (Z_1, -Z_1, Z_2, -Z_2, ...) for the action index
/// whose bit i set means Z_i = +1.
std::vector<int> hypercube_action(int action_index, int d);
int hypercube_index(std::span<const int> z);

/// Raw rewards r in {-1, 0, 1} are stored as (r + 1) / 2. Converts a total
/// stored value over `stages` stages back to the raw scale.
double raw_value(double stored_value, int stages);

/// H = 1 instance: reward [a]_xi.
ExoMdp make_exo_bandit(const HardInstanceParams& params);

/// Stage 1 plays the Exo-Bandit; the realized reward is latched in the state
/// and repeated at stages 2..H.
ExoMdp make_hard_stationary(const HardInstanceParams& params);

/// Horizon H+1: stage 0 draws an index i in {1..H/2}; at stage i the action
/// plays bandit i, whose raw reward is then paid at each of stages
/// H/2+1..H. Stages up to H/2 pay nothing.
ExoMdp make_hard_nonstationary(const HardInstanceParams& params);

}  // namespace exo
