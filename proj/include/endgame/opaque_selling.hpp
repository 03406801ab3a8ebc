#pragma once

// Opaque selling with joint replenishment.
//
// Each product starts a cycle with S units. A sale depletes one unit; an
// exercised opaque sale takes the flex-pair member with the most remaining
// stock. The cycle ends in the period some product hits zero, after which
// everything is restocked at cost K. Purchases map one-to-one onto balls, so
// the cycle is simulated on the balls-into-bins kernel with loads = S - stock.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "endgame/balls_bins.hpp"

namespace endgame::opaque {

using bins::Period;

struct InventoryParams {
  std::size_t products = 5;  // N
  std::int64_t stock = 10;   // S
  double flex_prob = 0.1;    // q
  std::size_t flex_set_size = 2;
  double order_cost = 1.0;    // K
  double holding_cost = 1.0;  // h
  double discount = 0.0;      // delta
  /// N = 1 is only meaningful as a closed-form check.
  bool allow_single_product = false;

  void validate() const;
  /// T = N (S - 1) + 1, the longest possible cycle.
  Period horizon() const { return static_cast<Period>(products) * (stock - 1) + 1; }
  /// Balls-into-bins view used to drive policies.
  bins::ModelParams as_bins() const;
};

struct InventoryState {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> stock;
  Period t = 0;
};

struct CycleStats {
  Period length = 0;          // R
  std::int64_t discounts = 0;  // D
  bool operator==(const CycleStats&) const = default;
};

struct CostEstimate {
  double total = 0.0;
  double ordering = 0.0;
  double holding = 0.0;
  double discount = 0.0;
  double se_total = 0.0;
  double se_ordering = 0.0;
  double se_holding = 0.0;
  double se_discount = 0.0;
  double mean_length = 0.0;
  double mean_length_sq = 0.0;
  double mean_discounts = 0.0;
  std::size_t cycles = 0;
};

/// S - min stock - t/N.
double inventory_gap(const InventoryState& state, const InventoryParams& params);

/// Named constant sets. "theory" uses the analysis constants (latched dynamic
/// with c_d = 1/(10 C(N,2)), c_s = 2 sqrt(6) N (N-1)/q); "numerics" the tuned
/// a_s = 10, a_d = 0.7.
enum class Preset { Theory, Numerics };
double static_constant(const InventoryParams& params, Preset preset);
double dynamic_constant(const InventoryParams& params, Preset preset);

/// The five benchmarked policies, dynamic latched.
std::vector<bins::PolicySpec> standard_policies(const InventoryParams& params, Preset preset);

/// Period in which the static policy starts offering the opaque option.
Period static_cycle_start(const InventoryParams& params, double c_s);

/// Simulates one replenishment cycle on streams derived from `root`.
/// `gap_trajectory`, when given, receives the inventory gap after each sale.
CycleStats run_cycle(const bins::PolicySpec& policy, const InventoryParams& params,
                     const RandomStream& root, std::vector<double>* gap_trajectory = nullptr);

/// Renewal-reward long-run average cost from sample moments of (R, R^2, D),
/// with delta-method standard errors.
CostEstimate long_run_cost(std::span<const CycleStats> cycles, const InventoryParams& params);

/// C* = K / (N(S-1)+1) + h/2 (NS + N).
double lower_bound(const InventoryParams& params);

enum class Regime { DeltaZero, DeltaInvSqrt, DeltaConst, DeltaSqrt };
Regime parse_regime(const std::string& name);
const char* regime_name(Regime regime);
/// K = NS/2, h = 1/(NS), delta by regime.
InventoryParams regime_params(Regime regime, std::int64_t stock, const InventoryParams& base);

struct SweepOptions {
  std::size_t instances = 10;
  std::size_t cycles_per_instance = 10;
  std::uint64_t seed = 1;
  Preset preset = Preset::Numerics;
  std::size_t parallel = 1;
};

struct SweepRow {
  Regime regime{};
  std::int64_t stock = 0;
  std::string policy;
  double lower_bound = 0.0;
  double mean_cost = 0.0;
  double mean_loss = 0.0;  // C - C*
  double se_loss = 0.0;    // across instances
  double mean_length = 0.0;
  double balancedness = 0.0;  // NS - E[R]
  double mean_discounts = 0.0;
  std::vector<CostEstimate> instances;
};

/// Runs every standard policy at every S for the given regime.
std::vector<SweepRow> regime_sweep(Regime regime, std::span<const std::int64_t> stock_grid,
                                   const InventoryParams& base, const SweepOptions& options);

/// Cycles for one (policy, S) cell: instance i, cycle c uses
/// derive_seed(seed, "opaque;S=..", i * cycles + c). Cycles do not depend on
/// K, h or delta, so every regime reuses the same draws.
std::vector<std::vector<CycleStats>> simulate_cell(const bins::PolicySpec& policy,
                                                   const InventoryParams& params,
                                                   const SweepOptions& options);

}  // namespace endgame::opaque
