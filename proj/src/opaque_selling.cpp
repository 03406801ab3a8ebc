#include "endgame/opaque_selling.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "endgame/parallel.hpp"

namespace endgame::opaque {

void InventoryParams::validate() const {
  if (products < 1 || (products < 2 && !allow_single_product)) {
    throw ContractError("product count N must be >= 2");
  }
  if (stock < 1) throw ContractError("initial stock S must be >= 1");
  if (!(order_cost >= 0.0) || !(holding_cost >= 0.0) || !(discount >= 0.0)) {
    throw ContractError("costs K, h and delta must be nonnegative");
  }
  if (products >= 2) as_bins().validate();
}

bins::ModelParams InventoryParams::as_bins() const {
  return bins::ModelParams{horizon(), products, flex_prob, flex_set_size};
}

double inventory_gap(const InventoryState& state, const InventoryParams& params) {
  return static_cast<double>(params.stock - state.stock.minCoeff()) -
         static_cast<double>(state.t) / static_cast<double>(params.products);
}

double static_constant(const InventoryParams& params, Preset preset) {
  if (preset == Preset::Numerics) return bins::kNumericsStaticConstant;
  return bins::theory_static_constant(params.as_bins());
}

double dynamic_constant(const InventoryParams& params, Preset preset) {
  if (preset == Preset::Numerics) return bins::kNumericsDynamicConstant;
  const auto n = static_cast<double>(params.products);
  return 1.0 / (10.0 * n * (n - 1.0) / 2.0);
}

std::vector<bins::PolicySpec> standard_policies(const InventoryParams& params, Preset preset) {
  const double c_s = static_constant(params, preset);
  const double c_d = dynamic_constant(params, preset);
  return {bins::NoFlex{}, bins::AlwaysFlex{}, bins::Static{c_s}, bins::Dynamic{c_d, true},
          bins::FlexSqrtT{c_s}};
}

Period static_cycle_start(const InventoryParams& params, double c_s) {
  return bins::static_start(params.horizon(), c_s);
}

CycleStats run_cycle(const bins::PolicySpec& policy, const InventoryParams& params,
                     const RandomStream& root, std::vector<double>* gap_trajectory) {
  params.validate();
  if (gap_trajectory) gap_trajectory->clear();
  if (params.products == 1) {
    // A single product depletes deterministically; there is nothing to flex.
    if (gap_trajectory) gap_trajectory->assign(static_cast<std::size_t>(params.stock), 0.0);
    return CycleStats{params.stock, 0};
  }

  const bins::ModelParams model = params.as_bins();
  const bins::ReplicationStreams streams(root);
  bins::ExertRule rule(policy, model);
  bins::LoadState sold(params.products);  // units sold per product
  bins::Arrival arrival;
  CycleStats stats;
  while (sold.loads.maxCoeff() < params.stock) {
    const Period t = sold.t;
    bins::draw_arrival(streams, model, t, arrival);
    const bool exert = rule.decide(sold, streams);
    RandomStream pair_rng = streams.pair.at(static_cast<std::uint64_t>(t));
    // Least sold == most remaining, lexicographic ties on both sides.
    const bins::BinIndex product = bins::allocate(sold, arrival, exert, pair_rng);
    if (exert && arrival.is_flex) ++stats.discounts;
    sold.place(product);
    if (gap_trajectory) gap_trajectory->push_back(bins::gap(sold));
  }
  stats.length = sold.t;
  return stats;
}

CostEstimate long_run_cost(std::span<const CycleStats> cycles, const InventoryParams& params) {
  if (cycles.empty()) throw ContractError("long_run_cost needs at least one cycle");
  const auto n = static_cast<Eigen::Index>(cycles.size());
  Eigen::MatrixXd samples(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = static_cast<double>(cycles[static_cast<std::size_t>(i)].length);
    samples(i, 0) = r;
    samples(i, 1) = r * r;
    samples(i, 2) = static_cast<double>(cycles[static_cast<std::size_t>(i)].discounts);
  }
  const Eigen::RowVector3d mean = samples.colwise().mean();
  Eigen::Matrix3d cov_of_mean = Eigen::Matrix3d::Zero();
  if (n > 1) {
    const Eigen::MatrixXd centered = samples.rowwise() - mean;
    cov_of_mean = (centered.transpose() * centered) / static_cast<double>(n - 1) /
                  static_cast<double>(n);
  }

  const double m_r = mean(0), m_r2 = mean(1), m_d = mean(2);
  const double ns = static_cast<double>(params.products) * static_cast<double>(params.stock);
  const double k = params.order_cost, h = params.holding_cost, delta = params.discount;

  CostEstimate est;
  est.cycles = cycles.size();
  est.mean_length = m_r;
  est.mean_length_sq = m_r2;
  est.mean_discounts = m_d;
  est.ordering = k / m_r;
  est.holding = 0.5 * h * (2.0 * ns + 1.0 - m_r2 / m_r);
  est.discount = delta * m_d / m_r;
  est.total = est.ordering + est.holding + est.discount;

  const Eigen::Vector3d g_ordering(-k / (m_r * m_r), 0.0, 0.0);
  const Eigen::Vector3d g_holding(0.5 * h * m_r2 / (m_r * m_r), -0.5 * h / m_r, 0.0);
  const Eigen::Vector3d g_discount(-delta * m_d / (m_r * m_r), 0.0, delta / m_r);
  const auto se = [&](const Eigen::Vector3d& g) {
    return std::sqrt(std::max(0.0, g.dot(cov_of_mean * g)));
  };
  est.se_ordering = se(g_ordering);
  est.se_holding = se(g_holding);
  est.se_discount = se(g_discount);
  est.se_total = se(g_ordering + g_holding + g_discount);
  return est;
}

double lower_bound(const InventoryParams& params) {
  const auto n = static_cast<double>(params.products);
  const auto s = static_cast<double>(params.stock);
  return params.order_cost / (n * (s - 1.0) + 1.0) + 0.5 * params.holding_cost * (n * s + n);
}

Regime parse_regime(const std::string& name) {
  if (name == "delta_zero") return Regime::DeltaZero;
  if (name == "delta_inv_sqrt") return Regime::DeltaInvSqrt;
  if (name == "delta_const") return Regime::DeltaConst;
  if (name == "delta_sqrt") return Regime::DeltaSqrt;
  throw std::invalid_argument("unknown regime '" + name +
                              "' (expected delta_zero|delta_inv_sqrt|delta_const|delta_sqrt)");
}

const char* regime_name(Regime regime) {
  switch (regime) {
    case Regime::DeltaZero: return "delta_zero";
    case Regime::DeltaInvSqrt: return "delta_inv_sqrt";
    case Regime::DeltaConst: return "delta_const";
    case Regime::DeltaSqrt: return "delta_sqrt";
  }
  return "?";
}

InventoryParams regime_params(Regime regime, std::int64_t stock, const InventoryParams& base) {
  InventoryParams p = base;
  p.stock = stock;
  const double ns = static_cast<double>(p.products) * static_cast<double>(stock);
  p.order_cost = ns / 2.0;
  p.holding_cost = 1.0 / ns;
  switch (regime) {
    case Regime::DeltaZero: p.discount = 0.0; break;
    case Regime::DeltaInvSqrt: p.discount = 10.0 / std::sqrt(ns); break;
    case Regime::DeltaConst: p.discount = 0.5; break;
    case Regime::DeltaSqrt: p.discount = 0.006 * std::sqrt(ns); break;
  }
  return p;
}

std::vector<std::vector<CycleStats>> simulate_cell(const bins::PolicySpec& policy,
                                                   const InventoryParams& params,
                                                   const SweepOptions& options) {
  const std::string coords = "opaque;N=" + std::to_string(params.products) +
                             ";S=" + std::to_string(params.stock) +
                             ";q=" + std::to_string(params.flex_prob) +
                             ";r=" + std::to_string(params.flex_set_size);
  const std::size_t total = options.instances * options.cycles_per_instance;
  std::vector<CycleStats> flat(total);
  parallel_for(total, options.parallel, [&](std::size_t i) {
    flat[i] = run_cycle(policy, params, RandomStream(derive_seed(options.seed, coords, i)));
  });
  std::vector<std::vector<CycleStats>> out(options.instances);
  for (std::size_t i = 0; i < options.instances; ++i) {
    out[i].assign(flat.begin() + static_cast<std::ptrdiff_t>(i * options.cycles_per_instance),
                  flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * options.cycles_per_instance));
  }
  return out;
}

std::vector<SweepRow> regime_sweep(Regime regime, std::span<const std::int64_t> stock_grid,
                                   const InventoryParams& base, const SweepOptions& options) {
  std::vector<SweepRow> rows;
  for (const std::int64_t s : stock_grid) {
    const InventoryParams params = regime_params(regime, s, base);
    const double c_star = lower_bound(params);
    const double total_stock = static_cast<double>(params.products) * static_cast<double>(s);
    for (const auto& policy : standard_policies(params, options.preset)) {
      const auto cell = simulate_cell(policy, params, options);
      SweepRow row;
      row.regime = regime;
      row.stock = s;
      row.policy = bins::policy_name(policy);
      row.lower_bound = c_star;
      Eigen::VectorXd losses(static_cast<Eigen::Index>(cell.size()));
      double length_sum = 0.0, discount_sum = 0.0, cost_sum = 0.0;
      for (std::size_t i = 0; i < cell.size(); ++i) {
        const CostEstimate est = long_run_cost(cell[i], params);
        losses[static_cast<Eigen::Index>(i)] = est.total - c_star;
        length_sum += est.mean_length;
        discount_sum += est.mean_discounts;
        cost_sum += est.total;
        row.instances.push_back(est);
      }
      const auto m = static_cast<double>(cell.size());
      row.mean_cost = cost_sum / m;
      row.mean_loss = losses.mean();
      row.se_loss = cell.size() > 1
                        ? std::sqrt((losses.array() - row.mean_loss).square().sum() / (m - 1.0) / m)
                        : 0.0;
      row.mean_length = length_sum / m;
      row.balancedness = total_stock - row.mean_length;
      row.mean_discounts = discount_sum / m;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace endgame::opaque
