#include "endgame/balls_bins.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

namespace endgame::bins {

void ModelParams::validate() const {
  if (horizon < 1) throw ContractError("horizon T must be >= 1");
  if (bins < 2) throw ContractError("bin count N must be >= 2");
  if (!(flex_prob > 0.0 && flex_prob <= 1.0)) throw ContractError("flex probability q must lie in (0, 1]");
  if (flex_set_size < 2 || flex_set_size > bins) {
    throw ContractError("flex set size r must lie in [2, N], got " + std::to_string(flex_set_size));
  }
}

ReplicationStreams::ReplicationStreams(const RandomStream& root)
    : flex(root.split("flex")),
      preferred(root.split("preferred")),
      flex_set(root.split("flex_set")),
      pair(root.split("pair")),
      exert(root.split("exert")) {}

void draw_arrival(const ReplicationStreams& streams, const ModelParams& params, Period t,
                  Arrival& out) {
  const auto index = static_cast<std::uint64_t>(t);
  RandomStream flex_rng = streams.flex.at(index);
  RandomStream preferred_rng = streams.preferred.at(index);
  out.is_flex = flex_rng.bernoulli(params.flex_prob);
  out.preferred = preferred_rng.below(params.bins);
  out.flex_set.clear();
  if (!out.is_flex) return;

  // Floyd's sampling: uniform r-subset of [0, N).
  RandomStream set_rng = streams.flex_set.at(index);
  const std::size_t n = params.bins;
  const std::size_t r = params.flex_set_size;
  for (std::size_t j = n - r; j < n; ++j) {
    const auto pick = static_cast<BinIndex>(set_rng.below(j + 1));
    if (std::find(out.flex_set.begin(), out.flex_set.end(), pick) == out.flex_set.end()) {
      out.flex_set.push_back(pick);
    } else {
      out.flex_set.push_back(j);
    }
  }
  std::sort(out.flex_set.begin(), out.flex_set.end());
}

Arrival draw_arrival(const ReplicationStreams& streams, const ModelParams& params, Period t) {
  Arrival out;
  draw_arrival(streams, params, t, out);
  return out;
}

double gap(const LoadState& state) {
  const auto n = static_cast<double>(state.loads.size());
  return static_cast<double>(state.loads.maxCoeff()) - static_cast<double>(state.t) / n;
}

std::pair<BinIndex, BinIndex> choose_flex_pair(const std::vector<BinIndex>& flex_set,
                                               RandomStream& rng) {
  const std::size_t size = flex_set.size();
  if (size < 2) throw ContractError("choose_flex_pair needs a flex set of size >= 2");
  if (size == 2) return {flex_set[0], flex_set[1]};
  const std::size_t first = rng.below(size);
  std::size_t second = rng.below(size - 1);
  if (second >= first) ++second;
  return {flex_set[first], flex_set[second]};
}

BinIndex allocate(const LoadState& state, const Arrival& arrival, bool exert, RandomStream& rng) {
  if (!exert || !arrival.is_flex) return arrival.preferred;
  const auto [a, b] = choose_flex_pair(arrival.flex_set, rng);
  const auto load_a = state.loads[static_cast<Eigen::Index>(a)];
  const auto load_b = state.loads[static_cast<Eigen::Index>(b)];
  BinIndex chosen;
  if (load_a != load_b) {
    chosen = load_a < load_b ? a : b;
  } else {
    chosen = std::min(a, b);
  }
  assert(state.loads[static_cast<Eigen::Index>(chosen)] <= std::min(load_a, load_b));
  return chosen;
}

double theory_static_constant(const ModelParams& params) {
  const auto n = static_cast<double>(params.bins);
  return 2.0 * std::sqrt(6.0) * n * (n - 1.0) / params.flex_prob;
}

double theory_dynamic_constant(const ModelParams& params) {
  const auto n = static_cast<double>(params.bins);
  return 1.0 / (5.0 * n * (n - 1.0) / 2.0);
}

const char* policy_name(const PolicySpec& policy) {
  struct Visitor {
    const char* operator()(const NoFlex&) const { return "no_flex"; }
    const char* operator()(const AlwaysFlex&) const { return "always_flex"; }
    const char* operator()(const Static&) const { return "static"; }
    const char* operator()(const Dynamic&) const { return "dynamic"; }
    const char* operator()(const FlexSqrtT&) const { return "flex_sqrt_t"; }
  };
  return std::visit(Visitor{}, policy);
}

Period static_start(Period horizon, double a_s) {
  if (horizon < 2) return 0;
  const auto t = static_cast<double>(horizon);
  const double raw = std::round(t - a_s * std::sqrt(t * std::log(t)));
  return static_cast<Period>(std::clamp(raw, 0.0, t));
}

bool dynamic_should_flex(const LoadState& state, const ModelParams& params, double a_d) {
  const double remaining = static_cast<double>(params.horizon - state.t);
  const double threshold = a_d * remaining * params.flex_prob / static_cast<double>(params.bins);
  return gap(state) >= threshold;
}

bool flex_sqrt_t_should_flex(RandomStream& rng, Period horizon, Period static_start_period) {
  const double p = static_cast<double>(horizon - static_start_period) / static_cast<double>(horizon);
  return rng.bernoulli(p);
}

ExertRule::ExertRule(const PolicySpec& policy, const ModelParams& params)
    : policy_(policy), params_(params) {
  if (const auto* s = std::get_if<Static>(&policy_)) {
    if (!(s->a_s >= 0.0)) throw ContractError("static constant a_s must be nonnegative");
    static_start_ = static_start(params_, s->a_s);
  } else if (const auto* f = std::get_if<FlexSqrtT>(&policy_)) {
    if (!(f->a_s >= 0.0)) throw ContractError("flex-sqrt-T constant a_s must be nonnegative");
    static_start_ = static_start(params_, f->a_s);
  } else if (const auto* d = std::get_if<Dynamic>(&policy_)) {
    if (!(d->a_d > 0.0)) throw ContractError("dynamic constant a_d must be positive");
  }
}

bool ExertRule::decide(const LoadState& state, const ReplicationStreams& streams) {
  bool exert = false;
  if (std::holds_alternative<AlwaysFlex>(policy_)) {
    exert = true;
  } else if (std::holds_alternative<Static>(policy_)) {
    exert = state.t >= static_start_;
  } else if (const auto* d = std::get_if<Dynamic>(&policy_)) {
    if (d->latched && latched_on_) {
      exert = true;
    } else {
      exert = dynamic_should_flex(state, params_, d->a_d);
      if (exert && d->latched) latched_on_ = true;
    }
  } else if (std::holds_alternative<FlexSqrtT>(policy_)) {
    RandomStream rng = streams.exert.at(static_cast<std::uint64_t>(state.t));
    exert = flex_sqrt_t_should_flex(rng, params_.horizon, static_start_);
  }
  if (exert && !first_trigger_) first_trigger_ = state.t;
  return exert;
}

RunRecord run(const PolicySpec& policy, const ModelParams& params, const RandomStream& root,
              const RunOptions& options) {
  const ReplicationStreams streams(root);
  Arrival scratch;
  return run_with_feed(
      policy, params, streams,
      [&](Period t) -> const Arrival& {
        draw_arrival(streams, params, t, scratch);
        return scratch;
      },
      options);
}

RunRecord run(const PolicySpec& policy, const ModelParams& params, std::uint64_t seed,
              const RunOptions& options) {
  return run(policy, params, RandomStream(seed), options);
}

}  // namespace endgame::bins
