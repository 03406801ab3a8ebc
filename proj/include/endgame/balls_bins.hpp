#pragma once

// Balls-into-bins with end-of-horizon flexing.
//
// Internal time t counts balls already placed (0-based). A policy decides,
// before ball t is placed, whether to exert flexibility; a flex ball that is
// flexed goes to the less loaded member of a random pair drawn from its flex
// set, ties to the smaller index.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "endgame/errors.hpp"
#include "endgame/random.hpp"

namespace endgame::bins {

using BinIndex = std::size_t;
using Period = std::int64_t;
using LoadVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

struct ModelParams {
  Period horizon = 1;          // T
  std::size_t bins = 2;        // N
  double flex_prob = 1.0;      // q
  std::size_t flex_set_size = 2;  // r

  /// Throws ContractError unless T >= 1, N >= 2, 0 < q <= 1 and 2 <= r <= N.
  void validate() const;
};

struct Arrival {
  bool is_flex = false;
  BinIndex preferred = 0;
  std::vector<BinIndex> flex_set;  // empty unless is_flex
};

struct LoadState {
  LoadVector loads;
  Period t = 0;

  explicit LoadState(std::size_t bins) : loads(LoadVector::Zero(static_cast<Eigen::Index>(bins))) {}
  void place(BinIndex bin) {
    ++loads[static_cast<Eigen::Index>(bin)];
    ++t;
  }
};

/// Per-replication random streams, one per draw category, all addressed by
/// period so that policies evaluated on the same root see the same arrivals.
struct ReplicationStreams {
  RandomStream flex;
  RandomStream preferred;
  RandomStream flex_set;
  RandomStream pair;
  RandomStream exert;

  explicit ReplicationStreams(const RandomStream& root);
};

/// Draws the arrival for period t into `out` (reuses its storage).
void draw_arrival(const ReplicationStreams& streams, const ModelParams& params, Period t,
                  Arrival& out);
Arrival draw_arrival(const ReplicationStreams& streams, const ModelParams& params, Period t);

/// Max load minus mean load t/N.
double gap(const LoadState& state);

/// Uniformly random unordered pair from `flex_set`; a 2-set is returned as is.
std::pair<BinIndex, BinIndex> choose_flex_pair(const std::vector<BinIndex>& flex_set,
                                               RandomStream& rng);

/// Destination of `arrival`. With `exert` and a flex arrival the less loaded
/// member of a pair from the flex set wins (smaller index on ties); otherwise
/// the preferred bin. Does not mutate `state`.
BinIndex allocate(const LoadState& state, const Arrival& arrival, bool exert, RandomStream& rng);

// ---------------------------------------------------------------------------
// Policies

struct NoFlex {};
struct AlwaysFlex {};
struct Static {
  double a_s;
};
struct Dynamic {
  double a_d;
  bool latched = false;
};
struct FlexSqrtT {
  double a_s;
};

using PolicySpec = std::variant<NoFlex, AlwaysFlex, Static, Dynamic, FlexSqrtT>;

/// Constants from the analysis: a_s = 2 sqrt(6) N (N-1) / q, a_d = 1 / (5 C(N,2)).
double theory_static_constant(const ModelParams& params);
double theory_dynamic_constant(const ModelParams& params);
/// Tuned values used for the numerical experiments.
inline constexpr double kNumericsStaticConstant = 10.0;
inline constexpr double kNumericsDynamicConstant = 0.7;

const char* policy_name(const PolicySpec& policy);

/// T_hat = round(T - a_s sqrt(T ln T)), clamped to [0, T].
Period static_start(Period horizon, double a_s);
inline Period static_start(const ModelParams& params, double a_s) {
  return static_start(params.horizon, a_s);
}

/// gap >= a_d (T - t) q / N, with t = state.t.
bool dynamic_should_flex(const LoadState& state, const ModelParams& params, double a_d);

/// Bernoulli((T - T_hat) / T).
bool flex_sqrt_t_should_flex(RandomStream& rng, Period horizon, Period static_start_period);

/// Stateful per-period exert decision for one simulated horizon.
class ExertRule {
 public:
  ExertRule(const PolicySpec& policy, const ModelParams& params);

  /// Decision before placing the ball of period state.t.
  bool decide(const LoadState& state, const ReplicationStreams& streams);

  std::optional<Period> first_trigger() const { return first_trigger_; }
  Period static_start_period() const { return static_start_; }

 private:
  PolicySpec policy_;
  ModelParams params_;
  Period static_start_ = 0;
  bool latched_on_ = false;
  std::optional<Period> first_trigger_;
};

struct RunRecord {
  double final_gap = 0.0;
  std::int64_t flex_count = 0;
  std::int64_t flex_arrivals = 0;
  LoadVector final_loads;
  std::optional<std::vector<double>> gap_trajectory;  // gap after each placement
  std::optional<Period> first_trigger;

  bool operator==(const RunRecord&) const = default;
};

struct RunOptions {
  bool record_trajectory = false;
};

/// Simulates T periods on streams derived from `root`.
RunRecord run(const PolicySpec& policy, const ModelParams& params, const RandomStream& root,
              const RunOptions& options = {});
RunRecord run(const PolicySpec& policy, const ModelParams& params, std::uint64_t seed,
              const RunOptions& options = {});

/// Same loop, arrivals supplied by the caller (feed(t) -> const Arrival&).
/// Used by exhaustive-enumeration checks and the coupled opaque simulator.
template <class Feed>
RunRecord run_with_feed(const PolicySpec& policy, const ModelParams& params,
                        const ReplicationStreams& streams, Feed&& feed,
                        const RunOptions& options = {}) {
  params.validate();
  LoadState state(params.bins);
  ExertRule rule(policy, params);
  RunRecord record;
  if (options.record_trajectory) {
    record.gap_trajectory.emplace();
    record.gap_trajectory->reserve(static_cast<std::size_t>(params.horizon));
  }
  for (Period t = 0; t < params.horizon; ++t) {
    const Arrival& arrival = feed(t);
    const bool exert = rule.decide(state, streams);
    RandomStream pair_rng = streams.pair.at(static_cast<std::uint64_t>(t));
    const BinIndex bin = allocate(state, arrival, exert, pair_rng);
    if (arrival.is_flex) {
      ++record.flex_arrivals;
      if (exert) ++record.flex_count;
    }
    state.place(bin);
    if (record.gap_trajectory) record.gap_trajectory->push_back(gap(state));
  }
  record.final_gap = gap(state);
  record.final_loads = state.loads;
  record.first_trigger = rule.first_trigger();
  return record;
}

}  // namespace endgame::bins
