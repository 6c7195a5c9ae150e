#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "aoipg/channel.hpp"
#include "aoipg/cost.hpp"

namespace aoipg {

/// Wait strategy on a Gilbert-Elliot channel with one wait per channel state.
/// y0 == y1 is allowed (a deterministic channel).
struct GeWaitProblem {
  double p = 0.0;
  double q = 0.0;
  double y0 = 0.0;
  double y1 = 1.0;
  double z_max = 1.0;
  CostModel cost;
  // Used only when p + q == 0 (reducible chain).
  int initial_state = 0;
};

struct GeWaitSolution {
  double z0 = 0.0;
  double z1 = 0.0;
  double beta = 0.0;
};

void validate(const GeWaitProblem& prob);

/// Stationary weights of the two-state chain.
std::array<double, 2> ge_stationary(double p, double q, int initial_state = 0);

/// Exact renewal-reward average cost of the policy Z(y0) = z0, Z(y1) = z1.
double ge_wait_average_cost(const GeWaitProblem& prob, double z0, double z1);

/// Grid search on [0, z_max]^2 at 1e-3 z_max, then coordinate refinement to 1e-6.
GeWaitSolution ge_wait_optimize(const GeWaitProblem& prob);

struct GeDiscardProblem {
  double p = 0.0;
  double q = 0.0;
  double y0 = 0.0;
  double y1 = 1.0;
  double x_min = 0.0;
  double x_max = 1.0;
  CostModel cost;
  std::uint64_t attempts = 10'000'000;
  std::uint64_t seed = 1;
};

struct GeDiscardSolution {
  double x0 = 0.0;
  double beta = 0.0;
  double max_delay_beta = 0.0;  // X = max(x_max, y1): nothing is ever cancelled
};

void validate(const GeDiscardProblem& prob);

/// A fixed stream of Gilbert-Elliot attempt states, replayed under any
/// constant discard threshold X (common random numbers across thresholds).
///
/// The first unit is the bootstrap delivery. For y0 <= X < y1 every bad-state
/// unit is cancelled and every good-state unit delivered; for X >= y1 nothing
/// is cancelled. The replay therefore reduces to counts of (previous state, k)
/// and of consecutive state pairs, which makes each evaluation O(1) in the
/// stream length while giving the same totals as walking the stream.
class GeDiscardReplay {
 public:
  GeDiscardReplay(const GilbertElliotParams& channel, std::uint64_t attempts, std::uint64_t seed,
                  bool keep_stream = false);

  /// Long-run average cost of the constant threshold x; +inf when x < y0.
  double average_cost(const CostModel& cost, double x) const;

  /// Attempt-by-attempt replay of the stored stream (requires keep_stream).
  double replay_direct(const CostModel& cost, double x) const;

  std::uint64_t attempts() const { return attempts_; }

 private:
  GilbertElliotParams channel_;
  std::uint64_t attempts_;
  std::map<std::pair<int, int>, std::uint64_t> by_prev_and_k_;  // y0 <= X < y1
  std::array<std::array<std::uint64_t, 2>, 2> pairs_{};         // X >= y1
  std::vector<std::uint8_t> stream_;
};

/// Grid over [max(y0, x_min), min(y1, x_max)) at 1e-3 (y1 - y0), golden-section
/// refinement, then the never-cancel policy when x_max >= y1.
GeDiscardSolution ge_discard_optimize(const GeDiscardProblem& prob);

}  // namespace aoipg
