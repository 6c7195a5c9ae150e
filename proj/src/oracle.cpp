#include "aoipg/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace aoipg {

namespace {

void validate_chain(double p, double q, double y0, double y1) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0, 1]");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0, 1]");
  if (!(y0 >= 0.0 && y0 <= y1)) throw std::invalid_argument("delays must satisfy 0 <= y0 <= y1");
}

}  // namespace

void validate(const GeWaitProblem& prob) {
  validate_chain(prob.p, prob.q, prob.y0, prob.y1);
  if (!(prob.z_max > 0.0)) throw std::invalid_argument("z_max must be > 0");
  if (prob.initial_state != 0 && prob.initial_state != 1) throw std::invalid_argument("initial_state must be 0 or 1");
  validate(prob.cost);
}

std::array<double, 2> ge_stationary(double p, double q, int initial_state) {
  if (p + q > 0.0) return {q / (p + q), p / (p + q)};
  return initial_state == 0 ? std::array<double, 2>{1.0, 0.0} : std::array<double, 2>{0.0, 1.0};
}

double ge_wait_average_cost(const GeWaitProblem& prob, double z0, double z1) {
  if (!(z0 >= 0.0 && z0 <= prob.z_max) || !(z1 >= 0.0 && z1 <= prob.z_max)) {
    throw std::invalid_argument("wait values must lie in [0, z_max]");
  }
  const auto pi = ge_stationary(prob.p, prob.q, prob.initial_state);
  const double transition[2][2] = {{1.0 - prob.p, prob.p}, {prob.q, 1.0 - prob.q}};
  const double y[2] = {prob.y0, prob.y1};
  const double z[2] = {z0, z1};
  double cost = 0.0;
  double time = 0.0;
  for (int s = 0; s < 2; ++s) {
    for (int t = 0; t < 2; ++t) {
      const double weight = pi[s] * transition[s][t];
      if (weight == 0.0) continue;
      const double elapsed = z[s] + y[t];
      cost += weight * (prob.cost.f + aoi_cost(prob.cost, y[s], elapsed));
      time += weight * elapsed;
    }
  }
  return cost / time;
}

GeWaitSolution ge_wait_optimize(const GeWaitProblem& prob) {
  validate(prob);
  constexpr int kCells = 1000;
  const double h = prob.z_max / kCells;
  GeWaitSolution best{0.0, 0.0, std::numeric_limits<double>::infinity()};
  for (int i = 0; i <= kCells; ++i) {
    for (int j = 0; j <= kCells; ++j) {
      const double z0 = i * h;
      const double z1 = j * h;
      const double beta = ge_wait_average_cost(prob, z0, z1);
      if (beta < best.beta) best = {z0, z1, beta};
    }
  }
  // Coordinate refinement with a halving step.
  double step = h;
  while (step >= 1e-6) {
    bool moved = false;
    for (int axis = 0; axis < 2; ++axis) {
      for (double sign : {-1.0, 1.0}) {
        GeWaitSolution trial = best;
        double& coord = axis == 0 ? trial.z0 : trial.z1;
        coord = std::clamp(coord + sign * step, 0.0, prob.z_max);
        trial.beta = ge_wait_average_cost(prob, trial.z0, trial.z1);
        if (trial.beta < best.beta) {
          best = trial;
          moved = true;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return best;
}

void validate(const GeDiscardProblem& prob) {
  validate_chain(prob.p, prob.q, prob.y0, prob.y1);
  if (!(prob.y0 < prob.y1)) throw std::invalid_argument("discard oracle needs y0 < y1");
  if (!(prob.x_min > 0.0 && prob.x_min < prob.x_max)) throw std::invalid_argument("need 0 < x_min < x_max");
  if (!(prob.x_min <= prob.y1)) throw std::invalid_argument("x_min must not exceed y1");
  if (prob.attempts < 2) throw std::invalid_argument("attempts must be >= 2");
  validate(prob.cost);
}

GeDiscardReplay::GeDiscardReplay(const GilbertElliotParams& channel, std::uint64_t attempts, std::uint64_t seed,
                                 bool keep_stream)
    : channel_(channel), attempts_(attempts) {
  GilbertElliotDelay process(channel_, seed);
  if (keep_stream) stream_.reserve(attempts);
  int prev = -1;
  int last = -1;
  int k = 1;
  for (std::uint64_t i = 0; i < attempts; ++i) {
    const int s = process.state();
    process.next();
    if (keep_stream) stream_.push_back(static_cast<std::uint8_t>(s));
    if (last >= 0) ++pairs_[last][s];
    last = s;
    if (prev < 0) {
      prev = s;  // bootstrap delivery
      continue;
    }
    if (s == 1) {
      ++k;
    } else {
      ++by_prev_and_k_[{prev, k}];
      prev = 0;
      k = 1;
    }
  }
}

double GeDiscardReplay::average_cost(const CostModel& cost, double x) const {
  const double y[2] = {channel_.y0, channel_.y1};
  if (x < channel_.y0) return std::numeric_limits<double>::infinity();
  double total_cost = 0.0;
  double total_time = 0.0;
  if (x < channel_.y1) {
    for (const auto& [key, count] : by_prev_and_k_) {
      const auto [prev, k] = key;
      const double elapsed = (k - 1) * x + channel_.y0;
      total_cost += count * (k * cost.f + aoi_cost(cost, y[prev], elapsed));
      total_time += count * elapsed;
    }
  } else {
    for (int s = 0; s < 2; ++s) {
      for (int t = 0; t < 2; ++t) {
        const auto count = static_cast<double>(pairs_[s][t]);
        if (count == 0.0) continue;
        total_cost += count * (cost.f + aoi_cost(cost, y[s], y[t]));
        total_time += count * y[t];
      }
    }
  }
  return total_cost / total_time;
}

double GeDiscardReplay::replay_direct(const CostModel& cost, double x) const {
  if (stream_.empty()) throw std::logic_error("replay_direct needs a stored stream");
  const double y[2] = {channel_.y0, channel_.y1};
  double total_cost = 0.0;
  double total_time = 0.0;
  double y_prev = y[stream_.front()];
  int k = 1;
  for (std::size_t i = 1; i < stream_.size(); ++i) {
    const double delay = y[stream_[i]];
    if (delay > x) {
      ++k;
      continue;
    }
    const double elapsed = (k - 1) * x + delay;
    total_cost += k * cost.f + aoi_cost(cost, y_prev, elapsed);
    total_time += elapsed;
    y_prev = delay;
    k = 1;
  }
  return total_time > 0.0 ? total_cost / total_time : std::numeric_limits<double>::infinity();
}

GeDiscardSolution ge_discard_optimize(const GeDiscardProblem& prob) {
  validate(prob);
  const GeDiscardReplay replay(GilbertElliotParams{prob.p, prob.q, prob.y0, prob.y1, std::nullopt}, prob.attempts,
                               prob.seed);
  const double lo = std::max(prob.y0, prob.x_min);
  const double hi = std::min(prob.y1, prob.x_max);
  const double h = 1e-3 * (prob.y1 - prob.y0);

  GeDiscardSolution best{lo, replay.average_cost(prob.cost, lo), 0.0};
  for (double x = lo + h; x < hi; x += h) {
    const double beta = replay.average_cost(prob.cost, x);
    if (beta < best.beta) best = {x, beta, 0.0};
  }

  // Golden-section on the bracket around the best grid cell.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = std::max(lo, best.x0 - h);
  double b = std::min(std::nextafter(hi, lo), best.x0 + h);
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = replay.average_cost(prob.cost, c);
  double fd = replay.average_cost(prob.cost, d);
  while (b - a > 1e-9) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = replay.average_cost(prob.cost, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = replay.average_cost(prob.cost, d);
    }
  }
  const double refined = 0.5 * (a + b);
  const double refined_beta = replay.average_cost(prob.cost, refined);
  if (refined_beta < best.beta) best = {refined, refined_beta, 0.0};

  best.max_delay_beta = replay.average_cost(prob.cost, std::max(prob.x_max, prob.y1));
  // Every X >= y1 never cancels; that policy competes when the bounds allow it.
  if (prob.x_max >= prob.y1 && best.max_delay_beta < best.beta) {
    best.x0 = prob.x_max;
    best.beta = best.max_delay_beta;
  }
  return best;
}

}  // namespace aoipg
