#include "aoipg/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "aoipg/channel.hpp"
#include "aoipg/oracle.hpp"
#include "aoipg/policy.hpp"
#include "aoipg/sim.hpp"

namespace aoipg {

namespace {

using Clock = std::chrono::steady_clock;

CheckResult timed(const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
  const auto start = Clock::now();
  CheckResult result{name};
  try {
    auto [ok, detail] = body();
    result.passed = ok;
    result.detail = std::move(detail);
  } catch (const std::exception& e) {
    result.passed = false;
    result.detail = std::string("exception: ") + e.what();
  }
  result.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

StochasticPolicy random_policy(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 1.0);
  const bool two = u(rng) < 0.3;
  const double y_max = 1.0 + 9.0 * u(rng);
  FourierFeatures f = two ? FourierFeatures::two_dim(3, 3, y_max, 1.0 + 4.0 * u(rng))
                          : FourierFeatures::one_dim(2 + static_cast<int>(9 * u(rng)), y_max);
  const double a_min = 3.0 * u(rng);
  const double a_max = a_min + 0.5 + 9.5 * u(rng);
  StochasticPolicy policy(f, a_min, a_max, 0.2 + 1.3 * u(rng), u(rng) < 0.5 ? ActionKind::Wait : ActionKind::Discard);
  for (Eigen::Index i = 0; i < policy.theta().size(); ++i) policy.theta()[i] = 0.5 * n(rng);
  return policy;
}

State random_state(const StochasticPolicy& policy, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return State{policy.features().y_max() * u(rng),
               policy.features().is_two_dim() ? policy.features().y_back_max() * u(rng) : 0.0};
}

std::pair<bool, std::string> check_gradients(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 101));
  constexpr double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    StochasticPolicy policy = random_policy(rng);
    const State s = random_state(policy, rng);
    const double a = policy.sample_action(s, rng);
    const Eigen::VectorXd elig = policy.eligibility(a, s);
    Eigen::VectorXd fd(elig.size());
    for (Eigen::Index i = 0; i < elig.size(); ++i) {
      const double saved = policy.theta()[i];
      policy.theta()[i] = saved + h;
      const double up = policy.log_pdf(a, s);
      policy.theta()[i] = saved - h;
      const double down = policy.log_pdf(a, s);
      policy.theta()[i] = saved;
      fd[i] = (up - down) / (2.0 * h);
    }
    worst = std::max(worst, (elig - fd).norm() / std::max(1.0, fd.norm()));

    ValueFunction critic(policy.features());
    for (Eigen::Index i = 0; i < critic.omega().size(); ++i) critic.omega()[i] = policy.theta()[i];
    const Eigen::VectorXd grad = critic.gradient(s);
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
      const double saved = critic.omega()[i];
      critic.omega()[i] = saved + h;
      const double up = critic.value(s);
      critic.omega()[i] = saved - h;
      const double down = critic.value(s);
      critic.omega()[i] = saved;
      fd[i] = (up - down) / (2.0 * h);
    }
    worst = std::max(worst, (grad - fd).norm() / std::max(1.0, fd.norm()));
  }
  std::ostringstream msg;
  msg << "max relative error " << worst;
  return {worst <= 1e-5, msg.str()};
}

std::pair<bool, std::string> check_normalization(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 102));
  boost::math::quadrature::tanh_sinh<double> integrator;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const StochasticPolicy policy = random_policy(rng);
    const State s = random_state(policy, rng);
    const double mu = policy.mu(s);
    // Break points around the bulk of the latent Gaussian keep the peak resolved.
    std::vector<double> cuts{policy.a_min()};
    for (double k : {-4.0, -2.0, 0.0, 2.0, 4.0}) {
      const double c = policy.a_min() + (policy.a_max() - policy.a_min()) / (1.0 + std::exp(-(mu + k * policy.sigma())));
      if (c > cuts.back() && c < policy.a_max()) cuts.push_back(c);
    }
    cuts.push_back(policy.a_max());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      total += integrator.integrate([&](double a) { return policy.pdf(a, s); }, cuts[i], cuts[i + 1]);
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  std::ostringstream msg;
  msg << "max |integral - 1| " << worst;
  return {worst <= 1e-6, msg.str()};
}

std::pair<bool, std::string> check_channels(std::uint64_t seed) {
  constexpr int kDraws = 200'000;
  LognormalMarkovDelay lognormal(LognormalParams{1.0, 0.5, 1.0}, derive_seed(seed, 103));
  double sum = 0.0;
  for (int i = 0; i < kDraws; ++i) sum += lognormal.next();
  const double mean = sum / kDraws;

  GilbertElliotDelay ge(GilbertElliotParams{0.1, 0.9, 1.0, 10.0, std::nullopt}, derive_seed(seed, 104));
  int bad = 0;
  for (int i = 0; i < kDraws; ++i) bad += ge.next() > 1.0 ? 1 : 0;
  const double occupancy = static_cast<double>(bad) / kDraws;

  std::ostringstream msg;
  msg << "lognormal mean " << mean << ", GE bad occupancy " << occupancy << " (expected 0.1)";
  return {std::abs(mean - 1.0) < 0.02 && std::abs(occupancy - 0.1) < 0.005, msg.str()};
}

std::pair<bool, std::string> check_penalties(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 105));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  boost::math::quadrature::gauss_kronrod<double, 31> gk;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const double g = 0.2 + 1.8 * u(rng);
    const PenaltyFunction variants[] = {IdentityPenalty{}, PowerPenalty{g}, ExponentialPenalty{0.3 * g},
                                        StepPenalty{g}, ScaledExpPenalty{0.5 + u(rng), 0.3 * g}};
    const double a = 5.0 * u(rng);
    const double b = a + 5.0 * u(rng);
    for (const auto& penalty : variants) {
      // Integrate piecewise between the jumps of the step penalty.
      std::vector<double> cuts{a};
      if (std::holds_alternative<StepPenalty>(penalty)) {
        for (double n = std::floor(g * a) + 1.0; n / g < b; n += 1.0) cuts.push_back(n / g);
      }
      cuts.push_back(b);
      double numeric = 0.0;
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i];
        const double hi = cuts[i + 1];
        const double mid = 0.5 * (lo + hi);
        const double level = penalty_value(penalty, mid);
        numeric += std::holds_alternative<StepPenalty>(penalty)
                       ? level * (hi - lo)
                       : gk.integrate([&](double t) { return penalty_value(penalty, t); }, lo, hi, 15, 1e-13);
      }
      const double closed = penalty_integral(penalty, a, b);
      worst = std::max(worst, std::abs(closed - numeric) / std::max(1.0, std::abs(numeric)));
    }
  }
  std::ostringstream msg;
  msg << "max relative error " << worst;
  return {worst <= 1e-9, msg.str()};
}

std::pair<bool, std::string> check_conservation(std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.channel = LognormalParams{1.5, eta_from_rho(0.5), 1.0};
  cfg.cost = CostModel{PenaltyBased{PowerPenalty{1.5}}, 4.0};
  cfg.agent.algorithm = Algorithm::Combined;
  cfg.sim.horizon = 2e4;
  cfg.sim.master_seed = seed;
  const Trajectory t = run_once(cfg, 0);
  const double gap = std::abs(t.final_beta * t.final_time - t.total_cost) / std::max(1.0, std::abs(t.total_cost));
  std::ostringstream msg;
  msg << "relative gap " << gap << " after " << t.steps << " steps";
  return {gap <= 1e-9, msg.str()};
}

std::pair<bool, std::string> check_wait_oracle(std::uint64_t seed) {
  GeWaitProblem prob{0.01, 0.04, 0.5, 1.0, 3.0, CostModel{PenaltyBased{IdentityPenalty{}}, 1.0}};
  const double z0 = 0.7;
  const double z1 = 0.3;
  const double exact = ge_wait_average_cost(prob, z0, z1);

  ExperimentConfig cfg;
  cfg.channel = GilbertElliotParams{prob.p, prob.q, prob.y0, prob.y1, std::nullopt};
  cfg.cost = prob.cost;
  cfg.agent.algorithm = Algorithm::FixedTabular;
  cfg.agent.table = {TableEntry{prob.y0, z0, std::nullopt}, TableEntry{prob.y1, z1, std::nullopt}};
  cfg.sim.horizon = 1e6;
  cfg.sim.master_seed = seed;
  const Trajectory t = run_once(cfg, 0);
  const double gap = std::abs(t.final_beta - exact) / exact;
  std::ostringstream msg;
  msg << "closed form " << exact << ", simulated " << t.final_beta;
  return {gap <= 0.01, msg.str()};
}

}  // namespace

std::vector<CheckResult> run_checks(std::uint64_t seed) {
  return {
      timed("gradients", [&] { return check_gradients(seed); }),
      timed("density_normalization", [&] { return check_normalization(seed); }),
      timed("channel_stationarity", [&] { return check_channels(seed); }),
      timed("penalty_integrals", [&] { return check_penalties(seed); }),
      timed("conservation", [&] { return check_conservation(seed); }),
      timed("wait_oracle", [&] { return check_wait_oracle(seed); }),
  };
}

}  // namespace aoipg
