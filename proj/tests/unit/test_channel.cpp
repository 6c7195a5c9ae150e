#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>
#include <set>
#include <vector>

#include "aoipg/channel.hpp"

using namespace aoipg;

namespace {

double sample_lag1_correlation(const std::vector<double>& y) {
  const std::size_t n = y.size() - 1;
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += y[i];
    mb += y[i + 1];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (y[i] - ma) * (y[i + 1] - mb);
    saa += (y[i] - ma) * (y[i] - ma);
    sbb += (y[i + 1] - mb) * (y[i + 1] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// corr(e^{sX}, e^{sY}) for standard normals with corr(X, Y) = eta, by a 2-D
// trapezoid rule over the joint density in (X, W), Y = eta X + sqrt(1-eta^2) W.
double quadrature_lag1_correlation(double s, double eta) {
  const int n = 801;
  const double lim = 9.0, h = 2 * lim / (n - 1);
  const double c = std::sqrt(1 - eta * eta);
  double exy = 0, ex = 0, ex2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = -lim + i * h;
    const double px = std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi);
    ex += h * px * std::exp(s * x);
    ex2 += h * px * std::exp(2 * s * x);
    for (int j = 0; j < n; ++j) {
      const double w = -lim + j * h;
      const double pw = std::exp(-0.5 * w * w) / std::sqrt(2 * std::numbers::pi);
      exy += h * h * px * pw * std::exp(s * x + s * (eta * x + c * w));
    }
  }
  return (exy - ex * ex) / (ex2 - ex * ex);
}

}  // namespace

TEST_SUITE("channel") {
  TEST_CASE("derive_seed matches an independent SplitMix64 reference") {
    // Reference values computed with arbitrary-precision integers outside C++.
    CHECK(derive_seed(1, 0) == 6728581669027343264ULL);
    CHECK(derive_seed(1, 1) == 4527256255293844767ULL);
    CHECK(derive_seed(42, 7) == 16985500963452169609ULL);
  }

  TEST_CASE("derive_seed gives distinct streams per run") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(derive_seed(123, i));
    CHECK(seen.size() == 10000);
    CHECK(derive_seed(1, 5) != derive_seed(2, 5));
  }

  TEST_CASE("eta_from_rho inverts the correlation label") {
    CHECK(eta_from_rho(0.0) == doctest::Approx(0.0));
    CHECK(eta_from_rho(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    // ln(1 + 0.5 (e - 1)), evaluated independently.
    CHECK(eta_from_rho(0.5) == doctest::Approx(0.6201145069582775).epsilon(1e-14));
    for (double r : {0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9}) {
      CHECK(rho_label(eta_from_rho(r)) == doctest::Approx(r).epsilon(1e-14));
    }
    CHECK_THROWS_AS(eta_from_rho(-0.01), std::invalid_argument);
    CHECK_THROWS_AS(eta_from_rho(1.01), std::invalid_argument);
    CHECK_THROWS_AS(eta_from_rho(std::nan("")), std::invalid_argument);
  }

  TEST_CASE("lag-1 correlation formula matches quadrature") {
    for (double s : {0.5, 1.0, 1.5}) {
      for (double eta : {0.0, 0.3, 0.6201145069582775, 0.9}) {
        CHECK(lognormal_lag1_correlation(s, eta) == doctest::Approx(quadrature_lag1_correlation(s, eta)).epsilon(1e-6));
      }
    }
    CHECK(lognormal_lag1_correlation(1.5, 1.0) == doctest::Approx(1.0));
  }

  TEST_CASE("lognormal delays have unit mean and the predicted lag-1 correlation") {
    const double eta = 0.5;
    LognormalMarkovDelay process(LognormalParams{1.0, eta, 1.0}, 7);
    std::vector<double> y(1'000'000);
    double sum = 0;
    int nonpositive = 0;
    for (auto& v : y) {
      v = process.next();
      nonpositive += v <= 0.0;
      sum += v;
    }
    CHECK(nonpositive == 0);
    CHECK(sum / y.size() == doctest::Approx(1.0).epsilon(0.01));
    CHECK(std::abs(sample_lag1_correlation(y) - lognormal_lag1_correlation(1.0, eta)) < 0.02);
  }

  TEST_CASE("eta = 1 freezes the delay and mean_scale scales it") {
    LognormalMarkovDelay frozen(LognormalParams{1.5, 1.0, 1.0}, 3);
    const double first = frozen.next();
    for (int i = 0; i < 100; ++i) CHECK(frozen.next() == first);

    LognormalMarkovDelay a(LognormalParams{1.5, 0.3, 1.0}, 99);
    LognormalMarkovDelay b(LognormalParams{1.5, 0.3, 2.5}, 99);
    for (int i = 0; i < 100; ++i) CHECK(b.next() == doctest::Approx(2.5 * a.next()).epsilon(1e-15));
  }

  TEST_CASE("lognormal validation") {
    CHECK_THROWS_AS(validate(LognormalParams{0.0, 0.5, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(LognormalParams{1.0, -0.1, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(LognormalParams{1.0, 1.1, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(LognormalParams{1.0, 0.5, 0.0}), std::invalid_argument);
    CHECK_NOTHROW(validate(LognormalParams{1.0, 0.5, 1.0}));
  }

  TEST_CASE("Gilbert-Elliot occupancy and transitions") {
    const double p = 0.01, q = 0.04;
    GilbertElliotDelay process(GilbertElliotParams{p, q, 0.5, 1.0, std::nullopt}, 5);
    const int n = 4'000'000;
    int bad = 0, from_good = 0, good_to_bad = 0, other = 0;
    int prev = process.state();
    for (int i = 0; i < n; ++i) {
      const double y = process.next();
      other += y != 0.5 && y != 1.0;
      bad += y == 1.0;
      const int cur = process.state();
      if (prev == 0) {
        ++from_good;
        good_to_bad += cur == 1;
      }
      prev = cur;
    }
    CHECK(other == 0);
    CHECK(std::abs(static_cast<double>(bad) / n - p / (p + q)) < 0.01);
    CHECK(static_cast<double>(good_to_bad) / from_good == doctest::Approx(p).epsilon(0.05));
  }

  TEST_CASE("Gilbert-Elliot deterministic chains") {
    GilbertElliotDelay alternating(GilbertElliotParams{1.0, 1.0, 1.0, 10.0, 0}, 1);
    for (int i = 0; i < 10; ++i) CHECK(alternating.next() == (i % 2 == 0 ? 1.0 : 10.0));

    GilbertElliotDelay stuck(GilbertElliotParams{0.0, 0.0, 2.0, 3.0, 1}, 1);
    for (int i = 0; i < 10; ++i) CHECK(stuck.next() == 3.0);

    GilbertElliotDelay constant(GilbertElliotParams{0.3, 0.3, 1.0, 1.0, std::nullopt}, 1);
    for (int i = 0; i < 10; ++i) CHECK(constant.next() == 1.0);
  }

  TEST_CASE("Gilbert-Elliot validation") {
    CHECK_THROWS_AS(validate(GilbertElliotParams{-0.1, 0.5, 1, 2, std::nullopt}), std::invalid_argument);
    CHECK_THROWS_AS(validate(GilbertElliotParams{0.1, 1.5, 1, 2, std::nullopt}), std::invalid_argument);
    CHECK_THROWS_AS(validate(GilbertElliotParams{0.1, 0.5, 3, 2, std::nullopt}), std::invalid_argument);
    CHECK_THROWS_AS(validate(GilbertElliotParams{0.1, 0.5, 0, 2, std::nullopt}), std::invalid_argument);
    CHECK_THROWS_AS(validate(GilbertElliotParams{0.1, 0.5, 1, 2, 2}), std::invalid_argument);
  }

  TEST_CASE("processes are reproducible from their seed") {
    DelayProcess a(ChannelParams{LognormalParams{1.5, 0.6, 1.0}}, 17);
    DelayProcess b(ChannelParams{LognormalParams{1.5, 0.6, 1.0}}, 17);
    DelayProcess c(ChannelParams{LognormalParams{1.5, 0.6, 1.0}}, 18);
    bool differs = false;
    for (int i = 0; i < 1000; ++i) {
      const double x = a.next();
      CHECK(x == b.next());
      differs = differs || x != c.next();
    }
    CHECK(differs);

    DelayProcess g(ChannelParams{GilbertElliotParams{0.1, 0.9, 1, 10, std::nullopt}}, 4);
    GilbertElliotDelay direct(GilbertElliotParams{0.1, 0.9, 1, 10, std::nullopt}, 4);
    for (int i = 0; i < 1000; ++i) CHECK(next_delay(g) == direct.next());
  }
}
