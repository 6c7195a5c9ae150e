#pragma once

#include <string>
#include <variant>

namespace aoipg {

// Penalty functions p(t) of the age t.
struct IdentityPenalty {};
struct PowerPenalty { double gamma = 1.0; };        // t^gamma
struct ExponentialPenalty { double gamma = 1.0; };  // e^(gamma t)
struct StepPenalty { double gamma = 1.0; };         // floor(gamma t)
struct ScaledExpPenalty {                           // eta (e^(gamma t) - 1)
  double eta = 1.0;
  double gamma = 1.0;
};

using PenaltyFunction =
    std::variant<IdentityPenalty, PowerPenalty, ExponentialPenalty, StepPenalty, ScaledExpPenalty>;

void validate(const PenaltyFunction& penalty);

/// p(t) for t >= 0.
double penalty_value(const PenaltyFunction& penalty, double t);

/// Integral of p over [a, b], closed form for every variant. Throws
/// std::invalid_argument when a > b or a < 0.
double penalty_integral(const PenaltyFunction& penalty, double a, double b);

std::string penalty_name(const PenaltyFunction& penalty);

struct PenaltyBased {
  PenaltyFunction penalty;
};

/// Unit cost whenever the age exceeds a_th during the delivery interval.
struct PeakViolation {
  double a_th = 1.0;
};

struct CostModel {
  std::variant<PenaltyBased, PeakViolation> kind;
  double f = 0.0;  // per transmitted data unit
};

void validate(const CostModel& model);

/// The age over a delivery interval runs from y_prev to y_prev + elapsed.
struct DeliveryRecord {
  double y_prev = 0.0;
  double elapsed = 0.0;
  int k = 1;
};

/// AoI part of the delivery cost, without the k * f transmission term.
double aoi_cost(const CostModel& model, double y_prev, double elapsed);

/// k * f + aoi_cost.
double delivery_cost(const CostModel& model, const DeliveryRecord& rec);

}  // namespace aoipg
