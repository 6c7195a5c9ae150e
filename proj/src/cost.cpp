#include "aoipg/cost.hpp"

#include <cmath>
#include <stdexcept>

namespace aoipg {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Antiderivative of floor(u) with value 0 at u = 0.
double floor_antiderivative(double u) {
  const double n = std::floor(u);
  return 0.5 * n * (n - 1.0) + n * (u - n);
}

}  // namespace

void validate(const PenaltyFunction& penalty) {
  std::visit(Overloaded{
                 [](const IdentityPenalty&) {},
                 [](const PowerPenalty& p) {
                   if (!(p.gamma > 0.0)) throw std::invalid_argument("power penalty gamma must be > 0");
                 },
                 [](const ExponentialPenalty& p) {
                   if (!(p.gamma > 0.0)) throw std::invalid_argument("exponential penalty gamma must be > 0");
                 },
                 [](const StepPenalty& p) {
                   if (!(p.gamma > 0.0)) throw std::invalid_argument("step penalty gamma must be > 0");
                 },
                 [](const ScaledExpPenalty& p) {
                   if (!(p.gamma > 0.0) || !(p.eta > 0.0)) {
                     throw std::invalid_argument("scaled_exp penalty needs eta > 0 and gamma > 0");
                   }
                 },
             },
             penalty);
}

double penalty_value(const PenaltyFunction& penalty, double t) {
  return std::visit(Overloaded{
                        [t](const IdentityPenalty&) { return t; },
                        [t](const PowerPenalty& p) { return std::pow(t, p.gamma); },
                        [t](const ExponentialPenalty& p) { return std::exp(p.gamma * t); },
                        [t](const StepPenalty& p) { return std::floor(p.gamma * t); },
                        [t](const ScaledExpPenalty& p) { return p.eta * std::expm1(p.gamma * t); },
                    },
                    penalty);
}

double penalty_integral(const PenaltyFunction& penalty, double a, double b) {
  if (!(a >= 0.0)) throw std::invalid_argument("penalty_integral: lower limit must be >= 0");
  if (a > b) throw std::invalid_argument("penalty_integral: lower limit exceeds upper limit");
  if (a == b) return 0.0;
  return std::visit(
      Overloaded{
          [=](const IdentityPenalty&) { return 0.5 * (b - a) * (b + a); },
          [=](const PowerPenalty& p) {
            const double e = p.gamma + 1.0;
            return (std::pow(b, e) - std::pow(a, e)) / e;
          },
          [=](const ExponentialPenalty& p) {
            return std::exp(p.gamma * a) * std::expm1(p.gamma * (b - a)) / p.gamma;
          },
          [=](const StepPenalty& p) {
            return (floor_antiderivative(p.gamma * b) - floor_antiderivative(p.gamma * a)) / p.gamma;
          },
          [=](const ScaledExpPenalty& p) {
            return p.eta * (std::exp(p.gamma * a) * std::expm1(p.gamma * (b - a)) / p.gamma - (b - a));
          },
      },
      penalty);
}

std::string penalty_name(const PenaltyFunction& penalty) {
  return std::visit(Overloaded{
                        [](const IdentityPenalty&) { return std::string("identity"); },
                        [](const PowerPenalty&) { return std::string("power"); },
                        [](const ExponentialPenalty&) { return std::string("exponential"); },
                        [](const StepPenalty&) { return std::string("step"); },
                        [](const ScaledExpPenalty&) { return std::string("scaled_exp"); },
                    },
                    penalty);
}

void validate(const CostModel& model) {
  if (!(model.f >= 0.0)) throw std::invalid_argument("transmission cost f must be >= 0");
  std::visit(Overloaded{
                 [](const PenaltyBased& m) { validate(m.penalty); },
                 [](const PeakViolation& m) {
                   if (!(m.a_th > 0.0)) throw std::invalid_argument("a_th must be > 0");
                 },
             },
             model.kind);
}

double aoi_cost(const CostModel& model, double y_prev, double elapsed) {
  return std::visit(Overloaded{
                        [&](const PenaltyBased& m) {
                          return penalty_integral(m.penalty, y_prev, y_prev + elapsed);
                        },
                        [&](const PeakViolation& m) { return y_prev + elapsed > m.a_th ? 1.0 : 0.0; },
                    },
                    model.kind);
}

double delivery_cost(const CostModel& model, const DeliveryRecord& rec) {
  return rec.k * model.f + aoi_cost(model, rec.y_prev, rec.elapsed);
}

}  // namespace aoipg
