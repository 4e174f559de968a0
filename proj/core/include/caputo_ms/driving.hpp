#pragma once

#include <cstddef>
#include <functional>
#include <numbers>

#include "caputo_ms/kernel.hpp"

namespace caputo_ms {

// Point of the circle P, stored as an angle in [0, 2 pi).
class BasePoint {
 public:
  BasePoint() = default;
  explicit BasePoint(double angle);

  double angle() const { return angle_; }
  bool operator==(const BasePoint&) const = default;

 private:
  double angle_ = 0.0;
};

double canonical_angle(double angle);

// Arc-length metric; the diameter of P is pi.
double dist(BasePoint p, BasePoint q);
inline constexpr double kBaseDiameter = std::numbers::pi;

// Rotation flow theta_t p = p + omega t on the circle.
struct DrivingSystem {
  double omega = 1.0;
  // |p|_P; the default is the unit-circle embedding norm.
  std::function<double(BasePoint)> embed_norm = [](BasePoint) { return 1.0; };
  double embed_norm_sup = 1.0;

  BasePoint flow(double t, BasePoint p) const;
};

BasePoint flow(const DrivingSystem& sys, double t, BasePoint p);

// int_0^t a(t, s) |theta_s p|^2 ds by product integration on `cells` cells.
double assumption2_bound(const DrivingSystem& sys, const FracParams& p, double t, BasePoint point,
                         std::size_t cells = 1024);

// M = sup |.|_P^2 varrho^-alpha.
double assumption2_constant(const DrivingSystem& sys, const FracParams& p);

}  // namespace caputo_ms
