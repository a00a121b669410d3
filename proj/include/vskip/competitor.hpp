// Area-decreasing competitors for the plane {x1 = 0} inside the pyramid C_{a,b}.
//
// The competitor slides the part of the plane below height 1 to {x1 = eps}
// (losing a triangle of area a^2 eps^2 / b) and reconnects it to the plane over
// the band 1 <= x3 <= 1 + h with the ruled graph x1 = eps * phi(x3), where
//
//   phi(t) = ((1+h)^alpha t^-alpha - 1) / ((1+h)^alpha - 1).
#pragma once

#include "vskip/geometry_core.hpp"

#include <vector>

namespace vskip {

class TriMesh;

class ConnectionProfile {
 public:
  ConnectionProfile(double h, double alpha);

  [[nodiscard]] double h() const { return h_; }
  [[nodiscard]] double alpha() const { return alpha_; }

  /// phi on [1, 1 + h]; throws outside.
  [[nodiscard]] double phi(double t) const;
  [[nodiscard]] double phi_prime(double t) const;

 private:
  void check_domain(double t) const;

  double h_;
  double alpha_;
  double top_pow_;  // (1 + h)^alpha
};

struct CompetitorSpec {
  double a;
  double b;
  ConnectionProfile profile;
  double epsilon;

  CompetitorSpec(double a, double b, ConnectionProfile profile, double epsilon);
};

struct SectionAreas {
  double A0;
  double A_eps;
};

struct DeficitReport {
  double A0 = 0.0;
  double A_eps = 0.0;
  double T_h_area = 0.0;
  double ruled_area = 0.0;
  double deficit = 0.0;
  double second_derivative = 0.0;
  double weighted_energy = 0.0;
  /// Any ball centered at the origin with larger radius contains the support of the variation.
  double support_radius = 0.0;
};

double phi(const ConnectionProfile& p, double t);
double phi_prime(const ConnectionProfile& p, double t);

/// Closed form of the integral of t phi'(t)^2 over [1, 1 + h].
double weighted_energy(const ConnectionProfile& p);

/// alpha = a^2 and the first h in {1, 2, 4, ...} with weighted_energy < a^2.
ConnectionProfile feasible_params(double a);

SectionAreas section_areas(double a, double b, double epsilon);

/// Area of the band {1 <= x3 <= 1 + h} of the plane inside the pyramid.
double trapezium_area(double b, double h);

/// Area of the ruled connecting surface over the band (adaptive quadrature).
double ruled_area(const CompetitorSpec& spec);

/// ruled_area - trapezium_area, evaluated without cancellation.
double ruled_excess(const CompetitorSpec& spec);

DeficitReport area_deficit(const CompetitorSpec& spec);

/// Largest grid point eps_k = k/(2 a n), k = 1..n, such that the deficit is
/// negative at every grid point up to it.
double find_epsilon_star(double a, double b, const ConnectionProfile& profile, int resolution);

/// Triangulated competitor surface (slid section plus ruled band), `resolution`
/// cells along each parameter direction of each piece.
TriMesh export_competitor_mesh(const CompetitorSpec& spec, int resolution);

}  // namespace vskip
