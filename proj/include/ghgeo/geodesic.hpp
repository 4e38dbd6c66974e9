#pragma once

// Circle-fiber geodesic orbits over critical points: length, Jacobi spectrum,
// index and nullity, plus the m0 / epsilon0 thresholds.

#include <cmath>
#include <limits>
#include <vector>

#include "ghgeo/core.hpp"
#include "ghgeo/critical.hpp"
#include "ghgeo/potential.hpp"

namespace ghgeo {

struct SpectrumEntry {
  int mode = 0;
  int branch = 0;  // Hessian eigenvalue index 0..2, ascending
  int multiplicity = 1;
  double eigenvalue = 0.0;  // of -J
};

struct JacobiSpectrum {
  std::vector<SpectrumEntry> entries;

  double min_abs() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& e : entries) m = std::min(m, std::abs(e.eigenvalue));
    return m;
  }
};

enum class Regime { Euclidean, Torus };

struct GeodesicOrbit {
  CriticalPoint base;
  Regime regime = Regime::Euclidean;
  double parameter = 0.0;  // m or epsilon
  double length = 0.0;
  int geodesic_index = 0;
  int nullity = 0;
  bool degenerate_base = false;
  JacobiSpectrum spectrum;
};

inline constexpr int kDefaultModes = 8;
inline constexpr double kSpectralTol = 1e-10;

namespace geodesic_detail {

// Mode-n eigenvalue of -J is a * n^2 + b * mu_i; zero detection is relative
// to the uncancelled mode-0 scale |b| * hessian_scale.
inline GeodesicOrbit assemble(const CriticalPoint& p, Regime regime, double parameter, double length,
                              double a, double b, int n_max) {
  if (n_max < 0) throw Error(ErrorCode::ParameterError, "nmax must be >= 0");
  GeodesicOrbit o;
  o.base = p;
  o.regime = regime;
  o.parameter = parameter;
  o.length = length;
  o.degenerate_base = p.degenerate;
  const double zero = kSpectralTol * std::abs(b) * p.hessian_scale;
  for (int n = 0; n <= n_max; ++n)
    for (int i = 0; i < 3; ++i) {
      SpectrumEntry e;
      e.mode = n;
      e.branch = i;
      e.multiplicity = n == 0 ? 1 : 2;
      e.eigenvalue = a * n * n + b * p.eigenvalues[i];
      o.spectrum.entries.push_back(e);
      if (std::abs(e.eigenvalue) <= zero) o.nullity += e.multiplicity;
      else if (e.eigenvalue < 0.0) o.geodesic_index += e.multiplicity;
    }
  return o;
}

}  // namespace geodesic_detail

/// e(n, i) = n^2 phi(p) - mu_i / (2 phi(p)^2), length 2 pi phi(p)^(-1/2).
/// phi(p) is re-evaluated with the configuration's mass.
inline GeodesicOrbit orbit_euclidean(const ChargeConfiguration& config, const CriticalPoint& p,
                                     int n_max = kDefaultModes) {
  const double f = value_euclidean(config, p.location);
  if (!(f > 0.0)) throw Error(ErrorCode::NonpositivePotential, "phi(p) must be positive");
  return geodesic_detail::assemble(p, Regime::Euclidean, config.mass, 2.0 * kPi / std::sqrt(f), f,
                                   -0.5 / (f * f), n_max);
}

/// Mode 0: -eps mu / (2 (1 + eps h)^2); mode n: n^2 (1 + eps h) / eps^2 plus
/// the same term. Length 2 pi eps (1 + eps h)^(-1/2).
inline GeodesicOrbit orbit_torus(const CriticalPoint& p, double epsilon, int n_max = kDefaultModes) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::ParameterError, "epsilon must be positive");
  const double he = 1.0 + epsilon * p.value;
  if (!(he > 0.0)) throw Error(ErrorCode::EpsilonTooLarge, "1 + eps h(p) <= 0");
  return geodesic_detail::assemble(p, Regime::Torus, epsilon, 2.0 * kPi * epsilon / std::sqrt(he),
                                   he / (epsilon * epsilon), -epsilon / (2.0 * he * he), n_max);
}

inline std::vector<GeodesicOrbit> orbits_euclidean(const ChargeConfiguration& config,
                                                   const std::vector<CriticalPoint>& points,
                                                   int n_max = kDefaultModes) {
  std::vector<GeodesicOrbit> out;
  for (const auto& p : points) out.push_back(orbit_euclidean(config, p, n_max));
  return out;
}

/// Checks 1 + eps h > 0 on the whole census before building any orbit.
inline std::vector<GeodesicOrbit> orbits_torus(const std::vector<CriticalPoint>& points, double epsilon,
                                               int n_max = kDefaultModes) {
  for (const auto& p : points)
    if (!(1.0 + epsilon * p.value > 0.0))
      throw Error(ErrorCode::EpsilonTooLarge, "1 + eps h <= 0 on the census");
  std::vector<GeodesicOrbit> out;
  for (const auto& p : points) out.push_back(orbit_torus(p, epsilon, n_max));
  return out;
}

inline constexpr double kThresholdRelTol = 1e-6;

/// Smallest m >= 0 with every mode n >= 1 eigenvalue positive (above the
/// nullity tolerance) on the census.
/// Hessians are mass independent; psi(p) = value - config.mass.
inline double find_m0(const ChargeConfiguration& config, const std::vector<CriticalPoint>& points,
                      int n_max = kDefaultModes) {
  if (points.empty()) throw Error(ErrorCode::NoThreshold, "empty census");
  auto ok = [&](double m) {
    for (const auto& p : points) {
      const double f = m + p.value - config.mass;
      if (!(f > 0.0)) return false;
      const double zero = kSpectralTol * p.hessian_scale / (2.0 * f * f);
      for (int n = 1; n <= std::max(n_max, 1); ++n)
        for (int i = 0; i < 3; ++i)
          if (!(n * n * f - p.eigenvalues[i] / (2.0 * f * f) > zero)) return false;
    }
    return true;
  };
  if (ok(0.0)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (!ok(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) throw Error(ErrorCode::NoThreshold, "no finite m0");
  }
  while (hi - lo > kThresholdRelTol * hi) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// Largest eps with 1 + eps h > 0 and every mode n >= 1 eigenvalue positive
/// (above the nullity tolerance) on the census. +infinity when no constraint binds.
inline double find_epsilon0(const std::vector<CriticalPoint>& points, int n_max = kDefaultModes) {
  if (points.empty()) throw Error(ErrorCode::NoThreshold, "empty census");
  auto ok = [&](double eps) {
    for (const auto& p : points) {
      const double he = 1.0 + eps * p.value;
      if (!(he > 0.0)) return false;
      // Mode condition scaled by 2 he^2 / eps, written in r = he / eps.
      const double r = 1.0 / eps + p.value;
      for (int n = 1; n <= std::max(n_max, 1); ++n)
        for (int i = 0; i < 3; ++i)
          if (!(2.0 * n * n * r * r * r - p.eigenvalues[i] > kSpectralTol * p.hessian_scale)) return false;
    }
    return true;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (ok(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return std::numeric_limits<double>::infinity();
  }
  if (lo == 0.0) {
    lo = hi;
    while (!ok(lo)) {
      hi = lo;
      lo *= 0.5;
      if (lo < 1e-300) throw Error(ErrorCode::NoThreshold, "no positive epsilon0");
    }
  }
  while (hi - lo > kThresholdRelTol * lo) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

struct ScalingRow {
  double epsilon = 0.0;
  double min_abs_eigenvalue = 0.0;
};

struct ScalingResult {
  std::vector<ScalingRow> rows;
  double slope = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;  // slope undefined
};

/// min |eigenvalue of -J| over the grid and its least-squares log-log slope.
inline ScalingResult inverse_norm_scaling(const CriticalPoint& p, const std::vector<double>& epsilons,
                                          int n_max = kDefaultModes) {
  ScalingResult r;
  for (double eps : epsilons) {
    const GeodesicOrbit o = orbit_torus(p, eps, n_max);
    r.rows.push_back({eps, o.spectrum.min_abs()});
    if (o.nullity > 0) r.degenerate = true;
  }
  if (r.degenerate || r.rows.size() < 2) {
    r.degenerate = true;
    return r;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(r.rows.size());
  for (const auto& row : r.rows) {
    const double x = std::log(row.epsilon);
    const double y = std::log(row.min_abs_eigenvalue);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  r.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return r;
}

}  // namespace ghgeo
