#pragma once

// Anti-self-dual curvature of a Gibbons-Hawking metric from the jet of its
// potential, the two closed-form oracles, and second-order stability labels.

#include <cmath>
#include <optional>
#include <vector>

#include "ghgeo/core.hpp"
#include "ghgeo/critical.hpp"
#include "ghgeo/potential.hpp"

namespace ghgeo {

struct CurvatureSample {
  Vec3 point = Vec3::Zero();
  Mat3 w = Mat3::Zero();  // -Riem^- acting on the anti-self-dual 2-forms
  double riem_norm_sq = 0.0;
  double scale = 0.0;  // uncancelled size of a W entry
  bool flat = false;
};

inline constexpr double kFlatnessTol = 1e-10;

/// W entries: diagonal (f_ii f - 2 f_i^2 + f_j^2 + f_k^2) / (2 f^3),
/// off-diagonal (f_ij f - 3 f_i f_j) / (2 f^3).
inline CurvatureSample asd_curvature(const PotentialJet& jet, const Vec3& point = Vec3::Zero(),
                                     double flatness_tol = kFlatnessTol) {
  const double f = jet.value;
  if (!(f > 0.0)) throw Error(ErrorCode::NonpositivePotential, "potential must be positive");
  const Vec3& g = jet.gradient;
  const Mat3 h = 0.5 * (jet.hessian + jet.hessian.transpose());
  const double denom = 2.0 * f * f * f;
  CurvatureSample s;
  s.point = point;
  static constexpr int next[3][2] = {{1, 2}, {2, 0}, {0, 1}};
  for (int i = 0; i < 3; ++i) {
    const int j = next[i][0];
    const int k = next[i][1];
    s.w(i, i) = (h(i, i) * f - 2.0 * g[i] * g[i] + g[j] * g[j] + g[k] * g[k]) / denom;
    s.w(i, j) = (h(i, j) * f - 3.0 * g[i] * g[j]) / denom;
    s.w(i, k) = (h(i, k) * f - 3.0 * g[i] * g[k]) / denom;
  }
  // Displayed sum: (2 / f^6) * sum over i of the three squared numerators.
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const int j = next[i][0];
    const int k = next[i][1];
    const double a = h(i, i) * f - 2.0 * g[i] * g[i] + g[j] * g[j] + g[k] * g[k];
    const double b = h(i, j) * f - 3.0 * g[i] * g[j];
    const double c = h(i, k) * f - 3.0 * g[i] * g[k];
    sum += a * a + b * b + c * c;
  }
  s.riem_norm_sq = 2.0 * sum / (f * f * f * f * f * f);
  s.scale = (jet.hessian_scale * f + 4.0 * jet.gradient_scale * jet.gradient_scale) / denom;
  s.flat = s.riem_norm_sq <= flatness_tol * 8.0 * s.scale * s.scale;
  return s;
}

/// |Riem|^2 for phi = m + 1/(2r).
inline double taubnut_closed_form(double m, double r) {
  if (!(m > 0.0) || !(r > 0.0)) throw Error(ErrorCode::DomainError, "need m > 0 and r > 0");
  const double d = 2.0 * m * r + 1.0;
  return 24.0 * m * m / std::pow(d, 6);
}

/// |Riem|^2 for phi = k1/(2 r1) + k2/(2 r2) with centers at (0, 0, +-1).
inline double eh_closed_form(double k1, double k2, const Vec3& x) {
  if (!(k1 >= 1.0) || !(k2 >= 1.0)) throw Error(ErrorCode::DomainError, "weights must be >= 1");
  const double r1 = (x - Vec3(0, 0, 1)).norm();
  const double r2 = (x - Vec3(0, 0, -1)).norm();
  if (r1 == 0.0 || r2 == 0.0) throw Error(ErrorCode::DomainError, "point on a center");
  return 96.0 * k1 * k1 * k2 * k2 / std::pow(k1 * r1 + k2 * r2, 6);
}

/// Curvature samples on a uniform n^3 grid of node points spanning `box`.
/// Nodes inside a center's exclusion radius are skipped.
template <JetField Field>
std::vector<CurvatureSample> curvature_grid(const Field& field, const Box& box, int n,
                                            unsigned threads = 0) {
  if (n < 1) throw Error(ErrorCode::ParameterError, "grid must have at least one node per axis");
  const Vec3 step = n > 1 ? Vec3(box.extent() / double(n - 1)) : Vec3::Zero();
  std::vector<std::optional<CurvatureSample>> slots(std::size_t(n) * n * n);
  parallel_for(slots.size(), resolve_threads(threads), [&](std::size_t idx) {
    const int i = int(idx / (std::size_t(n) * n));
    const int j = int((idx / n) % n);
    const int k = int(idx % n);
    const Vec3 x = box.lo + Vec3(i * step[0], j * step[1], k * step[2]);
    try {
      const PotentialJet jet = field.jet(x);
      if (jet.value > 0.0) slots[idx] = asd_curvature(jet, x);
    } catch (const Error&) {
    }
  });
  std::vector<CurvatureSample> out;
  for (auto& s : slots)
    if (s) out.push_back(*s);
  return out;
}

struct StabilityLabel {
  Vec3 location = Vec3::Zero();
  bool second_order_stable = false;
  bool not_local_max = false;
  std::optional<Vec3> witness;
  double witness_gain = 0.0;  // phi(witness) - phi(p)
  CurvatureSample curvature;
};

struct StabilityOptions {
  double witness_radius = 0.1;
  int witness_directions = 512;
  double degeneracy_tol = 1e-8;
};

/// Labels each point. Second-order stable iff every Hessian eigenvalue is
/// degenerate. A witness is a point at the given radius with larger phi.
template <JetField Field>
std::vector<StabilityLabel> second_order_stability_scan(const Field& field,
                                                        const std::vector<CriticalPoint>& points,
                                                        const StabilityOptions& opts = {}) {
  std::vector<StabilityLabel> out;
  out.reserve(points.size());
  const int n = std::max(opts.witness_directions, 6);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (const auto& p : points) {
    StabilityLabel l;
    l.location = p.location;
    const PotentialJet jet = field.jet(p.location);
    l.second_order_stable = true;
    for (int i = 0; i < 3; ++i)
      if (std::abs(p.eigenvalues[i]) > opts.degeneracy_tol * p.hessian_scale) l.second_order_stable = false;
    if (jet.value > 0.0) l.curvature = asd_curvature(jet, p.location);
    double best = 0.0;
    for (int d = 0; d < n; ++d) {
      // Fibonacci sphere directions.
      const double z = 1.0 - 2.0 * (d + 0.5) / n;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const Vec3 u(rho * std::cos(golden * d), rho * std::sin(golden * d), z);
      const Vec3 x = p.location + opts.witness_radius * u;
      double gain;
      try {
        gain = field.value(x) - jet.value;
      } catch (const Error&) {
        continue;
      }
      if (std::isfinite(gain) && gain > best) {
        best = gain;
        l.witness = x;
      }
    }
    l.not_local_max = l.witness.has_value();
    l.witness_gain = best;
    out.push_back(l);
  }
  return out;
}

}  // namespace ghgeo
