#pragma once

// Multi-center harmonic potentials on R^3 and the configuration types for
// both the Euclidean and the periodic (torus) settings.

#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "ghgeo/core.hpp"

namespace ghgeo {

// ---------------------------------------------------------------------------
// Euclidean configurations
// ---------------------------------------------------------------------------

/// Point charges P_i with weights k_i plus the constant (ALF) mass term m.
/// phi(x) = m + sum_i k_i / (2 |x - P_i|).
struct ChargeConfiguration {
  std::vector<Vec3> centers;
  std::vector<double> weights;
  double mass = 0.0;
  /// Real (possibly negative) charges allowed; never used for metric claims.
  bool exploratory = false;

  static ChargeConfiguration make(std::vector<Vec3> centers, std::vector<int> weights,
                                  double mass) {
    ChargeConfiguration c;
    c.centers = std::move(centers);
    c.weights.assign(weights.begin(), weights.end());
    c.mass = mass;
    c.validate();
    return c;
  }

  static ChargeConfiguration unit(std::vector<Vec3> centers, double mass) {
    std::vector<int> w(centers.size(), 1);
    return make(std::move(centers), std::move(w), mass);
  }

  static ChargeConfiguration exploratory_charges(std::vector<Vec3> centers,
                                                 std::vector<double> charges, double mass) {
    ChargeConfiguration c;
    c.centers = std::move(centers);
    c.weights = std::move(charges);
    c.mass = mass;
    c.exploratory = true;
    c.validate();
    return c;
  }

  std::size_t size() const { return centers.size(); }

  double diameter() const {
    double d = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i)
      for (std::size_t j = i + 1; j < centers.size(); ++j)
        d = std::max(d, (centers[i] - centers[j]).norm());
    return d;
  }

  double min_separation() const {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < centers.size(); ++i)
      for (std::size_t j = i + 1; j < centers.size(); ++j)
        d = std::min(d, (centers[i] - centers[j]).norm());
    return d;
  }

  /// Unit length for a single center, the diameter otherwise.
  double length_scale() const {
    const double d = diameter();
    return d > 0.0 ? d : 1.0;
  }

  double exclusion_radius() const { return 1e-6 * length_scale(); }

  bool all_positive() const {
    return std::all_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; });
  }

  void validate() const {
    if (centers.empty())
      throw Error(ErrorCode::InvalidConfiguration, "at least one center is required");
    if (centers.size() != weights.size())
      throw Error(ErrorCode::InvalidConfiguration, "centers and weights differ in length");
    for (const auto& p : centers)
      if (!p.allFinite()) throw Error(ErrorCode::InvalidConfiguration, "non-finite center");
    if (!(mass >= 0.0) && !exploratory)
      throw Error(ErrorCode::InvalidConfiguration, "mass must be non-negative");
    if (!exploratory) {
      for (double w : weights)
        if (!(w >= 1.0) || w != std::floor(w))
          throw Error(ErrorCode::InvalidConfiguration, "weights must be positive integers");
    }
    if (centers.size() > 1 && !(min_separation() > 0.0))
      throw Error(ErrorCode::InvalidConfiguration, "centers must be pairwise distinct");
  }
};

/// Exact jet of phi. Throws EvaluationAtSingularity within the exclusion radius.
inline PotentialJet eval_euclidean(const ChargeConfiguration& config, const Vec3& x) {
  PotentialJet j;
  j.value = config.mass;
  const double excl = config.exclusion_radius();
  const Mat3 id = Mat3::Identity();
  for (std::size_t a = 0; a < config.size(); ++a) {
    const Vec3 d = x - config.centers[a];
    const double r = d.norm();
    if (r <= excl) {
      std::ostringstream os;
      os << "point within " << excl << " of center " << a;
      throw Error(ErrorCode::EvaluationAtSingularity, os.str());
    }
    const double w = config.weights[a];
    const double r2 = r * r;
    const double r3 = r2 * r;
    j.value += 0.5 * w / r;
    j.gradient -= (0.5 * w / r3) * d;
    j.hessian += (0.5 * w / r3) * (3.0 * d * d.transpose() / r2 - id);
    j.gradient_scale += 0.5 * std::abs(w) / r2;
    j.hessian_scale += std::sqrt(6.0) * 0.5 * std::abs(w) / r3;
  }
  return j;
}

inline double value_euclidean(const ChargeConfiguration& config, const Vec3& x) {
  double v = config.mass;
  for (std::size_t a = 0; a < config.size(); ++a)
    v += 0.5 * config.weights[a] / (x - config.centers[a]).norm();
  return v;
}

/// JetField adaptor for a Euclidean configuration.
class EuclideanField {
 public:
  explicit EuclideanField(ChargeConfiguration config) : config_(std::move(config)) {}
  PotentialJet jet(const Vec3& x) const { return eval_euclidean(config_, x); }
  double value(const Vec3& x) const { return value_euclidean(config_, x); }
  const ChargeConfiguration& config() const { return config_; }

 private:
  ChargeConfiguration config_;
};

// ---------------------------------------------------------------------------
// Torus configurations
// ---------------------------------------------------------------------------

/// Lattice with generators stored as the columns of `basis`.
struct Lattice {
  Mat3 basis = Mat3::Identity();

  static Lattice cubic(double side) { return Lattice{side * Mat3::Identity()}; }

  double volume() const { return std::abs(basis.determinant()); }
  Vec3 to_cartesian(const Vec3& frac) const { return basis * frac; }
  Vec3 to_fractional(const Vec3& cart) const { return basis.inverse() * cart; }
  Vec3 vector(int i) const { return basis.col(i); }

  /// Longest of the four cell body diagonals.
  double diameter() const {
    double d = 0.0;
    for (int s1 : {-1, 1})
      for (int s2 : {-1, 1})
        d = std::max(d, (basis.col(0) + s1 * basis.col(1) + s2 * basis.col(2)).norm());
    return d;
  }

  /// Cartesian length of the shortest representative of `cart` mod lattice.
  double min_image_norm(const Vec3& cart) const {
    Vec3 f = to_fractional(cart);
    for (int i = 0; i < 3; ++i) f[i] -= std::round(f[i]);
    double best = std::numeric_limits<double>::infinity();
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b)
        for (int c = -1; c <= 1; ++c)
          best = std::min(best, (basis * (f + Vec3(a, b, c))).norm());
    return best;
  }

  void validate() const {
    if (!basis.allFinite() || !(volume() > 1e-300))
      throw Error(ErrorCode::InvalidConfiguration, "lattice vectors must be independent");
  }
};

/// Reduces fractional coordinates into [0, 1).
inline Vec3 wrap_fractional(Vec3 f) {
  for (int i = 0; i < 3; ++i) {
    f[i] -= std::floor(f[i]);
    if (f[i] >= 1.0) f[i] = 0.0;
  }
  return f;
}

/// The eight points q_j with 2q_j in the lattice, index j = 4a + 2b + c for
/// fractional coordinates (a/2, b/2, c/2).
inline std::array<Vec3, 8> half_lattice_points() {
  std::array<Vec3, 8> q;
  for (int j = 0; j < 8; ++j) q[j] = Vec3(0.5 * ((j >> 2) & 1), 0.5 * ((j >> 1) & 1), 0.5 * (j & 1));
  return q;
}

struct TorusCharge {
  Vec3 fractional;
  double charge;
};

/// Free points p_i (fractional) with weights k_i and fixed weights m_j at the
/// half-lattice points. The derived charges are +k_i at p_i and at -p_i and
/// (2 m_j - 4) at q_j.
struct TorusConfiguration {
  Lattice lattice;
  std::vector<Vec3> free_points;
  std::vector<int> free_weights;
  std::array<int, 8> fixed_weights{};
  /// Explicit charge list replacing the derived one (exploratory mode).
  std::vector<TorusCharge> explicit_charges;
  bool exploratory = false;

  static TorusConfiguration make(Lattice lattice, std::vector<Vec3> free_points,
                                 std::vector<int> free_weights,
                                 std::array<int, 8> fixed_weights) {
    TorusConfiguration t;
    t.lattice = lattice;
    t.free_points = std::move(free_points);
    t.free_weights = std::move(free_weights);
    t.fixed_weights = fixed_weights;
    t.validate();
    return t;
  }

  /// Arbitrary real charges at arbitrary points; never balanced.
  static TorusConfiguration exploratory_charges(Lattice lattice, std::vector<TorusCharge> charges) {
    TorusConfiguration t;
    t.lattice = lattice;
    t.explicit_charges = std::move(charges);
    t.exploratory = true;
    t.validate();
    return t;
  }

  std::size_t n() const { return free_points.size(); }

  int weight_sum() const {
    int s = 0;
    for (int k : free_weights) s += k;
    for (int m : fixed_weights) s += m;
    return s;
  }

  bool foscolo_admissible() const { return !exploratory && weight_sum() == 16; }

  std::vector<TorusCharge> derived_charges() const {
    if (exploratory) return explicit_charges;
    std::vector<TorusCharge> out;
    for (std::size_t i = 0; i < free_points.size(); ++i) {
      out.push_back({wrap_fractional(free_points[i]), double(free_weights[i])});
      out.push_back({wrap_fractional(-free_points[i]), double(free_weights[i])});
    }
    const auto q = half_lattice_points();
    for (int j = 0; j < 8; ++j) {
      const double c = 2.0 * fixed_weights[j] - 4.0;
      if (c != 0.0) out.push_back({q[j], c});
    }
    return out;
  }

  double total_charge() const {
    double s = 0.0;
    for (const auto& c : derived_charges()) s += c.charge;
    return s;
  }

  double exclusion_radius() const { return 1e-6 * lattice.diameter(); }

  void validate() const {
    lattice.validate();
    const double tol = 1e-12;
    auto same = [&](const Vec3& a, const Vec3& b) {
      Vec3 d = a - b;
      for (int i = 0; i < 3; ++i) d[i] -= std::round(d[i]);
      return d.cwiseAbs().maxCoeff() < tol;
    };
    if (exploratory) {
      for (std::size_t i = 0; i < explicit_charges.size(); ++i)
        for (std::size_t j = i + 1; j < explicit_charges.size(); ++j)
          if (same(explicit_charges[i].fractional, explicit_charges[j].fractional))
            throw Error(ErrorCode::InvalidConfiguration, "charges must be at distinct points");
      return;
    }
    if (free_points.size() != free_weights.size())
      throw Error(ErrorCode::InvalidConfiguration, "free points and weights differ in length");
    for (int k : free_weights)
      if (k < 1) throw Error(ErrorCode::InvalidConfiguration, "free weights must be >= 1");
    for (int m : fixed_weights)
      if (m < 0) throw Error(ErrorCode::InvalidConfiguration, "fixed weights must be >= 0");
    const auto q = half_lattice_points();
    for (std::size_t i = 0; i < free_points.size(); ++i) {
      for (const auto& qj : q)
        if (same(free_points[i], qj))
          throw Error(ErrorCode::InvalidConfiguration, "free point on a half-lattice point");
      for (std::size_t j = i + 1; j < free_points.size(); ++j)
        if (same(free_points[i], free_points[j]) || same(free_points[i], -free_points[j]))
          throw Error(ErrorCode::InvalidConfiguration, "free points must satisfy p_i != +-p_j");
    }
  }
};

}  // namespace ghgeo
