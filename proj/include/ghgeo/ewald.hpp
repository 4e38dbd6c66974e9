#pragma once

// Periodic Green's function of the Laplacian on a flat 3-torus and the
// torus potential h built from it, both via Ewald summation.
//
// G solves  Lap G = -2 pi (delta_0 - 1/vol),  G(x) ~ 1/(2|x|) near 0, and
// has zero mean over the cell. With screening parameter alpha:
//
//   G(x) = 1/2 sum_n erfc(alpha |x+n|)/|x+n|
//        + (2 pi / vol) sum_{k != 0} exp(-k^2 / 4 alpha^2) / k^2 cos(k.x)
//        - pi / (2 alpha^2 vol).
//
// Truncation bounds used to pick the cutoffs (per unit |charge|, with a
// safety factor of 2 for shell discreteness):
//
//   real(R)  = 2 * (2 pi / vol) * [ R e^{-a^2 R^2} / (2 a sqrt(pi))
//                                   + erfc(a R) (1/(4 a^2) - R^2/2) ]
//   recip(K) = 2 * (a / sqrt(pi)) * erfc(K / (2 a))
//
// Each is driven below half of the target error, scaled by the total |charge|.

#include <cmath>
#include <vector>

#include "ghgeo/core.hpp"
#include "ghgeo/potential.hpp"

namespace ghgeo {

struct EwaldParameters {
  double alpha = 0.0;
  double real_radius = 0.0;
  double recip_radius = 0.0;
  std::array<int, 3> real_shells{};
  std::array<int, 3> recip_shells{};
  double target_error = 1e-10;
};

namespace ewald_detail {

inline constexpr int kMaxShells = 64;

inline double real_tail(double alpha, double radius, double volume) {
  const double a = alpha, r = radius;
  const double tail = r * std::exp(-a * a * r * r) / (2.0 * a * std::sqrt(kPi)) +
                      std::erfc(a * r) * (0.25 / (a * a) - 0.5 * r * r);
  return 2.0 * (2.0 * kPi / volume) * std::max(tail, 0.0);
}

inline double recip_tail(double alpha, double k) {
  return 2.0 * (alpha / std::sqrt(kPi)) * std::erfc(k / (2.0 * alpha));
}

// Smallest x >= lo with f(x) <= target for decreasing f.
template <class F>
double solve_decreasing(F f, double lo, double target) {
  double hi = std::max(lo, 1e-3);
  int guard = 0;
  while (f(hi) > target) {
    hi *= 2.0;
    if (++guard > 200) throw Error(ErrorCode::ParameterError, "cutoff search diverged");
  }
  double a = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + hi);
    (f(mid) > target ? a : hi) = mid;
  }
  return hi;
}

}  // namespace ewald_detail

/// Default screening: sqrt(pi) * N^{1/6} / vol^{1/3} for N charges.
inline double default_alpha(const Lattice& lattice, std::size_t n_charges) {
  return std::sqrt(kPi) * std::pow(double(std::max<std::size_t>(1, n_charges)), 1.0 / 6.0) /
         std::cbrt(lattice.volume());
}

/// Cutoffs meeting `target_error` for a sum with total absolute charge
/// `abs_charge`. Throws ParameterError when more than 64 shells are needed.
inline EwaldParameters choose_ewald_parameters(const Lattice& lattice, double alpha,
                                               double abs_charge, double target_error) {
  if (!(alpha > 0.0)) throw Error(ErrorCode::ParameterError, "alpha must be positive");
  if (!(target_error > 0.0)) throw Error(ErrorCode::ParameterError, "target error must be positive");
  const double vol = lattice.volume();
  const double per = 0.5 * target_error / std::max(abs_charge, 1.0);
  EwaldParameters p;
  p.alpha = alpha;
  p.target_error = target_error;
  p.real_radius = ewald_detail::solve_decreasing(
      [&](double r) { return ewald_detail::real_tail(alpha, r, vol); }, 0.0, per);
  p.recip_radius = ewald_detail::solve_decreasing(
      [&](double k) { return ewald_detail::recip_tail(alpha, k); }, 0.0, per);
  const Mat3 inv = lattice.basis.inverse();
  const double half_diag = 0.5 * lattice.diameter();
  for (int i = 0; i < 3; ++i) {
    p.real_shells[i] = int(std::ceil((p.real_radius + half_diag) * inv.row(i).norm()));
    p.recip_shells[i] = int(std::ceil(p.recip_radius * lattice.basis.col(i).norm() / (2.0 * kPi)));
    if (p.real_shells[i] > ewald_detail::kMaxShells || p.recip_shells[i] > ewald_detail::kMaxShells)
      throw Error(ErrorCode::ParameterError, "cutoffs exceed the shell limit for this target");
  }
  return p;
}

/// Ewald sum of sum_a c_a G(x - x_a) with precomputed images and structure
/// factors. Immutable after construction; safe to share between threads.
class EwaldSum {
 public:
  EwaldSum(const Lattice& lattice, std::vector<TorusCharge> charges, EwaldParameters params,
           double exclusion_radius)
      : lattice_(lattice), params_(params), exclusion_(exclusion_radius) {
    lattice_.validate();
    inv_ = lattice_.basis.inverse();
    volume_ = lattice_.volume();
    for (const auto& c : charges) {
      positions_.push_back(lattice_.to_cartesian(c.fractional));
      charges_.push_back(c.charge);
      total_charge_ += c.charge;
      abs_charge_ += std::abs(c.charge);
    }
    const double half_diag = 0.5 * lattice_.diameter();
    const double reach = params_.real_radius + half_diag;
    const auto& rs = params_.real_shells;
    for (int a = -rs[0]; a <= rs[0]; ++a)
      for (int b = -rs[1]; b <= rs[1]; ++b)
        for (int c = -rs[2]; c <= rs[2]; ++c) {
          const Vec3 n = lattice_.basis * Vec3(a, b, c);
          if (n.norm() <= reach) images_.push_back(n);
        }
    // Half space of reciprocal vectors: first nonzero index positive.
    const Mat3 recip = 2.0 * kPi * inv_.transpose();
    const auto& ks = params_.recip_shells;
    const double kc2 = params_.recip_radius * params_.recip_radius;
    const double a2 = params_.alpha * params_.alpha;
    for (int a = 0; a <= ks[0]; ++a)
      for (int b = -ks[1]; b <= ks[1]; ++b)
        for (int c = -ks[2]; c <= ks[2]; ++c) {
          if (a == 0 && (b < 0 || (b == 0 && c <= 0))) continue;
          const Vec3 k = recip * Vec3(a, b, c);
          const double k2 = k.squaredNorm();
          if (k2 > kc2) continue;
          // Factor 2 for the +-k pair, 1/2 for the G normalization.
          const double w = (4.0 * kPi / volume_) * std::exp(-k2 / (4.0 * a2)) / k2;
          double sr = 0.0, si = 0.0;
          for (std::size_t q = 0; q < positions_.size(); ++q) {
            const double ph = k.dot(positions_[q]);
            sr += charges_[q] * std::cos(ph);
            si -= charges_[q] * std::sin(ph);
          }
          kvecs_.push_back(k);
          kweights_.push_back(w);
          struct_re_.push_back(sr);
          struct_im_.push_back(si);
        }
  }

  const EwaldParameters& parameters() const { return params_; }
  const Lattice& lattice() const { return lattice_; }
  double total_charge() const { return total_charge_; }
  std::size_t image_count() const { return images_.size(); }
  std::size_t kvector_count() const { return kvecs_.size(); }

  PotentialJet jet(const Vec3& x) const { return evaluate<2>(x); }
  PotentialJet gradient_jet(const Vec3& x) const { return evaluate<1>(x); }
  double value(const Vec3& x) const { return evaluate<0>(x).value; }

  /// Order 0: value; 1: plus gradient; 2: plus Hessian.
  template <int Order>
  PotentialJet evaluate(const Vec3& x) const {
    PotentialJet j;
    const double alpha = params_.alpha;
    const double a2 = alpha * alpha;
    const double rc2 = params_.real_radius * params_.real_radius;
    const double two_a_over_sqrtpi = 2.0 * alpha / std::sqrt(kPi);
    const Mat3 id = Mat3::Identity();
    for (std::size_t q = 0; q < positions_.size(); ++q) {
      Vec3 f = inv_ * (x - positions_[q]);
      for (int i = 0; i < 3; ++i) f[i] -= std::round(f[i]);
      const Vec3 d0 = lattice_.basis * f;
      const double c = 0.5 * charges_[q];
      double rmin = std::numeric_limits<double>::infinity();
      for (const Vec3& n : images_) {
        const Vec3 d = d0 + n;
        const double r2 = d.squaredNorm();
        if (r2 > rc2) continue;
        const double r = std::sqrt(r2);
        rmin = std::min(rmin, r);
        if (r <= exclusion_) {
          throw Error(ErrorCode::EvaluationAtSingularity, "point coincides with a torus charge");
        }
        const double erfc_ar = std::erfc(alpha * r);
        j.value += c * erfc_ar / r;
        if constexpr (Order >= 1) {
          const double gauss = two_a_over_sqrtpi * std::exp(-a2 * r2);
          const double fp = -erfc_ar / r2 - gauss / r;
          j.gradient += (c * fp / r) * d;
          if constexpr (Order >= 2) {
            const double fpp = 2.0 * erfc_ar / (r2 * r) + gauss * (2.0 / r2 + 2.0 * a2);
            const Mat3 rr = d * d.transpose() / r2;
            j.hessian += c * (fpp * rr + (fp / r) * (id - rr));
          }
        }
      }
      if (!std::isfinite(rmin)) rmin = d0.norm();
      const double rm = std::max(rmin, exclusion_);
      j.gradient_scale += std::abs(c) / (rm * rm);
      j.hessian_scale += std::sqrt(6.0) * std::abs(c) / (rm * rm * rm);
    }
    for (std::size_t i = 0; i < kvecs_.size(); ++i) {
      const Vec3& k = kvecs_[i];
      const double ph = k.dot(x);
      const double cs = std::cos(ph), sn = std::sin(ph);
      const double w = kweights_[i];
      j.value += w * (struct_re_[i] * cs - struct_im_[i] * sn);
      if constexpr (Order >= 1) {
        j.gradient += (w * (-struct_re_[i] * sn - struct_im_[i] * cs)) * k;
        if constexpr (Order >= 2)
          j.hessian += (w * (-struct_re_[i] * cs + struct_im_[i] * sn)) * (k * k.transpose());
      }
    }
    j.value -= kPi / (2.0 * a2 * volume_) * total_charge_;
    return j;
  }

 private:
  Lattice lattice_;
  EwaldParameters params_;
  double exclusion_;
  Mat3 inv_;
  double volume_ = 1.0;
  std::vector<Vec3> positions_;
  std::vector<double> charges_;
  double total_charge_ = 0.0;
  double abs_charge_ = 0.0;
  std::vector<Vec3> images_;
  std::vector<Vec3> kvecs_;
  std::vector<double> kweights_;
  std::vector<double> struct_re_;
  std::vector<double> struct_im_;
};

/// Parameters for the unit Green's function with the default screening.
inline EwaldParameters default_green_parameters(const Lattice& lattice, double target_error = 1e-10) {
  return choose_ewald_parameters(lattice, default_alpha(lattice, 1), 1.0, target_error);
}

/// G at fractional point x. Throws EvaluationAtSingularity at lattice points.
inline PotentialJet torus_green(const Lattice& lattice, const Vec3& x_fractional,
                                const EwaldParameters& params) {
  EwaldSum sum(lattice, {{Vec3::Zero(), 1.0}}, params, 1e-6 * lattice.diameter());
  return sum.jet(lattice.to_cartesian(x_fractional));
}

/// h = sum_a c_a G(x - x_a) for a balanced torus configuration.
class TorusField {
 public:
  explicit TorusField(const TorusConfiguration& config, double target_error = 1e-10,
                      double alpha = 0.0)
      : config_(config), sum_(make_sum(config, target_error, alpha)) {}

  TorusField(const TorusConfiguration& config, const EwaldParameters& params)
      : config_(config),
        sum_(EwaldSum(config.lattice, balanced_charges(config), params, config.exclusion_radius())) {}

  PotentialJet jet(const Vec3& x) const { return sum_.jet(x); }
  PotentialJet gradient_jet(const Vec3& x) const { return sum_.gradient_jet(x); }
  double value(const Vec3& x) const { return sum_.value(x); }

  PotentialJet jet_fractional(const Vec3& f) const { return jet(config_.lattice.to_cartesian(f)); }

  const TorusConfiguration& config() const { return config_; }
  const EwaldSum& sum() const { return sum_; }
  const Lattice& lattice() const { return config_.lattice; }

 private:
  static std::vector<TorusCharge> balanced_charges(const TorusConfiguration& config) {
    auto charges = config.derived_charges();
    double total = 0.0, abs_total = 0.0;
    for (const auto& c : charges) {
      total += c.charge;
      abs_total += std::abs(c.charge);
    }
    if (std::abs(total) > 1e-12 * std::max(1.0, abs_total))
      throw Error(ErrorCode::NotBalanced, "total torus charge is " + std::to_string(total));
    return charges;
  }

  static EwaldSum make_sum(const TorusConfiguration& config, double target_error, double alpha) {
    auto charges = balanced_charges(config);
    double abs_total = 0.0;
    for (const auto& c : charges) abs_total += std::abs(c.charge);
    if (!(alpha > 0.0)) alpha = default_alpha(config.lattice, charges.size());
    const auto params = choose_ewald_parameters(config.lattice, alpha, abs_total, target_error);
    return EwaldSum(config.lattice, std::move(charges), params, config.exclusion_radius());
  }

  TorusConfiguration config_;
  EwaldSum sum_;
};

/// Jet of h at a fractional point.
inline PotentialJet eval_torus(const TorusField& field, const Vec3& x_fractional) {
  return field.jet_fractional(x_fractional);
}

inline PotentialJet eval_torus(const TorusConfiguration& config, const Vec3& x_fractional,
                               double target_error = 1e-10) {
  return TorusField(config, target_error).jet_fractional(x_fractional);
}

}  // namespace ghgeo
