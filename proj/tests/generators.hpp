#pragma once

// Seeded generators for the property suites.

#include <cstdint>
#include <random>
#include <vector>

#include "ghgeo/potential.hpp"

namespace gen {

struct Rng {
  std::mt19937_64 engine;
  explicit Rng(std::uint64_t seed) : engine(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine); }

  ghgeo::Vec3 point(double half) { return {uniform(-half, half), uniform(-half, half), uniform(-half, half)}; }
  ghgeo::Vec3 fractional() { return {uniform(0, 1), uniform(0, 1), uniform(0, 1)}; }

  ghgeo::Vec3 direction() {
    std::normal_distribution<double> n;
    ghgeo::Vec3 v(n(engine), n(engine), n(engine));
    return v.normalized();
  }

  ghgeo::Mat3 rotation() {
    std::normal_distribution<double> n;
    Eigen::Quaterniond q(n(engine), n(engine), n(engine), n(engine));
    return q.normalized().toRotationMatrix();
  }

  /// k unit-or-heavier charges in [-half, half]^3 with pairwise distance >= sep.
  ghgeo::ChargeConfiguration euclidean(int k, double half, double mass, int max_weight = 1, double sep = 0.2) {
    std::vector<ghgeo::Vec3> c;
    while (int(c.size()) < k) {
      const ghgeo::Vec3 p = point(half);
      bool ok = true;
      for (const auto& q : c) ok = ok && (p - q).norm() >= sep;
      if (ok) c.push_back(p);
    }
    std::vector<int> w;
    for (int i = 0; i < k; ++i) w.push_back(integer(1, max_weight));
    return ghgeo::ChargeConfiguration::make(c, w, mass);
  }

  /// Point at least `clearance` from every center.
  ghgeo::Vec3 away_from(const ghgeo::ChargeConfiguration& cfg, double half, double clearance) {
    for (;;) {
      const ghgeo::Vec3 p = point(half);
      bool ok = true;
      for (const auto& c : cfg.centers) ok = ok && (p - c).norm() >= clearance;
      if (ok) return p;
    }
  }
};

}  // namespace gen
