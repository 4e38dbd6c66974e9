#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "ghgeo/critical.hpp"
#include "ghgeo/ewald.hpp"
#include "ghgeo/scenarios.hpp"

using namespace ghgeo;

namespace {

bool same_set(const std::vector<CriticalPoint>& a, const std::vector<Vec3>& b, double tol) {
  if (a.size() != b.size()) return false;
  for (const auto& p : a) {
    bool hit = false;
    for (const auto& q : b) hit = hit || (p.location - q).norm() <= tol;
    if (!hit) return false;
  }
  return true;
}

}  // namespace

TEST(FindCriticalPoints, ThreeCollinearCharges) {
  const auto cfg = ChargeConfiguration::unit({{0, 0, -1}, {0, 0, 0}, {0, 0, 1}}, 1.0);
  const auto c = find_critical_points(cfg);
  ASSERT_EQ(c.points.size(), 2u);
  int below = 0, above = 0;
  for (const auto& p : c.points) {
    EXPECT_LT(p.location.head<2>().norm(), 1e-8);
    below += p.location.z() > -1 && p.location.z() < 0;
    above += p.location.z() > 0 && p.location.z() < 1;
  }
  EXPECT_EQ(below, 1);
  EXPECT_EQ(above, 1);
}

TEST(FindCriticalPoints, Triangle) {
  const auto cfg = triangle(1.0, 1.0).euclidean();
  const auto c = find_critical_points(cfg);
  ASSERT_EQ(c.points.size(), 4u);
  std::array<int, 4> idx{};
  for (const auto& p : c.points) {
    ++idx[p.morse_index];
    EXPECT_LT(p.gradient_residual, 1e-10);
    if (p.morse_index == 1) EXPECT_LT(p.location.norm(), 1e-10);
  }
  EXPECT_EQ(idx[1], 1);
  EXPECT_EQ(idx[2], 3);
}

TEST(FindCriticalPoints, SingleChargeHasNone) {
  EXPECT_TRUE(find_critical_points(ChargeConfiguration::unit({Vec3::Zero()}, 1.0)).points.empty());
}

TEST(FindCriticalPoints, RejectsCoarseGrid) {
  SearchOptions o;
  o.grid_resolution = 4;
  EXPECT_THROW(find_critical_points(triangle().euclidean(), o), Error);
}

TEST(OracleCensus, TriangleOneCellPerPoint) {
  const auto cfg = triangle(1.0, 1.0).euclidean();
  const auto c = find_critical_points(cfg);
  const auto o = oracle_census(cfg, 128);
  EXPECT_EQ(o.cells.size(), 4u);
  const auto a = compare_with_oracle(c.points, o, false);
  EXPECT_TRUE(a.one_to_one);
  EXPECT_EQ(a.matched, 4u);
}

TEST(OracleCensus, PairHasOneCellAtOrigin) {
  const auto cfg = ChargeConfiguration::unit({{0, 0, 1}, {0, 0, -1}}, 0.0);
  const auto o = oracle_census(cfg, 64);
  ASSERT_EQ(o.cells.size(), 1u);
  EXPECT_TRUE((Box{o.cells.front().lo, o.cells.front().hi}.contains(Vec3::Zero())));
}

TEST(OracleCensus, ResolutionBounds) {
  const auto cfg = triangle().euclidean();
  EXPECT_THROW(oracle_census(cfg, 4), Error);
  EXPECT_THROW(oracle_census(cfg, 512), Error);
}

TEST(OracleCensus, DodecahedronBeyondTwelveCharges) {
  const auto cfg = platonic("dodecahedron").euclidean();
  const auto c = find_critical_points(cfg);
  const auto a = compare_with_oracle(c.points, oracle_census(cfg, 128), false);
  EXPECT_EQ(c.points.size(), 31u);
  EXPECT_TRUE(a.one_to_one);
}

// Frozen: the brute-force oracle and the Newton census agree on 48 points.
TEST(OracleCensus, CubeTorusFrozenCount) {
  const TorusField field(cube_torus().torus_config());
  const auto c = find_critical_points(field);
  EXPECT_EQ(c.points.size(), 48u);
  const auto o = oracle_census(field, 96);
  EXPECT_EQ(o.cells.size(), 48u);
  EXPECT_TRUE(compare_with_oracle(c.points, o, true).one_to_one);
  std::array<int, 4> idx{};
  for (const auto& p : c.points) {
    EXPECT_FALSE(p.degenerate);
    ++idx[p.morse_index];
  }
  EXPECT_EQ(idx[1], 24);
  EXPECT_EQ(idx[2], 24);
}

TEST(FindCriticalPoints, NoExtremaProperty) {
  gen::Rng rng(41);
  for (int trial = 0; trial < 40; ++trial) {
    const auto cfg = rng.euclidean(rng.integer(2, 6), 1.0, rng.uniform(0, 2), 3);
    for (const auto& p : find_critical_points(cfg).points)
      if (!p.degenerate) EXPECT_TRUE(p.morse_index == 1 || p.morse_index == 2);
  }
}

TEST(FindCriticalPoints, SymmetryEquivariance) {
  const Mat3 rot = Eigen::AngleAxisd(2.0 * kPi / 3.0, Vec3::UnitZ()).toRotationMatrix();
  const Mat3 mirror = Vec3(-1, 1, 1).asDiagonal();
  const auto tri = find_critical_points(triangle().euclidean());
  for (const Mat3& g : {rot, mirror}) {
    std::vector<Vec3> image;
    for (const auto& p : tri.points) image.push_back(g * p.location);
    EXPECT_TRUE(same_set(tri.points, image, 1e-6));
  }
  const Mat3 quarter = Eigen::AngleAxisd(kPi / 2.0, Vec3::UnitZ()).toRotationMatrix();
  const auto sq = find_critical_points(square().euclidean());
  std::vector<Vec3> image;
  for (const auto& p : sq.points) image.push_back(quarter * p.location);
  EXPECT_TRUE(same_set(sq.points, image, 1e-6));
}

TEST(FindCriticalPoints, Determinism) {
  const auto cfg = nested_triangles().euclidean();
  SearchOptions one;
  one.threads = 1;
  SearchOptions many;
  many.threads = 4;
  const auto a = find_critical_points(cfg, one);
  const auto b = find_critical_points(cfg, many);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].location, b.points[i].location);
    EXPECT_EQ(a.points[i].eigenvalues, b.points[i].eigenvalues);
  }
}

TEST(FindCriticalPoints, TorusParityAndQuotient) {
  const TorusField field(cube_torus().torus_config());
  const Lattice& lat = field.lattice();
  const auto c = find_critical_points(field);
  for (const auto& p : c.points) {
    bool partner = false;
    for (const auto& q : c.points) partner = partner || lat.min_image_norm(p.location + q.location) < 1e-6;
    EXPECT_TRUE(partner);
    for (const auto& h : half_lattice_points())
      EXPECT_GT(lat.min_image_norm(p.location - lat.to_cartesian(h)), 1e-3);
  }
  SearchOptions q;
  q.quotient = true;
  EXPECT_EQ(find_critical_points(field, q).points.size() * 2, c.points.size());
}

TEST(FindCriticalPoints, SquareTorusInPlane) {
  const TorusField field(square_torus_2d().torus_config());
  int in_plane = 0;
  for (const auto& p : find_critical_points(field).points)
    in_plane += std::abs((*p.fractional)[2] - std::round((*p.fractional)[2])) < 1e-6;
  EXPECT_EQ(in_plane, 8);
}

TEST(MorseAudit, Examples) {
  const auto a = morse_audit_counts(4, 8, 11, 11, 8);
  EXPECT_EQ(a.euler_sum, 0);
  EXPECT_TRUE(a.bound1_satisfied);
  EXPECT_TRUE(a.bound2_satisfied);
  EXPECT_FALSE(morse_audit_counts(1, 2, 9, 4, 2).bound1_satisfied);
  const auto b = morse_audit_counts(16, 8, 10, 34, 32);
  EXPECT_EQ(b.euler_sum, 0);
  EXPECT_TRUE(b.bound1_satisfied);
  EXPECT_TRUE(b.bound2_satisfied);
  EXPECT_TRUE(morse_audit_counts(1, 0, 10, 4, 1).euler_mismatch);
}

TEST(MorseAudit, CubeTorusCensus) {
  const auto t = cube_torus().torus_config();
  const auto c = find_critical_points(TorusField(t));
  const auto a = morse_audit(c.points, t);
  EXPECT_EQ(a.n, 4);
  EXPECT_EQ(a.nu[0], 8);
  EXPECT_EQ(a.nu[3], 8);
  EXPECT_EQ(a.euler_sum, 0);
  EXPECT_TRUE(a.bound1_satisfied);
  EXPECT_TRUE(a.bound2_satisfied);
}

TEST(MorseAudit, RejectsDegenerateCensus) {
  CriticalPoint p;
  p.degenerate = true;
  try {
    morse_audit({p}, cube_torus().torus_config());
    FAIL() << "expected DegeneratePresent";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegeneratePresent);
  }
}

TEST(MaxwellAudit, Examples) {
  EXPECT_EQ(maxwell_audit(3, 4).bound, 4);
  EXPECT_TRUE(maxwell_audit(3, 4).satisfied);
  EXPECT_TRUE(maxwell_audit(2, 1).satisfied);
  EXPECT_EQ(maxwell_audit(9, 16).bound, 64);
  EXPECT_FALSE(maxwell_audit(2, 2).satisfied);
  EXPECT_THROW(maxwell_audit(1, 0), Error);
}

TEST(MaxwellAudit, RandomConfigurations) {
  gen::Rng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const int l = rng.integer(2, 6);
    const auto cfg = rng.euclidean(l, 1.0, rng.uniform(0, 1));
    EXPECT_TRUE(maxwell_audit(l, int(find_critical_points(cfg).points.size())).satisfied);
  }
}
