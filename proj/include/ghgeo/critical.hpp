#pragma once

// Critical points (electrostatic equilibria) of phi on R^3 and of h on a
// flat 3-torus: multistart damped Newton search, an independent brute-force
// grid oracle, and the Morse / Maxwell counting audits.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <numeric>
#include <vector>

#include "ghgeo/core.hpp"
#include "ghgeo/ewald.hpp"
#include "ghgeo/potential.hpp"

namespace ghgeo {

struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();
  bool contains(const Vec3& x, double pad = 0.0) const {
    return (x.array() >= lo.array() - pad).all() && (x.array() <= hi.array() + pad).all();
  }
  Vec3 extent() const { return hi - lo; }
};

struct SearchOptions {
  int grid_resolution = 16;       // seeds per axis over the search box
  int local_resolution = 4;       // seeds per axis in a box around each charge
  double newton_tol = 1e-12;      // relative to the local gradient scale
  int max_newton_steps = 200;
  double dedup_radius = 0.0;      // 0: 1e-6 x configuration diameter
  double degeneracy_tol = 1e-8;   // relative to the local Hessian scale
  std::optional<Box> search_box;  // Euclidean only
  bool quotient = false;          // torus: identify x with -x
  unsigned threads = 0;

  void validate() const {
    if (grid_resolution < 8) throw Error(ErrorCode::ParameterError, "grid resolution must be >= 8");
    if (!(newton_tol > 0.0) || !(degeneracy_tol > 0.0) || dedup_radius < 0.0 || max_newton_steps < 1)
      throw Error(ErrorCode::ParameterError, "tolerances must be positive");
  }
};

struct CriticalPoint {
  Vec3 location = Vec3::Zero();             // Cartesian
  std::optional<Vec3> fractional;           // torus only, in [0,1)^3
  double value = 0.0;
  double gradient_residual = 0.0;
  double gradient_scale = 0.0;
  double hessian_scale = 0.0;
  Mat3 hessian = Mat3::Zero();
  Vec3 eigenvalues = Vec3::Zero();          // ascending
  Mat3 eigenvectors = Mat3::Identity();     // columns match eigenvalues
  int morse_index = 0;
  int positive_count = 0;
  int degenerate_count = 0;
  bool degenerate = false;
};

struct SeedDiagnostics {
  std::size_t seeds = 0;
  std::size_t converged = 0;
  std::size_t nonconverged = 0;
  std::size_t duplicates = 0;
};

struct Census {
  std::vector<CriticalPoint> points;
  SeedDiagnostics diagnostics;
};

/// Fills eigen data, Morse index and degeneracy flags from the jet.
inline CriticalPoint classify(const Vec3& x, const PotentialJet& jet, double degeneracy_tol) {
  CriticalPoint p;
  p.location = x;
  p.value = jet.value;
  p.gradient_residual = jet.gradient.norm();
  p.gradient_scale = jet.gradient_scale;
  p.hessian_scale = jet.hessian_scale;
  p.hessian = 0.5 * (jet.hessian + jet.hessian.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> es(p.hessian);
  p.eigenvalues = es.eigenvalues();
  p.eigenvectors = es.eigenvectors();
  const double tol = degeneracy_tol * jet.hessian_scale;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(p.eigenvalues[i]) <= tol) ++p.degenerate_count;
    else if (p.eigenvalues[i] < 0.0) ++p.morse_index;
    else ++p.positive_count;
  }
  p.degenerate = p.degenerate_count > 0;
  return p;
}

namespace critical_detail {

/// Damped Newton (Levenberg-Marquardt on the gradient residual). `wrap`
/// maps iterates back to a canonical domain; `admissible` rejects escapes.
template <class Field, class Wrap, class Admissible>
std::optional<std::pair<Vec3, PotentialJet>> polish(const Field& field, Vec3 x,
                                                    const SearchOptions& opts, Wrap wrap,
                                                    Admissible admissible) {
  PotentialJet j;
  try {
    j = field.jet(x);
  } catch (const Error&) {
    return std::nullopt;
  }
  // Plain Newton steps past the tolerance while the residual keeps falling.
  // Near a degenerate point this pulls iterates from a spread-out cloud onto
  // one location so that deduplication can merge them.
  auto refine = [&](int budget) {
    for (int step = 0; step < budget; ++step) {
      const Vec3 delta = j.hessian.fullPivLu().solve(-j.gradient);
      if (!delta.allFinite()) break;
      const Vec3 xt = wrap(Vec3(x + delta));
      if (!admissible(xt)) break;
      PotentialJet jt;
      try {
        jt = field.jet(xt);
      } catch (const Error&) {
        break;
      }
      if (!(jt.gradient.norm() < j.gradient.norm())) break;
      x = xt;
      j = jt;
    }
    return std::make_pair(x, j);
  };
  double lambda = 1e-4;
  for (int step = 0; step < opts.max_newton_steps; ++step) {
    const double res = j.gradient.norm();
    if (res <= opts.newton_tol * j.gradient_scale) return refine(opts.max_newton_steps - step);
    const Mat3 h = j.hessian;
    const double s2 = j.hessian_scale * j.hessian_scale;
    const double max_step = 1.2 * j.gradient_scale / std::max(j.hessian_scale, 1e-300);
    bool accepted = false;
    while (lambda < 1e12) {
      const Mat3 a = h * h + lambda * s2 * Mat3::Identity();
      Vec3 delta = a.ldlt().solve(-(h * j.gradient));
      if (!delta.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      const double len = delta.norm();
      if (len > max_step) delta *= max_step / len;
      const Vec3 xt = wrap(Vec3(x + delta));
      if (!admissible(xt)) return std::nullopt;
      PotentialJet jt;
      try {
        jt = field.jet(xt);
      } catch (const Error&) {
        lambda *= 10.0;
        continue;
      }
      if (jt.gradient.norm() < res) {
        x = xt;
        j = jt;
        lambda = std::max(lambda * 0.1, 1e-16);
        accepted = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) break;
  }
  if (j.gradient.norm() <= opts.newton_tol * j.gradient_scale) return refine(opts.max_newton_steps);
  return std::nullopt;
}

// Flatness of a degenerate point: largest |eigenvalue| against the local scale.
inline double flatness(const CriticalPoint& p) {
  return p.eigenvalues.cwiseAbs().maxCoeff() / std::max(p.hessian_scale, 1e-300);
}

// Adds `cp` unless it repeats a census point. Two degenerate points merge
// within `degenerate_radius` and the flatter one is kept, since Newton only
// converges sublinearly onto a degenerate point and leaves a cloud.
template <class Distance>
void merge_into(Census& census, const CriticalPoint& cp, Distance distance, double radius,
                double degenerate_radius) {
  for (auto& q : census.points) {
    const bool both = q.degenerate && cp.degenerate;
    if (distance(q.location, cp.location) <= (both ? degenerate_radius : radius)) {
      ++census.diagnostics.duplicates;
      if (both && flatness(cp) < flatness(q)) q = cp;
      return;
    }
  }
  census.points.push_back(cp);
}

inline bool location_less(const CriticalPoint& a, const CriticalPoint& b) {
  if (a.value != b.value) return a.value < b.value;
  const Vec3& la = a.fractional ? *a.fractional : a.location;
  const Vec3& lb = b.fractional ? *b.fractional : b.location;
  return std::lexicographical_compare(la.data(), la.data() + 3, lb.data(), lb.data() + 3);
}

}  // namespace critical_detail

/// Hull bounding box padded by one diameter (unit padding for one center).
inline Box default_search_box(const ChargeConfiguration& config) {
  Box b{config.centers.front(), config.centers.front()};
  for (const auto& p : config.centers) {
    b.lo = b.lo.cwiseMin(p);
    b.hi = b.hi.cwiseMax(p);
  }
  const double pad = config.length_scale();
  b.lo.array() -= pad;
  b.hi.array() += pad;
  return b;
}

/// Seeds: uniform grid over the box, midpoints of charge pairs, centroids of
/// nearby triples, and a small grid around each charge sized by its
/// nearest-neighbour distance.
inline std::vector<Vec3> euclidean_seeds(const ChargeConfiguration& config, const Box& box,
                                         const SearchOptions& opts) {
  std::vector<Vec3> seeds;
  const int r = opts.grid_resolution;
  const Vec3 h = box.extent() / double(r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k)
        seeds.push_back(box.lo + Vec3((i + 0.5) * h[0], (j + 0.5) * h[1], (k + 0.5) * h[2]));
  const std::size_t n = config.size();
  for (std::size_t a = 0; a < n; ++a) {
    // Nearest neighbours first; all pairs for small configurations.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t u, std::size_t v) {
      return (config.centers[u] - config.centers[a]).norm() <
             (config.centers[v] - config.centers[a]).norm();
    });
    const std::size_t limit = n <= 64 ? n : std::min<std::size_t>(n, 8);
    for (std::size_t t = 1; t < limit; ++t) {
      const std::size_t b = order[t];
      if (n <= 64 && b < a) continue;
      seeds.push_back(0.5 * (config.centers[a] + config.centers[b]));
    }
    const std::size_t near = std::min<std::size_t>(n, 7);
    for (std::size_t t = 1; t < near; ++t)
      for (std::size_t u = t + 1; u < near; ++u)
        seeds.push_back((config.centers[a] + config.centers[order[t]] + config.centers[order[u]]) / 3.0);
    if (n > 1 && opts.local_resolution > 0) {
      const double nn = (config.centers[order[1]] - config.centers[a]).norm();
      const int l = opts.local_resolution;
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j)
          for (int k = 0; k < l; ++k) {
            const Vec3 u((i + 0.5) / l - 0.5, (j + 0.5) / l - 0.5, (k + 0.5) / l - 0.5);
            seeds.push_back(config.centers[a] + 2.0 * nn * u);
          }
    }
  }
  return seeds;
}

/// Critical points of phi. Non-converged seeds are counted in diagnostics.
inline Census find_critical_points(const ChargeConfiguration& config, const SearchOptions& opts = {}) {
  opts.validate();
  config.validate();
  const Box box = opts.search_box ? *opts.search_box : default_search_box(config);
  const double dedup = opts.dedup_radius > 0.0 ? opts.dedup_radius : 1e-6 * config.length_scale();
  const double degenerate_merge =
      std::max(dedup, 1e-2 * (config.size() > 1 ? config.min_separation() : config.length_scale()));
  const auto seeds = euclidean_seeds(config, box, opts);
  const EuclideanField field(config);
  const double escape = box.extent().maxCoeff();

  std::vector<std::optional<std::pair<Vec3, PotentialJet>>> results(seeds.size());
  parallel_for(seeds.size(), resolve_threads(opts.threads), [&](std::size_t i) {
    results[i] = critical_detail::polish(
        field, seeds[i], opts, [](const Vec3& x) { return x; },
        [&](const Vec3& x) { return box.contains(x, escape); });
  });

  Census census;
  census.diagnostics.seeds = seeds.size();
  for (const auto& r : results) {
    if (!r) {
      ++census.diagnostics.nonconverged;
      continue;
    }
    ++census.diagnostics.converged;
    const Vec3& x = r->first;
    if (!box.contains(x)) {
      ++census.diagnostics.nonconverged;
      continue;
    }
    critical_detail::merge_into(
        census, classify(x, r->second, opts.degeneracy_tol),
        [](const Vec3& a, const Vec3& b) { return (a - b).norm(); }, dedup, degenerate_merge);
  }
  std::sort(census.points.begin(), census.points.end(), critical_detail::location_less);
  return census;
}

/// Critical points of h on the torus; locations are wrapped into the cell.
inline Census find_critical_points(const TorusField& field, const SearchOptions& opts = {}) {
  opts.validate();
  const Lattice& lat = field.lattice();
  const Mat3 inv = lat.basis.inverse();
  const double dedup = opts.dedup_radius > 0.0 ? opts.dedup_radius : 1e-6 * lat.diameter();
  const auto charges = field.config().derived_charges();
  double min_sep = lat.diameter();
  for (std::size_t a = 0; a < charges.size(); ++a)
    for (std::size_t b = a + 1; b < charges.size(); ++b)
      min_sep = std::min(min_sep, lat.min_image_norm(lat.to_cartesian(charges[a].fractional - charges[b].fractional)));
  const double degenerate_merge = std::max(dedup, 1e-2 * min_sep);

  std::vector<Vec3> seeds;  // fractional
  const int r = opts.grid_resolution;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k) seeds.push_back(Vec3((i + 0.5) / r, (j + 0.5) / r, (k + 0.5) / r));
  if (opts.local_resolution > 0) {
    for (std::size_t a = 0; a < charges.size(); ++a) {
      double nn = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < charges.size(); ++b)
        if (b != a)
          nn = std::min(nn, lat.min_image_norm(lat.to_cartesian(charges[a].fractional - charges[b].fractional)));
      if (!std::isfinite(nn)) nn = 0.25 * lat.diameter();
      const int l = opts.local_resolution;
      for (int i = 0; i < l; ++i)
        for (int j = 0; j < l; ++j)
          for (int k = 0; k < l; ++k) {
            const Vec3 u((i + 0.5) / l - 0.5, (j + 0.5) / l - 0.5, (k + 0.5) / l - 0.5);
            seeds.push_back(wrap_fractional(charges[a].fractional + inv * (nn * u)));
          }
    }
  }
  auto wrap = [&](const Vec3& x) { return Vec3(lat.basis * wrap_fractional(inv * x)); };

  std::vector<std::optional<std::pair<Vec3, PotentialJet>>> results(seeds.size());
  parallel_for(seeds.size(), resolve_threads(opts.threads), [&](std::size_t i) {
    results[i] = critical_detail::polish(field, lat.to_cartesian(seeds[i]), opts, wrap,
                                         [](const Vec3&) { return true; });
  });

  auto distance = [&](const Vec3& a, const Vec3& b) {
    const double d = lat.min_image_norm(a - b);
    return opts.quotient ? std::min(d, lat.min_image_norm(a + b)) : d;
  };
  Census census;
  census.diagnostics.seeds = seeds.size();
  for (const auto& res : results) {
    if (!res) {
      ++census.diagnostics.nonconverged;
      continue;
    }
    ++census.diagnostics.converged;
    const Vec3& x = res->first;
    CriticalPoint p = classify(x, res->second, opts.degeneracy_tol);
    p.fractional = wrap_fractional(inv * x);
    critical_detail::merge_into(census, p, distance, dedup, degenerate_merge);
  }
  std::sort(census.points.begin(), census.points.end(), critical_detail::location_less);
  return census;
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

/// A connected cluster of grid cells across which every gradient component
/// changes sign.
struct OracleCell {
  Vec3 center = Vec3::Zero();
  Vec3 lo = Vec3::Zero();  // bounding box of the cluster (fractional for torus)
  Vec3 hi = Vec3::Zero();
  Vec3 cell = Vec3::Zero();  // cell size of the scanned grid
  std::size_t flagged = 0;
};

struct OracleResult {
  std::vector<OracleCell> cells;
  std::vector<Box> boxes;  // scanned boxes, the first is the global one
  int resolution = 0;
};

namespace critical_detail {

// Irrational node offset keeps symmetry planes off the grid planes.
inline constexpr double kNodeOffset = 0.31830988618379067;

struct FlagGrid {
  int n = 0;
  std::vector<char> flag;
  std::size_t at(int i, int j, int k) const { return (std::size_t(i) * n + j) * n + k; }
};

// 26-connected components of flagged cells; periodic wraps indices.
inline std::vector<std::vector<std::array<int, 3>>> components(const FlagGrid& g, bool periodic) {
  std::vector<char> seen(g.flag.size(), 0);
  std::vector<std::vector<std::array<int, 3>>> out;
  const int n = g.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (!g.flag[g.at(i, j, k)] || seen[g.at(i, j, k)]) continue;
        std::vector<std::array<int, 3>> comp;
        std::vector<std::array<int, 3>> stack{{i, j, k}};
        seen[g.at(i, j, k)] = 1;
        while (!stack.empty()) {
          const auto c = stack.back();
          stack.pop_back();
          comp.push_back(c);
          for (int di = -1; di <= 1; ++di)
            for (int dj = -1; dj <= 1; ++dj)
              for (int dk = -1; dk <= 1; ++dk) {
                std::array<int, 3> nb{c[0] + di, c[1] + dj, c[2] + dk};
                bool ok = true;
                for (int& v : nb) {
                  if (periodic) v = (v + n) % n;
                  else if (v < 0 || v >= n) ok = false;
                }
                if (!ok) continue;
                const auto idx = g.at(nb[0], nb[1], nb[2]);
                if (g.flag[idx] && !seen[idx]) {
                  seen[idx] = 1;
                  stack.push_back(nb);
                }
              }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
  return out;
}

// Gradient samples on nodes and sign-change flags per cell.
template <class GradAt, class Excluded>
FlagGrid scan(int n, bool periodic, GradAt grad_at, Excluded excluded, unsigned threads) {
  const int nodes = periodic ? n : n + 1;
  std::vector<Vec3> grad(std::size_t(nodes) * nodes * nodes);
  std::vector<char> bad(grad.size(), 0);
  parallel_for(std::size_t(nodes), threads, [&](std::size_t i) {
    for (int j = 0; j < nodes; ++j)
      for (int k = 0; k < nodes; ++k) {
        const std::size_t idx = (i * nodes + j) * nodes + k;
        auto g = grad_at(int(i), j, k);
        if (g) grad[idx] = *g;
        else bad[idx] = 1;
      }
  });
  FlagGrid fg;
  fg.n = n;
  fg.flag.assign(std::size_t(n) * n * n, 0);
  parallel_for(std::size_t(n), threads, [&](std::size_t i) {
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (excluded(int(i), j, k)) continue;
        Vec3 mn = Vec3::Constant(std::numeric_limits<double>::infinity());
        Vec3 mx = -mn;
        bool skip = false;
        for (int c = 0; c < 8; ++c) {
          int a = int(i) + (c >> 2 & 1), b = j + (c >> 1 & 1), d = k + (c & 1);
          if (periodic) {
            a %= n;
            b %= n;
            d %= n;
          }
          const std::size_t idx = (std::size_t(a) * nodes + b) * nodes + d;
          if (bad[idx]) {
            skip = true;
            break;
          }
          mn = mn.cwiseMin(grad[idx]);
          mx = mx.cwiseMax(grad[idx]);
        }
        if (skip) continue;
        if ((mn.array() < 0.0).all() && (mx.array() > 0.0).all()) fg.flag[fg.at(int(i), j, k)] = 1;
      }
  });
  return fg;
}

inline Box tight_box(const std::vector<Vec3>& pts, double pad_frac, double min_pad) {
  Box b{pts.front(), pts.front()};
  for (const auto& p : pts) {
    b.lo = b.lo.cwiseMin(p);
    b.hi = b.hi.cwiseMax(p);
  }
  const double pad = std::max(pad_frac * b.extent().maxCoeff(), min_pad);
  b.lo.array() -= pad;
  b.hi.array() += pad;
  return b;
}

}  // namespace critical_detail

/// Uniform-grid scan of a Euclidean configuration. The global box is the
/// hull bounding box padded by 5%. Groups of charges packed closer than four
/// global cells get their own box scanned at the same resolution, replacing
/// the global cells they cover. Throws ResolutionTooCoarse when a box still
/// has charges closer than four of its cells.
inline OracleResult oracle_census(const ChargeConfiguration& config, int resolution,
                                  unsigned threads = 0) {
  using namespace critical_detail;
  config.validate();
  if (resolution < 8 || resolution > 256)
    throw Error(ErrorCode::ParameterError, "oracle resolution must be in [8, 256]");
  threads = resolve_threads(threads);
  const double scale = config.length_scale();
  OracleResult out;
  out.resolution = resolution;
  const Box global = tight_box(config.centers, 0.05, 0.05 * scale);

  // Charge groups under single linkage at four global cells.
  const double link = 4.0 * global.extent().maxCoeff() / resolution;
  const std::size_t nc = config.size();
  std::vector<std::size_t> parent(nc);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t a = 0; a < nc; ++a)
    for (std::size_t b = a + 1; b < nc; ++b)
      if ((config.centers[a] - config.centers[b]).norm() < link) parent[find(a)] = find(b);
  std::map<std::size_t, std::vector<Vec3>> groups;
  for (std::size_t a = 0; a < nc; ++a) groups[find(a)].push_back(config.centers[a]);
  std::vector<Box> zooms;
  if (groups.size() > 1) {
    for (const auto& [root, pts] : groups) {
      if (pts.size() < 2) continue;
      double d = 0.0;
      for (const auto& p : pts)
        for (const auto& q : pts) d = std::max(d, (p - q).norm());
      zooms.push_back(tight_box(pts, 0.25, 0.25 * d));
    }
  }
  out.boxes.push_back(global);
  for (const auto& z : zooms) out.boxes.push_back(z);

  const EuclideanField field(config);
  for (std::size_t bi = 0; bi < out.boxes.size(); ++bi) {
    const Box& box = out.boxes[bi];
    const bool is_global = bi == 0;
    const Vec3 h = box.extent() / double(resolution);
    const double hmax = h.maxCoeff();
    // Charges that fall inside this box must be resolved.
    std::vector<Vec3> inside;
    for (const auto& p : config.centers)
      if (box.contains(p)) inside.push_back(p);
    for (std::size_t a = 0; a < inside.size(); ++a)
      for (std::size_t b = a + 1; b < inside.size(); ++b) {
        const double d = (inside[a] - inside[b]).norm();
        if (d < 4.0 * hmax) {
          bool zoomed = false;
          if (is_global)
            for (const auto& z : zooms) zoomed |= z.contains(inside[a]) && z.contains(inside[b]);
          if (!zoomed)
            throw Error(ErrorCode::ResolutionTooCoarse, "charges closer than four grid cells");
        }
      }
    const Vec3 origin = box.lo + (kNodeOffset - 0.5) * h;
    auto node = [&](int i, int j, int k) {
      return Vec3(origin[0] + i * h[0], origin[1] + j * h[1], origin[2] + k * h[2]);
    };
    auto grad_at = [&](int i, int j, int k) -> std::optional<Vec3> {
      try {
        return field.jet(node(i, j, k)).gradient;
      } catch (const Error&) {
        return std::nullopt;
      }
    };
    auto excluded = [&](int i, int j, int k) {
      const Vec3 lo = node(i, j, k), hi = node(i + 1, j + 1, k + 1);
      const Box cell{lo, hi};
      for (const auto& p : config.centers)
        if (cell.contains(p, 0.1 * hmax)) return true;
      if (is_global) {
        const Vec3 c = 0.5 * (lo + hi);
        for (const auto& z : zooms)
          if (z.contains(c, hmax)) return true;
      }
      return false;
    };
    const FlagGrid fg = scan(resolution, false, grad_at, excluded, threads);
    for (const auto& comp : components(fg, false)) {
      OracleCell oc;
      oc.cell = h;
      oc.flagged = comp.size();
      oc.lo = Vec3::Constant(std::numeric_limits<double>::infinity());
      oc.hi = -oc.lo;
      for (const auto& c : comp) {
        const Vec3 lo = node(c[0], c[1], c[2]);
        const Vec3 hi = node(c[0] + 1, c[1] + 1, c[2] + 1);
        oc.lo = oc.lo.cwiseMin(lo);
        oc.hi = oc.hi.cwiseMax(hi);
        oc.center += 0.5 * (lo + hi);
      }
      oc.center /= double(comp.size());
      out.cells.push_back(oc);
    }
  }
  std::sort(out.cells.begin(), out.cells.end(), [](const OracleCell& a, const OracleCell& b) {
    return std::lexicographical_compare(a.center.data(), a.center.data() + 3, b.center.data(),
                                        b.center.data() + 3);
  });
  return out;
}

/// Uniform fractional-grid scan of the torus potential.
inline OracleResult oracle_census(const TorusField& field, int resolution, unsigned threads = 0) {
  using namespace critical_detail;
  if (resolution < 8 || resolution > 256)
    throw Error(ErrorCode::ParameterError, "oracle resolution must be in [8, 256]");
  threads = resolve_threads(threads);
  const Lattice& lat = field.lattice();
  const auto charges = field.config().derived_charges();
  Vec3 cellf;
  for (int i = 0; i < 3; ++i) cellf[i] = lat.basis.col(i).norm() / resolution;
  const double hmax = cellf.maxCoeff();
  for (std::size_t a = 0; a < charges.size(); ++a)
    for (std::size_t b = a + 1; b < charges.size(); ++b)
      if (lat.min_image_norm(lat.to_cartesian(charges[a].fractional - charges[b].fractional)) < 4.0 * hmax)
        throw Error(ErrorCode::ResolutionTooCoarse, "charges closer than four grid cells");

  OracleResult out;
  out.resolution = resolution;
  out.boxes.push_back(Box{Vec3::Zero(), Vec3::Ones()});
  const double hf = 1.0 / resolution;
  auto node = [&](int i, int j, int k) {
    return Vec3((i + kNodeOffset) * hf, (j + kNodeOffset) * hf, (k + kNodeOffset) * hf);
  };
  auto grad_at = [&](int i, int j, int k) -> std::optional<Vec3> {
    try {
      return field.gradient_jet(lat.to_cartesian(node(i, j, k))).gradient;
    } catch (const Error&) {
      return std::nullopt;
    }
  };
  auto excluded = [&](int i, int j, int k) {
    const Vec3 lo = node(i, j, k);
    for (const auto& c : charges) {
      Vec3 d = c.fractional - lo;
      bool in = true;
      for (int a = 0; a < 3; ++a) {
        d[a] -= std::floor(d[a]);
        if (d[a] > hf * 1.1 && d[a] < 1.0 - 0.1 * hf) in = false;
      }
      if (in) return true;
    }
    return false;
  };
  const FlagGrid fg = scan(resolution, true, grad_at, excluded, threads);
  for (const auto& comp : components(fg, true)) {
    OracleCell oc;
    oc.cell = Vec3::Constant(hf);
    oc.flagged = comp.size();
    // Unwrap relative to the first cell of the component.
    const Vec3 ref = node(comp.front()[0], comp.front()[1], comp.front()[2]);
    oc.lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    oc.hi = -oc.lo;
    for (const auto& c : comp) {
      Vec3 lo = node(c[0], c[1], c[2]);
      for (int a = 0; a < 3; ++a) lo[a] -= std::round(lo[a] - ref[a]);
      const Vec3 hi = lo + Vec3::Constant(hf);
      oc.lo = oc.lo.cwiseMin(lo);
      oc.hi = oc.hi.cwiseMax(hi);
      oc.center += lo + Vec3::Constant(0.5 * hf);
    }
    oc.center = wrap_fractional(oc.center / double(comp.size()));
    out.cells.push_back(oc);
  }
  std::sort(out.cells.begin(), out.cells.end(), [](const OracleCell& a, const OracleCell& b) {
    return std::lexicographical_compare(a.center.data(), a.center.data() + 3, b.center.data(),
                                        b.center.data() + 3);
  });
  return out;
}

struct OracleAgreement {
  std::size_t newton_count = 0;
  std::size_t oracle_count = 0;
  std::size_t matched = 0;
  bool one_to_one = false;
};

/// Matches each Newton point to the oracle cluster whose box (grown by one
/// cell) contains it. Torus comparisons use fractional coordinates mod 1.
inline OracleAgreement compare_with_oracle(const std::vector<CriticalPoint>& points,
                                           const OracleResult& oracle, bool torus) {
  OracleAgreement a;
  a.newton_count = points.size();
  a.oracle_count = oracle.cells.size();
  std::vector<int> hits_per_cell(oracle.cells.size(), 0);
  bool each_point_unique = true;
  for (const auto& p : points) {
    int hits = 0;
    std::size_t which = 0;
    for (std::size_t c = 0; c < oracle.cells.size(); ++c) {
      const auto& oc = oracle.cells[c];
      bool in = true;
      for (int i = 0; i < 3; ++i) {
        double x = torus ? (*p.fractional)[i] : p.location[i];
        if (torus) x -= std::floor(x - (oc.lo[i] - oc.cell[i]));
        if (x < oc.lo[i] - oc.cell[i] || x > oc.hi[i] + oc.cell[i]) in = false;
      }
      if (in) {
        ++hits;
        which = c;
      }
    }
    if (hits == 1) {
      ++hits_per_cell[which];
      ++a.matched;
    } else {
      each_point_unique = false;
    }
  }
  a.one_to_one = each_point_unique && a.newton_count == a.oracle_count &&
                 std::all_of(hits_per_cell.begin(), hits_per_cell.end(), [](int h) { return h == 1; });
  return a;
}

// ---------------------------------------------------------------------------
// Audits
// ---------------------------------------------------------------------------

struct MorseAudit {
  int n = 0;
  std::array<int, 4> nu{};  // nu_0 .. nu_3
  int euler_sum = 0;
  bool bound1_satisfied = false;  // nu_1 >= 10
  bool bound2_satisfied = false;  // nu_2 >= 2(n+1)
  bool euler_mismatch = false;
};

inline MorseAudit morse_audit_counts(int n, int nu0, int nu1, int nu2, int nu3) {
  MorseAudit a;
  a.n = n;
  a.nu = {nu0, nu1, nu2, nu3};
  a.euler_sum = nu0 - nu1 + nu2 - nu3;
  a.bound1_satisfied = nu1 >= 10;
  a.bound2_satisfied = nu2 >= 2 * (n + 1);
  a.euler_mismatch = a.euler_sum != 0;
  return a;
}

/// Morse counts for the smooth extension of h: each negative puncture counts
/// as a minimum and each positive one as a maximum; the smooth critical
/// points supply the rest.
inline MorseAudit morse_audit(const std::vector<CriticalPoint>& points, const TorusConfiguration& config) {
  for (const auto& p : points)
    if (p.degenerate) throw Error(ErrorCode::DegeneratePresent, "census contains degenerate points");
  int minima = 0, maxima = 0;
  for (const auto& c : config.derived_charges()) (c.charge < 0 ? minima : maxima) += 1;
  std::array<int, 4> found{};
  for (const auto& p : points) ++found[p.morse_index];
  return morse_audit_counts(int(config.n()), minima + found[0], found[1], found[2], maxima + found[3]);
}

struct MaxwellAudit {
  int charges = 0;
  int critical_count = 0;
  int bound = 0;
  bool satisfied = false;
};

inline MaxwellAudit maxwell_audit(int charge_count, int critical_count) {
  if (charge_count < 2) throw Error(ErrorCode::DomainError, "Maxwell bound needs at least two charges");
  MaxwellAudit m;
  m.charges = charge_count;
  m.critical_count = critical_count;
  m.bound = (charge_count - 1) * (charge_count - 1);
  m.satisfied = critical_count <= m.bound;
  return m;
}

}  // namespace ghgeo
