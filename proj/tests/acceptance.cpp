// Acceptance run: one PASS/FAIL line per criterion, followed by the measured
// values. Always exits 0; the verdicts are in the output.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "generators.hpp"
#include "ghgeo/io.hpp"
#include "ghgeo/scenarios.hpp"

using namespace ghgeo;

namespace {

struct Verdict {
  bool passed = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    passed = passed && ok;
    notes.push_back(std::string(ok ? "ok    " : "FAILED") + "  " + what);
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int passed_count = 0;

void criterion(int id, const std::string& title, double limit_s, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.check(false, std::string("exception: ") + e.what());
  }
  const double t = seconds_since(t0);
  if (limit_s > 0) v.check(t < limit_s, fmt("runtime %.2f s < %.0f s", t, limit_s));
  passed_count += v.passed;
  std::printf("%s criterion %2d: %s (%.2f s)\n", v.passed ? "PASS" : "FAIL", id, title.c_str(), t);
  for (const auto& n : v.notes) std::printf("      %s\n", n.c_str());
  std::fflush(stdout);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<CriticalPoint> nondegenerate(const std::vector<CriticalPoint>& pts) {
  std::vector<CriticalPoint> out;
  for (const auto& p : pts)
    if (!p.degenerate) out.push_back(p);
  return out;
}

}  // namespace

int main() {
  std::vector<CriticalPoint> cube_points;

  criterion(1, "triangle census", 5.0, [](Verdict& v) {
    const auto r = run_scenario(triangle(1.0, 1.0));
    v.check(r.census.points.size() == 4, fmt("%.0f critical points (expected 4)", double(r.census.points.size())));
    std::multiset<int> morse, geo;
    double residual = 0.0;
    for (const auto& o : r.orbits) {
      morse.insert(o.base.morse_index);
      geo.insert(o.geodesic_index);
      residual = std::max(residual, o.base.gradient_residual);
    }
    v.check(morse == std::multiset<int>{1, 2, 2, 2}, "Morse indices {1,2,2,2}");
    v.check(geo == std::multiset<int>{2, 1, 1, 1}, fmt("geodesic indices {2,1,1,1} at m = 2 m0 = %.3g", r.parameter));
    v.check(residual < 1e-10, fmt("max gradient residual %.2e < 1e-10", residual));
  });

  criterion(2, "collinear family k = 2..6", 5.0, [](Verdict& v) {
    for (int k = 2; k <= 6; ++k) {
      const auto cfg = collinear(k).euclidean();
      const auto pts = find_critical_points(cfg).points;
      std::vector<double> zs;
      for (const auto& c : cfg.centers) zs.push_back(c.z());
      std::sort(zs.begin(), zs.end());
      std::vector<int> per_gap(zs.size() - 1, 0);
      double off_axis = 0.0;
      bool between = true;
      for (const auto& p : pts) {
        off_axis = std::max(off_axis, p.location.head<2>().norm());
        const auto it = std::upper_bound(zs.begin(), zs.end(), p.location.z());
        if (it == zs.begin() || it == zs.end() || p.location.z() == *(it - 1)) {
          between = false;
          continue;
        }
        ++per_gap[std::size_t(it - zs.begin() - 1)];
      }
      const bool one_each = std::all_of(per_gap.begin(), per_gap.end(), [](int c) { return c == 1; });
      v.check(int(pts.size()) == k - 1 && between && one_each && off_axis < 1e-8,
              "k = " + std::to_string(k) + ": " + std::to_string(pts.size()) + " points, one per gap, off-axis " +
                  fmt("%.1e", off_axis));
    }
  });

  criterion(3, "nested triangles d = 1, D = 40", 30.0, [](Verdict& v) {
    const auto r = run_scenario(nested_triangles(1.0, 40.0));
    v.check(r.census.points.size() == 16, fmt("%.0f critical points (expected 16)", double(r.census.points.size())));
    v.check(r.observed.at("geodesic_index_1") == 12, fmt("%.0f orbits of index 1 (expected 12)", r.observed.at("geodesic_index_1")));
    v.check(r.observed.at("geodesic_index_2") == 4, fmt("%.0f orbits of index 2 (expected 4)", r.observed.at("geodesic_index_2")));
  });

  criterion(4, "flat-centre suite", 10.0, [](Verdict& v) {
    std::vector<Scenario> suite{octahedron()};
    for (const auto& kind : platonic_kinds())
      if (kind != "octahedron") suite.push_back(platonic(kind));
    suite.push_back(concentric_platonic({"tetrahedron", "icosahedron"}, {1.0, 2.0}));
    for (const auto& s : suite) {
      const auto& cfg = s.euclidean();
      const EuclideanField field(cfg);
      const auto j = field.jet(Vec3::Zero());
      const auto c = asd_curvature(j);
      const auto label = second_order_stability_scan(field, {classify(Vec3::Zero(), j, 1e-8)}).front();
      const bool witness = label.witness && std::abs(label.witness->norm() - 0.1) < 1e-12 && label.witness_gain > 0;
      const std::string name = s.name == "platonic" ? s.params.at("kind") : s.name;
      v.check(j.gradient.norm() < 1e-12 && j.hessian.norm() < 1e-9 && c.riem_norm_sq < 1e-9 && witness,
              name + fmt(": |grad| %.1e, |Hess|_F %.1e", j.gradient.norm(), j.hessian.norm()) +
                  fmt(", riem %.1e, witness gain %.2e", c.riem_norm_sq, label.witness_gain));
    }
  });

  criterion(5, "curvature closed forms", 5.0, [](Verdict& v) {
    gen::Rng rng(5005);
    double tn_riem = 0, tn_w = 0, eh_riem = 0, eh_w = 0, eh_swapped = 0, factor8 = 0, trace = 0;
    auto track = [&](const CurvatureSample& s) {
      factor8 = std::max(factor8, rel(s.riem_norm_sq, 8.0 * s.w.squaredNorm()));
      trace = std::max(trace, std::abs(s.w.trace()) / s.w.norm());
    };
    for (int i = 0; i < 100; ++i) {
      const double m = rng.uniform(0.1, 5.0);
      const Vec3 x = rng.uniform(0.05, 5.0) * rng.direction();
      const auto s = asd_curvature(eval_euclidean(ChargeConfiguration::unit({Vec3::Zero()}, m), x), x);
      const double closed = taubnut_closed_form(m, x.norm());
      tn_riem = std::max(tn_riem, rel(s.riem_norm_sq, closed));
      tn_w = std::max(tn_w, rel(s.w.squaredNorm(), closed));
      track(s);
    }
    for (int i = 0; i < 100; ++i) {
      const int k1 = rng.integer(1, 3), k2 = rng.integer(1, 3);
      const auto cfg = ChargeConfiguration::make({{0, 0, 1}, {0, 0, -1}}, {k1, k2}, 0.0);
      const Vec3 x = rng.away_from(cfg, 3.0, 0.05);
      const auto s = asd_curvature(eval_euclidean(cfg, x), x);
      eh_riem = std::max(eh_riem, rel(s.riem_norm_sq, eh_closed_form(k1, k2, x)));
      eh_w = std::max(eh_w, rel(s.w.squaredNorm(), eh_closed_form(k1, k2, x)));
      eh_swapped = std::max(eh_swapped, rel(s.w.squaredNorm(), eh_closed_form(k2, k1, x)));
      track(s);
    }
    v.check(tn_riem <= 1e-8, fmt("Taub-NUT: riemNormSq vs closed form, max rel error %.3g", tn_riem));
    v.check(eh_riem <= 1e-8, fmt("Eguchi-Hanson: riemNormSq vs closed form, max rel error %.3g", eh_riem));
    v.check(factor8 <= 1e-12, fmt("riemNormSq = 8 |W|_F^2, max rel error %.2e", factor8));
    v.check(trace <= 1e-8, fmt("trace(W) / |W|_F max %.2e", trace));
    v.notes.push_back(fmt("info    |W|_F^2 vs closed forms: Taub-NUT %.2e, Eguchi-Hanson %.3g", tn_w, eh_w));
    v.notes.push_back(fmt("info    |W|_F^2 vs Eguchi-Hanson with k1, k2 exchanged: %.2e", eh_swapped));
  });

  criterion(6, "torus potential", 30.0, [](Verdict& v) {
    const auto cfg = cube_torus().torus_config();
    const TorusField field(cfg);
    const TorusField other(cfg, 1e-10, 5.0);
    const Lattice& lat = cfg.lattice;
    const auto charges = cfg.derived_charges();
    gen::Rng rng(6006);
    auto generic = [&]() {
      for (;;) {
        const Vec3 x = lat.to_cartesian(rng.fractional());
        bool ok = true;
        for (const auto& c : charges) ok = ok && lat.min_image_norm(x - lat.to_cartesian(c.fractional)) >= 0.1;
        if (ok) return x;
      }
    };
    auto fd_laplacian = [&](const Vec3& x, double h) {
      double lap = 0.0;
      for (int i = 0; i < 3; ++i) {
        Vec3 e = Vec3::Zero();
        e[i] = h;
        lap += (field.jet(Vec3(x + e)).gradient[i] - field.jet(Vec3(x - e)).gradient[i]) / (2.0 * h);
      }
      return lap;
    };
    double alpha = 0, period = 0, parity = 0, lap = 0;
    for (int i = 0; i < 50; ++i) {
      const Vec3 x = generic();
      const double h = field.value(x);
      alpha = std::max(alpha, std::abs(other.value(x) - h));
      for (int a = 0; a < 3; ++a) period = std::max(period, std::abs(field.value(Vec3(x + lat.vector(a))) - h));
      parity = std::max(parity, std::abs(field.value(Vec3(-x)) - h));
      lap = std::max(lap, std::abs((4.0 * fd_laplacian(x, 5e-5) - fd_laplacian(x, 1e-4)) / 3.0));
    }
    v.check(alpha <= 2e-10, fmt("Ewald alpha default vs 5.0: max |dh| %.2e <= 2e-10", alpha));
    v.check(period <= 1e-10, fmt("periodicity: max |h(x + lambda) - h(x)| %.2e <= 1e-10", period));
    v.check(parity <= 1e-10, fmt("parity: max |h(-x) - h(x)| %.2e <= 1e-10", parity));
    v.check(lap <= 1e-5, fmt("finite-difference Laplacian at 50 generic points: max %.2e <= 1e-5", lap));
  });

  criterion(7, "cube-torus census", 120.0, [&](Verdict& v) {
    RunOptions o;
    o.oracle = true;
    o.oracle_resolution = 96;
    const auto r = run_scenario(cube_torus(), o);
    cube_points = r.census.points;
    const auto& obs = r.observed;
    v.check(obs.at("critical_count") == 22, fmt("%.0f critical points (expected 22)", obs.at("critical_count")));
    v.check(obs.at("parity_closed") == 1, "census closed under x -> -x");
    v.check(obs.at("on_loci") == 16, fmt("%.0f points on the symmetry loci (expected 16)", obs.at("on_loci")));
    v.check(obs.at("euler_sum") == 0, fmt("Euler sum %.0f (expected 0)", obs.at("euler_sum")));
    v.check(obs.at("nu1") == 11 && obs.at("nu2") == 11, fmt("nu1 = %.0f, nu2 = %.0f (expected 11, 11)", obs.at("nu1"), obs.at("nu2")));
    v.check(r.morse->bound1_satisfied && r.morse->bound2_satisfied, "nu1, nu2 >= Morse bounds (10, 10)");
    v.notes.push_back(fmt("info    oracle at 96^3: %.0f cells, one-to-one %.0f", double(r.oracle->oracle_count), r.oracle->one_to_one));
  });

  criterion(8, "Maxwell bound", 600.0, [](Verdict& v) {
    int scenarios = 0, violations = 0;
    for (const auto& s : default_catalog()) {
      if (s.torus()) continue;
      const auto& cfg = s.euclidean();
      const auto a = maxwell_audit(int(cfg.size()), int(find_critical_points(cfg).points.size()));
      ++scenarios;
      if (!a.satisfied) {
        ++violations;
        v.notes.push_back("violation in " + s.name);
      }
    }
    gen::Rng rng(8008);
    int random_violations = 0;
    for (int i = 0; i < 200; ++i) {
      const int l = rng.integer(4, 6);
      const auto cfg = rng.euclidean(l, 1.0, 0.0, 3);
      const auto a = maxwell_audit(l, int(find_critical_points(cfg).points.size()));
      random_violations += !a.satisfied;
    }
    v.check(violations == 0, std::to_string(scenarios) + " Euclidean catalog scenarios, " +
                                 std::to_string(violations) + " violations");
    v.check(random_violations == 0, "200 random 4-6 charge configurations, " + std::to_string(random_violations) + " violations");
  });

  criterion(9, "Jacobi index identity and homothety", 30.0, [](Verdict& v) {
    int checked = 0, broken = 0;
    for (const auto& s : default_catalog())
      for (const auto& o : run_scenario(s).orbits) {
        if (o.degenerate_base) continue;
        ++checked;
        broken += o.geodesic_index != 3 - o.base.morse_index;
      }
    v.check(broken == 0, std::to_string(checked) + " nondegenerate orbits over the catalog, " + std::to_string(broken) +
                             " with geodesic index != 3 - Morse index");
    for (double m : {0.5, 2.0, 10.0}) {
      int mismatched = 0;
      for (const auto& s : default_catalog()) {
        if (s.torus()) continue;
        auto base = s.euclidean();
        base.mass = m;
        auto scaled = base;
        scaled.mass = 1.0;
        for (auto& c : scaled.centers) c *= m;
        const auto pa = find_critical_points(base).points;
        const auto pb = find_critical_points(scaled).points;
        bool same = pa.size() == pb.size();
        for (const auto& p : pa) {
          bool hit = false;
          for (const auto& q : pb)
            hit = hit || ((q.location - m * p.location).norm() <= 1e-6 * m * base.length_scale() &&
                          q.morse_index == p.morse_index && q.degenerate == p.degenerate);
          same = same && hit;
        }
        mismatched += !same;
      }
      v.check(mismatched == 0, fmt("homothety m = %.1f: census equal on all Euclidean scenarios", m));
    }
  });

  criterion(10, "inverse-norm scaling", 1.0, [&](Verdict& v) {
    const auto pts = nondegenerate(cube_points);
    if (pts.empty()) {
      v.check(false, "no nondegenerate cube-torus point available");
      return;
    }
    const auto r = inverse_norm_scaling(pts.front(), {1e-2, 1e-3, 1e-4});
    v.check(!r.degenerate && std::abs(r.slope - 1.0) <= 0.05, fmt("log-log slope %.4f (expected 1.00 +- 0.05)", r.slope));
  });

  criterion(11, "oracle equivalence at 128", 60.0, [](Verdict& v) {
    for (const auto& s : default_catalog()) {
      if (s.torus()) continue;
      const auto& cfg = s.euclidean();
      const auto pts = find_critical_points(cfg).points;
      const auto a = compare_with_oracle(pts, oracle_census(cfg, 128), false);
      const std::string name = s.name == "platonic" ? s.params.at("kind")
                               : s.name == "collinear" ? "collinear k=" + s.params.at("k")
                                                       : s.name;
      v.check(a.newton_count == a.oracle_count && a.one_to_one,
              name + ": " + std::to_string(a.newton_count) + " Newton, " + std::to_string(a.oracle_count) + " oracle");
    }
  });

  criterion(12, "determinism", 0.0, [](Verdict& v) {
    auto full_run = [] {
      std::string out;
      for (const auto& s : default_catalog()) out += to_json(run_scenario(s)).dump() + "\n";
      return out;
    };
    const std::string a = full_run();
    const std::string b = full_run();
    v.check(a == b, fmt("two full catalog runs byte-identical (%.0f bytes)", double(a.size())));
  });

  std::printf("SUMMARY %d/12 criteria passed\n", passed_count);
  return 0;
}
