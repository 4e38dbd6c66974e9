#pragma once

// Deterministic configuration builders, their expected records, and the
// end-to-end pipeline that turns a scenario into a report.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "ghgeo/core.hpp"
#include "ghgeo/critical.hpp"
#include "ghgeo/curvature.hpp"
#include "ghgeo/ewald.hpp"
#include "ghgeo/geodesic.hpp"
#include "ghgeo/potential.hpp"

namespace ghgeo {

struct Expectation {
  std::string key;
  double value = 0.0;
  std::string provenance;
};

using Params = std::map<std::string, std::string>;

struct Scenario {
  std::string name;
  Params params;
  std::variant<std::monostate, ChargeConfiguration, TorusConfiguration> config;  // empty for partitions
  std::vector<Expectation> expected;
  std::vector<std::string> annotations;
  std::vector<Scenario> parts;  // partition scenarios only
  bool flat_center = false;     // charges symmetric about the origin

  bool torus() const { return std::holds_alternative<TorusConfiguration>(config); }
  const ChargeConfiguration& euclidean() const { return std::get<ChargeConfiguration>(config); }
  const TorusConfiguration& torus_config() const { return std::get<TorusConfiguration>(config); }
};

namespace scenario_detail {

inline double number(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParameterError, "parameter " + key + " is not a number: " + it->second);
  }
}

inline std::string text(const Params& p, const std::string& key, const std::string& fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

inline std::vector<int> parse_partition(const std::string& s) {
  std::vector<int> parts;
  for (const auto& t : split(s, '+')) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(t, &used);
      if (used != t.size() || k < 1) throw std::invalid_argument(t);
      parts.push_back(k);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidPartition, "bad partition entry: " + t);
    }
  }
  return parts;
}

inline void require_sixteen(int total) {
  if (total != 16)
    throw Error(ErrorCode::InvalidPartition,
                "sum of free and fixed weights is " + std::to_string(total) + ", expected 16");
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline std::vector<Vec3> triangle_vertices(double side) {
  std::vector<Vec3> v;
  for (int i = 0; i < 3; ++i) {
    const double a = kPi / 2 + i * 2 * kPi / 3;
    v.push_back(Vec3(std::cos(a), std::sin(a), 0) * side / std::sqrt(3.0));
  }
  return v;
}

}  // namespace scenario_detail

/// Unit-radius vertex sets of the five Platonic solids.
inline std::vector<Vec3> platonic_vertices(const std::string& kind) {
  const double g = 0.5 * (1.0 + std::sqrt(5.0));
  std::vector<Vec3> v;
  if (kind == "tetrahedron") {
    v = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
  } else if (kind == "cube") {
    for (int s = 0; s < 8; ++s) v.push_back(Vec3(s & 4 ? -1 : 1, s & 2 ? -1 : 1, s & 1 ? -1 : 1));
  } else if (kind == "octahedron") {
    v = {Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0), Vec3(0, -1, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)};
  } else if (kind == "icosahedron") {
    for (int s = 0; s < 4; ++s) {
      const double a = s & 2 ? -1 : 1, b = s & 1 ? -g : g;
      v.push_back(Vec3(0, a, b));
      v.push_back(Vec3(a, b, 0));
      v.push_back(Vec3(b, 0, a));
    }
  } else if (kind == "dodecahedron") {
    for (int s = 0; s < 8; ++s) v.push_back(Vec3(s & 4 ? -1 : 1, s & 2 ? -1 : 1, s & 1 ? -1 : 1));
    for (int s = 0; s < 4; ++s) {
      const double a = s & 2 ? -1 / g : 1 / g, b = s & 1 ? -g : g;
      v.push_back(Vec3(0, a, b));
      v.push_back(Vec3(a, b, 0));
      v.push_back(Vec3(b, 0, a));
    }
  } else {
    throw Error(ErrorCode::ParameterError, "unknown Platonic solid: " + kind);
  }
  for (auto& p : v) p.normalize();
  return v;
}

inline const std::vector<std::string>& platonic_kinds() {
  static const std::vector<std::string> k{"tetrahedron", "cube", "octahedron", "dodecahedron", "icosahedron"};
  return k;
}

inline Scenario collinear(int k, double spacing = 1.0, double m = 1.0) {
  if (k < 2 || !(spacing > 0.0)) throw Error(ErrorCode::ParameterError, "need k >= 2 and spacing > 0");
  std::vector<Vec3> c;
  for (int i = 0; i < k; ++i) c.push_back(Vec3(0, 0, (i - 0.5 * (k - 1)) * spacing));
  Scenario s{"collinear", {{"k", std::to_string(k)}, {"spacing", scenario_detail::fmt(spacing)}, {"m", scenario_detail::fmt(m)}},
             ChargeConfiguration::unit(c, m)};
  s.expected = {{"critical_count", double(k - 1), "reference"},
                {"geodesic_index_1", double(k - 1), "reference"}};
  return s;
}

inline Scenario triangle(double d = 1.0, double m = 1.0) {
  if (!(d > 0.0)) throw Error(ErrorCode::ParameterError, "side must be positive");
  Scenario s{"triangle", {{"d", scenario_detail::fmt(d)}, {"m", scenario_detail::fmt(m)}},
             ChargeConfiguration::unit(scenario_detail::triangle_vertices(d), m)};
  s.expected = {{"critical_count", 4, "reference"},
                {"morse_index_1", 1, "reference"},
                {"morse_index_2", 3, "reference"},
                {"geodesic_index_1", 3, "reference"},
                {"geodesic_index_2", 1, "reference"},
                {"maxwell_satisfied", 1, "reference"}};
  return s;
}

/// Three side-d triangles, parallel to a side-D triangle, centred on its
/// vertices.
inline Scenario nested_triangles(double d = 1.0, double D = 40.0, double m = 1.0) {
  if (!(d > 0.0) || !(D >= 20.0 * d))
    throw Error(ErrorCode::ParameterError, "need d > 0 and D >= 20 d");
  std::vector<Vec3> c;
  for (const auto& g : scenario_detail::triangle_vertices(D))
    for (const auto& v : scenario_detail::triangle_vertices(d)) c.push_back(g + v);
  Scenario s{"nested_triangles",
             {{"d", scenario_detail::fmt(d)}, {"D", scenario_detail::fmt(D)}, {"m", scenario_detail::fmt(m)}},
             ChargeConfiguration::unit(c, m)};
  s.expected = {{"critical_count", 16, "reference"},
                {"geodesic_index_1", 12, "reference"},
                {"geodesic_index_2", 4, "reference"},
                {"maxwell_satisfied", 1, "reference"}};
  return s;
}

inline Scenario square(double d = 1.0, double m = 1.0) {
  if (!(d > 0.0)) throw Error(ErrorCode::ParameterError, "side must be positive");
  const double h = 0.5 * d;
  Scenario s{"square", {{"d", scenario_detail::fmt(d)}, {"m", scenario_detail::fmt(m)}},
             ChargeConfiguration::unit({Vec3(h, h, 0), Vec3(-h, h, 0), Vec3(-h, -h, 0), Vec3(h, -h, 0)}, m)};
  s.expected = {{"critical_count", 5, "reference"},
                {"geodesic_index_1", 4, "reference"},
                {"geodesic_index_2", 1, "reference"}};
  return s;
}

inline void add_flat_expectations(Scenario& s, const std::string& why) {
  s.flat_center = true;
  s.expected.push_back({"center_flat", 1, why});
  s.expected.push_back({"center_second_order_stable", 1, why});
  s.expected.push_back({"center_not_local_max", 1, "harmonic phi has no interior local maximum"});
}

inline Scenario platonic(const std::string& kind, double r = 1.0, double m = 0.0) {
  if (!(r > 0.0)) throw Error(ErrorCode::ParameterError, "radius must be positive");
  auto v = platonic_vertices(kind);
  for (auto& p : v) p *= r;
  Scenario s{kind == "octahedron" ? "octahedron" : "platonic",
             {{"kind", kind}, {"r", scenario_detail::fmt(r)}, {"m", scenario_detail::fmt(m)}},
             ChargeConfiguration::unit(v, m)};
  add_flat_expectations(s, "reference");
  return s;
}

inline Scenario octahedron(double r = 1.0, double m = 0.0) {
  Scenario s = platonic("octahedron", r, m);
  s.params.erase("kind");
  s.expected.insert(s.expected.begin(), {"critical_count", 1, "derived: Newton census, oracle validated"});
  return s;
}

inline Scenario concentric_platonic(const std::vector<std::string>& kinds, const std::vector<double>& radii,
                                    double m = 0.0) {
  if (kinds.empty() || kinds.size() != radii.size())
    throw Error(ErrorCode::ParameterError, "kinds and radii must have the same non-zero length");
  std::vector<Vec3> c;
  std::string ks, rs;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (!(radii[i] > 0.0)) throw Error(ErrorCode::ParameterError, "radius must be positive");
    for (const auto& p : platonic_vertices(kinds[i])) c.push_back(radii[i] * p);
    ks += (i ? "+" : "") + kinds[i];
    rs += (i ? "+" : "") + scenario_detail::fmt(radii[i]);
  }
  Scenario s{"concentric_platonic", {{"kinds", ks}, {"radii", rs}, {"m", scenario_detail::fmt(m)}},
             ChargeConfiguration::unit(c, m)};
  add_flat_expectations(s, "reference");
  return s;
}

/// Charges +4 at lambda1/4, lambda2/4 and their lambda3/2 translates (plus the
/// -p images), -4 at the eight half-lattice points.
inline Scenario cube_torus(double scale = 1.0) {
  if (!(scale > 0.0)) throw Error(ErrorCode::ParameterError, "lattice scale must be positive");
  auto t = TorusConfiguration::make(Lattice::cubic(scale),
                                    {Vec3(0.25, 0, 0), Vec3(0, 0.25, 0), Vec3(0.25, 0, 0.5), Vec3(0, 0.25, 0.5)},
                                    {4, 4, 4, 4}, {0, 0, 0, 0, 0, 0, 0, 0});
  scenario_detail::require_sixteen(t.weight_sum());
  Scenario s{"cube_torus", {{"scale", scenario_detail::fmt(scale)}}, t};
  s.expected = {{"critical_count", 22, "reference"},
                {"on_loci", 16, "reference"},
                {"parity_closed", 1, "h(-x) = h(x)"},
                {"euler_sum", 0, "strong Morse inequalities on the 3-torus"},
                {"nu1", 11, "derived from the 22 = 2 x 11 count"},
                {"nu2", 11, "derived from the 22 = 2 x 11 count"},
                {"bound1_satisfied", 1, "reference"},
                {"bound2_satisfied", 1, "reference"}};
  return s;
}

/// The two-dimensional warm-up lifted to the torus: +1 at (1/4,0), (3/4,0),
/// (0,1/4), (0,3/4) and -1 at the four in-plane half-lattice points. The
/// expectation concerns the critical points in the plane z = 0.
inline Scenario square_torus_2d(double scale = 1.0) {
  if (!(scale > 0.0)) throw Error(ErrorCode::ParameterError, "lattice scale must be positive");
  std::vector<TorusCharge> q = {{Vec3(0.25, 0, 0), 1}, {Vec3(0.75, 0, 0), 1}, {Vec3(0, 0.25, 0), 1},
                                {Vec3(0, 0.75, 0), 1}, {Vec3(0, 0, 0), -1},   {Vec3(0.5, 0, 0), -1},
                                {Vec3(0, 0.5, 0), -1}, {Vec3(0.5, 0.5, 0), -1}};
  Scenario s{"square_torus_2d", {{"scale", scenario_detail::fmt(scale)}},
             TorusConfiguration::exploratory_charges(Lattice::cubic(scale), q)};
  s.expected = {{"in_plane_count", 8, "reference"}};
  return s;
}

inline Scenario random_euclidean(std::uint64_t seed, int k = 5, double box = 1.0, double m = 1.0) {
  if (k < 2 || !(box > 0.0)) throw Error(ErrorCode::ParameterError, "need k >= 2 and box > 0");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-box, box);
  std::vector<Vec3> c;
  while (int(c.size()) < k) {
    const Vec3 p(u(rng), u(rng), u(rng));
    bool ok = true;
    for (const auto& q : c) ok &= (p - q).norm() >= 0.1 * box;
    if (ok) c.push_back(p);
  }
  Scenario s{"random_euclidean",
             {{"seed", std::to_string(seed)}, {"k", std::to_string(k)}, {"box", scenario_detail::fmt(box)},
              {"m", scenario_detail::fmt(m)}},
             ChargeConfiguration::unit(c, m)};
  s.expected = {{"maxwell_satisfied", 1, "Maxwell bound (l-1)^2"}};
  return s;
}

/// Free points drawn uniformly with weights from the partition, all m_j = 0.
inline Scenario random_torus(std::uint64_t seed, const std::string& partition = "16") {
  const auto parts = scenario_detail::parse_partition(partition);
  int total = 0;
  for (int k : parts) total += k;
  scenario_detail::require_sixteen(total);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Lattice lat = Lattice::cubic(1.0);
  std::vector<Vec3> pts;
  auto far = [&](const Vec3& a, const Vec3& b) { return lat.min_image_norm(a - b) >= 0.08; };
  while (pts.size() < parts.size()) {
    const Vec3 p(u(rng), u(rng), u(rng));
    bool ok = far(p, -p);
    for (const auto& q : half_lattice_points()) ok = ok && far(p, q);
    for (const auto& q : pts) ok = ok && far(p, q) && far(p, -q);
    if (ok) pts.push_back(p);
  }
  Scenario s{"random_torus", {{"seed", std::to_string(seed)}, {"partition", partition}},
             TorusConfiguration::make(lat, pts, parts, {0, 0, 0, 0, 0, 0, 0, 0})};
  s.expected = {{"euler_sum", 0, "strong Morse inequalities on the 3-torus"},
                {"bound1_satisfied", 1, "reference"},
                {"bound2_satisfied", 1, "reference"}};
  return s;
}

/// One Euclidean bubble per part plus a random torus with the same weights.
inline Scenario partition(const std::string& parts_text = "9+3+3+1", std::uint64_t seed = 1) {
  const auto parts = scenario_detail::parse_partition(parts_text);
  int total = 0;
  for (int k : parts) total += k;
  scenario_detail::require_sixteen(total);
  Scenario s{"partition", {{"parts", parts_text}, {"seed", std::to_string(seed)}}, std::monostate{}};
  for (int k : parts) {
    if (k == 1) {
      s.annotations.push_back("k = 1 bubble is Taub-NUT: no critical points");
    } else if (k == 3) {
      s.parts.push_back(triangle());
    } else if (k == 9) {
      s.parts.push_back(nested_triangles());
    } else {
      s.parts.push_back(collinear(k));
    }
  }
  s.parts.push_back(random_torus(seed, parts_text));
  s.annotations.push_back("8 x 3 = 24 Atiyah-Hitchin geodesics of unknown index are not computed");
  return s;
}

struct CatalogEntry {
  std::string name;
  std::string description;
};

inline const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> c{
      {"collinear", "k unit charges on the z-axis (k, spacing, m)"},
      {"triangle", "equilateral triangle of unit charges (d, m)"},
      {"nested_triangles", "three small triangles at the vertices of a large one (d, D, m)"},
      {"square", "square of unit charges (d, m)"},
      {"octahedron", "octahedron vertices, flat centre (r, m)"},
      {"platonic", "vertices of a Platonic solid (kind, r, m)"},
      {"concentric_platonic", "concentric Platonic shells (kinds, radii, m)"},
      {"cube_torus", "stacked square example on the cubic torus (scale)"},
      {"square_torus_2d", "two-dimensional square example lifted to the torus (scale)"},
      {"random_euclidean", "seeded random unit charges (seed, k, box, m)"},
      {"random_torus", "seeded random free points for a partition of 16 (seed, partition)"},
      {"partition", "bubbles plus torus for a partition of 16 (parts, seed)"},
  };
  return c;
}

inline Scenario build(const std::string& name, const Params& p = {}) {
  using scenario_detail::number;
  using scenario_detail::text;
  auto integer = [&](const std::string& key, double fallback) {
    const double v = number(p, key, fallback);
    if (v != std::floor(v)) throw Error(ErrorCode::ParameterError, key + " must be an integer");
    return v;
  };
  static const std::map<std::string, std::vector<std::string>> keys{
      {"collinear", {"k", "spacing", "m"}},
      {"triangle", {"d", "m"}},
      {"nested_triangles", {"d", "D", "m"}},
      {"square", {"d", "m"}},
      {"octahedron", {"r", "m"}},
      {"platonic", {"kind", "r", "m"}},
      {"concentric_platonic", {"kinds", "radii", "m"}},
      {"cube_torus", {"scale"}},
      {"square_torus_2d", {"scale"}},
      {"random_euclidean", {"seed", "k", "box", "m"}},
      {"random_torus", {"seed", "partition"}},
      {"partition", {"parts", "seed"}},
  };
  const auto known = keys.find(name);
  if (known == keys.end()) throw Error(ErrorCode::InputError, "unknown scenario: " + name);
  for (const auto& [key, value] : p)
    if (std::find(known->second.begin(), known->second.end(), key) == known->second.end())
      throw Error(ErrorCode::InputError, name + " has no parameter " + key);
  if (name == "collinear") return collinear(int(integer("k", 3)), number(p, "spacing", 1.0), number(p, "m", 1.0));
  if (name == "triangle") return triangle(number(p, "d", 1.0), number(p, "m", 1.0));
  if (name == "nested_triangles")
    return nested_triangles(number(p, "d", 1.0), number(p, "D", 40.0), number(p, "m", 1.0));
  if (name == "square") return square(number(p, "d", 1.0), number(p, "m", 1.0));
  if (name == "octahedron") return octahedron(number(p, "r", 1.0), number(p, "m", 0.0));
  if (name == "platonic") return platonic(text(p, "kind", "icosahedron"), number(p, "r", 1.0), number(p, "m", 0.0));
  if (name == "concentric_platonic") {
    const auto kinds = scenario_detail::split(text(p, "kinds", "tetrahedron+icosahedron"), '+');
    std::vector<double> radii;
    for (const auto& r : scenario_detail::split(text(p, "radii", "1+2"), '+')) {
      Params one{{"r", r}};
      radii.push_back(number(one, "r", 0.0));
    }
    return concentric_platonic(kinds, radii, number(p, "m", 0.0));
  }
  if (name == "cube_torus") return cube_torus(number(p, "scale", 1.0));
  if (name == "square_torus_2d") return square_torus_2d(number(p, "scale", 1.0));
  if (name == "random_euclidean")
    return random_euclidean(std::uint64_t(integer("seed", 1)), int(integer("k", 5)), number(p, "box", 1.0),
                            number(p, "m", 1.0));
  if (name == "random_torus") return random_torus(std::uint64_t(integer("seed", 1)), text(p, "partition", "16"));
  if (name == "partition") return partition(text(p, "parts", "9+3+3+1"), std::uint64_t(integer("seed", 1)));
  throw Error(ErrorCode::InputError, "unknown scenario: " + name);
}

/// The shipped catalog with default parameters; collinear and platonic
/// expand over their families.
inline std::vector<Scenario> default_catalog() {
  std::vector<Scenario> out;
  for (int k = 2; k <= 6; ++k) out.push_back(collinear(k));
  out.push_back(triangle());
  out.push_back(nested_triangles());
  out.push_back(square());
  out.push_back(octahedron());
  for (const auto& kind : platonic_kinds())
    if (kind != "octahedron") out.push_back(platonic(kind));
  out.push_back(concentric_platonic({"tetrahedron", "icosahedron"}, {1.0, 2.0}));
  out.push_back(cube_torus());
  out.push_back(square_torus_2d());
  return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct Check {
  std::string key;
  double expected = 0.0;
  double observed = 0.0;
  bool passed = false;
  std::string provenance;
};

struct CenterProbe {
  double gradient_norm = 0.0;
  double hessian_norm = 0.0;
  double riem_norm_sq = 0.0;
  bool flat = false;
  StabilityLabel label;
};

struct RunOptions {
  SearchOptions search;
  int n_max = kDefaultModes;
  bool oracle = false;
  int oracle_resolution = 0;  // 0: 128 Euclidean, 96 torus
  std::optional<double> epsilon;  // torus override of eps0 / 2
  std::optional<double> mass;     // Euclidean override of 2 m0
};

struct Report {
  std::string scenario;
  Params params;
  bool torus = false;
  Census census;
  std::optional<OracleAgreement> oracle;
  double threshold = 0.0;  // m0 or eps0
  double parameter = 0.0;  // m or eps used for the orbits
  std::vector<GeodesicOrbit> orbits;
  std::vector<StabilityLabel> stability;
  std::optional<CenterProbe> center;
  std::optional<MorseAudit> morse;
  std::optional<MaxwellAudit> maxwell;
  std::map<std::string, double> observed;
  std::vector<Check> checks;
  std::vector<std::string> annotations;
  std::vector<Report> parts;
  bool passed = true;
};

namespace scenario_detail {

inline int count_if_index(const std::vector<GeodesicOrbit>& orbits, int index) {
  int c = 0;
  for (const auto& o : orbits) c += (o.geodesic_index == index && o.nullity == 0);
  return c;
}

inline bool near_half_integer_plane(double f) {
  const double t = 2.0 * f;
  return std::abs(t - std::round(t)) <= 2e-6;
}

inline void run_euclidean(const Scenario& s, const RunOptions& opts, Report& r) {
  const ChargeConfiguration& cfg = s.euclidean();
  r.census = find_critical_points(cfg, opts.search);
  const auto& pts = r.census.points;
  r.observed["critical_count"] = double(pts.size());
  std::array<int, 4> morse{};
  for (const auto& p : pts) ++morse[p.morse_index];
  r.observed["morse_index_1"] = morse[1];
  r.observed["morse_index_2"] = morse[2];
  std::vector<CriticalPoint> regular;
  for (const auto& p : pts)
    if (!p.degenerate) regular.push_back(p);
  r.observed["degenerate_count"] = double(pts.size() - regular.size());

  r.threshold = regular.empty() ? 0.0 : find_m0(cfg, regular, opts.n_max);
  r.parameter = opts.mass ? *opts.mass : 2.0 * r.threshold;
  ChargeConfiguration at = cfg;
  at.mass = r.parameter;
  r.orbits = orbits_euclidean(at, pts, opts.n_max);
  r.observed["geodesic_index_1"] = count_if_index(r.orbits, 1);
  r.observed["geodesic_index_2"] = count_if_index(r.orbits, 2);
  int identity = 1;
  for (const auto& o : r.orbits)
    if (!o.degenerate_base && o.geodesic_index != 3 - o.base.morse_index) identity = 0;
  r.observed["index_identity"] = identity;

  const EuclideanField field(cfg);
  r.stability = second_order_stability_scan(field, pts);
  if (cfg.size() >= 2) {
    r.maxwell = maxwell_audit(int(cfg.size()), int(pts.size()));
    r.observed["maxwell_satisfied"] = r.maxwell->satisfied;
  }
  if (s.flat_center) {
    const PotentialJet j = field.jet(Vec3::Zero());
    CenterProbe c;
    c.gradient_norm = j.gradient.norm();
    c.hessian_norm = j.hessian.norm();
    const CurvatureSample cs = asd_curvature(j, Vec3::Zero());
    c.riem_norm_sq = cs.riem_norm_sq;
    c.flat = cs.flat;
    CriticalPoint cp = classify(Vec3::Zero(), j, opts.search.degeneracy_tol);
    c.label = second_order_stability_scan(field, {cp}).front();
    r.observed["center_flat"] = c.flat && cp.degenerate_count == 3;
    r.observed["center_second_order_stable"] = c.label.second_order_stable;
    r.observed["center_not_local_max"] = c.label.not_local_max;
    r.center = c;
  }
  if (opts.oracle) {
    const int res = opts.oracle_resolution > 0 ? opts.oracle_resolution : 128;
    r.oracle = compare_with_oracle(pts, oracle_census(cfg, res, opts.search.threads), false);
    r.observed["oracle_one_to_one"] = r.oracle->one_to_one;
  }
}

inline void run_torus(const Scenario& s, const RunOptions& opts, Report& r) {
  const TorusConfiguration& cfg = s.torus_config();
  const TorusField field(cfg);
  r.census = find_critical_points(field, opts.search);
  const auto& pts = r.census.points;
  r.observed["critical_count"] = double(pts.size());
  int on_loci = 0, in_plane = 0;
  for (const auto& p : pts) {
    const double z = (*p.fractional)[2];
    on_loci += near_half_integer_plane(z);
    in_plane += std::abs(z - std::round(z)) <= 1e-6;
  }
  r.observed["on_loci"] = on_loci;
  r.observed["in_plane_count"] = in_plane;
  const Lattice& lat = cfg.lattice;
  const double dedup = 1e-6 * lat.diameter();
  int closed = 1;
  for (const auto& p : pts) {
    bool found = false;
    for (const auto& q : pts) found |= lat.min_image_norm(p.location + q.location) <= dedup;
    if (!found) closed = 0;
  }
  r.observed["parity_closed"] = closed;

  std::vector<CriticalPoint> regular;
  for (const auto& p : pts)
    if (!p.degenerate) regular.push_back(p);
  r.observed["degenerate_count"] = double(pts.size() - regular.size());
  r.threshold = regular.empty() ? std::numeric_limits<double>::infinity() : find_epsilon0(regular, opts.n_max);
  r.parameter = opts.epsilon ? *opts.epsilon : (std::isfinite(r.threshold) ? 0.5 * r.threshold : 1.0);
  r.orbits = orbits_torus(pts, r.parameter, opts.n_max);
  r.observed["geodesic_index_1"] = count_if_index(r.orbits, 1);
  r.observed["geodesic_index_2"] = count_if_index(r.orbits, 2);
  int identity = 1;
  for (const auto& o : r.orbits)
    if (!o.degenerate_base && o.geodesic_index != 3 - o.base.morse_index) identity = 0;
  r.observed["index_identity"] = identity;

  if (!cfg.exploratory && regular.size() == pts.size()) {
    r.morse = morse_audit(pts, cfg);
    r.observed["euler_sum"] = r.morse->euler_sum;
    r.observed["nu1"] = r.morse->nu[1];
    r.observed["nu2"] = r.morse->nu[2];
    r.observed["bound1_satisfied"] = r.morse->bound1_satisfied;
    r.observed["bound2_satisfied"] = r.morse->bound2_satisfied;
  }
  if (opts.oracle) {
    const int res = opts.oracle_resolution > 0 ? opts.oracle_resolution : 96;
    r.oracle = compare_with_oracle(pts, oracle_census(field, res, opts.search.threads), true);
    r.observed["oracle_one_to_one"] = r.oracle->one_to_one;
  }
}

}  // namespace scenario_detail

/// Census, orbits at 2 m0 (or eps0 / 2), stability and audits, then every
/// expectation compared exactly against the observed value.
inline Report run_scenario(const Scenario& s, const RunOptions& opts = {}) {
  Report r;
  r.scenario = s.name;
  r.params = s.params;
  r.torus = s.torus();
  r.annotations = s.annotations;
  if (!s.parts.empty()) {
    double crit = 0, g1 = 0, g2 = 0;
    for (const auto& part : s.parts) {
      r.parts.push_back(run_scenario(part, opts));
      const Report& pr = r.parts.back();
      crit += pr.observed.at("critical_count");
      g1 += pr.observed.at("geodesic_index_1");
      g2 += pr.observed.at("geodesic_index_2");
      r.passed = r.passed && pr.passed;
    }
    r.observed["critical_count"] = crit;
    r.observed["geodesic_index_1"] = g1;
    r.observed["geodesic_index_2"] = g2;
  } else if (s.torus()) {
    scenario_detail::run_torus(s, opts, r);
  } else {
    scenario_detail::run_euclidean(s, opts, r);
  }
  for (const auto& e : s.expected) {
    Check c{e.key, e.value, std::numeric_limits<double>::quiet_NaN(), false, e.provenance};
    auto it = r.observed.find(e.key);
    if (it != r.observed.end()) {
      c.observed = it->second;
      c.passed = c.observed == c.expected;
    }
    r.passed = r.passed && c.passed;
    r.checks.push_back(c);
  }
  if (r.oracle) {
    r.checks.push_back({"oracle_one_to_one", 1, double(r.oracle->one_to_one), r.oracle->one_to_one,
                        "brute-force grid oracle"});
    r.passed = r.passed && r.oracle->one_to_one;
  }
  return r;
}

}  // namespace ghgeo
