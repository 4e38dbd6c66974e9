#pragma once

// JSON configuration schema, JSON/CSV serialization of results and the run
// manifest. Requires the vendored json.hpp on the include path.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "ghgeo/core.hpp"
#include "ghgeo/critical.hpp"
#include "ghgeo/curvature.hpp"
#include "ghgeo/geodesic.hpp"
#include "ghgeo/potential.hpp"
#include "ghgeo/scenarios.hpp"

namespace ghgeo {

using Json = nlohmann::ordered_json;
using AnyConfig = std::variant<ChargeConfiguration, TorusConfiguration>;

inline constexpr const char* kToolVersion = "0.1.0";

namespace io_detail {

inline Vec3 vec(const Json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorCode::InputError, what + " must be an array of three numbers");
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::InputError, what + " must be an array of three numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

inline std::vector<Vec3> vecs(const Json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorCode::InputError, what + " must be an array");
  std::vector<Vec3> out;
  for (const auto& e : j) out.push_back(vec(e, what + " entry"));
  return out;
}

template <class T>
std::vector<T> numbers(const Json& j, const std::string& what) {
  if (!j.is_array()) throw Error(ErrorCode::InputError, what + " must be an array");
  std::vector<T> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw Error(ErrorCode::InputError, what + " must hold numbers");
    if constexpr (std::is_integral_v<T>) {
      const double d = e.get<double>();
      if (d != std::floor(d)) throw Error(ErrorCode::InputError, what + " must hold integers");
    }
    out.push_back(e.get<T>());
  }
  return out;
}

inline Json vec_json(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }

inline Json mat_json(const Mat3& m) {
  Json a = Json::array();
  for (int i = 0; i < 3; ++i) a.push_back(Json::array({m(i, 0), m(i, 1), m(i, 2)}));
  return a;
}

// NaN and infinities are not JSON numbers.
inline Json real(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace io_detail

/// Schema: Euclidean {"centers", "weights", "mass", "exploratory"} or torus
/// {"lattice", "coords", "free_points", "free_weights", "fixed_weights",
/// "charges"}. Torus points are fractional unless "coords" is "cartesian".
inline AnyConfig parse_config(const Json& j) {
  using namespace io_detail;
  if (!j.is_object()) throw Error(ErrorCode::InputError, "configuration must be a JSON object");
  const std::string coords = j.value("coords", std::string("fractional"));
  if (coords != "fractional" && coords != "cartesian")
    throw Error(ErrorCode::InputError, "coords must be \"fractional\" or \"cartesian\"");
  try {
    if (j.contains("lattice")) {
      const auto rows = vecs(j.at("lattice"), "lattice");
      if (rows.size() != 3) throw Error(ErrorCode::InputError, "lattice needs three vectors");
      Lattice lat;
      for (int i = 0; i < 3; ++i) lat.basis.col(i) = rows[i];
      lat.validate();
      auto frac = [&](const Vec3& p) { return coords == "cartesian" ? lat.to_fractional(p) : p; };
      if (j.contains("charges")) {
        std::vector<TorusCharge> q;
        for (const auto& c : j.at("charges")) {
          if (!c.is_object() || !c.contains("at") || !c.contains("charge") || !c.at("charge").is_number())
            throw Error(ErrorCode::InputError, "charges entries need \"at\" and numeric \"charge\"");
          q.push_back({frac(vec(c.at("at"), "charge position")), c.at("charge").get<double>()});
        }
        return TorusConfiguration::exploratory_charges(lat, q);
      }
      std::vector<Vec3> pts;
      for (const auto& p : vecs(j.value("free_points", Json::array()), "free_points")) pts.push_back(frac(p));
      auto kw = numbers<int>(j.value("free_weights", Json::array()), "free_weights");
      std::array<int, 8> mw{};
      if (j.contains("fixed_weights")) {
        const auto m = numbers<int>(j.at("fixed_weights"), "fixed_weights");
        if (m.size() != 8) throw Error(ErrorCode::InputError, "fixed_weights needs eight entries");
        std::copy(m.begin(), m.end(), mw.begin());
      }
      return TorusConfiguration::make(lat, pts, kw, mw);
    }
    if (!j.contains("centers")) throw Error(ErrorCode::InputError, "configuration needs \"centers\" or \"lattice\"");
    if (coords != "cartesian" && j.contains("coords"))
      throw Error(ErrorCode::InputError, "Euclidean centers are Cartesian");
    const auto centers = vecs(j.at("centers"), "centers");
    const double mass = j.value("mass", 0.0);
    if (j.value("exploratory", false)) {
      auto w = j.contains("weights") ? numbers<double>(j.at("weights"), "weights")
                                     : std::vector<double>(centers.size(), 1.0);
      return ChargeConfiguration::exploratory_charges(centers, w, mass);
    }
    auto w = j.contains("weights") ? numbers<int>(j.at("weights"), "weights") : std::vector<int>(centers.size(), 1);
    return ChargeConfiguration::make(centers, w, mass);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InputError, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InputError) throw;
    throw Error(ErrorCode::InputError, e.what());
  }
}

inline AnyConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InputError, "cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InputError, path + ": " + e.what());
  }
  return parse_config(j);
}

inline Json to_json(const ChargeConfiguration& c) {
  Json j;
  Json centers = Json::array();
  for (const auto& p : c.centers) centers.push_back(io_detail::vec_json(p));
  j["centers"] = centers;
  j["weights"] = c.weights;
  j["mass"] = c.mass;
  if (c.exploratory) j["exploratory"] = true;
  return j;
}

inline Json to_json(const TorusConfiguration& t) {
  Json j;
  Json lat = Json::array();
  for (int i = 0; i < 3; ++i) lat.push_back(io_detail::vec_json(t.lattice.vector(i)));
  j["lattice"] = lat;
  j["coords"] = "fractional";
  if (t.exploratory) {
    Json q = Json::array();
    for (const auto& c : t.explicit_charges) q.push_back({{"at", io_detail::vec_json(c.fractional)}, {"charge", c.charge}});
    j["charges"] = q;
    return j;
  }
  Json pts = Json::array();
  for (const auto& p : t.free_points) pts.push_back(io_detail::vec_json(p));
  j["free_points"] = pts;
  j["free_weights"] = t.free_weights;
  j["fixed_weights"] = t.fixed_weights;
  j["foscolo_admissible"] = t.foscolo_admissible();
  return j;
}

inline Json to_json(const AnyConfig& c) {
  return std::visit([](const auto& x) { return to_json(x); }, c);
}

inline Json to_json(const PotentialJet& j) {
  return {{"value", j.value},
          {"gradient", io_detail::vec_json(j.gradient)},
          {"hessian", io_detail::mat_json(j.hessian)},
          {"laplacian", j.hessian.trace()}};
}

inline Json to_json(const CriticalPoint& p) {
  Json j;
  j["location"] = io_detail::vec_json(p.location);
  if (p.fractional) j["fractional"] = io_detail::vec_json(*p.fractional);
  j["value"] = p.value;
  j["gradient_residual"] = p.gradient_residual;
  j["eigenvalues"] = io_detail::vec_json(p.eigenvalues);
  j["morse_index"] = p.morse_index;
  j["degenerate"] = p.degenerate;
  return j;
}

inline Json to_json(const Census& c) {
  Json pts = Json::array();
  for (const auto& p : c.points) pts.push_back(to_json(p));
  return {{"count", c.points.size()},
          {"points", pts},
          {"diagnostics",
           {{"seeds", c.diagnostics.seeds},
            {"converged", c.diagnostics.converged},
            {"nonconverged", c.diagnostics.nonconverged},
            {"duplicates", c.diagnostics.duplicates}}}};
}

inline Json to_json(const GeodesicOrbit& o, int head = 6) {
  Json spec = Json::array();
  for (std::size_t i = 0; i < o.spectrum.entries.size() && int(i) < head; ++i) {
    const auto& e = o.spectrum.entries[i];
    spec.push_back({{"mode", e.mode}, {"branch", e.branch}, {"multiplicity", e.multiplicity}, {"eigenvalue", e.eigenvalue}});
  }
  return {{"location", io_detail::vec_json(o.base.location)},
          {"regime", o.regime == Regime::Euclidean ? "euclidean" : "torus"},
          {o.regime == Regime::Euclidean ? "m" : "epsilon", o.parameter},
          {"length", o.length},
          {"morse_index", o.base.morse_index},
          {"geodesic_index", o.geodesic_index},
          {"nullity", o.nullity},
          {"degenerate_base", o.degenerate_base},
          {"spectrum_head", spec}};
}

inline Json to_json(const MorseAudit& a) {
  return {{"n", a.n},
          {"nu", a.nu},
          {"euler_sum", a.euler_sum},
          {"bound1_satisfied", a.bound1_satisfied},
          {"bound2_satisfied", a.bound2_satisfied},
          {"euler_mismatch", a.euler_mismatch}};
}

inline Json to_json(const MaxwellAudit& m) {
  return {{"charges", m.charges}, {"critical_count", m.critical_count}, {"bound", m.bound}, {"satisfied", m.satisfied}};
}

inline Json to_json(const OracleAgreement& a) {
  return {{"newton_count", a.newton_count},
          {"oracle_count", a.oracle_count},
          {"matched", a.matched},
          {"one_to_one", a.one_to_one}};
}

inline Json to_json(const StabilityLabel& l) {
  Json j{{"location", io_detail::vec_json(l.location)},
         {"second_order_stable", l.second_order_stable},
         {"not_local_max", l.not_local_max},
         {"riem_norm_sq", l.curvature.riem_norm_sq}};
  if (l.witness) {
    j["witness"] = io_detail::vec_json(*l.witness);
    j["witness_gain"] = l.witness_gain;
  }
  return j;
}

inline Json to_json(const Report& r) {
  Json j;
  j["scenario"] = r.scenario;
  j["params"] = r.params;
  j["passed"] = r.passed;
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"key", c.key},
                      {"expected", io_detail::real(c.expected)},
                      {"observed", io_detail::real(c.observed)},
                      {"passed", c.passed},
                      {"provenance", c.provenance}});
  j["checks"] = checks;
  if (!r.parts.empty()) {
    Json parts = Json::array();
    for (const auto& p : r.parts) parts.push_back(to_json(p));
    j["parts"] = parts;
    j["totals"] = r.observed;
  } else {
    j["census"] = to_json(r.census);
    j[r.torus ? "epsilon0" : "m0"] = io_detail::real(r.threshold);
    j[r.torus ? "epsilon" : "m"] = r.parameter;
    Json orbits = Json::array();
    for (const auto& o : r.orbits) orbits.push_back(to_json(o));
    j["orbits"] = orbits;
    if (!r.stability.empty()) {
      Json st = Json::array();
      for (const auto& l : r.stability) st.push_back(to_json(l));
      j["stability"] = st;
    }
    if (r.center)
      j["center"] = {{"gradient_norm", r.center->gradient_norm},
                     {"hessian_norm", r.center->hessian_norm},
                     {"riem_norm_sq", r.center->riem_norm_sq},
                     {"flat", r.center->flat},
                     {"stability", to_json(r.center->label)}};
    if (r.morse) j["morse_audit"] = to_json(*r.morse);
    if (r.maxwell) j["maxwell_audit"] = to_json(*r.maxwell);
    if (r.oracle) j["oracle"] = to_json(*r.oracle);
    j["observed"] = r.observed;
  }
  if (!r.annotations.empty()) j["annotations"] = r.annotations;
  return j;
}

/// Inverse of to_json(Census) for the fields the audits read.
inline Census census_from_json(const Json& j) {
  using namespace io_detail;
  if (!j.is_object() || !j.contains("points") || !j.at("points").is_array())
    throw Error(ErrorCode::InputError, "census needs a \"points\" array");
  Census c;
  try {
    for (const auto& e : j.at("points")) {
      CriticalPoint p;
      p.location = vec(e.at("location"), "location");
      if (e.contains("fractional")) p.fractional = vec(e.at("fractional"), "fractional");
      p.value = e.value("value", 0.0);
      p.gradient_residual = e.value("gradient_residual", 0.0);
      p.eigenvalues = vec(e.at("eigenvalues"), "eigenvalues");
      p.morse_index = e.at("morse_index").get<int>();
      p.degenerate = e.value("degenerate", false);
      if (p.morse_index < 0 || p.morse_index > 3) throw Error(ErrorCode::InputError, "morse_index out of range");
      c.points.push_back(p);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InputError, e.what());
  }
  return c;
}

inline Json expectations_json(const Scenario& s) {
  Json e = Json::array();
  for (const auto& x : s.expected) e.push_back({{"key", x.key}, {"value", x.value}, {"provenance", x.provenance}});
  return {{"scenario", s.name}, {"params", s.params}, {"expected", e}};
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

/// UTC time from SOURCE_DATE_EPOCH when set, the clock otherwise.
inline std::string manifest_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) t = std::time_t(std::strtoll(env, nullptr, 10));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline Json manifest(const std::string& command, const std::string& input, const Json& options) {
  return {{"command", command},
          {"input", input},
          {"options", options},
          {"tool_version", kToolVersion},
          {"timestamp", manifest_timestamp()}};
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string census_csv(const Census& c) {
  std::ostringstream os;
  os << "x,y,z,value,mu1,mu2,mu3,morse_index,degenerate\n";
  for (const auto& p : c.points)
    os << g17(p.location[0]) << ',' << g17(p.location[1]) << ',' << g17(p.location[2]) << ',' << g17(p.value) << ','
       << g17(p.eigenvalues[0]) << ',' << g17(p.eigenvalues[1]) << ',' << g17(p.eigenvalues[2]) << ','
       << p.morse_index << ',' << (p.degenerate ? 1 : 0) << '\n';
  return os.str();
}

inline std::string orbits_csv(const std::vector<GeodesicOrbit>& orbits) {
  std::ostringstream os;
  os << "x,y,z,length,morse_index,geodesic_index,nullity\n";
  for (const auto& o : orbits)
    os << g17(o.base.location[0]) << ',' << g17(o.base.location[1]) << ',' << g17(o.base.location[2]) << ','
       << g17(o.length) << ',' << o.base.morse_index << ',' << o.geodesic_index << ',' << o.nullity << '\n';
  return os.str();
}

inline std::string curvature_csv(const std::vector<CurvatureSample>& samples) {
  std::ostringstream os;
  os << "x,y,z,riem_norm_sq\n";
  for (const auto& s : samples)
    os << g17(s.point[0]) << ',' << g17(s.point[1]) << ',' << g17(s.point[2]) << ',' << g17(s.riem_norm_sq) << '\n';
  return os.str();
}

}  // namespace ghgeo
