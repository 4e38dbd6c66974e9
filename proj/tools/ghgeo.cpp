// ghgeo command-line entry point.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ghgeo/critical.hpp"
#include "ghgeo/curvature.hpp"
#include "ghgeo/ewald.hpp"
#include "ghgeo/geodesic.hpp"
#include "ghgeo/io.hpp"
#include "ghgeo/scenarios.hpp"

using namespace ghgeo;

namespace {

struct Common {
  std::string format = "json";
  unsigned threads = 0;
  int grid = 16;
  double newton_tol = 1e-12;
  double degeneracy_tol = 1e-8;
  int nmax = kDefaultModes;

  SearchOptions search() const {
    SearchOptions s;
    s.grid_resolution = grid;
    s.newton_tol = newton_tol;
    s.degeneracy_tol = degeneracy_tol;
    s.threads = threads;
    return s;
  }

  Json options() const {
    return {{"format", format}, {"threads", threads}, {"grid", grid},
            {"newton_tol", newton_tol}, {"degeneracy_tol", degeneracy_tol}, {"nmax", nmax}};
  }
};

void emit_json(const Json& manifest, const Json& result) {
  Json out;
  out["manifest"] = manifest;
  out["result"] = result;
  std::cout << out.dump(2) << '\n';
}

void emit_csv(const Json& manifest, const std::string& body) {
  std::cout << "# manifest " << manifest.dump() << '\n' << body;
}

int fail(ErrorCode code, const std::string& message) {
  Json e{{"error", {{"code", to_string(code)}, {"message", message}}}};
  std::cerr << e.dump() << '\n';
  return 2;
}

Census census_of(const AnyConfig& cfg, const SearchOptions& opts) {
  if (auto* e = std::get_if<ChargeConfiguration>(&cfg)) return find_critical_points(*e, opts);
  return find_critical_points(TorusField(std::get<TorusConfiguration>(cfg)), opts);
}

Vec3 to_vec(const std::vector<double>& v) { return Vec3(v[0], v[1], v[2]); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geodesic circle orbits of multi-center harmonic potentials"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--threads", common.threads, "Worker cap (0: GHGEO_THREADS or hardware)");
  app.add_option("--grid", common.grid, "Seed grid resolution per axis");
  app.add_option("--newton-tol", common.newton_tol, "Relative Newton tolerance");
  app.add_option("--degeneracy-tol", common.degeneracy_tol, "Relative degeneracy tolerance");

  std::string config_path;
  std::vector<double> at;
  bool fractional = false;
  auto* eval = app.add_subcommand("eval", "Potential, gradient and Hessian at a point");
  eval->add_option("--config", config_path)->required();
  eval->add_option("--at", at)->required()->delimiter(',')->expected(3);
  eval->add_flag("--fractional", fractional, "Torus point in fractional coordinates");

  bool oracle = false;
  int resolution = 0;
  bool quotient = false;
  auto* crit = app.add_subcommand("crit", "Critical point census");
  crit->add_option("--config", config_path)->required();
  crit->add_flag("--oracle", oracle, "Also run the brute-force grid oracle");
  crit->add_option("--resolution", resolution, "Oracle resolution (0: 128 Euclidean, 96 torus)");
  crit->add_flag("--quotient", quotient, "Torus: identify x with -x");

  std::optional<double> mass, epsilon;
  auto* orbits = app.add_subcommand("orbits", "Geodesic orbits over the census");
  orbits->add_option("--config", config_path)->required();
  auto* mass_opt = orbits->add_option("--m", mass, "Euclidean mass (default 2 m0)");
  orbits->add_option("--epsilon", epsilon, "Torus epsilon (default eps0 / 2)")->excludes(mass_opt);
  orbits->add_option("--nmax", common.nmax, "Highest Fourier mode");

  int curv_grid = 0;
  std::vector<double> box;
  auto* curv = app.add_subcommand("curv", "Curvature field on a grid");
  curv->add_option("--config", config_path)->required();
  curv->add_option("--grid", curv_grid, "Nodes per axis")->required();
  curv->add_option("--box", box, "xmin,ymin,zmin,xmax,ymax,zmax")->required()->delimiter(',')->expected(6);

  auto* thresholds = app.add_subcommand("thresholds", "m0 or eps0");
  thresholds->add_option("--config", config_path)->required();
  thresholds->add_option("--nmax", common.nmax, "Highest Fourier mode");

  std::string census_path;
  auto* audit = app.add_subcommand("audit", "Morse and Maxwell audits of a saved census");
  audit->add_option("--census", census_path, "Output of crit in JSON")->required();

  auto* scenario = app.add_subcommand("scenario", "Shipped scenarios");
  scenario->require_subcommand(1);
  std::string scenario_name;
  std::vector<std::string> params;
  auto* run = scenario->add_subcommand("run", "Run a scenario and check its expectations");
  run->add_option("name", scenario_name)->required();
  run->add_option("--param", params, "k=v override")->allow_extra_args(false);
  run->add_flag("--oracle", oracle, "Also run the brute-force grid oracle");
  run->add_option("--resolution", resolution, "Oracle resolution");
  run->add_option("--nmax", common.nmax, "Highest Fourier mode");
  auto* list = scenario->add_subcommand("list", "List scenario builders and the default catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorCode::InputError, e.what());
  }

  try {
    SearchOptions search = common.search();
    search.quotient = quotient;
    search.validate();
    Json opts = common.options();

    if (*eval) {
      const AnyConfig cfg = load_config(config_path);
      opts["at"] = at;
      opts["fractional"] = fractional;
      const Json m = manifest("eval", config_path, opts);
      PotentialJet j;
      if (auto* e = std::get_if<ChargeConfiguration>(&cfg)) {
        j = eval_euclidean(*e, to_vec(at));
      } else {
        const TorusField field(std::get<TorusConfiguration>(cfg));
        j = fractional ? field.jet_fractional(to_vec(at)) : field.jet(to_vec(at));
      }
      emit_json(m, to_json(j));
      return 0;
    }

    if (*crit) {
      const AnyConfig cfg = load_config(config_path);
      opts["oracle"] = oracle;
      opts["resolution"] = resolution;
      opts["quotient"] = quotient;
      const Json m = manifest("crit", config_path, opts);
      const Census census = census_of(cfg, search);
      if (common.format == "csv") {
        emit_csv(m, census_csv(census));
        return 0;
      }
      Json result = to_json(census);
      result["config"] = to_json(cfg);
      if (oracle) {
        OracleAgreement a;
        if (auto* e = std::get_if<ChargeConfiguration>(&cfg))
          a = compare_with_oracle(census.points, oracle_census(*e, resolution > 0 ? resolution : 128, common.threads),
                                  false);
        else
          a = compare_with_oracle(census.points,
                                  oracle_census(TorusField(std::get<TorusConfiguration>(cfg)),
                                                resolution > 0 ? resolution : 96, common.threads),
                                  true);
        result["oracle"] = to_json(a);
      }
      emit_json(m, result);
      return 0;
    }

    if (*orbits || *thresholds) {
      const AnyConfig cfg = load_config(config_path);
      if (mass) opts["m"] = *mass;
      if (epsilon) opts["epsilon"] = *epsilon;
      const Json m = manifest(*orbits ? "orbits" : "thresholds", config_path, opts);
      const Census census = census_of(cfg, search);
      std::vector<CriticalPoint> regular;
      for (const auto& p : census.points)
        if (!p.degenerate) regular.push_back(p);
      std::vector<GeodesicOrbit> out;
      Json result;
      if (auto* e = std::get_if<ChargeConfiguration>(&cfg)) {
        if (epsilon) throw Error(ErrorCode::InputError, "--epsilon applies to torus configurations");
        const double m0 = regular.empty() ? 0.0 : find_m0(*e, regular, common.nmax);
        result["m0"] = m0;
        if (*thresholds) {
          emit_json(m, result);
          return 0;
        }
        ChargeConfiguration c = *e;
        c.mass = mass ? *mass : 2.0 * m0;
        result["m"] = c.mass;
        out = orbits_euclidean(c, census.points, common.nmax);
      } else {
        if (mass) throw Error(ErrorCode::InputError, "--m applies to Euclidean configurations");
        if (regular.empty()) throw Error(ErrorCode::NoThreshold, "no nondegenerate critical points");
        const double eps0 = find_epsilon0(regular, common.nmax);
        result["epsilon0"] = io_detail::real(eps0);
        if (*thresholds) {
          emit_json(m, result);
          return 0;
        }
        const double eps = epsilon ? *epsilon : (std::isfinite(eps0) ? 0.5 * eps0 : 1.0);
        result["epsilon"] = eps;
        out = orbits_torus(census.points, eps, common.nmax);
      }
      if (common.format == "csv") {
        emit_csv(m, orbits_csv(out));
        return 0;
      }
      Json arr = Json::array();
      for (const auto& o : out) arr.push_back(to_json(o));
      result["orbits"] = arr;
      emit_json(m, result);
      return 0;
    }

    if (*curv) {
      const AnyConfig cfg = load_config(config_path);
      opts["curv_grid"] = curv_grid;
      opts["box"] = box;
      const Json m = manifest("curv", config_path, opts);
      const Box b{Vec3(box[0], box[1], box[2]), Vec3(box[3], box[4], box[5])};
      if (!(b.hi.array() >= b.lo.array()).all()) throw Error(ErrorCode::InputError, "box must have lo <= hi");
      std::vector<CurvatureSample> samples;
      if (auto* e = std::get_if<ChargeConfiguration>(&cfg))
        samples = curvature_grid(EuclideanField(*e), b, curv_grid, common.threads);
      else
        samples = curvature_grid(TorusField(std::get<TorusConfiguration>(cfg)), b, curv_grid, common.threads);
      if (common.format == "csv") {
        emit_csv(m, curvature_csv(samples));
        return 0;
      }
      Json arr = Json::array();
      for (const auto& s : samples)
        arr.push_back({{"point", io_detail::vec_json(s.point)}, {"riem_norm_sq", s.riem_norm_sq}, {"flat", s.flat}});
      emit_json(m, {{"samples", arr}});
      return 0;
    }

    if (*audit) {
      std::ifstream in(census_path);
      if (!in) throw Error(ErrorCode::InputError, "cannot open " + census_path);
      Json j;
      try {
        in >> j;
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::InputError, census_path + ": " + e.what());
      }
      const Json& body = j.contains("result") ? j.at("result") : j;
      if (!body.contains("config")) throw Error(ErrorCode::InputError, "census file must embed its config");
      const AnyConfig cfg = parse_config(body.at("config"));
      const Census census = census_from_json(body);
      const Json m = manifest("audit", census_path, opts);
      Json result;
      if (auto* e = std::get_if<ChargeConfiguration>(&cfg)) {
        result["maxwell_audit"] = to_json(maxwell_audit(int(e->size()), int(census.points.size())));
      } else {
        const auto& t = std::get<TorusConfiguration>(cfg);
        if (t.exploratory) throw Error(ErrorCode::NotBalanced, "Morse audit needs a balanced configuration");
        result["morse_audit"] = to_json(morse_audit(census.points, t));
        result["maxwell_audit"] =
            to_json(maxwell_audit(int(t.derived_charges().size()), int(census.points.size())));
      }
      emit_json(m, result);
      return 0;
    }

    if (*list) {
      const Json m = manifest("scenario list", "", opts);
      Json names = Json::array();
      for (const auto& c : catalog()) names.push_back({{"name", c.name}, {"description", c.description}});
      Json defaults = Json::array();
      for (const auto& s : default_catalog()) defaults.push_back(expectations_json(s));
      emit_json(m, {{"builders", names}, {"default_catalog", defaults}});
      return 0;
    }

    if (*run) {
      Params p;
      for (const auto& kv : params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw Error(ErrorCode::InputError, "--param expects k=v: " + kv);
        p[kv.substr(0, eq)] = kv.substr(eq + 1);
      }
      opts["params"] = p;
      opts["oracle"] = oracle;
      opts["resolution"] = resolution;
      const Json m = manifest("scenario run", scenario_name, opts);
      const Scenario s = build(scenario_name, p);
      RunOptions ro;
      ro.search = search;
      ro.n_max = common.nmax;
      ro.oracle = oracle;
      ro.oracle_resolution = resolution;
      const Report r = run_scenario(s, ro);
      if (common.format == "csv") {
        emit_csv(m, census_csv(r.census));
      } else {
        emit_json(m, to_json(r));
      }
      return r.passed ? 0 : 1;
    }
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail(ErrorCode::InputError, e.what());
  }
  return 0;
}
