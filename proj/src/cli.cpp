#include "sphvar/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sphvar/energies.hpp"
#include "sphvar/identities.hpp"
#include "sphvar/maps.hpp"
#include "sphvar/reduce.hpp"
#include "sphvar/suite.hpp"
#include "sphvar/variations.hpp"

namespace sphvar {

namespace {

using nlohmann::json;

struct RunConfig {
  std::string command;
  std::string map;
  std::optional<int> dim;
  std::optional<int> res;
  std::string kind;
  std::optional<double> kappa;
  std::string coupling;
  std::string family = "pushforward";
  std::vector<double> cs;
  std::vector<std::string> maps;
  std::vector<int> refine;
  std::string function = "coord:1";
  std::string out;
  std::string format = "json";
  std::uint64_t seed = 20240607;
  int samples = 50;
  int criterion = 0;
  unsigned threads = 0;
  bool deterministic = false;
  bool fd = false;

  json to_json() const {
    auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
    return {{"map", map},           {"dim", opt(dim)},      {"res", opt(res)},     {"kind", kind},
            {"kappa", opt(kappa)},  {"coupling", coupling}, {"family", family},    {"c", cs},
            {"maps", maps},         {"refine", refine},     {"function", function}, {"format", format},
            {"seed", seed},         {"samples", samples},   {"criterion", criterion}, {"fd", fd}};
  }
};

/// What a subcommand produced: the payload, where it came from, and whether
/// its checks passed.
struct Outcome {
  Outcome(json r, std::string src, bool ok = true, std::string table = {})
      : result(std::move(r)), source(std::move(src)), pass(ok), csv(std::move(table)) {}

  json result;
  std::string source;
  bool pass = true;
  /// Optional plot-ready table that replaces the generic CSV flattening.
  std::string csv;
};

/// Error tied to a command-line flag.
InvalidArgument flag_error(const std::string& flag, const std::string& what) {
  return InvalidArgument(flag + ": " + what);
}

template <class F>
auto with_flag(const std::string& flag, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    throw flag_error(flag, e.what());
  }
}

MapSpec require_map(const RunConfig& c) {
  if (c.map.empty()) throw flag_error("--map", "a map id is required (e.g. hopf, identity:3, suspension:5:0.5)");
  return with_flag("--map", [&] { return MapSpec::parse(c.map); });
}

int resolution(const RunConfig& c, int m) { return c.res.value_or(reference_resolution(m)); }

QuadratureGrid grid_for(const RunConfig& c, const MapSpec& map) {
  return build_grid(map.domain_dim(), resolution(c, map.domain_dim()));
}

EnergyKind require_kind(const RunConfig& c) {
  if (c.kind.empty()) throw flag_error("--kind", "an energy kind is required");
  std::string k = c.kind;
  if (c.kappa) {
    if (k != "coupled-sigma2" && k != "coupled-symplectic") {
      throw flag_error("--kappa", "only applies to --kind coupled-sigma2 or coupled-symplectic");
    }
    k += ":" + std::to_string(*c.kappa);
  }
  return with_flag("--kind", [&] { return EnergyKind::parse(k); });
}

void require_compatible(const EnergyKind& kind, const MapSpec& map) {
  if (kind.needs_omega() && !map.target().is_surface()) {
    throw flag_error("--kind", kind.name() + " needs a map into a surface, but " + map.id() + " has target S^" +
                                   std::to_string(map.target().n));
  }
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_number_float()) return csv_number(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + csv_cell(v[i]);
    return s;
  }
  return v.dump();
}

void flatten(const json& v, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) {
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
  } else {
    out.emplace_back(prefix, v);
  }
}

/// One CSV row per element of the result's row array (or per result), with
/// nested fields joined by dots.
std::string to_csv(const json& result) {
  std::vector<json> records;
  if (result.is_array()) {
    records.assign(result.begin(), result.end());
  } else if (result.contains("rows") && result["rows"].is_array()) {
    for (const auto& r : result["rows"]) records.push_back(r);
  } else if (result.contains("criteria")) {
    for (const auto& r : result["criteria"])
      for (const auto& ch : r["checks"]) {
        json row = {{"id", r["id"]}, {"title", r["title"]}, {"status", r["status"]}};
        for (auto it = ch.begin(); it != ch.end(); ++it) row["check." + it.key()] = it.value();
        records.push_back(row);
      }
  } else {
    records.push_back(result);
  }
  std::vector<std::string> header;
  std::vector<std::map<std::string, json>> rows;
  for (const auto& r : records) {
    std::vector<std::pair<std::string, json>> cells;
    flatten(r, "", cells);
    std::map<std::string, json> row;
    for (auto& [k, v] : cells) {
      if (std::find(header.begin(), header.end(), k) == header.end()) header.push_back(k);
      row[k] = v;
    }
    rows.push_back(std::move(row));
  }
  std::ostringstream s;
  for (std::size_t i = 0; i < header.size(); ++i) s << (i ? "," : "") << header[i];
  s << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      const auto it = row.find(header[i]);
      s << (i ? "," : "") << (it == row.end() ? "" : csv_cell(it->second));
    }
    s << '\n';
  }
  return s.str();
}

// -- commands -----------------------------------------------------------------

Outcome cmd_volume(const RunConfig& c) {
  if (!c.dim) throw flag_error("--dim", "required for volume");
  const int m = *c.dim;
  if (m < 2) throw flag_error("--dim", "must be at least 2");
  const QuadratureGrid g = build_grid(m, resolution(c, m));
  const double v = integrate(g, [](const Vec&) { return 1.0; });
  const double exact = sphere_volume(m);
  return {{{"dim", m}, {"grid", g.id()}, {"volume", v}, {"exact", exact}, {"error", std::abs(v - exact)}},
          "sphere_geometry/integrate"};
}

Outcome cmd_energy(const RunConfig& c) {
  const MapSpec map = require_map(c);
  const EnergyKind kind = require_kind(c);
  require_compatible(kind, map);
  const QuadratureGrid g = grid_for(c, map);
  const EnergyReport r = total_energy(kind, map, g);
  std::ostringstream csv;
  r.write_csv(g, csv);
  return {r.to_json(), "energies/total_energy", true, csv.str()};
}

Outcome cmd_el_residual(const RunConfig& c) {
  const MapSpec map = require_map(c);
  const EnergyKind kind = require_kind(c);
  require_compatible(kind, map);
  const ELResidual r = el_residual(kind, map, grid_for(c, map));
  return {r.to_json(), "variations/el_residual"};
}

Outcome cmd_hessian_trace(const RunConfig& c) {
  const MapSpec map = require_map(c);
  const EnergyKind kind = require_kind(c);
  require_compatible(kind, map);
  const FieldFamily fam = with_flag("--family", [&] { return parse_family(c.family); });
  const TraceResult r = averaged_hessian_trace(kind, map, fam, grid_for(c, map), c.fd);
  return {r.to_json(), "variations/averaged_hessian_trace"};
}

Outcome cmd_threshold(const RunConfig& c) {
  const MapSpec map = require_map(c);
  EnergyType second;
  if (c.coupling == "sigma2") {
    second = EnergyType::SigmaTwo;
  } else if (c.coupling == "symplectic") {
    second = EnergyType::SymplecticDirichlet;
  } else {
    throw flag_error("--coupling", "expected sigma2 or symplectic, got '" + c.coupling + "'");
  }
  if (second == EnergyType::SymplecticDirichlet && !map.target().is_surface()) {
    throw flag_error("--coupling", "symplectic coupling needs a map into a surface");
  }
  const ThresholdResult r = with_flag("--map", [&] { return stability_threshold(map, second, grid_for(c, map)); });
  return {r.to_json(), "variations/stability_threshold"};
}

Outcome cmd_weitzenbock(const RunConfig& c) {
  const MapSpec map = require_map(c);
  if (!map.target().is_surface()) throw flag_error("--map", "weitzenbock needs a map into a surface");
  if (!c.refine.empty()) {
    for (int r : c.refine)
      if (r < 4) throw flag_error("--refine", "resolutions must be at least 4");
    const RefinementStudy s = weitzenbock_refinement(map, c.refine);
    json rows = json::array();
    for (std::size_t k = 0; k < s.resolutions.size(); ++k) {
      rows.push_back({{"resolution", s.resolutions[k]}, {"residual", s.residuals[k]}});
    }
    std::ostringstream csv;
    s.write_csv(csv);
    return {{{"map", s.map_id}, {"rows", rows}, {"converged", s.converged()}},
            "identities/weitzenbock_refinement",
            s.converged(),
            csv.str()};
  }
  const IdentityReport r = weitzenbock_residual(map, grid_for(c, map));
  return {r.to_json(), "identities/weitzenbock_residual", r.pass};
}

Outcome cmd_nakauchi(const RunConfig& c) {
  const MapSpec map = require_map(c);
  const IdentityReport r = nakauchi_weitzenbock_residual(map, grid_for(c, map));
  return {r.to_json(), "identities/nakauchi_weitzenbock_residual", r.pass};
}

Outcome cmd_magic(const RunConfig& c) {
  const MapSpec map = require_map(c);
  if (c.samples < 1) throw flag_error("--samples", "must be positive");
  const int m = map.domain_dim();
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> N01;
  auto gaussian = [&] {
    Vec v(m + 1);
    for (int i = 0; i <= m; ++i) v(i) = N01(rng);
    return v;
  };
  double worst = 0.0;
  for (int k = 0; k < c.samples; ++k) {
    const SpherePoint x = SpherePoint::normalized(gaussian());
    const Vec X = TangentVector::project(x, gaussian()).vec;
    const Vec Y = TangentVector::project(x, gaussian()).vec;
    const Vec Z = TangentVector::project(x, gaussian()).vec;
    worst = std::max(worst, magic_lemma_residual(map, x, X, Y, Z));
  }
  const double tol = 1e-5;
  return {{{"map", map.id()}, {"samples", c.samples}, {"max_residual", worst}, {"tolerance", tol},
           {"pass", worst <= tol}},
          "identities/magic_lemma_residual",
          worst <= tol};
}

std::vector<std::string> default_inequality_maps() {
  std::vector<std::string> ids = {"identity:3", "identity:4",        "identity:5", "hopf",       "suspension:3:0.5",
                                  "suspension:5:0.5", "suspension:5:0.05", "reflect:3",  "rotate:4:7", "constant:3:2",
                                  "compose(hopf,rotate:3:11)"};
  for (int s = 1; s <= 20; ++s) {
    ids.push_back("poly:" + std::to_string(s) + ":" + std::to_string(2 + s % 2) + ":" + std::to_string(3 + s % 2) +
                  ":" + std::to_string(2 + (s / 2) % 2));
  }
  return ids;
}

Outcome cmd_inequalities(const RunConfig& c) {
  std::vector<std::string> ids = c.maps;
  if (!c.map.empty()) ids.push_back(c.map);
  if (ids.empty()) ids = default_inequality_maps();
  json rows = json::array();
  bool pass = true;
  for (const auto& id : ids) {
    const MapSpec map = with_flag("--maps", [&] { return MapSpec::parse(id); });
    const InequalityReport r = inequality_check(map, grid_for(c, map));
    rows.push_back(r.to_json());
    pass = pass && r.pass();
  }
  return {{{"rows", rows}, {"pass", pass}}, "identities/inequality_check", pass};
}

Outcome cmd_infimum_sweep(const RunConfig& c) {
  const int m = c.dim.value_or(5);
  if (m < 3) throw flag_error("--dim", "the sweep needs m >= 3");
  std::vector<double> cs = c.cs.empty() ? std::vector<double>{1.0, 0.5, 0.25, 0.1, 0.05} : c.cs;
  for (double v : cs)
    if (!(v > 0.0)) throw flag_error("--c", "sweep values must be positive");
  const SweepResult s = suspension_e4_sweep(m, cs, resolution(c, m));
  return {s.to_json(), "energies/suspension_e4_sweep", s.within_bound};
}

Outcome cmd_degree(const RunConfig& c) {
  const MapSpec map = require_map(c);
  const QuadratureGrid g = grid_for(c, map);
  const DegreeResult d = topological_degree(map, g);
  return {{{"map", map.id()}, {"grid", g.id()}, {"degree", d.degree}, {"raw", d.raw}}, "maps/topological_degree"};
}

ScalarField parse_function(const std::string& s) {
  const auto colon = s.find(':');
  const std::string head = s.substr(0, colon), tail = colon == std::string::npos ? "" : s.substr(colon + 1);
  try {
    if (head == "constant") return ScalarField::constant(std::stod(tail));
    if (head == "coord") return ScalarField::coordinate(std::stoi(tail));
  } catch (const std::logic_error&) {
  }
  throw flag_error("--function", "expected constant:C or coord:A, got '" + s + "'");
}

Outcome cmd_stability_lhs(const RunConfig& c) {
  const MapSpec map = require_map(c);
  const ScalarField f = parse_function(c.function);
  const double lhs = stability_inequality_lhs(map, f, grid_for(c, map));
  return {{{"map", map.id()}, {"function", f.name}, {"lhs", lhs}, {"nonnegative", lhs >= 0.0}},
          "variations/stability_inequality_lhs"};
}

Outcome cmd_suite(const RunConfig& c) {
  SuiteConfig sc;
  sc.res = c.res;
  sc.seed = c.seed;
  SuiteReport rep;
  if (c.criterion) {
    if (c.criterion < 1 || c.criterion > kCriterionCount) {
      throw flag_error("--criterion", "must be in 1.." + std::to_string(kCriterionCount));
    }
    rep.rows.push_back(run_criterion(c.criterion, sc));
  } else {
    rep = report_suite(sc);
  }
  return {rep.to_json(!c.deterministic), "suite/report_suite", !rep.any_fail()};
}

std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Numerical checks for variational problems between round spheres", "sphvar"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; flags given on the command line take precedence");
  app.add_option("--map", c.map, "map id: identity:M, hopf, suspension:M:C, poly:SEED:DEG:M:N, ...");
  app.add_option("--dim", c.dim, "domain dimension m");
  app.add_option("--res", c.res, "nodes per angle (default: reference resolution for the dimension)")
      ->check(CLI::Range(4, 1024));
  app.add_option("--kind", c.kind, "dirichlet, p:P, sigma2, symplectic, coupled-sigma2[:K], coupled-symplectic[:K]");
  app.add_option("--kappa", c.kappa, "coupling constant for coupled kinds")->check(CLI::PositiveNumber);
  app.add_option("--coupling", c.coupling, "sigma2 or symplectic");
  app.add_option("--family", c.family, "pushforward or pullback");
  app.add_option("--c", c.cs, "sweep values")->delimiter(',');
  app.add_option("--maps", c.maps, "map ids for the inequality suite")->delimiter(';');
  app.add_option("--refine", c.refine, "resolutions for a refinement study")->delimiter(',');
  app.add_option("--function", c.function, "test function: constant:C or coord:A");
  app.add_option("--samples", c.samples, "random frame triples for magic");
  app.add_option("--criterion", c.criterion, "run a single acceptance criterion");
  app.add_option("--out", c.out, "write the report here instead of stdout");
  app.add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--seed", c.seed, "seed for random nodes, frames and fields");
  app.add_option("--threads", c.threads, "upper bound on worker threads (0 = all)");
  app.add_flag("--deterministic", c.deterministic, "omit the timestamp and timings");
  app.add_flag("--fd", c.fd, "also compute finite-difference Hessians");

  using Handler = Outcome (*)(const RunConfig&);
  const std::vector<std::tuple<std::string, std::string, Handler>> commands = {
      {"volume", "volume of S^m by quadrature", cmd_volume},
      {"energy", "total energy of a map", cmd_energy},
      {"el-residual", "Euler-Lagrange residual", cmd_el_residual},
      {"hessian-trace", "averaged second variation over a field family", cmd_hessian_trace},
      {"threshold", "critical coupling constant for stability", cmd_threshold},
      {"weitzenbock", "integrated Weitzenboeck formula for phi*Omega", cmd_weitzenbock},
      {"nakauchi", "integrated Weitzenboeck formula for phi*h", cmd_nakauchi},
      {"magic", "covariant derivative of phi*h at random frames", cmd_magic},
      {"inequalities", "pointwise bounds on sigma2", cmd_inequalities},
      {"infimum-sweep", "E4 of conformal suspensions", cmd_infimum_sweep},
      {"degree", "topological degree", cmd_degree},
      {"stability-lhs", "left side of the stability inequality", cmd_stability_lhs},
      {"suite", "acceptance battery", cmd_suite},
  };
  Handler handler = nullptr;
  for (const auto& [name, help, h] : commands) {
    app.add_subcommand(name, help)->callback([&c, &handler, name = name, h = h] {
      c.command = name;
      handler = h;
    });
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    set_max_threads(c.threads);
    const Outcome o = handler(c);
    std::string text;
    if (c.format == "csv") {
      text = o.csv.empty() ? to_csv(o.result) : o.csv;
    } else {
      json doc = {{"schema", 1}, {"command", c.command}, {"source", o.source}, {"config", c.to_json()},
                  {"result", o.result}};
      if (!c.deterministic) doc["timestamp"] = timestamp();
      text = doc.dump(2) + "\n";
    }
    if (c.out.empty()) {
      out << text;
    } else {
      std::ofstream f(c.out);
      if (!f) throw flag_error("--out", "cannot write '" + c.out + "'");
      f << text;
    }
    return o.pass ? 0 : 1;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 1;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace sphvar
