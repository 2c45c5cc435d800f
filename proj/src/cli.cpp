#include "loewner/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <set>

#include "loewner/parallel.hpp"

namespace loewner {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::pair<std::string, std::string> head_tail(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) return {text, ""};
  return {text.substr(0, colon), text.substr(colon + 1)};
}

std::vector<cplx> complex_list(const std::string& text, const std::string& what) {
  std::vector<cplx> out;
  for (const auto& part : split(text, ';')) out.push_back(parse_complex(part, what));
  return out;
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"command", "subcommand to run"},
      {"example", "demo name (koebe)"},
      {"config", "configuration file to load first"},
      {"output", "write the JSON envelope here instead of stdout"},
      {"tau", "driving point: re[,im] | rotate:r,omega | table:t@re,im;... | essential:<rho>"},
      {"p", "Herglotz function: const:re[,im] | koebe:k[,n] | cayley | rational:c;c/c;c | essential:<rho> | piecewise:..."},
      {"k", "dilatation bound in [0, 1)"},
      {"s", "start time (>= 0)"},
      {"t", "end time (>= s)"},
      {"z", "point(s) in the unit disk: re,im;re,im;..."},
      {"map", "closed-form map: f1:k | f2:k | fn:k,n | fsigma:sigma | mobius:a;b;c;d"},
      {"input", "trace CSV (.csv) or extension grid JSON (.json)"},
      {"solver.rtol", "relative tolerance of the ODE solver"},
      {"solver.atol", "absolute tolerance of the ODE solver"},
      {"chain.mode", "radial | mobius"},
      {"chain.horizon", "largest t - s used for chain limits"},
      {"chain.tolerance", "successive-difference tolerance for chain limits"},
      {"chain.points", "disk (256 samples in |z| <= 0.9) or re,im;re,im;..."},
      {"grid.radii", "extension grid radii, comma separated"},
      {"grid.n", "angular count of the extension grid (power of two)"},
      {"boundary.delta", "largest offset 1 - rho used for boundary extrapolation"},
      {"boundary.levels", "number of halvings of the boundary offset"},
      {"boundary.tolerance", "largest admissible extrapolation residual"},
      {"boundary.seam", "compute the seam traces (true/false)"},
      {"beltrami.radii", "circles for the Beltrami field, comma separated"},
      {"beltrami.n", "samples per circle (power of two)"},
      {"beltrami.exact", "use closed-form mu when available (true/false)"},
      {"wirtinger.h", "finite-difference step"},
      {"wirtinger.order", "2 or 4"},
      {"classify.tolerance", "coefficient tolerance for the Becker classifier"},
      {"classify.exact", "treat imported traces as exact (true/false)"},
      {"recover.tail_tolerance", "largest admissible high-frequency coefficient"},
      {"recover.rebuild", "rebuild the extension from the recovered p and compare (true/false)"},
      {"range.horizon", "final time of the range diagnostic"},
      {"range.step", "sampling step of the range diagnostic"},
      {"schwarzian.k", "declared k for the necessary-bound check"},
      {"export.grid", "write the extension grid JSON here"},
      {"export.field", "write the Beltrami trace CSV here"},
      {"timing.wall", "include wall-clock time in the envelope (true/false)"},
  };
  return keys;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"evolve",   "chain",   "extend", "beltrami",   "classify",
                                              "recover",  "range",   "schwarzian", "demo"};
  return names;
}

int exit_code_for(ErrorKind kind) noexcept { return is_validation_kind(kind) ? 2 : 3; }

// -----------------------------------------------------------------------------
// Spec strings

HerglotzSpec parse_herglotz(const std::string& text) {
  const auto [name, args] = head_tail(text);
  if (name == "const") return HerglotzSpec::constant(parse_complex(args, "p"));
  if (name == "koebe") {
    const auto v = parse_number_list(args, "p");
    if (v.size() != 1 && v.size() != 2) fail(ErrorKind::validation, "koebe needs k or k,n");
    if (v.size() == 2 && v[1] != std::floor(v[1])) fail(ErrorKind::validation, "koebe n must be an integer");
    return HerglotzSpec::koebe(v[0], v.size() == 2 ? static_cast<int>(v[1]) : 1);
  }
  if (name == "cayley") return HerglotzSpec::cayley();
  if (name == "essential") return HerglotzSpec::essential_example(RhoProfile::by_name(args));
  if (name == "rational") {
    const auto parts = split(args, '/');
    if (parts.size() != 2) fail(ErrorKind::validation, "rational needs numerator/denominator");
    return HerglotzSpec::rational(complex_list(parts[0], "p"), complex_list(parts[1], "p"));
  }
  if (name == "piecewise") {
    std::vector<double> starts;
    std::vector<HerglotzSpec> pieces;
    for (const auto& piece : split(args, '|')) {
      const auto at = piece.find('@');
      if (at == std::string::npos) fail(ErrorKind::validation, "piecewise entries are t@spec");
      starts.push_back(parse_number(piece.substr(0, at), "p"));
      pieces.push_back(parse_herglotz(piece.substr(at + 1)));
    }
    return HerglotzSpec::piecewise(std::move(starts), std::move(pieces));
  }
  if (name.empty() || args.empty()) {
    // A bare number is a constant.
    return HerglotzSpec::constant(parse_complex(text, "p"));
  }
  fail(ErrorKind::validation, "unknown Herglotz spec '" + text + "'");
}

DrivingSpec parse_driving(const std::string& text) {
  const auto [name, args] = head_tail(text);
  if (name == "rotate") {
    const auto v = parse_number_list(args, "tau");
    if (v.size() != 2) fail(ErrorKind::validation, "rotate needs r,omega");
    return DrivingSpec::rotating(v[0], v[1]);
  }
  if (name == "table") {
    std::vector<double> starts;
    std::vector<cplx> values;
    for (const auto& entry : split(args, ';')) {
      const auto at = entry.find('@');
      if (at == std::string::npos) fail(ErrorKind::validation, "table entries are t@re,im");
      starts.push_back(parse_number(entry.substr(0, at), "tau"));
      values.push_back(parse_complex(entry.substr(at + 1), "tau"));
    }
    return DrivingSpec::table(std::move(starts), std::move(values));
  }
  if (name == "essential") return DrivingSpec::essential_example(RhoProfile::by_name(args));
  if (args.empty()) return DrivingSpec::constant(parse_complex(text, "tau"));
  fail(ErrorKind::validation, "unknown driving spec '" + text + "'");
}

MapSpec parse_map(const std::string& text) {
  const auto [name, args] = head_tail(text);
  MapSpec out;
  if (name == "mobius") {
    std::vector<cplx> c = args.find(';') != std::string::npos ? complex_list(args, "map") : std::vector<cplx>{};
    if (c.empty()) {
      for (double v : parse_number_list(args, "map")) c.emplace_back(v, 0.0);
    }
    if (c.size() != 4) fail(ErrorKind::validation, "mobius needs four coefficients a;b;c;d");
    out.mobius = MobiusTransform(c[0], c[1], c[2], c[3]);
    return out;
  }
  const auto v = parse_number_list(args, "map");
  if (name == "f1" || name == "f2") {
    if (v.size() != 1) fail(ErrorKind::validation, name + " needs k");
    out.closed_form = oracle(name, {{"k", v[0]}});
  } else if (name == "fn") {
    if (v.size() != 2) fail(ErrorKind::validation, "fn needs k,n");
    out.closed_form = oracle(name, {{"k", v[0]}, {"n", v[1]}});
  } else if (name == "fsigma") {
    if (v.size() != 1) fail(ErrorKind::validation, "fsigma needs sigma");
    out.closed_form = oracle(name, {{"sigma", v[0]}});
  } else {
    fail(ErrorKind::validation, "unknown map '" + text + "' (expected f1, f2, fn, fsigma, mobius)");
  }
  return out;
}

// -----------------------------------------------------------------------------
// Serializers

namespace {

Json error_json(const Error& e) {
  Json j;
  j["kind"] = to_string(e.kind());
  j["message"] = e.what();
  Json d = Json::object();
  for (const auto& [k, v] : e.diagnostics()) d[k] = v;
  j["diagnostics"] = std::move(d);
  return j;
}

Json condition_json(const ConditionReport& r) {
  Json j;
  j["satisfied"] = r.satisfied;
  j["worst_margin"] = r.worst_margin;
  j["worst_z"] = complex_json(r.worst_z);
  j["worst_t"] = r.worst_t;
  j["tolerance"] = r.tolerance;
  j["samples"] = r.samples;
  return j;
}

Json grid_summary(const QCExtensionGrid& g) {
  Json j;
  j["k"] = g.k;
  j["worst_residual"] = g.worst_residual;
  j["worst_residual_theta"] = g.worst_residual_theta;
  j["radial"] = {{"max_jump", g.max_radial_jump}, {"bound", g.radial_jump_bound}, {"continuous", g.radially_continuous()}};
  if (g.seam) {
    j["seam"] = {{"discrepancy", g.seam->discrepancy},
                 {"worst_theta", g.seam->worst_theta},
                 {"tolerance", g.seam->tolerance}};
  } else {
    j["seam"] = nullptr;
  }
  return j;
}

Json field_summary(const BeltramiField& f) {
  Json j;
  j["radii"] = f.radii;
  j["angular_count"] = f.angular_count;
  j["max_dilatation"] = f.max_dilatation;
  j["jacobian_sign_ok"] = f.jacobian_sign_ok;
  j["min_jacobian_ratio"] = f.min_jacobian_ratio;
  j["exact"] = f.exact;
  j["error_estimate"] = f.error_estimate;
  return j;
}

Json field_json(const BeltramiField& f) {
  Json j = field_summary(f);
  Json traces = Json::array();
  for (const auto& tr : f.traces) {
    Json row = Json::array();
    for (cplx m : tr) row.push_back(complex_json(m));
    traces.push_back(std::move(row));
  }
  j["traces"] = std::move(traces);
  return j;
}

Json becker_json(const BeckerReport& r) {
  Json j;
  j["is_becker"] = r.is_becker;
  j["tolerance"] = r.tolerance;
  j["worst"] = {{"n", r.worst_n}, {"rho", r.worst_rho}, {"abs", r.worst_abs}};
  j["max_abs_mu"] = r.max_abs_mu;
  j["assumption"] = r.assumption;
  Json circles = Json::array();
  for (const auto& c : r.circles) {
    Json coeffs = Json::array();
    const int half = static_cast<int>(c.a.size() / 2);
    for (int n = std::max(-8, -half); n <= std::min(8, half - 1); ++n) {
      coeffs.push_back({{"n", n}, {"a", complex_json(c.coefficient(n))}});
    }
    circles.push_back({{"rho", c.rho}, {"coefficients", std::move(coeffs)}});
  }
  j["circles"] = std::move(circles);
  return j;
}

Json range_json(const RangeReport& r) {
  Json j;
  j["verdict"] = to_string(r.verdict);
  j["horizon"] = r.horizon;
  j["integral_estimate"] = r.integral_estimate;
  j["final_decay"] = r.final_decay;
  j["final_decay_from_q"] = r.final_decay_from_q;
  j["route_discrepancy"] = r.route_discrepancy;
  j["tail_increment"] = r.tail_increment;
  j["max_nu_ratio"] = r.max_nu_ratio;
  j["unbounded_warning"] = r.unbounded_warning;
  Json samples = Json::array();
  for (const auto& s : r.samples) {
    samples.push_back({{"t", s.t},
                       {"a", complex_json(s.a)},
                       {"one_minus_a", s.one_minus_a},
                       {"re_q", s.re_q},
                       {"decay", s.decay},
                       {"decay_from_q", s.decay_from_q},
                       {"integral", s.integral},
                       {"nu_ratio", s.nu_ratio}});
  }
  j["samples"] = std::move(samples);
  return j;
}

Json schwarzian_json(const SchwarzianReport& r) {
  Json j;
  j["norm"] = r.norm;
  j["argmax"] = complex_json(r.argmax);
  j["samples"] = r.samples;
  if (r.k) {
    j["k"] = *r.k;
    j["necessary_bound"] = r.necessary_bound;
    j["within_necessary"] = r.within_necessary;
  } else {
    j["k"] = nullptr;
  }
  j["sufficiency_k"] = r.sufficiency_k;
  j["sufficient"] = r.sufficient;
  return j;
}

// -----------------------------------------------------------------------------
// Config access with documented ranges

double ranged(const Config& c, const std::string& key, double fallback, double lo, double hi) {
  const double v = c.number_or(key, fallback);
  if (!(v >= lo && v <= hi)) {
    fail(ErrorKind::validation, "'" + key + "' out of range", {{"value", v}, {"min", lo}, {"max", hi}});
  }
  return v;
}

std::size_t power_of_two(const Config& c, const std::string& key, long fallback, long lo) {
  const long v = c.integer_or(key, fallback);
  if (v < lo || v > (1L << 20) || !is_power_of_two(static_cast<std::size_t>(v))) {
    fail(ErrorKind::validation, "'" + key + "' must be a power of two >= " + std::to_string(lo), {{"value", double(v)}});
  }
  return static_cast<std::size_t>(v);
}

std::vector<double> radii(const Config& c, const std::string& key, const std::string& fallback) {
  const auto v = parse_number_list(c.get_or(key, fallback), key);
  if (v.empty()) fail(ErrorKind::validation, "'" + key + "' is empty");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0)) fail(ErrorKind::validation, "'" + key + "' entries must be positive");
    if (i > 0 && !(v[i] > v[i - 1])) fail(ErrorKind::validation, "'" + key + "' must be strictly increasing");
  }
  return v;
}

ode::Settings solver_settings(const Config& c) {
  ode::Settings s = default_chain_solver();
  s.rtol = ranged(c, "solver.rtol", s.rtol, 1e-14, 1e-2);
  s.atol = ranged(c, "solver.atol", s.atol, 0.0, 1e-2);
  return s;
}

DrivingSpec driving_of(const Config& c) {
  std::string fallback = "0";
  const std::string p = c.get_or("p", "");
  if (p.rfind("essential:", 0) == 0) fallback = p;
  return parse_driving(c.get_or("tau", fallback));
}

VectorField field_of(const Config& c) { return VectorField(driving_of(c), parse_herglotz(c.get_or("p", "koebe:0.5"))); }

std::shared_ptr<const ChainEvaluator> chain_of(const Config& c) {
  VectorField field = field_of(c);
  ChainSettings cs;
  cs.mode = field.radial() ? ChainMode::radial : ChainMode::mobius;
  if (c.has("chain.mode")) cs.mode = chain_mode_from_string(c.get("chain.mode"));
  cs.horizon = ranged(c, "chain.horizon", cs.horizon, 2.0, 1000.0);
  cs.tolerance = ranged(c, "chain.tolerance", cs.tolerance, 1e-15, 1e-2);
  return std::make_shared<const ChainEvaluator>(std::move(field), cs, solver_settings(c));
}

BoundarySettings boundary_of(const Config& c) {
  BoundarySettings b;
  b.delta = ranged(c, "boundary.delta", b.delta, 1e-6, 0.5);
  b.levels = static_cast<std::size_t>(ranged(c, "boundary.levels", double(b.levels), 1.0, 10.0));
  b.tolerance = ranged(c, "boundary.tolerance", b.tolerance, 1e-15, 1.0);
  b.seam = c.flag_or("boundary.seam", b.seam);
  return b;
}

double k_of(const Config& c) {
  if (c.has("k")) return ranged(c, "k", 0.0, 0.0, 1.0 - 1e-12);
  const auto [name, args] = head_tail(c.get_or("p", "koebe:0.5"));
  if (name == "koebe") return parse_number_list(args, "p").at(0);
  fail(ErrorKind::validation, "missing required setting 'k'");
}

WirtingerSettings wirtinger_of(const Config& c, double default_h) {
  WirtingerSettings w;
  w.h = ranged(c, "wirtinger.h", default_h, 1e-9, 0.1);
  const long order = c.integer_or("wirtinger.order", 4);
  if (order != 2 && order != 4) fail(ErrorKind::validation, "'wirtinger.order' must be 2 or 4");
  w.order = static_cast<int>(order);
  return w;
}

std::vector<cplx> points_of(const Config& c, const std::string& key, const std::string& fallback) {
  const std::string spec = c.get_or(key, fallback);
  std::vector<cplx> out;
  if (spec == "disk") {
    for (int i = 0; i < 256; ++i) {
      out.push_back(std::polar(0.9 * std::sqrt((i % 16 + 1) / 16.0), kTwoPi * (i / 16) / 16.0));
    }
    return out;
  }
  out = complex_list(spec, key);
  for (cplx z : out) {
    if (!(std::abs(z) < 1.0)) fail(ErrorKind::domain, "points must lie in the unit disk", {{"abs_z", std::abs(z)}});
  }
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Closed-form reference chain for koebe:k[,n] Herglotz functions with tau = 0.
std::optional<ClosedFormMap> reference_of(const Config& c) {
  const auto [name, args] = head_tail(c.get_or("p", "koebe:0.5"));
  if (name != "koebe" || !driving_of(c).identically_zero()) return std::nullopt;
  const auto v = parse_number_list(args, "p");
  if (v.empty() || v[0] >= 1.0) return std::nullopt;
  return oracle_fn(v[0], v.size() > 1 ? static_cast<int>(v[1]) : 1);
}

// -----------------------------------------------------------------------------
// Field sources shared by beltrami, classify and recover

struct FieldSource {
  BeltramiField field;
  std::string origin;
  std::shared_ptr<const ChainEvaluator> chain;
};

FieldSource field_from_config(const Config& c) {
  const std::size_t n = power_of_two(c, "beltrami.n", 256, 8);
  if (c.has("input")) {
    const std::string path = c.get("input");
    if (ends_with(path, ".csv")) {
      return {field_from_csv(read_text_file(path), c.flag_or("classify.exact", false)), "csv", nullptr};
    }
    if (ends_with(path, ".json")) {
      Json doc;
      try {
        doc = Json::parse(read_text_file(path));
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::validation, std::string("input is not valid JSON: ") + e.what());
      }
      QCExtensionGrid grid = grid_from_json(doc);
      std::vector<double> circles;
      if (c.has("beltrami.radii")) {
        circles = radii(c, "beltrami.radii", "");
      } else {
        for (double r : grid.grid.radii()) {
          if (r > 1.0) circles.push_back(r);
        }
      }
      const auto sampler = PlanarMapSampler::from_grid(std::move(grid));
      return {beltrami_field(sampler, circles, n), "grid", nullptr};
    }
    fail(ErrorKind::validation, "input must end in .csv (trace) or .json (grid)");
  }
  const auto circles = radii(c, "beltrami.radii", "1.1,1.5,2,4,8");
  if (c.has("map")) {
    const MapSpec m = parse_map(c.get("map"));
    if (!m.closed_form) fail(ErrorKind::validation, "Beltrami fields need a closed-form extension map (not mobius)");
    BeltramiOptions o;
    o.wirtinger = wirtinger_of(c, 1e-5);
    o.prefer_exact = c.flag_or("beltrami.exact", false);
    return {beltrami_field(PlanarMapSampler::from_closed_form(*m.closed_form), circles, n, o), "map", nullptr};
  }
  auto chain = chain_of(c);
  BeltramiOptions o;
  o.wirtinger = wirtinger_of(c, 1e-3);
  return {beltrami_field(PlanarMapSampler::from_chain(chain, boundary_of(c)), circles, n, o), "chain", chain};
}

std::optional<double> classify_tolerance(const Config& c) {
  if (!c.has("classify.tolerance")) return std::nullopt;
  return ranged(c, "classify.tolerance", 0.0, 0.0, 1.0);
}

// -----------------------------------------------------------------------------
// Subcommands

struct Exports {
  std::optional<std::string> grid_json;
  std::optional<std::string> field_csv;
};

Json cmd_evolve(const Config& c) {
  const EvolutionTrajectory e(field_of(c), solver_settings(c));
  const double s = ranged(c, "s", 0.0, 0.0, 1e6);
  const double t = ranged(c, "t", 1.0, s, 1e6);
  Json pts = Json::array();
  for (cplx z : points_of(c, "z", "0.5,0")) {
    const DerivativePair d = e.evolve_with_derivative(s, t, z);
    pts.push_back({{"z", complex_json(z)}, {"value", complex_json(d.value)}, {"derivative", complex_json(d.dz)}});
  }
  Json j;
  j["field"] = e.field().describe();
  j["s"] = s;
  j["t"] = t;
  j["points"] = std::move(pts);
  return j;
}

Json cmd_chain(const Config& c) {
  const auto chain = chain_of(c);
  const double s = ranged(c, "s", 0.0, 0.0, 1e6);
  const auto points = points_of(c, "chain.points", "disk");
  std::vector<cplx> values(points.size());
  parallel_for(points.size(), [&](std::size_t i) { values[i] = chain->eval(s, points[i]); });
  Json pts = Json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    pts.push_back({{"z", complex_json(points[i])}, {"value", complex_json(values[i])}});
  }
  Json j;
  j["field"] = chain->trajectory().field().describe();
  j["mode"] = to_string(chain->settings().mode);
  j["heuristic"] = chain->heuristic();
  j["s"] = s;
  j["points"] = std::move(pts);
  if (const auto ref = reference_of(c)) {
    double worst = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      worst = std::max(worst, std::abs(values[i] - ref->chain(s, points[i])));
    }
    j["reference"] = {{"map", ref->describe()}, {"sup_error", worst}};
  }
  return j;
}

QCExtensionGrid extend_of(const Config& c, const ChainEvaluator& chain, const std::string& default_radii,
                          long default_n) {
  const PolarGrid grid(radii(c, "grid.radii", default_radii), power_of_two(c, "grid.n", default_n, 8));
  return becker_extend(chain, grid, k_of(c), boundary_of(c));
}

Json cmd_extend(const Config& c, Exports& ex) {
  const auto chain = chain_of(c);
  const QCExtensionGrid g = extend_of(c, *chain, "0.5,0.9,1.2,1.5,2.0", 64);
  const HerglotzSpec& p = chain->trajectory().field().herglotz();
  Json j = grid_to_json(g);
  j["summary"] = grid_summary(g);
  j["becker_condition"] = condition_json(check_becker_condition(p, g.k, Sampling::for_spec(p)));
  if (c.has("export.grid")) ex.grid_json = dump_json(grid_to_json(g));
  return j;
}

Json cmd_beltrami(const Config& c, Exports& ex) {
  const FieldSource src = field_from_config(c);
  Json j = field_json(src.field);
  j["source"] = src.origin;
  if (c.has("export.field")) ex.field_csv = field_to_csv(src.field);
  return j;
}

Json cmd_classify(const Config& c, Exports& ex) {
  const FieldSource src = field_from_config(c);
  Json j;
  j["source"] = src.origin;
  j["field"] = field_summary(src.field);
  j["becker"] = becker_json(classify_becker(src.field, classify_tolerance(c)));
  if (c.has("export.field")) ex.field_csv = field_to_csv(src.field);
  return j;
}

Json cmd_recover(const Config& c) {
  const FieldSource src = field_from_config(c);
  const double tail_tol = ranged(c, "recover.tail_tolerance", 1e-5, 0.0, 1.0);
  const RecoveredHerglotz rec = recover_herglotz_from_mu(src.field, tail_tol);
  Json j;
  j["source"] = src.origin;
  j["k_observed"] = rec.k_observed;
  j["noise_floor"] = rec.noise_floor;
  j["tail"] = rec.tail;
  Json series = Json::array();
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    Json coeffs = Json::array();
    for (cplx a : rec.series[i]) coeffs.push_back(complex_json(a));
    series.push_back({{"t", rec.times[i]}, {"a_from_2", std::move(coeffs)}});
  }
  j["series"] = std::move(series);
  Json samples = Json::array();
  for (double t : rec.times) {
    for (cplx z : {cplx(0.0, 0.0), cplx(0.5, 0.0), cplx(0.0, 0.5), cplx(-0.5, 0.0)}) {
      samples.push_back({{"z", complex_json(z)}, {"t", t}, {"p", complex_json(rec.spec(z, t))}});
    }
  }
  j["p_samples"] = std::move(samples);
  if (c.flag_or("recover.rebuild", false)) {
    if (!src.chain) fail(ErrorKind::validation, "recover.rebuild needs a chain-backed field (no input or map)");
    const double k = std::min(0.999, std::max(k_of(c), rec.k_observed));
    ChainEvaluator rebuilt(VectorField(DrivingSpec::constant(0.0), rec.spec), src.chain->settings(),
                           src.chain->trajectory().settings());
    const PolarGrid grid(radii(c, "grid.radii", "0.5,1.2,1.5,2.0"), power_of_two(c, "grid.n", 64, 8));
    BoundarySettings b = boundary_of(c);
    b.seam = false;
    const QCExtensionGrid g1 = becker_extend(*src.chain, grid, k, b);
    const QCExtensionGrid g2 = becker_extend(rebuilt, grid, k, b);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.radii().size(); ++i) {
      if (grid.radii()[i] < 1.0) continue;
      for (std::size_t jj = 0; jj < grid.angular_count(); ++jj) worst = std::max(worst, std::abs(g1.at(i, jj) - g2.at(i, jj)));
    }
    j["rebuild"] = {{"k", k}, {"exterior_sup_difference", worst}};
  }
  return j;
}

Json cmd_range(const Config& c) {
  RangeSettings rs;
  rs.solver = solver_settings(c);
  rs.step = ranged(c, "range.step", rs.step, 1e-3, 100.0);
  const double horizon = ranged(c, "range.horizon", 40.0, rs.step, 1e4);
  return range_json(range_diagnostic(field_of(c), horizon, rs));
}

Json cmd_schwarzian(const Config& c) {
  const MapSpec m = parse_map(c.get_or("map", "f1:0.5"));
  std::optional<double> k;
  if (c.has("schwarzian.k")) k = ranged(c, "schwarzian.k", 0.0, 0.0, 1.0 - 1e-12);
  const PolarGrid grid = schwarzian_grid();
  SchwarzianReport r;
  if (m.mobius) {
    const MobiusTransform mob = *m.mobius;
    r = schwarzian_norm([mob](cplx z) { return schwarzian(mob, z); }, grid, k);
  } else {
    if (!k) k = m.closed_form->dilatation;
    r = schwarzian_norm(*m.closed_form, grid, k);
  }
  Json j = schwarzian_json(r);
  j["map"] = c.get_or("map", "f1:0.5");
  Json pts = Json::array();
  for (cplx z : {cplx(0.0, 0.0), cplx(0.5, 0.0), cplx(0.0, 0.5)}) {
    const cplx s = m.mobius ? schwarzian(*m.mobius, z) : schwarzian(*m.closed_form, z);
    pts.push_back({{"z", complex_json(z)}, {"S", complex_json(s)}});
  }
  j["values"] = std::move(pts);
  return j;
}

Json cmd_demo(const Config& c, Exports& ex) {
  const std::string example = c.get_or("example", "koebe");
  if (example != "koebe") fail(ErrorKind::validation, "unknown demo '" + example + "' (expected koebe)");
  const double k = ranged(c, "k", 0.5, 0.0, 0.95);
  Config cc = c;
  cc.set("p", "koebe:" + c.get_or("k", "0.5"));
  cc.set("tau", "0");
  const auto chain = chain_of(cc);
  const ClosedFormMap ref = oracle_f1(k);

  double chain_err = 0.0;
  const auto pts = points_of(cc, "chain.points", "disk");
  std::vector<double> errs(pts.size());
  parallel_for(pts.size(), [&](std::size_t i) { errs[i] = std::abs(chain->eval(0.0, pts[i]) - ref.interior(pts[i])); });
  for (double e : errs) chain_err = std::max(chain_err, e);

  const QCExtensionGrid g = extend_of(cc, *chain, "0.5,0.9,1.1,1.2,1.3,1.4,1.5,1.6,1.7", 128);
  const auto circles = radii(cc, "beltrami.radii", "1.3,1.4,1.5");
  const BeltramiField field =
      beltrami_field(PlanarMapSampler::from_grid(g), circles, power_of_two(cc, "beltrami.n", 128, 64));
  const BeckerReport report = classify_becker(field, classify_tolerance(cc));

  double mu_err = 0.0;
  for (std::size_t i = 0; i < field.radii.size(); ++i) {
    for (std::size_t jj = 0; jj < field.angular_count; ++jj) {
      const double theta = kTwoPi * static_cast<double>(jj) / static_cast<double>(field.angular_count);
      mu_err = std::max(mu_err, std::abs(field.traces[i][jj] - ref.mu(std::polar(field.radii[i], theta))));
    }
  }
  if (c.has("export.grid")) ex.grid_json = dump_json(grid_to_json(g));
  if (c.has("export.field")) ex.field_csv = field_to_csv(field);

  Json j;
  j["example"] = example;
  j["k"] = k;
  j["chain"] = {{"samples", pts.size()}, {"sup_error_vs_closed_form", chain_err}};
  j["extension"] = grid_summary(g);
  j["beltrami"] = field_summary(field);
  j["beltrami"]["sup_error_vs_closed_form"] = mu_err;
  j["becker"] = becker_json(report);
  return j;
}

void check_keys(const Config& c) {
  std::set<std::string> known;
  for (const auto& k : config_keys()) known.insert(k.key);
  for (const auto& [key, value] : c.values()) {
    if (!known.count(key)) fail(ErrorKind::validation, "unknown configuration key '" + key + "'");
  }
}

}  // namespace

RunOutcome run(const Config& config) {
  RunOutcome out;
  Json& env = out.envelope;
  env["artifact"] = {{"name", kArtifactName}, {"version", kArtifactVersion}};
  env["command"] = config.get_or("command", "");
  Json echo = Json::object();
  for (const auto& [k, v] : config.values()) echo[k] = v;
  env["config"] = std::move(echo);
  env["timing"] = {{"threads", thread_count()}};
  env["status"] = "ok";
  env["error"] = nullptr;
  env["result"] = nullptr;

  const auto start = std::chrono::steady_clock::now();
  Exports ex;
  bool wall = false;
  try {
    check_keys(config);
    wall = config.flag_or("timing.wall", false);
    const std::string& cmd = config.get("command");
    Json result;
    if (cmd == "evolve") {
      result = cmd_evolve(config);
    } else if (cmd == "chain") {
      result = cmd_chain(config);
    } else if (cmd == "extend") {
      result = cmd_extend(config, ex);
    } else if (cmd == "beltrami") {
      result = cmd_beltrami(config, ex);
    } else if (cmd == "classify") {
      result = cmd_classify(config, ex);
    } else if (cmd == "recover") {
      result = cmd_recover(config);
    } else if (cmd == "range") {
      result = cmd_range(config);
    } else if (cmd == "schwarzian") {
      result = cmd_schwarzian(config);
    } else if (cmd == "demo") {
      result = cmd_demo(config, ex);
    } else {
      fail(ErrorKind::validation, "unknown command '" + cmd + "'");
    }
    if (ex.grid_json) write_text_file(config.get("export.grid"), *ex.grid_json + "\n");
    if (ex.field_csv) write_text_file(config.get("export.field"), *ex.field_csv);
    env["result"] = std::move(result);
  } catch (const Error& e) {
    env["status"] = "error";
    env["error"] = error_json(e);
    out.exit_code = exit_code_for(e.kind());
  } catch (const std::exception& e) {
    env["status"] = "error";
    env["error"] = {{"kind", to_string(ErrorKind::integration)}, {"message", e.what()}, {"diagnostics", Json::object()}};
    out.exit_code = exit_code_for(ErrorKind::integration);
  }
  if (wall) {
    env["timing"]["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  return out;
}

int run_and_report(const Config& config, std::ostream& out) {
  RunOutcome r = run(config);
  const std::string text = dump_json(r.envelope) + "\n";
  if (config.has("output")) {
    try {
      write_text_file(config.get("output"), text);
    } catch (const Error& e) {
      out << text;
      return exit_code_for(e.kind());
    }
  } else {
    out << text;
  }
  return r.exit_code;
}

}  // namespace loewner
