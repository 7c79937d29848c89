#include "snls/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "snls/checkpoint.hpp"
#include "snls/corpus.hpp"
#include "snls/errors.hpp"

namespace snls {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string indexed(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

/// A JSON object whose keys are consumed as they are read; leftovers are typos.
class Block {
 public:
  Block(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) fail(path_, "expected a table");
  }

  bool has(const std::string& key) const { return doc_.contains(key); }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!doc_.contains(key)) fail(join(path_, key), "missing key");
    return doc_.at(key);
  }

  double real(const std::string& key) { return as_real(at(key), join(path_, key)); }
  double real(const std::string& key, double fallback) { return has(key) ? real(key) : fallback; }

  long long integer(const std::string& key) { return as_integer(at(key), join(path_, key)); }
  long long integer(const std::string& key, long long fallback) {
    return has(key) ? integer(key) : fallback;
  }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const long long v = integer(key);
    if (v < 0) fail(join(path_, key), "must be >= 0");
    return static_cast<std::size_t>(v);
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_string()) fail(join(path_, key), "expected a string");
    return v.get<std::string>();
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_boolean()) fail(join(path_, key), "expected true or false");
    return v.get<bool>();
  }

  std::string child(const std::string& key) const { return join(path_, key); }

  void finish() const {
    for (const auto& [key, value] : doc_.items())
      if (!seen_.contains(key)) fail(join(path_, key), "unknown key");
  }

  static double as_real(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  static long long as_integer(const json& v, const std::string& path) {
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
      const double x = v.get<double>();
      if (x == std::floor(x) && std::abs(x) < 9e15) return static_cast<long long>(x);
    }
    fail(path, "expected an integer");
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

Complex parse_amplitude(const json& v, const std::string& path) {
  if (v.is_array()) {
    if (v.size() != 2) fail(path, "complex amplitude must be [re, im]");
    return {Block::as_real(v[0], indexed(path, 0)), Block::as_real(v[1], indexed(path, 1))};
  }
  return {Block::as_real(v, path), 0.0};
}

json amplitude_json(Complex a) {
  if (a.imag() == 0.0) return a.real();
  return json::array({a.real(), a.imag()});
}

std::vector<NoiseEntry> parse_modes(const json& list, const std::string& path, int d) {
  if (!list.is_array()) fail(path, "expected a list of {mode, amplitude} tables");
  std::vector<NoiseEntry> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string p = indexed(path, i);
    Block b(list[i], p);
    const json& mode = b.at("mode");
    if (!mode.is_array()) fail(b.child("mode"), "expected a list of integers");
    if (static_cast<int>(mode.size()) != d)
      fail(b.child("mode"), "needs one index per axis (d = " + std::to_string(d) + ")");
    NoiseEntry e;
    for (std::size_t a = 0; a < mode.size(); ++a)
      e.mode.push_back(static_cast<int>(Block::as_integer(mode[a], indexed(b.child("mode"), a))));
    e.amplitude = parse_amplitude(b.at("amplitude"), b.child("amplitude"));
    b.finish();
    out.push_back(std::move(e));
  }
  return out;
}

json modes_json(const std::vector<NoiseEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries) out.push_back({{"mode", e.mode}, {"amplitude", amplitude_json(e.amplitude)}});
  return out;
}

InitialSpec parse_initial(const json& doc, const std::string& path, int d) {
  Block b(doc, path);
  InitialSpec spec;
  const std::string kind = b.text("kind", "zero");
  if (kind == "zero") {
    spec.kind = InitialKind::zero;
  } else if (kind == "gaussian") {
    spec.kind = InitialKind::gaussian;
    spec.width = b.real("width", spec.width);
    spec.amplitude = b.real("amplitude", spec.amplitude);
    if (!(spec.width > 0.0)) fail(b.child("width"), "must be > 0");
  } else if (kind == "modes") {
    spec.kind = InitialKind::modes;
    spec.modes = parse_modes(b.at("modes"), b.child("modes"), d);
  } else if (kind == "checkpoint") {
    spec.kind = InitialKind::checkpoint;
    spec.path = b.text("path", "");
    if (spec.path.empty()) fail(b.child("path"), "missing checkpoint path");
  } else {
    fail(b.child("kind"), "must be one of zero, gaussian, modes, checkpoint");
  }
  b.finish();
  return spec;
}

json initial_json(const InitialSpec& s) {
  json out{{"kind", to_string(s.kind)}};
  switch (s.kind) {
    case InitialKind::zero: break;
    case InitialKind::gaussian:
      out["width"] = s.width;
      out["amplitude"] = s.amplitude;
      break;
    case InitialKind::modes: out["modes"] = modes_json(s.modes); break;
    case InitialKind::checkpoint: out["path"] = s.path; break;
  }
  return out;
}

template <class T, class Convert>
std::vector<T> parse_list(const json& v, const std::string& path, Convert convert) {
  if (!v.is_array()) fail(path, "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(convert(v[i], indexed(path, i)));
  return out;
}

}  // namespace

std::string to_string(Scheme s) { return s == Scheme::lie ? "lie" : "strang"; }

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::zero: return "zero";
    case InitialKind::gaussian: return "gaussian";
    case InitialKind::modes: return "modes";
    case InitialKind::checkpoint: return "checkpoint";
  }
  return "";
}

ParsedConfig parse_config(const json& doc, bool force) {
  Block root(doc, "");
  ParsedConfig out;
  RunConfig& c = out.config;

  {
    Block g(root.at("grid"), "grid");
    c.grid.d = static_cast<int>(g.integer("d"));
    c.grid.n = static_cast<int>(g.integer("n"));
    c.grid.length = g.real("L");
    g.finish();
  }
  if (c.grid.d < 1 || c.grid.d > 3) fail("grid.d", "must be 1, 2 or 3");
  if (c.grid.n < 8 || (c.grid.n & (c.grid.n - 1)) != 0) fail("grid.n", "must be a power of two >= 8");
  if (!(c.grid.length > 0.0) || !std::isfinite(c.grid.length)) fail("grid.L", "must be > 0");

  if (root.has("params")) {
    Block p(root.at("params"), "params");
    SimParams& s = c.params;
    s.lambda = p.real("lambda", s.lambda);
    s.sigma = p.real("sigma", s.sigma);
    s.alpha = static_cast<int>(p.integer("alpha", s.alpha));
    s.dt = p.real("dt", s.dt);
    s.t_final = p.real("t_final", s.t_final);
    const std::string scheme = p.text("scheme", to_string(s.scheme));
    if (scheme == "lie") s.scheme = Scheme::lie;
    else if (scheme == "strang") s.scheme = Scheme::strang;
    else fail("params.scheme", "must be lie or strang");
    s.log_every = static_cast<int>(p.integer("log_every", s.log_every));
    const long long seed = p.integer("seed", static_cast<long long>(s.seed));
    if (seed < 0) fail("params.seed", "must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
    s.dealias = p.flag("dealias", s.dealias);
    p.finish();
  }
  c.params.validate();

  if (root.has("noise_convention")) {
    const json& v = root.at("noise_convention");
    if (v == "two_per_mode") c.noise_convention = NoiseConvention::two_per_mode;
    else if (v == "one_per_mode") c.noise_convention = NoiseConvention::one_per_mode;
    else fail("noise_convention", "must be two_per_mode or one_per_mode");
  }
  if (root.has("noise")) c.noise = parse_modes(root.at("noise"), "noise", c.grid.d);

  if (root.has("experiment")) {
    Block e(root.at("experiment"), "experiment");
    ExperimentSpec& x = c.experiment;
    x.name = e.text("name", x.name);
    x.paths = e.count("paths", x.paths);
    if (e.has("powers"))
      x.powers = parse_list<int>(e.at("powers"), e.child("powers"), [](const json& v, const std::string& p) {
        const long long m = Block::as_integer(v, p);
        if (m < 1) fail(p, "powers must be >= 1");
        return static_cast<int>(m);
      });
    if (e.has("lambdas"))
      x.lambdas = parse_list<double>(e.at("lambdas"), e.child("lambdas"), [](const json& v, const std::string& p) {
        const double l = Block::as_real(v, p);
        if (!(l > 0.0)) fail(p, "must be > 0");
        return l;
      });
    if (e.has("observables"))
      x.observables = parse_list<std::string>(e.at("observables"), e.child("observables"),
                                              [](const json& v, const std::string& p) {
                                                if (!v.is_string()) fail(p, "expected a string");
                                                return v.get<std::string>();
                                              });
    x.batches = e.count("batches", x.batches);
    if (e.has("burn_in")) {
      x.burn_in = e.real("burn_in");
      if (!(*x.burn_in >= 0.0)) fail(e.child("burn_in"), "must be >= 0");
    }
    x.tolerance = e.real("tolerance", x.tolerance);
    if (!(x.tolerance >= 0.0)) fail(e.child("tolerance"), "must be >= 0");
    const long long workers = e.integer("workers", x.workers);
    if (workers < 1) fail(e.child("workers"), "must be >= 1");
    x.workers = static_cast<unsigned>(workers);
    if (e.has("initial")) x.initial = parse_initial(e.at("initial"), e.child("initial"), c.grid.d);
    if (e.has("initial_b")) x.initial_b = parse_initial(e.at("initial_b"), e.child("initial_b"), c.grid.d);
    x.restarts = static_cast<int>(e.integer("restarts", x.restarts));
    if (x.restarts < 0) fail(e.child("restarts"), "must be >= 0");
    x.iterations = static_cast<int>(e.integer("iterations", x.iterations));
    if (x.iterations < 1) fail(e.child("iterations"), "must be >= 1");
    x.corpus_size = e.count("corpus_size", x.corpus_size);
    if (e.has("g")) {
      x.g = e.real("g");
      if (!(*x.g >= 0.0)) fail(e.child("g"), "must be >= 0");
    }
    e.finish();
  }

  c.output = root.text("output", c.output);
  c.force = root.flag("force", false) || force;
  root.finish();

  out.gate = check_assumptions(c.grid.d, c.params.sigma, c.params.alpha);
  if (!out.gate.permitted()) {
    if (!c.force) fail("params.sigma", "parameter gate rejects this run (" + out.gate.reason + "); pass --force to override");
    out.gate_bypassed = true;
  }
  return out;
}

ParsedConfig parse_config(const std::string& text, bool force) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  return parse_config(doc, force);
}

json serialize_config(const RunConfig& c) {
  const SimParams& s = c.params;
  const ExperimentSpec& x = c.experiment;
  json experiment{{"name", x.name},
                  {"paths", x.paths},
                  {"powers", x.powers},
                  {"lambdas", x.lambdas},
                  {"observables", x.observables},
                  {"batches", x.batches},
                  {"tolerance", x.tolerance},
                  {"workers", x.workers},
                  {"initial", initial_json(x.initial)},
                  {"initial_b", initial_json(x.initial_b)},
                  {"restarts", x.restarts},
                  {"iterations", x.iterations},
                  {"corpus_size", x.corpus_size}};
  if (x.burn_in) experiment["burn_in"] = *x.burn_in;
  if (x.g) experiment["g"] = *x.g;
  return json{
      {"grid", {{"d", c.grid.d}, {"n", c.grid.n}, {"L", c.grid.length}}},
      {"params",
       {{"lambda", s.lambda},
        {"sigma", s.sigma},
        {"alpha", s.alpha},
        {"dt", s.dt},
        {"t_final", s.t_final},
        {"scheme", to_string(s.scheme)},
        {"log_every", s.log_every},
        {"seed", s.seed},
        {"dealias", s.dealias}}},
      {"noise_convention", c.noise_convention == NoiseConvention::two_per_mode ? "two_per_mode" : "one_per_mode"},
      {"noise", modes_json(c.noise)},
      {"experiment", experiment},
      {"output", c.output},
      {"force", c.force}};
}

GridPtr make_grid(const GridSpec& spec) { return Grid::make(spec.d, spec.n, spec.length); }

std::optional<NoiseOperator> make_noise(const GridPtr& grid, const RunConfig& config) {
  if (config.noise.empty()) return std::nullopt;
  return build_noise(grid, config.noise, config.noise_convention);
}

Field make_initial(const GridPtr& grid, const InitialSpec& spec) {
  switch (spec.kind) {
    case InitialKind::zero: return Field(grid);
    case InitialKind::gaussian: return gaussian_bump(grid, spec.width, spec.amplitude);
    case InitialKind::modes: {
      Field u(grid, Representation::spectral);
      auto v = u.values();
      for (const auto& e : spec.modes) {
        if (!grid->is_valid_mode(e.mode)) throw ConfigError("experiment.initial.modes: mode outside the grid");
        v[grid->mode_index(e.mode)] += e.amplitude;
      }
      u.to_physical();
      return u;
    }
    case InitialKind::checkpoint: {
      Checkpoint cp = load_checkpoint(spec.path);
      const Grid& g = cp.state.field.grid();
      if (g.dim() != grid->dim() || g.points_per_axis() != grid->points_per_axis() ||
          g.length() != grid->length())
        throw ConfigError("experiment.initial.path: checkpoint grid does not match the config grid");
      std::vector<Complex> values(cp.state.field.values().begin(), cp.state.field.values().end());
      return Field(grid, std::move(values), Representation::physical);
    }
  }
  throw ConfigError("experiment.initial.kind: unsupported");
}

}  // namespace snls
