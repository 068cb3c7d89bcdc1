#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "invlab/geometry.hpp"

namespace invlab::cli {
namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& parts) {
  std::ostringstream os;
  for (std::size_t i = 0; i < parts.size(); ++i) os << (i ? "; " : "") << parts[i];
  return os.str();
}

// Walks one JSON object, remembering which keys were consumed so that the
// rest can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path, std::vector<std::string>& problems)
      : obj_(obj), path_(std::move(path)), problems_(problems) {
    if (!obj_.is_object()) {
      problems_.push_back(path_ + ": expected an object");
      valid_ = false;
    }
  }

  bool valid() const { return valid_; }
  bool has(const std::string& key) const { return valid_ && obj_.contains(key); }

  const json* raw(const std::string& key, bool required = false) {
    seen_.insert(key);
    if (!valid_) return nullptr;
    auto it = obj_.find(key);
    if (it == obj_.end()) {
      if (required) problems_.push_back(where(key) + ": required key is missing");
      return nullptr;
    }
    return &*it;
  }

  template <class T>
  std::optional<T> get(const std::string& key, bool required = false) {
    const json* v = raw(key, required);
    if (!v) return std::nullopt;
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v->is_string()) return fail<T>(key, "expected a string");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v->is_boolean()) return fail<T>(key, "expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v->is_number_integer() || (std::is_unsigned_v<T> && v->get<long long>() < 0 && !v->is_number_unsigned())) {
        return fail<T>(key, "expected a nonnegative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v->is_number()) return fail<T>(key, "expected a number");
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!v->is_array()) return fail<T>(key, "expected an array of numbers");
      for (const auto& e : *v) {
        if (!e.is_number()) return fail<T>(key, "expected an array of numbers");
      }
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
      if (!v->is_array()) return fail<T>(key, "expected an array of integers");
      for (const auto& e : *v) {
        if (!e.is_number_integer()) return fail<T>(key, "expected an array of integers");
      }
    } else if constexpr (std::is_same_v<T, std::map<std::string, double>>) {
      if (!v->is_object()) return fail<T>(key, "expected an object of numbers");
      for (const auto& [k, e] : v->items()) {
        if (!e.is_number()) return fail<T>(key, "parameter '" + k + "' must be a number");
      }
    }
    return v->get<T>();
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() {
    if (!valid_) return;
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) problems_.push_back(where(key) + ": unknown key");
    }
  }

 private:
  template <class T>
  std::optional<T> fail(const std::string& key, const std::string& what) {
    problems_.push_back(where(key) + ": " + what);
    return std::nullopt;
  }

  const json& obj_;
  std::string path_;
  std::vector<std::string>& problems_;
  std::set<std::string> seen_;
  bool valid_ = true;
};

Vec to_point(const std::vector<double>& v) {
  Vec x{0.0, 0.0};
  for (std::size_t i = 0; i < v.size() && i < 2; ++i) x[i] = v[i];
  return x;
}

void read_field(const json& node, const std::string& path, FieldSpec& field, std::vector<std::string>& problems) {
  ObjectReader r(node, path, problems);
  if (auto id = r.get<std::string>("id", true)) field.id = *id;
  if (auto p = r.get<std::map<std::string, double>>("params")) field.params = *p;
  if (auto e = r.get<std::string>("expr")) field.expr = *e;
  r.finish();
}

void read_domain(const json& node, const std::string& path, DomainSpec& domain, std::vector<std::string>& problems) {
  ObjectReader r(node, path, problems);
  if (auto id = r.get<std::string>("id", true)) domain.id = *id;
  if (auto p = r.get<std::map<std::string, double>>("params")) domain.params = *p;
  if (auto e = r.get<std::string>("expr")) domain.expr = *e;
  if (auto n = r.get<std::vector<double>>("normal")) domain.normal = *n;
  r.finish();
}

void read_box(const json& node, const std::string& path, Box& box, std::vector<std::string>& problems) {
  ObjectReader r(node, path, problems);
  auto lo = r.get<std::vector<double>>("lo", true);
  auto hi = r.get<std::vector<double>>("hi", true);
  r.finish();
  if (!lo || !hi) return;
  if (lo->size() != hi->size() || lo->empty() || lo->size() > 2) {
    problems.push_back(path + ": 'lo' and 'hi' need one or two matching components");
    return;
  }
  box = Box{static_cast<int>(lo->size()), to_point(*lo), to_point(*hi)};
}

void read_initial(const json& node, const std::string& path, InitialState& init, std::vector<std::string>& problems) {
  ObjectReader r(node, path, problems);
  if (auto k = r.get<std::string>("kind")) init.kind = *k;
  if (auto c = r.get<std::vector<double>>("centre")) init.centre = to_point(*c);
  if (auto w = r.get<double>("width")) init.width = *w;
  r.finish();
}

void read_tolerances(const json& node, const std::string& path, Tolerances& tol, std::vector<std::string>& problems) {
  ObjectReader r(node, path, problems);
  if (auto v = r.get<double>("escape")) tol.escape = *v;
  if (auto v = r.get<double>("flux")) tol.flux = *v;
  if (auto v = r.get<double>("leak_factor")) tol.leak_factor = *v;
  if (auto v = r.get<double>("escape_level")) tol.escape_level = *v;
  r.finish();
}

Scenario read_scenario(const json& node, std::vector<std::string>& problems) {
  const std::string path = "scenario";
  if (node.is_string()) {
    try {
      return scenarios::builtin(node.get<std::string>());
    } catch (const ValidationError& e) {
      problems.push_back(path + ": " + e.what());
      return {};
    }
  }
  ObjectReader r(node, path, problems);
  Scenario s;
  const bool from_builtin = r.has("builtin");
  if (auto name = r.get<std::string>("builtin")) {
    try {
      s = scenarios::builtin(*name);
    } catch (const ValidationError& e) {
      problems.push_back(r.where("builtin") + ": " + e.what());
    }
  }
  if (auto name = r.get<std::string>("name", !from_builtin)) s.name = *name;
  if (const json* f = r.raw("field", !from_builtin)) read_field(*f, r.where("field"), s.field, problems);
  if (const json* d = r.raw("domain", !from_builtin)) read_domain(*d, r.where("domain"), s.domain, problems);
  if (const json* b = r.raw("grid_box", !from_builtin)) read_box(*b, r.where("grid_box"), s.grid_box, problems);
  if (auto v = r.get<std::vector<double>>("resolutions", !from_builtin)) s.resolutions = *v;
  if (auto v = r.get<double>("t")) s.t = *v;
  if (auto v = r.get<double>("dt")) s.dt = *v;
  if (auto v = r.get<std::string>("scheme")) {
    if (*v == "crank_nicolson") {
      s.scheme = Scheme::crank_nicolson;
    } else if (*v == "backward_euler") {
      s.scheme = Scheme::backward_euler;
    } else {
      problems.push_back(r.where("scheme") + ": expected 'crank_nicolson' or 'backward_euler'");
    }
  }
  if (const json* i = r.raw("initial")) read_initial(*i, r.where("initial"), s.initial, problems);
  if (auto v = r.get<std::size_t>("flow_seeds")) s.flow_seeds = *v;
  if (auto v = r.get<double>("flow_time")) s.flow_time = *v;
  if (auto v = r.get<std::size_t>("boundary_samples")) s.boundary_samples = *v;
  if (auto v = r.get<double>("hygiene_t")) s.hygiene_t = *v;
  if (auto v = r.get<double>("hygiene_dt")) s.hygiene_dt = *v;
  if (auto v = r.get<unsigned>("workers")) s.workers = *v;
  if (const json* t = r.raw("tolerances")) read_tolerances(*t, r.where("tolerances"), s.tol, problems);
  r.finish();
  return s;
}

void read_experiments(const json& node, ExperimentSettings& e, std::vector<std::string>& problems) {
  ObjectReader r(node, "experiments", problems);
  if (auto v = r.get<std::vector<int>>("cutoff_n")) e.cutoff_n = *v;
  if (auto v = r.get<double>("cutoff_resolution")) e.cutoff_resolution = *v;
  if (auto v = r.get<std::vector<int>>("mollifier_n")) e.mollifier_n = *v;
  if (auto v = r.get<double>("mollifier_resolution")) e.mollifier_resolution = *v;
  if (auto v = r.get<int>("mollifier_row")) e.mollifier_row = *v;
  if (const json* i = r.raw("mollifier_phi")) read_initial(*i, r.where("mollifier_phi"), e.mollifier_phi, problems);
  r.finish();
}

json box_json(const Box& b) {
  json lo = json::array();
  json hi = json::array();
  for (int k = 0; k < b.dim; ++k) {
    lo.push_back(b.lo[k]);
    hi.push_back(b.hi[k]);
  }
  return {{"lo", lo}, {"hi", hi}};
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

const char* verb_name(Verb v) {
  switch (v) {
    case Verb::flows:
      return "flows";
    case Verb::semigroup:
      return "semigroup";
    case Verb::invariance:
      return "invariance";
    case Verb::capacity:
      return "capacity";
    case Verb::mollifier:
      return "mollifier";
    case Verb::all:
      break;
  }
  return "all";
}

std::optional<Verb> parse_verb(const std::string& name) {
  for (Verb v : {Verb::flows, Verb::semigroup, Verb::invariance, Verb::capacity, Verb::mollifier, Verb::all}) {
    if (name == verb_name(v)) return v;
  }
  return std::nullopt;
}

RunConfig parse_config(const json& doc) {
  std::vector<std::string> problems;
  RunConfig config;
  ObjectReader r(doc, "config", problems);
  if (!r.valid()) throw ConfigError(problems);

  if (auto v = r.get<int>("schema_version", true); v && *v != kSchemaVersion) {
    problems.push_back("config.schema_version: expected " + std::to_string(kSchemaVersion) + ", got " +
                       std::to_string(*v));
  }
  if (auto v = r.get<std::string>("verb")) {
    if (auto verb = parse_verb(*v)) {
      config.verb = *verb;
    } else {
      problems.push_back("config.verb: unknown verb '" + *v + "'");
    }
  }
  if (auto v = r.get<std::uint64_t>("seed")) config.seed = *v;
  if (auto v = r.get<std::string>("out")) config.out_dir = *v;
  if (const json* s = r.raw("scenario", true)) config.scenario = read_scenario(*s, problems);
  if (const json* e = r.raw("experiments")) read_experiments(*e, config.experiments, problems);
  r.finish();

  if (!problems.empty()) throw ConfigError(problems);
  return config;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
  }
  return parse_config(doc);
}

void resolve_defaults(RunConfig& config) {
  ExperimentSettings& e = config.experiments;
  const int dim = config.scenario.dim();
  if (e.cutoff_resolution <= 0.0) e.cutoff_resolution = dim == 1 ? 65536 : 256;
  if (e.mollifier_resolution <= 0.0) e.mollifier_resolution = dim == 1 ? 4096 : 512;
  if (e.mollifier_phi.width <= 0.0) {
    e.mollifier_phi = dim == 1 ? InitialState{"bump", {1.0, 0.0}, 0.5} : InitialState{"bump", {0.5, 0.3}, 0.25};
  }
}

void validate_config(const RunConfig& config) {
  std::vector<std::string> problems;
  const Scenario& s = config.scenario;
  try {
    s.validate();
  } catch (const ValidationError& e) {
    problems.push_back(std::string("scenario: ") + e.what());
  }
  const ExperimentSettings& e = config.experiments;
  const bool wants_capacity = config.verb == Verb::capacity;
  const bool wants_mollifier = config.verb == Verb::mollifier || config.verb == Verb::all;
  if (wants_capacity && problems.empty()) {
    if (!make_domain(s.domain).chart()) {
      problems.push_back("capacity: domain '" + s.domain.id + "' is not graph-representable");
    }
  }
  // `all` runs the cutoff experiment only on graph-representable domains.
  const bool runs_capacity =
      problems.empty() && (wants_capacity || (config.verb == Verb::all && make_domain(s.domain).chart()));
  if (runs_capacity) {
    if (e.cutoff_resolution > 0.0) {
      try {
        Grid check(s.grid_box, 1.0 / e.cutoff_resolution);
      } catch (const ValidationError& err) {
        problems.push_back(std::string("experiments.cutoff_resolution: ") + err.what());
      }
    }
  }
  for (int n : e.cutoff_n) {
    if (n < 2) problems.push_back("experiments.cutoff_n: entries must be at least 2");
  }
  if (!(e.cutoff_resolution >= 0.0)) problems.push_back("experiments.cutoff_resolution must be nonnegative");
  if (!(e.mollifier_resolution >= 0.0)) problems.push_back("experiments.mollifier_resolution must be nonnegative");
  for (int n : e.mollifier_n) {
    if (n < 1) problems.push_back("experiments.mollifier_n: entries must be positive");
  }
  if (wants_mollifier && problems.empty() && (e.mollifier_row < 1 || e.mollifier_row > s.dim())) {
    problems.push_back("experiments.mollifier_row: out of range 1.." + std::to_string(s.dim()));
  }
  if (wants_mollifier && e.mollifier_resolution > 0.0 && !e.mollifier_n.empty()) {
    // The standard kernel has radius 1, so tau_n is 2/n wide and must
    // span at least 8 cells.
    const int n_max = *std::max_element(e.mollifier_n.begin(), e.mollifier_n.end());
    if (n_max > 0 && 2.0 * e.mollifier_resolution / n_max < 8.0) {
      problems.push_back("experiments.mollifier_resolution: tau_" + std::to_string(n_max) +
                         " would span fewer than 8 cells; need at least " + std::to_string(4 * n_max));
    }
  }
  if (e.mollifier_n.empty()) problems.push_back("experiments.mollifier_n must not be empty");
  if (e.cutoff_n.empty()) problems.push_back("experiments.cutoff_n must not be empty");
  if (!problems.empty()) throw ConfigError(problems);
}

json scenario_to_json(const Scenario& s) {
  json field = {{"id", s.field.id}, {"params", s.field.params}};
  if (!s.field.expr.empty()) field["expr"] = s.field.expr;
  json domain = {{"id", s.domain.id}, {"params", s.domain.params}};
  if (!s.domain.expr.empty()) domain["expr"] = s.domain.expr;
  if (!s.domain.normal.empty()) domain["normal"] = s.domain.normal;
  json centre = json::array();
  for (int k = 0; k < s.dim(); ++k) centre.push_back(s.initial.centre[k]);
  return {{"name", s.name},
          {"field", field},
          {"domain", domain},
          {"grid_box", box_json(s.grid_box)},
          {"resolutions", s.resolutions},
          {"t", s.t},
          {"dt", s.dt},
          {"scheme", scheme_name(s.scheme)},
          {"initial", {{"kind", s.initial.kind}, {"centre", centre}, {"width", s.initial.width}}},
          {"flow_seeds", s.flow_seeds},
          {"flow_time", s.flow_time},
          {"boundary_samples", s.boundary_samples},
          {"hygiene_t", s.hygiene_t},
          {"hygiene_dt", s.hygiene_dt},
          {"workers", s.workers},
          {"tolerances",
           {{"escape", s.tol.escape},
            {"flux", s.tol.flux},
            {"leak_factor", s.tol.leak_factor},
            {"escape_level", s.tol.escape_level}}}};
}

}  // namespace invlab::cli
