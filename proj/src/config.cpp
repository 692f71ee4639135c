// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "errors.hpp"
#include "json.hpp"

namespace penflow {

using nlohmann::json;

namespace {

constexpr const char* kRequired[] = {"demand.kappa", "demand.sigma", "demand.y0",
                                     "demand.mu",    "transport.lambda", "transport.T"};

// Walks the document, consuming known keys and recording provenance.
class Reader {
 public:
  explicit Reader(const json& root) : root_(root) {
    if (!root_.is_object()) throw ValidationError("config: top level must be a JSON object");
  }

  const json* find(const std::string& path) const {
    const auto dot = path.find('.');
    const std::string section = path.substr(0, dot);
    const std::string key = path.substr(dot + 1);
    const auto s = root_.find(section);
    if (s == root_.end()) return nullptr;
    if (!s->is_object()) throw ValidationError(section + ": expected an object");
    const auto k = s->find(key);
    return k == s->end() ? nullptr : &*k;
  }

  void check_required() const {
    std::string missing;
    for (const char* key : kRequired) {
      if (find(key) == nullptr) missing += (missing.empty() ? "" : ", ") + std::string(key);
    }
    if (!missing.empty()) throw ValidationError("config: missing required keys: " + missing);
  }

  void check_unknown() const {
    static const std::map<std::string, std::set<std::string>> known = {
        {"demand", {"kappa", "sigma", "y0", "mu"}},
        {"transport", {"lambda", "T", "dx", "dt"}},
        {"penalty", {"alpha", "eps_tail"}},
        {"bounds", {"u_min", "u_max"}},
        {"control", {"method", "solver", "n_updates", "update_times"}},
        {"montecarlo", {"n_paths", "seed", "threads", "figure_path"}},
        {"output", {"dir", "band_levels"}},
        {"figures", {"alphas"}},
    };
    for (const auto& [section, body] : root_.items()) {
      const auto it = known.find(section);
      if (it == known.end()) throw ValidationError(section + ": unknown key");
      if (!body.is_object()) throw ValidationError(section + ": expected an object");
      for (const auto& [key, value] : body.items()) {
        if (!it->second.contains(key)) throw ValidationError(section + "." + key + ": unknown key");
      }
    }
  }

  double number(const std::string& path, std::optional<double> fallback) {
    const json* v = find(path);
    if (v == nullptr) return record_default(path, json(*fallback)), *fallback;
    if (!v->is_number()) throw ValidationError(path + ": expected a number");
    record(path, *v);
    return v->get<double>();
  }

  /// Number, or null meaning +infinity.
  double number_or_null(const std::string& path) {
    const json* v = find(path);
    if (v == nullptr) {
      record_default(path, json(nullptr));
      return std::numeric_limits<double>::infinity();
    }
    record(path, *v);
    if (v->is_null()) return std::numeric_limits<double>::infinity();
    if (!v->is_number()) throw ValidationError(path + ": expected a number or null");
    return v->get<double>();
  }

  template <typename Int>
  Int integer(const std::string& path, Int fallback) {
    const json* v = find(path);
    if (v == nullptr) return record_default(path, json(fallback)), fallback;
    if (!v->is_number_integer()) throw ValidationError(path + ": expected an integer");
    if (v->is_number_unsigned()) {
      const auto u = v->get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<Int>::max())) {
        throw ValidationError(path + ": value out of range");
      }
    } else {
      const auto i = v->get<std::int64_t>();
      if (i < static_cast<std::int64_t>(std::numeric_limits<Int>::min()) ||
          (i > 0 && static_cast<std::uint64_t>(i) >
                        static_cast<std::uint64_t>(std::numeric_limits<Int>::max()))) {
        throw ValidationError(path + ": value out of range");
      }
    }
    record(path, *v);
    return v->get<Int>();
  }

  std::string string(const std::string& path, const std::string& fallback) {
    const json* v = find(path);
    if (v == nullptr) return record_default(path, json(fallback)), fallback;
    if (!v->is_string()) throw ValidationError(path + ": expected a string");
    record(path, *v);
    return v->get<std::string>();
  }

  std::vector<double> numbers(const std::string& path, std::optional<std::vector<double>> fallback) {
    const json* v = find(path);
    if (v == nullptr) return record_default(path, json(*fallback)), *fallback;
    if (!v->is_array()) throw ValidationError(path + ": expected an array of numbers");
    std::vector<double> out;
    for (const json& x : *v) {
      if (!x.is_number()) throw ValidationError(path + ": expected an array of numbers");
      out.push_back(x.get<double>());
    }
    record(path, *v);
    return out;
  }

  MeanFunction mean_function(const std::string& path) {
    const json* v = find(path);
    if (v == nullptr || !v->is_object()) throw ValidationError(path + ": expected an object");
    record(path, *v);
    MeanFunction mu;
    for (const auto& [key, value] : v->items()) {
      if (key == "constant") {
        if (!value.is_number()) throw ValidationError(path + ".constant: expected a number");
        mu.constant_offset = value.get<double>();
      } else if (key == "sinusoids") {
        if (!value.is_array()) throw ValidationError(path + ".sinusoids: expected an array");
        for (const json& w : value) {
          if (!w.is_object()) throw ValidationError(path + ".sinusoids: expected objects");
          Sinusoid s;
          for (const auto& [wk, wv] : w.items()) {
            if (!wv.is_number()) throw ValidationError(path + ".sinusoids." + wk + ": expected a number");
            if (wk == "amplitude") s.amplitude = wv.get<double>();
            else if (wk == "frequency") s.frequency = wv.get<double>();
            else if (wk == "phase") s.phase = wv.get<double>();
            else throw ValidationError(path + ".sinusoids." + wk + ": unknown key");
          }
          mu.sinusoids.push_back(s);
        }
      } else if (key == "knots") {
        if (!value.is_array()) throw ValidationError(path + ".knots: expected an array");
        for (const json& k : value) {
          if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
            throw ValidationError(path + ".knots: expected [time, value] pairs");
          }
          mu.knots.push_back({k[0].get<double>(), k[1].get<double>()});
        }
      } else {
        throw ValidationError(path + "." + key + ": unknown key");
      }
    }
    return mu;
  }

  bool has(const std::string& path) const { return find(path) != nullptr; }

  std::vector<ProvenanceEntry> take_provenance() { return std::move(provenance_); }

 private:
  void record(const std::string& path, const json& v) { provenance_.push_back({path, v.dump(), false}); }
  void record_default(const std::string& path, const json& v) {
    provenance_.push_back({path, v.dump(), true});
  }

  const json& root_;
  std::vector<ProvenanceEntry> provenance_;
};

// Prefixes module validation failures with the config section they came from.
template <typename Fn>
void validate_as(const std::string& where, Fn&& fn) {
  try {
    fn();
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("override '" + assignment + "': expected key.path=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  const auto dot = key.find('.');
  if (dot == std::string::npos || key.find('.', dot + 1) != std::string::npos) {
    throw ValidationError("override '" + key + "': expected section.key");
  }
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;  // bare strings need no quotes
  if (!doc.is_object()) throw ValidationError("config: top level must be a JSON object");
  json& section = doc[key.substr(0, dot)];
  if (section.is_null()) section = json::object();
  if (!section.is_object()) throw ValidationError(key.substr(0, dot) + ": expected an object");
  section[key.substr(dot + 1)] = std::move(value);
}

Policy parse_policy(const std::string& s) {
  if (s == "cm1") return Policy::cm1;
  if (s == "cm2") return Policy::cm2;
  throw ValidationError("control.method: expected \"cm1\" or \"cm2\"");
}

SolverKind parse_solver(const std::string& s) {
  if (s == "pointwise") return SolverKind::pointwise;
  if (s == "descent") return SolverKind::descent;
  throw ValidationError("control.solver: expected \"pointwise\" or \"descent\"");
}

}  // namespace

UpdateSchedule RunConfig::update_schedule() const {
  if (!update_times.empty()) return UpdateSchedule{update_times};
  return UpdateSchedule::uniform(n_updates.value_or(1), grid);
}

MCConfig RunConfig::mc_config(Policy policy) const {
  MCConfig mc;
  mc.n_paths = n_paths;
  mc.seed = seed;
  mc.policy = policy;
  mc.schedule = update_schedule();
  mc.solver = solver;
  mc.band_levels = band_levels;
  mc.threads = threads;
  return mc;
}

ParsedConfig parse_config(std::string_view text, std::span<const std::string> overrides) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ValidationError("config: not a well-formed JSON document");
  if (doc.is_null()) doc = json::object();
  for (const std::string& o : overrides) apply_override(doc, o);

  Reader in(doc);
  in.check_unknown();
  in.check_required();

  RunConfig cfg;
  cfg.demand.kappa = in.number("demand.kappa", std::nullopt);
  cfg.demand.sigma = in.number("demand.sigma", std::nullopt);
  cfg.demand.y0 = in.number("demand.y0", std::nullopt);
  cfg.demand.mu = in.mean_function("demand.mu");

  cfg.grid.lambda = in.number("transport.lambda", std::nullopt);
  cfg.grid.T = in.number("transport.T", std::nullopt);
  cfg.grid.dx = in.number("transport.dx", 0.1);
  cfg.grid.dt = in.number("transport.dt", cfg.grid.dx / cfg.grid.lambda);

  cfg.penalty.alpha = in.number("penalty.alpha", 1.0);
  cfg.penalty.eps_tail = in.number("penalty.eps_tail", 1e-12);
  cfg.bounds.u_min = in.number("bounds.u_min", 0.0);
  cfg.bounds.u_max = in.number_or_null("bounds.u_max");

  cfg.method = parse_policy(in.string("control.method", "cm1"));
  cfg.solver = parse_solver(in.string("control.solver", "pointwise"));
  if (in.has("control.update_times")) {
    if (in.has("control.n_updates")) {
      throw ValidationError("control: give either n_updates or update_times, not both");
    }
    cfg.update_times = in.numbers("control.update_times", std::nullopt);
    cfg.n_updates.reset();
  } else {
    cfg.n_updates = in.integer<int>("control.n_updates", 5);
  }

  cfg.n_paths = in.integer<int>("montecarlo.n_paths", 1000);
  cfg.seed = in.integer<std::uint64_t>("montecarlo.seed", 2018);
  cfg.threads = in.integer<unsigned>("montecarlo.threads", 0);
  cfg.figure_path = in.integer<int>("montecarlo.figure_path", 0);

  cfg.out_dir = in.string("output.dir", "out");
  cfg.band_levels = in.numbers("output.band_levels", std::vector<double>{0.5, 0.9, 0.99});
  cfg.figure_alphas = in.numbers("figures.alphas", std::vector<double>{1.0, 3.0});

  validate_as("demand", [&] { cfg.demand.validate(); });
  validate_as("transport", [&] { cfg.grid.validate(); });
  validate_as("demand.mu", [&] { cfg.demand.mu.validate(cfg.grid.T); });
  validate_as("penalty", [&] { cfg.penalty.validate(); });
  validate_as("bounds", [&] { cfg.bounds.validate(); });
  validate_as("control", [&] { cfg.update_schedule().validate(cfg.grid); });
  validate_as("montecarlo", [&] {
    if (cfg.n_paths < 1) throw ValidationError("n_paths >= 1 violated");
    if (cfg.figure_path < 0 || cfg.figure_path >= cfg.n_paths) {
      throw ValidationError("figure_path must index an existing path");
    }
  });
  validate_as("output", [&] {
    if (cfg.out_dir.empty()) throw ValidationError("dir must not be empty");
    if (cfg.band_levels.empty()) throw ValidationError("band_levels must not be empty");
    for (double level : cfg.band_levels) {
      if (!(level > 0.0 && level < 1.0)) throw ValidationError("band levels must lie in (0, 1)");
    }
  });
  validate_as("figures", [&] {
    for (double a : cfg.figure_alphas) {
      PenaltyParams{a, cfg.penalty.eps_tail}.validate();
    }
  });

  return {std::move(cfg), in.take_provenance()};
}

ParsedConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot read config " + path.string());
  std::ostringstream text;
  text << file.rdbuf();
  return parse_config(text.str(), overrides);
}

std::string serialize_config(const RunConfig& cfg) {
  json mu = json::object();
  if (cfg.demand.mu.is_tabulated()) {
    json knots = json::array();
    for (const Knot& k : cfg.demand.mu.knots) knots.push_back({k.t, k.value});
    mu["knots"] = knots;
  } else {
    mu["constant"] = cfg.demand.mu.constant_offset;
    json sinusoids = json::array();
    for (const Sinusoid& w : cfg.demand.mu.sinusoids) {
      sinusoids.push_back({{"amplitude", w.amplitude}, {"frequency", w.frequency}, {"phase", w.phase}});
    }
    mu["sinusoids"] = sinusoids;
  }
  json control = {{"method", cfg.method == Policy::cm1 ? "cm1" : "cm2"},
                  {"solver", cfg.solver == SolverKind::pointwise ? "pointwise" : "descent"}};
  if (cfg.n_updates) {
    control["n_updates"] = *cfg.n_updates;
  } else {
    control["update_times"] = cfg.update_times;
  }
  const json doc = {
      {"demand", {{"kappa", cfg.demand.kappa}, {"sigma", cfg.demand.sigma}, {"y0", cfg.demand.y0}, {"mu", mu}}},
      {"transport", {{"lambda", cfg.grid.lambda}, {"T", cfg.grid.T}, {"dx", cfg.grid.dx}, {"dt", cfg.grid.dt}}},
      {"penalty", {{"alpha", cfg.penalty.alpha}, {"eps_tail", cfg.penalty.eps_tail}}},
      {"bounds",
       {{"u_min", cfg.bounds.u_min},
        {"u_max", std::isfinite(cfg.bounds.u_max) ? json(cfg.bounds.u_max) : json(nullptr)}}},
      {"control", control},
      {"montecarlo",
       {{"n_paths", cfg.n_paths}, {"seed", cfg.seed}, {"threads", cfg.threads}, {"figure_path", cfg.figure_path}}},
      {"output", {{"dir", cfg.out_dir}, {"band_levels", cfg.band_levels}}},
      {"figures", {{"alphas", cfg.figure_alphas}}},
  };
  return doc.dump(2) + "\n";
}

std::string provenance_json(std::span<const ProvenanceEntry> provenance) {
  json out = json::array();
  for (const ProvenanceEntry& e : provenance) {
    out.push_back({{"key", e.key}, {"value", json::parse(e.value)}, {"default", e.defaulted}});
  }
  return out.dump(2) + "\n";
}

}  // namespace penflow
