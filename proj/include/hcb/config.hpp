#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hcb/common.hpp"
#include "hcb/drive.hpp"
#include "hcb/io.hpp"
#include "hcb/lattice.hpp"
#include "hcb/planner.hpp"
#include "json.hpp"

namespace hcb::experiment {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config: " + what) {}
};

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"spectrum",      "spectrum-figure", "eigenstate-observables",
                                              "disorder-sweep", "state-prep",      "prep-observables",
                                              "circuit",       "planner"};
  return kinds;
}

struct SpectrumSettings {
  std::string mode = "full";  // full | values | window
  double target = 0.0;
  int count = 16;
};

struct ObservableSettings {
  double floor = 1e-12;
  double cap = 100.0;
  double saturation_slope = -1e-6;
};

struct DriveSettings {
  std::vector<double> detunings{-1.0};  // delta / J
  std::vector<double> g_tilde{0.5};     // g~ / J
  std::vector<double> times;            // snapshot times (units of 1/J); empty: only the end of preparation
  std::optional<double> duration;       // default 8 J / g~^2
  std::vector<std::string> sources{"derived"};
  std::uint64_t phase_seed = 1;
  double qubit_frequency = 500.0;       // omega_q / J, sets omega_d for the standing-wave factors
  double field = 1.0;                   // Omega; only fixes the derived g~, which g_tilde overrides
  std::vector<ResonatorLine> resonators;  // empty: default_resonators()
  double overlap_floor = 1e-10;         // smallest weight written to the overlap table
  double selectivity_width = 5.0;       // |epsilon - n delta| <= width * g~ counts as on the line
};

struct SweepSettings {
  std::vector<double> spreads{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int sector = 8;
  double center = 0.0;  // epsilon / J of the band-centre state
  double edge = 10.0;   // epsilon / J of the band-edge state
  int window = 1;       // eigenstates averaged around each target
};

struct CircuitSettings {
  std::vector<double> c_ground{1.0, 2.0, 5.0};
  double c_p = 0.1;
  int steps = 10;  // C_P' = C_P k / steps for k = 1..steps
};

struct PlannerSettings {
  planner::ReadoutParams params;
  std::vector<double> j_over_a{0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5};  // sweep of J / |A|
  std::vector<double> hop_distances{1.0, 5.0, 10.0, 20.0};                             // sweep of L
};

struct Tolerances {
  double residual = 1e-10;
  double krylov = 1e-10;
  double degeneracy = 1e-10;
};

struct Limits {
  long dense_limit = 16384;
  long window_limit = 20000;
  int max_sites = kDefaultMaxSites;
};

struct Config {
  int schema_version = kSchemaVersion;
  std::string kind;
  int rows = 4, cols = 4;
  double hopping = 1.0;
  double spread = 0.2;  // Delta omega / J
  std::vector<std::uint64_t> seeds{1};
  std::vector<int> sectors;  // empty: every sector the kind needs
  SubsetPolicy subsets = SubsetPolicy::rectangles();
  SpectrumSettings spectrum;
  ObservableSettings observables;
  DriveSettings drive;
  SweepSettings sweep;
  CircuitSettings circuit;
  PlannerSettings planner;
  std::string output = "out";
  std::optional<double> j_over_2pi_mhz;  // presentation only
  Tolerances tolerances;
  Limits limits;
  int workers = 1;

  int sites() const { return rows * cols; }
};

/// One resonator per site along a single feed line: Delta_i cycles through
/// 100, 105, 110 J; g_i = 10 J; kappa_i = 1 J; tau_i = 0.013 (i+1) / J.
inline std::vector<ResonatorLine> default_resonators(int sites) {
  std::vector<ResonatorLine> out;
  for (int i = 0; i < sites; ++i) out.push_back({i, 100.0 * (1.0 + 0.05 * (i % 3)), 10.0, 1.0, 0.013 * (i + 1)});
  return out;
}

namespace detail {

/// Reads one JSON object, remembering which keys were consumed so leftovers
/// can be rejected.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  template <class T>
  void get(const std::string& key, std::optional<T>& out) {
    seen_.insert(key);
    if (!has(key)) return;
    T v{};
    get(key, v);
    out = v;
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Reader(has(key) ? j_.at(key) : empty, path_.empty() ? key : path_ + "." + key);
  }

  void skip(const std::string& key) { seen_.insert(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError("unknown key '" + (path_.empty() ? k : path_ + "." + k) + "'");
  }

  std::string where(const std::string& key = "") const {
    std::string p = path_.empty() ? key : (key.empty() ? path_ : path_ + "." + key);
    return "'" + (p.empty() ? std::string("(root)") : p) + "'";
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace detail

/// Parses and validates a config document. Unknown keys at any level are errors.
inline Config parse_config(const json& doc) {
  detail::Reader r(doc, "");
  Config c;
  r.get("schema_version", c.schema_version);
  detail::require(r.has("schema_version"), "'schema_version' is required");
  if (c.schema_version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version) + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
  r.get("kind", c.kind);
  const auto& kinds = experiment_kinds();
  detail::require(std::find(kinds.begin(), kinds.end(), c.kind) != kinds.end(), "unknown kind '" + c.kind + "'");

  {
    auto l = r.child("lattice");
    l.get("rows", c.rows);
    l.get("cols", c.cols);
    l.finish();
  }
  r.get("J", c.hopping);
  r.get("spread", c.spread);
  r.get("seeds", c.seeds);
  r.get("sectors", c.sectors);
  {
    auto s = r.child("subsets");
    std::string policy = "rectangles";
    int block = 3;
    s.get("policy", policy);
    s.get("block", block);
    s.finish();
    if (policy == "rectangles") c.subsets = SubsetPolicy::rectangles();
    else if (policy == "block-powerset") c.subsets = SubsetPolicy::block_powerset(block);
    else throw ConfigError("unknown subset policy '" + policy + "'");
  }
  {
    auto s = r.child("spectrum");
    s.get("mode", c.spectrum.mode);
    s.get("target", c.spectrum.target);
    s.get("count", c.spectrum.count);
    s.finish();
    detail::require(c.spectrum.mode == "full" || c.spectrum.mode == "values" || c.spectrum.mode == "window",
                    "spectrum.mode must be full, values or window");
  }
  {
    auto s = r.child("observables");
    s.get("floor", c.observables.floor);
    s.get("cap", c.observables.cap);
    s.get("saturation_slope", c.observables.saturation_slope);
    s.finish();
  }
  {
    auto d = r.child("drive");
    d.get("detunings", c.drive.detunings);
    d.get("g_tilde", c.drive.g_tilde);
    d.get("times", c.drive.times);
    d.get("duration", c.drive.duration);
    d.get("sources", c.drive.sources);
    d.get("phase_seed", c.drive.phase_seed);
    d.get("qubit_frequency", c.drive.qubit_frequency);
    d.get("field", c.drive.field);
    d.get("overlap_floor", c.drive.overlap_floor);
    d.get("selectivity_width", c.drive.selectivity_width);
    if (d.has("resonators")) {
      const json& arr = d.raw("resonators");
      detail::require(arr.is_array(), "'drive.resonators' must be an array");
      for (std::size_t k = 0; k < arr.size(); ++k) {
        detail::Reader e(arr[k], "drive.resonators[" + std::to_string(k) + "]");
        ResonatorLine line;
        e.get("site", line.site);
        e.get("detuning", line.detuning);
        e.get("coupling", line.coupling);
        e.get("linewidth", line.linewidth);
        e.get("delay", line.delay);
        e.finish();
        c.drive.resonators.push_back(line);
      }
    } else {
      d.skip("resonators");
    }
    d.finish();
    for (const auto& s : c.drive.sources)
      detail::require(s == "derived" || s == "random-phase", "drive source must be derived or random-phase");
    for (double g : c.drive.g_tilde) detail::require(g > 0.0, "drive.g_tilde entries must be positive");
    for (double t : c.drive.times) detail::require(t >= 0.0, "drive.times entries must be nonnegative");
  }
  {
    auto s = r.child("sweep");
    s.get("spreads", c.sweep.spreads);
    s.get("sector", c.sweep.sector);
    s.get("center", c.sweep.center);
    s.get("edge", c.sweep.edge);
    s.get("window", c.sweep.window);
    s.finish();
    detail::require(c.sweep.window >= 1, "sweep.window must be at least 1");
  }
  {
    auto s = r.child("circuit");
    s.get("c_ground", c.circuit.c_ground);
    s.get("c_p", c.circuit.c_p);
    s.get("steps", c.circuit.steps);
    s.finish();
    detail::require(c.circuit.steps >= 1, "circuit.steps must be positive");
    detail::require(c.circuit.c_p > 0.0, "circuit.c_p must be positive");
    for (double g : c.circuit.c_ground) detail::require(g > 0.0, "circuit.c_ground entries must be positive");
  }
  {
    auto p = r.child("planner");
    auto& q = c.planner.params;
    p.get("kappa", q.kappa);
    p.get("chi", q.chi);
    p.get("nbar", q.nbar);
    p.get("anharmonicity", q.anharmonicity);
    p.get("J", q.hopping);
    p.get("L", q.hop_distance);
    p.get("eta", q.eta);
    p.get("eps1", q.eps1);
    p.get("eps2", q.eps2);
    p.get("decoherence", q.decoherence);
    p.get("spread", q.spread);
    p.get("qubit_frequency", q.qubit_frequency);
    p.get("j_over_a", c.planner.j_over_a);
    p.get("hop_distances", c.planner.hop_distances);
    p.finish();
  }
  {
    auto o = r.child("output");
    o.get("directory", c.output);
    o.get("j_over_2pi_mhz", c.j_over_2pi_mhz);
    o.finish();
  }
  {
    auto t = r.child("tolerances");
    t.get("residual", c.tolerances.residual);
    t.get("krylov", c.tolerances.krylov);
    t.get("degeneracy", c.tolerances.degeneracy);
    t.finish();
  }
  {
    auto l = r.child("limits");
    l.get("dense_limit", c.limits.dense_limit);
    l.get("window_limit", c.limits.window_limit);
    l.get("max_sites", c.limits.max_sites);
    l.finish();
  }
  r.get("workers", c.workers);
  r.finish();

  detail::require(c.rows > 0 && c.cols > 0, "lattice rows and cols must be positive");
  detail::require(c.sites() <= c.limits.max_sites,
                  "lattice has " + std::to_string(c.sites()) + " sites, above limits.max_sites");
  detail::require(c.hopping > 0.0, "J must be positive");
  detail::require(c.spread >= 0.0, "spread must be nonnegative");
  detail::require(!c.seeds.empty(), "seeds must not be empty");
  detail::require(c.workers >= 1, "workers must be at least 1");
  for (int n : c.sectors)
    detail::require(n >= 0 && n <= c.sites(), "sector " + std::to_string(n) + " is outside 0..N");
  return c;
}

inline Config load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(io::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

/// The fully resolved config, defaults included; parse_config(to_json(c)) == c.
inline json to_json(const Config& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["kind"] = c.kind;
  j["lattice"] = {{"rows", c.rows}, {"cols", c.cols}};
  j["J"] = c.hopping;
  j["spread"] = c.spread;
  j["seeds"] = c.seeds;
  j["sectors"] = c.sectors;
  j["subsets"] = {{"policy", c.subsets.kind == SubsetPolicy::Kind::Rectangles ? "rectangles" : "block-powerset"},
                  {"block", c.subsets.block}};
  j["spectrum"] = {{"mode", c.spectrum.mode}, {"target", c.spectrum.target}, {"count", c.spectrum.count}};
  j["observables"] = {{"floor", c.observables.floor},
                      {"cap", c.observables.cap},
                      {"saturation_slope", c.observables.saturation_slope}};
  json res = json::array();
  for (const auto& l : c.drive.resonators)
    res.push_back({{"site", l.site},
                   {"detuning", l.detuning},
                   {"coupling", l.coupling},
                   {"linewidth", l.linewidth},
                   {"delay", l.delay}});
  j["drive"] = {{"detunings", c.drive.detunings},
                {"g_tilde", c.drive.g_tilde},
                {"times", c.drive.times},
                {"duration", c.drive.duration ? json(*c.drive.duration) : json(nullptr)},
                {"sources", c.drive.sources},
                {"phase_seed", c.drive.phase_seed},
                {"qubit_frequency", c.drive.qubit_frequency},
                {"field", c.drive.field},
                {"resonators", res},
                {"overlap_floor", c.drive.overlap_floor},
                {"selectivity_width", c.drive.selectivity_width}};
  j["sweep"] = {{"spreads", c.sweep.spreads},
                {"sector", c.sweep.sector},
                {"center", c.sweep.center},
                {"edge", c.sweep.edge},
                {"window", c.sweep.window}};
  j["circuit"] = {{"c_ground", c.circuit.c_ground}, {"c_p", c.circuit.c_p}, {"steps", c.circuit.steps}};
  const auto& p = c.planner.params;
  j["planner"] = {{"kappa", p.kappa}, {"chi", p.chi},   {"nbar", p.nbar},   {"anharmonicity", p.anharmonicity},
                  {"J", p.hopping},   {"L", p.hop_distance}, {"eta", p.eta}, {"eps1", p.eps1},
                  {"eps2", p.eps2},   {"decoherence", p.decoherence}, {"spread", p.spread},
                  {"qubit_frequency", p.qubit_frequency}, {"j_over_a", c.planner.j_over_a},
                  {"hop_distances", c.planner.hop_distances}};
  j["output"] = {{"directory", c.output},
                 {"j_over_2pi_mhz", c.j_over_2pi_mhz ? json(*c.j_over_2pi_mhz) : json(nullptr)}};
  j["tolerances"] = {{"residual", c.tolerances.residual},
                     {"krylov", c.tolerances.krylov},
                     {"degeneracy", c.tolerances.degeneracy}};
  j["limits"] = {{"dense_limit", c.limits.dense_limit},
                 {"window_limit", c.limits.window_limit},
                 {"max_sites", c.limits.max_sites}};
  j["workers"] = c.workers;
  return j;
}

}  // namespace hcb::experiment
