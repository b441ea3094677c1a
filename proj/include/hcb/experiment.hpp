#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hcb/basis.hpp"
#include "hcb/circuit.hpp"
#include "hcb/config.hpp"
#include "hcb/drive.hpp"
#include "hcb/hamiltonian.hpp"
#include "hcb/io.hpp"
#include "hcb/krylov.hpp"
#include "hcb/lattice.hpp"
#include "hcb/observables.hpp"
#include "hcb/planner.hpp"
#include "hcb/spectra.hpp"
#include "hcb/svg.hpp"

#ifndef HCB_VERSION
#define HCB_VERSION "unversioned"
#endif

namespace hcb::experiment {

/// Runs f(0..count-1) on up to `workers` threads. Callers write results by
/// index so output order never depends on scheduling.
inline void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& f) {
  const std::size_t threads = std::min<std::size_t>(std::max(1, workers), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < count;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

inline SolverOptions solver_options(const Config& c) {
  SolverOptions o;
  o.dense_limit = c.limits.dense_limit;
  o.window_limit = c.limits.window_limit;
  o.residual_tol = c.tolerances.residual;
  o.degeneracy_gap = c.tolerances.degeneracy;
  return o;
}

inline CorrelationFitOptions fit_options(const Config& c) {
  CorrelationFitOptions o;
  o.floor = c.observables.floor;
  o.cap = c.observables.cap;
  o.saturation_slope = c.observables.saturation_slope;
  return o;
}

inline Lattice lattice_of(const Config& c) { return Lattice::square(c.rows, c.cols); }

/// Site offsets in units of J for one seed; `spread` is Delta omega / J.
inline DisorderRealization realization(const Config& c, std::uint64_t seed, double spread) {
  return sample_disorder(c.sites(), spread * c.hopping, seed);
}

/// Sectors near half filling used when a kind needs a default: floor(N/2) - 2 .. floor(N/2).
inline std::vector<int> default_central_sectors(int sites) {
  std::vector<int> out;
  for (int n = sites / 2 - 2; n <= sites / 2; ++n)
    if (n >= 0) out.push_back(n);
  return out;
}

inline std::vector<int> all_sectors(int sites) {
  std::vector<int> out(sites + 1);
  std::iota(out.begin(), out.end(), 0);
  return out;
}

/// Refuses sectors the configured solver cannot hold densely.
inline void guard_dimension(const Config& c, int n, bool window_mode) {
  const auto dim = binomial(c.sites(), n);
  const long limit = window_mode ? c.limits.window_limit : c.limits.dense_limit;
  if (dim > std::uint64_t(limit))
    throw CapacityError("sector n=" + std::to_string(n) + " has dimension " + std::to_string(dim) + ", above the " +
                        (window_mode ? "window" : "dense") + " limit " + std::to_string(limit) +
                        (window_mode ? "" : "; use spectrum.mode = window or raise limits.dense_limit"));
}

// ---------------------------------------------------------------------------
// Eigenstate observables

struct EigenRow {
  int n = 0;
  double epsilon = 0.0;
  double xi = 0.0;
  bool saturated = false;
  double s_volume = 0.0, s_area = 0.0, ratio = 0.0;
  double xi_residual = 0.0, entropy_residual = 0.0;
  int cluster_size = 1;
};

/// One row per eigenstate; a degeneracy cluster contributes one row whose
/// pair correlations and subset entropies are averaged over its members.
inline std::vector<EigenRow> eigenstate_rows(const EigenDecomposition& dec, const SectorObservables& obs,
                                             const std::string& policy_tag, const CorrelationFitOptions& fit_opt,
                                             int workers = 1) {
  if (!dec.has_vectors()) throw DomainError("eigenstate observables need eigenvectors");
  std::vector<std::size_t> heads;
  for (std::size_t k = 0; k < dec.size(); k = dec.cluster_members(k).back() + 1) heads.push_back(k);
  std::vector<EigenRow> rows(heads.size());
  const auto& distance = obs.correlator().pairs().distance;
  parallel_for(heads.size(), workers, [&](std::size_t h) {
    const auto members = dec.cluster_members(heads[h]);
    std::vector<double> pairs(distance.size(), 0.0), ent(obs.subsets().size(), 0.0);
    double eps = 0.0;
    for (std::size_t m : members) {
      const Eigen::VectorXd v = dec.vectors.col(Eigen::Index(m));
      const auto p = obs.correlator().pair_values(v);
      const auto e = obs.entropies(v);
      for (std::size_t i = 0; i < p.size(); ++i) pairs[i] += p[i];
      for (std::size_t i = 0; i < e.size(); ++i) ent[i] += e[i];
      eps += dec.energies[m];
    }
    const double inv = 1.0 / double(members.size());
    for (double& x : pairs) x *= inv;
    for (double& x : ent) x *= inv;
    const CorrelationFit cf = fit_correlation_length(pairs, distance, fit_opt);
    const EntropyFit ef = fit_entropy_scaling(ent, obs.subsets(), policy_tag);
    EigenRow& r = rows[h];
    r.n = dec.sector;
    r.epsilon = eps * inv;
    r.xi = cf.xi;
    r.saturated = cf.saturated;
    r.s_volume = ef.s_volume;
    r.s_area = ef.s_area;
    r.ratio = ef.ratio();
    r.xi_residual = cf.residual;
    r.entropy_residual = ef.residual;
    r.cluster_size = int(members.size());
  });
  return rows;
}

inline io::Table eigen_table() {
  return io::Table({"n", "epsilon_over_J", "xi", "saturation_flag", "s_V", "s_A", "ratio", "xi_residual",
                    "entropy_residual", "cluster_size"});
}

inline void append_rows(io::Table& t, const std::vector<EigenRow>& rows) {
  for (const EigenRow& r : rows)
    t.add({std::int64_t(r.n), r.epsilon, r.xi, std::int64_t(r.saturated), r.s_volume, r.s_area, r.ratio,
           r.xi_residual, r.entropy_residual, std::int64_t(r.cluster_size)});
}

// ---------------------------------------------------------------------------
// Band centre versus band edge (disorder sweep)

struct CenterEdgeSample {
  double spread = 0.0;
  std::uint64_t seed = 0;
  double center_epsilon = 0.0, edge_epsilon = 0.0;
  double center_ratio = 0.0, edge_ratio = 0.0;
  double ratio = 0.0;  // center_ratio / edge_ratio
};

/// s_V/s_A of the eigenstates nearest the centre and edge targets of one
/// sector, each averaged over `window` nearest states.
inline CenterEdgeSample center_edge_sample(const Config& c, const Lattice& lat, const std::vector<Subset>& subsets,
                                           double spread, std::uint64_t seed) {
  const int n = c.sweep.sector;
  if (n < 1 || n >= c.sites()) throw DomainError("sweep.sector must lie strictly between 0 and N");
  guard_dimension(c, n, true);
  const SectorBasis basis(c.sites(), n, std::max(c.sites(), c.limits.max_sites));
  const RealOperator h = build_sector_hamiltonian(lat, realization(c, seed, spread), c.hopping, basis);
  const SectorObservables obs(lat, basis, subsets, c.subsets.tag(), fit_options(c));
  const SolverOptions opt = solver_options(c);
  auto side = [&](double target, double& eps_out, double& ratio_out) {
    const auto dec = diagonalize_sector(h, n, SpectrumMode::window(target, c.sweep.window), opt);
    double eps = 0.0, ratio = 0.0;
    for (std::size_t k = 0; k < dec.size(); ++k) {
      const Eigen::VectorXd v = dec.vectors.col(Eigen::Index(k));
      eps += dec.energies[k];
      ratio += obs.entropy_fit(v).ratio();
    }
    eps_out = eps / double(dec.size());
    ratio_out = ratio / double(dec.size());
  };
  CenterEdgeSample s;
  s.spread = spread;
  s.seed = seed;
  side(c.sweep.center, s.center_epsilon, s.center_ratio);
  side(c.sweep.edge, s.edge_epsilon, s.edge_ratio);
  s.ratio = s.center_ratio / s.edge_ratio;
  return s;
}

struct MeanStd {
  double mean = 0.0, std = 0.0;
};

/// Mean and sample standard deviation (n - 1 denominator; 0 for one sample).
inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  for (double x : v) out.mean += x;
  out.mean /= double(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / double(v.size() - 1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Driven preparation

inline DriveOperator make_drive(const Config& c, const Lattice& lat, const std::string& source, double detuning) {
  if (source == "random-phase") return random_phase_drive(lat, c.drive.phase_seed);
  if (source != "derived") throw DomainError("unknown drive source '" + source + "'");
  DriveSpec spec;
  spec.lines = c.drive.resonators.empty() ? default_resonators(lat.size()) : c.drive.resonators;
  spec.field = c.drive.field;
  spec.detuning = detuning * c.hopping;
  spec.qubit_frequency = c.drive.qubit_frequency * c.hopping;
  return derive_drive_operator(spec, lat.size());
}

struct PrepJob {
  std::string source;
  double delta = 0.0;  // units of J
  double g = 0.0;      // units of J
  std::vector<double> times;
};

struct Snapshot {
  std::size_t job = 0;
  double time = 0.0;
  PureState state;
  double norm_error = 0.0;
};

/// Evolves the vacuum under each job's driven Hamiltonian, keeping a copy at
/// every requested time.
inline std::vector<Snapshot> prepare_snapshots(const Config& c, const Lattice& lat, const DisorderRealization& dis,
                                               const std::vector<PrepJob>& jobs,
                                               std::vector<std::string>* warnings = nullptr) {
  std::vector<std::vector<Snapshot>> per_job(jobs.size());
  std::vector<std::vector<std::string>> warn(jobs.size());
  KrylovOptions kopt;
  kopt.tol = c.tolerances.krylov;
  parallel_for(jobs.size(), c.workers, [&](std::size_t j) {
    const PrepJob& job = jobs[j];
    const DriveOperator drive = make_drive(c, lat, job.source, job.delta);
    warn[j] = drive.warnings;
    const auto amps = drive.amplitudes(job.g);
    const ComplexOperator h = build_driven_hamiltonian(lat, dis, c.hopping, amps, job.delta * c.hopping);
    KrylovPropagator prop(h, kopt);
    PureState psi = PureState::vacuum_full(lat.size());
    double now = 0.0;
    std::vector<double> times = job.times;
    std::sort(times.begin(), times.end());
    for (double t : times) {
      prop.advance(psi.amplitudes, t - now);
      now = t;
      per_job[j].push_back({j, t, psi, std::abs(psi.amplitudes.norm() - 1.0)});
    }
  });
  std::vector<Snapshot> out;
  for (auto& v : per_job)
    for (auto& s : v) out.push_back(std::move(s));
  if (warnings) {
    for (auto& w : warn)
      for (auto& s : w)
        if (std::find(warnings->begin(), warnings->end(), s) == warnings->end()) warnings->push_back(s);
  }
  return out;
}

/// Overlap records of many full-space states, one sector at a time so only one
/// sector's eigenvectors are held in memory. Sectors whose weight is below
/// `skip_weight` in every state are not diagonalized; their weight is returned
/// per state in `unresolved`.
inline std::vector<std::vector<OverlapRecord>> stream_overlaps(const Config& c, const Lattice& lat,
                                                               const DisorderRealization& dis,
                                                               const std::vector<const PureState*>& states,
                                                               const std::vector<int>& sectors,
                                                               std::vector<double>& unresolved,
                                                               double skip_weight = 1e-12,
                                                               const std::function<void(int, const SectorBasis&,
                                                                                        const EigenDecomposition&)>&
                                                                   visit = {}) {
  const int sites = lat.size();
  std::vector<std::vector<OverlapRecord>> out(states.size());
  unresolved.assign(states.size(), 0.0);
  const SolverOptions opt = solver_options(c);
  for (int n : sectors) {
    const SectorBasis basis(sites, n, std::max(sites, c.limits.max_sites));
    std::vector<double> w(states.size(), 0.0);
    for (std::size_t s = 0; s < states.size(); ++s)
      for (std::uint32_t m : basis.states()) w[s] += std::norm(states[s]->amplitudes(m));
    if (*std::max_element(w.begin(), w.end()) < skip_weight && !visit) {
      for (std::size_t s = 0; s < states.size(); ++s) unresolved[s] += w[s];
      continue;
    }
    guard_dimension(c, n, false);
    const RealOperator h = build_sector_hamiltonian(lat, dis, c.hopping, basis);
    const EigenDecomposition dec = diagonalize_sector(h, n, SpectrumMode::full(), opt);
    for (std::size_t s = 0; s < states.size(); ++s) {
      auto recs = sector_overlaps(*states[s], basis, dec);
      out[s].insert(out[s].end(), recs.begin(), recs.end());
    }
    if (visit) visit(n, basis, dec);
  }
  return out;
}

struct Selectivity {
  double resolved_weight = 0.0;
  double on_line_fraction = 0.0;  // weight with |eps - n delta| <= width g~, over resolved weight
  double width = 0.0;             // weight-weighted std of eps - n delta
};

inline Selectivity selectivity(const std::vector<OverlapRecord>& recs, double delta, double g, double width_factor) {
  Selectivity s;
  double m1 = 0.0, m2 = 0.0, on = 0.0;
  for (const auto& r : recs) {
    const double d = r.epsilon - r.n * delta;
    s.resolved_weight += r.weight;
    m1 += r.weight * d;
    m2 += r.weight * d * d;
    if (std::abs(d) <= width_factor * g) on += r.weight;
  }
  if (s.resolved_weight > 0) {
    m1 /= s.resolved_weight;
    m2 /= s.resolved_weight;
    s.on_line_fraction = on / s.resolved_weight;
    s.width = std::sqrt(std::max(0.0, m2 - m1 * m1));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Prepared-state observables

/// Observables of a prepared state after post-selection on the sectors in
/// `sectors` (a z-basis measurement of n): the correlation fit uses the
/// weight-averaged sector correlations and the entropy fit the weight-averaged
/// sector entropies.
struct PreparedObservables {
  double xi = 0.0;
  bool saturated = false;
  double s_volume = 0.0, s_area = 0.0, ratio = 0.0;
  double weight = 0.0;  // total probability in the post-selected sectors
};

inline PreparedObservables prepared_observables(const PureState& psi, const Lattice& lat,
                                                const std::vector<int>& sectors, const std::vector<Subset>& subsets,
                                                const std::string& policy_tag, const CorrelationFitOptions& fit_opt) {
  if (!psi.space.is_full()) throw DomainError("prepared_observables expects a full-space state");
  const int sites = lat.size();
  std::vector<double> pairs, ent(subsets.size(), 0.0);
  std::vector<int> distance;
  PreparedObservables out;
  for (int n : sectors) {
    const SectorBasis basis(sites, n, std::max(sites, kDefaultMaxSites));
    const SectorProjection proj = project_sector(psi, basis);
    if (!proj.state) continue;
    const SectorObservables obs(lat, basis, subsets, policy_tag, fit_opt);
    const auto p = obs.correlator().pair_values(proj.state->amplitudes);
    const auto e = obs.entropies(proj.state->amplitudes);
    if (pairs.empty()) {
      pairs.assign(p.size(), 0.0);
      distance = obs.correlator().pairs().distance;
    }
    for (std::size_t i = 0; i < p.size(); ++i) pairs[i] += proj.weight * p[i];
    for (std::size_t i = 0; i < e.size(); ++i) ent[i] += proj.weight * e[i];
    out.weight += proj.weight;
  }
  if (!(out.weight > 0.0)) throw NoSignalError("prepared state has no weight in the post-selected sectors");
  for (double& x : pairs) x /= out.weight;
  for (double& x : ent) x /= out.weight;
  const CorrelationFit cf = fit_correlation_length(pairs, distance, fit_opt);
  const EntropyFit ef = fit_entropy_scaling(ent, subsets, policy_tag);
  out.xi = cf.xi;
  out.saturated = cf.saturated;
  out.s_volume = ef.s_volume;
  out.s_area = ef.s_area;
  out.ratio = ef.ratio();
  return out;
}

/// Eigenstate values inside the energy window populated by a prepared state:
/// in sector n the window is mean +- 2 std of the state's overlap distribution.
struct Envelope {
  double xi_min = INFINITY, xi_max = -INFINITY;
  double ratio_min = INFINITY, ratio_max = -INFINITY;
  int states = 0;

  bool contains_xi(double v) const { return states > 0 && v >= xi_min && v <= xi_max; }
  bool contains_ratio(double v) const { return states > 0 && v >= ratio_min && v <= ratio_max; }
};

struct EnergyWindow {
  double lo = 0.0, hi = 0.0;
};

inline std::map<int, EnergyWindow> populated_windows(const std::vector<OverlapRecord>& recs,
                                                     const std::vector<int>& sectors, double sigmas = 2.0) {
  std::map<int, EnergyWindow> out;
  for (int n : sectors) {
    double w = 0.0, m1 = 0.0, m2 = 0.0;
    for (const auto& r : recs)
      if (r.n == n) {
        w += r.weight;
        m1 += r.weight * r.epsilon;
        m2 += r.weight * r.epsilon * r.epsilon;
      }
    if (!(w > 0.0)) continue;
    m1 /= w;
    const double sd = std::sqrt(std::max(0.0, m2 / w - m1 * m1));
    out[n] = {m1 - sigmas * sd, m1 + sigmas * sd};
  }
  return out;
}

inline Envelope envelope(const std::vector<EigenRow>& rows, const std::map<int, EnergyWindow>& windows) {
  Envelope e;
  for (const EigenRow& r : rows) {
    const auto it = windows.find(r.n);
    if (it == windows.end() || r.epsilon < it->second.lo || r.epsilon > it->second.hi) continue;
    ++e.states;
    e.xi_min = std::min(e.xi_min, r.xi);
    e.xi_max = std::max(e.xi_max, r.xi);
    e.ratio_min = std::min(e.ratio_min, r.ratio);
    e.ratio_max = std::max(e.ratio_max, r.ratio);
  }
  return e;
}

// ---------------------------------------------------------------------------
// Runner

struct StageTime {
  std::string name;
  double seconds = 0.0;
};

struct OutputFile {
  std::string path;  // relative to the output directory
  std::string sha256;
  std::size_t bytes = 0;
};

struct RunManifest {
  json config;
  std::string code_version = HCB_VERSION;
  std::vector<StageTime> stages;
  std::vector<std::uint64_t> seeds;
  std::vector<OutputFile> outputs;
  std::vector<std::string> warnings;

  json to_json() const {
    json j;
    j["code_version"] = code_version;
    j["config"] = config;
    j["seeds"] = seeds;
    json st = json::array();
    for (const auto& s : stages) st.push_back({{"stage", s.name}, {"seconds", s.seconds}});
    j["stages"] = st;
    json files = json::array();
    for (const auto& f : outputs) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    j["outputs"] = files;
    j["warnings"] = warnings;
    return j;
  }
};

namespace detail {

class Run {
 public:
  explicit Run(const Config& c) : c_(c), dir_(c.output) {
    man_.config = to_json(c);
    man_.seeds = c.seeds;
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir_.string() + ": " + ec.message());
  }

  const Config& config() const { return c_; }
  RunManifest& manifest() { return man_; }

  void emit(const std::string& name, const std::string& bytes) {
    io::write_file(dir_ / name, bytes);
    man_.outputs.push_back({name, io::sha256_hex(bytes), bytes.size()});
  }
  void emit_table(const std::string& name, const io::Table& t) { emit(name, io::to_csv(t)); }

  template <class F>
  auto stage(const std::string& name, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&] {
      man_.stages.push_back({name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
    };
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      finish();
    } else {
      auto r = f();
      finish();
      return r;
    }
  }

  void warn(const std::string& w) {
    if (std::find(man_.warnings.begin(), man_.warnings.end(), w) == man_.warnings.end()) man_.warnings.push_back(w);
  }

  RunManifest finish() {
    io::write_file(dir_ / "manifest.json", man_.to_json().dump(2) + "\n");
    return man_;
  }

 private:
  const Config& c_;
  std::filesystem::path dir_;
  RunManifest man_;
};

inline std::string seed_suffix(std::uint64_t seed) { return "_seed" + std::to_string(seed); }

inline std::vector<int> sectors_or(const Config& c, std::vector<int> fallback) {
  return c.sectors.empty() ? fallback : c.sectors;
}

inline void run_spectrum(Run& run, bool figure) {
  const Config& c = run.config();
  const Lattice lat = lattice_of(c);
  const std::vector<int> sectors = sectors_or(c, all_sectors(c.sites()));
  const bool window = c.spectrum.mode == "window";
  for (int n : sectors) guard_dimension(c, n, window);
  // Eigenvalues are all this kind writes, so "full" needs no vectors either.
  const SpectrumMode mode =
      window ? SpectrumMode::window(c.spectrum.target, c.spectrum.count) : SpectrumMode::values_only();
  for (std::uint64_t seed : c.seeds) {
    const DisorderRealization dis = realization(c, seed, c.spread);
    std::vector<EigenDecomposition> decs(sectors.size());
    run.stage("diagonalize" + seed_suffix(seed), [&] {
      parallel_for(sectors.size(), c.workers, [&](std::size_t k) {
        const RealOperator h = build_sector_hamiltonian(lat, dis, c.hopping, sectors[k]);
        decs[k] = diagonalize_sector(h, sectors[k], mode, solver_options(c));
      });
    });
    io::Table t({"n", "index", "epsilon_over_J", "degeneracy_flag"});
    io::Table bands({"n", "dimension", "epsilon_min_over_J", "epsilon_max_over_J", "bandwidth_over_J"});
    for (const auto& d : decs) {
      for (std::size_t k = 0; k < d.size(); ++k)
        t.add({std::int64_t(d.sector), std::int64_t(k), d.energies[k], std::int64_t(d.degenerate[k])});
      if (!d.energies.empty())
        bands.add({std::int64_t(d.sector), std::int64_t(binomial(c.sites(), d.sector)), d.energies.front(),
                   d.energies.back(), sector_bandwidth(d)});
    }
    run.emit_table("spectrum" + seed_suffix(seed) + ".csv", t);
    if (figure) {
      run.emit_table("bands" + seed_suffix(seed) + ".csv", bands);
      run.emit("spectrum" + seed_suffix(seed) + ".svg", svg::render_svg(t, svg::FigureKind::Spectrum));
    }
  }
}

inline void run_eigenstate_observables(Run& run) {
  const Config& c = run.config();
  const Lattice lat = lattice_of(c);
  const std::vector<int> sectors = sectors_or(c, default_central_sectors(c.sites()));
  for (int n : sectors) guard_dimension(c, n, false);
  const auto subsets = enumerate_subsets(lat, c.subsets);
  for (std::uint64_t seed : c.seeds) {
    const DisorderRealization dis = realization(c, seed, c.spread);
    io::Table t = eigen_table();
    for (int n : sectors) {
      const SectorBasis basis(c.sites(), n, std::max(c.sites(), c.limits.max_sites));
      const EigenDecomposition dec = run.stage("diagonalize" + seed_suffix(seed) + "_n" + std::to_string(n), [&] {
        return diagonalize_sector(build_sector_hamiltonian(lat, dis, c.hopping, basis), n, SpectrumMode::full(),
                                  solver_options(c));
      });
      run.stage("observables" + seed_suffix(seed) + "_n" + std::to_string(n), [&] {
        const SectorObservables obs(lat, basis, subsets, c.subsets.tag(), fit_options(c));
        append_rows(t, eigenstate_rows(dec, obs, c.subsets.tag(), fit_options(c), c.workers));
      });
    }
    run.emit_table("observables" + seed_suffix(seed) + ".csv", t);
    run.emit("observables_xi" + seed_suffix(seed) + ".svg", svg::render_svg(t, svg::FigureKind::EigenstateXi));
    run.emit("observables_ratio" + seed_suffix(seed) + ".svg",
             svg::render_svg(t, svg::FigureKind::EigenstateRatio));
  }
}

inline void run_disorder_sweep(Run& run) {
  const Config& c = run.config();
  const Lattice lat = lattice_of(c);
  const auto subsets = enumerate_subsets(lat, c.subsets);
  guard_dimension(c, c.sweep.sector, true);
  std::vector<std::pair<double, std::uint64_t>> points;
  for (double s : c.sweep.spreads)
    for (std::uint64_t seed : c.seeds) points.emplace_back(s, seed);
  std::vector<CenterEdgeSample> samples(points.size());
  run.stage("center_edge", [&] {
    parallel_for(points.size(), c.workers, [&](std::size_t k) {
      samples[k] = center_edge_sample(c, lat, subsets, points[k].first, points[k].second);
    });
  });
  io::Table raw({"spread_over_J", "seed", "center_epsilon_over_J", "edge_epsilon_over_J", "center_ratio",
                 "edge_ratio", "ratio"});
  for (const auto& s : samples)
    raw.add({s.spread, std::int64_t(s.seed), s.center_epsilon, s.edge_epsilon, s.center_ratio, s.edge_ratio, s.ratio});
  io::Table summary({"spread_over_J", "mean_ratio", "std_ratio", "samples"});
  for (double spread : c.sweep.spreads) {
    std::vector<double> r;
    for (const auto& s : samples)
      if (s.spread == spread) r.push_back(s.ratio);
    const MeanStd ms = mean_std(r);
    summary.add({spread, ms.mean, ms.std, std::int64_t(r.size())});
  }
  run.emit_table("sweep_samples.csv", raw);
  run.emit_table("sweep.csv", summary);
  run.emit("sweep.svg", svg::render_svg(summary, svg::FigureKind::DisorderSweep));
}

inline io::Table overlap_table() {
  return io::Table({"source", "delta_over_J", "g_tilde_over_J", "time_over_J", "n", "epsilon_over_J", "weight"});
}

inline void run_state_prep(Run& run) {
  const Config& c = run.config();
  const Lattice lat = lattice_of(c);
  const std::vector<int> sectors = sectors_or(c, all_sectors(c.sites()));
  for (std::uint64_t seed : c.seeds) {
    const DisorderRealization dis = realization(c, seed, c.spread);
    std::vector<PrepJob> jobs;
    for (const auto& src : c.drive.sources)
      for (double d : c.drive.detunings)
        for (double g : c.drive.g_tilde) {
          PrepJob j{src, d, g, c.drive.times};
          if (j.times.empty()) j.times = {c.drive.duration.value_or(default_preparation_time(c.hopping, g))};
          jobs.push_back(j);
        }
    std::vector<std::string> warnings;
    const auto snaps = run.stage("prepare" + seed_suffix(seed), [&] { return prepare_snapshots(c, lat, dis, jobs, &warnings); });
    for (const auto& w : warnings) run.warn(w);
    std::vector<const PureState*> states;
    for (const auto& s : snaps) states.push_back(&s.state);
    std::vector<double> unresolved;
    const auto recs = run.stage("overlaps" + seed_suffix(seed), [&] {
      return stream_overlaps(c, lat, dis, states, sectors, unresolved);
    });
    io::Table t = overlap_table();
    io::Table summary({"source", "delta_over_J", "g_tilde_over_J", "time_over_J", "norm_error", "resolved_weight",
                       "unresolved_weight", "on_line_fraction", "width_over_J"});
    for (std::size_t s = 0; s < snaps.size(); ++s) {
      const PrepJob& job = jobs[snaps[s].job];
      for (const auto& r : recs[s])
        if (r.weight >= c.drive.overlap_floor)
          t.add({job.source, job.delta, job.g, snaps[s].time, std::int64_t(r.n), r.epsilon, r.weight});
      const Selectivity sel = selectivity(recs[s], job.delta, job.g, c.drive.selectivity_width);
      summary.add({job.source, job.delta, job.g, snaps[s].time, snaps[s].norm_error, sel.resolved_weight,
                   unresolved[s], sel.on_line_fraction, sel.width});
    }
    run.emit_table("overlaps" + seed_suffix(seed) + ".csv", t);
    run.emit_table("prep_summary" + seed_suffix(seed) + ".csv", summary);
    run.emit("overlaps" + seed_suffix(seed) + ".svg", svg::render_svg(t, svg::FigureKind::Overlap));
  }
}

inline void run_prep_observables(Run& run) {
  const Config& c = run.config();
  const Lattice lat = lattice_of(c);
  const std::vector<int> sectors = sectors_or(c, default_central_sectors(c.sites()));
  for (int n : sectors) guard_dimension(c, n, false);
  const auto subsets = enumerate_subsets(lat, c.subsets);
  const CorrelationFitOptions fit = fit_options(c);
  for (std::uint64_t seed : c.seeds) {
    const DisorderRealization dis = realization(c, seed, c.spread);
    std::vector<PrepJob> jobs;
    for (const auto& src : c.drive.sources)
      for (double d : c.drive.detunings)
        for (double g : c.drive.g_tilde)
          jobs.push_back({src, d, g, {c.drive.duration.value_or(default_preparation_time(c.hopping, g))}});
    std::vector<std::string> warnings;
    const auto snaps = run.stage("prepare" + seed_suffix(seed), [&] { return prepare_snapshots(c, lat, dis, jobs, &warnings); });
    for (const auto& w : warnings) run.warn(w);
    std::vector<const PureState*> states;
    for (const auto& s : snaps) states.push_back(&s.state);

    std::vector<EigenRow> eig;
    std::vector<double> unresolved;
    const auto recs = run.stage("eigenstates" + seed_suffix(seed), [&] {
      return stream_overlaps(c, lat, dis, states, sectors, unresolved, 0.0,
                             [&](int, const SectorBasis& basis, const EigenDecomposition& dec) {
                               const SectorObservables obs(lat, basis, subsets, c.subsets.tag(), fit);
                               auto rows = eigenstate_rows(dec, obs, c.subsets.tag(), fit, c.workers);
                               eig.insert(eig.end(), rows.begin(), rows.end());
                             });
    });
    std::vector<PreparedObservables> prepared(snaps.size());
    run.stage("prepared_observables" + seed_suffix(seed), [&] {
      parallel_for(snaps.size(), c.workers, [&](std::size_t s) {
        prepared[s] = prepared_observables(snaps[s].state, lat, sectors, subsets, c.subsets.tag(), fit);
      });
    });
    io::Table t({"source", "delta_over_J", "g_tilde_over_J", "xi", "saturation_flag", "s_V", "s_A", "ratio",
                 "postselected_weight", "envelope_states", "envelope_xi_min", "envelope_xi_max",
                 "envelope_ratio_min", "envelope_ratio_max", "xi_within", "ratio_within"});
    io::Table ov = overlap_table();
    for (std::size_t s = 0; s < snaps.size(); ++s) {
      const PrepJob& job = jobs[snaps[s].job];
      const PreparedObservables& p = prepared[s];
      const Envelope e = envelope(eig, populated_windows(recs[s], sectors));
      t.add({job.source, job.delta, job.g, p.xi, std::int64_t(p.saturated), p.s_volume, p.s_area, p.ratio, p.weight,
             std::int64_t(e.states), e.xi_min, e.xi_max, e.ratio_min, e.ratio_max,
             std::int64_t(e.contains_xi(p.xi)), std::int64_t(e.contains_ratio(p.ratio))});
      for (const auto& r : recs[s])
        if (r.weight >= c.drive.overlap_floor)
          ov.add({job.source, job.delta, job.g, snaps[s].time, std::int64_t(r.n), r.epsilon, r.weight});
    }
    io::Table et = eigen_table();
    append_rows(et, eig);
    run.emit_table("prep_observables" + seed_suffix(seed) + ".csv", t);
    run.emit_table("eigenstates" + seed_suffix(seed) + ".csv", et);
    run.emit_table("prep_overlaps" + seed_suffix(seed) + ".csv", ov);
    run.emit("prep_xi" + seed_suffix(seed) + ".svg", svg::render_svg(t, svg::FigureKind::PrepXi, &et));
    run.emit("prep_ratio" + seed_suffix(seed) + ".svg", svg::render_svg(t, svg::FigureKind::PrepRatio, &et));
    run.emit("prep_overlaps" + seed_suffix(seed) + ".svg", svg::render_svg(ov, svg::FigureKind::Overlap));
  }
}

inline void run_circuit(Run& run) {
  const Config& c = run.config();
  io::Table t({"C_P", "C_P_prime", "C_G", "C_eff_f", "ratio"});
  const double cp = c.circuit.c_p;
  for (double cg : c.circuit.c_ground)
    for (int k = 1; k <= c.circuit.steps; ++k) {
      const double cpp = cp * double(k) / double(c.circuit.steps);
      const double f = circuit::parasitic_coupling_floating(cg, cp, cpp);
      t.add({cp, cpp, cg, f, f / circuit::parasitic_coupling_grounded(cp)});
    }
  run.emit_table("circuit.csv", t);
  run.emit("circuit.svg", svg::render_svg(t, svg::FigureKind::Circuit));
}

inline void run_planner(Run& run) {
  const Config& c = run.config();
  const planner::ReadoutParams& p = c.planner.params;
  io::Table report({"quantity", "value"});
  auto put = [&](const std::string& name, auto&& f) {
    try {
      report.add({name, io::Cell(f())});
    } catch (const DomainError& e) {
      report.add({name, std::string("n/a: ") + e.what()});
    }
  };
  put("measurement_time", [&] { return planner::measurement_time(p); });
  put("n_critical", [&] { return planner::constraints(p).n_critical; });
  put("purcell_rate", [&] { return planner::constraints(p).purcell_rate; });
  put("J_T_meas_optimized", [&] { return planner::optimized_measurement_time(p); });
  put("optimal_kappa", [&] { return planner::optimal_linewidth(p); });
  put("fast_readout_threshold", [&] { return planner::fast_readout_threshold(p); });
  put("stark_freeze_lower_bound", [&] { return planner::stark_freeze_lower_bound(p); });
  put("weak_continuous_threshold", [&] { return planner::weak_continuous_threshold(p); });
  put("readout_regime", [&] { return planner::to_string(planner::classify_readout_regime(p)); });
  put("model_regime", [&] {
    const auto m = planner::classify_model_regime(p.hopping, p.qubit_frequency, p.anharmonicity, p.spread);
    return planner::to_string(m.regime) + (m.ambiguous ? " (ambiguous)" : "");
  });
  run.emit_table("planner_report.csv", report);

  io::Table sweep({"J_over_A", "L", "readout_regime", "fast_threshold_over_A", "weak_threshold_over_A"});
  for (double L : c.planner.hop_distances)
    for (double r : c.planner.j_over_a) {
      planner::ReadoutParams q = p;
      q.hop_distance = L;
      q.hopping = r * std::abs(p.anharmonicity);
      const double a = std::abs(p.anharmonicity);
      if (!(a > 0.0)) throw DomainError("planner sweep needs a nonzero anharmonicity");
      sweep.add({r, L, planner::to_string(planner::classify_readout_regime(q)),
                 planner::fast_readout_threshold(q) / a, planner::weak_continuous_threshold(q) / a});
    }
  run.emit_table("planner_sweep.csv", sweep);
}

}  // namespace detail

/// Runs one experiment and writes its tables, figures and manifest.json to
/// config.output.
inline RunManifest run(const Config& c) {
  detail::Run r(c);
  if (c.kind == "spectrum") detail::run_spectrum(r, false);
  else if (c.kind == "spectrum-figure") detail::run_spectrum(r, true);
  else if (c.kind == "eigenstate-observables") detail::run_eigenstate_observables(r);
  else if (c.kind == "disorder-sweep") detail::run_disorder_sweep(r);
  else if (c.kind == "state-prep") detail::run_state_prep(r);
  else if (c.kind == "prep-observables") detail::run_prep_observables(r);
  else if (c.kind == "circuit") detail::run_circuit(r);
  else if (c.kind == "planner") detail::run_planner(r);
  else throw ConfigError("unknown kind '" + c.kind + "'");
  return r.finish();
}

}  // namespace hcb::experiment
