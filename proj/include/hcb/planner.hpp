#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "hcb/common.hpp"

namespace hcb::planner {

/// Readout and device scales. All energies share one unit; times are its inverse.
struct ReadoutParams {
  double kappa = 0.0;          // resonator linewidth
  double chi = 0.0;            // dispersive shift
  double nbar = 0.0;           // mean readout photons
  double anharmonicity = 0.0;  // A, sign kept
  double hopping = 0.0;        // J
  double hop_distance = 1.0;   // L
  double eta = 1.0;            // Purcell-filter factor
  double eps1 = 0.2;
  double eps2 = 0.2;
  double decoherence = 0.0;    // Gamma
  double spread = 0.0;         // Delta omega
  double qubit_frequency = 0.0;
};

namespace detail {
inline void nonzero(double v, const char* name) {
  if (v == 0.0 || !std::isfinite(v)) throw DomainError(std::string(name) + " must be nonzero and finite");
}
}  // namespace detail

/// T_meas >= 1/kappa + (kappa^2 + (chi/2)^2) / (kappa nbar chi^2).
inline double measurement_time(const ReadoutParams& p) {
  detail::nonzero(p.kappa, "kappa");
  detail::nonzero(p.chi, "chi");
  detail::nonzero(p.nbar, "nbar");
  const double k = std::abs(p.kappa), c = std::abs(p.chi);
  return 1.0 / k + (k * k + 0.25 * c * c) / (k * p.nbar * c * c);
}

struct ReadoutConstraints {
  double n_critical = 0.0;      // |A| / 4|chi|
  double purcell_rate = 0.0;    // eta kappa |chi| / |A|
};

inline ReadoutConstraints constraints(const ReadoutParams& p) {
  detail::nonzero(p.chi, "chi");
  detail::nonzero(p.anharmonicity, "anharmonicity");
  const double a = std::abs(p.anharmonicity), c = std::abs(p.chi);
  return {a / (4.0 * c), p.eta * std::abs(p.kappa) * c / a};
}

/// J T_meas with nbar = eps1 n_crit and L gamma_P = eps2 J held fixed:
///   J/kappa + (4 eta L / (eps1 eps2)) kappa^2 / (J A^2).
inline double optimized_measurement_time(const ReadoutParams& p) {
  detail::nonzero(p.kappa, "kappa");
  detail::nonzero(p.hopping, "J");
  detail::nonzero(p.anharmonicity, "anharmonicity");
  detail::nonzero(p.eps1, "eps1");
  detail::nonzero(p.eps2, "eps2");
  const double k = std::abs(p.kappa), j = std::abs(p.hopping), a = std::abs(p.anharmonicity);
  return j / k + (4.0 * p.eta * p.hop_distance / (p.eps1 * p.eps2)) * k * k / (j * a * a);
}

/// Linewidth minimizing optimized_measurement_time: kappa^3 = J / (2 B).
inline double optimal_linewidth(const ReadoutParams& p) {
  detail::nonzero(p.hopping, "J");
  detail::nonzero(p.anharmonicity, "anharmonicity");
  const double j = std::abs(p.hopping), a = std::abs(p.anharmonicity);
  const double b = 4.0 * p.eta * p.hop_distance / (p.eps1 * p.eps2 * j * a * a);
  if (!(b > 0.0)) throw DomainError("Purcell term vanishes; no interior optimum");
  return std::cbrt(j / (2.0 * b));
}

enum class ReadoutRegime { FastReadout, StarkFreeze, WeakContinuous };

inline std::string to_string(ReadoutRegime r) {
  switch (r) {
    case ReadoutRegime::FastReadout: return "fast-readout";
    case ReadoutRegime::StarkFreeze: return "stark-freeze";
    case ReadoutRegime::WeakContinuous: return "weak-continuous";
  }
  return "?";
}

struct ReadoutThresholds {
  double fast_constant = 0.03;   // J <= c sqrt(eps1 eps2 / (eta L)) |A|
  double weak_fraction = 1.0;    // J >= f eps1 |A|
};

inline double fast_readout_threshold(const ReadoutParams& p, const ReadoutThresholds& t = {}) {
  return t.fast_constant * std::sqrt(p.eps1 * p.eps2 / (p.eta * p.hop_distance)) * std::abs(p.anharmonicity);
}

/// Lower bound quoted for the Stark-freeze regime (no Purcell factor).
inline double stark_freeze_lower_bound(const ReadoutParams& p, const ReadoutThresholds& t = {}) {
  return t.fast_constant * std::sqrt(p.eps1 * p.eps2 / p.hop_distance) * std::abs(p.anharmonicity);
}

inline double weak_continuous_threshold(const ReadoutParams& p, const ReadoutThresholds& t = {}) {
  return t.weak_fraction * p.eps1 * std::abs(p.anharmonicity);
}

/// Both thresholds are inclusive: J equal to the fast threshold is fast
/// readout, J equal to eps1 |A| is weak continuous.
inline ReadoutRegime classify_readout_regime(const ReadoutParams& p, const ReadoutThresholds& t = {}) {
  detail::nonzero(p.eta, "eta");
  detail::nonzero(p.hop_distance, "L");
  const double j = std::abs(p.hopping);
  if (j <= fast_readout_threshold(p, t)) return ReadoutRegime::FastReadout;
  if (j >= weak_continuous_threshold(p, t)) return ReadoutRegime::WeakContinuous;
  return ReadoutRegime::StarkFreeze;
}

enum class ModelRegime { Uncoupled, ParticleLike, SpinLike, Semiclassical };

inline std::string to_string(ModelRegime r) {
  switch (r) {
    case ModelRegime::Uncoupled: return "uncoupled";
    case ModelRegime::ParticleLike: return "particle-like";
    case ModelRegime::SpinLike: return "spin-like";
    case ModelRegime::Semiclassical: return "semiclassical";
  }
  return "?";
}

struct ModelClassification {
  ModelRegime regime = ModelRegime::Uncoupled;
  bool ambiguous = false;
};

struct ModelThresholds {
  double much_less = 10.0;  // "a << b" read as a <= b / much_less
};

/// Region tests in order: uncoupled (J < dw), particle-like (J <= w_q/10),
/// spin-like (w_q <= J <= |A|/10), semiclassical (J > max(w_q, |A|)).
/// Inputs in none of them get the region nearest in log J and the ambiguity flag.
inline ModelClassification classify_model_regime(double hopping, double qubit_frequency, double anharmonicity,
                                                 double spread, const ModelThresholds& t = {}) {
  const double j = std::abs(hopping), wq = std::abs(qubit_frequency), a = std::abs(anharmonicity);
  if (!(j > 0.0) || !(wq > 0.0) || !(a > 0.0)) throw DomainError("J, omega_q and |A| must be positive");
  if (j < std::abs(spread)) return {ModelRegime::Uncoupled, false};
  const double particle_hi = wq / t.much_less;
  const double spin_lo = wq, spin_hi = a / t.much_less;
  const double semi_lo = std::max(wq, a);
  if (j <= particle_hi) return {ModelRegime::ParticleLike, false};
  if (spin_lo <= j && j <= spin_hi) return {ModelRegime::SpinLike, false};
  if (j > semi_lo) return {ModelRegime::Semiclassical, false};

  const double lj = std::log(j);
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::array<double, 3> dist{std::abs(lj - std::log(particle_hi)), inf, std::abs(std::log(semi_lo) - lj)};
  if (spin_lo <= spin_hi)
    dist[1] = std::min(std::abs(lj - std::log(spin_lo)), std::abs(lj - std::log(spin_hi)));
  const auto best = std::min_element(dist.begin(), dist.end()) - dist.begin();
  constexpr std::array<ModelRegime, 3> labels{ModelRegime::ParticleLike, ModelRegime::SpinLike,
                                              ModelRegime::Semiclassical};
  return {labels[best], true};
}

}  // namespace hcb::planner
