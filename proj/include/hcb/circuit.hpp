#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "hcb/common.hpp"

namespace hcb::circuit {

/// Floating transmon (pads 1, 2) capacitively coupled to a resonator node 3.
struct CapacitanceNetwork {
  double c1 = 0.0;       // pad 1 to ground
  double c2 = 0.0;       // pad 2 to ground
  double c_shunt = 0.0;  // pad 1 to pad 2
  double c_res = 0.0;    // resonator to ground
  double c_g1 = 0.0;     // pad 1 to resonator
  double c_g2 = 0.0;     // pad 2 to resonator
};

inline void validate(const CapacitanceNetwork& n) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be positive");
  };
  positive(n.c1, "C_1");
  positive(n.c2, "C_2");
  positive(n.c_shunt, "C_sh");
  positive(n.c_res, "C_r");
  // Pad-to-resonator couplings may vanish (decoupled resonator).
  if (!(n.c_g1 >= 0.0) || !(n.c_g2 >= 0.0)) throw DomainError("coupling capacitances must be nonnegative");
}

/// Capacitance matrix of T = 1/2 dPhi^T C dPhi over node fluxes (Phi_1, Phi_2, Phi_3).
inline Eigen::Matrix3d build_capacitance_matrix(const CapacitanceNetwork& n) {
  validate(n);
  Eigen::Matrix3d c;
  c << n.c1 + n.c_shunt + n.c_g1, -n.c_shunt, -n.c_g1,
       -n.c_shunt, n.c2 + n.c_shunt + n.c_g2, -n.c_g2,
       -n.c_g1, -n.c_g2, n.c_res + n.c_g1 + n.c_g2;
  return c;
}

/// Plus-minus change of variables Phi_(+-) = Phi_1 +- Phi_2.
inline Eigen::Matrix3d plus_minus_transform() {
  Eigen::Matrix3d s;
  s << 1, 1, 0,
       1, -1, 0,
       0, 0, 1;
  return s;
}

struct ReducedCircuit {
  Eigen::Matrix2d c_eff;   // over (Phi_-, Phi_3)
  double c_q_eff = 0.0;    // C_q + C_c
  double c_c = 0.0;        // effective coupling capacitance
  double c_r_eff = 0.0;    // C_r + C_c
  double residual = 0.0;   // ||C_eff * Tr_+ C'^-1 - 1||, relative
};

/// Transforms to plus-minus variables, inverts, drops the '+' row and column,
/// and re-inverts to read off the effective two-node capacitance matrix.
inline ReducedCircuit reduce_floating(const CapacitanceNetwork& n) {
  const Eigen::Matrix3d c = build_capacitance_matrix(n);
  const Eigen::Matrix3d s_inv = plus_minus_transform().inverse();
  const Eigen::Matrix3d c_pm = s_inv * c * s_inv;
  Eigen::FullPivLU<Eigen::Matrix3d> lu(c_pm);
  if (!lu.isInvertible()) throw SingularError("capacitance matrix is singular");
  const Eigen::Matrix3d inv = lu.inverse();
  const Eigen::Matrix2d traced = inv.bottomRightCorner<2, 2>();
  Eigen::FullPivLU<Eigen::Matrix2d> lu2(traced);
  if (!lu2.isInvertible()) throw SingularError("reduced inverse capacitance matrix is singular");
  ReducedCircuit r;
  r.c_eff = lu2.inverse();
  r.c_q_eff = r.c_eff(0, 0);
  r.c_c = -r.c_eff(0, 1);
  r.c_r_eff = r.c_eff(1, 1);
  r.residual = (r.c_eff * traced - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff();
  return r;
}

inline double closed_form_qubit_capacitance(const CapacitanceNetwork& n) {
  validate(n);
  return n.c_shunt + 1.0 / (1.0 / (n.c1 + n.c_g1) + 1.0 / (n.c2 + n.c_g2));
}

inline double closed_form_coupling(const CapacitanceNetwork& n) {
  validate(n);
  return (n.c_g1 * n.c2 - n.c_g2 * n.c1) / (n.c1 + n.c2 + n.c_g1 + n.c_g2);
}

/// Network for a resonator parasitically coupled to both pads: pads see ground
/// through C_G and the parasitic node through C_P and C_P'.
inline CapacitanceNetwork parasitic_network(double c_ground, double c_p, double c_p_prime, double c_shunt = 1.0,
                                            double c_res = 1.0) {
  return CapacitanceNetwork{c_ground, c_ground, c_shunt, c_res, c_p, c_p_prime};
}

/// C_G (C_P - C_P') / (2 C_G + C_P + C_P'), with C_P' <= C_P after a swap.
inline double parasitic_coupling_floating(double c_ground, double c_p, double c_p_prime) {
  if (!(c_ground > 0.0) || !(c_p > 0.0) || !(c_p_prime > 0.0))
    throw DomainError("parasitic capacitances must be positive");
  if (c_p_prime > c_p) std::swap(c_p, c_p_prime);
  return c_ground * (c_p - c_p_prime) / (2.0 * c_ground + c_p + c_p_prime);
}

inline double parasitic_coupling_grounded(double c_p) {
  if (!(c_p > 0.0)) throw DomainError("parasitic capacitance must be positive");
  return c_p;
}

}  // namespace hcb::circuit
