#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <numbers>

#include "hcb/drive.hpp"
#include "hcb/hamiltonian.hpp"
#include "hcb/krylov.hpp"
#include "oracles.hpp"

using namespace hcb;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("diagonal Hamiltonian phases") {
  std::vector<ComplexOperator::Triplet> t;
  const std::vector<double> e{-1.3, 0.0, 0.7, 2.5, 4.0};
  for (int k = 0; k < 5; ++k) t.emplace_back(k, k, cplx(e[k]));
  const ComplexOperator h(5, t, true);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Constant(5, 1.0 / std::sqrt(5.0));
  const double time = 3.7;
  const auto out = evolve(psi, h, time);
  for (int k = 0; k < 5; ++k) CHECK(std::abs(out(k) - psi(k) * std::exp(cplx(0, -e[k] * time))) < 1e-9);
}

TEST_CASE("resonant Rabi oscillation") {
  const Lattice l = Lattice::square(1, 1);
  const double c = 0.4;
  const auto h = build_driven_hamiltonian(l, DisorderRealization::clean(1), 1.0, std::vector<cplx>{c}, 0.0);
  KrylovPropagator prop(h);
  Eigen::VectorXcd psi = PureState::vacuum_full(1).amplitudes;
  double t = 0.0;
  for (int step = 0; step < 20; ++step) {
    prop.advance(psi, 0.37);
    t += 0.37;
    CHECK_THAT(std::norm(psi(1)), WithinAbs(std::pow(std::sin(c * t), 2), 1e-8));
    CHECK_THAT(psi.norm(), WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("evolution matches dense exponentiation and conserves norm and energy") {
  const Lattice l = Lattice::square(2, 3);
  const auto dis = sample_disorder(6, 0.2, 5);
  std::vector<cplx> d;
  Rng rng(9);
  for (int i = 0; i < 6; ++i) d.emplace_back(0.3 * rng.normal(), 0.3 * rng.normal());
  const auto h = build_driven_hamiltonian(l, dis, 1.0, d, -0.5);
  const Eigen::MatrixXcd dense = oracle::full_hamiltonian(l, dis.offsets, 1.0, d, -0.5);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
  const double t = 9.0;
  Eigen::VectorXcd psi0 = PureState::vacuum_full(6).amplitudes;
  const Eigen::VectorXcd phase = (es.eigenvalues().cast<cplx>() * cplx(0, -t)).array().exp();
  const Eigen::VectorXcd ref = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint() * psi0;
  const Eigen::VectorXcd out = evolve(psi0, h, t);
  CHECK((out - ref).norm() < 1e-8);
  CHECK_THAT(out.norm(), WithinAbs(1.0, 1e-9));
  const double e0 = psi0.dot(dense * psi0).real();
  const double e1 = out.dot(dense * out).real();
  CHECK(std::abs(e1 - e0) <= 1e-8 * std::max(1.0, h.norm_bound()));
}

TEST_CASE("stationary eigenstate keeps its populations") {
  const Lattice l = Lattice::square(2, 2);
  const auto h = build_driven_hamiltonian(l, sample_disorder(4, 0.2, 1), 1.0, std::vector<cplx>(4, 0.0), 0.3);
  const Eigen::MatrixXcd dense = oracle::full_hamiltonian(l, sample_disorder(4, 0.2, 1).offsets, 1.0, {}, 0.3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(dense);
  const Eigen::VectorXcd v = es.eigenvectors().col(6);
  const auto out = evolve(v, h, 25.0);
  CHECK((out.cwiseAbs2() - v.cwiseAbs2()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("derived drive operator") {
  SECTION("single resonator closed form") {
    DriveSpec s;
    const double kappa = 0.04, g = 1.5, delta_r = 30.0, field = 2.0;
    s.qubit_frequency = 100.0;
    s.detuning = 0.0;
    // omega_d tau = pi / 2
    s.lines = {{0, delta_r, g, kappa, std::numbers::pi / 2 / s.qubit_frequency}};
    s.field = field;
    const auto op = derive_drive_operator(s, 1);
    CHECK_THAT(op.alpha[0].real(), WithinAbs(-1.0, 1e-15));
    CHECK_THAT(op.g_tilde, WithinRel(std::sqrt(2.0) * field * std::sqrt(kappa) * g / delta_r, 1e-14));
    CHECK(op.source == "derived");
  }
  SECTION("standing-wave node and symmetric pair") {
    DriveSpec s;
    s.qubit_frequency = 10.0;
    s.field = 1.0;
    s.lines = {{0, 20.0, 1.0, 0.1, std::numbers::pi / 10.0}, {1, 20.0, 1.0, 0.1, 0.05}, {2, 20.0, 1.0, 0.1, 0.05}};
    const auto op = derive_drive_operator(s, 4);
    CHECK(std::abs(op.alpha[0]) < 1e-15);
    CHECK_THAT(std::abs(op.alpha[1]), WithinAbs(1.0 / std::sqrt(2.0), 1e-14));
    CHECK_THAT(std::abs(op.alpha[2]), WithinAbs(1.0 / std::sqrt(2.0), 1e-14));
    CHECK(op.alpha[3] == cplx(0.0));
  }
  SECTION("normalization, product invariant and field scaling") {
    DriveSpec s;
    s.qubit_frequency = 7.0;
    s.detuning = -0.4;
    s.field = 0.8;
    Rng rng(4);
    for (int i = 0; i < 6; ++i)
      s.lines.push_back({i, 15.0 + 5 * rng.uniform(), 0.5 + rng.uniform(), 0.05 * rng.uniform(), 3 * rng.uniform()});
    const auto op = derive_drive_operator(s, 6);
    double norm = 0.0;
    for (auto a : op.alpha) norm += std::norm(a);
    CHECK_THAT(norm, WithinAbs(1.0, 1e-12));
    const double wd = s.qubit_frequency + s.detuning;
    for (const auto& r : s.lines) {
      const double expect = -std::sqrt(2.0) * s.field * std::sqrt(r.linewidth) * r.coupling *
                            std::sin(wd * r.delay) / r.detuning;
      CHECK_THAT((op.g_tilde * op.alpha[r.site]).real(), WithinAbs(expect, 1e-14));
    }
    s.field *= 3.0;
    const auto scaled = derive_drive_operator(s, 6);
    CHECK_THAT(scaled.g_tilde, WithinRel(3.0 * op.g_tilde, 1e-14));
    for (int i = 0; i < 6; ++i) CHECK(std::abs(scaled.alpha[i] - op.alpha[i]) < 1e-15);
  }
  SECTION("all nodes is an error") {
    DriveSpec s;
    s.qubit_frequency = 1.0;
    s.field = 1.0;
    s.lines = {{0, 10.0, 1.0, 0.1, std::numbers::pi}};
    CHECK_THROWS_AS(derive_drive_operator(s, 1), DomainError);
  }
  SECTION("dispersive-regime warnings") {
    DriveSpec s;
    s.qubit_frequency = 1.0;
    s.detuning = 5.0;
    s.field = 1.0;
    s.lines = {{0, 10.0, 1.0, 2.0, 1.0}};
    CHECK(derive_drive_operator(s, 1).warnings.size() == 2);
  }
}

TEST_CASE("random-phase drive") {
  const Lattice l = Lattice::square(4, 4);
  const auto a = random_phase_drive(l, 1), b = random_phase_drive(l, 1), c = random_phase_drive(l, 2);
  double norm = 0.0;
  cplx overlap = 0.0;
  for (int i = 0; i < 16; ++i) {
    norm += std::norm(a.alpha[i]);
    CHECK(a.alpha[i] == b.alpha[i]);
    CHECK_THAT(std::abs(a.alpha[i]), WithinAbs(0.25, 1e-15));
    overlap += std::conj(a.alpha[i]) * c.alpha[i];
  }
  CHECK_THAT(norm, WithinAbs(1.0, 1e-12));
  CHECK(std::abs(overlap) < 1.0 - 1e-3);
}

TEST_CASE("coherent-like preparation and overlap spectra") {
  const Lattice l = Lattice::square(2, 3);
  const auto dis = sample_disorder(6, 0.2, 2);
  const auto drive = random_phase_drive(l, 3);
  std::map<int, EigenDecomposition> decs;
  for (int n = 0; n <= 6; ++n) decs.emplace(n, diagonalize_sector(build_sector_hamiltonian(l, dis, 1.0, n), n));

  const PureState vac = prepare_coherent_like(l, dis, 1.0, drive, -1.0, 0.0);
  CHECK(vac.amplitudes == PureState::vacuum_full(6).amplitudes);
  const auto rec0 = overlap_spectrum(vac, decs);
  double total = 0.0;
  for (const auto& r : rec0) {
    total += r.weight;
    if (r.n == 0) CHECK_THAT(r.weight, WithinAbs(1.0, 1e-15));
  }
  CHECK_THAT(total, WithinAbs(1.0, 1e-12));

  // An eigenstate puts all its weight on itself.
  const SectorBasis b3(6, 3);
  const PureState eig = embed_full(PureState{Space::of_sector(6, 3), decs.at(3).vectors.col(4).cast<cplx>()}, b3);
  for (const auto& r : sector_overlaps(eig, b3, decs.at(3)))
    if (std::abs(r.epsilon - decs.at(3).energies[4]) < 1e-12) CHECK_THAT(r.weight, WithinAbs(1.0, 1e-12));

  const PureState psi = prepare_coherent_like(l, dis, 1.0, drive, -1.0, 0.3);
  CHECK_THAT(psi.norm(), WithinAbs(1.0, 1e-9));
  total = 0.0;
  for (const auto& r : overlap_spectrum(psi, decs)) total += r.weight;
  CHECK_THAT(total, WithinAbs(1.0, 1e-8));

  std::map<int, EigenDecomposition> partial{{0, decs.at(0)}};
  CHECK_THROWS_AS(overlap_spectrum(psi, partial), DomainError);
}

TEST_CASE("number populations are frame independent") {
  // Evolving in the drive frame and in the qubit frame differ by exp(-i delta N t),
  // which leaves every popcount-resolved population unchanged.
  const Lattice l = Lattice::square(2, 2);
  const auto dis = sample_disorder(4, 0.2, 6);
  std::vector<cplx> d{{0.2, 0.1}, {-0.1, 0.3}, {0.25, 0.0}, {0.0, -0.2}};
  const double delta = -0.7, t = 6.0;
  const auto h = build_driven_hamiltonian(l, dis, 1.0, d, delta);
  const Eigen::VectorXcd out = evolve(PureState::vacuum_full(4).amplitudes, h, t);
  // Qubit-frame amplitudes: multiply by exp(+i delta n t); populations unchanged.
  for (std::uint32_t m = 0; m < 16; ++m) {
    const cplx lab = out(m) * std::exp(cplx(0, delta * std::popcount(m) * t));
    CHECK_THAT(std::norm(lab), WithinAbs(std::norm(out(m)), 1e-15));
  }
}
