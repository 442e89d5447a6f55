// mdav2/state.hpp - multi-D2 trial state and closed-form expectation values
//
//   |psi> = sum_m sum_n A_mn |n> (x) |f_m>,   |f_m> normalized coherent states.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>

#include "polariton/disorder.hpp"
#include "polariton/errors.hpp"
#include "polariton/model.hpp"

namespace polariton {

struct MultiD2State {
  Eigen::MatrixXcd A;  // M x n_sys
  Eigen::MatrixXcd f;  // M x n_modes

  MultiD2State() = default;
  MultiD2State(Eigen::Index m, Eigen::Index n_sys, Eigen::Index n_modes)
      : A(Eigen::MatrixXcd::Zero(m, n_sys)), f(Eigen::MatrixXcd::Zero(m, n_modes)) {}

  std::size_t multiplicity() const { return static_cast<std::size_t>(A.rows()); }
  std::size_t n_sys() const { return static_cast<std::size_t>(A.cols()); }
  std::size_t n_modes() const { return static_cast<std::size_t>(f.cols()); }
  bool all_finite() const { return A.allFinite() && f.allFinite(); }
};

// S_mm' = <f_m|f'_m'> for normalized coherent states.
inline Eigen::MatrixXcd debye_waller(const Eigen::MatrixXcd& f1, const Eigen::MatrixXcd& f2) {
  const Eigen::VectorXd n1 = f1.rowwise().squaredNorm();
  const Eigen::VectorXd n2 = f2.rowwise().squaredNorm();
  Eigen::MatrixXcd s = f1.conjugate() * f2.transpose();
  for (Eigen::Index i = 0; i < s.rows(); ++i)
    for (Eigen::Index j = 0; j < s.cols(); ++j) s(i, j) = std::exp(s(i, j) - 0.5 * (n1(i) + n2(j)));
  return s;
}

inline Eigen::MatrixXcd debye_waller(const MultiD2State& s) { return debye_waller(s.f, s.f); }

// <a|b>
inline cplx overlap(const MultiD2State& a, const MultiD2State& b) {
  if (a.n_sys() != b.n_sys() || a.n_modes() != b.n_modes())
    throw ConfigurationError("overlap: states live in different spaces");
  const Eigen::MatrixXcd rho = a.A.conjugate() * b.A.transpose();
  return rho.cwiseProduct(debye_waller(a.f, b.f)).sum();
}

inline double checked_real(cplx z, const char* what, double tol = 1e-8) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw NumericalHealthError(std::string(what) + ": non-finite value");
  if (std::abs(z.imag()) > tol * std::max(1.0, std::abs(z.real())))
    throw NumericalHealthError(std::string(what) + ": imaginary residue " + std::to_string(z.imag()));
  return z.real();
}

inline double norm_squared(const MultiD2State& s) { return checked_real(overlap(s, s), "norm"); }

// Population of system basis label i.
inline double label_population(const MultiD2State& s, std::size_t i) {
  const Eigen::VectorXcd a = s.A.col(static_cast<Eigen::Index>(i));
  const Eigen::MatrixXcd dw = debye_waller(s);
  return checked_real(a.dot(dw * a), "population");
}

inline Eigen::VectorXd label_populations(const MultiD2State& s) {
  const Eigen::MatrixXcd dw = debye_waller(s);
  Eigen::VectorXd p(s.A.cols());
  for (Eigen::Index i = 0; i < s.A.cols(); ++i) {
    const Eigen::VectorXcd a = s.A.col(i);
    p(i) = checked_real(a.dot(dw * a), "population");
  }
  return p;
}

// Index 0 is |1_c> in the TC/HTC basis.
inline double photon_population(const MultiD2State& s) { return label_population(s, 0); }

// <b_k^+ b_k>
inline double mode_occupation(const MultiD2State& s, std::size_t k) {
  const Eigen::MatrixXcd rho = s.A.conjugate() * s.A.transpose();
  const Eigen::MatrixXcd dw = debye_waller(s);
  const auto kk = static_cast<Eigen::Index>(k);
  cplx sum = 0;
  for (Eigen::Index m = 0; m < rho.rows(); ++m)
    for (Eigen::Index mp = 0; mp < rho.cols(); ++mp)
      sum += rho(m, mp) * dw(m, mp) * std::conj(s.f(m, kk)) * s.f(mp, kk);
  return checked_real(sum, "mode occupation");
}

// <psi|H|psi> with the action's true system matrix (no reference-energy shift).
inline cplx expectation(const MultiD2State& s, const HamiltonianAction& h) {
  const Eigen::MatrixXcd dw = debye_waller(s);
  const Eigen::Index m = s.A.rows();
  const Eigen::MatrixXcd hA = h.system * s.A.transpose();  // n_sys x M
  const Eigen::MatrixXcd rho = s.A.conjugate() * s.A.transpose();
  Eigen::MatrixXcd e = s.A.conjugate() * hA;  // (m, m') -> A_m^* h A_m'
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      cplx boson = 0;
      for (std::size_t k = 0; k < h.n_modes(); ++k)
        boson += h.mode_frequencies[k] * std::conj(s.f(a, k)) * s.f(b, k);
      e(a, b) += boson * rho(a, b);
    }
  }
  for (const auto& c : h.couplings) {
    for (Eigen::Index a = 0; a < m; ++a) {
      for (Eigen::Index b = 0; b < m; ++b) {
        const cplx amp = std::conj(s.A(a, c.row)) * s.A(b, c.col);
        e(a, b) += amp * (c.create * std::conj(s.f(a, c.mode)) + c.annihilate * s.f(b, c.mode));
      }
    }
  }
  return e.cwiseProduct(dw).sum();
}

inline double energy(const MultiD2State& s, const HamiltonianAction& h) {
  const cplx e = expectation(s, h);
  if (!std::isfinite(e.real())) throw NumericalHealthError("energy: non-finite value");
  return e.real();
}

// Point uniformly distributed in the complex unit disk, keyed by counters.
inline cplx unit_disk_draw(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  const double r = std::sqrt(counter_uniform(seed, a, 2 * b));
  const double phi = 2.0 * kPi * counter_uniform(seed, a, 2 * b + 1);
  return std::polar(r, phi);
}

inline constexpr double kDefaultNoiseScale = 1e-4;

// Component 0 carries the requested state; components 1..M-1 are noise-seeded copies.
inline MultiD2State init_state(const Eigen::VectorXcd& amplitudes, const Eigen::VectorXcd& displacements,
                               std::size_t M, std::uint64_t noise_seed, double noise_scale = kDefaultNoiseScale) {
  if (M < 1) throw ConfigurationError("multiplicity must be >= 1");
  if (M > 1 && !(noise_scale > 0))
    throw ConfigurationError("multiplicity > 1 needs noise_scale > 0: a noiseless multi-D2 start has a singular metric");
  const auto S = amplitudes.size();
  const auto K = displacements.size();
  const auto m = static_cast<Eigen::Index>(M);
  MultiD2State s(m, S, K);
  s.A.row(0) = amplitudes.transpose();
  s.f.rowwise() = displacements.transpose();
  std::uint64_t counter = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const cplx d = unit_disk_draw(noise_seed, 1, counter++);
      if (M > 1) s.f(i, k) += noise_scale * d;
    }
    if (i == 0) continue;
    for (Eigen::Index n = 0; n < S; ++n) s.A(i, n) = noise_scale * unit_disk_draw(noise_seed, 0, counter++);
  }
  const double nrm = norm_squared(s);
  if (!(nrm > 0)) throw ConfigurationError("init_state: zero initial vector");
  s.A /= std::sqrt(nrm);
  return s;
}

inline MultiD2State init_state(std::size_t n_sys, std::size_t n_modes, std::size_t initial_label, std::size_t M,
                               std::uint64_t noise_seed, double noise_scale = kDefaultNoiseScale) {
  if (initial_label >= n_sys) throw ConfigurationError("initial label outside the system basis");
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_sys));
  a(static_cast<Eigen::Index>(initial_label)) = 1.0;
  return init_state(a, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n_modes)), M, noise_seed, noise_scale);
}

}  // namespace polariton
