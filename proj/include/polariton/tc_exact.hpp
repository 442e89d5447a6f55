// tc_exact.hpp - closed-form Tavis-Cummings propagators and spectra
//
// Complex energies carry the lifetimes: omega_c -> omega_c - i kappa and
// omega_n -> omega_n - i Gamma. Photon residues w_m weight the poles of the
// photon Green's function, <1_c|U(t)|1_c> = sum_m w_m exp(-i E_m t / hbar).
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "polariton/constants.hpp"
#include "polariton/disorder.hpp"
#include "polariton/errors.hpp"
#include "polariton/model.hpp"
#include "polariton/parallel.hpp"

namespace polariton {

struct BrightStatePair {
  cplx e_plus;
  cplx e_minus;
  cplx weight_plus;
  cplx weight_minus;
  cplx omega_c;  // omega_c - i kappa
  cplx omega0;   // omega0 - i Gamma
  cplx gap() const { return e_plus - e_minus; }
};

inline BrightStatePair bright_energies(double omega_c, double omega0, double omega_R, double kappa = 0.0,
                                       double gamma = 0.0) {
  if (!(omega_R >= 0)) throw DomainError("omega_R must be >= 0");
  BrightStatePair p;
  p.omega_c = cplx(omega_c, -kappa);
  p.omega0 = cplx(omega0, -gamma);
  const cplx mean = 0.5 * (p.omega_c + p.omega0);
  const cplx root = std::sqrt((p.omega_c - p.omega0) * (p.omega_c - p.omega0) + 4.0 * omega_R * omega_R);
  p.e_plus = mean + 0.5 * root;
  p.e_minus = mean - 0.5 * root;
  const cplx delta = mean - p.omega0;
  if (std::abs(root) > 1e-300) {
    p.weight_plus = (delta + 0.5 * root) / root;
    p.weight_minus = (0.5 * root - delta) / root;
  } else {
    p.weight_plus = 1.0;
    p.weight_minus = 0.0;
  }
  return p;
}

namespace detail {

inline cplx sinc(cplx x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0 + x * x * x * x / 120.0;
  return std::sin(x) / x;
}

}  // namespace detail

// <1_c,0|U(t)|1_c,0>, written in a form that stays finite as E+ -> E-.
inline cplx photon_amplitude(double t, const BrightStatePair& p) {
  if (t < 0) throw DomainError("photon_amplitude: t must be >= 0");
  const cplx mean = 0.5 * (p.e_plus + p.e_minus);
  const cplx delta = mean - p.omega0;
  const cplx phi = 0.5 * p.gap() * t / kHbar;
  return std::exp(-kI * mean * t / kHbar) * (std::cos(phi) - kI * delta * (t / kHbar) * detail::sinc(phi));
}

inline cplx photon_amplitude(double t, const BrightStatePair& p, double omega0) {
  BrightStatePair q = p;
  q.omega0 = cplx(omega0, p.omega0.imag());
  return photon_amplitude(t, q);
}

struct StickSpectrum {
  std::vector<double> positions;
  std::vector<double> weights;
};

namespace detail {

inline void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigurationError("omega grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ConfigurationError("omega grid must be strictly increasing");
}

inline double pole_lineshape(double omega, cplx weight, cplx energy) {
  return (weight * kI / (omega - energy)).real() / kPi;
}

}  // namespace detail

// Unit-area pole sum F(w) = (1/pi) Re sum_pm w_pm i / (w - E_pm).
inline std::vector<double> absorption_clean(const std::vector<double>& grid, const BrightStatePair& p) {
  detail::check_grid(grid);
  if (p.e_plus.imag() == 0.0 && p.e_minus.imag() == 0.0)
    throw DomainError("absorption_clean: zero linewidth; use absorption_sticks");
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    f[i] = detail::pole_lineshape(grid[i], p.weight_plus, p.e_plus) +
           detail::pole_lineshape(grid[i], p.weight_minus, p.e_minus);
  return f;
}

inline StickSpectrum absorption_sticks(const BrightStatePair& p) {
  StickSpectrum s;
  s.positions = {p.e_minus.real(), p.e_plus.real()};
  s.weights = {p.weight_minus.real(), p.weight_plus.real()};
  return s;
}

struct RealizationSolution {
  Eigen::VectorXcd eigenvalues;      // N+1
  Eigen::VectorXcd photon_residues;  // N+1
  Eigen::MatrixXcd qubit_residues;   // N x (N+1)
  bool eigenvector_path = false;

  cplx photon_amplitude(double t) const {
    cplx s = 0;
    for (Eigen::Index m = 0; m < eigenvalues.size(); ++m)
      s += photon_residues(m) * std::exp(-kI * eigenvalues(m) * t / kHbar);
    return s;
  }
  Eigen::VectorXcd qubit_amplitudes(double t) const {
    Eigen::VectorXcd phases(eigenvalues.size());
    for (Eigen::Index m = 0; m < eigenvalues.size(); ++m) phases(m) = std::exp(-kI * eigenvalues(m) * t / kHbar);
    return qubit_residues * phases;
  }
  std::vector<double> absorption(const std::vector<double>& grid) const {
    std::vector<double> f(grid.size(), 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i)
      for (Eigen::Index m = 0; m < eigenvalues.size(); ++m)
        f[i] += detail::pole_lineshape(grid[i], photon_residues(m), eigenvalues(m));
    return f;
  }
};

inline constexpr double kDegenerateGap = 1e-10;

// Residues of a single-excitation TC block (index 0 photon, 1..N qubits).
inline RealizationSolution solve_realization(const HamiltonianAction& action) {
  const Eigen::MatrixXcd& h = action.system;
  const Eigen::Index dim = h.rows();
  if (dim < 2 || h.cols() != dim) throw ConfigurationError("solve_realization: expected an (N+1)x(N+1) block");
  const Eigen::Index n = dim - 1;
  for (Eigen::Index i = 1; i < dim; ++i)
    for (Eigen::Index j = 1; j < dim; ++j)
      if (i != j && h(i, j) != cplx(0.0))
        throw ConfigurationError("solve_realization: qubits must only couple through the cavity");

  RealizationSolution sol;
  sol.qubit_residues.resize(n, dim);
  // A uniform anti-Hermitian part (kappa = Gamma) only shifts the spectrum of the Hermitian part.
  const Eigen::MatrixXcd herm = 0.5 * (h + h.adjoint());
  const Eigen::MatrixXcd anti = h - herm;
  const cplx shift = anti(0, 0);
  const bool normal = (anti - shift * Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff() == 0.0;
  if (normal) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
    sol.eigenvalues = es.eigenvalues().cast<cplx>().array() + shift;
  } else {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h, false);
    sol.eigenvalues = es.eigenvalues();
  }
  double min_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < dim; ++a)
    for (Eigen::Index b = a + 1; b < dim; ++b)
      min_gap = std::min(min_gap, std::abs(sol.eigenvalues(a) - sol.eigenvalues(b)));

  if (min_gap < kDegenerateGap) {
    sol.eigenvector_path = true;
    Eigen::MatrixXcd v, vinv;
    if (normal) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
      v = es.eigenvectors();
      vinv = v.adjoint();
    } else {
      Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(h, true);
      sol.eigenvalues = es.eigenvalues();
      v = es.eigenvectors();
      vinv = v.partialPivLu().inverse();
    }
    sol.photon_residues.resize(dim);
    for (Eigen::Index m = 0; m < dim; ++m) {
      sol.photon_residues(m) = v(0, m) * vinv(m, 0);
      for (Eigen::Index q = 0; q < n; ++q) sol.qubit_residues(q, m) = v(q + 1, m) * vinv(m, 0);
    }
    return sol;
  }

  // Product formula evaluated in log space: w_m = prod_n (E_m - w_n) / prod_{m' != m} (E_m - E_m').
  sol.photon_residues.resize(dim);
  for (Eigen::Index m = 0; m < dim; ++m) {
    const cplx e = sol.eigenvalues(m);
    cplx log_den = 0;
    for (Eigen::Index mp = 0; mp < dim; ++mp)
      if (mp != m) log_den += std::log(e - sol.eigenvalues(mp));
    cplx log_num = 0;
    for (Eigen::Index q = 1; q < dim; ++q) log_num += std::log(e - h(q, q));
    sol.photon_residues(m) = std::exp(log_num - log_den);
    for (Eigen::Index q = 1; q < dim; ++q) {
      const cplx g = h(q, 0);
      if (g == cplx(0.0)) {
        sol.qubit_residues(q - 1, m) = 0.0;
        continue;
      }
      sol.qubit_residues(q - 1, m) = g * std::exp(log_num - std::log(e - h(q, q)) - log_den);
    }
  }
  return sol;
}

struct TcEnsembleModel {
  CavitySpec cavity;
  QubitEnsembleSpec qubits;
};

inline std::vector<double> ensemble_population(const DisorderSpec& spec, const TcEnsembleModel& model,
                                               const std::vector<double>& times, unsigned workers = 1) {
  spec.validate();
  auto per_realization = parallel_map(static_cast<std::size_t>(spec.n_realizations), workers, [&](std::size_t j) {
    const auto freqs = sample_disorder(spec, model.qubits.omega0, model.qubits.n_qubits, static_cast<int>(j));
    const auto sol = solve_realization(build_tc(model.cavity, model.qubits, freqs));
    std::vector<double> p(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) p[i] = std::norm(sol.photon_amplitude(times[i]));
    return p;
  });
  std::vector<double> avg(times.size(), 0.0);
  for (const auto& p : per_realization)
    for (std::size_t i = 0; i < times.size(); ++i) avg[i] += p[i];
  for (auto& v : avg) v /= spec.n_realizations;
  return avg;
}

inline std::vector<double> ensemble_absorption(const DisorderSpec& spec, const TcEnsembleModel& model,
                                               const std::vector<double>& grid, unsigned workers = 1) {
  spec.validate();
  detail::check_grid(grid);
  if (model.cavity.kappa == 0.0 && model.qubits.gamma == 0.0)
    throw DomainError("ensemble_absorption: needs kappa > 0 or gamma > 0");
  auto per_realization = parallel_map(static_cast<std::size_t>(spec.n_realizations), workers, [&](std::size_t j) {
    const auto freqs = sample_disorder(spec, model.qubits.omega0, model.qubits.n_qubits, static_cast<int>(j));
    return solve_realization(build_tc(model.cavity, model.qubits, freqs)).absorption(grid);
  });
  std::vector<double> avg(grid.size(), 0.0);
  for (const auto& f : per_realization)
    for (std::size_t i = 0; i < grid.size(); ++i) avg[i] += f[i];
  for (auto& v : avg) v /= spec.n_realizations;
  return avg;
}

}  // namespace polariton
