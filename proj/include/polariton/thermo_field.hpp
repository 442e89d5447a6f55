// thermo_field.hpp - finite temperature through thermo-field doubling
//
// Each phonon mode b_k gains a tilde partner with frequency -w_k. After the
// Bogoliubov rotation with angle theta_k = arctanh(exp(-beta w_k / 2)) the thermal
// vacuum becomes the plain vacuum, and a coupling c b^+ + c* b turns into
//   cosh(theta) (c b^+ + c* b) + sinh(theta) (c* b~^+ + c b~).
// Tilde modes with theta below the pruning threshold are dropped.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "polariton/constants.hpp"
#include "polariton/errors.hpp"
#include "polariton/mdav2/propagate.hpp"
#include "polariton/mdav2/state.hpp"
#include "polariton/model.hpp"

namespace polariton {

inline constexpr double kDefaultPruneThreshold = 1e-3;

inline double beta_from_temperature(double temperature_K) {
  if (!(temperature_K > 0)) throw DomainError("temperature_K must be > 0, got " + detail::show(temperature_K));
  return 1.0 / (kBoltzmann * temperature_K);
}

inline std::vector<double> mixing_angles(double beta, const std::vector<double>& omegas) {
  if (!(beta > 0)) throw DomainError("beta must be > 0");
  std::vector<double> theta;
  theta.reserve(omegas.size());
  for (double w : omegas) {
    if (!(w > 0)) throw DomainError("mode frequencies must be > 0 for thermal mixing, got " + detail::show(w));
    const double x = 0.5 * beta * w;
    if (x < 1e-6) throw DomainError("classical-limit: beta * omega / 2 = " + detail::show(x) + " below 1e-6");
    theta.push_back(std::atanh(std::exp(-x)));
  }
  return theta;
}

// Sum over modes of lambda (cosh theta_k + sinh theta_k).
inline double dressed_coupling(double lambda, const std::vector<double>& theta) {
  double s = 0;
  for (double t : theta) s += lambda * (std::cosh(t) + std::sinh(t));
  return s;
}

inline double polaron_decoupling_ratio(int n_qubits, double omega_R, double lambda, double omega_k) {
  return 2.0 * n_qubits * omega_R / (lambda * lambda * omega_k);
}

struct ThermalAction {
  HamiltonianAction action;          // physical modes first, then kept tilde modes
  std::size_t n_physical = 0;
  std::vector<std::size_t> tilde_of;  // physical partner of each tilde mode
  std::vector<double> theta;          // per physical mode
};

// Doubled-space action. Tilde modes with theta < prune_threshold are omitted.
inline ThermalAction transform_hamiltonian(const HamiltonianAction& h, const std::vector<double>& theta,
                                           double prune_threshold = 0.0) {
  h.check_consistency();
  if (theta.size() != h.n_modes())
    throw ConfigurationError("theta has " + std::to_string(theta.size()) + " entries for " +
                             std::to_string(h.n_modes()) + " modes");
  ThermalAction t;
  t.n_physical = h.n_modes();
  t.theta = theta;
  t.action = h;
  t.action.couplings.clear();
  std::vector<long> slot(theta.size(), -1);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (!(theta[k] >= 0)) throw DomainError("mixing angles must be >= 0");
    if (theta[k] < prune_threshold && prune_threshold > 0) continue;
    slot[k] = static_cast<long>(t.n_physical + t.tilde_of.size());
    t.tilde_of.push_back(k);
    t.action.mode_frequencies.push_back(-h.mode_frequencies[k]);
  }
  for (const auto& c : h.couplings) {
    const double ch = std::cosh(theta[c.mode]);
    const double sh = std::sinh(theta[c.mode]);
    t.action.couplings.push_back({c.mode, c.row, c.col, ch * c.create, ch * c.annihilate});
    if (slot[c.mode] >= 0)
      t.action.couplings.push_back(
          {static_cast<std::size_t>(slot[c.mode]), c.row, c.col, sh * c.annihilate, sh * c.create});
  }
  return t;
}

// Thermal vacuum with the system in `label`. Physical modes carry the usual cloning
// noise (identical draws to init_state); tilde displacements start at exactly zero.
inline MultiD2State thermal_init_state(const ThermalAction& t, std::size_t label, std::size_t M,
                                       std::uint64_t seed, double noise_scale = kDefaultNoiseScale) {
  MultiD2State s = init_state(t.action.n_sys(), t.n_physical, label, M, seed, noise_scale);
  const auto n_tilde = static_cast<Eigen::Index>(t.tilde_of.size());
  if (n_tilde == 0) return s;
  Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(s.f.rows(), s.f.cols() + n_tilde);
  f.leftCols(s.f.cols()) = s.f;
  s.f = f;
  return s;
}

// Physical <b_k^+ b_k> from a doubled-space state.
inline double thermal_mode_occupation(const ThermalAction& t, const MultiD2State& s, std::size_t k) {
  const double ch = std::cosh(t.theta.at(k));
  const double sh = std::sinh(t.theta.at(k));
  const double n_phys = mode_occupation(s, k);
  long tk = -1;
  for (std::size_t j = 0; j < t.tilde_of.size(); ++j)
    if (t.tilde_of[j] == k) tk = static_cast<long>(t.n_physical + j);
  if (tk < 0) return ch * ch * n_phys + sh * sh * norm_squared(s);
  const auto kk = static_cast<Eigen::Index>(k);
  const auto kt = static_cast<Eigen::Index>(tk);
  const Eigen::MatrixXcd rho = s.A.conjugate() * s.A.transpose();
  const Eigen::MatrixXcd dw = debye_waller(s);
  cplx pair = 0;
  for (Eigen::Index a = 0; a < rho.rows(); ++a)
    for (Eigen::Index b = 0; b < rho.cols(); ++b)
      pair += rho(a, b) * dw(a, b) * std::conj(s.f(a, kk)) * std::conj(s.f(a, kt));
  const double n_tilde_dag = mode_occupation(s, static_cast<std::size_t>(tk)) + norm_squared(s);
  return ch * ch * n_phys + sh * sh * n_tilde_dag + 2.0 * ch * sh * pair.real();
}

struct ThermalRun {
  ThermalAction thermal;
  Trajectory trajectory;
};

struct ThermalOptions {
  double temperature_K = 0.0;  // 0 disables the tilde space
  double prune_threshold = kDefaultPruneThreshold;
};

inline ThermalRun thermal_propagate(const HamiltonianAction& h, const ThermalOptions& topt, std::size_t label,
                                    std::size_t M, std::uint64_t seed, const PropagationOptions& popt,
                                    double noise_scale = kDefaultNoiseScale) {
  if (topt.temperature_K < 0) throw DomainError("temperature_K must be >= 0");
  ThermalRun r;
  std::vector<double> theta(h.n_modes(), 0.0);
  if (topt.temperature_K > 0) theta = mixing_angles(beta_from_temperature(topt.temperature_K), h.mode_frequencies);
  r.thermal = transform_hamiltonian(h, theta, topt.temperature_K > 0 ? topt.prune_threshold : 1.0);
  r.trajectory = propagate(thermal_init_state(r.thermal, label, M, seed, noise_scale), r.thermal.action, popt);
  return r;
}

}  // namespace polariton
