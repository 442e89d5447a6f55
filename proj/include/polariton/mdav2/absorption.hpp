// mdav2/absorption.hpp - linear absorption from the autocorrelation function
//
//   C(t) = <psi(0)|psi(t)>,  F(w) = (1 / (pi hbar)) Re int_0^T C(t) exp[(i w - g') t / hbar] dt,
//
// normalized so that a single undamped level gives a unit-area Lorentzian of HWHM g'.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "polariton/constants.hpp"
#include "polariton/errors.hpp"
#include "polariton/mdav2/propagate.hpp"
#include "polariton/mdav2/state.hpp"

namespace polariton {

struct AbsorptionResult {
  std::vector<double> omega;
  std::vector<double> intensity;
  std::vector<std::string> warnings;
};

// Autocorrelation in the laboratory frame (reference-energy phase restored).
inline std::vector<cplx> autocorrelation(const Trajectory& tr) {
  if (tr.states.empty()) throw ConfigurationError("autocorrelation: trajectory holds no states");
  std::vector<cplx> c(tr.states.size());
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = overlap(tr.states.front(), tr.states[i]) * std::exp(-kI * tr.reference_energy * tr.times[i] / kHbar);
  return c;
}

inline AbsorptionResult spectrum_from_autocorrelation(const std::vector<double>& times, const std::vector<cplx>& c,
                                                      double gamma_prime, const std::vector<double>& grid) {
  if (!(gamma_prime > 0)) throw DomainError("gamma_prime must be > 0");
  if (times.size() != c.size() || times.size() < 2) throw ConfigurationError("autocorrelation needs >= 2 samples");
  AbsorptionResult r;
  r.omega = grid;
  r.intensity.assign(grid.size(), 0.0);
  const double t_max = times.back() - times.front();
  if (t_max * gamma_prime / kHbar < 5.0)
    r.warnings.push_back("t_max * gamma' / hbar = " + std::to_string(t_max * gamma_prime / kHbar) +
                         " < 5: truncation ringing expected");
  for (std::size_t w = 0; w < grid.size(); ++w) {
    cplx sum = 0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
      const double dt = times[i + 1] - times[i];
      const cplx a = c[i] * std::exp((kI * grid[w] - gamma_prime) * times[i] / kHbar);
      const cplx b = c[i + 1] * std::exp((kI * grid[w] - gamma_prime) * times[i + 1] / kHbar);
      sum += 0.5 * dt * (a + b);
    }
    r.intensity[w] = sum.real() / (kPi * kHbar);
  }
  return r;
}

inline AbsorptionResult absorption_from_autocorrelation(const Trajectory& tr, double gamma_prime,
                                                        const std::vector<double>& grid) {
  return spectrum_from_autocorrelation(tr.times, autocorrelation(tr), gamma_prime, grid);
}

}  // namespace polariton
