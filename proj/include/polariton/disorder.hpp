// disorder.hpp - counter-based static disorder draws
//
// Each draw is a pure function of (seed, realization, qubit), so ensembles can be
// generated in any order or in parallel with identical results.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "polariton/errors.hpp"
#include "polariton/model.hpp"

namespace polariton {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform double in [0, 1) keyed by three counters.
inline double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ splitmix64(a + 0x632BE59BD9B4E019ULL));
  h = splitmix64(h ^ splitmix64(b + 0x85157AF5ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline std::vector<double> sample_disorder(const DisorderSpec& spec, double omega0, int n_qubits, int index) {
  spec.validate();
  if (index < 0 || index >= spec.n_realizations)
    throw DomainError("realization index " + std::to_string(index) + " outside [0, " +
                      std::to_string(spec.n_realizations) + ")");
  std::vector<double> w(static_cast<std::size_t>(n_qubits), omega0);
  if (spec.width == 0.0) return w;
  for (int q = 0; q < n_qubits; ++q) {
    const double u = counter_uniform(spec.seed, static_cast<std::uint64_t>(index), static_cast<std::uint64_t>(q));
    w[static_cast<std::size_t>(q)] = omega0 + spec.width * (u - 0.5);
  }
  return w;
}

}  // namespace polariton
