// constants.hpp - physical constants and unit conventions
//
// Energies are in eV, times in fs, temperatures in K. Time evolution is
// exp(-i H t / hbar).
#pragma once

namespace polariton {

inline constexpr double kHbar = 0.6582119569;         // eV fs
inline constexpr double kBoltzmann = 8.617333262e-5;  // eV / K
inline constexpr double kPi = 3.14159265358979323846;

struct PhysicalConstants {
  static constexpr double hbar = kHbar;
  static constexpr double k_B = kBoltzmann;
};

}  // namespace polariton
