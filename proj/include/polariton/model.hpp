// model.hpp - parameter records and Hamiltonian constructors
//
// The Tavis-Cummings family lives in the single-excitation manifold with
// basis index 0 = |1_c, 0_qu> and index n = |0_c, 1^n_qu> for n = 1..N.
// Every Hamiltonian is handed to the propagators as a HamiltonianAction:
// a dense system matrix plus a list of linear boson couplings
//
//   H = sum_rc h_rc |r><c| + sum_k w_k b_k^+ b_k
//       + sum_terms (g b_k^+ + gbar b_k) |row><col|.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "polariton/constants.hpp"
#include "polariton/errors.hpp"

namespace polariton {

using cplx = std::complex<double>;
inline constexpr cplx kI{0.0, 1.0};

namespace detail {

inline void throw_if_any(const std::vector<std::string>& issues) {
  if (issues.empty()) return;
  std::ostringstream os;
  for (std::size_t i = 0; i < issues.size(); ++i) os << (i ? "; " : "") << issues[i];
  throw ConfigurationError(os.str());
}

template <class T>
std::string show(const T& v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace detail

struct CavitySpec {
  double omega_c = 1.0;
  double kappa = 0.0;
  int n_max = 1;

  std::vector<std::string> violations(const std::string& at = "cavity") const {
    std::vector<std::string> out;
    if (!(omega_c > 0)) out.push_back(at + ".omega_c must be > 0, got " + detail::show(omega_c));
    if (!(kappa >= 0)) out.push_back(at + ".kappa must be >= 0, got " + detail::show(kappa));
    if (n_max < 1) out.push_back(at + ".n_max must be >= 1, got " + detail::show(n_max));
    return out;
  }
  void validate() const { detail::throw_if_any(violations()); }
};

struct QubitEnsembleSpec {
  int n_qubits = 1;
  double omega0 = 1.0;
  double gamma = 0.0;
  double omega_R = 0.1;  // collective Rabi frequency; per-qubit g = omega_R / sqrt(N)

  double coupling_g() const { return omega_R / std::sqrt(static_cast<double>(n_qubits)); }

  std::vector<std::string> violations(const std::string& at = "qubits") const {
    std::vector<std::string> out;
    if (n_qubits < 1) out.push_back(at + ".n_qubits must be >= 1, got " + detail::show(n_qubits));
    if (!(omega0 > 0)) out.push_back(at + ".omega0 must be > 0, got " + detail::show(omega0));
    if (!(gamma >= 0)) out.push_back(at + ".gamma must be >= 0, got " + detail::show(gamma));
    if (!(omega_R >= 0)) out.push_back(at + ".omega_R must be >= 0, got " + detail::show(omega_R));
    return out;
  }
  void validate() const { detail::throw_if_any(violations()); }
};

struct PhononBathSpec {
  int n_modes = 1;
  double omega_k0 = 0.124;
  double bandwidth = 0.0;  // dimensionless band parameter of the linear dispersion
  double lambda = 0.0;

  // Lattice momenta k = 2 pi l / N for l = l_min .. l_max (N values).
  int l_min() const { return -((n_modes - 1) / 2); }
  int l_max() const { return l_min() + n_modes - 1; }

  std::vector<std::string> violations(const std::string& at = "bath") const {
    std::vector<std::string> out;
    if (n_modes < 1) out.push_back(at + ".n_modes must be >= 1, got " + detail::show(n_modes));
    if (!(omega_k0 > 0)) out.push_back(at + ".omega_k0 must be > 0, got " + detail::show(omega_k0));
    // The k = 0 mode sits at omega_k0 (1 - bandwidth), so bandwidth = 1 gives a zero-frequency mode.
    if (!(bandwidth >= 0 && bandwidth < 1))
      out.push_back(at + ".bandwidth must be in [0, 1), got " + detail::show(bandwidth));
    if (!(lambda >= 0)) out.push_back(at + ".lambda must be >= 0, got " + detail::show(lambda));
    return out;
  }
  void validate() const { detail::throw_if_any(violations()); }
};

struct DisorderSpec {
  double width = 0.0;
  int n_realizations = 1;
  std::uint64_t seed = 0;

  std::vector<std::string> violations(const std::string& at = "disorder") const {
    std::vector<std::string> out;
    if (!(width >= 0)) out.push_back(at + ".width must be >= 0, got " + detail::show(width));
    if (n_realizations < 1)
      out.push_back(at + ".n_realizations must be >= 1, got " + detail::show(n_realizations));
    return out;
  }
  void validate() const { detail::throw_if_any(violations()); }
};

enum class SiteKind { photon, qubit, electronic };

// Term (g b_k^+ + gbar b_k) |row><col|.
struct BosonCoupling {
  std::size_t mode = 0;
  std::size_t row = 0;
  std::size_t col = 0;
  cplx create{0.0, 0.0};
  cplx annihilate{0.0, 0.0};
};

struct HamiltonianAction {
  Eigen::MatrixXcd system;
  std::vector<double> mode_frequencies;
  std::vector<BosonCoupling> couplings;
  std::vector<std::string> labels;
  std::vector<SiteKind> kinds;
  // Constant subtracted from the system diagonal during propagation; observables add it back.
  double reference_energy = 0.0;

  std::size_t n_sys() const { return static_cast<std::size_t>(system.rows()); }
  std::size_t n_modes() const { return mode_frequencies.size(); }

  std::size_t label_index(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == label) return i;
    throw ConfigurationError("unknown basis label '" + label + "'");
  }

  // Dense matrices of the b_k^+ and b_k coefficients of mode k.
  Eigen::MatrixXcd create_matrix(std::size_t k) const {
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(n_sys(), n_sys());
    for (const auto& c : couplings)
      if (c.mode == k) g(c.row, c.col) += c.create;
    return g;
  }
  Eigen::MatrixXcd annihilate_matrix(std::size_t k) const {
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(n_sys(), n_sys());
    for (const auto& c : couplings)
      if (c.mode == k) g(c.row, c.col) += c.annihilate;
    return g;
  }

  bool is_hermitian(double tol = 0.0) const {
    if ((system - system.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    for (std::size_t k = 0; k < n_modes(); ++k)
      if ((create_matrix(k) - annihilate_matrix(k).adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    return true;
  }

  void check_consistency() const {
    if (system.rows() != system.cols()) throw ConfigurationError("system matrix must be square");
    if (labels.size() != n_sys() || kinds.size() != n_sys())
      throw ConfigurationError("labels/kinds must match the system dimension");
    for (const auto& c : couplings)
      if (c.mode >= n_modes() || c.row >= n_sys() || c.col >= n_sys())
        throw ConfigurationError("coupling term indexes outside the action");
  }
};

inline double phonon_momentum(const PhononBathSpec& bath, int l) {
  if (l < bath.l_min() || l > bath.l_max())
    throw DomainError("phonon index l=" + std::to_string(l) + " outside [" + std::to_string(bath.l_min()) +
                      ", " + std::to_string(bath.l_max()) + "]");
  return 2.0 * kPi * l / bath.n_modes;
}

inline double phonon_dispersion(const PhononBathSpec& bath, int l) {
  const double k = phonon_momentum(bath, l);
  return bath.omega_k0 * (1.0 + bath.bandwidth * (2.0 * std::abs(k) / kPi - 1.0));
}

// Frequencies ordered by l = l_min .. l_max.
inline std::vector<double> phonon_frequencies(const PhononBathSpec& bath) {
  bath.validate();
  std::vector<double> w;
  for (int l = bath.l_min(); l <= bath.l_max(); ++l) w.push_back(phonon_dispersion(bath, l));
  return w;
}

inline HamiltonianAction apply_loss(HamiltonianAction action, double kappa, double gamma) {
  if (!(kappa >= 0) || !(gamma >= 0)) throw DomainError("loss rates must be non-negative");
  for (std::size_t i = 0; i < action.n_sys(); ++i) {
    if (action.kinds[i] == SiteKind::photon) action.system(i, i) -= kI * kappa;
    if (action.kinds[i] == SiteKind::qubit) action.system(i, i) -= kI * gamma;
  }
  return action;
}

inline HamiltonianAction build_tc(const CavitySpec& cavity, const QubitEnsembleSpec& qubits,
                                  const std::vector<double>& frequencies) {
  cavity.validate();
  qubits.validate();
  const auto n = static_cast<std::size_t>(qubits.n_qubits);
  if (frequencies.size() != n)
    throw ConfigurationError("frequencies: expected " + std::to_string(n) + " qubit energies, got " +
                             std::to_string(frequencies.size()));
  HamiltonianAction a;
  a.system = Eigen::MatrixXcd::Zero(n + 1, n + 1);
  a.system(0, 0) = cavity.omega_c;
  const double g = qubits.coupling_g();
  a.labels.push_back("1c");
  a.kinds.push_back(SiteKind::photon);
  for (std::size_t i = 1; i <= n; ++i) {
    a.system(i, i) = frequencies[i - 1];
    a.system(0, i) = g;
    a.system(i, 0) = g;
    a.labels.push_back("q" + std::to_string(i));
    a.kinds.push_back(SiteKind::qubit);
  }
  return apply_loss(std::move(a), cavity.kappa, qubits.gamma);
}

inline HamiltonianAction build_htc(const CavitySpec& cavity, const QubitEnsembleSpec& qubits,
                                   const PhononBathSpec& bath, const std::vector<double>& frequencies) {
  bath.validate();
  if (bath.n_modes != qubits.n_qubits)
    throw ConfigurationError("bath.n_modes (" + std::to_string(bath.n_modes) +
                             ") must equal qubits.n_qubits (" + std::to_string(qubits.n_qubits) + ")");
  HamiltonianAction a = build_tc(cavity, qubits, frequencies);
  a.mode_frequencies = phonon_frequencies(bath);
  if (bath.lambda == 0.0) return a;
  const double pre = bath.lambda / std::sqrt(static_cast<double>(qubits.n_qubits));
  for (int l = bath.l_min(); l <= bath.l_max(); ++l) {
    const auto k_index = static_cast<std::size_t>(l - bath.l_min());
    const double k = phonon_momentum(bath, l);
    const double w = a.mode_frequencies[k_index];
    for (std::size_t n = 1; n <= static_cast<std::size_t>(qubits.n_qubits); ++n) {
      const cplx phase = std::polar(1.0, -k * static_cast<double>(n));
      a.couplings.push_back({k_index, n, n, -pre * w * phase, -pre * w * std::conj(phase)});
    }
  }
  return a;
}

struct DickeOptions {
  bool counter_rotating = false;
  int max_photons = 1;
};

// Full Fock-space Dicke/Tavis-Cummings Hamiltonian over photon 0..max_photons times all 2^N
// qubit configurations. Only meant for small N.
inline HamiltonianAction build_dicke(const CavitySpec& cavity, const QubitEnsembleSpec& qubits,
                                     const std::vector<double>& frequencies, const DickeOptions& opt = {}) {
  cavity.validate();
  qubits.validate();
  const int n = qubits.n_qubits;
  if (n > 12) throw UnsupportedError("build_dicke: at most 12 qubits");
  if (frequencies.size() != static_cast<std::size_t>(n))
    throw ConfigurationError("frequencies: length must equal n_qubits");
  if (opt.max_photons < 1) throw ConfigurationError("max_photons must be >= 1");
  const std::size_t nq = std::size_t{1} << n;
  const std::size_t np = static_cast<std::size_t>(opt.max_photons) + 1;
  const std::size_t dim = nq * np;
  auto idx = [nq](std::size_t photons, std::size_t config) { return photons * nq + config; };
  HamiltonianAction a;
  a.system = Eigen::MatrixXcd::Zero(dim, dim);
  const double g = qubits.coupling_g();
  for (std::size_t p = 0; p < np; ++p) {
    for (std::size_t c = 0; c < nq; ++c) {
      std::string label = std::to_string(p) + "c|";
      double e = cavity.omega_c * static_cast<double>(p);
      for (int q = 0; q < n; ++q) {
        const bool up = (c >> q) & 1U;
        label += up ? '1' : '0';
        if (up) e += frequencies[q];
      }
      a.system(idx(p, c), idx(p, c)) = e;
      a.labels.push_back(label);
      a.kinds.push_back(SiteKind::electronic);
      for (int q = 0; q < n; ++q) {
        const std::size_t flipped = c ^ (std::size_t{1} << q);
        const bool up = (c >> q) & 1U;
        // a sigma^+ : photon lost, qubit raised; a^+ sigma^+ only with counter-rotating terms.
        if (!up && p >= 1) a.system(idx(p - 1, flipped), idx(p, c)) += g * std::sqrt(static_cast<double>(p));
        if (!up && p + 1 < np && opt.counter_rotating)
          a.system(idx(p + 1, flipped), idx(p, c)) += g * std::sqrt(static_cast<double>(p + 1));
        if (up && p + 1 < np) a.system(idx(p + 1, flipped), idx(p, c)) += g * std::sqrt(static_cast<double>(p + 1));
        if (up && p >= 1 && opt.counter_rotating)
          a.system(idx(p - 1, flipped), idx(p, c)) += g * std::sqrt(static_cast<double>(p));
      }
    }
  }
  return a;
}

}  // namespace polariton
