// spectro.hpp - third-order response functions and 2D electronic spectra (impulsive limit)
//
// With phi(s) = U(s) mu+ |G>, the lowered wave G(s) = mu- phi(s) and the raised wave
// D(s) = mu+ phi(s), the response functions on a (tau, T_w, t) grid are
//   R1  = <U(t) G(T)     | G(tau+T+t)>     R2  = <U(t) G(tau+T) | G(T+t)>
//   R3  = <U(T+t) G(tau) | G(t)>           R4  = <G(-t) | U(T) G(tau)>
//   R1* = <D(tau+T+t) | U(t) D(T)>         R2* = <D(T+t) | U(t) D(tau+T)>
// and the spectra are one-sided double transforms with exp(-g' (tau + t) / hbar):
//   SE  = R2 (-, +) + R1 (+, +),  GSB = R3 (-, +) + R4 (+, +),  ESA = -[R1* (-, +) + R2* (+, +)]
// where (a, b) are the signs of w_tau tau and w_t t in the exponent.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polariton/constants.hpp"
#include "polariton/errors.hpp"
#include "polariton/fock.hpp"
#include "polariton/mdav2/absorption.hpp"
#include "polariton/mdav2/propagate.hpp"
#include "polariton/mdav2/state.hpp"
#include "polariton/model.hpp"
#include "polariton/parallel.hpp"
#include "polariton/sf_polariton.hpp"

namespace polariton {

enum class SpectrumComponent { SE, GSB, ESA, TOTAL };

inline const char* component_name(SpectrumComponent c) {
  switch (c) {
    case SpectrumComponent::SE: return "SE";
    case SpectrumComponent::GSB: return "GSB";
    case SpectrumComponent::ESA: return "ESA";
    case SpectrumComponent::TOTAL: return "TOTAL";
  }
  return "?";
}

using Vec3 = std::array<double, 3>;

struct DipoleSet {
  double mu = 1.0;                    // scale of every transition dipole
  Vec3 direction{0.0, 0.0, 1.0};      // common dipole orientation
  std::array<Vec3, 4> polarization{{{0, 0, 1}, {0, 0, 1}, {0, 0, 1}, {0, 0, 1}}};

  std::vector<std::string> violations(const std::string& at = "dipoles") const {
    std::vector<std::string> out;
    auto unit = [](const Vec3& v) { return std::abs(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - 1.0) < 1e-12; };
    if (!std::isfinite(mu)) out.push_back(at + ".mu must be finite");
    if (!unit(direction)) out.push_back(at + ".direction must be a unit vector");
    for (std::size_t a = 0; a < 4; ++a)
      if (!unit(polarization[a])) out.push_back(at + ".polarization[" + std::to_string(a) + "] must be a unit vector");
    return out;
  }
  void validate() const { detail::throw_if_any(violations()); }

  // mu^4 times the product of the four projections e_a . mu_hat.
  double weight() const {
    double w = mu * mu * mu * mu;
    for (const auto& e : polarization) w *= e[0] * direction[0] + e[1] * direction[1] + e[2] * direction[2];
    return w;
  }
};

struct ResponseGrid {
  double dt = 2.0;            // fs, shared by tau and t
  std::size_t n_tau = 64;
  std::size_t n_t = 64;
  std::vector<double> t_w{0.0, 16.0, 32.0, 48.0};
  double gamma = 0.01;        // eV

  std::vector<std::string> violations(const std::string& at = "grid") const {
    std::vector<std::string> out;
    if (!(dt > 0)) out.push_back(at + ".dt must be > 0, got " + detail::show(dt));
    if (n_tau < 2 || n_t < 2) out.push_back(at + ": n_tau and n_t must be >= 2");
    if (!(gamma > 0)) out.push_back(at + ".gamma must be > 0, got " + detail::show(gamma));
    if (t_w.empty()) out.push_back(at + ".t_w must not be empty");
    for (double T : t_w)
      if (!(T >= 0) || (dt > 0 && std::abs(T / dt - std::round(T / dt)) > 1e-9))
        out.push_back(at + ".t_w value " + detail::show(T) + " is not a nonnegative multiple of dt");
    return out;
  }
  void validate() const { detail::throw_if_any(violations()); }

  std::size_t step_index(double T) const { return static_cast<std::size_t>(std::llround(T / dt)); }
  std::size_t max_t_w_index() const {
    std::size_t k = 0;
    for (double T : t_w) k = std::max(k, step_index(T));
    return k;
  }
};

// Per T_w value, n_tau x n_t arrays.
struct ResponseSet {
  ResponseGrid grid;
  std::vector<Eigen::MatrixXcd> R1, R2, R3, R4, R1s, R2s;
  bool has_esa = false;
};

struct ResponseOptions {
  bool include_esa = true;
  unsigned workers = 1;
  std::size_t max_second_leg = 64 * 4;  // cap on excited-manifold propagations
};

// ---- backends ------------------------------------------------------------

// Exact propagation in a truncated Fock space (Chebyshev). `raising` acts on the labels.
class FockBackend {
 public:
  using Wave = Eigen::VectorXcd;

  FockBackend(const HamiltonianAction& h, const std::vector<int>& cutoffs, const Eigen::MatrixXd& raising,
              std::size_t ground_label, ChebyshevOptions opt = {})
      : model_(build_sparse_fock(h, cutoffs)), opt_(opt), ground_label_(ground_label) {
    if (raising.rows() != static_cast<Eigen::Index>(h.n_sys()) || raising.cols() != raising.rows())
      throw ConfigurationError("FockBackend: raising operator must match the system dimension");
    if (ground_label >= h.n_sys()) throw ConfigurationError("FockBackend: ground label outside the basis");
    std::vector<Eigen::Triplet<double>> t;
    const auto B = static_cast<Eigen::Index>(model_.block);
    for (Eigen::Index r = 0; r < raising.rows(); ++r)
      for (Eigen::Index c = 0; c < raising.cols(); ++c)
        if (raising(r, c) != 0.0)
          for (Eigen::Index v = 0; v < B; ++v) t.emplace_back(r * B + v, c * B + v, raising(r, c));
    const auto n = static_cast<Eigen::Index>(model_.dim());
    up_.resize(n, n);
    up_.setFromTriplets(t.begin(), t.end());
    down_ = up_.transpose();
  }

  Wave ground() const {
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(model_.n_sys));
    a(static_cast<Eigen::Index>(ground_label_)) = 1.0;
    return fock_product_state(model_, a);
  }
  Wave raise(const Wave& w) const { return up_ * w; }
  Wave lower(const Wave& w) const { return down_ * w; }
  cplx overlap(const Wave& a, const Wave& b) const { return a.dot(b); }
  void propagate(const Wave& w, double dt, std::size_t n, const std::function<void(std::size_t, const Wave&)>& observe) const {
    if (w.squaredNorm() == 0.0) {
      for (std::size_t i = 0; i <= n; ++i) observe(i, w);
      return;
    }
    chebyshev_propagate(model_, w, dt, n, observe, opt_);
  }
  const SparseFockModel& model() const { return model_; }

 private:
  SparseFockModel model_;
  ChebyshevOptions opt_;
  std::size_t ground_label_;
  Eigen::SparseMatrix<double, Eigen::RowMajor> up_, down_;
};

// Multi-D2 propagation of every wave over the full label set.
class Mdav2Backend {
 public:
  using Wave = MultiD2State;

  Mdav2Backend(HamiltonianAction h, const Eigen::MatrixXd& raising, std::size_t ground_label, std::size_t multiplicity,
               std::uint64_t seed, double noise_scale = kDefaultNoiseScale, PropagationOptions opt = {})
      : h_(std::move(h)), raising_(raising), ground_label_(ground_label), M_(multiplicity), seed_(seed),
        noise_(noise_scale), opt_(opt) {
    h_.check_consistency();
    if (raising.rows() != static_cast<Eigen::Index>(h_.n_sys()) || raising.cols() != raising.rows())
      throw ConfigurationError("Mdav2Backend: raising operator must match the system dimension");
    if (ground_label >= h_.n_sys()) throw ConfigurationError("Mdav2Backend: ground label outside the basis");
    opt_.keep_states = true;
  }

  Wave ground() const {
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(h_.n_sys()));
    a(static_cast<Eigen::Index>(ground_label_)) = 1.0;
    return init_state(a, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(h_.n_modes())), M_, seed_, noise_);
  }
  Wave raise(Wave w) const {
    w.A = (w.A * raising_.transpose().cast<cplx>()).eval();
    return w;
  }
  Wave lower(Wave w) const {
    w.A = (w.A * raising_.cast<cplx>()).eval();
    return w;
  }
  cplx overlap(const Wave& a, const Wave& b) const { return polariton::overlap(a, b); }
  void propagate(const Wave& w, double dt, std::size_t n, const std::function<void(std::size_t, const Wave&)>& observe) const {
    if (w.A.cwiseAbs().maxCoeff() == 0.0) {
      for (std::size_t i = 0; i <= n; ++i) observe(i, w);
      return;
    }
    PropagationOptions p = opt_;
    p.t_max = std::abs(dt) * static_cast<double>(n);
    p.sample_dt = std::abs(dt);
    p.eom.direction = dt > 0 ? 1.0 : -1.0;
    const Trajectory tr = polariton::propagate(w, h_, p);
    if (tr.size() != n + 1) throw NumericalHealthError("Mdav2Backend: trajectory is missing samples");
    for (std::size_t i = 0; i <= n; ++i) {
      // Restore the laboratory-frame phase removed by the reference energy.
      Wave s = tr.states[i];
      s.A *= std::exp(-kI * h_.reference_energy * tr.times[i] / kHbar);
      observe(i, s);
    }
  }

 private:
  HamiltonianAction h_;
  Eigen::MatrixXd raising_;
  std::size_t ground_label_;
  std::size_t M_;
  std::uint64_t seed_;
  double noise_;
  PropagationOptions opt_;
};

// ---- response functions -------------------------------------------------

template <class Backend>
ResponseSet compute_responses(const Backend& b, const ResponseGrid& grid, const DipoleSet& dipoles,
                              const ResponseOptions& opt = {}) {
  using Wave = typename Backend::Wave;
  grid.validate();
  dipoles.validate();
  const double dt = grid.dt;
  const std::size_t n = grid.n_tau, m = grid.n_t, KT = grid.max_t_w_index();
  const std::size_t nT = grid.t_w.size();
  std::vector<std::size_t> kt;
  for (double T : grid.t_w) kt.push_back(grid.step_index(T));
  const double w = dipoles.weight();

  // First leg forward and backward.
  const std::size_t s_max = (n - 1) + KT + (m - 1);
  const Wave start = b.raise(b.ground());
  std::vector<Wave> G, D, Gneg;
  G.reserve(s_max + 1);
  b.propagate(start, dt, s_max, [&](std::size_t, const Wave& phi) {
    G.push_back(b.lower(phi));
    if (opt.include_esa) D.push_back(b.raise(phi));
  });
  b.propagate(start, -dt, m - 1, [&](std::size_t, const Wave& phi) { Gneg.push_back(b.lower(phi)); });

  ResponseSet r;
  r.grid = grid;
  r.has_esa = opt.include_esa;
  auto zeros = [&] { return std::vector<Eigen::MatrixXcd>(nT, Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m))); };
  r.R1 = zeros();
  r.R2 = zeros();
  r.R3 = zeros();
  r.R4 = zeros();
  if (opt.include_esa) {
    r.R1s = zeros();
    r.R2s = zeros();
  }
  auto at = [](Eigen::MatrixXcd& a, std::size_t i, std::size_t j) -> cplx& {
    return a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };

  // Ground-manifold family U(u) G(s); each s writes disjoint entries.
  const std::size_t n_s = n + KT;
  parallel_map(n_s, opt.workers, [&](std::size_t s) {
    const std::size_t u_max = s < n ? KT + m - 1 : m - 1;
    b.propagate(G[s], dt, u_max, [&](std::size_t u, const Wave& psi) {
      for (std::size_t iT = 0; iT < nT; ++iT) {
        const std::size_t k = kt[iT];
        if (u < m && s == k)
          for (std::size_t tau = 0; tau < n; ++tau) at(r.R1[iT], tau, u) = w * b.overlap(psi, G[tau + k + u]);
        if (u < m && s >= k && s - k < n) at(r.R2[iT], s - k, u) = w * b.overlap(psi, G[k + u]);
        if (s < n) {
          if (u >= k && u - k < m) at(r.R3[iT], s, u - k) = w * b.overlap(psi, G[u - k]);
          if (u == k)
            for (std::size_t t = 0; t < m; ++t) at(r.R4[iT], s, t) = w * b.overlap(Gneg[t], psi);
        }
      }
    });
    return 0;
  });

  if (opt.include_esa) {
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s < n_s; ++s) {
      bool need = false;
      for (std::size_t k : kt) need = need || s == k || (s >= k && s - k < n);
      if (need) starts.push_back(s);
    }
    if (starts.size() > opt.max_second_leg)
      throw ConfigurationError("compute_responses: " + std::to_string(starts.size()) +
                               " excited-manifold propagations exceed max_second_leg = " + std::to_string(opt.max_second_leg));
    parallel_map(starts.size(), opt.workers, [&](std::size_t j) {
      const std::size_t s = starts[j];
      b.propagate(D[s], dt, m - 1, [&](std::size_t u, const Wave& psi) {
        for (std::size_t iT = 0; iT < nT; ++iT) {
          const std::size_t k = kt[iT];
          if (s == k)
            for (std::size_t tau = 0; tau < n; ++tau) at(r.R1s[iT], tau, u) = w * b.overlap(D[tau + k + u], psi);
          if (s >= k && s - k < n) at(r.R2s[iT], s - k, u) = w * b.overlap(D[k + u], psi);
        }
      });
      return 0;
    });
  }
  return r;
}

// ---- spectra -------------------------------------------------------------

struct FrequencyAxis {
  double lo = 2.0;
  double hi = 2.6;
  double step = 0.005;

  std::vector<double> values() const {
    if (!(step > 0) || !(hi >= lo)) throw ConfigurationError("frequency axis needs step > 0 and hi >= lo");
    std::vector<double> v;
    const auto k = static_cast<std::size_t>(std::llround((hi - lo) / step));
    for (std::size_t i = 0; i <= k; ++i) v.push_back(lo + static_cast<double>(i) * step);
    return v;
  }
};

struct Spectrum2D {
  SpectrumComponent component = SpectrumComponent::TOTAL;
  double t_w = 0.0;
  std::vector<double> omega_tau, omega_t;
  Eigen::MatrixXcd map;  // omega_tau x omega_t; the signal is the real part
};

struct SpectraAtTw {
  double t_w = 0.0;
  Spectrum2D se, gsb, esa, total;
};

namespace detail {

// Rows: w_k exp(sign i w tau / hbar - g' tau / hbar) with trapezoid weights.
inline Eigen::MatrixXcd transform_matrix(const std::vector<double>& omega, std::size_t n, double dt, double gamma,
                                         double sign) {
  Eigen::MatrixXcd e(static_cast<Eigen::Index>(omega.size()), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < omega.size(); ++a)
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) * dt;
      const double wt = (i == 0 || i + 1 == n) ? 0.5 * dt : dt;
      e(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i)) =
          wt * std::exp(cplx(-gamma * t / kHbar, sign * omega[a] * t / kHbar));
    }
  return e;
}

inline void check_nyquist(const FrequencyAxis& ax, double dt, const char* which) {
  const double span = 2.0 * kPi * kHbar / dt;
  if (ax.hi - ax.lo > span)
    throw ConfigurationError(std::string("spectra: ") + which + " window " + show(ax.hi - ax.lo) +
                             " eV exceeds the alias-free span 2 pi hbar / dt = " + show(span) + " eV");
}

}  // namespace detail

inline std::vector<SpectraAtTw> spectra(const ResponseSet& r, const FrequencyAxis& w_tau, const FrequencyAxis& w_t) {
  r.grid.validate();
  detail::check_nyquist(w_tau, r.grid.dt, "omega_tau");
  detail::check_nyquist(w_t, r.grid.dt, "omega_t");
  const auto wt = w_tau.values(), ww = w_t.values();
  const auto em = detail::transform_matrix(wt, r.grid.n_tau, r.grid.dt, r.grid.gamma, -1.0);
  const auto ep = detail::transform_matrix(wt, r.grid.n_tau, r.grid.dt, r.grid.gamma, +1.0);
  const Eigen::MatrixXcd et = detail::transform_matrix(ww, r.grid.n_t, r.grid.dt, r.grid.gamma, +1.0).transpose();
  std::vector<SpectraAtTw> out;
  for (std::size_t i = 0; i < r.grid.t_w.size(); ++i) {
    SpectraAtTw s;
    s.t_w = r.grid.t_w[i];
    auto make = [&](SpectrumComponent c, Eigen::MatrixXcd map) {
      Spectrum2D x;
      x.component = c;
      x.t_w = s.t_w;
      x.omega_tau = wt;
      x.omega_t = ww;
      x.map = std::move(map);
      return x;
    };
    s.se = make(SpectrumComponent::SE, em * r.R2[i] * et + ep * r.R1[i] * et);
    s.gsb = make(SpectrumComponent::GSB, em * r.R3[i] * et + ep * r.R4[i] * et);
    if (r.has_esa)
      s.esa = make(SpectrumComponent::ESA, -(em * r.R1s[i] * et + ep * r.R2s[i] * et));
    else
      s.esa = make(SpectrumComponent::ESA, Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(wt.size()), static_cast<Eigen::Index>(ww.size())));
    s.total = make(SpectrumComponent::TOTAL, s.se.map + s.gsb.map + s.esa.map);
    out.push_back(std::move(s));
  }
  return out;
}

// Linear absorption from <phi(0)|phi(t)>, phi(0) = mu+ |G>, normalized as the engine's absorption.
template <class Backend>
AbsorptionResult linear_absorption(const Backend& b, double dt, std::size_t n, double gamma,
                                   const std::vector<double>& grid) {
  using Wave = typename Backend::Wave;
  const Wave start = b.raise(b.ground());
  std::vector<double> times;
  std::vector<cplx> c;
  b.propagate(start, dt, n, [&](std::size_t i, const Wave& phi) {
    times.push_back(static_cast<double>(i) * dt);
    c.push_back(b.overlap(start, phi));
  });
  return spectrum_from_autocorrelation(times, c, gamma, grid);
}

// ---- rubrene-dimer cavity model for spectroscopy ----------------------------

struct SfSpectroModel {
  SfModel model;
  Eigen::MatrixXd raising;  // external dipole: sum over dimers of X_j^+, photon number unchanged
  std::size_t ground_label = 0;
};

// Five-state, rotating-wave, Fock photon, manifolds 0..2.
inline SfSpectroModel sf_spectro_model(const std::vector<SFDimerSpec>& dimers, double omega_c, double Omega) {
  SFCavityCoupling c;
  c.Omega = Omega;
  c.rwa = true;
  c.n_dimers = static_cast<int>(dimers.size());
  c.photon = PhotonRepresentation::fock;
  c.variant = SfVariant::five_state;
  c.max_manifold = 2;
  CavitySpec cav;
  cav.omega_c = omega_c;
  cav.n_max = 2;
  SfSpectroModel s;
  s.model = build_sf(dimers, cav, c);
  const auto S = static_cast<Eigen::Index>(s.model.config.size());
  s.raising = Eigen::MatrixXd::Zero(S, S);
  for (std::size_t i = 0; i < s.model.config.size(); ++i)
    for (std::size_t j = 0; j < dimers.size(); ++j)
      for (const auto& el : detail::raising_elements(dimers[j], c.variant)) {
        if (static_cast<int>(s.model.config[i][j]) != static_cast<int>(el[0])) continue;
        auto cfg = s.model.config[i];
        cfg[j] = static_cast<SfState>(static_cast<int>(el[1]));
        for (std::size_t k = 0; k < s.model.config.size(); ++k)
          if (s.model.config[k] == cfg && s.model.photons[k] == s.model.photons[i])
            s.raising(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) += el[2];
      }
  s.ground_label = s.model.find_label(std::vector<SfState>(dimers.size(), SfState::g), 0);
  return s;
}

}  // namespace polariton
