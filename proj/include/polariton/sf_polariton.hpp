// sf_polariton.hpp - rubrene-dimer singlet fission in a single-mode cavity
//
// Each dimer carries electronic states g, S1, TT (and Sn, TTn in the five-state
// variant) and two modes, tuning (tu) and coupling (cu), with
//   h_k = eps_k + kappa_k Q_tu + w_tu (b_tu^+ b_tu) + w_cu (b_cu^+ b_cu),
//   S1 <-> TT coupled by lambda_CI Q_cu,  Q = (b + b^+) / sqrt(2).
// The cavity photon is either a displaced boson mode of the ansatz (coherent) or
// a Fock index folded into the system basis (fock). Zero-point energies are dropped.
#pragma once

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "polariton/errors.hpp"
#include "polariton/fock.hpp"
#include "polariton/mdav2/propagate.hpp"
#include "polariton/mdav2/state.hpp"
#include "polariton/model.hpp"
#include "polariton/parallel.hpp"

namespace polariton {

enum class SfState { g = 0, S1 = 1, TT = 2, Sn = 3, TTn = 4 };
enum class SfVariant { three_state, five_state };
enum class PhotonRepresentation { coherent, fock, none };

inline const char* sf_state_name(SfState s) {
  static const char* names[] = {"g", "S1", "TT", "Sn", "TTn"};
  return names[static_cast<int>(s)];
}

// Excitation number carried by each electronic state.
inline int sf_excitations(SfState s) {
  static const int n[] = {0, 1, 1, 2, 2};
  return n[static_cast<int>(s)];
}

struct SFDimerSpec {
  double eps_S1 = 2.23;
  double eps_TT = 2.28;
  double eps_Sn = 4.33;
  double eps_TTn = 4.68;
  double omega_tu = 0.186;
  double omega_cu = 0.0154;
  double kappa_S1 = 0.0;
  double kappa_TT = 0.0;
  double kappa_Sn = 0.0;
  double kappa_TTn = 0.0;
  double lambda_ci = 0.0;
  double eta_S = 1.0;
  double eta_T = 1.0;

  double energy(SfState s) const {
    switch (s) {
      case SfState::g: return 0.0;
      case SfState::S1: return eps_S1;
      case SfState::TT: return eps_TT;
      case SfState::Sn: return eps_Sn;
      case SfState::TTn: return eps_TTn;
    }
    return 0.0;
  }
  double kappa(SfState s) const {
    switch (s) {
      case SfState::g: return 0.0;
      case SfState::S1: return kappa_S1;
      case SfState::TT: return kappa_TT;
      case SfState::Sn: return kappa_Sn;
      case SfState::TTn: return kappa_TTn;
    }
    return 0.0;
  }

  std::vector<std::string> violations(const std::string& at = "sf") const {
    std::vector<std::string> out;
    if (!(omega_tu > 0)) out.push_back(at + ".omega_tu must be > 0, got " + detail::show(omega_tu));
    if (!(omega_cu > 0)) out.push_back(at + ".omega_cu must be > 0, got " + detail::show(omega_cu));
    for (double e : {eps_S1, eps_TT, eps_Sn, eps_TTn})
      if (!std::isfinite(e)) out.push_back(at + ": electronic energies must be finite");
    if (!(eta_S >= 0) || !(eta_T >= 0)) out.push_back(at + ".eta_S and eta_T must be >= 0");
    return out;
  }
  void validate() const { detail::throw_if_any(violations()); }
};

struct SFCavityCoupling {
  double Omega = 0.2;
  bool rwa = false;
  int n_dimers = 1;
  PhotonRepresentation photon = PhotonRepresentation::coherent;
  SfVariant variant = SfVariant::three_state;
  int max_manifold = -1;  // fock only: drop basis states with N_ex above this; -1 keeps all

  std::vector<std::string> violations(const std::string& at = "sf") const {
    std::vector<std::string> out;
    if (!(Omega >= 0)) out.push_back(at + ".Omega must be >= 0, got " + detail::show(Omega));
    if (n_dimers < 1) out.push_back(at + ".n_dimers must be >= 1, got " + detail::show(n_dimers));
    if (photon == PhotonRepresentation::none && Omega != 0.0)
      out.push_back(at + ": a cavity-free model needs Omega = 0");
    return out;
  }
  void validate() const {
    detail::throw_if_any(violations());
    if (n_dimers > 2) throw UnsupportedError("sf: more than two dimers is not supported, got " + std::to_string(n_dimers));
  }
};

struct CrossingSolution {
  double kappa_S1 = 0.0;
  double kappa_TT = 0.0;
};

// Solves eps_S1 + w Q^2 / 2 + kappa_S1 Q = eps_TT + w Q^2 / 2 + kappa_TT Q = E at Q = ci_Q.
inline CrossingSolution derive_kappas_from_ci(double ci_Q, double ci_E, double eps_S1, double eps_TT,
                                              double omega_tu) {
  if (ci_Q == 0.0) {
    if (eps_S1 != eps_TT) throw DomainError("derive_kappas_from_ci: ci_Q = 0 with eps_S1 != eps_TT has no solution");
    throw DomainError("derive_kappas_from_ci: ci_Q = 0 leaves the couplings undetermined");
  }
  const double base = ci_E - 0.5 * omega_tu * ci_Q * ci_Q;
  return {(base - eps_S1) / ci_Q, (base - eps_TT) / ci_Q};
}

inline double rabi_splitting(double omega_C, double eps_S1, int n_molecules, double Omega) {
  const double d = omega_C - eps_S1;
  return std::sqrt(d * d + n_molecules * Omega * Omega);
}

struct SfModel {
  HamiltonianAction action;
  std::vector<SFDimerSpec> dimers;
  CavitySpec cavity;
  SFCavityCoupling coupling;
  std::vector<std::vector<SfState>> config;  // per label, per dimer
  std::vector<int> photons;                   // Fock photon number per label (0 for coherent)
  long photon_mode = -1;                      // coherent representation only
  std::vector<std::size_t> tu_mode, cu_mode;  // per dimer

  std::size_t n_dimers() const { return dimers.size(); }

  int excitations(std::size_t label) const {
    int n = photons[label];
    for (SfState s : config[label]) n += sf_excitations(s);
    return n;
  }
  bool contains(std::size_t label, SfState s) const {
    return std::find(config[label].begin(), config[label].end(), s) != config[label].end();
  }
  bool all_ground(std::size_t label) const {
    return std::all_of(config[label].begin(), config[label].end(), [](SfState s) { return s == SfState::g; });
  }
  std::size_t find_label(const std::vector<SfState>& c, int n_c) const {
    for (std::size_t i = 0; i < config.size(); ++i)
      if (config[i] == c && photons[i] == n_c) return i;
    throw ConfigurationError("sf: requested configuration is outside the basis");
  }
};

namespace detail {

inline std::string sf_label(const std::vector<SfState>& c, int n_c, bool fock) {
  std::string s;
  for (std::size_t j = 0; j < c.size(); ++j) s += (j ? "," : "") + std::string(sf_state_name(c[j]));
  if (fock) s += "|" + std::to_string(n_c);
  return s;
}

// Nonzero elements <to|X^+|from> of the single-dimer raising operator.
inline std::vector<std::array<double, 3>> raising_elements(const SFDimerSpec& d, SfVariant v) {
  std::vector<std::array<double, 3>> out = {{0, 1, 1.0}};  // g -> S1
  if (v == SfVariant::five_state) {
    out.push_back({1, 3, d.eta_S});  // S1 -> Sn
    out.push_back({2, 4, d.eta_T});  // TT -> TTn
  }
  return out;
}

}  // namespace detail

inline SfModel build_sf(const std::vector<SFDimerSpec>& dimers, const CavitySpec& cavity,
                        const SFCavityCoupling& coupling) {
  coupling.validate();
  if (static_cast<int>(dimers.size()) != coupling.n_dimers)
    throw ConfigurationError("sf: " + std::to_string(dimers.size()) + " dimer specs for n_dimers = " +
                             std::to_string(coupling.n_dimers));
  for (const auto& d : dimers) d.validate();
  const bool fock = coupling.photon == PhotonRepresentation::fock;
  if (fock) {
    cavity.validate();
  } else {
    if (!(cavity.omega_c > 0)) throw ConfigurationError("cavity.omega_c must be > 0");
    if (cavity.kappa != 0.0) throw UnsupportedError("sf: cavity loss requires the fock photon representation");
  }

  SfModel m;
  m.dimers = dimers;
  m.cavity = cavity;
  m.coupling = coupling;
  const int n_states = coupling.variant == SfVariant::five_state ? 5 : 3;
  const std::size_t nd = dimers.size();
  std::size_t n_elec = 1;
  for (std::size_t j = 0; j < nd; ++j) n_elec *= static_cast<std::size_t>(n_states);
  const int n_ph_max = fock ? cavity.n_max : 0;
  for (int n_c = 0; n_c <= n_ph_max; ++n_c)
    for (std::size_t e = 0; e < n_elec; ++e) {
      std::vector<SfState> c(nd);
      std::size_t rest = e;
      for (std::size_t j = nd; j-- > 0;) {
        c[j] = static_cast<SfState>(rest % static_cast<std::size_t>(n_states));
        rest /= static_cast<std::size_t>(n_states);
      }
      int nex = n_c;
      for (SfState s : c) nex += sf_excitations(s);
      if (fock && coupling.max_manifold >= 0 && nex > coupling.max_manifold) continue;
      m.config.push_back(c);
      m.photons.push_back(n_c);
    }

  const std::size_t S = m.config.size();
  auto& h = m.action;
  h.system = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(S), static_cast<Eigen::Index>(S));
  h.kinds.assign(S, SiteKind::electronic);
  for (std::size_t i = 0; i < S; ++i) {
    h.labels.push_back(detail::sf_label(m.config[i], m.photons[i], fock));
    double e = fock ? cavity.omega_c * m.photons[i] : 0.0;
    for (std::size_t j = 0; j < nd; ++j) e += dimers[j].energy(m.config[i][j]);
    h.system(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = cplx(e, fock ? -cavity.kappa * m.photons[i] : 0.0);
  }

  if (coupling.photon == PhotonRepresentation::coherent) {
    m.photon_mode = 0;
    h.mode_frequencies.push_back(cavity.omega_c);
  }
  for (std::size_t j = 0; j < nd; ++j) {
    m.tu_mode.push_back(h.mode_frequencies.size());
    h.mode_frequencies.push_back(dimers[j].omega_tu);
    m.cu_mode.push_back(h.mode_frequencies.size());
    h.mode_frequencies.push_back(dimers[j].omega_cu);
  }

  const double r2 = std::sqrt(0.5);
  auto index_of = [&](const std::vector<SfState>& c, int n_c) -> long {
    for (std::size_t i = 0; i < S; ++i)
      if (m.photons[i] == n_c && m.config[i] == c) return static_cast<long>(i);
    return -1;
  };
  for (std::size_t i = 0; i < S; ++i) {
    for (std::size_t j = 0; j < nd; ++j) {
      const SfState s = m.config[i][j];
      const double k = dimers[j].kappa(s);
      if (k != 0.0) h.couplings.push_back({m.tu_mode[j], i, i, k * r2, k * r2});
      if (s == SfState::S1 && dimers[j].lambda_ci != 0.0) {
        auto c = m.config[i];
        c[j] = SfState::TT;
        const long t = index_of(c, m.photons[i]);
        if (t >= 0) {
          const double g = dimers[j].lambda_ci * r2;
          h.couplings.push_back({m.cu_mode[j], i, static_cast<std::size_t>(t), g, g});
          h.couplings.push_back({m.cu_mode[j], static_cast<std::size_t>(t), i, g, g});
        }
      }
    }
  }

  if (coupling.Omega != 0.0) {
    const double half = 0.5 * coupling.Omega;
    for (std::size_t i = 0; i < S; ++i)
      for (std::size_t j = 0; j < nd; ++j)
        for (const auto& el : detail::raising_elements(dimers[j], coupling.variant)) {
          if (static_cast<int>(m.config[i][j]) != static_cast<int>(el[0]) || el[2] == 0.0) continue;
          auto c = m.config[i];
          c[j] = static_cast<SfState>(static_cast<int>(el[1]));
          const double x = half * el[2];
          if (coupling.photon == PhotonRepresentation::coherent) {
            const long up = index_of(c, 0);
            if (up < 0) continue;
            const auto u = static_cast<std::size_t>(up);
            const auto pm = static_cast<std::size_t>(m.photon_mode);
            // |up><i| carries C (RWA) or C + C^+; |i><up| carries C^+ (RWA) or C + C^+.
            h.couplings.push_back({pm, u, i, coupling.rwa ? 0.0 : x, x});
            h.couplings.push_back({pm, i, u, x, coupling.rwa ? 0.0 : x});
          } else {
            const int n = m.photons[i];
            // X^+ C: absorb a photon while raising.
            if (n > 0) {
              const long up = index_of(c, n - 1);
              if (up >= 0) {
                const double v = x * std::sqrt(static_cast<double>(n));
                h.system(up, static_cast<Eigen::Index>(i)) += v;
                h.system(static_cast<Eigen::Index>(i), up) += v;
              }
            }
            // X^+ C^+: counter-rotating.
            if (!coupling.rwa) {
              const long up = index_of(c, n + 1);
              if (up >= 0) {
                const double v = x * std::sqrt(static_cast<double>(n + 1));
                h.system(up, static_cast<Eigen::Index>(i)) += v;
                h.system(static_cast<Eigen::Index>(i), up) += v;
              }
            }
          }
        }
  }
  h.check_consistency();
  return m;
}

// Smallest n_max with Poisson(mean) tail P(n > n_max) below `tail`.
inline int poisson_cutoff(double mean, double tail = 1e-10) {
  if (!(mean >= 0)) throw DomainError("poisson_cutoff: mean must be >= 0");
  if (mean == 0.0) return 0;
  for (int n = 0; n < 10000; ++n)
    if (boost::math::gamma_p(static_cast<double>(n + 1), mean) < tail) return n;
  throw DomainError("poisson_cutoff: mean too large");
}

inline constexpr double kMaxPumpNumber = 25.0;

namespace detail {

inline std::vector<SfState> s1_config(std::size_t nd, std::size_t j) {
  std::vector<SfState> c(nd, SfState::g);
  c[j] = SfState::S1;
  return c;
}

}  // namespace detail

// S1 excitation (symmetric over dimers) with the cavity in the coherent state |mu1>.
inline MultiD2State coherent_init(const SfModel& m, cplx mu1, std::size_t M, std::uint64_t seed,
                                  double noise_scale = kDefaultNoiseScale) {
  if (std::norm(mu1) > kMaxPumpNumber)
    throw DomainError("coherent_init: |mu1|^2 = " + detail::show(std::norm(mu1)) + " outside the validated range (<= 25)");
  const std::size_t nd = m.n_dimers();
  const auto S = static_cast<Eigen::Index>(m.action.n_sys());
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(S);
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(m.action.n_modes()));
  const double w = 1.0 / std::sqrt(static_cast<double>(nd));
  if (m.coupling.photon == PhotonRepresentation::fock) {
    const int cut = m.cavity.n_max;
    if (poisson_cutoff(std::norm(mu1)) > cut)
      throw ConfigurationError("coherent_init: cavity.n_max = " + std::to_string(cut) + " truncates more than 1e-10 of the Poisson tail (needs " +
                               std::to_string(poisson_cutoff(std::norm(mu1))) + ")");
    for (std::size_t j = 0; j < nd; ++j) {
      cplx amp = std::exp(-0.5 * std::norm(mu1));
      for (int n = 0; n <= cut; ++n) {
        if (n > 0) amp *= mu1 / std::sqrt(static_cast<double>(n));
        a(static_cast<Eigen::Index>(m.find_label(detail::s1_config(nd, j), n))) += w * amp;
      }
    }
  } else {
    if (m.photon_mode < 0 && mu1 != cplx(0.0)) throw ConfigurationError("coherent_init: cavity-free model cannot be pumped");
    for (std::size_t j = 0; j < nd; ++j) a(static_cast<Eigen::Index>(m.find_label(detail::s1_config(nd, j), 0))) = w;
    if (m.photon_mode >= 0) f(m.photon_mode) = mu1;
  }
  return init_state(a, f, M, seed, noise_scale);
}

struct SfSample {
  double time_fs = 0;
  double p_tt = 0;
  double p_cav = 0;
  double p_s1 = 0;
  double n_ex = 0;
  double norm = 0;
  double energy = 0;
};

inline SfSample sf_sample(const SfModel& m, const MultiD2State& s) {
  SfSample o;
  const Eigen::VectorXd pop = label_populations(s);
  for (std::size_t i = 0; i < m.config.size(); ++i) {
    const double p = pop(static_cast<Eigen::Index>(i));
    if (m.contains(i, SfState::TT)) o.p_tt += p;
    if (m.contains(i, SfState::S1)) o.p_s1 += p;
    o.p_cav += p * m.photons[i];
    o.n_ex += p * m.excitations(i);
  }
  if (m.photon_mode >= 0) {
    const double n = mode_occupation(s, static_cast<std::size_t>(m.photon_mode));
    o.p_cav += n;
    o.n_ex += n;
  }
  o.norm = pop.sum();
  o.energy = energy(s, m.action);
  return o;
}

inline std::vector<SfSample> sf_observables(const SfModel& m, const Trajectory& tr) {
  std::vector<SfSample> out;
  out.reserve(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    out.push_back(sf_sample(m, tr.states[i]));
    out.back().time_fs = tr.times[i];
  }
  return out;
}

// ---- adiabatic surfaces -------------------------------------------------

struct PolaritonicSurfacePoint {
  double q_t = 0;
  double energy = 0;
  double manifold = 0;  // <N_ex>
  double w_tt = 0;
  double w_ph = 0;      // weight on all-ground configurations with n_c >= 1
  double w_ph_alt = 0;  // 1 - weight on configurations with an excited dimer and n_c >= 1
  double leakage = 0;   // weight on n_c = n_max
};

// Potential part of the Hamiltonian at frozen coordinates (all tuning modes at q_t,
// all coupling modes at q_c).
inline Eigen::MatrixXcd sf_potential(const SfModel& m, double q_t, double q_c) {
  if (m.coupling.photon != PhotonRepresentation::fock)
    throw ConfigurationError("sf_potential: requires the fock photon representation");
  std::vector<double> q(m.action.n_modes(), 0.0);
  for (std::size_t j = 0; j < m.n_dimers(); ++j) {
    q[m.tu_mode[j]] = q_t;
    q[m.cu_mode[j]] = q_c;
  }
  Eigen::MatrixXcd v = m.action.system;
  double harmonic = 0;
  for (std::size_t k = 0; k < q.size(); ++k) harmonic += 0.5 * m.action.mode_frequencies[k] * q[k] * q[k];
  v.diagonal().array() += harmonic;
  for (const auto& c : m.action.couplings) v(c.row, c.col) += (c.create + c.annihilate) * q[c.mode] * std::sqrt(0.5);
  return v;
}

inline constexpr double kManifoldLeakage = 1e-6;

// Eigenstates at one node, sorted by energy, restricted to manifolds in `filter` (empty: all).
inline std::vector<PolaritonicSurfacePoint> surfaces_at(const SfModel& m, double q_t, double q_c,
                                                        const std::set<int>& filter = {}) {
  const Eigen::MatrixXcd v = sf_potential(m, q_t, q_c);
  if ((v - v.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw DomainError("surfaces_at: potential is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(v);
  const Eigen::MatrixXcd& u = es.eigenvectors();
  std::vector<PolaritonicSurfacePoint> out;
  for (Eigen::Index n = 0; n < u.cols(); ++n) {
    PolaritonicSurfacePoint p;
    p.q_t = q_t;
    p.energy = es.eigenvalues()(n);
    double excited_photon = 0;
    for (std::size_t i = 0; i < m.config.size(); ++i) {
      const double w = std::norm(u(static_cast<Eigen::Index>(i), n));
      p.manifold += w * m.excitations(i);
      if (m.contains(i, SfState::TT)) p.w_tt += w;
      if (m.photons[i] >= 1 && m.all_ground(i)) p.w_ph += w;
      if (m.photons[i] >= 1 && !m.all_ground(i)) excited_photon += w;
      if (m.photons[i] == m.cavity.n_max) p.leakage += w;
    }
    p.w_ph_alt = 1.0 - excited_photon;
    if (!filter.empty() && !filter.count(static_cast<int>(std::lround(p.manifold)))) continue;
    out.push_back(p);
  }
  return out;
}

inline std::vector<std::vector<PolaritonicSurfacePoint>> pes_scan(const SfModel& m, const std::vector<double>& q_grid,
                                                                  double q_c = 0.0, const std::set<int>& filter = {},
                                                                  unsigned workers = 1) {
  if (m.coupling.photon != PhotonRepresentation::fock)
    throw ConfigurationError("pes_scan: requires the fock photon representation");
  const int top = filter.empty() ? m.cavity.n_max - 4 : *filter.rbegin();
  if (m.cavity.n_max < top + 4)
    throw ConfigurationError("pes_scan: cavity.n_max = " + std::to_string(m.cavity.n_max) + " must be >= max manifold + 4 = " +
                             std::to_string(top + 4));
  auto nodes = parallel_map(q_grid.size(), workers, [&](std::size_t i) { return surfaces_at(m, q_grid[i], q_c, filter); });
  for (const auto& node : nodes)
    for (const auto& p : node)
      if (p.leakage > kManifoldLeakage)
        throw DomainError("pes_scan: manifold leakage " + detail::show(p.leakage) + " at Q_t = " + detail::show(p.q_t) +
                          "; increase cavity.n_max");
  return nodes;
}

struct SurfaceCrossing {
  int manifold = 0;
  std::size_t lower = 0;  // index of the lower surface within the manifold
  double q_t = 0;
  double energy = 0;
  double gap = 0;
  bool conical = false;   // gap below kCrossingGap
  double w_tt_left = 0;   // lower surface TT weight at the bracketing grid nodes
  double w_tt_right = 0;
  double w_ph_left = 0;
  double w_ph_right = 0;
};

inline constexpr double kCrossingGap = 1e-4;

// Local minima of adjacent-surface gaps on the grid, refined by Brent minimization.
inline std::vector<SurfaceCrossing> locate_crossings(const SfModel& m, const std::vector<double>& q_grid, int manifold,
                                                     double q_c = 0.0) {
  if (q_grid.size() < 3) throw ConfigurationError("locate_crossings: need at least three grid nodes");
  const std::set<int> filter{manifold};
  std::vector<std::vector<PolaritonicSurfacePoint>> nodes;
  for (double q : q_grid) nodes.push_back(surfaces_at(m, q, q_c, filter));
  const std::size_t ns = nodes.front().size();
  for (const auto& n : nodes)
    if (n.size() != ns) throw DomainError("locate_crossings: manifold size changes along the grid");
  std::vector<SurfaceCrossing> out;
  for (std::size_t s = 0; s + 1 < ns; ++s) {
    auto gap_at = [&](double q) {
      const auto p = surfaces_at(m, q, q_c, filter);
      return p[s + 1].energy - p[s].energy;
    };
    for (std::size_t i = 1; i + 1 < q_grid.size(); ++i) {
      const double g0 = nodes[i - 1][s + 1].energy - nodes[i - 1][s].energy;
      const double g1 = nodes[i][s + 1].energy - nodes[i][s].energy;
      const double g2 = nodes[i + 1][s + 1].energy - nodes[i + 1][s].energy;
      if (!(g1 <= g0 && g1 < g2)) continue;
      const auto r = boost::math::tools::brent_find_minima(gap_at, q_grid[i - 1], q_grid[i + 1], 52);
      SurfaceCrossing c;
      c.manifold = manifold;
      c.lower = s;
      c.q_t = r.first;
      c.gap = r.second;
      const auto p = surfaces_at(m, r.first, q_c, filter);
      c.energy = 0.5 * (p[s].energy + p[s + 1].energy);
      c.conical = c.gap < kCrossingGap;
      c.w_tt_left = nodes[i - 1][s].w_tt;
      c.w_tt_right = nodes[i + 1][s].w_tt;
      c.w_ph_left = nodes[i - 1][s].w_ph;
      c.w_ph_right = nodes[i + 1][s].w_ph;
      out.push_back(c);
    }
  }
  std::sort(out.begin(), out.end(), [](const SurfaceCrossing& a, const SurfaceCrossing& b) { return a.q_t < b.q_t; });
  return out;
}

// Energy gap of the two singly-excited eigenstates with the largest photon weight at (q_t, q_c).
inline double bright_pair_gap(const SfModel& m, double q_t = 0.0, double q_c = 0.0) {
  auto p = surfaces_at(m, q_t, q_c, {1});
  if (p.size() < 2) throw DomainError("bright_pair_gap: singly-excited manifold has fewer than two states");
  std::sort(p.begin(), p.end(), [](const auto& a, const auto& b) { return a.w_ph > b.w_ph; });
  return std::abs(p[0].energy - p[1].energy);
}

// Counts of basis states per excitation number (Fock representation).
inline std::vector<int> manifold_sizes(const SfModel& m) {
  std::vector<int> n;
  for (std::size_t i = 0; i < m.config.size(); ++i) {
    const auto e = static_cast<std::size_t>(m.excitations(i));
    if (n.size() <= e) n.resize(e + 1, 0);
    ++n[e];
  }
  return n;
}

// ---- dynamics ----------------------------------------------------------

enum class SfEngine { mdav2, fock };

struct SfDynamicsOptions {
  SfEngine engine = SfEngine::fock;
  double t_max = 300.0;
  double sample_dt = 0.25;
  // mdav2
  std::size_t multiplicity = 16;
  std::uint64_t seed = 1;
  double noise_scale = 1e-2;
  std::size_t guard_retries = 100;
  PropagationOptions propagation;
  // fock: vibrational cutoffs (tu, cu) and photon truncation margin above the Poisson cutoff
  int tu_cutoff = 20;
  int cu_cutoff = 50;
  int photon_margin = 4;
  double photon_tail = 1e-10;
  ChebyshevOptions chebyshev;
};

struct SfRun {
  std::vector<SfSample> samples;
  std::size_t dimension = 0;  // Fock-space dimension or number of variational parameters
  int photon_cutoff = 0;      // fock engine only
};

namespace detail {

inline SfRun sf_run_fock(const std::vector<SFDimerSpec>& dimers, const CavitySpec& cavity, SFCavityCoupling coupling,
                         cplx mu1, const SfDynamicsOptions& o) {
  const bool cavity_free = coupling.photon == PhotonRepresentation::none;
  CavitySpec cav = cavity;
  if (!cavity_free) {
    coupling.photon = PhotonRepresentation::fock;
    cav.n_max = std::max(1, poisson_cutoff(std::norm(mu1), o.photon_tail) + o.photon_margin);
  }
  const SfModel m = build_sf(dimers, cav, coupling);
  std::vector<int> cut;
  for (std::size_t j = 0; j < m.n_dimers(); ++j) {
    cut.push_back(o.tu_cutoff);
    cut.push_back(o.cu_cutoff);
  }
  const SparseFockModel d = build_sparse_fock(m.action, cut);
  const MultiD2State s0 = coherent_init(m, mu1, 1, o.seed);
  Eigen::VectorXcd a = s0.A.row(0).transpose();
  const Eigen::VectorXcd psi0 = fock_product_state(d, a);
  SfRun run;
  run.dimension = d.dim();
  run.photon_cutoff = cavity_free ? 0 : cav.n_max;
  const auto n = static_cast<std::size_t>(std::llround(o.t_max / o.sample_dt));
  chebyshev_propagate(
      d, psi0, o.sample_dt, n,
      [&](std::size_t i, const Eigen::VectorXcd& psi) {
        SfSample x;
        x.time_fs = static_cast<double>(i) * o.sample_dt;
        const Eigen::VectorXd pop = fock_label_populations(d, psi);
        for (std::size_t l = 0; l < m.config.size(); ++l) {
          const double p = pop(static_cast<Eigen::Index>(l));
          if (m.contains(l, SfState::TT)) x.p_tt += p;
          if (m.contains(l, SfState::S1)) x.p_s1 += p;
          x.p_cav += p * m.photons[l];
          x.n_ex += p * m.excitations(l);
        }
        x.norm = pop.sum();
        x.energy = psi.dot(d.H * psi).real();
        run.samples.push_back(x);
      },
      o.chebyshev);
  return run;
}

}  // namespace detail

// Single or double dimer started in S1 (symmetric) with the cavity in the coherent state |mu1>.
// A cavity-free run uses coupling.photon = none and Omega = 0.
inline SfRun sf_run(const std::vector<SFDimerSpec>& dimers, const CavitySpec& cavity, const SFCavityCoupling& coupling,
                    cplx mu1, const SfDynamicsOptions& o = {}) {
  if (!(o.sample_dt > 0) || !(o.t_max >= 0)) throw ConfigurationError("sf_run: t_max must be >= 0 and sample_dt > 0");
  if (o.engine == SfEngine::fock) return detail::sf_run_fock(dimers, cavity, coupling, mu1, o);
  SFCavityCoupling c = coupling;
  if (c.photon == PhotonRepresentation::fock) c.photon = PhotonRepresentation::coherent;
  const SfModel m = build_sf(dimers, cavity, c);
  auto p = o.propagation;
  p.t_max = o.t_max;
  p.sample_dt = o.sample_dt;
  p.max_guard_retries = o.guard_retries;
  const auto tr = propagate(coherent_init(m, mu1, o.multiplicity, o.seed, o.noise_scale), m.action, p);
  SfRun run;
  run.samples = sf_observables(m, tr);
  run.dimension = o.multiplicity * (m.action.n_sys() + m.action.n_modes());
  return run;
}

// ---- calibration --------------------------------------------------------

struct SfCalibrationOptions {
  double target = 0.14;
  double time_fs = 300.0;
  double lo = 0.05;
  double hi = 0.1;
  double tolerance = 1e-4;  // on lambda_CI
  SfDynamicsOptions dynamics;
};

struct SfCalibration {
  double lambda_ci = 0.0;
  double p_tt = 0.0;
  int iterations = 0;
};

// P_TT(time) of the cavity-free single dimer started in S1.
inline double cavity_free_p_tt(SFDimerSpec d, double lambda_ci, const SfCalibrationOptions& o) {
  d.lambda_ci = lambda_ci;
  SFCavityCoupling c;
  c.Omega = 0.0;
  c.photon = PhotonRepresentation::none;
  auto dyn = o.dynamics;
  dyn.t_max = o.time_fs;
  dyn.sample_dt = o.time_fs;
  return sf_run({d}, CavitySpec{}, c, 0.0, dyn).samples.back().p_tt;
}

// Bisection on lambda_CI between lo and hi, which must bracket the target.
inline SfCalibration calibrate_lambda_ci(const SFDimerSpec& d, const SfCalibrationOptions& o = {}) {
  double lo = o.lo, hi = o.hi;
  const double plo = cavity_free_p_tt(d, lo, o) - o.target;
  const double phi = cavity_free_p_tt(d, hi, o) - o.target;
  if (plo * phi > 0)
    throw DomainError("calibrate_lambda_ci: target " + detail::show(o.target) + " not bracketed on [" + detail::show(lo) +
                      ", " + detail::show(hi) + "]");
  const bool rising = plo < 0;
  SfCalibration r;
  while (hi - lo > o.tolerance) {
    const double mid = 0.5 * (lo + hi);
    const bool below = cavity_free_p_tt(d, mid, o) < o.target;
    (below == rising ? lo : hi) = mid;
    ++r.iterations;
  }
  r.lambda_ci = 0.5 * (lo + hi);
  r.p_tt = cavity_free_p_tt(d, r.lambda_ci, o);
  return r;
}

// Rubrene parameters with couplings derived from the crossing at Q_t = 0.07, E = 2.256 eV.
inline SFDimerSpec rubrene_dimer(double lambda_ci = 0.0) {
  SFDimerSpec d;
  const auto k = derive_kappas_from_ci(0.07, 2.256, d.eps_S1, d.eps_TT, d.omega_tu);
  d.kappa_S1 = k.kappa_S1;
  d.kappa_TT = k.kappa_TT;
  d.kappa_Sn = k.kappa_S1;
  d.kappa_TTn = k.kappa_TT;
  d.lambda_ci = lambda_ci;
  return d;
}

}  // namespace polariton
