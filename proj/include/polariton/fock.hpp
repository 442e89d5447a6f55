// fock.hpp - truncated-Fock representations of a HamiltonianAction
//
// Basis ordering: system label outermost, then modes 0..K-1 with the last mode
// fastest. The dense form serves small oracle problems; the sparse form with the
// Chebyshev propagator handles Hermitian problems up to a few 10^5 states.
#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "polariton/constants.hpp"
#include "polariton/errors.hpp"
#include "polariton/mdav2/state.hpp"
#include "polariton/model.hpp"

namespace polariton {

struct DenseFockModel {
  Eigen::MatrixXcd H;
  std::size_t n_sys = 0;
  std::vector<int> cutoffs;  // max occupation per mode
  std::size_t block = 1;     // product of (cutoff + 1)

  std::size_t dim() const { return static_cast<std::size_t>(H.rows()); }
};

inline DenseFockModel build_dense_fock(const HamiltonianAction& h, const std::vector<int>& cutoffs) {
  h.check_consistency();
  if (cutoffs.size() != h.n_modes()) throw ConfigurationError("one Fock cutoff per mode required");
  DenseFockModel d;
  d.n_sys = h.n_sys();
  d.cutoffs = cutoffs;
  std::vector<std::size_t> stride(cutoffs.size());
  d.block = 1;
  for (std::size_t k = cutoffs.size(); k-- > 0;) {
    if (cutoffs[k] < 0) throw ConfigurationError("Fock cutoffs must be >= 0");
    stride[k] = d.block;
    d.block *= static_cast<std::size_t>(cutoffs[k]) + 1;
  }
  const std::size_t dim = d.n_sys * d.block;
  if (dim > 20000) throw UnsupportedError("dense Fock space too large");
  d.H = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  auto occ = [&](std::size_t v, std::size_t k) { return static_cast<int>((v / stride[k]) % (cutoffs[k] + 1)); };
  for (std::size_t r = 0; r < d.n_sys; ++r)
    for (std::size_t c = 0; c < d.n_sys; ++c)
      if (h.system(r, c) != cplx(0.0))
        for (std::size_t v = 0; v < d.block; ++v) d.H(r * d.block + v, c * d.block + v) += h.system(r, c);
  for (std::size_t r = 0; r < d.n_sys; ++r)
    for (std::size_t v = 0; v < d.block; ++v) {
      double e = 0;
      for (std::size_t k = 0; k < cutoffs.size(); ++k) e += h.mode_frequencies[k] * occ(v, k);
      d.H(r * d.block + v, r * d.block + v) += e;
    }
  for (const auto& t : h.couplings) {
    for (std::size_t v = 0; v < d.block; ++v) {
      const int n = occ(v, t.mode);
      if (n < cutoffs[t.mode])  // b^+ |n> = sqrt(n+1) |n+1>
        d.H(t.row * d.block + v + stride[t.mode], t.col * d.block + v) += t.create * std::sqrt(n + 1.0);
      if (n > 0)
        d.H(t.row * d.block + v - stride[t.mode], t.col * d.block + v) += t.annihilate * std::sqrt(static_cast<double>(n));
    }
  }
  return d;
}

// Projection of a multi-D2 state onto the truncated Fock basis.
inline Eigen::VectorXcd embed_state(const DenseFockModel& d, const MultiD2State& s) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d.dim()));
  const std::size_t K = d.cutoffs.size();
  for (Eigen::Index m = 0; m < s.A.rows(); ++m) {
    double norm = 0;
    for (std::size_t k = 0; k < K; ++k) norm += std::norm(s.f(m, static_cast<Eigen::Index>(k)));
    // Coherent-state Fock amplitudes per mode.
    std::vector<std::vector<cplx>> amp(K);
    for (std::size_t k = 0; k < K; ++k) {
      amp[k].resize(static_cast<std::size_t>(d.cutoffs[k]) + 1);
      cplx a = 1.0;
      for (int n = 0; n <= d.cutoffs[k]; ++n) {
        if (n > 0) a *= s.f(m, static_cast<Eigen::Index>(k)) / std::sqrt(static_cast<double>(n));
        amp[k][static_cast<std::size_t>(n)] = a;
      }
    }
    const double pre = std::exp(-0.5 * norm);
    for (std::size_t v = 0; v < d.block; ++v) {
      cplx w = pre;
      std::size_t rest = v;
      for (std::size_t k = K; k-- > 0;) {
        const auto base = static_cast<std::size_t>(d.cutoffs[k]) + 1;
        w *= amp[k][rest % base];
        rest /= base;
      }
      for (std::size_t r = 0; r < d.n_sys; ++r)
        psi(static_cast<Eigen::Index>(r * d.block + v)) += s.A(m, static_cast<Eigen::Index>(r)) * w;
    }
  }
  return psi;
}

inline double fock_label_population(const DenseFockModel& d, const Eigen::VectorXcd& psi, std::size_t label) {
  return psi.segment(static_cast<Eigen::Index>(label * d.block), static_cast<Eigen::Index>(d.block)).squaredNorm();
}

// psi(t_i) for each requested time.
inline std::vector<Eigen::VectorXcd> dense_propagate(const DenseFockModel& d, const Eigen::VectorXcd& psi0,
                                                     const std::vector<double>& times) {
  std::vector<Eigen::VectorXcd> out;
  out.reserve(times.size());
  const bool hermitian = (d.H - d.H.adjoint()).cwiseAbs().maxCoeff() == 0.0;
  if (hermitian) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(d.H);
    const Eigen::VectorXcd c = es.eigenvectors().adjoint() * psi0;
    for (double t : times) {
      Eigen::VectorXcd ct(c.size());
      for (Eigen::Index i = 0; i < c.size(); ++i) ct(i) = c(i) * std::exp(-kI * es.eigenvalues()(i) * t / kHbar);
      out.push_back(es.eigenvectors() * ct);
    }
    return out;
  }
  for (double t : times) {
    const Eigen::MatrixXcd u = (-kI * d.H * (t / kHbar)).exp();
    out.push_back(u * psi0);
  }
  return out;
}

struct SparseFockModel {
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> H;
  std::size_t n_sys = 0;
  std::vector<int> cutoffs;
  std::size_t block = 1;

  std::size_t dim() const { return static_cast<std::size_t>(H.rows()); }
};

inline SparseFockModel build_sparse_fock(const HamiltonianAction& h, const std::vector<int>& cutoffs,
                                         std::size_t max_dim = 2000000) {
  h.check_consistency();
  if (cutoffs.size() != h.n_modes()) throw ConfigurationError("one Fock cutoff per mode required");
  SparseFockModel d;
  d.n_sys = h.n_sys();
  d.cutoffs = cutoffs;
  std::vector<std::size_t> stride(cutoffs.size());
  for (std::size_t k = cutoffs.size(); k-- > 0;) {
    if (cutoffs[k] < 0) throw ConfigurationError("Fock cutoffs must be >= 0");
    stride[k] = d.block;
    d.block *= static_cast<std::size_t>(cutoffs[k]) + 1;
  }
  const std::size_t dim = d.n_sys * d.block;
  if (dim > max_dim) throw UnsupportedError("sparse Fock space too large: " + std::to_string(dim) + " states");
  auto occ = [&](std::size_t v, std::size_t k) { return static_cast<int>((v / stride[k]) % (cutoffs[k] + 1)); };
  std::vector<Eigen::Triplet<cplx>> t;
  for (std::size_t r = 0; r < d.n_sys; ++r)
    for (std::size_t c = 0; c < d.n_sys; ++c)
      if (h.system(r, c) != cplx(0.0) && r != c)
        for (std::size_t v = 0; v < d.block; ++v) t.emplace_back(r * d.block + v, c * d.block + v, h.system(r, c));
  for (std::size_t r = 0; r < d.n_sys; ++r)
    for (std::size_t v = 0; v < d.block; ++v) {
      cplx e = h.system(r, r);
      for (std::size_t k = 0; k < cutoffs.size(); ++k) e += h.mode_frequencies[k] * occ(v, k);
      t.emplace_back(r * d.block + v, r * d.block + v, e);
    }
  for (const auto& c : h.couplings)
    for (std::size_t v = 0; v < d.block; ++v) {
      const int n = occ(v, c.mode);
      if (n < cutoffs[c.mode] && c.create != cplx(0.0))
        t.emplace_back(c.row * d.block + v + stride[c.mode], c.col * d.block + v, c.create * std::sqrt(n + 1.0));
      if (n > 0 && c.annihilate != cplx(0.0))
        t.emplace_back(c.row * d.block + v - stride[c.mode], c.col * d.block + v,
                       c.annihilate * std::sqrt(static_cast<double>(n)));
    }
  d.H.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  d.H.setFromTriplets(t.begin(), t.end());
  d.H.makeCompressed();
  return d;
}

// Product state: system amplitudes times the Fock vacuum of every mode.
inline Eigen::VectorXcd fock_product_state(const SparseFockModel& d, const Eigen::VectorXcd& amplitudes) {
  if (static_cast<std::size_t>(amplitudes.size()) != d.n_sys) throw ConfigurationError("one amplitude per system label required");
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(d.dim()));
  for (std::size_t r = 0; r < d.n_sys; ++r) psi(static_cast<Eigen::Index>(r * d.block)) = amplitudes(static_cast<Eigen::Index>(r));
  return psi;
}

inline double fock_label_population(const SparseFockModel& d, const Eigen::VectorXcd& psi, std::size_t label) {
  return psi.segment(static_cast<Eigen::Index>(label * d.block), static_cast<Eigen::Index>(d.block)).squaredNorm();
}

inline Eigen::VectorXd fock_label_populations(const SparseFockModel& d, const Eigen::VectorXcd& psi) {
  Eigen::VectorXd p(static_cast<Eigen::Index>(d.n_sys));
  for (std::size_t r = 0; r < d.n_sys; ++r) p(static_cast<Eigen::Index>(r)) = fock_label_population(d, psi, r);
  return p;
}

struct ChebyshevOptions {
  double tolerance = 1e-12;  // truncation of the Bessel series
  double max_phase = 50.0;   // largest half-width * dt / hbar per expansion
};

// Gershgorin bounds of a Hermitian sparse matrix.
inline std::pair<double, double> spectral_bounds(const Eigen::SparseMatrix<cplx, Eigen::RowMajor>& H) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Eigen::Index r = 0; r < H.outerSize(); ++r) {
    double centre = 0, radius = 0;
    for (Eigen::SparseMatrix<cplx, Eigen::RowMajor>::InnerIterator it(H, r); it; ++it) {
      if (it.col() == r)
        centre += it.value().real();
      else
        radius += std::abs(it.value());
    }
    lo = std::min(lo, centre - radius);
    hi = std::max(hi, centre + radius);
  }
  return {lo, hi};
}

// psi(t) = exp(-i H t / hbar) psi0 at t = i * sample_dt, i = 0..n; `observe` receives each sample.
// A negative sample_dt propagates backwards.
inline void chebyshev_propagate(const SparseFockModel& d, const Eigen::VectorXcd& psi0, double sample_dt, std::size_t n,
                                const std::function<void(std::size_t, const Eigen::VectorXcd&)>& observe,
                                const ChebyshevOptions& opt = {}) {
  if (!(sample_dt != 0) || !std::isfinite(sample_dt)) throw ConfigurationError("chebyshev_propagate: sample_dt must be nonzero");
  Eigen::SparseMatrix<cplx, Eigen::RowMajor> diff = d.H - Eigen::SparseMatrix<cplx, Eigen::RowMajor>(d.H.adjoint());
  if (diff.nonZeros() > 0 && diff.coeffs().cwiseAbs().maxCoeff() > 1e-12)
    throw UnsupportedError("chebyshev_propagate: Hamiltonian is not Hermitian");
  const auto [lo, hi] = spectral_bounds(d.H);
  const double centre = 0.5 * (hi + lo);
  const double half = 0.5 * (hi - lo) * 1.01 + 1e-12;
  const auto sub = static_cast<std::size_t>(std::ceil(half * std::abs(sample_dt) / kHbar / opt.max_phase));
  const double dt = sample_dt / static_cast<double>(sub);
  const double r = half * std::abs(dt) / kHbar;
  const cplx unit(0.0, dt > 0 ? -1.0 : 1.0);
  std::vector<cplx> coef;
  for (int k = 0;; ++k) {
    const double j = std::cyl_bessel_j(static_cast<double>(k), r);
    coef.push_back((k == 0 ? 1.0 : 2.0) * std::pow(unit, k) * j);
    if (k > r && std::abs(j) < opt.tolerance) break;
  }
  const cplx phase = std::exp(cplx(0.0, -centre * dt / kHbar));
  auto apply = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd { return (d.H * x - centre * x) / half; };
  Eigen::VectorXcd psi = psi0;
  observe(0, psi);
  Eigen::VectorXcd t0, t1, t2, acc;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t step = 0; step < sub; ++step) {
      t0 = psi;
      t1 = apply(psi);
      acc = coef[0] * t0 + coef[1] * t1;
      for (std::size_t k = 2; k < coef.size(); ++k) {
        t2 = 2.0 * apply(t1) - t0;
        acc += coef[k] * t2;
        t0.swap(t1);
        t1.swap(t2);
      }
      psi = phase * acc;
    }
    observe(i, psi);
  }
}

}  // namespace polariton
