// mdav2/eom.hpp - Dirac-Frenkel equations of motion for the multi-D2 ansatz
//
// The variational manifold is parameterized holomorphically by B_mn = A_mn exp(-|f_m|^2/2)
// and f_mk. The linear system i hbar C x = g is assembled directly in the normalized
// variables (Y_mn = exp(|f_m|^2/2) dB_mn/dt, df_mk/dt), which keeps every entry O(1):
//
//   C[(m n),(m' n')] = d_nn' S_mm'
//   C[(m n),(m' k)]  = A_m'n f*_mk S_mm'
//   C[(m k),(m' k')] = rho_mm' (d_kk' + f*_mk' f_m'k) S_mm'
//
// with S the Debye-Waller overlaps and rho_mm' = sum_n A*_mn A_m'n. The metric is
// Hermitian positive semidefinite and rank deficient whenever components coalesce, so
// every solver is regularized relative to the metric scale. The Tikhonov-shifted
// Cholesky solve is the default: its right-hand side varies smoothly with the
// parameters, whereas a hard eigenvalue cutoff makes the adaptive stepper stall.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "polariton/constants.hpp"
#include "polariton/errors.hpp"
#include "polariton/mdav2/state.hpp"
#include "polariton/model.hpp"

namespace polariton {

enum class MetricSolver { pseudo_inverse, smooth_pseudo_inverse, tikhonov };

struct EomOptions {
  MetricSolver solver = MetricSolver::tikhonov;
  // pseudo_inverse: keep lambda > cutoff * lambda_max; smooth_pseudo_inverse: lambda / (lambda^2 + eps^2)
  // with eps = cutoff * lambda_max; tikhonov: C + cutoff * max(diag C) * 1.
  double metric_cutoff = 1e-10;
  double direction = 1.0;  // -1 integrates U(-t)
  double max_norm = 1.5;
  // Remove the norm change introduced by the regularization along the direction of the state itself.
  bool conserve_norm = false;
};

struct Derivative {
  Eigen::MatrixXcd dA;
  Eigen::MatrixXcd df;
};

inline Derivative eom_rhs(const MultiD2State& s, const HamiltonianAction& h, const EomOptions& opt = {}) {
  const Eigen::Index M = s.A.rows();
  const Eigen::Index S = s.A.cols();
  const Eigen::Index K = s.f.cols();
  if (S != static_cast<Eigen::Index>(h.n_sys()) || K != static_cast<Eigen::Index>(h.n_modes()))
    throw ConfigurationError("eom_rhs: state and Hamiltonian dimensions differ");
  if (!s.all_finite()) throw NumericalHealthError("eom_rhs: non-finite variational parameters");

  const Eigen::MatrixXcd dw = debye_waller(s);
  const Eigen::MatrixXcd rho = s.A.conjugate() * s.A.transpose();
  const double nrm = rho.cwiseProduct(dw).sum().real();
  if (!(nrm < opt.max_norm)) throw NumericalHealthError("eom_rhs: norm " + std::to_string(nrm) + " outside guard");

  // Shifted system matrix applied to every component.
  Eigen::MatrixXcd hsys = h.system;
  hsys.diagonal().array() -= h.reference_energy;
  const Eigen::MatrixXcd hA = hsys * s.A.transpose();  // S x M

  // Boson energy sum_k w_k f*_mk f_m'k and per-mode transition densities A_m^+ G_k A_m'.
  Eigen::MatrixXcd wsum = Eigen::MatrixXcd::Zero(M, M);
  for (Eigen::Index k = 0; k < K; ++k)
    wsum += h.mode_frequencies[static_cast<std::size_t>(k)] * (s.f.col(k).conjugate() * s.f.col(k).transpose());
  std::vector<Eigen::MatrixXcd> gk(static_cast<std::size_t>(K), Eigen::MatrixXcd::Zero(M, M));
  for (const auto& c : h.couplings) {
    if (c.create == cplx(0.0)) continue;
    gk[c.mode] += c.create * (s.A.col(static_cast<Eigen::Index>(c.row)).conjugate() *
                              s.A.col(static_cast<Eigen::Index>(c.col)).transpose());
  }

  const Eigen::Index nA = M * S;
  const Eigen::Index n = M * (S + K);
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(n);
  Eigen::VectorXcd v(S);
  for (Eigen::Index a = 0; a < M; ++a) {
    for (Eigen::Index b = 0; b < M; ++b) {
      // v = H_eff(a, b) A_b
      v = hA.col(b) + wsum(a, b) * s.A.row(b).transpose();
      for (const auto& c : h.couplings) {
        const auto k = static_cast<Eigen::Index>(c.mode);
        v(static_cast<Eigen::Index>(c.row)) +=
            (c.create * std::conj(s.f(a, k)) + c.annihilate * s.f(b, k)) * s.A(b, static_cast<Eigen::Index>(c.col));
      }
      const cplx sab = dw(a, b);
      g.segment(a * S, S) += sab * v;
      cplx av = 0;
      for (Eigen::Index i = 0; i < S; ++i) av += std::conj(s.A(a, i)) * v(i);
      for (Eigen::Index k = 0; k < K; ++k) {
        g(nA + a * K + k) += sab * (s.f(b, k) * av + gk[static_cast<std::size_t>(k)](a, b) +
                                    h.mode_frequencies[static_cast<std::size_t>(k)] * s.f(b, k) * rho(a, b));
      }
    }
  }

  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index a = 0; a < M; ++a) {
    for (Eigen::Index b = 0; b < M; ++b) {
      const cplx sab = dw(a, b);
      for (Eigen::Index i = 0; i < S; ++i) C(a * S + i, b * S + i) = sab;
      for (Eigen::Index i = 0; i < S; ++i)
        for (Eigen::Index k = 0; k < K; ++k) {
          const cplx val = sab * s.A(b, i) * std::conj(s.f(a, k));
          C(a * S + i, nA + b * K + k) = val;
          C(nA + b * K + k, a * S + i) = std::conj(val);
        }
      const cplx rs = rho(a, b) * sab;
      for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index kp = 0; kp < K; ++kp)
          C(nA + a * K + k, nA + b * K + kp) = rs * ((k == kp ? 1.0 : 0.0) + std::conj(s.f(a, kp)) * s.f(b, k));
    }
  }

  const Eigen::MatrixXcd C0 = opt.conserve_norm ? C : Eigen::MatrixXcd();
  Eigen::VectorXcd x;
  if (opt.solver != MetricSolver::tikhonov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(C);
    if (es.info() != Eigen::Success || !es.eigenvalues().allFinite())
      throw AnsatzCollapseError("ansatz collapse: metric eigen-decomposition failed; increase noise_scale or reduce M");
    const Eigen::VectorXd& lam = es.eigenvalues();
    const double lmax = lam.maxCoeff();
    if (!(lmax > 0))
      throw AnsatzCollapseError("ansatz collapse: metric has no positive spectrum; increase noise_scale or reduce M");
    const Eigen::MatrixXcd& U = es.eigenvectors();
    Eigen::VectorXcd proj = U.adjoint() * g;
    const double eps = opt.metric_cutoff * lmax;
    if (opt.solver == MetricSolver::pseudo_inverse) {
      for (Eigen::Index i = 0; i < n; ++i) proj(i) = lam(i) > eps ? proj(i) / lam(i) : cplx(0.0);
    } else {
      for (Eigen::Index i = 0; i < n; ++i) proj(i) = lam(i) > 0 ? proj(i) * lam(i) / (lam(i) * lam(i) + eps * eps) : cplx(0.0);
    }
    x = U * proj;
  } else {
    // A single component has Schur complement rho * 1 and needs no shift.
    const double shift = M == 1 ? 0.0 : opt.metric_cutoff * C.diagonal().real().maxCoeff();
    C.diagonal().array() += shift;
    Eigen::LLT<Eigen::MatrixXcd> llt(C);
    if (llt.info() != Eigen::Success)
      throw AnsatzCollapseError("ansatz collapse: regularized metric is not positive definite");
    x = llt.solve(g);
  }
  if (!x.allFinite()) throw AnsatzCollapseError("ansatz collapse: non-finite metric solution");
  if (opt.conserve_norm) {
    // The state is the tangent vector (Y, df) = (A, 0); exact solutions give a real <psi|C|x>.
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
    for (Eigen::Index a = 0; a < M; ++a) v.segment(a * S, S) = s.A.row(a).transpose();
    const cplx r = v.dot(C0 * x);
    x -= cplx(0.0, r.imag() / nrm) * v;
  }
  x *= cplx(0.0, -opt.direction / kHbar);

  Derivative d;
  d.dA.resize(M, S);
  d.df.resize(M, K);
  for (Eigen::Index a = 0; a < M; ++a) {
    for (Eigen::Index k = 0; k < K; ++k) d.df(a, k) = x(nA + a * K + k);
    const double growth = (s.f.row(a).conjugate() * d.df.row(a).transpose())(0).real();
    for (Eigen::Index i = 0; i < S; ++i) d.dA(a, i) = x(a * S + i) + s.A(a, i) * growth;
  }
  return d;
}

}  // namespace polariton
