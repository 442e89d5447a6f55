// mdav2/checkpoint.hpp - versioned plain-text trajectory and state records
//
// Every real number is written with 17 significant digits, which round-trips
// IEEE doubles exactly, so a restart from a checkpoint is bit-identical.
#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "polariton/errors.hpp"
#include "polariton/mdav2/propagate.hpp"
#include "polariton/mdav2/state.hpp"

namespace polariton {

inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_matrix(std::ostream& os, const char* tag, const Eigen::MatrixXcd& m) {
  os << tag;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << ' ' << fmt17(m(i, j).real()) << ' ' << fmt17(m(i, j).imag());
  os << '\n';
}

inline void read_matrix(std::istream& is, const char* tag, Eigen::MatrixXcd& m) {
  std::string t;
  if (!(is >> t) || t != tag) throw ConfigurationError(std::string("checkpoint: expected '") + tag + "'");
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      double re, im;
      if (!(is >> re >> im)) throw ConfigurationError(std::string("checkpoint: truncated '") + tag + "' record");
      m(i, j) = cplx(re, im);
    }
}

template <class T>
void expect_field(std::istream& is, const char* key, T& value) {
  std::string k;
  if (!(is >> k) || k != key || !(is >> value))
    throw ConfigurationError(std::string("checkpoint: expected field '") + key + "'");
}

}  // namespace detail

inline void write_state(std::ostream& os, const MultiD2State& s) {
  os << "polariton-state " << kCheckpointVersion << '\n'
     << "multiplicity " << s.multiplicity() << "\nn_sys " << s.n_sys() << "\nn_modes " << s.n_modes() << '\n';
  detail::write_matrix(os, "A", s.A);
  detail::write_matrix(os, "f", s.f);
}

inline MultiD2State read_state(std::istream& is) {
  int version = 0;
  detail::expect_field(is, "polariton-state", version);
  if (version != kCheckpointVersion) throw ConfigurationError("checkpoint: unsupported version " + std::to_string(version));
  std::size_t m = 0, s = 0, k = 0;
  detail::expect_field(is, "multiplicity", m);
  detail::expect_field(is, "n_sys", s);
  detail::expect_field(is, "n_modes", k);
  MultiD2State st(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k));
  detail::read_matrix(is, "A", st.A);
  detail::read_matrix(is, "f", st.f);
  return st;
}

inline void write_trajectory(std::ostream& os, const Trajectory& tr) {
  if (tr.states.size() != tr.times.size()) throw ConfigurationError("checkpoint: trajectory without states");
  const MultiD2State& s0 = tr.states.front();
  os << "polariton-trajectory " << kCheckpointVersion << '\n'
     << "multiplicity " << s0.multiplicity() << "\nn_sys " << s0.n_sys() << "\nn_modes " << s0.n_modes() << '\n'
     << "reference_energy " << detail::fmt17(tr.reference_energy) << '\n'
     << "samples " << tr.times.size() << '\n';
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    os << "t " << detail::fmt17(tr.times[i]) << " norm " << detail::fmt17(tr.norms[i]) << " energy "
       << detail::fmt17(tr.energies[i]) << '\n';
    detail::write_matrix(os, "A", tr.states[i].A);
    detail::write_matrix(os, "f", tr.states[i].f);
  }
}

inline Trajectory read_trajectory(std::istream& is) {
  int version = 0;
  detail::expect_field(is, "polariton-trajectory", version);
  if (version != kCheckpointVersion) throw ConfigurationError("checkpoint: unsupported version " + std::to_string(version));
  std::size_t m = 0, s = 0, k = 0, n = 0;
  Trajectory tr;
  detail::expect_field(is, "multiplicity", m);
  detail::expect_field(is, "n_sys", s);
  detail::expect_field(is, "n_modes", k);
  detail::expect_field(is, "reference_energy", tr.reference_energy);
  detail::expect_field(is, "samples", n);
  for (std::size_t i = 0; i < n; ++i) {
    double t, nrm, e;
    detail::expect_field(is, "t", t);
    detail::expect_field(is, "norm", nrm);
    detail::expect_field(is, "energy", e);
    MultiD2State st(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k));
    detail::read_matrix(is, "A", st.A);
    detail::read_matrix(is, "f", st.f);
    tr.times.push_back(t);
    tr.norms.push_back(nrm);
    tr.energies.push_back(e);
    tr.states.push_back(std::move(st));
  }
  return tr;
}

}  // namespace polariton
