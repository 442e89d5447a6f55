// mdav2/propagate.hpp - adaptive Dormand-Prince propagation with dense sampling
#pragma once

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "polariton/errors.hpp"
#include "polariton/mdav2/eom.hpp"
#include "polariton/mdav2/state.hpp"
#include "polariton/model.hpp"

namespace polariton {

struct PropagationOptions {
  double t_max = 100.0;
  double sample_dt = 0.1;
  double rel_tol = 1e-6;
  double abs_tol = 1e-8;
  double initial_step = 1e-2;
  double max_step = 0.0;  // 0: unlimited
  double min_step = 1e-6;
  bool keep_states = true;
  std::size_t max_guard_retries = 0;  // step-size retries after a norm-guard trip inside a trial stage
  EomOptions eom;

  void validate() const {
    if (!(t_max >= 0)) throw ConfigurationError("t_max must be >= 0");
    if (!(sample_dt > 0)) throw ConfigurationError("sample_dt must be > 0");
    if (!(rel_tol > 0) || !(abs_tol > 0)) throw ConfigurationError("tolerances must be > 0");
  }
};

struct Trajectory {
  std::vector<double> times;  // signed: negative when integrated backwards
  std::vector<MultiD2State> states;
  std::vector<double> norms;
  std::vector<double> energies;
  std::vector<double> step_times;
  std::vector<double> step_norms;
  double reference_energy = 0.0;
  std::size_t accepted_steps = 0;
  std::size_t rhs_evaluations = 0;

  std::size_t size() const { return times.size(); }

  double max_norm_drift() const {
    double d = 0;
    for (double n : norms) d = std::max(d, std::abs(n - 1.0));
    return d;
  }
  double max_energy_drift() const {
    double d = 0;
    for (double e : energies) d = std::max(d, std::abs(e - energies.front()));
    return d;
  }
  // Largest increase of the norm between consecutive accepted steps.
  double max_step_norm_increase() const {
    double d = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < step_norms.size(); ++i) d = std::max(d, step_norms[i] - step_norms[i - 1]);
    return d;
  }
  std::vector<double> series(const std::function<double(const MultiD2State&)>& obs) const {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(obs(s));
    return out;
  }
};

namespace detail {

using OdeState = std::vector<double>;

inline OdeState pack(const MultiD2State& s) {
  OdeState x(2 * static_cast<std::size_t>(s.A.size() + s.f.size()));
  auto* z = reinterpret_cast<cplx*>(x.data());
  Eigen::Map<Eigen::MatrixXcd>(z, s.A.rows(), s.A.cols()) = s.A;
  Eigen::Map<Eigen::MatrixXcd>(z + s.A.size(), s.f.rows(), s.f.cols()) = s.f;
  return x;
}

inline void unpack(const OdeState& x, MultiD2State& s) {
  const auto* z = reinterpret_cast<const cplx*>(x.data());
  s.A = Eigen::Map<const Eigen::MatrixXcd>(z, s.A.rows(), s.A.cols());
  s.f = Eigen::Map<const Eigen::MatrixXcd>(z + s.A.size(), s.f.rows(), s.f.cols());
}

}  // namespace detail

// Samples at t = i * sample_dt (times the direction sign) for i = 0..round(t_max / sample_dt).
inline Trajectory propagate(const MultiD2State& initial, const HamiltonianAction& h,
                            const PropagationOptions& opt = {}) {
  namespace ode = boost::numeric::odeint;
  opt.validate();
  h.check_consistency();
  if (initial.n_sys() != h.n_sys() || initial.n_modes() != h.n_modes())
    throw ConfigurationError("propagate: state and Hamiltonian dimensions differ");

  Trajectory tr;
  tr.reference_energy = h.reference_energy;
  const double sign = opt.eom.direction < 0 ? -1.0 : 1.0;
  MultiD2State work = initial;
  std::size_t evaluations = 0;
  auto rhs = [&](const detail::OdeState& x, detail::OdeState& dxdt, double) {
    detail::unpack(x, work);
    const Derivative d = eom_rhs(work, h, opt.eom);
    dxdt.resize(x.size());
    auto* z = reinterpret_cast<cplx*>(dxdt.data());
    Eigen::Map<Eigen::MatrixXcd>(z, d.dA.rows(), d.dA.cols()) = d.dA;
    Eigen::Map<Eigen::MatrixXcd>(z + d.dA.size(), d.df.rows(), d.df.cols()) = d.df;
    ++evaluations;
  };

  auto record = [&](double t, const MultiD2State& s) {
    tr.times.push_back(sign * t);
    tr.norms.push_back(norm_squared(s));
    tr.energies.push_back(energy(s, h));
    if (opt.keep_states) tr.states.push_back(s);
  };

  const auto n_samples = static_cast<std::size_t>(std::llround(opt.t_max / opt.sample_dt));
  auto stepper = ode::make_dense_output(opt.abs_tol, opt.rel_tol, opt.max_step,
                                        ode::runge_kutta_dopri5<detail::OdeState>());
  detail::OdeState x0 = detail::pack(initial);
  stepper.initialize(x0, 0.0, opt.initial_step);
  record(0.0, initial);
  tr.step_times.push_back(0.0);
  tr.step_norms.push_back(tr.norms.front());

  detail::OdeState xs(x0.size());
  MultiD2State sample = initial;
  std::size_t next = 1;
  std::size_t retries = 0;
  try {
    while (next <= n_samples) {
      const double target = std::min(static_cast<double>(next) * opt.sample_dt, opt.t_max);
      while (stepper.current_time() < target) {
        try {
          stepper.do_step(rhs);
        } catch (const NumericalHealthError&) {
          // A trial stage left the guarded region: retry from the last accepted state with a smaller step.
          if (++retries > opt.max_guard_retries) throw;
          const double t = stepper.current_time();
          detail::OdeState xc = stepper.current_state();
          stepper.initialize(xc, t, 0.25 * stepper.current_time_step());
          continue;
        }
        ++tr.accepted_steps;
        if (stepper.current_time_step() < opt.min_step)
          throw StepUnderflowError("step size " + std::to_string(stepper.current_time_step()) +
                                   " fs below minimum at t=" + std::to_string(stepper.current_time()) + " fs");
        detail::unpack(stepper.current_state(), sample);
        if (!sample.all_finite())
          throw NumericalHealthError("non-finite parameters at t=" + std::to_string(stepper.current_time()) + " fs");
        tr.step_times.push_back(sign * stepper.current_time());
        tr.step_norms.push_back(norm_squared(sample));
      }
      while (next <= n_samples && std::min(static_cast<double>(next) * opt.sample_dt, opt.t_max) <= stepper.current_time()) {
        const double t = std::min(static_cast<double>(next) * opt.sample_dt, opt.t_max);
        stepper.calc_state(t, xs);
        detail::unpack(xs, sample);
        record(t, sample);
        ++next;
      }
    }
  } catch (const ode::step_adjustment_error& e) {
    throw StepUnderflowError(std::string("step adjustment failed near t=") +
                             std::to_string(stepper.current_time()) + " fs: " + e.what());
  }
  tr.rhs_evaluations = evaluations;
  return tr;
}

}  // namespace polariton
