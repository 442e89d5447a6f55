// runner/run.hpp - experiment dispatch, ensemble reduction, checkpointed 2D spectra, oracle pairs
#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "polariton/disorder.hpp"
#include "polariton/fock.hpp"
#include "polariton/mdav2/absorption.hpp"
#include "polariton/mdav2/checkpoint.hpp"
#include "polariton/mdav2/propagate.hpp"
#include "polariton/parallel.hpp"
#include "polariton/runner/config.hpp"
#include "polariton/runner/io.hpp"
#include "polariton/sf_polariton.hpp"
#include "polariton/spectro.hpp"
#include "polariton/tc_exact.hpp"
#include "polariton/thermo_field.hpp"

namespace polariton::runner {

// Thrown by the checkpoint hook to emulate an interrupted run.
class Interrupted : public Error {
 public:
  using Error::Error;
};

// Process exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,
  kExitParse = 2,
  kExitConstraint = 3,
  kExitUnsupported = 4,
  kExitOracleFail = 5,
  kExitUsage = 64,
};

inline int exit_code(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return kExitParse;
  if (dynamic_cast<const UnsupportedError*>(&e)) return kExitUnsupported;
  if (dynamic_cast<const ConfigurationError*>(&e)) return kExitConstraint;
  return kExitRuntime;
}

struct RunOptions {
  unsigned workers = 1;
  bool resume = false;
  // Stops a spectra2d run after this many freshly written checkpoints (0: never).
  std::size_t interrupt_after_checkpoints = 0;
};

struct OracleCheck {
  std::string invariant;
  double deviation = 0;
  double tolerance = 0;
  bool pass() const { return deviation <= tolerance; }
};

struct OracleReport {
  std::string pair;
  std::vector<OracleCheck> checks;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass()) return false;
    return !checks.empty();
  }
  std::string csv() const {
    std::ostringstream os;
    os << "pair,invariant,deviation,tolerance,pass\n";
    for (const auto& c : checks)
      os << pair << ',' << c.invariant << ',' << csv_number(c.deviation) << ',' << csv_number(c.tolerance) << ','
         << (c.pass() ? "true" : "false") << '\n';
    return os.str();
  }
};

struct RunResult {
  std::vector<std::string> files;  // data files, in write order
  std::optional<OracleReport> oracle;
  RunManifest manifest;
};

namespace detail {

inline std::vector<double> sample_times(const RunSection& r) {
  const auto n = static_cast<std::size_t>(std::llround(r.t_max_fs / r.sample_dt_fs));
  std::vector<double> t(n + 1);
  for (std::size_t i = 0; i <= n; ++i) t[i] = static_cast<double>(i) * r.sample_dt_fs;
  return t;
}

inline std::vector<double> omega_grid(double lo, double hi, double step) {
  return FrequencyAxis{lo, hi, step}.values();
}

inline std::string suffixed(const std::string& stem, const RunConfig& c, double width) {
  if (c.disorder.widths.size() == 1) return stem + ".csv";
  return stem + "_W" + format_double(width) + ".csv";
}

inline DisorderSpec disorder_spec(const RunConfig& c, double width) {
  return {width, c.disorder.n_realizations, c.run.seed};
}

inline HamiltonianAction ensemble_action(const RunConfig& c, const std::vector<double>& freqs) {
  HamiltonianAction h;
  if (c.model == ModelKind::htc) {
    PhononBathSpec b = c.bath;
    b.n_modes = c.qubits.n_qubits;
    h = build_htc(c.cavity, c.qubits, b, freqs);
  } else {
    h = build_tc(c.cavity, c.qubits, freqs);
  }
  h.reference_energy = c.cavity.omega_c;
  return h;
}

inline PropagationOptions propagation(const RunConfig& c, bool keep_states) {
  PropagationOptions p;
  p.t_max = c.run.t_max_fs;
  p.sample_dt = c.run.sample_dt_fs;
  p.rel_tol = c.run.rel_tol;
  p.abs_tol = c.run.abs_tol;
  p.keep_states = keep_states;
  return p;
}

// Realization j of the ensemble under the variational engine (thermal when T > 0).
inline Trajectory ensemble_trajectory(const RunConfig& c, double width, std::size_t j, bool keep_states,
                                      const PropagationOptions* override_opt = nullptr) {
  const auto freqs = sample_disorder(disorder_spec(c, width), c.qubits.omega0, c.qubits.n_qubits, static_cast<int>(j));
  const HamiltonianAction h = ensemble_action(c, freqs);
  const PropagationOptions p = override_opt ? *override_opt : propagation(c, keep_states);
  const std::uint64_t seed = c.run.seed + j;
  if (c.temperature_K > 0) {
    ThermalOptions t;
    t.temperature_K = c.temperature_K;
    return thermal_propagate(h, t, 0, c.run.multiplicity, seed, p, c.run.noise_scale).trajectory;
  }
  return propagate(init_state(h.n_sys(), h.n_modes(), 0, c.run.multiplicity, seed, c.run.noise_scale), h, p);
}

// Rows of (p_photon, p_qubits_total, norm, energy) per sample time.
using PopulationRows = std::vector<std::array<double, 4>>;

inline PopulationRows exact_tc_rows(const RunConfig& c, double width, std::size_t j, const std::vector<double>& times) {
  const auto freqs = sample_disorder(disorder_spec(c, width), c.qubits.omega0, c.qubits.n_qubits, static_cast<int>(j));
  const HamiltonianAction h = build_tc(c.cavity, c.qubits, freqs);
  const auto sol = solve_realization(h);
  PopulationRows rows(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    Eigen::VectorXcd psi(static_cast<Eigen::Index>(h.n_sys()));
    psi(0) = sol.photon_amplitude(times[i]);
    psi.tail(psi.size() - 1) = sol.qubit_amplitudes(times[i]);
    const double pp = std::norm(psi(0));
    const double pq = psi.tail(psi.size() - 1).squaredNorm();
    rows[i] = {pp, pq, pp + pq, psi.dot(h.system * psi).real()};
  }
  return rows;
}

inline PopulationRows variational_rows(const RunConfig& c, double width, std::size_t j) {
  const Trajectory tr = ensemble_trajectory(c, width, j, true);
  PopulationRows rows(tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const Eigen::VectorXd pop = label_populations(tr.states[i]);
    const double pp = pop(0);
    rows[i] = {pp, pop.sum() - pp, tr.norms[i], tr.energies[i]};
  }
  return rows;
}

inline void write_ensemble_dynamics(const RunConfig& c, const RunOptions& o, OutputWriter& w, RunResult& r) {
  const auto times = sample_times(c.run);
  for (double width : c.disorder.widths) {
    const auto n = static_cast<std::size_t>(c.disorder.n_realizations);
    auto per = parallel_map(n, o.workers, [&](std::size_t j) {
      return c.engine() == Engine::exact ? exact_tc_rows(c, width, j, times) : variational_rows(c, width, j);
    });
    CsvTable t{{"time_fs", "p_photon", "p_qubits_total", "norm", "energy_eV"}, {}};
    for (std::size_t i = 0; i < times.size(); ++i) {
      std::array<double, 4> avg{};
      for (const auto& rows : per)
        for (std::size_t k = 0; k < 4; ++k) avg[k] += rows[i][k];
      for (auto& v : avg) v /= static_cast<double>(n);
      t.add({times[i], avg[0], avg[1], avg[2], avg[3]});
    }
    const std::string name = suffixed("population", c, width);
    w.write(name, t.str());
    r.files.push_back(name);
  }
}

inline std::vector<SFDimerSpec> sf_dimers(const RunConfig& c) {
  return std::vector<SFDimerSpec>(static_cast<std::size_t>(c.sf.coupling.n_dimers), c.sf.dimer);
}

inline void write_sf_dynamics(const RunConfig& c, OutputWriter& w, RunResult& r) {
  SfDynamicsOptions o;
  o.engine = c.engine() == Engine::mdav2 ? SfEngine::mdav2 : SfEngine::fock;
  o.t_max = c.run.t_max_fs;
  o.sample_dt = c.run.sample_dt_fs;
  o.multiplicity = c.run.multiplicity;
  o.seed = c.run.seed;
  o.noise_scale = c.run.noise_scale;
  o.propagation.rel_tol = c.run.rel_tol;
  o.propagation.abs_tol = c.run.abs_tol;
  o.tu_cutoff = c.sf.tu_cutoff;
  o.cu_cutoff = c.sf.cu_cutoff;
  CavitySpec cav;
  cav.omega_c = c.sf.omega_c;
  cav.n_max = c.sf.n_max;
  const SfRun run = sf_run(sf_dimers(c), cav, c.sf.coupling, std::sqrt(c.sf.pump_photons), o);
  CsvTable t{{"time_fs", "p_tt", "p_s1", "p_cav", "n_ex", "norm", "energy_eV"}, {}};
  for (const auto& s : run.samples) t.add({s.time_fs, s.p_tt, s.p_s1, s.p_cav, s.n_ex, s.norm, s.energy});
  w.write("population.csv", t.str());
  r.files.push_back("population.csv");
}

inline void write_absorption(const RunConfig& c, const RunOptions& o, OutputWriter& w, RunResult& r) {
  const auto grid = omega_grid(c.absorption.omega_min, c.absorption.omega_max, c.absorption.omega_step);
  for (double width : c.disorder.widths) {
    std::vector<double> f;
    if (c.engine() == Engine::exact) {
      // Uniform damping gamma' on every level is the exact counterpart of the exp(-gamma' t) window.
      TcEnsembleModel m{c.cavity, c.qubits};
      m.cavity.kappa += c.absorption.gamma_prime;
      m.qubits.gamma += c.absorption.gamma_prime;
      f = ensemble_absorption(disorder_spec(c, width), m, grid, o.workers);
    } else {
      const auto n = static_cast<std::size_t>(c.disorder.n_realizations);
      auto per = parallel_map(n, o.workers, [&](std::size_t j) {
        return absorption_from_autocorrelation(ensemble_trajectory(c, width, j, true), c.absorption.gamma_prime, grid)
            .intensity;
      });
      f.assign(grid.size(), 0.0);
      for (const auto& p : per)
        for (std::size_t i = 0; i < grid.size(); ++i) f[i] += p[i];
      for (auto& v : f) v /= static_cast<double>(n);
    }
    CsvTable t{{"omega_eV", "intensity"}, {}};
    for (std::size_t i = 0; i < grid.size(); ++i) t.add({grid[i], f[i]});
    const std::string name = suffixed("absorption", c, width);
    w.write(name, t.str());
    r.files.push_back(name);
  }
}

inline void write_pes(const RunConfig& c, const RunOptions& o, OutputWriter& w, RunResult& r) {
  CavitySpec cav;
  cav.omega_c = c.sf.omega_c;
  cav.n_max = c.sf.n_max;
  const SfModel m = build_sf(sf_dimers(c), cav, c.sf.coupling);
  std::vector<double> q(c.pes.n_points);
  for (std::size_t i = 0; i < q.size(); ++i)
    q[i] = c.pes.q_min + (c.pes.q_max - c.pes.q_min) * static_cast<double>(i) / static_cast<double>(q.size() - 1);
  const std::set<int> filter(c.pes.manifolds.begin(), c.pes.manifolds.end());
  const auto nodes = pes_scan(m, q, c.pes.q_c, filter, o.workers);
  CsvTable t{{"q_t", "surface", "energy_eV", "manifold", "w_tt", "w_ph"}, {}};
  for (const auto& node : nodes)
    for (std::size_t s = 0; s < node.size(); ++s)
      t.add({node[s].q_t, static_cast<double>(s), node[s].energy, node[s].manifold, node[s].w_tt, node[s].w_ph});
  w.write("pes.csv", t.str());
  r.files.push_back("pes.csv");
}

// ---- spectra2d with per-T_w checkpoints ----

inline std::string tw_tag(double t_w) { return format_double(t_w); }

inline fs::path checkpoint_path(const fs::path& dir, double t_w) {
  return dir / "checkpoints" / ("response_Tw" + tw_tag(t_w) + ".chk");
}

inline void write_response_checkpoint(const fs::path& p, const std::string& config_hash, const ResponseSet& s) {
  std::ostringstream os;
  os << "config_sha256 " << config_hash << "\n";
  os << "esa " << (s.has_esa ? 1 : 0) << "\n";
  polariton::detail::write_matrix(os, "R1", s.R1[0]);
  polariton::detail::write_matrix(os, "R2", s.R2[0]);
  polariton::detail::write_matrix(os, "R3", s.R3[0]);
  polariton::detail::write_matrix(os, "R4", s.R4[0]);
  if (s.has_esa) {
    polariton::detail::write_matrix(os, "R1s", s.R1s[0]);
    polariton::detail::write_matrix(os, "R2s", s.R2s[0]);
  }
  fs::create_directories(p.parent_path());
  atomic_write(p, os.str());
}

// Loads a checkpoint written for the same configuration; anything else yields nullopt.
inline std::optional<ResponseSet> read_response_checkpoint(const fs::path& p, const std::string& config_hash,
                                                           const ResponseGrid& g) {
  if (!fs::exists(p)) return std::nullopt;
  std::istringstream is(read_file(p));
  std::string tag, hash;
  int esa = 0;
  if (!(is >> tag >> hash) || tag != "config_sha256" || hash != config_hash) return std::nullopt;
  if (!(is >> tag >> esa) || tag != "esa") return std::nullopt;
  ResponseSet s;
  s.grid = g;
  s.has_esa = esa != 0;
  const auto rows = static_cast<Eigen::Index>(g.n_tau), cols = static_cast<Eigen::Index>(g.n_t);
  auto load = [&](const char* name, std::vector<Eigen::MatrixXcd>& dst) {
    Eigen::MatrixXcd m(rows, cols);
    polariton::detail::read_matrix(is, name, m);
    dst.push_back(std::move(m));
  };
  try {
    load("R1", s.R1);
    load("R2", s.R2);
    load("R3", s.R3);
    load("R4", s.R4);
    if (s.has_esa) {
      load("R1s", s.R1s);
      load("R2s", s.R2s);
    }
  } catch (const Error&) {
    return std::nullopt;
  }
  return s;
}

inline ResponseSet responses_at(const RunConfig& c, const SfSpectroModel& sm, const ResponseGrid& g, unsigned workers) {
  ResponseOptions ro;
  ro.include_esa = c.spectra2d.include_esa;
  ro.workers = workers;
  DipoleSet dip;
  if (c.engine() == Engine::mdav2) {
    PropagationOptions p;
    p.rel_tol = c.run.rel_tol;
    p.abs_tol = c.run.abs_tol;
    const Mdav2Backend b(sm.model.action, sm.raising, sm.ground_label, c.run.multiplicity, c.run.seed, c.run.noise_scale, p);
    return compute_responses(b, g, dip, ro);
  }
  std::vector<int> cut;
  for (int j = 0; j < c.sf.coupling.n_dimers; ++j) {
    cut.push_back(c.sf.tu_cutoff);
    cut.push_back(c.sf.cu_cutoff);
  }
  const FockBackend b(sm.model.action, cut, sm.raising, sm.ground_label);
  return compute_responses(b, g, dip, ro);
}

inline void write_spectra2d(const RunConfig& c, const RunOptions& o, OutputWriter& w, RunResult& r) {
  const SfSpectroModel sm = sf_spectro_model(sf_dimers(c), c.sf.omega_c, c.sf.coupling.Omega);
  const std::string hash = sha256_hex(to_ini(c, false));
  std::size_t fresh = 0;
  for (double t_w : c.spectra2d.grid.t_w) {
    ResponseGrid g = c.spectra2d.grid;
    g.t_w = {t_w};
    const fs::path cp = checkpoint_path(w.dir(), t_w);
    std::optional<ResponseSet> rs;
    if (o.resume) rs = read_response_checkpoint(cp, hash, g);
    if (!rs) {
      rs = responses_at(c, sm, g, o.workers);
      write_response_checkpoint(cp, hash, *rs);
      if (o.interrupt_after_checkpoints && ++fresh >= o.interrupt_after_checkpoints)
        throw Interrupted("spectra2d interrupted after " + std::to_string(fresh) + " checkpoint(s)");
    }
    const auto sp = spectra(*rs, c.spectra2d.omega, c.spectra2d.omega).front();
    CsvTable t{{"omega_tau_eV", "omega_t_eV", "se", "gsb", "esa", "total"}, {}};
    for (std::size_t a = 0; a < sp.se.omega_tau.size(); ++a)
      for (std::size_t b = 0; b < sp.se.omega_t.size(); ++b) {
        const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b);
        t.add({sp.se.omega_tau[a], sp.se.omega_t[b], sp.se.map(ia, ib).real(), sp.gsb.map(ia, ib).real(),
               sp.esa.map(ia, ib).real(), sp.total.map(ia, ib).real()});
      }
    const std::string name = "spectrum2d_Tw" + tw_tag(t_w) + ".csv";
    w.write(name, t.str());
    r.files.push_back(name);
  }
}

// ---- oracle pairs ----

inline OracleReport oracle_compare(const RunConfig& c) {
  OracleReport rep;
  rep.pair = to_string(c.oracle.pair);
  const double width = c.disorder.widths.front();
  PropagationOptions p = propagation(c, true);
  p.eom.metric_cutoff = c.oracle.metric_cutoff;
  const Trajectory tr = ensemble_trajectory(c, width, 0, true, &p);
  std::vector<double> ref_ph(tr.size()), ref_q(tr.size());
  if (c.oracle.pair == OraclePair::tc_exact) {
    const auto rows = exact_tc_rows(c, width, 0, tr.times);
    for (std::size_t i = 0; i < tr.size(); ++i) {
      ref_ph[i] = rows[i][0];
      ref_q[i] = rows[i][1];
    }
  } else {
    const auto freqs = sample_disorder(disorder_spec(c, width), c.qubits.omega0, c.qubits.n_qubits, 0);
    const HamiltonianAction h = ensemble_action(c, freqs);
    const auto d = build_dense_fock(h, std::vector<int>(h.n_modes(), c.oracle.fock_cutoff));
    const auto ex = dense_propagate(d, embed_state(d, init_state(h.n_sys(), h.n_modes(), 0, 1, 0)), tr.times);
    for (std::size_t i = 0; i < tr.size(); ++i) {
      ref_ph[i] = fock_label_population(d, ex[i], 0);
      for (std::size_t l = 1; l < h.n_sys(); ++l) ref_q[i] += fock_label_population(d, ex[i], l);
    }
  }
  OracleCheck ph{"p_photon", 0, c.oracle.resolved_tolerance()};
  OracleCheck q{"p_qubits_total", 0, c.oracle.resolved_tolerance()};
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const Eigen::VectorXd pop = label_populations(tr.states[i]);
    ph.deviation = std::max(ph.deviation, std::abs(pop(0) - ref_ph[i]));
    q.deviation = std::max(q.deviation, std::abs(pop.sum() - pop(0) - ref_q[i]));
  }
  rep.checks = {ph, q};
  return rep;
}

}  // namespace detail

// Sup-norm deviations of the variational engine from the pair's reference solver.
inline OracleReport oracle_compare(const RunConfig& c) {
  c.validate();
  if (c.experiment != ExperimentKind::oracle_compare) throw ConfigurationError("oracle_compare: experiment must be oracle-compare");
  return detail::oracle_compare(c);
}

// Validated configuration in, data files and manifest out. On failure every data file of
// the run is removed and no manifest is left behind; spectra2d checkpoints survive.
inline RunResult run(const RunConfig& c, const RunOptions& o = {}) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  OutputWriter w(c.output);
  RunResult r;
  w.begin();
  try {
    switch (c.experiment) {
      case ExperimentKind::dynamics:
        if (c.model == ModelKind::sf)
          detail::write_sf_dynamics(c, w, r);
        else
          detail::write_ensemble_dynamics(c, o, w, r);
        break;
      case ExperimentKind::absorption: detail::write_absorption(c, o, w, r); break;
      case ExperimentKind::pes_scan: detail::write_pes(c, o, w, r); break;
      case ExperimentKind::spectra2d: detail::write_spectra2d(c, o, w, r); break;
      case ExperimentKind::oracle_compare:
        r.oracle = detail::oracle_compare(c);
        w.write("oracle.csv", r.oracle->csv());
        r.files.push_back("oracle.csv");
        break;
    }
  } catch (...) {
    w.discard();
    throw;
  }
  r.manifest.config = to_ini(c);
  r.manifest.seed = c.run.seed;
  r.manifest.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  w.commit(r.manifest);
  r.manifest.checksums = w.checksums();
  if (c.experiment == ExperimentKind::spectra2d) {
    std::error_code ec;
    fs::remove_all(fs::path(c.output) / "checkpoints", ec);
  }
  return r;
}

}  // namespace polariton::runner
