// Acceptance run: one PASS/FAIL line per criterion. Criteria 1-10 run twice into
// <out>/first and <out>/second; criterion 11 compares every data file byte by byte.
#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "polariton/polariton.hpp"
#include "response_oracle.hpp"

using namespace polariton;
using namespace polariton::runner;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome(const fs::path&)> body;
};

std::string num(double x, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::vector<double> column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error("missing column " + name);
    const auto k = static_cast<std::size_t>(it - header.begin());
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[k]);
    return out;
  }
};

Table read_csv(const fs::path& p) {
  std::istringstream is(read_file(p));
  Table t;
  std::string line, cell;
  std::getline(is, line);
  std::stringstream hs(line);
  while (std::getline(hs, cell, ',')) t.header.push_back(cell);
  while (std::getline(is, line)) {
    std::stringstream ss(line);
    std::vector<double> r;
    while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
    t.rows.push_back(std::move(r));
  }
  return t;
}

std::string replaced(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  if (at == std::string::npos) throw Error("config line not found: " + from);
  return text.replace(at, from.size(), to);
}

std::string config_file(const char* name) { return read_file(fs::path(POLARITON_CONFIG_DIR) / name); }

RunResult run_text(const std::string& text, const fs::path& out) {
  RunConfig c = validate_config(text);
  c.output = out.string();
  return run(c);
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + static_cast<long>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
  double s = 0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    if (x[i] >= lo - 1e-12 && x[i + 1] <= hi + 1e-12) s += 0.5 * (x[i + 1] - x[i]) * (y[i] + y[i + 1]);
  return s;
}

// Least-squares fit a + b cos(2 pi t / P) + c sin(2 pi t / P) (+ d t) scanned over P; returns the best P.
double best_cosine_period(const std::vector<double>& t, const std::vector<double>& y, double p_lo, double p_hi,
                          double p_step, bool trend = false) {
  double best_p = p_lo, best_r = 1e300;
  for (double P = p_lo; P <= p_hi + 1e-12; P += p_step) {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(t.size()), trend ? 4 : 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      A(r, 0) = 1.0;
      A(r, 1) = std::cos(2 * kPi * t[i] / P);
      A(r, 2) = std::sin(2 * kPi * t[i] / P);
      if (trend) A(r, 3) = t[i];
      b(r) = y[i];
    }
    const Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
    const double res = (A * x - b).squaredNorm();
    if (res < best_r) {
      best_r = res;
      best_p = P;
    }
  }
  return best_p;
}

// ---- 1. resonant TC Rabi ----

Outcome c1(const fs::path& dir) {
  run_text(replaced(config_file("tc_rabi.ini"), "sample_dt_fs = 0.5", "sample_dt_fs = 0.05"), dir);
  const Table t = read_csv(dir / "population.csv");
  const auto time = t.column("time_fs"), p = t.column("p_photon");
  double dev = 0;
  for (std::size_t i = 0; i < p.size(); ++i) dev = std::max(dev, std::abs(p[i] - std::pow(std::cos(0.1 * time[i] / kHbar), 2)));
  std::vector<double> minima;
  for (std::size_t i = 1; i + 1 < p.size(); ++i)
    if (p[i] < p[i - 1] && p[i] <= p[i + 1]) {
      const double den = p[i - 1] - 2 * p[i] + p[i + 1];
      minima.push_back(time[i] + 0.5 * (time[i] - time[i - 1]) * (p[i - 1] - p[i + 1]) / den);
    }
  const double period = minima.size() >= 2 ? (minima.back() - minima.front()) / static_cast<double>(minima.size() - 1) : 0;
  return {dev <= 1e-5 && std::abs(period - 20.7) <= 0.1,
          "sup|P_ph - cos^2| = " + num(dev) + " (<= 1e-5), period = " + num(period, 6) + " fs (20.7 +- 0.1)"};
}

// ---- 2. TC absorption ----

Outcome c2(const fs::path& dir) {
  run_text(replaced(replaced(config_file("tc_absorption.ini"), "omega_min = 0.8", "omega_min = 0.6"), "omega_max = 1.2",
                    "omega_max = 1.4"),
           dir);
  const Table t = read_csv(dir / "absorption.csv");
  const auto w = t.column("omega_eV"), f = t.column("intensity");
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] < 1.0 && f[i] > f[lo]) lo = i;
    if (w[i] > 1.0 && (hi == 0 || f[i] > f[hi])) hi = i;
  }
  // Area on a wide grid with the same damping.
  TcEnsembleModel m{{1.0, 0.005, 1}, {100, 1.0, 0.005, 0.1}};
  const auto wide = FrequencyAxis{-49.0, 51.0, 0.0005}.values();
  const auto fw = ensemble_absorption({0.0, 1, 0}, m, wide);
  const double area = trapezoid(wide, fw, wide.front(), wide.back());
  CsvTable a{{"omega_min", "omega_max", "area"}, {}};
  a.add({wide.front(), wide.back(), area});
  atomic_write(dir / "area.csv", a.str());
  const bool ok = std::abs(w[lo] - 0.9) <= 0.002 && std::abs(w[hi] - 1.1) <= 0.002 && std::abs(area - 1.0) <= 0.01;
  return {ok, "peaks at " + num(w[lo], 6) + " and " + num(w[hi], 6) + " eV (0.9, 1.1 +- 0.002), area = " + num(area, 6) +
                  " (1 +- 0.01)"};
}

// ---- 3. disorder trends ----

Outcome c3(const fs::path& dir) {
  run_text(config_file("tc_disorder_sweep.ini"), dir / "population");
  std::vector<double> med;
  for (const char* w : {"0", "0.1", "0.2", "0.3"}) {
    const Table t = read_csv(dir / "population" / (std::string("population_W") + w + ".csv"));
    const auto time = t.column("time_fs"), p = t.column("p_photon");
    std::vector<double> window;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (time[i] >= 100 && time[i] <= 300) window.push_back(p[i]);
    med.push_back(median(window));
  }
  run_text(
      "experiment = absorption\n[model]\nkind = tc\nn_qubits = 100\nkappa = 0\n[run]\nseed = 2024\n"
      "[disorder]\nwidth = 0, 0.05, 0.1\nn_realizations = 100\n"
      "[absorption]\nomega_min = 0.6\nomega_max = 1.4\nomega_step = 0.002\ngamma_prime = 0.005\n",
      dir / "absorption");
  std::vector<double> plateau;
  for (const char* w : {"0", "0.05", "0.1"}) {
    const Table t = read_csv(dir / "absorption" / (std::string("absorption_W") + w + ".csv"));
    plateau.push_back(trapezoid(t.column("omega_eV"), t.column("intensity"), 0.95, 1.05));
  }
  const bool dec = med[0] > med[1] && med[1] > med[2] && med[2] > med[3];
  const bool inc = plateau[0] < plateau[1] && plateau[1] < plateau[2];
  return {dec && inc, "median P_ph[100,300] = " + num(med[0]) + ", " + num(med[1]) + ", " + num(med[2]) + ", " +
                          num(med[3]) + " (strictly decreasing); plateau[0.95,1.05] = " + num(plateau[0]) + ", " +
                          num(plateau[1]) + ", " + num(plateau[2]) + " (strictly increasing)"};
}

// ---- 4. HTC dense oracle ----

Outcome c4(const fs::path& dir) {
  const RunResult r = run_text(config_file("oracle_htc.ini"), dir);
  const auto& ph = r.oracle->checks.front();
  return {r.oracle->pass() && ph.tolerance == 1e-3, "sup|dP_ph| = " + num(ph.deviation) + " (<= 1e-3), M = 12, cutoff 10"};
}

// ---- 5. photon loss ----

Outcome c5(const fs::path& dir) {
  run_text(
      "[model]\nkind = htc\nomega_c = 1.0\nkappa = 0.006\nn_qubits = 10\nomega0 = 1.0\nomega_R = 0.1\n"
      "omega_k0 = 0.124\nbandwidth = 0.5\nlambda = 0.1\n"
      "[run]\nt_max_fs = 500\nsample_dt_fs = 1\nmultiplicity = 16\nseed = 3\n",
      dir);
  const Table t = read_csv(dir / "population.csv");
  const auto n = t.column("norm"), p = t.column("p_photon");
  std::size_t rises = 0;
  double worst_rise = 0;
  for (std::size_t i = 0; i + 1 < n.size(); ++i)
    if (n[i + 1] > n[i]) {
      ++rises;
      worst_rise = std::max(worst_rise, n[i + 1] - n[i]);
    }
  return {rises == 0 && p.back() < 0.01, "norm increases at " + std::to_string(rises) + " samples (largest " +
                                             num(worst_rise) + "), P_ph(500 fs) = " + num(p.back()) + " (< 0.01)"};
}

// ---- 6. thermo-field dynamics ----

std::string tfd_config(double T, double lambda) {
  return "temperature_K = " + num(T) + "\n[model]\nkind = htc\nn_qubits = 10\nomega_R = 0.1\nomega_k0 = 0.0124\n"
         "bandwidth = 0.5\nlambda = " + num(lambda) + "\n[run]\nt_max_fs = 250\nsample_dt_fs = 1\nmultiplicity = 16\nseed = 5\n";
}

Outcome c6(const fs::path& dir) {
  std::map<int, std::vector<double>> p, time;
  for (int T : {0, 10, 100, 200, 300}) {
    const fs::path d = dir / ("T" + std::to_string(T));
    run_text(tfd_config(T, 1.0), d);
    const Table t = read_csv(d / "population.csv");
    p[T] = t.column("p_photon");
    time[T] = t.column("time_fs");
  }
  double dev = 0;
  for (std::size_t i = 0; i < p[0].size(); ++i) dev = std::max(dev, std::abs(p[0][i] - p[10][i]));
  auto amplitude = [&](int T) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < p[T].size(); ++i)
      if (time[T][i] >= 150 && time[T][i] <= 250) {
        lo = std::min(lo, p[T][i]);
        hi = std::max(hi, p[T][i]);
      }
    return hi - lo;
  };
  const double a1 = amplitude(100), a2 = amplitude(200), a3 = amplitude(300);
  return {dev <= 5e-3 && a1 > a2 && a2 > a3, "(a) sup|P_ph(10 K) - P_ph(0 K)| = " + num(dev) +
                                                 " (<= 5e-3); (b) amplitude[150,250] at 100/200/300 K = " + num(a1) +
                                                 ", " + num(a2) + ", " + num(a3) + " (strictly decreasing)"};
}

// ---- 7. SF conical intersection ----

Outcome c7(const fs::path& dir) {
  const std::string text = config_file("sf_pes.ini");
  run_text(text, dir);
  const RunConfig c = validate_config(text);
  CavitySpec cav;
  cav.omega_c = c.sf.omega_c;
  cav.n_max = c.sf.n_max;
  const SfModel m = build_sf({c.sf.dimer}, cav, c.sf.coupling);
  const auto q = read_csv(dir / "pes.csv").column("q_t");
  std::vector<double> grid(q.begin(), q.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const auto xs = locate_crossings(m, grid, 1);
  const auto it = std::find_if(xs.begin(), xs.end(),
                               [](const SurfaceCrossing& x) { return std::abs(x.w_tt_left - x.w_tt_right) > 0.5; });
  if (it == xs.end()) return {false, "no S1/TT crossing found"};
  CsvTable t{{"q_t", "energy_eV", "gap_eV"}, {}};
  t.add({it->q_t, it->energy, it->gap});
  atomic_write(dir / "crossing.csv", t.str());
  const bool ok = std::abs(it->q_t - 0.07) <= 0.005 && std::abs(it->energy - 2.256) <= 0.002 && it->conical;
  return {ok, "crossing at Q_t = " + num(it->q_t, 5) + " (0.07 +- 0.005), E = " + num(it->energy, 6) +
                  " eV (2.256 +- 0.002), gap = " + num(it->gap)};
}

// ---- 8. Rabi splitting ----

Outcome c8(const fs::path& dir) {
  CsvTable t{{"omega_c", "eps_S1", "n_molecules", "Omega", "numerical_gap", "closed_form"}, {}};
  double worst = 0, printed = 0;
  for (double omega_c : {2.23, 2.256})
    for (int n : {1, 2}) {
      const SFDimerSpec d = rubrene_dimer(0.0);
      SFCavityCoupling k;
      k.Omega = 0.2;
      k.rwa = true;
      k.n_dimers = n;
      k.photon = PhotonRepresentation::fock;
      CavitySpec cav;
      cav.omega_c = omega_c;
      cav.n_max = 3;
      const double gap = bright_pair_gap(build_sf(std::vector<SFDimerSpec>(static_cast<std::size_t>(n), d), cav, k));
      const double ref = rabi_splitting(omega_c, d.eps_S1, n, 0.2);
      worst = std::max(worst, std::abs(gap - ref));
      if (omega_c == 2.256 && n == 2) printed = gap;
      t.add({omega_c, d.eps_S1, static_cast<double>(n), 0.2, gap, ref});
    }
  atomic_write(dir / "rabi_splitting.csv", t.str());
  const bool ok = worst <= 1e-6 && std::abs(printed - 0.2840) <= 5e-5;
  return {ok, "max |gap - Delta_R| = " + num(worst) + " (<= 1e-6); (2.256, 2.23, 2, 0.2) gap = " + num(printed, 6) +
                  " eV (0.2840)"};
}

// ---- 9. SF pumping ----

std::string pump_config(double lambda, int n) {
  return "[model]\nkind = sf\nomega_c = 2.256\nOmega = 0.2\nphoton = fock\npump_photons = " + std::to_string(n) +
         "\nlambda_ci = " + runner::detail::format_double(lambda) + "\ntu_cutoff = 20\ncu_cutoff = 50\n"
         "[run]\nt_max_fs = 300\nsample_dt_fs = 0.25\n";
}

Outcome c9(const fs::path& dir) {
  SfCalibrationOptions co;
  co.dynamics.tu_cutoff = 20;
  co.dynamics.cu_cutoff = 50;
  const SfCalibration cal = calibrate_lambda_ci(rubrene_dimer(0.0), co);
  fs::create_directories(dir);
  CsvTable ct{{"lambda_ci", "p_tt_300fs", "iterations"}, {}};
  ct.add({cal.lambda_ci, cal.p_tt, static_cast<double>(cal.iterations)});
  atomic_write(dir / "calibration.csv", ct.str());

  std::map<int, Table> runs;
  for (int n : {6, 8, 10}) {
    run_text(pump_config(cal.lambda_ci, n), dir / ("N" + std::to_string(n)));
    runs[n] = read_csv(dir / ("N" + std::to_string(n)) / "population.csv");
  }
  const double p6 = runs[6].column("p_tt").back();
  auto max_tt = [&](int n) {
    const auto v = runs[n].column("p_tt");
    return *std::max_element(v.begin(), v.end());
  };
  const double m8 = max_tt(8), m10 = max_tt(10);
  std::vector<double> t, y;
  const auto time = runs[8].column("time_fs"), cav = runs[8].column("p_cav");
  for (std::size_t i = 0; i < time.size(); ++i)
    if (time[i] <= 50) {
      t.push_back(time[i]);
      y.push_back(cav[i]);
    }
  const double period = best_cosine_period(t, y, 2.0, 15.0, 0.01, true);
  const bool cal_ok = std::abs(cal.p_tt - 0.14) <= 0.01;
  const bool ok = cal_ok && p6 >= 0.23 && p6 <= 0.33 && m8 < 0.05 && m10 < 0.05 && std::abs(period - 7.3) <= 0.5;
  return {ok, "lambda_CI = " + num(cal.lambda_ci, 5) + ", cavity-free P_TT(300) = " + num(cal.p_tt) +
                  " (0.14 +- 0.01); N=6 P_TT(300) = " + num(p6) + " ([0.23, 0.33]); max P_TT N=8 = " + num(m8) +
                  ", N=10 = " + num(m10) + " (< 0.05); N=8 P_cav period = " + num(period) + " fs (7.3 +- 0.5)"};
}

// ---- 10. reduced 2DES ----

std::vector<std::size_t> local_maxima(const std::vector<double>& v, double floor) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    if (v[i] > v[i - 1] && v[i] > v[i + 1] && v[i] >= floor) out.push_back(i);
  return out;
}

Outcome c10(const fs::path& dir) {
  const int tu = 14, cu = 36;
  const std::string text =
      "experiment = spectra2d\n[model]\nkind = sf\nomega_c = 2.256\nOmega = 0.2\nvariant = five-state\nrwa = true\n"
      "lambda_ci = 0.08569\ntu_cutoff = " + std::to_string(tu) + "\ncu_cutoff = " + std::to_string(cu) +
      "\n[spectra2d]\ndt_fs = 2\nn_tau = 64\nn_t = 64\nt_w_fs = 0, 32\ngamma = 0.01\n"
      "omega_min = 1.9\nomega_max = 2.6\nomega_step = 0.005\n";
  run_text(text, dir);
  const RunConfig c = validate_config(text);
  const SfSpectroModel sm = sf_spectro_model({c.sf.dimer}, c.sf.omega_c, c.sf.coupling.Omega);
  const FockBackend b(sm.model.action, {tu, cu}, sm.raising, sm.ground_label);
  const auto axis = c.spectra2d.omega.values();
  const double step = c.spectra2d.omega.step;

  // Stick spectrum of the singly excited block, broadened by the same gamma.
  const SparseFockModel& d = b.model();
  std::vector<Eigen::Index> idx;
  for (std::size_t l = 0; l < sm.model.config.size(); ++l)
    if (sm.model.excitations(l) == 1)
      for (std::size_t v = 0; v < d.block; ++v) idx.push_back(static_cast<Eigen::Index>(l * d.block + v));
  const auto ns = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXcd hs = Eigen::MatrixXcd::Zero(ns, ns);
  std::map<Eigen::Index, Eigen::Index> pos;
  for (Eigen::Index i = 0; i < ns; ++i) pos[idx[static_cast<std::size_t>(i)]] = i;
  for (Eigen::Index i = 0; i < ns; ++i)
    for (Eigen::SparseMatrix<cplx, Eigen::RowMajor>::InnerIterator it(d.H, idx[static_cast<std::size_t>(i)]); it; ++it)
      if (auto f = pos.find(it.col()); f != pos.end()) hs(i, f->second) = it.value();
  Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(ns);
  for (Eigen::Index i = 0; i < ns; ++i) {
    const auto g = static_cast<std::size_t>(idx[static_cast<std::size_t>(i)]);
    if (g % d.block == 0) phi(i) = sm.raising(static_cast<Eigen::Index>(g / d.block), static_cast<Eigen::Index>(sm.ground_label));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hs);
  const Eigen::VectorXcd amp = es.eigenvectors().adjoint() * phi;
  const double gam = c.spectra2d.grid.gamma;
  std::vector<double> stick(axis.size(), 0.0);
  for (std::size_t k = 0; k < axis.size(); ++k)
    for (Eigen::Index n = 0; n < amp.size(); ++n) {
      const double x = axis[k] - es.eigenvalues()(n);
      stick[k] += std::norm(amp(n)) * gam / (x * x + gam * gam);
    }
  const double smax = *std::max_element(stick.begin(), stick.end());
  const auto stick_peaks = local_maxima(stick, 0.1 * smax);
  CsvTable st{{"omega_eV", "stick_intensity"}, {}};
  for (std::size_t k = 0; k < axis.size(); ++k) st.add({axis[k], stick[k]});
  atomic_write(dir / "stick_spectrum.csv", st.str());

  // (a) diagonal peaks of SE and GSB at both waiting times
  std::string a_detail;
  bool a_ok = true;
  bool c_ok = true;
  std::map<double, double> dp_from_file;
  for (const char* tw : {"0", "32"}) {
    const Table t = read_csv(dir / (std::string("spectrum2d_Tw") + tw + ".csv"));
    const auto wt = t.column("omega_tau_eV"), wo = t.column("omega_t_eV");
    const auto se = t.column("se"), gsb = t.column("gsb"), esa = t.column("esa"), total = t.column("total");
    for (std::size_t i = 0; i < total.size(); ++i)
      if ((se[i] + gsb[i]) + esa[i] != total[i]) c_ok = false;
    for (const auto& [name, col] : {std::pair<const char*, const std::vector<double>*>{"SE", &se}, {"GSB", &gsb}}) {
      std::vector<double> diag;
      for (std::size_t i = 0; i < wt.size(); ++i)
        if (wt[i] == wo[i]) diag.push_back((*col)[i]);
      const double mx = *std::max_element(diag.begin(), diag.end());
      std::vector<std::string> found;
      for (std::size_t k : local_maxima(diag, 0.2 * mx)) {
        const bool near = std::any_of(stick_peaks.begin(), stick_peaks.end(), [&](std::size_t s) {
          return std::abs(static_cast<double>(s) - static_cast<double>(k)) <= 2.0;
        });
        a_ok = a_ok && near;
        found.push_back(num(axis[k], 4) + (near ? "" : "!"));
      }
      a_detail += std::string(name) + "(T_w=" + tw + "):";
      for (const auto& f : found) a_detail += " " + f;
      a_detail += "; ";
    }
  }
  std::string sticks_detail = "sticks:";
  for (std::size_t s : stick_peaks) sticks_detail += " " + num(axis[s], 4);

  // (b) SE diagonal-peak intensity over waiting times 0..48 fs
  ResponseGrid g = c.spectra2d.grid;
  g.t_w.clear();
  for (int T = 0; T <= 48; T += 4) g.t_w.push_back(T);
  ResponseOptions ro;
  ro.include_esa = false;
  const auto sp = spectra(compute_responses(b, g, DipoleSet{}, ro), c.spectra2d.omega, c.spectra2d.omega);
  std::size_t dp = 0;
  for (std::size_t i = 0; i < axis.size(); ++i)
    if (sp[0].se.map(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real() >
        sp[0].se.map(static_cast<Eigen::Index>(dp), static_cast<Eigen::Index>(dp)).real())
      dp = i;
  std::vector<double> tws, inten;
  CsvTable bt{{"t_w_fs", "se_dp_intensity"}, {}};
  for (const auto& s : sp) {
    tws.push_back(s.t_w);
    inten.push_back(s.se.map(static_cast<Eigen::Index>(dp), static_cast<Eigen::Index>(dp)).real());
    bt.add({tws.back(), inten.back()});
  }
  atomic_write(dir / "se_dp_beating.csv", bt.str());
  const double fit = best_cosine_period(tws, inten, 10.0, 60.0, 0.05);
  // Energetically adjacent pairs among the three strongest stick peaks.
  std::vector<std::size_t> strong = stick_peaks;
  std::sort(strong.begin(), strong.end(), [&](std::size_t a, std::size_t b2) { return stick[a] > stick[b2]; });
  strong.resize(std::min<std::size_t>(3, strong.size()));
  std::sort(strong.begin(), strong.end());
  bool b_ok = false;
  std::string gaps;
  for (std::size_t i = 0; i + 1 < strong.size(); ++i) {
    const double gap = axis[strong[i + 1]] - axis[strong[i]];
    const double period = 2 * kPi * kHbar / gap;
    gaps += " " + num(gap, 3) + " eV -> " + num(period, 3) + " fs;";
    if (std::abs(fit - period) <= 0.15 * period) b_ok = true;
  }
  const double i0 = inten[0], i32 = inten[8];
  b_ok = b_ok && std::abs(i32 - i0) > 0.05 * std::abs(i0);

  // (d) toy-model oracle, variational backend
  const testing::Toy toy = testing::toy();
  PropagationOptions p;
  p.rel_tol = 1e-10;
  p.abs_tol = 1e-12;
  const Mdav2Backend mb(toy.h, toy.raising, 0, 1, 1, kDefaultNoiseScale, p);
  const double odev = testing::oracle_deviation(compute_responses(mb, testing::small_grid(), DipoleSet{}),
                                                testing::Oracle(toy, 16));
  const bool d_ok = odev <= 1e-3;
  CsvTable ot{{"relative_deviation"}, {}};
  ot.add({odev});
  atomic_write(dir / "toy_oracle.csv", ot.str());

  (void)step;
  return {a_ok && b_ok && c_ok && d_ok,
          std::string("(a) ") + (a_ok ? "ok" : "MISS") + " " + a_detail + sticks_detail + " | (b) " + (b_ok ? "ok" : "MISS") +
              " fitted period " + num(fit) + " fs vs" + gaps + " I_DP(0) = " + num(i0) + ", I_DP(32) = " + num(i32) +
              " | (c) " + (c_ok ? "exact" : "VIOLATED") + " | (d) toy oracle " + num(odev) + " (<= 1e-3)"};
}

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "resonant TC Rabi", 60, c1},        {2, "TC absorption", 60, c2},
      {3, "disorder trends", 300, c3},        {4, "HTC dense oracle", 300, c4},
      {5, "photon loss", 600, c5},            {6, "thermo-field dynamics", 1200, c6},
      {7, "SF conical intersection", 60, c7}, {8, "Rabi-splitting consistency", 60, c8},
      {9, "SF pumping", 3600, c9},            {10, "reduced 2DES", 7200, c10},
  };
  return all;
}

struct Verdict {
  Outcome outcome;
  double seconds = 0;
};

Verdict evaluate(const Criterion& c, const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v.outcome = c.body(dir);
  } catch (const std::exception& e) {
    v.outcome = {false, std::string("error: ") + e.what()};
  }
  v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return v;
}

std::map<std::string, std::string> data_files(const fs::path& root) {
  std::map<std::string, std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().filename() != kManifestName)
      out[fs::relative(e.path(), root).string()] = read_file(e.path());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string out = "acceptance_runs";
  std::vector<int> only;
  bool no_rerun = false;
  app.add_option("--out", out, "output directory");
  app.add_option("--only", only, "criteria to run (default: all)");
  app.add_flag("--no-rerun", no_rerun, "skip the determinism rerun");
  CLI11_PARSE(app, argc, argv);

  const fs::path root(out);
  std::set<int> selected(only.begin(), only.end());
  std::vector<std::string> lines;
  bool all_pass = true;
  auto report = [&](const std::string& line, bool pass) {
    std::cout << line << std::endl;
    lines.push_back(line);
    all_pass = all_pass && pass;
  };
  for (const auto& c : criteria()) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const Verdict v = evaluate(c, root / "first" / ("criterion" + std::to_string(c.id)));
    const bool in_budget = v.seconds <= c.budget_s;
    const bool pass = v.outcome.pass && in_budget;
    report("criterion " + std::to_string(c.id) + " [" + c.name + "]: " + (pass ? "PASS" : "FAIL") + " - " +
               v.outcome.detail + " - runtime " + num(v.seconds, 4) + " s (budget " + num(c.budget_s) + " s)",
           pass);
  }
  if (no_rerun) {
    report("criterion 11 [determinism]: FAIL - rerun skipped", false);
  } else {
    std::size_t compared = 0, differing = 0;
    std::string first_diff;
    for (const auto& c : criteria()) {
      if (!selected.empty() && !selected.count(c.id)) continue;
      const std::string sub = "criterion" + std::to_string(c.id);
      evaluate(c, root / "second" / sub);
      const auto a = data_files(root / "first" / sub), b = data_files(root / "second" / sub);
      for (const auto& [name, bytes] : a) {
        ++compared;
        const auto it = b.find(name);
        if (it == b.end() || it->second != bytes) {
          ++differing;
          if (first_diff.empty()) first_diff = sub + "/" + name;
        }
      }
      if (b.size() != a.size()) ++differing;
    }
    const bool pass = differing == 0 && compared > 0;
    report(std::string("criterion 11 [determinism]: ") + (pass ? "PASS" : "FAIL") + " - " + std::to_string(compared) +
               " data files compared, " + std::to_string(differing) + " differ" +
               (first_diff.empty() ? "" : " (first: " + first_diff + ")"),
           pass);
  }
  std::string summary;
  for (const auto& l : lines) summary += l + "\n";
  fs::create_directories(root);
  atomic_write(root / "summary.txt", summary);
  return all_pass ? 0 : 1;
}
