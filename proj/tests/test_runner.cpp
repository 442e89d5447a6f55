// Configuration schema, persistence, determinism, resumable spectra and oracle pairs.
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>

#include "polariton/runner/config.hpp"
#include "polariton/runner/io.hpp"
#include "polariton/runner/run.hpp"

using namespace polariton;
using namespace polariton::runner;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("polariton_runner_" + name);
  fs::remove_all(p);
  return p;
}

std::map<std::string, std::string> data_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") out[e.path().filename().string()] = read_file(e.path());
  return out;
}

const char* kMinimalTc = "[model]\nkind = tc\n";

RunConfig small_htc(const fs::path& out) {
  RunConfig c = parse_config(
      "experiment = dynamics\n"
      "[model]\nkind = htc\nn_qubits = 3\nomega_R = 0.1\nlambda = 0.2\n"
      "[run]\nt_max_fs = 20\nsample_dt_fs = 1\nmultiplicity = 3\nseed = 11\n"
      "[disorder]\nwidth = 0.05\nn_realizations = 3\n");
  c.output = out.string();
  return c;
}

RunConfig small_spectra(const fs::path& out) {
  RunConfig c = parse_config(
      "experiment = spectra2d\n"
      "[model]\nkind = sf\nvariant = five-state\nrwa = true\ntu_cutoff = 3\ncu_cutoff = 4\n"
      "[spectra2d]\ndt_fs = 2\nn_tau = 8\nn_t = 8\nt_w_fs = 0, 4, 8\nomega_min = 1.9\nomega_max = 2.5\nomega_step = 0.05\n");
  c.output = out.string();
  return c;
}

}  // namespace

// ---- schema ----

TEST(Config, MinimalTcAcceptedWithDefaultsEchoed) {
  const RunConfig c = validate_config(kMinimalTc);
  EXPECT_EQ(c.model, ModelKind::tc);
  EXPECT_EQ(c.engine(), Engine::exact);
  const std::string echo = to_ini(c);
  EXPECT_NE(echo.find("omega_R = 0.1"), std::string::npos);
  EXPECT_NE(echo.find("n_realizations = 1"), std::string::npos);
  EXPECT_NE(echo.find("t_max_fs = 200"), std::string::npos);
  EXPECT_EQ(echo.find("lambda"), std::string::npos);
}

TEST(Config, BandwidthOutOfRangeNamesField) {
  try {
    validate_config("[model]\nkind = htc\nbandwidth = 1.2\n");
    FAIL() << "expected a constraint error";
  } catch (const ParseError&) {
    FAIL() << "bandwidth is a constraint, not a parse failure";
  } catch (const ConfigurationError& e) {
    EXPECT_NE(std::string(e.what()).find("model.bandwidth"), std::string::npos);
    EXPECT_EQ(exit_code(e), kExitConstraint);
  }
}

TEST(Config, ThreeDimersUnsupported) {
  try {
    validate_config("[model]\nkind = sf\nn_dimers = 3\n");
    FAIL() << "expected an unsupported error";
  } catch (const UnsupportedError& e) {
    EXPECT_EQ(exit_code(e), kExitUnsupported);
  }
}

TEST(Config, UnknownKeysAndMalformedValuesAreParseErrors) {
  try {
    parse_config("speed = 3\n[model]\nkind = tc\nlambda = 0.1\nomega0 = 1.0x\n[extras]\na = 1\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("speed: unknown key"), std::string::npos);
    EXPECT_NE(m.find("model.lambda: unknown key"), std::string::npos);  // tc has no bath
    EXPECT_NE(m.find("model.omega0"), std::string::npos);
    EXPECT_NE(m.find("extras: unknown section"), std::string::npos);
    EXPECT_EQ(exit_code(e), kExitParse);
  }
  EXPECT_THROW(parse_config("[model]\nkind = qed\n"), ParseError);
  EXPECT_THROW(parse_config("[run]\nseed = -1\n"), ParseError);
  EXPECT_THROW(parse_config("[model\nkind = tc\n"), ParseError);
  EXPECT_THROW(parse_config("[model]\nkind = tc\nkind = htc\n"), ParseError);
}

TEST(Config, EveryViolationListedWithKeyPath) {
  try {
    validate_config("[model]\nkind = htc\nomega_c = -1\nbandwidth = 2\n[run]\nt_max_fs = 0\n[disorder]\nwidth = -0.1\n");
    FAIL();
  } catch (const ConfigurationError& e) {
    const std::string m = e.what();
    for (const char* key : {"model.omega_c", "model.bandwidth", "run.t_max_fs", "disorder.width"})
      EXPECT_NE(m.find(key), std::string::npos) << key;
  }
}

TEST(Config, CrossSectionConstraints) {
  EXPECT_THROW(validate_config("experiment = pes-scan\n[model]\nkind = tc\n"), ConfigurationError);
  EXPECT_THROW(validate_config("temperature_K = 10\n[model]\nkind = tc\n"), ConfigurationError);
  EXPECT_THROW(validate_config("[model]\nkind = htc\n[run]\nengine = exact\n"), ConfigurationError);
  EXPECT_THROW(validate_config("experiment = oracle-compare\n[model]\nkind = htc\n[oracle]\npair = tc-exact\n"),
               ConfigurationError);
  // 2 pi hbar / 10 fs = 0.41 eV is narrower than the default 0.6 eV window.
  EXPECT_THROW(validate_config("experiment = spectra2d\n[model]\nkind = sf\nvariant = five-state\nrwa = true\n"
                               "[spectra2d]\ndt_fs = 10\nt_w_fs = 0\n"),
               ConfigurationError);
}

TEST(Config, ExampleConfigsRoundTrip) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(POLARITON_CONFIG_DIR)) {
    if (e.path().extension() != ".ini") continue;
    const RunConfig c = validate_config(read_file(e.path()));
    const std::string echo = to_ini(c);
    EXPECT_EQ(to_ini(validate_config(echo)), echo) << e.path();
    ++n;
  }
  EXPECT_GE(n, 10u);
}

// ---- persistence ----

TEST(Io, SeventeenSignificantDigits) {
  EXPECT_EQ(csv_number(0.1), "1.0000000000000001e-01");
  EXPECT_EQ(csv_number(-2.0), "-2.0000000000000000e+00");
  const double x = 0.7853981633974483;
  EXPECT_EQ(std::stod(csv_number(x)), x);
}

TEST(Io, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Io, CsvRejectsRaggedRows) {
  CsvTable t{{"a", "b"}, {}};
  EXPECT_THROW(t.add({1.0}), ConfigurationError);
}

TEST(Run, ManifestWrittenLastWithChecksums) {
  const fs::path out = scratch("manifest");
  RunConfig c = validate_config(std::string(kMinimalTc) + "[disorder]\nwidth = 0, 0.1\nn_realizations = 4\n");
  c.output = out.string();
  const RunResult r = run(c);
  ASSERT_EQ(r.files, (std::vector<std::string>{"population_W0.csv", "population_W0.1.csv"}));
  const std::string manifest = read_file(out / kManifestName);
  for (const auto& name : r.files)
    EXPECT_NE(manifest.find(name + " = sha256:" + sha256_hex(read_file(out / name))), std::string::npos);
  EXPECT_NE(manifest.find("code_version = "), std::string::npos);
  EXPECT_NE(manifest.find("disorder.n_realizations = 4"), std::string::npos);
  EXPECT_EQ(fs::last_write_time(out / kManifestName) >= fs::last_write_time(out / r.files.back()), true);
}

TEST(Run, ExactTcPopulationConserved) {
  const fs::path out = scratch("tc_exact");
  RunConfig c = validate_config("[model]\nkind = tc\nn_qubits = 5\n[run]\nt_max_fs = 50\nsample_dt_fs = 5\n");
  c.output = out.string();
  run(c);
  const std::string csv = read_file(out / "population.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "time_fs,p_photon,p_qubits_total,norm,energy_eV");
  // Resonant single-excitation TC: P_ph = cos^2(omega_R t / hbar) at t = 50 fs.
  const std::string last = csv.substr(csv.rfind('\n', csv.size() - 2) + 1);
  const double p = std::stod(last.substr(last.find(',') + 1));
  EXPECT_NEAR(p, std::pow(std::cos(0.1 * 50.0 / kHbar), 2), 1e-12);
}

TEST(Run, SameSeedByteIdenticalAcrossRunsAndWorkers) {
  const fs::path a = scratch("det_a"), b = scratch("det_b"), d = scratch("det_c");
  run(small_htc(a), {1});
  run(small_htc(b), {1});
  run(small_htc(d), {3});
  const auto fa = data_files(a);
  ASSERT_EQ(fa.size(), 1u);
  EXPECT_EQ(fa, data_files(b));
  EXPECT_EQ(fa, data_files(d));
  RunConfig other = small_htc(scratch("det_d"));
  other.run.seed = 12;
  run(other);
  EXPECT_NE(fa, data_files(other.output));
}

TEST(Run, FailureRemovesPartialOutputs) {
  const fs::path out = scratch("failure");
  RunConfig c = small_spectra(out);
  fs::create_directories(out);
  atomic_write(out / kManifestName, "stale\n");
  RunOptions o;
  o.interrupt_after_checkpoints = 2;  // T_w = 0 finishes its file, T_w = 4 is interrupted
  EXPECT_THROW(run(c, o), Interrupted);
  EXPECT_FALSE(fs::exists(out / kManifestName));
  EXPECT_TRUE(data_files(out).empty());
  EXPECT_TRUE(fs::exists(runner::detail::checkpoint_path(out, 0.0)));
  EXPECT_TRUE(fs::exists(runner::detail::checkpoint_path(out, 4.0)));
}

TEST(Run, Spectra2dResumeMatchesUninterruptedRun) {
  const fs::path fresh = scratch("resume_fresh"), killed = scratch("resume_killed");
  const RunResult ref = run(small_spectra(fresh));
  EXPECT_EQ(ref.files.size(), 3u);
  EXPECT_FALSE(fs::exists(fresh / "checkpoints"));

  RunOptions kill;
  kill.interrupt_after_checkpoints = 2;
  EXPECT_THROW(run(small_spectra(killed), kill), Interrupted);
  // Both stored checkpoints are reused, so only one new one is computed and the cap of 2 is not hit.
  RunOptions resume;
  resume.resume = true;
  resume.interrupt_after_checkpoints = 2;
  run(small_spectra(killed), resume);
  EXPECT_EQ(data_files(fresh), data_files(killed));
  EXPECT_FALSE(fs::exists(killed / "checkpoints"));
}

TEST(Run, CheckpointOfOtherConfigIgnored) {
  const fs::path out = scratch("foreign_checkpoint");
  RunOptions kill;
  kill.interrupt_after_checkpoints = 1;
  RunConfig c = small_spectra(out);
  EXPECT_THROW(run(c, kill), Interrupted);
  c.spectra2d.grid.gamma = 0.02;
  RunOptions resume;
  resume.resume = true;
  resume.interrupt_after_checkpoints = 1;
  EXPECT_THROW(run(c, resume), Interrupted);  // the stale checkpoint is recomputed
}

TEST(Run, Spectra2dTotalIsSumOfComponents) {
  const fs::path out = scratch("total");
  run(small_spectra(out));
  std::istringstream is(read_file(out / "spectrum2d_Tw8.csv"));
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "omega_tau_eV,omega_t_eV,se,gsb,esa,total");
  std::size_t rows = 0;
  double worst = 0, scale = 0;
  while (std::getline(is, line)) {
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 6u);
    worst = std::max(worst, std::abs(v[2] + v[3] + v[4] - v[5]));
    scale = std::max(scale, std::abs(v[5]));
    ++rows;
  }
  EXPECT_EQ(rows, 13u * 13u);
  EXPECT_GT(scale, 0.0);
  EXPECT_LE(worst, 1e-14 * scale);
}

TEST(Run, PesScanTable) {
  const fs::path out = scratch("pes");
  RunConfig c = validate_config("experiment = pes-scan\n[model]\nkind = sf\nOmega = 0\nphoton = fock\nn_max = 5\n"
                                "[pes]\nq_min = 0\nq_max = 0.14\nn_points = 15\n");
  c.output = out.string();
  run(c);
  const std::string csv = read_file(out / "pes.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "q_t,surface,energy_eV,manifold,w_tt,w_ph");
  // Single dimer, manifold 1: S1, TT and the photon state g|1 per node.
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 15 * 3);
}

TEST(Run, SfDynamicsColumns) {
  const fs::path out = scratch("sf_dyn");
  RunConfig c = validate_config("[model]\nkind = sf\nphoton = fock\npump_photons = 1\ntu_cutoff = 4\ncu_cutoff = 6\n"
                                "[run]\nt_max_fs = 2\nsample_dt_fs = 1\n");
  c.output = out.string();
  run(c);
  const std::string csv = read_file(out / "population.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "time_fs,p_tt,p_s1,p_cav,n_ex,norm,energy_eV");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Run, ExactAbsorptionPeaksAtPolaritons) {
  const fs::path out = scratch("absorption");
  RunConfig c = validate_config("experiment = absorption\n[model]\nkind = tc\nn_qubits = 10\n"
                                "[absorption]\nomega_min = 0.8\nomega_max = 1.2\nomega_step = 0.002\ngamma_prime = 0.005\n");
  c.output = out.string();
  run(c);
  std::istringstream is(read_file(out / "absorption.csv"));
  std::string line;
  std::getline(is, line);
  double best = -1, at = 0;
  while (std::getline(is, line)) {
    const double w = std::stod(line.substr(0, line.find(','))), f = std::stod(line.substr(line.find(',') + 1));
    if (w < 1.0 && f > best) {
      best = f;
      at = w;
    }
  }
  EXPECT_NEAR(at, 0.9, 0.002);
}

// ---- oracle pairs ----

TEST(Oracle, TcPairPassesAtOneEMinusFive) {
  RunConfig c = validate_config(read_file(fs::path(POLARITON_CONFIG_DIR) / "oracle_tc.ini"));
  const OracleReport r = oracle_compare(c);
  EXPECT_TRUE(r.pass());
  for (const auto& k : r.checks) EXPECT_EQ(k.tolerance, 1e-5);
}

TEST(Oracle, HtcDensePairPassesAtOneEMinusThree) {
  RunConfig c = validate_config(read_file(fs::path(POLARITON_CONFIG_DIR) / "oracle_htc.ini"));
  const OracleReport r = oracle_compare(c);
  EXPECT_TRUE(r.pass()) << r.csv();
  for (const auto& k : r.checks) EXPECT_EQ(k.tolerance, 1e-3);
}

TEST(Oracle, CorruptedMetricCutoffFailsWithDeviation) {
  const fs::path out = scratch("oracle_corrupted");
  RunConfig c = validate_config(read_file(fs::path(POLARITON_CONFIG_DIR) / "oracle_corrupted_metric.ini"));
  EXPECT_EQ(c.oracle.metric_cutoff, 1e-2);
  c.output = out.string();
  const RunResult r = run(c);
  ASSERT_TRUE(r.oracle.has_value());
  EXPECT_FALSE(r.oracle->pass());
  EXPECT_GT(r.oracle->checks.front().deviation, 1e-3);
  const std::string csv = read_file(out / "oracle.csv");
  EXPECT_NE(csv.find("htc-dense,p_photon,"), std::string::npos);
  EXPECT_NE(csv.find(",false"), std::string::npos);
}

// ---- example configurations ----

TEST(Examples, EveryConfigRunsAfterValidation) {
  for (const auto& e : fs::directory_iterator(POLARITON_CONFIG_DIR)) {
    if (e.path().extension() != ".ini") continue;
    RunConfig c = validate_config(read_file(e.path()));
    c.output = scratch("example_" + e.path().stem().string()).string();
    const RunResult r = run(c);
    EXPECT_FALSE(r.files.empty()) << e.path();
    EXPECT_TRUE(fs::exists(fs::path(c.output) / kManifestName)) << e.path();
  }
}
