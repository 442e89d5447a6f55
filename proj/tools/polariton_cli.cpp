// polariton - command-line front end of the runner
//
// Exit codes: see runner::ExitCode (0 success, 2 parse error, 3 constraint violation,
// 4 unsupported configuration, 5 oracle comparison failed, 1 any other failure).
#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "polariton/runner/config.hpp"
#include "polariton/runner/io.hpp"
#include "polariton/runner/run.hpp"

namespace {

using namespace polariton;
using namespace polariton::runner;

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  bool resume = false;
};

void add_flags(CLI::App* cmd, Flags& f, bool run_flags) {
  cmd->add_option("--config", f.config, "configuration file (INI)")->required()->check(CLI::ExistingFile);
  if (!run_flags) return;
  cmd->add_option("--out", f.out, "output directory (overrides the config)");
  cmd->add_option("--seed", f.seed, "random seed (overrides run.seed)");
  cmd->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--resume", f.resume, "reuse spectra2d checkpoints of an interrupted run");
}

int execute(const std::string& command, const Flags& f) {
  try {
    RunConfig c = parse_config(read_file(f.config));
    if (!f.out.empty()) c.output = f.out;
    if (f.seed) c.run.seed = *f.seed;
    if (command == "absorption") c.experiment = ExperimentKind::absorption;
    if (command == "pes-scan") c.experiment = ExperimentKind::pes_scan;
    if (command == "spectra2d") c.experiment = ExperimentKind::spectra2d;
    if (command == "oracle-compare") c.experiment = ExperimentKind::oracle_compare;
    c.validate();
    if (command == "validate") {
      std::cout << to_ini(c);
      return kExitOk;
    }
    RunOptions o;
    o.workers = f.workers;
    o.resume = f.resume;
    const RunResult r = run(c, o);
    for (const auto& name : r.files) std::cout << (fs::path(c.output) / name).string() << '\n';
    std::cout << (fs::path(c.output) / kManifestName).string() << '\n';
    if (r.oracle) {
      std::cout << r.oracle->csv();
      return r.oracle->pass() ? kExitOk : kExitOracleFail;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    const int rc = exit_code(e);
    const char* kind = rc == kExitParse ? "parse error" : rc == kExitConstraint ? "constraint error"
                       : rc == kExitUnsupported ? "unsupported" : "run failed";
    std::cerr << kind << ":\n" << e.what() << '\n';
    return rc;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cavity-polariton dynamics and spectroscopy runner"};
  app.require_subcommand(1);
  Flags flags;
  const char* commands[][2] = {{"validate", "check a configuration and echo it with defaults filled"},
                               {"run", "run the experiment named in the configuration"},
                               {"absorption", "linear absorption spectrum"},
                               {"pes-scan", "polaritonic potential-energy surfaces"},
                               {"spectra2d", "two-dimensional electronic spectra"},
                               {"oracle-compare", "variational engine against a reference solver"}};
  for (const auto& [name, help] : commands) add_flags(app.add_subcommand(name, help), flags, std::string(name) != "validate");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  return execute(app.get_subcommands().front()->get_name(), flags);
}
