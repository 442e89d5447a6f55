// runner/config.hpp - sectioned key-value run configuration
//
// INI text: top-level keys (experiment, output, temperature_K) followed by the
// sections [model], [run], [disorder], [absorption], [pes], [spectra2d], [oracle].
// Keys of [model] depend on model.kind. Unknown keys and malformed values are
// parse errors; physically invalid values are constraint errors.
#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "polariton/errors.hpp"
#include "polariton/model.hpp"
#include "polariton/sf_polariton.hpp"
#include "polariton/spectro.hpp"

namespace polariton::runner {

class ParseError : public Error {
 public:
  using Error::Error;
};

enum class ModelKind { tc, htc, sf };
enum class ExperimentKind { dynamics, absorption, pes_scan, spectra2d, oracle_compare };
enum class Engine { auto_select, exact, mdav2, fock };
enum class OraclePair { tc_exact, htc_dense };

inline constexpr double kCalibratedLambdaCi = 0.08569;

struct RunSection {
  double t_max_fs = 200.0;
  double sample_dt_fs = 0.5;
  std::size_t multiplicity = 1;
  std::uint64_t seed = 0;
  double rel_tol = 1e-6;
  double abs_tol = 1e-8;
  double noise_scale = kDefaultNoiseScale;
  Engine engine = Engine::auto_select;
};

struct DisorderSection {
  std::vector<double> widths{0.0};
  int n_realizations = 1;
};

struct AbsorptionSection {
  double omega_min = 0.8;
  double omega_max = 1.2;
  double omega_step = 0.002;
  double gamma_prime = 0.01;
};

struct SfSection {
  SFDimerSpec dimer = rubrene_dimer(kCalibratedLambdaCi);
  SFCavityCoupling coupling;
  double omega_c = 2.256;
  int n_max = 8;               // photon cutoff of pes scans
  double pump_photons = 0.0;   // |mu_1|^2
  int tu_cutoff = 20;
  int cu_cutoff = 50;
};

struct PesSection {
  double q_min = -0.6;
  double q_max = 0.6;
  std::size_t n_points = 241;
  double q_c = 0.0;
  std::vector<int> manifolds{1};
};

struct Spectra2dSection {
  ResponseGrid grid;
  FrequencyAxis omega{2.0, 2.6, 0.005};
  bool include_esa = true;
};

struct OracleSection {
  OraclePair pair = OraclePair::tc_exact;
  double tolerance = 0.0;  // 0: the pair default
  double metric_cutoff = 1e-10;
  int fock_cutoff = 10;

  double resolved_tolerance() const {
    if (tolerance > 0) return tolerance;
    return pair == OraclePair::tc_exact ? 1e-5 : 1e-3;
  }
};

struct RunConfig {
  ExperimentKind experiment = ExperimentKind::dynamics;
  std::string output = "out";
  double temperature_K = 0.0;
  ModelKind model = ModelKind::tc;
  CavitySpec cavity;
  QubitEnsembleSpec qubits;
  PhononBathSpec bath;
  SfSection sf;
  RunSection run;
  DisorderSection disorder;
  AbsorptionSection absorption;
  PesSection pes;
  Spectra2dSection spectra2d;
  OracleSection oracle;

  Engine engine() const {
    if (run.engine != Engine::auto_select) return run.engine;
    switch (model) {
      case ModelKind::tc: return Engine::exact;
      case ModelKind::htc: return Engine::mdav2;
      case ModelKind::sf: return Engine::fock;
    }
    return Engine::exact;
  }
  std::vector<std::string> violations() const;
  void validate() const;
};

// ---- value codecs ---------------------------------------------------------

namespace detail {

template <class E>
struct EnumTable;

template <>
struct EnumTable<ModelKind> {
  static constexpr std::array<std::pair<ModelKind, const char*>, 3> entries{
      {{ModelKind::tc, "tc"}, {ModelKind::htc, "htc"}, {ModelKind::sf, "sf"}}};
};
template <>
struct EnumTable<ExperimentKind> {
  static constexpr std::array<std::pair<ExperimentKind, const char*>, 5> entries{
      {{ExperimentKind::dynamics, "dynamics"},
       {ExperimentKind::absorption, "absorption"},
       {ExperimentKind::pes_scan, "pes-scan"},
       {ExperimentKind::spectra2d, "spectra2d"},
       {ExperimentKind::oracle_compare, "oracle-compare"}}};
};
template <>
struct EnumTable<Engine> {
  static constexpr std::array<std::pair<Engine, const char*>, 4> entries{
      {{Engine::auto_select, "auto"}, {Engine::exact, "exact"}, {Engine::mdav2, "mdav2"}, {Engine::fock, "fock"}}};
};
template <>
struct EnumTable<OraclePair> {
  static constexpr std::array<std::pair<OraclePair, const char*>, 2> entries{
      {{OraclePair::tc_exact, "tc-exact"}, {OraclePair::htc_dense, "htc-dense"}}};
};
template <>
struct EnumTable<PhotonRepresentation> {
  static constexpr std::array<std::pair<PhotonRepresentation, const char*>, 3> entries{
      {{PhotonRepresentation::coherent, "coherent"},
       {PhotonRepresentation::fock, "fock"},
       {PhotonRepresentation::none, "none"}}};
};
template <>
struct EnumTable<SfVariant> {
  static constexpr std::array<std::pair<SfVariant, const char*>, 2> entries{
      {{SfVariant::three_state, "three-state"}, {SfVariant::five_state, "five-state"}}};
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

template <class T>
T parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  T v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ParseError("cannot parse '" + raw + "' as a number");
  return v;
}

inline std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

template <class T>
struct Codec;

template <>
struct Codec<double> {
  static double parse(const std::string& s) { return parse_number<double>(s); }
  static std::string format(double x) { return format_double(x); }
};
template <>
struct Codec<int> {
  static int parse(const std::string& s) { return parse_number<int>(s); }
  static std::string format(int x) { return std::to_string(x); }
};
template <>
struct Codec<std::size_t> {
  static std::size_t parse(const std::string& s) { return parse_number<std::size_t>(s); }
  static std::string format(std::size_t x) { return std::to_string(x); }
};
static_assert(std::is_same_v<std::size_t, std::uint64_t>, "seed codec relies on size_t being 64-bit");
template <>
struct Codec<bool> {
  static bool parse(const std::string& raw) {
    const std::string s = trim(raw);
    if (s == "true") return true;
    if (s == "false") return false;
    throw ParseError("cannot parse '" + raw + "' as true/false");
  }
  static std::string format(bool x) { return x ? "true" : "false"; }
};
template <>
struct Codec<std::string> {
  static std::string parse(const std::string& s) { return trim(s); }
  static std::string format(const std::string& s) { return s; }
};
template <class T>
struct Codec<std::vector<T>> {
  static std::vector<T> parse(const std::string& s) {
    std::vector<T> out;
    for (const auto& item : split_list(s)) out.push_back(Codec<T>::parse(item));
    return out;
  }
  static std::string format(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + Codec<T>::format(v[i]);
    return out;
  }
};

template <class E>
  requires std::is_enum_v<E>
struct Codec<E> {
  static E parse(const std::string& raw) {
    const std::string s = trim(raw);
    std::string options;
    for (const auto& [e, name] : EnumTable<E>::entries) {
      if (s == name) return e;
      options += (options.empty() ? "" : "|") + std::string(name);
    }
    throw ParseError("'" + raw + "' is not one of " + options);
  }
  static std::string format(E e) {
    for (const auto& [v, name] : EnumTable<E>::entries)
      if (v == e) return name;
    return "?";
  }
};

struct Field {
  std::string section;  // empty: top level
  std::string key;
  std::function<bool(const RunConfig&)> applies;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;

  std::string path() const { return section.empty() ? key : section + "." + key; }
};

template <class Access>
Field field(std::string section, std::string key, Access access,
            std::function<bool(const RunConfig&)> applies = [](const RunConfig&) { return true; }) {
  using T = std::remove_reference_t<decltype(access(std::declval<RunConfig&>()))>;
  Field f;
  f.section = std::move(section);
  f.key = std::move(key);
  f.applies = std::move(applies);
  f.set = [access](RunConfig& c, const std::string& v) { access(c) = Codec<T>::parse(v); };
  f.get = [access](const RunConfig& c) { return Codec<T>::format(access(const_cast<RunConfig&>(c))); };
  return f;
}

inline bool is_sf(const RunConfig& c) { return c.model == ModelKind::sf; }
inline bool is_ensemble(const RunConfig& c) { return c.model != ModelKind::sf; }
inline bool is_htc(const RunConfig& c) { return c.model == ModelKind::htc; }

// Fixed field order; it is also the echo order.
inline const std::vector<Field>& schema() {
  static const std::vector<Field> fields = [] {
    std::vector<Field> f;
    f.push_back(field("", "experiment", [](RunConfig& c) -> auto& { return c.experiment; }));
    f.push_back(field("", "output", [](RunConfig& c) -> auto& { return c.output; }));
    f.push_back(field("", "temperature_K", [](RunConfig& c) -> auto& { return c.temperature_K; }));

    f.push_back(field("model", "kind", [](RunConfig& c) -> auto& { return c.model; }));
    f.push_back(field("model", "omega_c", [](RunConfig& c) -> auto& { return c.cavity.omega_c; }, is_ensemble));
    f.push_back(field("model", "kappa", [](RunConfig& c) -> auto& { return c.cavity.kappa; }, is_ensemble));
    f.push_back(field("model", "n_qubits", [](RunConfig& c) -> auto& { return c.qubits.n_qubits; }, is_ensemble));
    f.push_back(field("model", "omega0", [](RunConfig& c) -> auto& { return c.qubits.omega0; }, is_ensemble));
    f.push_back(field("model", "gamma", [](RunConfig& c) -> auto& { return c.qubits.gamma; }, is_ensemble));
    f.push_back(field("model", "omega_R", [](RunConfig& c) -> auto& { return c.qubits.omega_R; }, is_ensemble));
    f.push_back(field("model", "omega_k0", [](RunConfig& c) -> auto& { return c.bath.omega_k0; }, is_htc));
    f.push_back(field("model", "bandwidth", [](RunConfig& c) -> auto& { return c.bath.bandwidth; }, is_htc));
    f.push_back(field("model", "lambda", [](RunConfig& c) -> auto& { return c.bath.lambda; }, is_htc));

    f.push_back(field("model", "omega_c", [](RunConfig& c) -> auto& { return c.sf.omega_c; }, is_sf));
    f.push_back(field("model", "Omega", [](RunConfig& c) -> auto& { return c.sf.coupling.Omega; }, is_sf));
    f.push_back(field("model", "rwa", [](RunConfig& c) -> auto& { return c.sf.coupling.rwa; }, is_sf));
    f.push_back(field("model", "n_dimers", [](RunConfig& c) -> auto& { return c.sf.coupling.n_dimers; }, is_sf));
    f.push_back(field("model", "photon", [](RunConfig& c) -> auto& { return c.sf.coupling.photon; }, is_sf));
    f.push_back(field("model", "variant", [](RunConfig& c) -> auto& { return c.sf.coupling.variant; }, is_sf));
    f.push_back(field("model", "n_max", [](RunConfig& c) -> auto& { return c.sf.n_max; }, is_sf));
    f.push_back(field("model", "pump_photons", [](RunConfig& c) -> auto& { return c.sf.pump_photons; }, is_sf));
    f.push_back(field("model", "eps_S1", [](RunConfig& c) -> auto& { return c.sf.dimer.eps_S1; }, is_sf));
    f.push_back(field("model", "eps_TT", [](RunConfig& c) -> auto& { return c.sf.dimer.eps_TT; }, is_sf));
    f.push_back(field("model", "eps_Sn", [](RunConfig& c) -> auto& { return c.sf.dimer.eps_Sn; }, is_sf));
    f.push_back(field("model", "eps_TTn", [](RunConfig& c) -> auto& { return c.sf.dimer.eps_TTn; }, is_sf));
    f.push_back(field("model", "omega_tu", [](RunConfig& c) -> auto& { return c.sf.dimer.omega_tu; }, is_sf));
    f.push_back(field("model", "omega_cu", [](RunConfig& c) -> auto& { return c.sf.dimer.omega_cu; }, is_sf));
    f.push_back(field("model", "kappa_S1", [](RunConfig& c) -> auto& { return c.sf.dimer.kappa_S1; }, is_sf));
    f.push_back(field("model", "kappa_TT", [](RunConfig& c) -> auto& { return c.sf.dimer.kappa_TT; }, is_sf));
    f.push_back(field("model", "kappa_Sn", [](RunConfig& c) -> auto& { return c.sf.dimer.kappa_Sn; }, is_sf));
    f.push_back(field("model", "kappa_TTn", [](RunConfig& c) -> auto& { return c.sf.dimer.kappa_TTn; }, is_sf));
    f.push_back(field("model", "lambda_ci", [](RunConfig& c) -> auto& { return c.sf.dimer.lambda_ci; }, is_sf));
    f.push_back(field("model", "eta_S", [](RunConfig& c) -> auto& { return c.sf.dimer.eta_S; }, is_sf));
    f.push_back(field("model", "eta_T", [](RunConfig& c) -> auto& { return c.sf.dimer.eta_T; }, is_sf));
    f.push_back(field("model", "tu_cutoff", [](RunConfig& c) -> auto& { return c.sf.tu_cutoff; }, is_sf));
    f.push_back(field("model", "cu_cutoff", [](RunConfig& c) -> auto& { return c.sf.cu_cutoff; }, is_sf));

    f.push_back(field("run", "t_max_fs", [](RunConfig& c) -> auto& { return c.run.t_max_fs; }));
    f.push_back(field("run", "sample_dt_fs", [](RunConfig& c) -> auto& { return c.run.sample_dt_fs; }));
    f.push_back(field("run", "multiplicity", [](RunConfig& c) -> auto& { return c.run.multiplicity; }));
    f.push_back(field("run", "seed", [](RunConfig& c) -> auto& { return c.run.seed; }));
    f.push_back(field("run", "rel_tol", [](RunConfig& c) -> auto& { return c.run.rel_tol; }));
    f.push_back(field("run", "abs_tol", [](RunConfig& c) -> auto& { return c.run.abs_tol; }));
    f.push_back(field("run", "noise_scale", [](RunConfig& c) -> auto& { return c.run.noise_scale; }));
    f.push_back(field("run", "engine", [](RunConfig& c) -> auto& { return c.run.engine; }));

    f.push_back(field("disorder", "width", [](RunConfig& c) -> auto& { return c.disorder.widths; }, is_ensemble));
    f.push_back(field("disorder", "n_realizations", [](RunConfig& c) -> auto& { return c.disorder.n_realizations; },
                      is_ensemble));

    f.push_back(field("absorption", "omega_min", [](RunConfig& c) -> auto& { return c.absorption.omega_min; }));
    f.push_back(field("absorption", "omega_max", [](RunConfig& c) -> auto& { return c.absorption.omega_max; }));
    f.push_back(field("absorption", "omega_step", [](RunConfig& c) -> auto& { return c.absorption.omega_step; }));
    f.push_back(field("absorption", "gamma_prime", [](RunConfig& c) -> auto& { return c.absorption.gamma_prime; }));

    f.push_back(field("pes", "q_min", [](RunConfig& c) -> auto& { return c.pes.q_min; }));
    f.push_back(field("pes", "q_max", [](RunConfig& c) -> auto& { return c.pes.q_max; }));
    f.push_back(field("pes", "n_points", [](RunConfig& c) -> auto& { return c.pes.n_points; }));
    f.push_back(field("pes", "q_c", [](RunConfig& c) -> auto& { return c.pes.q_c; }));
    f.push_back(field("pes", "manifolds", [](RunConfig& c) -> auto& { return c.pes.manifolds; }));

    f.push_back(field("spectra2d", "dt_fs", [](RunConfig& c) -> auto& { return c.spectra2d.grid.dt; }));
    f.push_back(field("spectra2d", "n_tau", [](RunConfig& c) -> auto& { return c.spectra2d.grid.n_tau; }));
    f.push_back(field("spectra2d", "n_t", [](RunConfig& c) -> auto& { return c.spectra2d.grid.n_t; }));
    f.push_back(field("spectra2d", "t_w_fs", [](RunConfig& c) -> auto& { return c.spectra2d.grid.t_w; }));
    f.push_back(field("spectra2d", "gamma", [](RunConfig& c) -> auto& { return c.spectra2d.grid.gamma; }));
    f.push_back(field("spectra2d", "omega_min", [](RunConfig& c) -> auto& { return c.spectra2d.omega.lo; }));
    f.push_back(field("spectra2d", "omega_max", [](RunConfig& c) -> auto& { return c.spectra2d.omega.hi; }));
    f.push_back(field("spectra2d", "omega_step", [](RunConfig& c) -> auto& { return c.spectra2d.omega.step; }));
    f.push_back(field("spectra2d", "include_esa", [](RunConfig& c) -> auto& { return c.spectra2d.include_esa; }));

    f.push_back(field("oracle", "pair", [](RunConfig& c) -> auto& { return c.oracle.pair; }));
    f.push_back(field("oracle", "tolerance", [](RunConfig& c) -> auto& { return c.oracle.tolerance; }));
    f.push_back(field("oracle", "metric_cutoff", [](RunConfig& c) -> auto& { return c.oracle.metric_cutoff; }));
    f.push_back(field("oracle", "fock_cutoff", [](RunConfig& c) -> auto& { return c.oracle.fock_cutoff; }));
    return f;
  }();
  return fields;
}

inline bool known_section(const std::string& s) {
  for (const auto& f : schema())
    if (f.section == s) return true;
  return false;
}

inline const Field* find_field(const RunConfig& c, const std::string& section, const std::string& key) {
  for (const auto& f : schema())
    if (f.section == section && f.key == key && f.applies(c)) return &f;
  return nullptr;
}

inline const char* experiment_section(ExperimentKind e) {
  switch (e) {
    case ExperimentKind::dynamics: return nullptr;
    case ExperimentKind::absorption: return "absorption";
    case ExperimentKind::pes_scan: return "pes";
    case ExperimentKind::spectra2d: return "spectra2d";
    case ExperimentKind::oracle_compare: return "oracle";
  }
  return nullptr;
}

inline std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += s + "\n";
  return out;
}

}  // namespace detail

template <class E>
std::string to_string(E e) {
  return detail::Codec<E>::format(e);
}

// ---- constraints -------------------------------------------------------------

inline std::vector<std::string> RunConfig::violations() const {
  std::vector<std::string> out;
  auto add = [&out](std::vector<std::string> v) { out.insert(out.end(), v.begin(), v.end()); };
  if (output.empty()) out.push_back("output must not be empty");
  if (!(temperature_K >= 0)) out.push_back("temperature_K must be >= 0, got " + polariton::detail::show(temperature_K));

  const Engine e = engine();
  if (model == ModelKind::sf) {
    add(sf.dimer.violations("model"));
    add(sf.coupling.violations("model"));
    if (!(sf.omega_c > 0)) out.push_back("model.omega_c must be > 0, got " + polariton::detail::show(sf.omega_c));
    if (sf.n_max < 1) out.push_back("model.n_max must be >= 1, got " + std::to_string(sf.n_max));
    if (!(sf.pump_photons >= 0 && sf.pump_photons <= kMaxPumpNumber))
      out.push_back("model.pump_photons must be in [0, " + std::to_string(kMaxPumpNumber) + "], got " +
                    polariton::detail::show(sf.pump_photons));
    if (sf.tu_cutoff < 1 || sf.cu_cutoff < 1) out.push_back("model.tu_cutoff and model.cu_cutoff must be >= 1");
    if (e != Engine::fock && e != Engine::mdav2) out.push_back("run.engine must be fock or mdav2 for model.kind = sf");
    if (temperature_K > 0) out.push_back("temperature_K > 0 requires model.kind = htc");
  } else {
    add(cavity.violations("model"));
    add(qubits.violations("model"));
    if (model == ModelKind::htc) {
      PhononBathSpec b = bath;
      b.n_modes = qubits.n_qubits;
      add(b.violations("model"));
      if (e != Engine::mdav2) out.push_back("run.engine must be mdav2 for model.kind = htc");
    } else {
      if (e != Engine::exact && e != Engine::mdav2) out.push_back("run.engine must be exact or mdav2 for model.kind = tc");
      if (temperature_K > 0) out.push_back("temperature_K > 0 requires model.kind = htc");
    }
    if (disorder.widths.empty()) out.push_back("disorder.width must list at least one value");
    for (double w : disorder.widths)
      if (!(w >= 0)) out.push_back("disorder.width must be >= 0, got " + polariton::detail::show(w));
    if (disorder.n_realizations < 1)
      out.push_back("disorder.n_realizations must be >= 1, got " + std::to_string(disorder.n_realizations));
  }

  if (!(run.t_max_fs > 0)) out.push_back("run.t_max_fs must be > 0, got " + polariton::detail::show(run.t_max_fs));
  if (!(run.sample_dt_fs > 0 && run.sample_dt_fs <= run.t_max_fs))
    out.push_back("run.sample_dt_fs must be in (0, run.t_max_fs], got " + polariton::detail::show(run.sample_dt_fs));
  if (run.multiplicity < 1) out.push_back("run.multiplicity must be >= 1");
  if (!(run.rel_tol > 0)) out.push_back("run.rel_tol must be > 0, got " + polariton::detail::show(run.rel_tol));
  if (!(run.abs_tol > 0)) out.push_back("run.abs_tol must be > 0, got " + polariton::detail::show(run.abs_tol));
  if (!(run.noise_scale > 0)) out.push_back("run.noise_scale must be > 0, got " + polariton::detail::show(run.noise_scale));

  switch (experiment) {
    case ExperimentKind::dynamics: break;
    case ExperimentKind::absorption:
      if (model == ModelKind::sf) out.push_back("absorption requires model.kind = tc or htc");
      if (!(absorption.omega_step > 0)) out.push_back("absorption.omega_step must be > 0");
      if (!(absorption.omega_max > absorption.omega_min)) out.push_back("absorption.omega_max must exceed absorption.omega_min");
      if (!(absorption.gamma_prime > 0)) out.push_back("absorption.gamma_prime must be > 0");
      break;
    case ExperimentKind::pes_scan:
      if (model != ModelKind::sf) out.push_back("pes-scan requires model.kind = sf");
      if (sf.coupling.photon != PhotonRepresentation::fock) out.push_back("pes-scan requires model.photon = fock");
      if (pes.n_points < 2) out.push_back("pes.n_points must be >= 2");
      if (!(pes.q_max > pes.q_min)) out.push_back("pes.q_max must exceed pes.q_min");
      for (int m : pes.manifolds)
        if (m < 0) out.push_back("pes.manifolds entries must be >= 0, got " + std::to_string(m));
      break;
    case ExperimentKind::spectra2d: {
      if (model != ModelKind::sf) out.push_back("spectra2d requires model.kind = sf");
      if (sf.coupling.variant != SfVariant::five_state || !sf.coupling.rwa)
        out.push_back("spectra2d requires model.variant = five-state and model.rwa = true");
      add(spectra2d.grid.violations("spectra2d"));
      const auto& w = spectra2d.omega;
      if (!(w.step > 0) || !(w.hi > w.lo)) out.push_back("spectra2d: omega_max must exceed omega_min and omega_step be > 0");
      if (spectra2d.grid.dt > 0 && w.hi - w.lo > 2 * kPi * kHbar / spectra2d.grid.dt)
        out.push_back("spectra2d: frequency window exceeds the Nyquist span 2 pi hbar / dt_fs");
      break;
    }
    case ExperimentKind::oracle_compare:
      if (oracle.pair == OraclePair::tc_exact && model != ModelKind::tc)
        out.push_back("oracle.pair = tc-exact requires model.kind = tc");
      if (oracle.pair == OraclePair::htc_dense && model != ModelKind::htc)
        out.push_back("oracle.pair = htc-dense requires model.kind = htc");
      if (!(oracle.tolerance >= 0)) out.push_back("oracle.tolerance must be >= 0");
      if (!(oracle.metric_cutoff > 0)) out.push_back("oracle.metric_cutoff must be > 0");
      if (oracle.fock_cutoff < 1) out.push_back("oracle.fock_cutoff must be >= 1");
      break;
  }
  return out;
}

inline void RunConfig::validate() const {
  const auto v = violations();
  if (!v.empty()) throw ConfigurationError(detail::join(v));
  if (model == ModelKind::sf) sf.coupling.validate();
}

// ---- text round trip ---------------------------------------------------------

// Parses INI text; throws ParseError listing every malformed or unknown entry.
inline RunConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig c;
  std::vector<std::string> errors;
  if (auto kind = tree.get_child_optional("model.kind")) {
    try {
      c.model = detail::Codec<ModelKind>::parse(kind->data());
    } catch (const ParseError& e) {
      errors.push_back("model.kind: " + std::string(e.what()));
    }
  }
  auto apply = [&](const std::string& section, const std::string& key, const std::string& value) {
    const std::string path = section.empty() ? key : section + "." + key;
    const detail::Field* f = detail::find_field(c, section, key);
    if (!f) {
      errors.push_back(path + ": unknown key");
      return;
    }
    try {
      f->set(c, value);
    } catch (const ParseError& e) {
      errors.push_back(path + ": " + e.what());
    }
  };
  for (const auto& [name, node] : tree) {
    if (node.empty() && !detail::known_section(name)) {
      apply("", name, node.data());
      continue;
    }
    if (!detail::known_section(name)) {
      errors.push_back(name + ": unknown section");
      continue;
    }
    for (const auto& [key, leaf] : node) apply(name, key, leaf.data());
  }
  if (!errors.empty()) throw ParseError(detail::join(errors));
  return c;
}

// Canonical text with every default filled in. Sections that the experiment does not
// read are omitted.
inline std::string to_ini(const RunConfig& c, bool with_output = true) {
  std::ostringstream os;
  std::string current = "?";
  const char* extra = detail::experiment_section(c.experiment);
  for (const auto& f : detail::schema()) {
    if (!f.applies(c)) continue;
    if (!with_output && f.section.empty() && f.key == "output") continue;
    const bool core = f.section.empty() || f.section == "model" || f.section == "run" || f.section == "disorder";
    if (!core && (!extra || f.section != extra)) continue;
    if (f.section != current) {
      if (!f.section.empty()) os << "\n[" << f.section << "]\n";
      current = f.section;
    }
    os << f.key << " = " << f.get(c) << "\n";
  }
  return os.str();
}

// Parse errors throw ParseError; constraint violations throw ConfigurationError or UnsupportedError.
inline RunConfig validate_config(const std::string& text) {
  RunConfig c = parse_config(text);
  c.validate();
  return c;
}

}  // namespace polariton::runner
