#include "qswitch/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "qswitch/mgchain.hpp"
#include "qswitch/parties.hpp"

namespace qswitch::cli {

namespace {

using Json = nlohmann::ordered_json;
namespace sb = switchboard;

constexpr const char* kSchema = "qswitch/1";
constexpr std::uint64_t kStateStream = 0x61;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

double rounded(double x) { return std::strtod(num(x).c_str(), nullptr); }

Json record(const char* type) {
  Json j;
  j["schema"] = kSchema;
  j["type"] = type;
  return j;
}

std::string padded(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

void table_row(std::ostream& out, std::initializer_list<std::string> cells) {
  std::string line;
  std::size_t i = 0;
  for (const auto& c : cells) {
    line += (++i == cells.size()) ? c : padded(c, 16);
  }
  out << line << '\n';
}

struct Check {
  std::string name;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  bool upper_bound = false;  // pass when value < expected

  bool pass() const {
    return upper_bound ? value < expected : std::abs(value - expected) <= tolerance;
  }
};

// Runs checks in order and reports them; returns the exit status.
int report_checks(const char* command, const std::vector<Check>& checks, OutputFormat format,
                  std::ostream& out, std::ostream& err) {
  if (format == OutputFormat::Table) {
    out << padded("check", 32) << padded("value", 20) << padded("expected", 20) << "status\n";
  }
  const Check* first_failure = nullptr;
  for (const auto& c : checks) {
    if (!c.pass() && first_failure == nullptr) first_failure = &c;
    const std::string expected = (c.upper_bound ? "< " : "") + num(c.expected);
    if (format == OutputFormat::Table) {
      out << padded(c.name, 32) << padded(num(c.value), 20) << padded(expected, 20)
          << (c.pass() ? "PASS" : "FAIL") << '\n';
    } else {
      Json j = record("check");
      j["command"] = command;
      j["name"] = c.name;
      j["value"] = rounded(c.value);
      j["expected"] = rounded(c.expected);
      j["bound"] = c.upper_bound ? "upper" : "equal";
      j["tolerance"] = c.tolerance;
      j["pass"] = c.pass();
      out << j.dump() << '\n';
    }
  }
  if (first_failure != nullptr) {
    err << command << ": check failed: " << first_failure->name << '\n';
    return 1;
  }
  return 0;
}

std::array<double, 2> parse_angles(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw UsageError("--state", "--state: expected 'random' or 'theta,phi', got '" + text + "'");
  }
  std::array<double, 2> v{};
  const std::string parts[2] = {text.substr(0, comma), text.substr(comma + 1)};
  for (int i = 0; i < 2; ++i) {
    std::size_t used = 0;
    try {
      v[static_cast<std::size_t>(i)] = std::stod(parts[i], &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != parts[i].size()) {
      throw UsageError("--state", "--state: cannot parse '" + parts[i] + "' as a number");
    }
  }
  if (!(v[0] >= 0.0 && v[0] <= std::numbers::pi)) {
    throw UsageError("--state", "--state: theta must lie in [0, pi]");
  }
  if (!(v[1] >= 0.0 && v[1] < 2.0 * std::numbers::pi)) {
    throw UsageError("--state", "--state: phi must lie in [0, 2pi)");
  }
  return v;
}

BellIndex outcome_of(const parties::ProtocolTranscript& t, Party actor) {
  for (const auto& e : t.events) {
    if (e.actor == actor && e.kind() == parties::EventKind::BellMeasure) {
      return std::get<parties::BellMeasurePayload>(e.payload).outcome;
    }
  }
  throw StructuralError("transcript has no Bell measurement by " + party_name(actor));
}

std::uint64_t shot_seed(const RunConfig& c, int shot) {
  return derive_seed(c.seed, static_cast<std::uint64_t>(shot));
}

// ---- commands -------------------------------------------------------------

int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  std::vector<Check> checks;
  checks.push_back({"decomposition_12|34", sb::verify_decomposition(sb::Pairing::AliceBob), 1e-12, 0, true});
  checks.push_back(
      {"decomposition_13|24", sb::verify_decomposition(sb::Pairing::AliceCharlene), 1e-12, 0, true});

  const auto& table = sb::corrections();
  checks.push_back({"correction_U01_11_is_X",
                    table.at({0, 1}, {1, 1}).pauli == Pauli::X ? 1.0 : 0.0, 1.0, 0.0});
  double residual = 0.0;
  for (int k = 0; k < 8; ++k) {
    residual = std::max(residual, sb::reconstruction_residual(table, input_state(c, k)));
  }
  checks.push_back({"correction_reconstruction", residual, 1e-12, 0, true});

  for (Party p : {Party::Bob, Party::Charlene}) {
    const auto w = sb::reduced_channel(p);
    checks.push_back({"werner_noise_" + party_name(p), w.noise_fraction, 1.0 / 3.0, 1e-10});
  }
  const StateVector alpha = input_state(c, 0);
  const double expected_clone[] = {5.0 / 6.0, 5.0 / 6.0, 1.0 / 3.0};
  int i = 0;
  for (Party p : {Party::Bob, Party::Charlene, Party::Dick}) {
    checks.push_back({"clone_fidelity_" + party_name(p), sb::clone_fidelity(p, alpha).average_fidelity,
                      expected_clone[i++], 1e-10});
  }
  const auto psi = sb::build_switchboard().state();
  for (Route r : {Route::ToBob, Route::ToCharlene}) {
    checks.push_back({"demux_fidelity_" + route_name(r), sb::mean_demux_fidelity(psi, r, alpha), 1.0, 1e-9});
  }
  checks.push_back({"no_signaling", parties::no_signaling_check(20, c.seed), 1e-10, 0, true});

  const auto mg4 = mgchain::verify_ground_membership({4, 1.0, 1.0});
  checks.push_back({"mg_n4_ground_energy", mg4.ground_energy, -3.0, 1e-9});
  checks.push_back({"mg_n4_degeneracy", static_cast<double>(mg4.degeneracy), 2.0, 0.0});
  checks.push_back({"mg_n4_switchboard_deficit", *mg4.switchboard_deficit, 1e-10, 0, true});
  checks.push_back({"mg_n4_dimer_span", *mg4.span_mismatch, 1e-10, 0, true});
  const auto mg6 = mgchain::verify_ground_membership({6, 1.0, 1.0});
  checks.push_back({"mg_n6_degeneracy", static_cast<double>(mg6.degeneracy), 2.0, 0.0});
  checks.push_back({"mg_n6_dimer0_deficit", mg6.dimer0_deficit, 1e-10, 0, true});
  checks.push_back({"mg_n6_dimer1_deficit", mg6.dimer1_deficit, 1e-10, 0, true});
  return report_checks("verify", checks, c.format, out, err);
}

int cmd_clone(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.format == OutputFormat::Table) table_row(out, {"shot", "party", "mn", "fidelity", "average"});
  const Check* failure = nullptr;
  std::vector<Check> checks;
  checks.reserve(static_cast<std::size_t>(c.shots) * 3);
  for (int shot = 0; shot < c.shots; ++shot) {
    const StateVector alpha = input_state(c, shot);
    const auto t = parties::run_telecloning_session(alpha, shot_seed(c, shot));
    const auto f = parties::clone_fidelities(t);
    const BellIndex mn = outcome_of(t, Party::Alice);
    const std::pair<Party, double> rows[] = {
        {Party::Bob, f.bob}, {Party::Charlene, f.charlene}, {Party::Dick, f.dick}};
    for (const auto& [party, fidelity] : rows) {
      const double average = sb::clone_fidelity(party, alpha).average_fidelity;
      const double expected = party == Party::Dick ? 1.0 / 3.0 : 5.0 / 6.0;
      checks.push_back({"clone_shot" + std::to_string(shot) + "_" + party_name(party), fidelity, expected, 1e-10});
      if (failure == nullptr && !checks.back().pass()) failure = &checks.back();
      if (c.format == OutputFormat::Table) {
        table_row(out, {std::to_string(shot), party_name(party), mn.label(), num(fidelity), num(average)});
      } else {
        Json j = record("clone");
        j["shot"] = shot;
        j["seed"] = shot_seed(c, shot);
        j["party"] = party_name(party);
        j["mn"] = mn.label();
        j["fidelity"] = rounded(fidelity);
        j["average_fidelity"] = rounded(average);
        out << j.dump() << '\n';
      }
    }
  }
  if (failure != nullptr) {
    err << "clone: check failed: " << failure->name << '\n';
    return 1;
  }
  return 0;
}

int cmd_demux(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const Route route = *c.route;
  const Party idle = sb::route_geometry(route).idle;
  if (c.format == OutputFormat::Table) table_row(out, {"shot", "route", "mn", "kl", "final_fidelity"});
  for (int shot = 0; shot < c.shots; ++shot) {
    const auto t = parties::run_session(route, input_state(c, shot), shot_seed(c, shot));
    parties::validate(t);
    const double replayed = parties::replay(t);
    if (c.format == OutputFormat::Table) {
      table_row(out, {std::to_string(shot), route_name(route), outcome_of(t, Party::Alice).label(),
                      outcome_of(t, idle).label(), num(t.final_fidelity)});
    } else {
      out << parties::serialize(t);
    }
    const Check check{"demux_shot" + std::to_string(shot), std::min(t.final_fidelity, replayed), 1.0, 1e-9};
    if (!check.pass()) {
      err << "demux: check failed: " << check.name << '\n';
      return 1;
    }
  }
  return 0;
}

void emit_values(const char* type, const std::vector<std::pair<std::string, double>>& values,
                 const Json& extra, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::Table) {
    for (const auto& [k, v] : values) out << padded(k, 32) << num(v) << '\n';
    return;
  }
  Json j = record(type);
  for (const auto& [k, v] : extra.items()) j[k] = v;
  for (const auto& [k, v] : values) j[k] = rounded(v);
  out << j.dump() << '\n';
}

int cmd_ghz(const RunConfig& c, std::ostream& out, std::ostream&) {
  for (int shot = 0; shot < c.shots; ++shot) {
    const StateVector alpha = input_state(c, shot);
    const auto g = sb::ghz_baseline(alpha);
    const auto bloch = bloch_vector(alpha);
    if (c.format == OutputFormat::Table) {
      out << padded("shot", 32) << shot << '\n';
    }
    Json extra;
    extra["shot"] = shot;
    extra["alpha_bloch"] = {rounded(bloch[0]), rounded(bloch[1]), rounded(bloch[2])};
    emit_values("ghz",
                {{"bob_clone_fidelity", g.bob_clone_fidelity},
                 {"charlene_clone_fidelity", g.charlene_clone_fidelity},
                 {"bob_clone_haar_average", g.bob_clone_haar_average},
                 {"charlene_clone_haar_average", g.charlene_clone_haar_average},
                 {"teleport_to_bob", g.teleport_to_bob},
                 {"teleport_to_charlene", g.teleport_to_charlene}},
                extra, c.format, out);
  }
  return 0;
}

int cmd_noise(const RunConfig& c, std::ostream& out, std::ostream&) {
  const auto report = sb::noise_robustness(c.channel, c.shots, c.seed);
  Json extra;
  extra["channel"] = c.channel == sb::NoiseChannel::CollectiveZRotation ? "z" : "haar";
  extra["samples"] = c.shots;
  extra["seed"] = c.seed;
  emit_values("noise",
              {{"switchboard_fidelity", report.switchboard_fidelity}, {"ghz_fidelity", report.ghz_fidelity}},
              extra, c.format, out);
  return 0;
}

int cmd_mg(const RunConfig& c, std::ostream& out, std::ostream&) {
  const mgchain::SpinChainSpec spec{c.sites, c.coupling, c.alpha_mg};
  const auto spectrum = mgchain::diagonalize(spec);
  std::vector<std::pair<std::string, double>> values = {
      {"ground_energy", spectrum.ground_energy},
      {"degeneracy", static_cast<double>(spectrum.degeneracy)},
      {"gap", spectrum.gap()},
      {"dimer0_deficit", mgchain::projection_deficit(spectrum, mgchain::dimer_state(c.sites, 0))},
      {"dimer1_deficit", mgchain::projection_deficit(spectrum, mgchain::dimer_state(c.sites, 1))},
  };
  if (c.sites == 4) {
    values.push_back({"switchboard_deficit",
                      mgchain::projection_deficit(spectrum, sb::build_switchboard().state())});
  }
  Json extra;
  extra["n"] = c.sites;
  extra["j"] = c.coupling;
  extra["alpha"] = c.alpha_mg;
  if (c.format == OutputFormat::Table) {
    out << padded("n", 32) << c.sites << '\n'
        << padded("j", 32) << num(c.coupling) << '\n'
        << padded("alpha", 32) << num(c.alpha_mg) << '\n';
  }
  emit_values("mg", values, extra, c.format, out);
  return 0;
}

int cmd_scan(const RunConfig& c, std::ostream& out, std::ostream&) {
  const auto rows = mgchain::gap_scan(c.sites, c.alpha_grid, c.coupling);
  if (c.format == OutputFormat::Table) {
    out << mgchain::format_scan_table(rows);
    return 0;
  }
  for (const auto& r : rows) {
    Json j = record("scan");
    j["n"] = c.sites;
    j["alpha"] = rounded(r.alpha);
    j["ground_energy"] = rounded(r.ground_energy);
    j["gap"] = rounded(r.gap);
    j["degeneracy"] = r.degeneracy;
    out << j.dump() << '\n';
  }
  return 0;
}

}  // namespace

std::string command_name(Command c) {
  switch (c) {
    case Command::Verify: return "verify";
    case Command::Clone: return "clone";
    case Command::Demux: return "demux";
    case Command::Ghz: return "ghz";
    case Command::Noise: return "noise";
    case Command::Mg: return "mg";
    case Command::Scan: return "scan";
  }
  return "?";
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != item.size() || !std::isfinite(v)) {
      throw UsageError("--alpha-grid", "--alpha-grid: cannot parse '" + item + "' as a number");
    }
    parts.push_back(v);
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) throw UsageError("--alpha-grid", "--alpha-grid: expected a:b:step");
  const double a = parts[0], b = parts[1], step = parts[2];
  if (!(step > 0.0) || b < a) {
    throw UsageError("--alpha-grid", "--alpha-grid: need step > 0 and b >= a");
  }
  const double span = (b - a) / step;
  const auto count = static_cast<long>(std::floor(span + 1e-9)) + 1;
  if (count > 100000) throw UsageError("--alpha-grid", "--alpha-grid: too many points");
  std::vector<double> grid;
  for (long i = 0; i < count; ++i) grid.push_back(a + static_cast<double>(i) * step);
  return grid;
}

RunConfig parse_args(const std::vector<std::string>& args) {
  RunConfig config;
  CLI::App app{"qswitch: quantum switchboard simulator", "qswitch"};
  app.require_subcommand(1);

  std::string route, state = "random", format = "table", channel = "haar", grid, out_path;
  int shots = 1, n = 4;
  double j = 1.0, alpha_mg = 1.0;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--format", format, "table | records")->check(CLI::IsMember({"table", "records"}));
    sub->add_option("--out", out_path, "write the report to this file");
  };
  auto add_state = [&](CLI::App* sub) {
    sub->add_option("--state", state, "input qubit: random | theta,phi");
    sub->add_option("--shots", shots, "number of runs")->check(CLI::PositiveNumber);
  };
  auto add_chain = [&](CLI::App* sub) {
    sub->add_option("--n", n, "number of sites");
    sub->add_option("--j", j, "coupling J");
  };

  struct Sub {
    Command command;
    CLI::App* app;
  };
  std::vector<Sub> subs;
  auto* verify = app.add_subcommand("verify", "run the built-in verification checks");
  add_common(verify);
  verify->add_option("--state", state, "input qubit: random | theta,phi");
  subs.push_back({Command::Verify, verify});
  auto* clone = app.add_subcommand("clone", "telecloning fidelities");
  add_common(clone);
  add_state(clone);
  subs.push_back({Command::Clone, clone});
  auto* demux = app.add_subcommand("demux", "demultiplexer sessions");
  add_common(demux);
  add_state(demux);
  demux->add_option("--route", route, "bob | charlene")->check(CLI::IsMember({"bob", "charlene"}));
  subs.push_back({Command::Demux, demux});
  auto* ghz = app.add_subcommand("ghz", "GHZ baseline");
  add_common(ghz);
  add_state(ghz);
  subs.push_back({Command::Ghz, ghz});
  auto* noise = app.add_subcommand("noise", "collective-noise robustness");
  add_common(noise);
  noise->add_option("--shots", shots, "number of noise samples")->check(CLI::PositiveNumber);
  noise->add_option("--channel", channel, "z | haar")->check(CLI::IsMember({"z", "haar"}));
  subs.push_back({Command::Noise, noise});
  auto* mg = app.add_subcommand("mg", "Majumdar-Ghosh spectrum");
  add_common(mg);
  add_chain(mg);
  mg->add_option("--alpha", alpha_mg, "next-nearest coupling ratio");
  subs.push_back({Command::Mg, mg});
  auto* scan = app.add_subcommand("scan", "gap scan over alpha");
  add_common(scan);
  add_chain(scan);
  scan->add_option("--alpha-grid", grid, "a:b:step")->required();
  subs.push_back({Command::Scan, scan});

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw UsageError("--help", app.help());
  } catch (const CLI::ParseError& e) {
    std::string flag = "?";
    const std::string what = e.what();
    const auto dash = what.find("--");
    if (dash != std::string::npos) {
      const auto end = what.find_first_of(" :,=", dash);
      flag = what.substr(dash, end == std::string::npos ? std::string::npos : end - dash);
    } else if (!args.empty()) {
      flag = args.front();
    }
    throw UsageError(flag, what);
  }

  for (const auto& s : subs) {
    if (s.app->parsed()) config.command = s.command;
  }
  const auto was_set = [&](const char* name) {
    for (const auto& s : subs) {
      if (!s.app->parsed()) continue;
      const auto* opt = s.app->get_option_no_throw(name);
      return opt != nullptr && opt->count() > 0;
    }
    return false;
  };

  config.shots = shots;
  config.seed = seed;
  config.format = format == "records" ? OutputFormat::Records : OutputFormat::Table;
  if (was_set("--out")) config.out_path = out_path;
  if (state != "random") config.state_angles = parse_angles(state);
  config.channel = channel == "z" ? sb::NoiseChannel::CollectiveZRotation : sb::NoiseChannel::CollectiveUnitary;
  if (!route.empty()) config.route = parse_route(route);
  if (config.command == Command::Demux && !config.route) {
    throw UsageError("--route", "--route is required for demux");
  }
  config.sites = n;
  config.coupling = j;
  config.alpha_mg = alpha_mg;
  if (config.command == Command::Mg || config.command == Command::Scan) {
    const int limit = config.command == Command::Mg ? mgchain::kMaxDiagonalizeSites
                                                    : mgchain::kMaxDenseOperatorSites;
    if (n < 4 || n % 2 != 0 || n > limit) {
      throw UsageError("--n", "--n: need an even site count in [4, " + std::to_string(limit) + "]");
    }
    if (!(j > 0.0) || !std::isfinite(j)) throw UsageError("--j", "--j: coupling must be positive");
    if (!std::isfinite(alpha_mg)) throw UsageError("--alpha", "--alpha: must be finite");
  }
  if (config.command == Command::Scan) config.alpha_grid = parse_grid(grid);
  return config;
}

StateVector input_state(const RunConfig& config, int shot) {
  if (config.state_angles) return state_from_bloch((*config.state_angles)[0], (*config.state_angles)[1]);
  return random_pure_qubit(derive_seed(derive_seed(config.seed, kStateStream), static_cast<std::uint64_t>(shot)));
}

int execute(const RunConfig& config, std::ostream& out, std::ostream& err) {
  switch (config.command) {
    case Command::Verify: return cmd_verify(config, out, err);
    case Command::Clone: return cmd_clone(config, out, err);
    case Command::Demux: return cmd_demux(config, out, err);
    case Command::Ghz: return cmd_ghz(config, out, err);
    case Command::Noise: return cmd_noise(config, out, err);
    case Command::Mg: return cmd_mg(config, out, err);
    case Command::Scan: return cmd_scan(config, out, err);
  }
  return 2;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  RunConfig config;
  try {
    config = parse_args(args);
  } catch (const UsageError& e) {
    if (e.flag() == "--help") {
      out << e.what();
      return 0;
    }
    err << "usage error (" << e.flag() << "): " << e.what() << '\n';
    return 2;
  }
  try {
    if (config.out_path) {
      std::ofstream file(*config.out_path, std::ios::binary);
      if (!file) {
        err << "usage error (--out): cannot open " << *config.out_path << '\n';
        return 2;
      }
      return execute(config, file, err);
    }
    return execute(config, out, err);
  } catch (const std::exception& e) {
    err << command_name(config.command) << ": check failed: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace qswitch::cli
