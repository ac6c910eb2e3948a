#include "bowden/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <openssl/evp.h>

#include "bowden/errors.hpp"
#include "bowden/hand.hpp"
#include "bowden/scenarios.hpp"

namespace bowden::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void report(std::ostream& err, int code, const std::string& type, const std::string& message,
            json extra = json::object()) {
  json j = {{"error", {{"type", type}, {"message", message}}}, {"exit_code", code}};
  for (const auto& [k, v] : extra.items()) j["error"][k] = v;
  err << j.dump() << '\n';
}

// Maps an in-flight exception to its exit code and report.
int handle_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ConfigError& e) {
    json extra = {{"field", e.field()}};
    if (e.line() > 0) extra["line"] = e.line();
    report(err, kConfigError, "ConfigError", e.what(), extra);
    return kConfigError;
  } catch (const CsvSchemaError& e) {
    report(err, kDataError, "CsvSchemaError", e.what(), {{"column", e.column()}, {"row", e.row()}});
    return kDataError;
  } catch (const DegenerateData& e) {
    report(err, kDataError, "DegenerateData", e.what());
    return kDataError;
  } catch (const NonPositiveTension& e) {
    report(err, kDataError, "NonPositiveTension", e.what());
    return kDataError;
  } catch (const FaultedController& e) {
    report(err, kScenarioError, "ControllerFaulted", e.what());
    return kScenarioError;
  } catch (const PretensionTimeout& e) {
    report(err, kScenarioError, "PretensionTimeout", e.what());
    return kScenarioError;
  } catch (const Error& e) {
    report(err, kScenarioError, "ScenarioError", e.what());
    return kScenarioError;
  } catch (const std::exception& e) {
    report(err, kScenarioError, "InternalError", e.what());
    return kScenarioError;
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw ScenarioError(fmt::format("cannot write '{}'", path.string()));
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string run_id(const ScenarioConfig& cfg) {
  const std::string payload = dump_config(cfg) + fmt::format("seed={}\n", cfg.seed);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(payload.data(), payload.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw ScenarioError("SHA-256 failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

int cmd_run(const fs::path& config, const RunOptions& options, std::ostream& out,
            std::ostream& err) {
  try {
    ScenarioConfig cfg = load_config(config);
    if (options.seed) cfg.seed = *options.seed;
    const std::string id = run_id(cfg);
    if (!options.quiet) {
      out << fmt::format("running {} ({}), run id {}\n", to_string(cfg.kind), config.string(),
                         id.substr(0, 12));
    }
    const ScenarioResult result = run_scenario(cfg, options.jobs);

    fs::create_directories(options.out_dir);
    std::ostringstream csv;
    if (cfg.kind == ScenarioKind::FrictionSweep) {
      write_friction_csv(csv, result.sweep);
    } else {
      write_series_csv(csv, result.records);
    }
    const fs::path series = options.out_dir / "series.csv";
    const fs::path summary = options.out_dir / "summary.json";
    const fs::path plot = options.out_dir / "plot.svg";
    const fs::path manifest = options.out_dir / "manifest.json";
    write_file(series, csv.str());
    json sum = result.summary;
    sum["run_id"] = id;
    sum["config"] = to_json(cfg);
    write_file(summary, sum.dump(2) + "\n");
    write_file(plot, plot_result(cfg, result));
    const json man = {{"run_id", id},
                      {"timestamp", utc_timestamp()},
                      {"config_path", config.string()},
                      {"seed", cfg.seed},
                      {"tool_version", kToolVersion},
                      {"outputs",
                       {{"series", series.filename().string()},
                        {"summary", summary.filename().string()},
                        {"plot", plot.filename().string()},
                        {"manifest", manifest.filename().string()}}}};
    write_file(manifest, man.dump(2) + "\n");
    if (!options.quiet) {
      out << result.summary.dump(2) << '\n';
      out << fmt::format("wrote {}\n", options.out_dir.string());
    }
    return kOk;
  } catch (...) {
    return handle_current_exception(err);
  }
}

int cmd_validate(const fs::path& config, bool quiet, std::ostream& out, std::ostream& err) {
  try {
    const ScenarioConfig cfg = load_config(config);
    if (!quiet) out << fmt::format("{}: valid {} config\n", config.string(), to_string(cfg.kind));
    return kOk;
  } catch (...) {
    return handle_current_exception(err);
  }
}

int cmd_fit(const fs::path& csv, const fs::path& out_dir, FitSpace space, bool quiet,
            std::ostream& out, std::ostream& err) {
  try {
    std::ifstream in(csv, std::ios::binary);
    if (!in) throw CsvSchemaError("", 0, fmt::format("cannot open '{}'", csv.string()));
    const auto samples = read_friction_csv(in);
    std::map<std::string, std::vector<FrictionSample>> groups;
    for (const auto& s : samples) groups[s.sheath_type].push_back(s);

    std::string report = "sheath_type,mu,r_squared,standard_error_mu,samples\n";
    std::string table = fmt::format("{:<16} {:>12} {:>10} {:>12} {:>8}\n", "sheath", "mu", "R^2",
                                    "SE(mu)", "samples");
    for (const auto& [type, group] : groups) {
      FitResult fit;
      try {
        fit = fit_mu(group, space);
      } catch (const DegenerateData& e) {
        throw DegenerateData(fmt::format("sheath '{}': {}", type, e.what()));
      }
      report += fmt::format("{},{:.12g},{:.12g},{:.12g},{}\n", type, fit.mu, fit.r_squared,
                            fit.standard_error_mu, group.size());
      table += fmt::format("{:<16} {:>12.9f} {:>10.6f} {:>12.3e} {:>8}{}\n", type, fit.mu,
                           fit.r_squared, fit.standard_error_mu, group.size(),
                           fit.clamped ? "  (negative slope, clamped to 0)" : "");
    }
    const fs::path dir = out_dir.empty() ? csv.parent_path() : out_dir;
    if (!dir.empty()) fs::create_directories(dir);
    const fs::path report_path = dir / "fit_report.csv";
    write_file(report_path, report);
    if (!quiet) out << table << fmt::format("wrote {}\n", report_path.string());
    return kOk;
  } catch (...) {
    return handle_current_exception(err);
  }
}

int cmd_hand_describe(std::ostream& out) {
  out << describe(default_hand());
  return kOk;
}

int main(int argc, char** argv) {
  CLI::App app{"Bowden-cable tendon transmission simulator"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  RunOptions run_opts;
  std::string run_config;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "run a scenario config");
  run->add_option("config", run_config, "scenario config file")->required();
  run->add_option("--out", run_opts.out_dir, "output directory");
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  run->add_option("--jobs", run_opts.jobs, "parallel jobs")->check(CLI::PositiveNumber);
  run->add_flag("--quiet", run_opts.quiet, "print nothing on success");

  std::string fit_csv;
  std::string fit_out;
  std::string fit_space = "log";
  bool fit_quiet = false;
  auto* fit = app.add_subcommand("fit", "fit friction coefficients from a sweep CSV");
  fit->add_option("csv", fit_csv, "friction-sample CSV")->required();
  fit->add_option("--out", fit_out, "directory for fit_report.csv");
  fit->add_option("--space", fit_space, "regression space")
      ->check(CLI::IsMember({"log", "tension"}));
  fit->add_flag("--quiet", fit_quiet, "print nothing on success");

  auto* hand = app.add_subcommand("hand", "hand model");
  hand->require_subcommand(1);
  auto* describe_cmd = hand->add_subcommand("describe", "print the joint table");

  std::string validate_config;
  bool validate_quiet = false;
  auto* validate_cmd = app.add_subcommand("validate", "check a config without running it");
  validate_cmd->add_option("config", validate_config, "scenario config file")->required();
  validate_cmd->add_flag("--quiet", validate_quiet, "print nothing on success");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  if (run->parsed()) {
    if (*seed_opt) run_opts.seed = seed;
    return cmd_run(run_config, run_opts, std::cout, std::cerr);
  }
  if (fit->parsed()) {
    return cmd_fit(fit_csv, fit_out, fit_space == "tension" ? FitSpace::Tension : FitSpace::Log,
                   fit_quiet, std::cout, std::cerr);
  }
  if (describe_cmd->parsed()) return cmd_hand_describe(std::cout);
  if (validate_cmd->parsed()) {
    return cmd_validate(validate_config, validate_quiet, std::cout, std::cerr);
  }
  return kUsage;
}

}  // namespace bowden::cli
