// aerobridge command line: scenario runs and experiments through the C API.
//
// Exit codes: 0 success, 1 scenario not completed (aborted, timeout, error),
// 2 configuration or usage error, 3 property violation.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "aerobridge/aerobridge.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAborted = 1;
constexpr int kExitConfig = 2;
constexpr int kExitViolation = 3;

int report_error(const char* what, ab_status status) {
  std::fprintf(stderr, "aerobridge: %s: %s: %s\n", what, ab_status_name(status),
               ab_last_error_message());
  return status == AB_ERR_CONFIG ? kExitConfig : kExitAborted;
}

// Loads the file when given, otherwise the built-in defaults.
ab_status make_config(const std::string& path, ab_config** out) {
  return path.empty() ? ab_config_create_default(out) : ab_config_load(path.c_str(), out);
}

std::string text_of(ab_status (*get)(const ab_experiment*, ab_format, char*, size_t, size_t*),
                    const ab_experiment* x, ab_format format) {
  size_t n = 0;
  if (get(x, format, nullptr, 0, &n) != AB_OK) return {};
  std::vector<char> buf(n + 1);
  get(x, format, buf.data(), buf.size(), &n);
  return std::string(buf.data(), n);
}

struct RunOptions {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  std::string format = "csv";
};

struct ExperimentOptions {
  std::string kind;
  std::string config;
  std::string out;
  std::string format = "csv";
  int iterations = 0;
};

ab_format parse_format(const std::string& s) { return s == "json" ? AB_FORMAT_JSON : AB_FORMAT_CSV; }

int cmd_run(const RunOptions& o) {
  ab_config* config = nullptr;
  ab_status st = make_config(o.config, &config);
  if (st != AB_OK) return report_error("config", st);
  if (o.seed) ab_config_set_seed(config, *o.seed);

  ab_run* run = nullptr;
  st = ab_run_scenario(config, &run);
  ab_config_free(config);
  if (st != AB_OK) return report_error("run", st);

  ab_run_summary s{};
  ab_run_get_summary(run, &s);
  char reason[256] = "";
  ab_run_get_reason(run, reason, sizeof reason, nullptr);

  if (!o.out.empty()) {
    st = ab_run_write(run, o.out.c_str(), parse_format(o.format));
    if (st != AB_OK) {
      ab_run_free(run);
      return report_error("write", st);
    }
  }
  ab_run_free(run);

  static const char* const kOutcome[] = {"TransferDone", "Aborted", "Timeout", "Error"};
  std::printf("seed %llu: %s", static_cast<unsigned long long>(s.seed), kOutcome[s.outcome]);
  if (reason[0]) std::printf(" (%s)", reason);
  std::printf("\n  sim time %.2f s", s.sim_time);
  if (s.has_lock_time) std::printf(", lock at %.2f s", s.lock_time);
  if (s.has_transfer_duration) std::printf(", transfer %.3f s", s.transfer_duration);
  std::printf(", receiver drift %.3f m\n", s.max_displacement);
  return s.success ? kExitOk : kExitAborted;
}

int cmd_experiment(const ExperimentOptions& o) {
  ab_experiment_kind kind = AB_EXPERIMENT_TRAJECTORIES;
  if (o.kind == "cmp") kind = AB_EXPERIMENT_CMP;
  if (o.kind == "protocol") kind = AB_EXPERIMENT_PROTOCOL;

  ab_config* config = nullptr;
  ab_status st = make_config(o.config, &config);
  if (st != AB_OK) return report_error("config", st);

  ab_experiment* x = nullptr;
  st = ab_experiment_run(config, kind, o.iterations, &x);
  ab_config_free(config);
  if (st != AB_OK) return report_error(o.kind.c_str(), st);

  const ab_format format = parse_format(o.format);
  if (!o.out.empty()) {
    st = ab_experiment_write(x, o.out.c_str(), format);
    if (st != AB_OK) {
      ab_experiment_free(x);
      return report_error("write", st);
    }
  }
  std::fputs(text_of(ab_experiment_get_text, x, format).c_str(), stdout);

  int passed = 0;
  ab_experiment_passed(x, &passed);
  ab_experiment_free(x);
  std::printf("verdict: %s\n", passed ? "PASS" : "FAIL");
  if (passed) return kExitOk;
  return kind == AB_EXPERIMENT_CMP ? kExitAborted : kExitViolation;
}

int cmd_defaults() {
  ab_config* config = nullptr;
  ab_status st = ab_config_create_default(&config);
  if (st != AB_OK) return report_error("config", st);
  size_t n = 0;
  ab_config_serialize(config, nullptr, 0, &n);
  std::vector<char> buf(n + 1);
  ab_config_serialize(config, buf.data(), buf.size(), &n);
  ab_config_free(config);
  std::fwrite(buf.data(), 1, n, stdout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mid-air battery handoff simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ab_version()));

  RunOptions run;
  uint64_t seed = 0;
  CLI::App* run_cmd = app.add_subcommand("run", "Run one handoff scenario");
  run_cmd->add_option("--config", run.config, "Scenario file (defaults when omitted)")
      ->check(CLI::ExistingFile);
  CLI::Option* seed_opt = run_cmd->add_option("--seed", seed, "Override the configured seed");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_option("--format", run.format, "Table format")
      ->check(CLI::IsMember({"csv", "json"}));

  ExperimentOptions exp;
  CLI::App* exp_cmd = app.add_subcommand("experiment", "Run one of the experiments");
  exp_cmd->add_option("kind", exp.kind, "trajectories, cmp or protocol")
      ->required()
      ->check(CLI::IsMember({"trajectories", "cmp", "protocol"}));
  exp_cmd->add_option("--config", exp.config, "Scenario file (defaults when omitted)")
      ->check(CLI::ExistingFile);
  exp_cmd->add_option("--out", exp.out, "Output directory");
  exp_cmd->add_option("--format", exp.format, "Result format")
      ->check(CLI::IsMember({"csv", "json"}));
  exp_cmd->add_option("--iterations", exp.iterations, "Seeds per case (configured when omitted)")
      ->check(CLI::NonNegativeNumber);

  CLI::App* defaults_cmd = app.add_subcommand("defaults", "Print the default scenario file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run_cmd) {
    if (*seed_opt) run.seed = seed;
    return cmd_run(run);
  }
  if (*exp_cmd) return cmd_experiment(exp);
  if (*defaults_cmd) return cmd_defaults();
  return kExitConfig;
}
