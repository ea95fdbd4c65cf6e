// Command-line front end. Talks to the library exclusively through the C
// API so it doubles as a living example of the shared-library surface.
// Exit codes: 0 success, 2 config/usage error, 3 verification failure,
// 1 anything else.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "bobw/c_api.h"

namespace {

bool read_file(const std::string& path, std::string* out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream buf;
  buf << in.rdbuf();
  *out = buf.str();
  return in.good() || in.eof();
}

int exit_for(bobw_status status) {
  switch (status) {
    case BOBW_OK:
      return 0;
    case BOBW_ERR_CONFIG:
      return 2;
    default:
      return 1;
  }
}

int report_failure(const char* verb, bobw_status status) {
  std::fprintf(stderr, "bobw %s failed [%d]: %s\n", verb,
               static_cast<int>(status), bobw_last_error());
  return exit_for(status);
}

void print_owned(char* text) {
  if (text != nullptr) {
    std::fputs(text, stdout);
    std::fputc('\n', stdout);
    bobw_string_free(text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandit experiment harness: seeded simulations, bound "
               "evaluation, and numeric verification"};
  app.set_version_flag("--version", bobw_version());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int workers = 0;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run one experiment config");
  auto* sweep = app.add_subcommand("sweep", "Run a policy/horizon sweep");
  auto* bounds = app.add_subcommand("bounds", "Evaluate bound formulas");
  auto* verify =
      app.add_subcommand("verify", "Check the numeric claims the bounds use");

  for (auto* sub : {run, sweep, bounds}) {
    sub->add_option("--config", config_path, "JSON config path")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", workers, "worker threads (default 1)");
    sub->add_option("--seed", seed, "master seed override");
  }
  verify->add_option("--config", config_path,
                     "JSON options path (tolerances, grid sizes)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const bool has_seed =
      (run->count("--seed") + sweep->count("--seed") +
       bounds->count("--seed")) > 0;

  std::string config_text;
  if (!config_path.empty() && !read_file(config_path, &config_text)) {
    std::fprintf(stderr, "cannot read config file: %s\n", config_path.c_str());
    return 2;
  }

  if (run->parsed()) {
    char* summary = nullptr;
    const bobw_status st = bobw_run_experiment(
        config_text.c_str(), out_dir.c_str(), workers, has_seed ? 1 : 0, seed,
        &summary);
    if (st != BOBW_OK) return report_failure("run", st);
    print_owned(summary);
    return 0;
  }
  if (sweep->parsed()) {
    char* result = nullptr;
    const bobw_status st =
        bobw_sweep(config_text.c_str(), out_dir.c_str(), workers,
                   has_seed ? 1 : 0, seed, &result);
    if (st != BOBW_OK) return report_failure("sweep", st);
    print_owned(result);
    return 0;
  }
  if (bounds->parsed()) {
    char* result = nullptr;
    const bobw_status st = bobw_eval_bounds(config_text.c_str(), &result);
    if (st != BOBW_OK) return report_failure("bounds", st);
    print_owned(result);
    return 0;
  }
  // verify
  char* report = nullptr;
  int pass = 0;
  const bobw_status st =
      bobw_verify(config_path.empty() ? "" : config_text.c_str(), &report,
                  &pass);
  if (st != BOBW_OK) return report_failure("verify", st);
  print_owned(report);
  if (pass == 0) {
    std::fprintf(stderr, "verification FAILED: at least one check is out of "
                         "tolerance\n");
    return 3;
  }
  return 0;
}
