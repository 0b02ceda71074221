// Reproducible experiment driver: subcommand + config file in, CSV/JSON
// report out. Exit code 0 all checks pass, 1 a check failed, 2 usage or
// config error, 3 the reduced solver did not converge.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "polybubble/cli_commands.hpp"

namespace {

int run(const std::string& name, const std::string& config_path,
        const std::string& out_override, bool seed_set, uint64_t seed,
        bool jobs_set, int jobs) {
  polybubble::RunConfig cfg = polybubble::load_run_config(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (seed_set) cfg.seed = seed;
  if (jobs_set) {
    if (jobs < 0) throw polybubble::ConfigError("--jobs must be >= 0");
    cfg.jobs = jobs;
  }

  const polybubble::Report rep = polybubble::run_command(name, cfg);
  for (const auto& p : polybubble::write_report(rep, cfg.out_dir))
    std::printf("wrote %s\n", p.c_str());
  for (const auto& row : rep.rows)
    std::printf("%-40s %14.6e %s %14.6e  %s\n", row.name.c_str(), row.value,
                row.one_sided ? "<=" : "~~", row.predicted,
                row.pass ? "pass" : "FAIL");
  std::printf("status %d\n", rep.status);
  return rep.status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polybubble: doubled-circle construction checks"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  uint64_t seed = 0;
  int jobs = 0;

  std::vector<std::pair<std::string, CLI::App*>> subs;
  for (const char* name :
       {"constants", "lattice", "residual-scan", "solve", "pohozaev",
        "norms"}) {
    CLI::App* sub = app.add_subcommand(name, "");
    sub->add_option("--config", config_path, "key=value run description")
        ->required();
    sub->add_option("--out", out_dir, "report directory (overrides config)");
    sub->add_option("--seed", seed, "RNG seed (overrides config)");
    sub->add_option("--jobs", jobs, "worker threads, 0 = all");
    subs.emplace_back(name, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message and usage hint
    return 2;
  }

  for (const auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    try {
      return run(name, config_path, out_dir, sub->count("--seed") > 0, seed,
                 sub->count("--jobs") > 0, jobs);
    } catch (const polybubble::ConfigError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return 2;
    } catch (const std::invalid_argument& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return 2;
    } catch (const std::domain_error& e) {
      // regime arithmetic rejected the requested window
      std::fprintf(stderr, "config error: %s\n", e.what());
      return 2;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 1;
    }
  }
  return 2;
}
