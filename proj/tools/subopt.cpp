#include "subopt/commands.hpp"
#include "subopt/log.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>
#include <thread>

int main(int argc, char** argv) {
  CLI::App app{"Search for the most subradiant arrangements of quantum emitters."};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string out_dir = "out";

  using Command = std::function<int(const subopt::RunConfig&, const std::filesystem::path&)>;
  const std::vector<std::tuple<std::string, std::string, Command>> commands{
      {"modes", "Collective modes of a fixed configuration", subopt::cmd_modes},
      {"optimize", "Differential evolution for one problem", subopt::cmd_optimize},
      {"sweep", "Free-2D optimum and baselines over an r_min grid", subopt::cmd_sweep},
      {"scaling", "Loss scaling with N for chain families", subopt::cmd_scaling},
      {"compare1d", "Restricted-1D optimum against periodic and modulated chains", subopt::cmd_compare1d},
      {"oracle", "Exhaustive grid minimum for N = 2 or 3", subopt::cmd_oracle},
  };
  std::map<CLI::App*, Command> dispatch;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override settings.seed");
    sub->add_option("--jobs", jobs, "Worker threads for independent restarts")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    dispatch[sub] = fn;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? subopt::kExitOk : subopt::kExitConfig;
  }

  try {
    subopt::RunConfig cfg = subopt::load_run_config(config_path);
    if (seed) cfg.settings.seed = *seed;
    cfg.settings.jobs = jobs;
    for (const auto& [sub, fn] : dispatch) {
      if (sub->parsed()) return fn(cfg, out_dir);
    }
  } catch (const subopt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return subopt::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return subopt::kExitError;
  }
  return subopt::kExitError;
}
