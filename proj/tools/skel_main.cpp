// Command line front end: skel <command> --config <file> [--out dir] [--seed n] [--threads n]

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "skel/config.hpp"
#include "skel/error.hpp"
#include "skel/parallel.hpp"
#include "skel/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for piecewise expanding recurrences"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;

  for (const auto& name : skel::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "base seed for every random stream");
    sub->add_option("--threads", threads, "worker threads (default: SKEL_THREADS or all cores)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (threads) {
      skel::set_thread_count(*threads);
    } else if (const char* env = std::getenv("SKEL_THREADS")) {
      skel::set_thread_count(static_cast<unsigned>(std::strtoul(env, nullptr, 10)));
    }
    skel::ExperimentConfig cfg = skel::parse_config(config_path);
    if (seed) skel::override_seed(cfg, *seed);
    skel::RunOptions opts;
    opts.out = out_dir;
    return skel::run_command(app.get_subcommands().front()->get_name(), cfg, opts);
  } catch (const skel::Error& e) {
    std::cerr << "skel: " << e.what() << '\n';
    return skel::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "skel: " << e.what() << '\n';
    return 1;
  }
}
