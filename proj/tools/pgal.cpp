#include <CLI11.hpp>

#include "pgal/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"pgal: Galerkin solver for degenerate parabolic equations on compact manifolds"};
  app.require_subcommand(1);

  pgal::CommandOptions opts;
  std::uint64_t seed = 0;
  std::string chosen;
  for (const char* name : {"verify", "solve", "solve-sde", "convergence"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "run configuration (JSON)")->required();
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--threads", opts.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->callback([&, name, sub] {
      chosen = name;
      if (sub->count("--seed")) opts.seed = seed;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pgal::kExitConfig;
  }
  return pgal::run_command(chosen, opts);
}
