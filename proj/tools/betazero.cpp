#include <CLI11.hpp>

#include "betazero/cli/commands.hpp"

int main(int argc, char** argv) {
  betazero::cli::Options opts;
  CLI::App app{"Belief-state MCTS planning with learned policy and value networks"};
  app.add_option("command", opts.command, "train | evaluate | lavi | baseline | ablate | sweep")
      ->required()
      ->check(CLI::IsMember({"train", "evaluate", "lavi", "baseline", "ablate", "sweep"}));
  app.add_option("--env", opts.env, "lightdark5 | lightdark10 | rocksample-15-15 | rocksample-20-20")
      ->required();
  app.add_option("--config", opts.configPath, "config file; overrides --preset");
  app.add_option("--preset", opts.preset, "committed preset: desk or paper")->capture_default_str();
  app.add_option("--seed", opts.seed, "master seed")->capture_default_str();
  app.add_option("--workers", opts.workers, "worker threads")->capture_default_str();
  app.add_option("--out", opts.outDir, "output directory")->capture_default_str();
  app.add_option("--checkpoint", opts.checkpoint, "network checkpoint for evaluate, sweep, zgrid");
  app.add_option("--method", opts.method,
                 "evaluate: search | raw_policy | raw_value; baseline: lavi | rollout");
  app.add_option("--nseeds", opts.nSeeds, "evaluation episodes (default from config)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : betazero::cli::kConfigError;
  }
  return betazero::cli::runCommand(opts);
}
