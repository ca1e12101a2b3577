// waynav: desk-scale zero-shot navigation pipeline driver.
//
// Subcommands: gen-data, train, eval-waypoints, run, ablate, report, inspect.
// Exit codes: 0 ok, 1 config error, 2 runtime failure.

#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "waynav/commands.hpp"
#include "waynav/config.hpp"

namespace {

waynav::RunConfig load_config(const std::string& config_path) {
  if (config_path.empty()) return waynav::RunConfig{};
  return waynav::load_run_config(config_path);
}

void apply_overrides(waynav::RunConfig& cfg, const std::string& output_dir,
                     long long seed, const std::string& planner, int episodes) {
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  if (!planner.empty()) cfg.planner = planner;
  if (episodes > 0) cfg.episode_count = episodes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zero-shot waypoint navigation pipeline"};
  app.require_subcommand(1);

  std::string config_path, output_dir, planner, world_file, run_name = "run";
  std::string metrics_file;
  long long seed = -1;
  int episodes = -1;
  double x = 0, y = 0, heading = 0;

  app.add_option("-c,--config", config_path, "run-config JSON file");
  app.add_option("-o,--output", output_dir, "output directory override");
  app.add_option("-s,--seed", seed, "seed override");

  auto* gen = app.add_subcommand("gen-data", "generate worlds, graphs, training data, episodes");
  auto* train = app.add_subcommand("train", "train the waypoint predictor");
  auto* evalwp = app.add_subcommand("eval-waypoints", "evaluate predictor vs geometric baseline on the holdout split");
  auto* run = app.add_subcommand("run", "run episodes with the configured planner");
  run->add_option("--planner", planner, "oracle | greedy | llm | text_explorer");
  run->add_option("--episodes", episodes, "episode count override (gen-data first)");
  run->add_option("--name", run_name, "run name prefix for output files");
  auto* ablate = app.add_subcommand("ablate", "baseline + prompt/mask ablations");
  auto* report = app.add_subcommand("report", "render a metrics file as a table");
  report->add_option("metrics", metrics_file, "path to *_metrics.json")->required();
  auto* inspect = app.add_subcommand("inspect", "scan a world from a pose; dump rasters as JSON");
  inspect->add_option("world", world_file, "world JSON file")->required();
  inspect->add_option("--x", x, "agent x (m)");
  inspect->add_option("--y", y, "agent y (m)");
  inspect->add_option("--heading", heading, "agent heading (deg)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    waynav::RunConfig cfg = load_config(config_path);
    apply_overrides(cfg, output_dir, seed, planner, episodes);
    cfg.validate();

    if (gen->parsed()) {
      waynav::cmd_gen_data(cfg);
      std::cout << "dataset written to " << cfg.output_dir << "\n";
    } else if (train->parsed()) {
      const auto losses = waynav::cmd_train(cfg);
      for (size_t i = 0; i < losses.size(); ++i) {
        std::cout << "epoch " << (i + 1) << " mean loss " << losses[i] << "\n";
      }
    } else if (evalwp->parsed()) {
      const auto ev = waynav::cmd_eval_waypoints(cfg);
      std::cout << waynav::render_waypoint_table(
          {{"model", ev.model}, {"geometric", ev.geometric}});
    } else if (run->parsed()) {
      const auto out = waynav::cmd_run(cfg, run_name);
      std::cout << waynav::render_nav_table({{run_name, out.summary}});
    } else if (ablate->parsed()) {
      waynav::cmd_ablate(cfg);
    } else if (report->parsed()) {
      const auto j = waynav::read_json_file(metrics_file);
      waynav::NavSummary s;
      const auto& js = j.at("summary");
      s.count = js.at("count").get<int>();
      s.ne_mean = js.at("ne_mean").get<double>();
      s.osr_pct = js.at("osr_pct").get<double>();
      s.sr_pct = js.at("sr_pct").get<double>();
      s.spl_mean = js.at("spl_mean").get<double>();
      s.ndtw_mean = js.at("ndtw_mean").get<double>();
      s.collision_rate_mean = js.at("collision_rate_mean").get<double>();
      std::cout << waynav::render_nav_table({{metrics_file, s}});
    } else if (inspect->parsed()) {
      std::cout << waynav::cmd_inspect(cfg, world_file, x, y, heading).dump(2)
                << "\n";
    }
  } catch (const waynav::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
