// Command-line front end: run episodes / suites, generate synthetic scenes, print the default config.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "sonar/episode_runner.hpp"
#include "sonar/kernels.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<sonar::Scene> load_suite_dir(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".scene") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw sonar::ConfigError("no .scene files in " + dir);
  std::vector<sonar::Scene> scenes;
  for (const auto& f : files) scenes.push_back(sonar::load_scene(f.string()));
  return scenes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sonar: semantic object navigation on 2D grid worlds"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run one scene or a suite of scenes");
  std::string scene_file, suite_dir, config_file, ablation, baseline = "none", render_dir, trace_file;
  int synthetic = 0, repeats = 1, threads = 1, max_steps = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  auto* src = run->add_option_group("source");
  src->add_option("--scene", scene_file, "Scene file")->check(CLI::ExistingFile);
  src->add_option("--suite", suite_dir, "Directory of .scene files")->check(CLI::ExistingDirectory);
  src->add_option("--synthetic", synthetic, "Generated suite of N scenes (seeds 1..N)")->check(CLI::PositiveNumber);
  src->require_option(1);
  run->add_option("--config", config_file, "Key-value config file")->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Base seed (repeat r uses seed + r)")->each([&](const std::string&) {
    seed_given = true;
  });
  run->add_option("--ablation", ablation, "Comma-separated list of ENABLED modules from stl,mol,tpm,vm");
  run->add_option("--baseline", baseline, "Exploration policy override")
      ->check(CLI::IsMember({"none", "random-frontier"}));
  run->add_option("--repeats", repeats, "Seeds per scene")->check(CLI::PositiveNumber);
  run->add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  run->add_option("--max-steps", max_steps, "Override max_steps")->check(CLI::PositiveNumber);
  int syn_width = 48, syn_height = 48;
  run->add_option("--synthetic-size", syn_width, "Width and height of generated scenes")
      ->check(CLI::Range(24, 512))
      ->each([&](const std::string& v) { syn_height = std::stoi(v); });
  run->add_option("--render", render_dir, "Write per-step PGM panels here (single scene only)");
  run->add_option("--trace", trace_file, "Write decision traces here");

  auto* gen = app.add_subcommand("gen-suite", "Write a generated suite as .scene files");
  std::string out_dir;
  int count = 20;
  std::uint64_t gen_seed = 1;
  int width = 48, height = 48;
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen->add_option("--count", count, "Number of scenes")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "First scene seed");
  gen->add_option("--width", width)->check(CLI::Range(16, 512));
  gen->add_option("--height", height)->check(CLI::Range(16, 512));

  auto* abl = app.add_subcommand("ablate", "Full configuration vs every single-module ablation and the random baseline");
  std::string abl_config;
  int abl_scenes = 20, abl_repeats = 10, abl_threads = 0, abl_size = 48;
  std::uint64_t abl_scene_seed = 1;
  abl->add_option("--scene-seed", abl_scene_seed, "Seed of the first generated scene");
  abl->add_option("--config", abl_config, "Key-value config file")->check(CLI::ExistingFile);
  abl->add_option("--scenes", abl_scenes, "Generated scenes (alternating sparse / dense)")->check(CLI::PositiveNumber);
  abl->add_option("--repeats", abl_repeats, "Seeds per scene")->check(CLI::PositiveNumber);
  abl->add_option("--threads", abl_threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  abl->add_option("--size", abl_size, "Width and height of generated scenes")->check(CLI::Range(24, 512));

  auto* show = app.add_subcommand("show-config", "Print the effective configuration");
  std::string show_config;
  show->add_option("--config", show_config, "Config file to merge over the defaults")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*show) {
      const auto cfg = show_config.empty() ? sonar::EpisodeConfig{} : sonar::load_config(show_config);
      sonar::write_config(std::cout, cfg);
      return 0;
    }

    if (*abl) {
      const auto base = abl_config.empty() ? sonar::EpisodeConfig{} : sonar::load_config(abl_config);
      const auto scenes = sonar::synthetic_suite(abl_scenes, abl_scene_seed, abl_size, abl_size);
      struct Row {
        const char* label;
        const char* enabled;
        bool random;
      };
      const Row rows[] = {{"full", "stl,mol,tpm,vm", false}, {"w/o VM", "stl,mol,tpm", false},
                          {"w/o TPM", "stl,mol,vm", false},  {"w/o MOL", "stl,tpm,vm", false},
                          {"w/o STL", "mol,tpm,vm", false},  {"random-frontier", "stl,mol,tpm,vm", true}};
      std::printf("%-16s %6s %6s %10s %10s %9s %9s\n", "config", "SR", "SPL", "SR sparse", "SR dense", "SCI sp", "SCI de");
      for (const Row& row : rows) {
        auto cfg = base;
        cfg.ablation = sonar::parse_ablation(row.enabled);
        if (row.random) cfg.policy = sonar::ExplorationPolicy::RandomFrontier;
        const auto summary = sonar::run_suite(scenes, cfg, abl_repeats, abl_threads);
        double succ[2] = {0, 0}, sci[2] = {0, 0}, n[2] = {0, 0};
        for (const auto& r : summary.results) {
          const int k = r.scene.rfind("dense", 0) == 0 ? 1 : 0;
          succ[k] += r.success;
          sci[k] += r.mean_sci;
          n[k] += 1;
        }
        std::printf("%-16s %6.1f %6.1f %10.1f %10.1f %9.3f %9.3f\n", row.label, summary.sr, summary.spl,
                    100.0 * succ[0] / std::max(1.0, n[0]), 100.0 * succ[1] / std::max(1.0, n[1]),
                    sci[0] / std::max(1.0, n[0]), sci[1] / std::max(1.0, n[1]));
      }
      return 0;
    }

    if (*gen) {
      fs::create_directories(out_dir);
      for (int i = 0; i < count; ++i) {
        const auto density = i % 2 == 0 ? sonar::SemanticDensity::Sparse : sonar::SemanticDensity::Dense;
        const auto scene = sonar::generate_scene({width, height, density, gen_seed + static_cast<std::uint64_t>(i)});
        char name[32];
        std::snprintf(name, sizeof name, "%03d.scene", i);
        std::ofstream out(fs::path(out_dir) / name);
        sonar::write_scene(out, scene);
      }
      std::cout << "wrote " << count << " scenes to " << out_dir << '\n';
      return 0;
    }

    sonar::EpisodeConfig cfg = config_file.empty() ? sonar::EpisodeConfig{} : sonar::load_config(config_file);
    if (seed_given) cfg.seed = seed;
    if (!ablation.empty()) cfg.ablation = sonar::parse_ablation(ablation);
    if (baseline == "random-frontier") cfg.policy = sonar::ExplorationPolicy::RandomFrontier;
    if (max_steps > 0) cfg.max_steps = max_steps;
    cfg.validate();

    std::vector<sonar::Scene> scenes;
    if (!scene_file.empty()) scenes.push_back(sonar::load_scene(scene_file));
    else if (!suite_dir.empty()) scenes = load_suite_dir(suite_dir);
    else scenes = sonar::synthetic_suite(synthetic, 1, syn_width, syn_height);

    if (!render_dir.empty()) {
      if (scenes.size() != 1 || repeats != 1) throw sonar::ConfigError("--render needs a single scene and one repeat");
      fs::create_directories(render_dir);
      cfg.render_dir = render_dir;
    }

    std::cerr << "kernels: " << sonar::kernels::active().name << ", ablation: " << sonar::to_string(cfg.ablation)
              << ", policy: " << (cfg.policy == sonar::ExplorationPolicy::Sonar ? "sonar" : "random-frontier")
              << '\n';

    sonar::SuiteSummary summary;
    if (!cfg.render_dir.empty()) {
      summary.results.push_back(sonar::run_episode(scenes.front(), cfg));
      summary.sr = sonar::success_rate(summary.results);
      summary.spl = sonar::spl(summary.results);
    } else {
      summary = sonar::run_suite(scenes, cfg, repeats, threads);
    }

    std::ofstream trace;
    if (!trace_file.empty()) {
      trace.open(trace_file);
      if (!trace) throw sonar::ConfigError("cannot open trace file " + trace_file);
    }
    for (const auto& r : summary.results) {
      std::printf("%-16s seed=%-6llu %s steps=%-4d path=%7.2f optimal=%7.2f end=%s\n", r.scene.c_str(),
                  static_cast<unsigned long long>(r.seed), r.success ? "success" : "failure", r.steps,
                  r.path_length_m, r.optimal_length_m, sonar::to_string(r.termination));
      if (trace) trace << "# scene=" << r.scene << " seed=" << r.seed << '\n' << r.trace;
    }
    std::printf("episodes=%zu SR=%.1f SPL=%.1f\n", summary.results.size(), summary.sr, summary.spl);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
