// rewardkit command line: score, simulate, eval, fit-rm, serve.

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rewardkit/eval_harness.hpp"
#include "rewardkit/experiment.hpp"
#include "rewardkit/pipeline.hpp"
#include "rewardkit/server.hpp"
#include "rewardkit/synthetic_rm.hpp"
#include "rewardkit/text.hpp"

namespace {

using nlohmann::json;
using namespace rewardkit;

constexpr int kUsageError = 2;
constexpr int kDataError = 3;

pipeline::PipelineConfig resolve_config(const std::string& config_path, std::optional<std::uint64_t> seed,
                                        const std::string& mode) {
  auto config = config_path.empty() ? pipeline::PipelineConfig{} : pipeline::load_config(config_path);
  if (!mode.empty()) {
    const auto m = parse_reward_mode(mode);
    if (!m) throw pipeline::ConfigError("unknown mode '" + mode + "'");
    config.mode = *m;
  }
  if (seed) config.seed = *seed;
  config.noise.seed = config.seed;
  config.validate();
  return config;
}

int run_score(const pipeline::Scorer& scorer, std::istream& in, std::ostream& out) {
  // Lines that do not yield a record keep their slot and get an in-band error.
  struct Slot {
    std::optional<std::size_t> index;
    json error;
  };
  std::vector<pipeline::RolloutRecord> records;
  std::vector<Slot> slots;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json item;
    try {
      item = json::parse(line);
    } catch (const json::exception& e) {
      slots.push_back({std::nullopt, json{{"id", nullptr}, {"error", "line " + std::to_string(line_no) + ": " + e.what()}}});
      continue;
    }
    try {
      auto record = pipeline::record_from_json(item);
      if (!ids.insert(record.id).second) {
        std::cerr << "error: duplicate record id '" << record.id << "' at line " << line_no << '\n';
        return kDataError;
      }
      records.push_back(std::move(record));
      slots.push_back({records.size() - 1, nullptr});
    } catch (const std::exception& e) {
      json id = nullptr;
      if (item.is_object() && item.contains("id")) {
        id = item.at("id").is_number_integer() ? json(item.at("id").dump()) : item.at("id");
      }
      slots.push_back({std::nullopt, json{{"id", id}, {"error", "line " + std::to_string(line_no) + ": " + e.what()}}});
    }
  }

  const auto signals = scorer.score_batch(records);
  for (const auto& slot : slots) {
    out << (slot.index ? pipeline::signal_to_json(signals[*slot.index]) : slot.error).dump() << '\n';
  }
  return 0;
}

int serve_tcp(std::shared_ptr<const pipeline::Scorer> scorer, server::ServeOptions options) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  // Worker threads inherit the mask so only sigwait below sees the signals.
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  server::RewardServer srv(std::move(scorer), options);
  const auto port = srv.start();
  std::cout << "listening on " << options.host << ":" << port << std::endl;
  int received = 0;
  sigwait(&signals, &received);
  srv.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rewardkit: reward scoring, simulation and pairwise evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string input_path;
  std::string mode;
  std::optional<std::uint64_t> seed;

  auto* score = app.add_subcommand("score", "Score JSON-lines rollout records");
  score->add_option("-c,--config", config_path, "Pipeline config (JSON)");
  score->add_option("-i,--input", input_path, "Records file; stdin when omitted");
  score->add_option("-m,--mode", mode, "Override the config mode");
  score->add_option("--seed", seed, "Override the config seed");

  std::string profile;
  std::string out_dir;
  std::uint64_t sim_seed = 0;
  std::optional<int> steps;
  auto* simulate = app.add_subcommand("simulate", "Run a simulator experiment profile");
  simulate->add_option("-p,--profile", profile, "flip_sweep | rpr_only | rm_sweep | rm_calibrated")->required();
  simulate->add_option("-o,--out", out_dir, "Directory for metrics and summary");
  simulate->add_option("--seed", sim_seed, "Experiment seed");
  simulate->add_option("--steps", steps, "Override the step budget of every arm");

  std::string ballots_path;
  auto* eval = app.add_subcommand("eval", "Aggregate judge ballots");
  eval->add_option("-b,--ballots", ballots_path, "Ballots JSON-lines; stdin when omitted");

  synthetic_rm::RmTargets targets;
  std::string rm_out;
  auto* fit = app.add_subcommand("fit-rm", "Fit a synthetic reward model");
  fit->add_option("--accuracy", targets.accuracy, "Target accuracy")->required();
  fit->add_option("--variance", targets.variance, "Target pooled score variance")->required();
  fit->add_option("--seed", targets.seed, "Score seed");
  fit->add_option("--draws", targets.validation_draws, "Monte Carlo validation draws");
  fit->add_option("-o,--out", rm_out, "Output file; stdout when omitted");

  server::ServeOptions serve_options;
  bool stdio = false;
  std::optional<std::uint64_t> serve_seed;
  std::string serve_config;
  auto* serve = app.add_subcommand("serve", "Serve scoring requests over TCP or stdio");
  serve->add_option("-c,--config", serve_config, "Pipeline config (JSON)");
  serve->add_option("--host", serve_options.host, "Listen address");
  serve->add_option("--port", serve_options.port, "Listen port; 0 picks a free one");
  serve->add_option("--seed", serve_seed, "Override the config seed");
  serve->add_flag("--stdio", stdio, "Read requests from stdin instead of listening");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*score) {
      const pipeline::Scorer scorer(resolve_config(config_path, seed, mode));
      if (input_path.empty()) return run_score(scorer, std::cin, std::cout);
      std::ifstream in(input_path);
      if (!in) {
        std::cerr << "error: cannot open " << input_path << '\n';
        return kUsageError;
      }
      return run_score(scorer, in, std::cout);
    }
    if (*simulate) {
      experiment::ExperimentOptions options;
      if (!out_dir.empty()) options.out_dir = out_dir;
      options.seed = sim_seed;
      options.max_steps = steps;
      const auto summary = experiment::run_experiment(profile, options);
      std::cout << experiment::summary_to_json(summary).dump(2) << '\n';
      return 0;
    }
    if (*eval) {
      std::vector<eval::JudgmentBallot> ballots;
      if (ballots_path.empty()) {
        ballots = eval::read_ballots(std::cin);
      } else {
        std::ifstream in(ballots_path);
        if (!in) {
          std::cerr << "error: cannot open " << ballots_path << '\n';
          return kUsageError;
        }
        ballots = eval::read_ballots(in);
      }
      std::cout << eval::to_json(eval::evaluate_ballots(ballots)).dump(2) << '\n';
      return 0;
    }
    if (*fit) {
      const auto rm = synthetic_rm::fit_synthetic_rm(targets);
      const auto text = json(rm).dump(2);
      if (rm_out.empty()) {
        std::cout << text << '\n';
      } else {
        std::ofstream(rm_out) << text << '\n';
      }
      return 0;
    }
    if (*serve) {
      auto scorer = std::make_shared<const pipeline::Scorer>(resolve_config(serve_config, serve_seed, ""));
      if (stdio) {
        server::serve_stream(*scorer, std::cin, std::cout);
        return 0;
      }
      return serve_tcp(std::move(scorer), serve_options);
    }
  } catch (const synthetic_rm::FitError& e) {
    std::cerr << "error: " << e.what() << " (closest reachable variance " << e.closest_variance() << ")\n";
    return kDataError;
  } catch (const pipeline::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const experiment::UnknownProfile& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}
