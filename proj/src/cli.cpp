#include "epds/cli.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "epds/ecp.hpp"
#include "epds/error.hpp"
#include "epds/predictor/checkpoint.hpp"
#include "epds/predictor/inference.hpp"
#include "epds/predictor/train.hpp"
#include "epds/sim.hpp"

namespace epds::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kManifestHeader =
    "index,file,seed,drone_id,wind_speed,wind_direction,length_cm,speed_cm_s,samples";
constexpr std::string_view kReportHeader = "model,feature_selection,len_in,len_pred,rmse";
constexpr std::string_view kSeedReportHeader =
    "model,feature_selection,seed,len_in,len_pred,hidden_size,rmse";

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string flight_file_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "flight_%03zu.csv", i);
  return buf;
}

std::vector<std::string> manifest_files(const fs::path& dir) {
  std::ifstream in(dir / "manifest.csv");
  if (!in) throw Error(ErrorCode::IoError, "no manifest.csv in " + dir.string() + "; run gen-data");
  std::string line;
  std::getline(in, line);
  if (line != kManifestHeader) throw Error(ErrorCode::SchemaMismatch, "unexpected manifest header");
  std::vector<std::string> files;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    if (a == std::string::npos || b == std::string::npos) {
      throw Error(ErrorCode::SchemaMismatch, "malformed manifest row '" + line + "'");
    }
    files.push_back(line.substr(a + 1, b - a - 1));
  }
  return files;
}

nn::Checkpoint train_pair(const ModelPair& pair, std::uint64_t seed,
                          const FlightSplit& split, const ExperimentConfig& cfg) {
  const auto& m = cfg.model;
  const auto selection = FeatureSelection::parse(pair.features);
  const auto prep = preprocess(split.train, selection);
  const auto data =
      pack_sequences(prep.inputs, prep.target, prep.flight_of_row, m.len_in, m.len_pred, m.stride);

  nn::ModelShape shape{prep.encoder.input_size(), m.hidden_size, m.len_in, m.len_pred, true};
  nn::TrainConfig tc;
  tc.learning_rate = m.learning_rate;
  tc.epochs = m.epochs;
  tc.batch_size = m.batch_size;
  tc.shards = m.shards;
  tc.seed = seed;
  tc.allow_out_of_range = cfg.allow_out_of_range;

  auto fit = [&](auto model) {
    const auto report = nn::train(model, data, tc);
    spdlog::info("{}/{} seed {}: {} windows, {} steps, final train mse {:.6g}", pair.model,
                 pair.features, seed, data.size(), report.steps,
                 report.loss_history.empty() ? 0.0 : report.loss_history.back());
    return nn::Checkpoint{std::move(model), prep.encoder};
  };
  if (pair.model == "bilstm") return fit(nn::make_bilstm<double>(shape, seed));
  if (pair.model == "rnn") return fit(nn::make_rnn<double>(shape, seed));
  throw Error(ErrorCode::ConfigError, "unknown model '" + pair.model + "'");
}

double held_out_rmse(const nn::Checkpoint& ckpt, const FlightSplit& split,
                     const ExperimentConfig& cfg) {
  const auto prep = preprocess(split.test, ckpt.encoder.selection, {}, ckpt.encoder);
  return std::visit(
      [&](const auto& model) {
        const auto data = pack_sequences(prep.inputs, prep.target, prep.flight_of_row,
                                         static_cast<int>(model.shape.len_in),
                                         static_cast<int>(model.shape.len_pred), cfg.model.stride);
        return nn::evaluate_rmse(model, data);
      },
      ckpt.model);
}

/// Both reports: per-seed rows, and one row per pair averaged over seeds.
class Reports {
 public:
  explicit Reports(const ExperimentConfig& cfg)
      : cfg_(cfg),
        summary_(open_out(cfg.out / "rmse_report.csv")),
        by_seed_(open_out(cfg.out / "rmse_by_seed.csv")) {
    summary_ << kReportHeader << '\n';
    by_seed_ << kSeedReportHeader << '\n';
  }

  void add(const ModelPair& pair, std::uint64_t seed, double rmse) {
    const auto& m = cfg_.model;
    by_seed_ << pair.model << ',' << pair.features << ',' << seed << ',' << m.len_in << ','
             << m.len_pred << ',' << m.hidden_size << ',' << num(rmse) << '\n';
    sum_ += rmse;
    ++count_;
  }

  void finish_pair(const ModelPair& pair) {
    const double mean = count_ > 0 ? sum_ / static_cast<double>(count_) : 0.0;
    summary_ << pair.model << ',' << pair.features << ',' << cfg_.model.len_in << ','
             << cfg_.model.len_pred << ',' << num(mean) << '\n';
    sum_ = 0.0;
    count_ = 0;
  }

 private:
  const ExperimentConfig& cfg_;
  std::ofstream summary_;
  std::ofstream by_seed_;
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

void check_split(const FlightSplit& split) {
  if (split.train.empty()) throw Error(ErrorCode::EmptySequence, "no training flights");
  if (split.test.empty()) throw Error(ErrorCode::EmptySequence, "no held-out flights");
}

std::unique_ptr<EnergyPredictor> make_predictor(const ExperimentConfig& cfg,
                                                const std::optional<fs::path>& override_ckpt) {
  if (cfg.sim.predictor == "oracle") {
    return std::make_unique<OraclePredictor>(DischargeModel::calibrated(), cfg.sim.oracle_bias);
  }
  const fs::path path = override_ckpt.value_or(cfg.sim.checkpoint);
  if (path.empty()) {
    throw Error(ErrorCode::ConfigError, "Predictive mode needs sim.checkpoint or predictor=oracle");
  }
  return std::make_unique<SequencePredictor>(nn::load_checkpoint(path));
}

}  // namespace

FlightSplit load_flight_split(const fs::path& dir, std::size_t test_every) {
  FlightSplit split;
  const auto files = manifest_files(dir);
  for (std::size_t i = 0; i < files.size(); ++i) {
    auto records = load_flight_log(dir / files[i]);
    auto& dst = (test_every > 0 && i % test_every == test_every - 1) ? split.test : split.train;
    dst.insert(dst.end(), records.begin(), records.end());
  }
  return split;
}

fs::path checkpoint_path(const ExperimentConfig& cfg, const ModelPair& pair, std::uint64_t seed) {
  return cfg.out / "checkpoints" /
         (pair.model + "_" + pair.features + "_s" + std::to_string(seed) + ".ckpt");
}

void cmd_gen_data(const ExperimentConfig& cfg) {
  ensure_dir(cfg.data.dir);
  const auto plan = standard_flight_plan(cfg.data.flights, cfg.data.seed);
  const auto model = DischargeModel::calibrated();
  auto manifest = open_out(cfg.data.dir / "manifest.csv");
  manifest << kManifestHeader << '\n';
  for (std::size_t i = 0; i < plan.size(); ++i) {
    const auto& fc = plan[i];
    const auto records = synthesize_flights(fc, model);
    const auto name = flight_file_name(i);
    write_flight_log(cfg.data.dir / name, records);
    manifest << i << ',' << name << ',' << fc.seed << ',' << fc.drone_id << ','
             << num(fc.wind.speed_kmh) << ',' << to_string(fc.wind.direction) << ','
             << num(fc.length_cm) << ',' << num(fc.speed_cm_s) << ',' << records.size() << '\n';
  }
  spdlog::info("wrote {} flights to {}", plan.size(), cfg.data.dir.string());
}

void cmd_train(const ExperimentConfig& cfg) {
  const auto split = load_flight_split(cfg.data.dir, cfg.model.test_every);
  check_split(split);
  Reports reports(cfg);
  ensure_dir(cfg.out / "checkpoints");
  for (const auto& pair : cfg.model.pairs) {
    for (auto seed : cfg.seeds) {
      const auto ckpt = train_pair(pair, seed, split, cfg);
      nn::save_checkpoint(checkpoint_path(cfg, pair, seed), ckpt);
      const double rmse = held_out_rmse(ckpt, split, cfg);
      spdlog::info("{}/{} seed {}: held-out rmse {:.6g}", pair.model, pair.features, seed, rmse);
      reports.add(pair, seed, rmse);
    }
    reports.finish_pair(pair);
  }
}

void cmd_evaluate(const ExperimentConfig& cfg) {
  const auto split = load_flight_split(cfg.data.dir, cfg.model.test_every);
  check_split(split);
  Reports reports(cfg);
  for (const auto& pair : cfg.model.pairs) {
    for (auto seed : cfg.seeds) {
      const auto ckpt = nn::load_checkpoint(checkpoint_path(cfg, pair, seed));
      reports.add(pair, seed, held_out_rmse(ckpt, split, cfg));
    }
    reports.finish_pair(pair);
  }
}

void cmd_simulate(const ExperimentConfig& cfg) {
  const auto& sim = cfg.sim;
  std::optional<Scenario> base;
  if (!sim.network.empty()) {
    base = load_network_file(sim.network);
    if (!sim.scenario.empty()) base->requests = load_requests(sim.scenario);
  }
  std::vector<SweepPoint> points = sim.sweep;
  if (points.empty()) points.push_back({"base", {}, {}, {}, {}, {}});

  auto metrics = open_out(cfg.out / "metrics.csv");
  metrics << kMetricsHeader << '\n';
  for (const auto& point : points) {
    const bool random = point.n_nodes.has_value();
    if (!random && !base) {
      throw Error(ErrorCode::ConfigError,
                  "sweep point '" + point.label + "' needs sim.network or n_nodes/n_drones");
    }
    std::unique_ptr<EnergyPredictor> predictor;
    for (Mode mode : sim.modes) {
      if (is_predictive(mode) && !predictor) predictor = make_predictor(cfg, point.checkpoint);
      for (auto seed : cfg.seeds) {
        const Scenario scenario =
            random ? random_scenario(*point.n_nodes, *point.n_drones, seed) : *base;
        const auto variant = scenario_variant(scenario, seed, sim.max_jitter_s);
        SimConfig sc;
        sc.speed = point.speed.value_or(sim.speed);
        sc.t_full = point.recharge_time.value_or(sim.recharge_time);
        sc.wind = variant.wind;
        auto result = run(build_network(scenario), variant.requests, mode, seed, sc,
                          is_predictive(mode) ? predictor.get() : nullptr);
        result.metrics.label = point.label;
        write_metrics_row(metrics, result.metrics);
        spdlog::info("{} {} seed {}: avg delivery {:.3f} s", point.label, to_string(mode), seed,
                     result.metrics.avg_delivery_s);
        if (sim.write_logs) {
          auto log = open_out(cfg.out / "logs" /
                              (point.label + "_" + std::string(to_string(mode)) + "_s" +
                               std::to_string(seed) + ".csv"));
          write_event_log(log, result.log);
        }
      }
    }
  }
}

int exit_code(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return err->code() == ErrorCode::ConfigError ? 2 : 3;
  }
  return 3;
}

int run(int argc, char** argv) {
  auto logger = spdlog::get("epds");
  if (!logger) logger = spdlog::stderr_color_mt("epds");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  spdlog::set_pattern("[%l] %v");
  if (const char* level = std::getenv("EPDS_LOG_LEVEL")) {
    const auto parsed = spdlog::level::from_str(level);
    if (parsed == spdlog::level::off && std::string_view(level) != "off") {
      spdlog::error("EPDS_LOG_LEVEL '{}' is not a log level", level);
      return 2;
    }
    spdlog::set_level(parsed);
  }

  CLI::App app{"Energy-predictive drone delivery experiments"};
  app.require_subcommand(1);

  std::string config_path, modes, seeds, out;
  bool allow = false;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config JSON");
    sub->add_option("--mode", modes, "comma-separated simulation modes");
    sub->add_option("--seeds", seeds, "comma-separated seeds");
    sub->add_option("--out", out, "output directory");
    sub->add_flag("--allow-out-of-range", allow, "accept values outside the experiment ranges");
  };
  auto* gen = app.add_subcommand("gen-data", "synthesize the flight-log corpus");
  auto* train = app.add_subcommand("train", "train the model comparison grid");
  auto* evaluate = app.add_subcommand("evaluate", "score trained checkpoints");
  auto* simulate = app.add_subcommand("simulate", "run delivery simulations");
  for (auto* sub : {gen, train, evaluate, simulate}) common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg = config_path.empty() ? ExperimentConfig{} : load_experiment_config(config_path);
    if (cfg.data.dir.empty()) cfg.data.dir = cfg.out / "flights";
    if (!out.empty()) {
      const bool default_data = cfg.data.dir == cfg.out / "flights";
      cfg.out = out;
      if (default_data) cfg.data.dir = cfg.out / "flights";
    }
    if (!seeds.empty()) cfg.seeds = parse_seed_list(seeds);
    if (!modes.empty()) cfg.sim.modes = parse_mode_list(modes);
    cfg.allow_out_of_range = allow;
    if (!allow) validate_ranges(cfg);

    if (*gen) cmd_gen_data(cfg);
    if (*train) cmd_train(cfg);
    if (*evaluate) cmd_evaluate(cfg);
    if (*simulate) cmd_simulate(cfg);
    return 0;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return exit_code(e);
  }
}

}  // namespace epds::cli
