#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epds/sim.hpp"

namespace epds {

/// Experimental-variable bounds of the evaluation grid.
struct Range {
  double lo;
  double hi;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

inline constexpr Range kInputLengthRange{10, 125};  // samples
inline constexpr Range kPredLengthRange{10, 150};   // samples
inline constexpr Range kHiddenSizeRange{32, 512};
inline constexpr Range kLearningRateRange{0.001, 0.1};
inline constexpr Range kDronesRange{10, 50};
inline constexpr Range kNodesRange{7, 36};
inline constexpr Range kSpeedRange{2, 10};            // cm/s
inline constexpr Range kRechargeTimeRange{50, 150};   // s

struct DataSettings {
  std::size_t flights = 70;
  std::uint64_t seed = 2024;
  std::filesystem::path dir;  // defaults to <out>/flights
};

struct ModelPair {
  std::string model;     // "bilstm" or "rnn"
  std::string features;  // "vbat", "all", "pcaK"
};

struct ModelSettings {
  int hidden_size = 32;
  int len_in = 25;
  int len_pred = 100;
  int stride = 5;
  double learning_rate = 0.05;
  int epochs = 20;
  std::size_t batch_size = 32;
  std::size_t shards = 1;
  /// Every k-th flight is held out for evaluation.
  std::size_t test_every = 5;
  std::vector<ModelPair> pairs{{"rnn", "vbat"}, {"bilstm", "vbat"}, {"bilstm", "all"},
                               {"bilstm", "pca3"}};
};

struct SweepPoint {
  std::string label;
  std::optional<std::size_t> n_drones;  // with n_nodes: random range-limited scenario
  std::optional<std::size_t> n_nodes;
  std::optional<double> speed;
  std::optional<double> recharge_time;
  std::optional<std::filesystem::path> checkpoint;
};

struct SimSettings {
  std::filesystem::path network;
  std::filesystem::path scenario;
  std::vector<Mode> modes{Mode::NoPredDijkstra, Mode::NoPredAStar, Mode::Predictive};
  double speed = 4.0;
  double recharge_time = 100.0;
  std::string predictor = "checkpoint";  // or "oracle"
  double oracle_bias = 1.0;
  std::filesystem::path checkpoint;
  std::vector<SweepPoint> sweep;
  double max_jitter_s = 2.0;
  bool write_logs = false;
};

struct ExperimentConfig {
  std::filesystem::path out = "out";
  std::vector<std::uint64_t> seeds{1};
  DataSettings data;
  ModelSettings model;
  SimSettings sim;
  bool allow_out_of_range = false;  // command-line only
};

/// Parses JSON text; relative paths are resolved against base_dir.
ExperimentConfig parse_experiment_config(std::string_view json,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Throws ConfigError naming the first value outside its declared range.
void validate_ranges(const ExperimentConfig& cfg);

/// Network file: {"pad_count": 1, "nodes": [{"id", "x", "y", "z"}...],
/// "edges": [[a, b]...]} with edges optional (fully connected when absent).
Scenario load_network_file(const std::filesystem::path& path);
Scenario parse_network(std::string_view json);

/// Scenario file: {"requests": [{"src", "dest", "payload", "submit_time"}...]}.
std::vector<DeliveryRequest> load_requests(const std::filesystem::path& path);
std::vector<DeliveryRequest> parse_requests(std::string_view json);

std::vector<std::uint64_t> parse_seed_list(std::string_view csv);
std::vector<Mode> parse_mode_list(std::string_view csv);

}  // namespace epds
