#pragma once

#include <exception>
#include <filesystem>
#include <vector>

#include "epds/config.hpp"
#include "epds/dataset.hpp"

namespace epds::cli {

/// Writes <data.dir>/flight_NNN.csv and manifest.csv.
void cmd_gen_data(const ExperimentConfig& cfg);

/// Trains every (model, features) pair for every seed. Writes checkpoints
/// under <out>/checkpoints, <out>/rmse_by_seed.csv and <out>/rmse_report.csv
/// (one row per pair, mean over seeds).
void cmd_train(const ExperimentConfig& cfg);

/// Re-scores the checkpoints written by train on the held-out flights.
void cmd_evaluate(const ExperimentConfig& cfg);

/// Writes <out>/metrics.csv with one row per (sweep point, mode, seed).
void cmd_simulate(const ExperimentConfig& cfg);

struct FlightSplit {
  std::vector<FlightRecord> train;
  std::vector<FlightRecord> test;
};
/// Flights listed in the manifest; every test_every-th one is held out.
FlightSplit load_flight_split(const std::filesystem::path& dir, std::size_t test_every);

std::filesystem::path checkpoint_path(const ExperimentConfig& cfg, const ModelPair& pair,
                                      std::uint64_t seed);

/// 0 success, 2 configuration error, 3 runtime error.
int exit_code(const std::exception& e);

/// Entry point of the epds tool.
int run(int argc, char** argv);

}  // namespace epds::cli
