// Acceptance checks, one per criterion. Prints a PASS/FAIL line for each
// criterion run and exits non-zero if any failed.
//
//   acceptance                 run all
//   acceptance --criterion N   run one

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "epds/cli.hpp"
#include "epds/config.hpp"
#include "epds/energy.hpp"
#include "epds/predictor/inference.hpp"
#include "epds/sim.hpp"
#include "oracles.hpp"

using namespace epds;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 ---------------------------------------------------------------------------

Outcome gradient_check() {
  const nn::ModelShape bi{2, 3, 4, 3, true};
  nn::ModelShape uni = bi;
  uni.bidirectional = false;
  std::mt19937_64 rng(1);
  std::vector<nn::Mat<double>> steps(4, nn::Mat<double>(2, 3));
  for (auto& s : steps) nn::fill_uniform(s, 1.0, rng);
  nn::Mat<double> y(3, 3);
  nn::fill_uniform(y, 1.0, rng);

  double worst = 0.0;
  std::string where;
  auto take = [&](const std::string& kind, const oracle::GradientReport& r) {
    if (r.max_rel_error >= worst) {
      worst = r.max_rel_error;
      where = kind + " " + r.worst;
    }
  };
  take("bilstm", oracle::check_gradients(nn::LstmModel<double>::random(bi, 2), steps, y));
  take("lstm", oracle::check_gradients(nn::LstmModel<double>::random(uni, 3), steps, y));
  take("birnn", oracle::check_gradients(nn::RnnModel<double>::random(bi, 4), steps, y));
  take("rnn", oracle::check_gradients(nn::RnnModel<double>::random(uni, 5), steps, y));
  return {worst <= 1e-4, fmt("max relative error %.3g at %s (limit 1e-4)", worst, where.c_str())};
}

// 2 ---------------------------------------------------------------------------

Outcome chained_prediction_contract() {
  int bad = 0, cases = 0;
  for (int len_pred : {1, 10, 40, 150}) {
    const auto m = nn::make_bilstm<double>({1, 8, 25, len_pred, true}, 7);
    nn::Mat<double> seq(25, 1);
    for (int t = 0; t < 25; ++t) seq(t, 0) = 0.95 - 0.01 * t;
    const auto once = m.predict(seq);
    for (int len_seg : {1, 37, 100, 150}) {
      ++cases;
      const auto out = nn::predict_variable_length(m, seq, len_seg);
      const auto k = std::min(len_pred, len_seg);
      if (out.size() != len_seg || out.head(k) != once.head(k)) ++bad;
    }
  }
  return {bad == 0, fmt("%d of %d grid cells violate the length/prefix contract", bad, cases)};
}

// 3 ---------------------------------------------------------------------------

Outcome planner_equivalence() {
  constexpr Algorithm algs[] = {Algorithm::BellmanFord, Algorithm::Dijkstra,
                                Algorithm::AStarDistance, Algorithm::EpdsHeuristic};
  std::mt19937_64 rng(3);
  int bad_small = 0, bad_large = 0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 5 + i % 3;
    const auto net = build_network(random_positions(n, 1000 + i), FullyConnected{});
    const EdgeCostModel m{2.0 + (rng() % 9), 1.0, 0.001 * (rng() % 20)};
    const auto src = static_cast<NodeId>(rng() % n);
    const auto dest = static_cast<NodeId>((src + 1 + rng() % (n - 1)) % n);
    const double best = oracle::exhaustive_best_cost(net, src, dest, m);
    for (auto a : algs)
      if (std::abs(plan(a, net, src, dest, m).total_cost - best) > 1e-9 * best) ++bad_small;
  }
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 7 + i % 30;
    std::vector<NodeSpec> specs;
    const auto pos = random_positions(n, 5000 + i);
    for (std::size_t k = 0; k < n; ++k) specs.push_back({static_cast<NodeId>(k), pos[k]});
    const auto net = i % 2 ? build_network(specs, FullyConnected{})
                           : build_network(specs, range_limited_edges(specs, 150.0));
    const EdgeCostModel m{6.0, 1.0, 0.0};
    const auto d = plan(Algorithm::Dijkstra, net, 0, static_cast<NodeId>(n - 1), m);
    const auto b = plan(Algorithm::BellmanFord, net, 0, static_cast<NodeId>(n - 1), m);
    if (d.total_cost != b.total_cost || d.nodes != b.nodes) ++bad_large;
  }
  return {bad_small == 0 && bad_large == 0,
          fmt("%d planner/exhaustive mismatches on 100 small networks, %d Dijkstra/Bellman-Ford "
              "mismatches on 100 networks of 7-36 nodes",
              bad_small, bad_large)};
}

// 4 ---------------------------------------------------------------------------

/// Recharge intervals per node rebuilt from the log must be disjoint (1 pad).
int log_overlaps(const std::vector<LogEntry>& log) {
  std::map<NodeId, std::vector<std::pair<Tick, Tick>>> busy;
  std::map<DroneId, std::pair<NodeId, Tick>> open;
  for (const auto& e : log) {
    if (e.kind == EventKind::RechargeStart) open[e.drone] = {e.node, e.time};
    if (e.kind == EventKind::RechargeComplete) {
      const auto [node, start] = open.at(e.drone);
      busy[node].push_back({start, e.time});
      open.erase(e.drone);
    }
  }
  int overlaps = 0;
  for (auto& [node, iv] : busy) {
    std::sort(iv.begin(), iv.end());
    for (std::size_t i = 1; i < iv.size(); ++i) overlaps += iv[i].first < iv[i - 1].second;
  }
  return overlaps;
}

Outcome reservation_safety() {
  int overlaps = 0, invariant_errors = 0;
  std::size_t min_events = std::numeric_limits<std::size_t>::max();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> bias(0.5, 1.5);
    std::size_t events = 0;
    for (int round = 0; events < 10'000; ++round) {
      const std::size_t nodes = 7 + (seed * 7 + round) % 30;
      const auto sc = random_scenario(nodes, 50, seed * 100 + round);
      SimConfig cfg;
      cfg.speed = 2.0 + static_cast<double>(rng() % 9);
      cfg.t_full = 50.0 + static_cast<double>(rng() % 101);
      cfg.check_invariants = true;
      cfg.wind = {6.1, WindDirection::E};
      OraclePredictor pred(cfg.battery, bias(rng));
      try {
        const auto r = run(build_network(sc), sc.requests, Mode::Predictive, seed, cfg, &pred);
        events += r.events;
        overlaps += log_overlaps(r.log);
      } catch (const Error& e) {
        ++invariant_errors;
        std::fprintf(stderr, "seed %llu: %s\n", static_cast<unsigned long long>(seed), e.what());
        break;
      }
    }
    min_events = std::min(min_events, events);
  }
  return {overlaps == 0 && invariant_errors == 0 && min_events >= 10'000,
          fmt("%d overlapping recharge intervals, %d invariant violations, at least %zu events "
              "per seed over 20 seeds",
              overlaps, invariant_errors, min_events)};
}

// 5 and 8 -------------------------------------------------------------------

struct HubSuite {
  std::vector<double> advantage;  // per recharge time, 150 down to 50
  double worst_energy_error = 0.0;
  std::size_t drones_checked = 0;
};

HubSuite run_hub_suite() {
  auto sc = load_network_file(EPDS_DATA_DIR "/hub_network.json");
  sc.requests = load_requests(EPDS_DATA_DIR "/hub_scenario.json");
  const auto net = build_network(sc);
  HubSuite out;
  for (double t_full : {150.0, 125.0, 100.0, 75.0, 50.0}) {
    double astar = 0.0, predictive = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto v = scenario_variant(sc, seed);
      SimConfig cfg;
      cfg.speed = 4.0;
      cfg.t_full = t_full;
      cfg.wind = v.wind;
      for (Mode mode : {Mode::NoPredAStar, Mode::Predictive}) {
        const auto r = run(net, v.requests, mode, seed, cfg);
        (mode == Mode::Predictive ? predictive : astar) += r.metrics.avg_delivery_s;
        for (const auto& d : r.drones) {
          const double q = energy_from_voltage_sequence(cfg.battery.current_map, d.vbat);
          out.worst_energy_error = std::max(out.worst_energy_error, std::abs(q - d.consumed) / d.consumed);
          ++out.drones_checked;
        }
      }
    }
    out.advantage.push_back((astar - predictive) / astar);
  }
  return out;
}

Outcome delivery_improvement() {
  const auto s = run_hub_suite();
  bool monotone = true;
  for (std::size_t i = 1; i < s.advantage.size(); ++i) monotone &= s.advantage[i] >= s.advantage[i - 1];
  const double at100 = s.advantage[2];
  std::string curve;
  for (double a : s.advantage) curve += fmt(" %.1f%%", 100 * a);
  return {at100 >= 0.05 && monotone,
          fmt("Predictive vs A* at 4 cm/s, 100 s recharge: %.1f%% faster (need >= 5%%); "
              "advantage for recharge 150..50 s:%s (%s)",
              100 * at100, curve.c_str(), monotone ? "monotone" : "not monotone")};
}

Outcome energy_bookkeeping() {
  const auto s = run_hub_suite();
  return {s.worst_energy_error <= 1e-6,
          fmt("worst relative error %.3g over %zu drone traces (limit 1e-6)", s.worst_energy_error,
              s.drones_checked)};
}

// 6 ---------------------------------------------------------------------------

Outcome model_ordering() {
  const auto dir = fs::temp_directory_path() / "epds_acceptance_c6";
  fs::remove_all(dir);
  ExperimentConfig cfg;
  cfg.out = dir;
  cfg.data.dir = dir / "flights";
  cfg.data.flights = 70;
  cfg.seeds = {1, 2, 3, 4, 5};
  cfg.model.hidden_size = 32;
  cfg.model.len_in = 25;
  cfg.model.len_pred = 100;
  cfg.model.stride = 10;
  cfg.model.learning_rate = 0.1;
  cfg.model.epochs = 10;
  cfg.model.batch_size = 32;
  cfg.model.pairs = {{"bilstm", "vbat"}, {"rnn", "vbat"}};
  cli::cmd_gen_data(cfg);
  cli::cmd_train(cfg);

  std::map<std::string, std::map<std::string, double>> rmse;  // seed -> model -> value
  std::ifstream in(dir / "rmse_by_seed.csv");
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> c;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) c.push_back(cell);
    rmse[c[2]][c[0]] = std::stod(c[6]);
  }
  int wins = 0;
  std::string per_seed;
  for (const auto& [seed, by] : rmse) {
    wins += by.at("bilstm") <= by.at("rnn");
    per_seed += fmt(" s%s %.4g/%.4g", seed.c_str(), by.at("bilstm"), by.at("rnn"));
  }
  return {wins >= 4, fmt("Bi-LSTM <= RNN held-out RMSE in %d of %zu seeds (need 4); "
                         "bilstm/rnn:%s",
                         wins, rmse.size(), per_seed.c_str())};
}

// 7 ---------------------------------------------------------------------------

Outcome planning_time_ordering() {
  const auto net = build_network(random_positions(36, 77), FullyConnected{});
  std::mt19937_64 rng(7);
  std::vector<std::pair<NodeId, NodeId>> req;
  while (req.size() < 50) {
    const auto a = static_cast<NodeId>(rng() % 36), b = static_cast<NodeId>(rng() % 36);
    if (a != b) req.push_back({a, b});
  }
  const EdgeCostModel m{6.0, 1.0, 0.0};
  auto time_once = [&](Algorithm alg) {
    const auto t0 = std::chrono::steady_clock::now();
    double sink = 0.0;
    for (auto [a, b] : req) sink += plan(alg, net, a, b, m).total_cost;
    const auto t1 = std::chrono::steady_clock::now();
    if (!(sink > 0.0)) std::abort();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
  };
  std::map<Algorithm, std::vector<double>> samples;
  for (int run = 0; run < 20; ++run)
    for (auto alg : {Algorithm::EpdsHeuristic, Algorithm::Dijkstra, Algorithm::BellmanFord})
      samples[alg].push_back(time_once(alg));
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return (v[9] + v[10]) / 2;
  };
  const double e = median(samples[Algorithm::EpdsHeuristic]);
  const double d = median(samples[Algorithm::Dijkstra]);
  const double b = median(samples[Algorithm::BellmanFord]);
  return {e <= d && d < b,
          fmt("median ms per 50 requests: EpdsHeuristic %.3f, Dijkstra %.3f, Bellman-Ford %.3f", e,
              d, b)};
}

const std::map<int, std::pair<const char*, std::function<Outcome()>>> kCriteria{
    {1, {"gradient check", gradient_check}},
    {2, {"chained prediction contract", chained_prediction_contract}},
    {3, {"planner equivalence", planner_equivalence}},
    {4, {"reservation safety", reservation_safety}},
    {5, {"delivery-time improvement", delivery_improvement}},
    {6, {"model ordering", model_ordering}},
    {7, {"planning-time ordering", planning_time_ordering}},
    {8, {"energy bookkeeping", energy_bookkeeping}},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      which.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion N]...\n");
      return 2;
    }
  }
  if (which.empty())
    for (const auto& [n, c] : kCriteria) which.push_back(n);

  bool all = true;
  for (int n : which) {
    const auto it = kCriteria.find(n);
    if (it == kCriteria.end()) {
      std::fprintf(stderr, "no criterion %d\n", n);
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o{false, ""};
    try {
      o = it->second.second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", n,
                it->second.first, o.detail.c_str(), secs);
    std::fflush(stdout);
    all &= o.pass;
  }
  return all ? 0 : 1;
}
