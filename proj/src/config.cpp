#include "epds/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "epds/error.hpp"

namespace epds {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("invalid JSON: ") + e.what());
  }
}

template <typename T>
void get_to(const json& obj, const char* key, T& dst) {
  if (!obj.contains(key)) return;
  try {
    obj.at(key).get_to(dst);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
void get_to(const json& obj, const char* key, std::optional<T>& dst) {
  if (!obj.contains(key)) return;
  T v{};
  get_to(obj, key, v);
  dst = v;
}

void get_path(const json& obj, const char* key, std::filesystem::path& dst,
              const std::filesystem::path& base) {
  std::string s;
  get_to(obj, key, s);
  if (s.empty()) return;
  const std::filesystem::path p(s);
  dst = p.is_absolute() || base.empty() ? p : base / p;
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!obj.is_object()) throw Error(ErrorCode::ConfigError, std::string(where) + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok |= (k == a);
    if (!ok) {
      throw Error(ErrorCode::ConfigError,
                  "unknown key '" + k + "' in " + std::string(where));
    }
  }
}

void require_range(const char* name, double v, const Range& r) {
  if (!r.contains(v)) {
    throw Error(ErrorCode::ConfigError, std::string(name) + " = " + std::to_string(v) +
                                            " outside [" + std::to_string(r.lo) + ", " +
                                            std::to_string(r.hi) +
                                            "] (use --allow-out-of-range to override)");
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text,
                                         const std::filesystem::path& base) {
  const json root = parse_json(text);
  check_keys(root, {"out", "seeds", "data", "model", "sim"}, "config");
  ExperimentConfig cfg;
  get_path(root, "out", cfg.out, base);
  get_to(root, "seeds", cfg.seeds);

  if (root.contains("data")) {
    const json& d = root.at("data");
    check_keys(d, {"flights", "seed", "dir"}, "data");
    get_to(d, "flights", cfg.data.flights);
    get_to(d, "seed", cfg.data.seed);
    get_path(d, "dir", cfg.data.dir, base);
  }

  if (root.contains("model")) {
    const json& m = root.at("model");
    check_keys(m, {"hidden_size", "len_in", "len_pred", "stride", "learning_rate", "epochs",
                   "batch_size", "shards", "test_every", "pairs"},
               "model");
    get_to(m, "hidden_size", cfg.model.hidden_size);
    get_to(m, "len_in", cfg.model.len_in);
    get_to(m, "len_pred", cfg.model.len_pred);
    get_to(m, "stride", cfg.model.stride);
    get_to(m, "learning_rate", cfg.model.learning_rate);
    get_to(m, "epochs", cfg.model.epochs);
    get_to(m, "batch_size", cfg.model.batch_size);
    get_to(m, "shards", cfg.model.shards);
    get_to(m, "test_every", cfg.model.test_every);
    if (m.contains("pairs")) {
      cfg.model.pairs.clear();
      for (const auto& p : m.at("pairs")) {
        check_keys(p, {"model", "features"}, "model.pairs[]");
        ModelPair mp;
        get_to(p, "model", mp.model);
        get_to(p, "features", mp.features);
        if (mp.model != "bilstm" && mp.model != "rnn") {
          throw Error(ErrorCode::ConfigError, "unknown model '" + mp.model + "'");
        }
        FeatureSelection::parse(mp.features);
        cfg.model.pairs.push_back(mp);
      }
    }
  }

  if (root.contains("sim")) {
    const json& s = root.at("sim");
    check_keys(s, {"network", "scenario", "modes", "speed", "recharge_time", "predictor",
                   "oracle_bias", "checkpoint", "sweep", "max_jitter_s", "write_logs"},
               "sim");
    get_path(s, "network", cfg.sim.network, base);
    get_path(s, "scenario", cfg.sim.scenario, base);
    if (s.contains("modes")) {
      cfg.sim.modes.clear();
      for (const auto& m : s.at("modes")) cfg.sim.modes.push_back(parse_mode(m.get<std::string>()));
    }
    get_to(s, "speed", cfg.sim.speed);
    get_to(s, "recharge_time", cfg.sim.recharge_time);
    get_to(s, "predictor", cfg.sim.predictor);
    if (cfg.sim.predictor != "checkpoint" && cfg.sim.predictor != "oracle") {
      throw Error(ErrorCode::ConfigError, "predictor must be 'checkpoint' or 'oracle'");
    }
    get_to(s, "oracle_bias", cfg.sim.oracle_bias);
    get_path(s, "checkpoint", cfg.sim.checkpoint, base);
    get_to(s, "max_jitter_s", cfg.sim.max_jitter_s);
    get_to(s, "write_logs", cfg.sim.write_logs);
    if (s.contains("sweep")) {
      for (const auto& p : s.at("sweep")) {
        check_keys(p, {"label", "n_drones", "n_nodes", "speed", "recharge_time", "checkpoint"},
                   "sim.sweep[]");
        SweepPoint sp;
        get_to(p, "label", sp.label);
        get_to(p, "n_drones", sp.n_drones);
        get_to(p, "n_nodes", sp.n_nodes);
        get_to(p, "speed", sp.speed);
        get_to(p, "recharge_time", sp.recharge_time);
        if (p.contains("checkpoint")) {
          std::filesystem::path c;
          get_path(p, "checkpoint", c, base);
          sp.checkpoint = c;
        }
        if (sp.n_drones.has_value() != sp.n_nodes.has_value()) {
          throw Error(ErrorCode::ConfigError, "sweep points set n_drones and n_nodes together");
        }
        cfg.sim.sweep.push_back(sp);
      }
    }
  }
  if (cfg.data.dir.empty()) cfg.data.dir = cfg.out / "flights";
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_file(path), path.parent_path());
}

void validate_ranges(const ExperimentConfig& cfg) {
  const auto& m = cfg.model;
  require_range("model.len_in", m.len_in, kInputLengthRange);
  require_range("model.len_pred", m.len_pred, kPredLengthRange);
  require_range("model.hidden_size", m.hidden_size, kHiddenSizeRange);
  require_range("model.learning_rate", m.learning_rate, kLearningRateRange);
  require_range("sim.speed", cfg.sim.speed, kSpeedRange);
  require_range("sim.recharge_time", cfg.sim.recharge_time, kRechargeTimeRange);
  for (const auto& p : cfg.sim.sweep) {
    if (p.n_drones) require_range("sweep.n_drones", static_cast<double>(*p.n_drones), kDronesRange);
    if (p.n_nodes) require_range("sweep.n_nodes", static_cast<double>(*p.n_nodes), kNodesRange);
    if (p.speed) require_range("sweep.speed", *p.speed, kSpeedRange);
    if (p.recharge_time) require_range("sweep.recharge_time", *p.recharge_time, kRechargeTimeRange);
  }
}

Scenario parse_network(std::string_view text) {
  const json root = parse_json(text);
  check_keys(root, {"pad_count", "nodes", "edges", "max_range"}, "network");
  Scenario s;
  get_to(root, "pad_count", s.pad_count);
  if (s.pad_count < 1) throw Error(ErrorCode::ConfigError, "pad_count must be >= 1");
  if (!root.contains("nodes")) throw Error(ErrorCode::ConfigError, "network has no nodes");
  for (const auto& n : root.at("nodes")) {
    check_keys(n, {"id", "x", "y", "z", "name"}, "nodes[]");
    NodeSpec spec;
    double x = 0, y = 0, z = 0;
    if (!n.contains("id")) throw Error(ErrorCode::ConfigError, "node without id");
    get_to(n, "id", spec.id);
    get_to(n, "x", x);
    get_to(n, "y", y);
    get_to(n, "z", z);
    spec.position = Position(x, y, z);
    s.nodes.push_back(spec);
  }
  if (root.contains("edges")) {
    EdgeList edges;
    for (const auto& e : root.at("edges")) {
      if (!e.is_array() || e.size() != 2) {
        throw Error(ErrorCode::ConfigError, "edges must be [a, b] pairs");
      }
      edges.edges.emplace_back(e[0].get<NodeId>(), e[1].get<NodeId>());
    }
    s.edges = std::move(edges);
  } else if (root.contains("max_range")) {
    s.edges = range_limited_edges(s.nodes, root.at("max_range").get<double>());
  }
  return s;
}

Scenario load_network_file(const std::filesystem::path& path) {
  return parse_network(read_file(path));
}

std::vector<DeliveryRequest> parse_requests(std::string_view text) {
  const json root = parse_json(text);
  check_keys(root, {"requests", "name", "description"}, "scenario");
  std::vector<DeliveryRequest> out;
  if (!root.contains("requests")) return out;
  for (const auto& r : root.at("requests")) {
    check_keys(r, {"src", "dest", "payload", "submit_time"}, "requests[]");
    DeliveryRequest req;
    if (!r.contains("src") || !r.contains("dest")) {
      throw Error(ErrorCode::ConfigError, "request needs src and dest");
    }
    get_to(r, "src", req.src);
    get_to(r, "dest", req.dest);
    get_to(r, "payload", req.payload);
    get_to(r, "submit_time", req.submit_time);
    if (req.src == req.dest) throw Error(ErrorCode::ConfigError, "request with src == dest");
    out.push_back(req);
  }
  return out;
}

std::vector<DeliveryRequest> load_requests(const std::filesystem::path& path) {
  return parse_requests(read_file(path));
}

std::vector<std::uint64_t> parse_seed_list(std::string_view csv) {
  std::vector<std::uint64_t> seeds;
  while (!csv.empty()) {
    const auto comma = csv.find(',');
    const auto tok = csv.substr(0, comma);
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      throw Error(ErrorCode::ConfigError, "bad seed '" + std::string(tok) + "'");
    }
    seeds.push_back(v);
    if (comma == std::string_view::npos) break;
    csv.remove_prefix(comma + 1);
  }
  return seeds;
}

std::vector<Mode> parse_mode_list(std::string_view csv) {
  std::vector<Mode> modes;
  while (!csv.empty()) {
    const auto comma = csv.find(',');
    modes.push_back(parse_mode(csv.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    csv.remove_prefix(comma + 1);
  }
  return modes;
}

}  // namespace epds
