#include "epds/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "epds/error.hpp"
#include "epds/time.hpp"

namespace epds {

std::string_view to_string(LocRole r) {
  switch (r) {
    case LocRole::Start: return "Start";
    case LocRole::Fly: return "Fly";
    case LocRole::Destination: return "Destination";
  }
  return "Fly";
}

namespace {

LocRole parse_loc_role(std::string_view s) {
  if (s == "Start") return LocRole::Start;
  if (s == "Fly") return LocRole::Fly;
  if (s == "Destination") return LocRole::Destination;
  throw Error(ErrorCode::SchemaMismatch, "unknown loc_role '" + std::string(s) + "'");
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line_no) {
  T value{};
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::SchemaMismatch, "line " + std::to_string(line_no) + ": bad number '" +
                                               std::string(field) + "'");
  }
  return value;
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

// Flight index of every record under the split_flights rule.
std::vector<int> flight_indices(std::span<const FlightRecord> records) {
  std::vector<int> idx(records.size());
  int flight = -1;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i == 0 || records[i].t_ms == 0 || records[i].drone_id != records[i - 1].drone_id) {
      ++flight;
    }
    idx[i] = flight;
  }
  return idx;
}

}  // namespace

std::vector<FlightRecord> load_flight_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::SchemaMismatch, "missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  if (header.size() != kFlightLogColumns.size() ||
      !std::equal(header.begin(), header.end(), kFlightLogColumns.begin())) {
    throw Error(ErrorCode::SchemaMismatch, "header does not match flight-log columns: " + line);
  }

  std::vector<FlightRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != kFlightLogColumns.size()) {
      throw Error(ErrorCode::SchemaMismatch,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(kFlightLogColumns.size()) + " fields");
    }
    FlightRecord r;
    r.t_ms = parse_number<std::int64_t>(f[0], line_no);
    r.es_x = parse_number<double>(f[1], line_no);
    r.es_y = parse_number<double>(f[2], line_no);
    r.es_z = parse_number<double>(f[3], line_no);
    r.roll = parse_number<double>(f[4], line_no);
    r.pitch = parse_number<double>(f[5], line_no);
    r.yaw = parse_number<double>(f[6], line_no);
    r.vbat = parse_number<double>(f[7], line_no);
    r.wind_speed = parse_number<double>(f[8], line_no);
    r.wind_direction = parse_wind_direction(f[9]);
    r.wind_angle = parse_number<double>(f[10], line_no);
    r.dis = parse_number<double>(f[11], line_no);
    r.loc_role = parse_loc_role(f[12]);
    r.drone_id = parse_number<int>(f[13], line_no);
    r.loc = std::string(f[14]);

    if (!records.empty()) {
      const auto& prev = records.back();
      const bool new_flight = r.t_ms == 0 || r.drone_id != prev.drone_id;
      if (!new_flight && r.t_ms <= prev.t_ms) {
        throw Error(ErrorCode::NonMonotoneTimestamps,
                    "line " + std::to_string(line_no) + ": t=" + std::to_string(r.t_ms) +
                        " after t=" + std::to_string(prev.t_ms));
      }
    }
    records.push_back(std::move(r));
  }
  return records;
}

void write_flight_log(const std::filesystem::path& path, std::span<const FlightRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  std::string buf;
  for (std::size_t i = 0; i < kFlightLogColumns.size(); ++i) {
    if (i) buf += ',';
    buf += kFlightLogColumns[i];
  }
  buf += '\n';
  for (const auto& r : records) {
    buf += std::to_string(r.t_ms);
    for (double v : {r.es_x, r.es_y, r.es_z, r.roll, r.pitch, r.yaw, r.vbat, r.wind_speed}) {
      buf += ',';
      append_number(buf, v);
    }
    buf += ',';
    buf += to_string(r.wind_direction);
    for (double v : {r.wind_angle, r.dis}) {
      buf += ',';
      append_number(buf, v);
    }
    buf += ',';
    buf += to_string(r.loc_role);
    buf += ',';
    buf += std::to_string(r.drone_id);
    buf += ',';
    buf += r.loc;
    buf += '\n';
  }
  out << buf;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<std::vector<FlightRecord>> split_flights(std::span<const FlightRecord> records) {
  std::vector<std::vector<FlightRecord>> flights;
  const auto idx = flight_indices(records);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (static_cast<std::size_t>(idx[i]) == flights.size()) flights.emplace_back();
    flights.back().push_back(records[i]);
  }
  return flights;
}

// ---------------------------------------------------------------------------

Eigen::RowVectorXd raw_features(const FlightRecord& r) {
  Eigen::RowVectorXd row(static_cast<Eigen::Index>(kFeatureNames.size()));
  row << r.es_x, r.es_y, r.es_z, r.roll, r.pitch, r.yaw, r.vbat, r.wind_speed, r.wind_angle,
      r.dis, static_cast<double>(static_cast<int>(r.loc_role));
  return row;
}

std::string FeatureSelection::name() const {
  switch (strategy) {
    case FeatureStrategy::VbatOnly: return "vbat";
    case FeatureStrategy::AllFeatures: return "all";
    case FeatureStrategy::AllFeaturesPca: return "pca" + std::to_string(components);
  }
  return "vbat";
}

FeatureSelection FeatureSelection::parse(std::string_view s) {
  if (s == "vbat") return vbat_only();
  if (s == "all") return all_features();
  if (s.starts_with("pca")) {
    const auto digits = s.substr(3);
    int k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && k >= 1 &&
        k <= static_cast<int>(kFeatureNames.size())) {
      return pca(k);
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown feature selection '" + std::string(s) + "'");
}

MinMaxScaler MinMaxScaler::fit(const Eigen::MatrixXd& x) {
  return {x.colwise().minCoeff(), x.colwise().maxCoeff()};
}

double MinMaxScaler::scale(double value, Eigen::Index column) const {
  const double range = max(column) - min(column);
  return range > 0.0 ? (value - min(column)) / range : 0.0;
}

double MinMaxScaler::unscale(double scaled, Eigen::Index column) const {
  return min(column) + scaled * (max(column) - min(column));
}

Eigen::MatrixXd MinMaxScaler::transform(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    for (Eigen::Index r = 0; r < x.rows(); ++r) out(r, c) = scale(x(r, c), c);
  return out;
}

Eigen::MatrixXd MinMaxScaler::inverse_transform(const Eigen::MatrixXd& scaled) const {
  Eigen::MatrixXd out(scaled.rows(), scaled.cols());
  for (Eigen::Index c = 0; c < scaled.cols(); ++c)
    for (Eigen::Index r = 0; r < scaled.rows(); ++r) out(r, c) = unscale(scaled(r, c), c);
  return out;
}

Pca Pca::fit(const Eigen::MatrixXd& x, int k) {
  if (k < 1 || k > x.cols()) {
    throw Error(ErrorCode::InvalidArgument,
                "PCA needs 1 <= k <= " + std::to_string(x.cols()) + ", got " + std::to_string(k));
  }
  if (x.rows() < 2) throw Error(ErrorCode::InvalidArgument, "PCA needs at least two rows");
  Pca p;
  p.mean = x.colwise().mean();
  const Eigen::MatrixXd centred = x.rowwise() - p.mean;
  const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(x.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::Index d = x.cols();
  p.components.resize(d, k);
  p.explained.resize(k);
  for (int j = 0; j < k; ++j) {
    // Eigen sorts eigenvalues ascending.
    Eigen::VectorXd v = eig.eigenvectors().col(d - 1 - j);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    p.components.col(j) = v;
    p.explained(j) = eig.eigenvalues()(d - 1 - j);
  }
  return p;
}

Eigen::MatrixXd Pca::transform(const Eigen::MatrixXd& x) const {
  return (x.rowwise() - mean) * components;
}

Eigen::MatrixXd Pca::inverse_transform(const Eigen::MatrixXd& scores) const {
  return (scores * components.transpose()).rowwise() + mean;
}

Eigen::Index FeatureEncoder::input_size() const {
  switch (selection.strategy) {
    case FeatureStrategy::VbatOnly: return 1;
    case FeatureStrategy::AllFeatures: return static_cast<Eigen::Index>(kFeatureNames.size());
    case FeatureStrategy::AllFeaturesPca: return selection.components;
  }
  return 1;
}

std::vector<std::string> FeatureEncoder::input_names() const {
  switch (selection.strategy) {
    case FeatureStrategy::VbatOnly: return {"vbat"};
    case FeatureStrategy::AllFeatures: return {kFeatureNames.begin(), kFeatureNames.end()};
    case FeatureStrategy::AllFeaturesPca: {
      std::vector<std::string> names;
      for (int j = 0; j < selection.components; ++j) names.push_back("pc" + std::to_string(j + 1));
      return names;
    }
  }
  return {};
}

std::optional<Eigen::Index> FeatureEncoder::vbat_channel() const {
  switch (selection.strategy) {
    case FeatureStrategy::VbatOnly: return 0;
    case FeatureStrategy::AllFeatures: return kVbatColumn;
    case FeatureStrategy::AllFeaturesPca: return std::nullopt;
  }
  return std::nullopt;
}

Eigen::MatrixXd FeatureEncoder::encode(const Eigen::MatrixXd& scaled_rows) const {
  switch (selection.strategy) {
    case FeatureStrategy::VbatOnly: return scaled_rows.col(kVbatColumn);
    case FeatureStrategy::AllFeatures: return scaled_rows;
    case FeatureStrategy::AllFeaturesPca: return pca->transform(scaled_rows);
  }
  return scaled_rows;
}

Preprocessed preprocess(std::span<const FlightRecord> records, FeatureSelection selection,
                        const CleaningRules& rules, const std::optional<FeatureEncoder>& fitted) {
  if (records.empty()) throw Error(ErrorCode::EmptySequence, "no records to preprocess");
  const auto flights = flight_indices(records);
  const auto width = static_cast<Eigen::Index>(kFeatureNames.size());

  Preprocessed out;
  std::vector<Eigen::RowVectorXd> rows;
  for (std::size_t i = 0; i < records.size(); ++i) {
    Eigen::RowVectorXd row = raw_features(records[i]);
    const bool finite = row.allFinite();
    const double v = records[i].vbat;
    const bool in_range = v >= rules.v_min - 1e-9 && v <= rules.v_max + 1e-9 &&
                          records[i].wind_speed >= 0.0 && records[i].dis >= 0.0;
    if (!finite || !in_range) continue;
    rows.push_back(std::move(row));
    out.kept_rows.push_back(i);
    out.flight_of_row.push_back(flights[i]);
  }
  if (rows.empty()) throw Error(ErrorCode::AllRowsDropped, "every row failed cleaning");

  Eigen::MatrixXd raw(static_cast<Eigen::Index>(rows.size()), width);
  for (std::size_t i = 0; i < rows.size(); ++i) raw.row(static_cast<Eigen::Index>(i)) = rows[i];

  if (fitted) {
    if (fitted->selection.strategy != selection.strategy ||
        fitted->selection.components != selection.components) {
      throw Error(ErrorCode::InvalidArgument, "encoder was fitted for a different selection");
    }
    out.encoder = *fitted;
  } else {
    out.encoder.selection = selection;
    out.encoder.scaler = MinMaxScaler::fit(raw);
  }
  out.scaled = out.encoder.scaler.transform(raw);
  if (selection.strategy == FeatureStrategy::AllFeaturesPca && !out.encoder.pca) {
    out.encoder.pca = Pca::fit(out.scaled, selection.components);
  }
  out.inputs = out.encoder.encode(out.scaled);
  out.target = out.scaled.col(kVbatColumn);
  return out;
}

PackedSequences pack_sequences(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& target,
                               std::span<const int> flight_of_row, int len_in, int len_pred,
                               int stride) {
  if (len_in < 1 || len_pred < 1 || stride < 1) {
    throw Error(ErrorCode::InvalidArgument, "len_in, len_pred and stride must be >= 1");
  }
  if (inputs.rows() != target.size() ||
      static_cast<std::size_t>(inputs.rows()) != flight_of_row.size()) {
    throw Error(ErrorCode::LengthMismatch, "inputs, target and flight ids differ in length");
  }
  PackedSequences out;
  out.len_in = len_in;
  out.len_pred = len_pred;
  const Eigen::Index window = len_in + len_pred;
  Eigen::Index begin = 0;
  while (begin < inputs.rows()) {
    Eigen::Index end = begin;
    while (end < inputs.rows() && flight_of_row[static_cast<std::size_t>(end)] ==
                                      flight_of_row[static_cast<std::size_t>(begin)]) {
      ++end;
    }
    for (Eigen::Index s = begin; s + window <= end; s += stride) {
      out.inputs.emplace_back(inputs.middleRows(s, len_in));
      out.targets.emplace_back(target.segment(s + len_in, len_pred));
      out.first_rows.push_back(static_cast<std::size_t>(s));
    }
    begin = end;
  }
  if (out.inputs.empty()) {
    throw Error(ErrorCode::SequenceTooShort,
                "no flight has " + std::to_string(window) + " usable rows");
  }
  return out;
}

PackedSequences pack_sequences(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& target,
                               int len_in, int len_pred, int stride) {
  const std::vector<int> one_flight(static_cast<std::size_t>(inputs.rows()), 0);
  return pack_sequences(inputs, target, one_flight, len_in, len_pred, stride);
}

// ---------------------------------------------------------------------------

double augment_segment_energy(std::span<const SegmentEnergy> library,
                              const Eigen::Vector3d& direction, double length) {
  if (library.empty()) throw Error(ErrorCode::InvalidArgument, "segment library is empty");
  const Eigen::Vector3d target = direction.normalized();
  const SegmentEnergy* best = nullptr;
  double best_cos = -std::numeric_limits<double>::infinity();
  for (const auto& seg : library) {
    const double c = seg.direction.normalized().dot(target);
    if (best == nullptr || c > best_cos + 1e-12 ||
        (std::abs(c - best_cos) <= 1e-12 && seg.length > best->length)) {
      best = &seg;
      best_cos = c;
    }
  }
  return best->ecp * (length / best->length);
}

std::vector<FlightRecord> synthesize_flights(const FlightConfig& config,
                                             const DischargeModel& model) {
  if (!(config.length_cm > 0.0) || !(config.speed_cm_s > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "flight length and speed must be positive");
  }
  const Eigen::Vector3d heading = config.heading.normalized();
  const double headwind = config.wind.headwind_kmh(heading);
  const double rel_angle = config.wind.relative_angle_deg(heading);
  const double crosswind = config.wind.speed_kmh * std::sin(rel_angle * std::numbers::pi / 180.0);
  const double yaw = std::atan2(heading.y(), heading.x()) * 180.0 / std::numbers::pi;

  DischargeProcess battery(model, config.seed);
  std::mt19937_64 attitude_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::normal_distribution<double> jitter(0.0, 0.3);

  const Tick ticks = ceil_tick(config.length_cm / config.speed_cm_s);
  std::vector<FlightRecord> out;
  out.reserve(static_cast<std::size_t>(ticks + 1));
  for (Tick k = 0; k <= ticks; ++k) {
    FlightRecord r;
    r.t_ms = k * 100;
    r.dis = std::min(static_cast<double>(k) * config.speed_cm_s * kSampleInterval,
                     config.length_cm);
    const Eigen::Vector3d p = config.start + heading * r.dis;
    r.es_x = p.x();
    r.es_y = p.y();
    r.es_z = p.z();
    r.yaw = yaw + jitter(attitude_rng);
    r.pitch = 0.8 * config.speed_cm_s + 0.3 * headwind + jitter(attitude_rng);
    r.roll = 0.4 * crosswind + jitter(attitude_rng);
    r.vbat = k < ticks ? battery.step(headwind) : battery.voltage();
    r.wind_speed = config.wind.speed_kmh;
    r.wind_direction = config.wind.direction;
    r.wind_angle = rel_angle;
    r.loc_role = k == 0 ? LocRole::Start : (k == ticks ? LocRole::Destination : LocRole::Fly);
    r.drone_id = config.drone_id;
    r.loc = k == ticks ? config.dest : config.src;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<FlightConfig> standard_flight_plan(std::size_t count, std::uint64_t seed) {
  static const WindCondition kGrid[] = {
      {0.0, WindDirection::None}, {6.1, WindDirection::N}, {6.1, WindDirection::S},
      {6.1, WindDirection::E},    {7.6, WindDirection::N}, {7.6, WindDirection::S},
      {7.6, WindDirection::E}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> length(140.0, 300.0);
  std::uniform_real_distribution<double> speed(2.0, 8.0);
  std::vector<FlightConfig> plan;
  plan.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    FlightConfig c;
    c.wind = kGrid[i % std::size(kGrid)];
    const double a = angle(rng);
    c.heading = Eigen::Vector3d(std::cos(a), std::sin(a), 0.0);
    c.length_cm = length(rng);
    c.speed_cm_s = speed(rng);
    c.seed = rng();
    c.drone_id = static_cast<DroneId>(i % 3);
    c.src = "N" + std::to_string(2 * i);
    c.dest = "N" + std::to_string(2 * i + 1);
    plan.push_back(std::move(c));
  }
  return plan;
}

}  // namespace epds
