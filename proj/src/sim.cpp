#include "epds/sim.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <tuple>

#include "epds/error.hpp"

namespace epds {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::NoPredBellmanFord: return "NoPredBellmanFord";
    case Mode::NoPredDijkstra: return "NoPredDijkstra";
    case Mode::NoPredAStar: return "NoPredAStar";
    case Mode::Predictive: return "Predictive";
  }
  return "Predictive";
}

Mode parse_mode(std::string_view s) {
  for (Mode m : {Mode::NoPredBellmanFord, Mode::NoPredDijkstra, Mode::NoPredAStar,
                 Mode::Predictive}) {
    if (s == to_string(m)) return m;
  }
  throw Error(ErrorCode::ConfigError, "unknown mode '" + std::string(s) + "'");
}

Algorithm planner_for(Mode m) {
  switch (m) {
    case Mode::NoPredBellmanFord: return Algorithm::BellmanFord;
    case Mode::NoPredDijkstra: return Algorithm::Dijkstra;
    case Mode::NoPredAStar: return Algorithm::AStarDistance;
    case Mode::Predictive: return Algorithm::EpdsHeuristic;
  }
  return Algorithm::EpdsHeuristic;
}

namespace {
constexpr std::string_view kKindNames[] = {"RequestSubmitted", "Takeoff",       "SampleTick",
                                           "PredictionReady",  "Arrival",       "RechargeStart",
                                           "RechargeComplete"};
}

std::string_view to_string(EventKind k) { return kKindNames[static_cast<int>(k)]; }

EventKind parse_event_kind(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i)
    if (s == kKindNames[i]) return static_cast<EventKind>(i);
  throw Error(ErrorCode::SchemaMismatch, "unknown event kind '" + std::string(s) + "'");
}

std::string format_seconds(Tick t) {
  const bool neg = t < 0;
  const Tick a = neg ? -t : t;
  return (neg ? "-" : "") + std::to_string(a / 10) + "." + std::to_string(a % 10);
}

namespace {

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Event {
  Tick time;
  std::uint64_t seq;
  EventKind kind;
  std::size_t drone;
  std::uint64_t version;

  bool operator>(const Event& o) const { return std::tie(time, seq) > std::tie(o.time, o.seq); }
};

struct Drone {
  DroneId id = 0;
  std::size_t plan = 0;  // index into Engine::plans_
  std::size_t leg = 0;
  Phase phase = Phase::Pending;
  Tick submit = 0;
  Tick ready = 0;
  Tick first_takeoff = -1;
  Tick landed = -1;
  Tick takeoff_at = -1;
  Tick phase_since = 0;
  Tick leg_start = 0;
  Tick leg_ticks = 0;
  Tick samples = 0;
  Tick window_start = 0;
  std::uint64_t version = 0;
  std::uint64_t sample_epoch = 0;  // SampleTick events of older chains are stale
  Tick last_sample = -1;
  double headwind = 0.0;
  double leg_length = 0.0;
  Position origin = Position::Zero();
  Position direction = Position::Zero();
  Position position = Position::Zero();
  DischargeProcess battery;
  double consumed_at_full = 0.0;
  PredictionTrigger trigger;
  bool predicted = false;
  double ecp = 0.0;
  Tick waiting = 0, flight = 0, hovering = 0, recharging = 0;
  std::vector<double> trace;

  Drone(const DischargeModel& model, std::uint64_t seed, double trigger_fraction)
      : battery(model, seed), trigger(trigger_fraction) {}
};

class Engine {
 public:
  Engine(SkywayNetwork net, std::span<const DeliveryRequest> requests, Mode mode,
         std::uint64_t seed, const SimConfig& cfg, EnergyPredictor* predictor)
      : net_(std::move(net)), mode_(mode), seed_(seed), cfg_(cfg), predictor_(predictor),
        oracle_(cfg.battery) {
    if (!(cfg.speed > 0.0) || !(cfg.t_full > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "speed and t_full must be positive");
    }
    if (is_predictive(mode_) && predictor_ == nullptr) predictor_ = &oracle_;
    net_.clear_calendars();
    capacity_ = cfg.battery.capacity();
    profile_ = RechargeProfile::for_capacity(capacity_, cfg.t_full);
    cost_.speed = cfg.speed;
    cost_.rate_recharge = profile_.rate;
    cost_.e0 = nominal_energy_per_cm(cfg.battery, cfg.speed);

    for (const auto& r : requests) {
      if (!net_.contains(r.src) || !net_.contains(r.dest)) {
        throw Error(ErrorCode::UnknownNode, "request between " + std::to_string(r.src) + " and " +
                                                std::to_string(r.dest));
      }
      if (r.submit_time < 0.0) throw Error(ErrorCode::InvalidArgument, "negative submit time");
    }
    const auto t0 = Clock::now();
    auto comp = initial_composition(requests, net_, cost_, cfg.t_full, planner_for(mode_),
                                    cfg.plan_options);
    exec_ += Clock::now() - t0;
    // Drones are indexed by plan id (the request's position).
    plans_.resize(comp.plans.size());
    for (auto& p : comp.plans) plans_[static_cast<std::size_t>(p.id)] = std::move(p);
    congestion_ = std::move(comp.congestion);
    queues_.emplace(plans_);

    drones_.reserve(plans_.size());
    for (std::size_t i = 0; i < plans_.size(); ++i) {
      drones_.emplace_back(cfg.battery, mix(seed, i), cfg.trigger_fraction);
      Drone& d = drones_.back();
      d.id = static_cast<DroneId>(i);
      d.plan = i;
      d.submit = to_tick(plans_[i].request.submit_time);
      d.position = net_.node(plans_[i].request.src).position();
      push(d.submit, EventKind::RequestSubmitted, i);
    }
  }

  RunResult run() {
    std::size_t processed = 0;
    while (!queue_.empty()) {
      const Event ev = queue_.top();
      queue_.pop();
      now_ = ev.time;
      if (++processed > cfg_.max_events) {
        throw Error(ErrorCode::Deadlock, "event budget exhausted" + log_tail());
      }
      dispatch(ev);
    }
    for (const auto& d : drones_) {
      if (d.phase != Phase::Done) {
        throw Error(ErrorCode::Deadlock,
                    "drone " + std::to_string(d.id) + " never delivered" + log_tail());
      }
    }
    return finish(processed);
  }

 private:
  using Clock = std::chrono::steady_clock;

  void push(Tick t, EventKind kind, std::size_t drone, std::uint64_t version = 0) {
    queue_.push({t, next_seq_++, kind, drone, version});
  }

  void log(EventKind kind, const Drone& d, NodeId node, std::string detail) {
    if (kind == EventKind::SampleTick && !cfg_.log_samples) return;
    log_.push_back({now_, log_seq_++, kind, d.id, node, std::move(detail)});
  }

  std::string log_tail() const {
    std::ostringstream os;
    os << "; last events:\n";
    const std::size_t from = log_.size() > 20 ? log_.size() - 20 : 0;
    write_event_log(os, std::span(log_).subspan(from));
    return os.str();
  }

  const EpdsSegment& segment(const Drone& d) const { return plans_[d.plan].segments[d.leg]; }
  EpdsSegment& segment(Drone& d) { return plans_[d.plan].segments[d.leg]; }
  bool final_leg(const Drone& d) const { return d.leg + 1 == plans_[d.plan].segments.size(); }

  void check(const Node& node) {
    if (!cfg_.check_invariants) return;
    if (!calendar_consistent(node)) {
      throw Error(ErrorCode::OverlapRejected,
                  "pad calendar at node " + std::to_string(node.id()) + " overlaps" + log_tail());
    }
    std::map<DroneId, int> pending;
    for (int p = 0; p < node.pad_count(); ++p)
      for (const auto& w : node.pad(p))
        if (w.status == WindowStatus::PredRecharging && ++pending[w.drone_id] > 1) {
          throw Error(ErrorCode::OverlapRejected, "duplicate pending window for drone " +
                                                      std::to_string(w.drone_id));
        }
  }

  void dispatch(const Event& ev) {
    Drone& d = drones_[ev.drone];
    switch (ev.kind) {
      case EventKind::RequestSubmitted: return on_submit(d);
      case EventKind::Takeoff: return on_takeoff(d, ev.version);
      case EventKind::SampleTick: return on_sample(d, ev.version);
      case EventKind::PredictionReady: return on_prediction(d);
      case EventKind::Arrival: return on_arrival(d);
      case EventKind::RechargeStart: return on_recharge_start(d, ev.version);
      case EventKind::RechargeComplete: return on_recharge_complete(d);
    }
  }

  void on_submit(Drone& d) {
    d.phase = Phase::Waiting;
    d.ready = now_;
    d.phase_since = now_;
    log(EventKind::RequestSubmitted, d, plans_[d.plan].request.src,
        "dest=" + std::to_string(plans_[d.plan].request.dest));
    replan_all();
  }

  /// Re-time every waiting drone against the current calendars and queues.
  void replan_all() {
    const auto t0 = Clock::now();
    for (auto& d : drones_) replan(d);
    exec_ += Clock::now() - t0;
  }

  void replan(Drone& d) {
    if (d.phase != Phase::Waiting) return;
    const EpdsSegment& seg = segment(d);
    const Tick n = flight_ticks(net_.edge_length(seg.from, seg.to), cfg_.speed);
    Tick t = std::max(now_, d.ready);
    if (!final_leg(d)) {
      if (!queues_->clear_ahead(seg.to, plans_[d.plan].id)) {
        if (d.takeoff_at != -1) {
          d.takeoff_at = -1;
          ++d.version;
        }
        return;
      }
      t = std::max(t, to_tick(takeoff_time(net_.node(seg.to), seconds(now_), seconds(d.ready),
                                           seconds(n), cfg_.t_full)));
    }
    if (t != d.takeoff_at) {
      d.takeoff_at = t;
      push(t, EventKind::Takeoff, static_cast<std::size_t>(d.id), ++d.version);
    }
  }

  void on_takeoff(Drone& d, std::uint64_t version) {
    if (version != d.version || d.phase != Phase::Waiting) return;
    EpdsSegment& seg = segment(d);
    d.waiting += now_ - d.phase_since;
    d.phase = Phase::Flying;
    d.phase_since = now_;
    d.takeoff_at = -1;
    if (d.first_takeoff < 0) d.first_takeoff = now_;
    d.leg_start = now_;
    d.samples = 0;
    d.leg_length = net_.edge_length(seg.from, seg.to);
    d.leg_ticks = flight_ticks(d.leg_length, cfg_.speed);
    d.origin = net_.node(seg.from).position();
    d.direction = (net_.node(seg.to).position() - d.origin).normalized();
    d.position = d.origin;
    d.headwind = cfg_.wind.headwind_kmh(d.direction);
    d.trigger.reset();
    d.predicted = false;
    seg.t_src = seconds(now_);
    seg.t_flight = seconds(d.leg_ticks);
    seg.t_des = seconds(now_ + d.leg_ticks);
    seg.scheduled = true;
    seg.vbat_trace.clear();
    log(EventKind::Takeoff, d, seg.from, "to=" + std::to_string(seg.to) + " leg=" +
                                             std::to_string(d.leg));
    start_sampling(d);
  }

  /// Starts a new per-tick sampling chain, retiring any previous one.
  void start_sampling(Drone& d) {
    push(std::max(now_, d.last_sample + 1), EventKind::SampleTick, static_cast<std::size_t>(d.id),
         ++d.sample_epoch);
  }

  void on_sample(Drone& d, std::uint64_t epoch) {
    if (epoch != d.sample_epoch) return;
    if (d.phase == Phase::Hovering) {
      if (now_ >= d.window_start) return;
      const double v = d.battery.step(d.headwind);
      d.trace.push_back(v);
      d.last_sample = now_;
      log(EventKind::SampleTick, d, segment(d).to, "hover v=" + num(v));
      push(now_ + 1, EventKind::SampleTick, static_cast<std::size_t>(d.id), epoch);
      return;
    }
    if (d.phase != Phase::Flying) return;
    EpdsSegment& seg = segment(d);
    const double v = d.battery.step(d.headwind);
    d.trace.push_back(v);
    seg.vbat_trace.push_back(v);
    d.last_sample = now_;
    ++d.samples;
    const double travelled =
        std::min(static_cast<double>(d.samples) * cfg_.speed * kSampleInterval, d.leg_length);
    d.position = d.origin + d.direction * travelled;
    log(EventKind::SampleTick, d, seg.from, "v=" + num(v));

    if (is_predictive(mode_) && !final_leg(d) && !d.predicted &&
        static_cast<std::size_t>(d.samples) >= predictor_->min_samples() &&
        d.trigger(travelled / d.leg_length)) {
      const auto t0 = Clock::now();
      SegmentContext ctx;
      ctx.observed = seg.vbat_trace;
      ctx.total_samples = d.leg_ticks;
      ctx.current_voltage = d.battery.voltage();
      ctx.headwind_kmh = d.headwind;
      d.ecp = predictor_->predict_ecp(ctx, cfg_.battery.current_map);
      exec_ += Clock::now() - t0;
      push(now_, EventKind::PredictionReady, static_cast<std::size_t>(d.id));
    }
    if (d.samples >= d.leg_ticks) {
      push(now_ + 1, EventKind::Arrival, static_cast<std::size_t>(d.id));
    } else {
      push(now_ + 1, EventKind::SampleTick, static_cast<std::size_t>(d.id), epoch);
    }
  }

  void on_prediction(Drone& d) {
    if (d.phase != Phase::Flying || d.predicted) return;
    const auto t0 = Clock::now();
    const EpdsSegment& seg = segment(d);
    Node& next = net_.node(seg.to);
    const Tick arrival = d.leg_start + d.leg_ticks;
    const auto res = optimize_step(next, d.id, seconds(arrival), d.ecp, BatteryState::full(capacity_),
                                   profile_, {}, seconds(now_));
    exec_ += Clock::now() - t0;
    d.predicted = true;
    queues_->resolve(seg.to, plans_[d.plan].id);
    for (auto& ev : congestion_)
      if (ev.shared_node == seg.to) ev.predictions[plans_[d.plan].id] = d.ecp;
    std::string detail = "ecp=" + num(d.ecp);
    if (res.window) {
      detail += " start=" + format_seconds(to_tick(res.window->t_start)) +
                " end=" + format_seconds(to_tick(res.window->t_end));
    }
    log(EventKind::PredictionReady, d, seg.to, std::move(detail));
    check(next);
    replan_all();
  }

  void on_arrival(Drone& d) {
    EpdsSegment& seg = segment(d);
    d.flight += now_ - d.phase_since;
    d.phase_since = now_;
    d.position = net_.node(seg.to).position();
    seg.t_des = seconds(now_);
    if (final_leg(d)) {
      d.phase = Phase::Done;
      d.landed = now_;
      log(EventKind::Arrival, d, seg.to, "final=1");
      return;
    }
    log(EventKind::Arrival, d, seg.to, "final=0");
    Node& node = net_.node(seg.to);
    const auto held = find_reservation(node, d.id);
    if (held && held->window.status == WindowStatus::PredRecharging) {
      d.window_start = to_tick(held->window.t_start);
    } else {
      // No prediction was made: hold the earliest slot that fits the need now.
      const auto t0 = Clock::now();
      const double need = seconds(recharge_ticks(d));
      const double start = earliest_available(node, seconds(now_), need);
      reserve(node, {start, start + need, WindowStatus::PredRecharging, d.id});
      d.window_start = to_tick(start);
      exec_ += Clock::now() - t0;
      check(node);
    }
    queues_->resolve(seg.to, plans_[d.plan].id);
    d.phase = Phase::Hovering;
    if (d.window_start <= now_) {
      start_recharge(d);
    } else {
      ++hovers_;
      push(d.window_start, EventKind::RechargeStart, static_cast<std::size_t>(d.id), ++d.version);
      start_sampling(d);
    }
    replan_all();
  }

  Tick recharge_ticks(const Drone& d) const {
    // A pack drained past empty (long hovers) still only takes t_full to refill.
    const double used = std::min(d.battery.consumed() - d.consumed_at_full, capacity_);
    return std::max<Tick>(1, ceil_tick(cfg_.t_full * used / capacity_));
  }

  void on_recharge_start(Drone& d, std::uint64_t version) {
    if (version != d.version || d.phase != Phase::Hovering || now_ != d.window_start) return;
    start_recharge(d);
    replan_all();
  }

  void start_recharge(Drone& d) {
    const auto t0 = Clock::now();
    d.hovering += now_ - d.phase_since;
    const EpdsSegment& seg = segment(d);
    Node& node = net_.node(seg.to);
    const Tick r = recharge_ticks(d);
    const CommitResult cr = commit_reservation(node, d.id, seconds(now_), seconds(now_ + r));
    shifts_ += cr.shifted.size();
    for (DroneId other : cr.shifted) {
      Drone& o = drones_[static_cast<std::size_t>(other)];
      if (o.phase == Phase::Hovering && segment(o).to == seg.to) {
        const auto w = find_reservation(node, o.id);
        o.window_start = to_tick(w->window.t_start);
        push(o.window_start, EventKind::RechargeStart, static_cast<std::size_t>(o.id),
             ++o.version);
        start_sampling(o);
      }
    }
    exec_ += Clock::now() - t0;
    check(node);
    d.phase = Phase::Recharging;
    d.phase_since = now_;
    log(EventKind::RechargeStart, d, seg.to, "end=" + format_seconds(now_ + r));
    push(now_ + r, EventKind::RechargeComplete, static_cast<std::size_t>(d.id));
  }

  void on_recharge_complete(Drone& d) {
    d.recharging += now_ - d.phase_since;
    d.battery.restore_full();
    d.consumed_at_full = d.battery.consumed();
    log(EventKind::RechargeComplete, d, segment(d).to, "");
    ++d.leg;
    d.phase = Phase::Waiting;
    d.ready = now_;
    d.phase_since = now_;
    d.takeoff_at = -1;
    replan_all();
  }

  RunResult finish(std::size_t processed) {
    RunResult out;
    out.events = processed;
    Metrics& m = out.metrics;
    m.mode = std::string(to_string(mode_));
    m.seed = seed_;
    m.n_drones = drones_.size();
    m.n_nodes = net_.size();
    m.speed = cfg_.speed;
    m.t_full = cfg_.t_full;
    m.hovers = hovers_;
    m.shifts = shifts_;
    double delivery = 0.0;
    double span = 0.0;
    for (auto& d : drones_) {
      DroneReport r;
      r.id = d.id;
      r.plan_id = plans_[d.plan].id;
      r.submit = d.submit;
      r.first_takeoff = d.first_takeoff;
      r.landed = d.landed;
      r.waiting = d.waiting;
      r.flight = d.flight;
      r.hovering = d.hovering;
      r.recharging = d.recharging;
      r.consumed = d.battery.consumed();
      r.vbat = std::move(d.trace);
      delivery += r.delivery_s();
      span += r.flight_span_s();
      out.drones.push_back(std::move(r));
    }
    if (!drones_.empty()) {
      const auto n = static_cast<double>(drones_.size());
      m.avg_delivery_s = delivery / n;
      m.avg_flight_span_s = span / n;
      m.avg_exec_ms = std::chrono::duration<double, std::milli>(exec_).count() / n;
    }
    out.log = std::move(log_);
    out.plans = std::move(plans_);
    out.congestion = std::move(congestion_);
    return out;
  }

  SkywayNetwork net_;
  Mode mode_;
  std::uint64_t seed_;
  SimConfig cfg_;
  EnergyPredictor* predictor_;
  OraclePredictor oracle_;
  double capacity_ = 0.0;
  RechargeProfile profile_;
  EdgeCostModel cost_;
  std::vector<CompositePlan> plans_;
  std::vector<CongestionEvent> congestion_;
  std::optional<FcfsQueues> queues_;
  std::vector<Drone> drones_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t next_seq_ = 0;
  std::uint64_t log_seq_ = 0;
  Tick now_ = 0;
  std::vector<LogEntry> log_;
  Clock::duration exec_{};
  std::size_t hovers_ = 0;
  std::size_t shifts_ = 0;
};

}  // namespace

RunResult run(SkywayNetwork net, std::span<const DeliveryRequest> requests, Mode mode,
              std::uint64_t seed, const SimConfig& config, EnergyPredictor* predictor) {
  Engine engine(std::move(net), requests, mode, seed, config, predictor);
  return engine.run();
}

// Event log ------------------------------------------------------------------

void write_event_log(std::ostream& out, std::span<const LogEntry> log) {
  out << "time,seq,kind,drone,node,detail\n";
  for (const auto& e : log) {
    out << format_seconds(e.time) << ',' << e.seq << ',' << to_string(e.kind) << ',' << e.drone
        << ',' << e.node << ',' << e.detail << '\n';
  }
}

namespace {

Tick parse_seconds(std::string_view s) {
  const bool neg = !s.empty() && s.front() == '-';
  if (neg) s.remove_prefix(1);
  const auto dot = s.find('.');
  if (dot == std::string_view::npos || dot + 2 != s.size()) {
    throw Error(ErrorCode::SchemaMismatch, "bad event time '" + std::string(s) + "'");
  }
  Tick whole = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + dot, whole);
  const int tenth = s[dot + 1] - '0';
  if (ec != std::errc() || p != s.data() + dot || tenth < 0 || tenth > 9) {
    throw Error(ErrorCode::SchemaMismatch, "bad event time '" + std::string(s) + "'");
  }
  const Tick t = whole * 10 + tenth;
  return neg ? -t : t;
}

template <typename T>
T parse_int(std::string_view s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorCode::SchemaMismatch, "bad integer '" + std::string(s) + "' in event log");
  }
  return v;
}

}  // namespace

std::vector<LogEntry> read_event_log(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "time,seq,kind,drone,node,detail") {
    throw Error(ErrorCode::SchemaMismatch, "event log header missing");
  }
  std::vector<LogEntry> log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::string_view rest = line;
    std::string_view f[5];
    for (auto& field : f) {
      const auto c = rest.find(',');
      if (c == std::string_view::npos) {
        throw Error(ErrorCode::SchemaMismatch, "short event log row: " + line);
      }
      field = rest.substr(0, c);
      rest.remove_prefix(c + 1);
    }
    LogEntry e;
    e.time = parse_seconds(f[0]);
    e.seq = parse_int<std::uint64_t>(f[1]);
    e.kind = parse_event_kind(f[2]);
    e.drone = parse_int<DroneId>(f[3]);
    e.node = parse_int<NodeId>(f[4]);
    e.detail = std::string(rest);
    log.push_back(std::move(e));
  }
  return log;
}

Metrics replay_metrics(std::span<const LogEntry> log) {
  struct Acc {
    Tick submit = -1, first_takeoff = -1, landed = -1;
  };
  std::map<DroneId, Acc> acc;
  std::map<NodeId, bool> nodes;
  for (const auto& e : log) {
    Acc& a = acc[e.drone];
    nodes[e.node] = true;
    switch (e.kind) {
      case EventKind::RequestSubmitted: a.submit = e.time; break;
      case EventKind::Takeoff:
        if (a.first_takeoff < 0) a.first_takeoff = e.time;
        break;
      case EventKind::Arrival:
        if (e.detail == "final=1") a.landed = e.time;
        break;
      default: break;
    }
  }
  Metrics m;
  m.n_drones = acc.size();
  double delivery = 0.0, span = 0.0;
  for (const auto& [id, a] : acc) {
    if (a.submit < 0 || a.first_takeoff < 0 || a.landed < 0) {
      throw Error(ErrorCode::SchemaMismatch, "event log incomplete for drone " + std::to_string(id));
    }
    delivery += seconds(a.landed - a.submit);
    span += seconds(a.landed - a.first_takeoff);
  }
  if (!acc.empty()) {
    m.avg_delivery_s = delivery / static_cast<double>(acc.size());
    m.avg_flight_span_s = span / static_cast<double>(acc.size());
  }
  // An intermediate arrival whose recharge starts later was a hover.
  std::map<DroneId, Tick> last_arrival;
  for (const auto& e : log) {
    if (e.kind == EventKind::Arrival && e.detail == "final=0") last_arrival[e.drone] = e.time;
    if (e.kind == EventKind::RechargeStart && last_arrival.count(e.drone) &&
        e.time > last_arrival[e.drone]) {
      ++m.hovers;
    }
  }
  return m;
}

void write_metrics_row(std::ostream& out, const Metrics& m) {
  out << m.label << ',' << m.mode << ',' << m.seed << ',' << m.n_drones << ',' << m.n_nodes
      << ',' << num(m.speed) << ',' << num(m.t_full) << ',' << num(m.avg_delivery_s) << ',' << num(m.avg_exec_ms) << ',' << num(m.avg_flight_span_s)
      << ',' << m.hovers << ',' << m.shifts << '\n';
}

// Scenarios -------------------------------------------------------------------

SkywayNetwork build_network(const Scenario& s) {
  if (s.edges) return build_network(std::span<const NodeSpec>(s.nodes), Topology{*s.edges}, s.pad_count);
  return build_network(std::span<const NodeSpec>(s.nodes), Topology{FullyConnected{}}, s.pad_count);
}

ScenarioVariant scenario_variant(const Scenario& base, std::uint64_t seed, double max_jitter_s) {
  static const WindCondition kGrid[] = {
      {0.0, WindDirection::None}, {6.1, WindDirection::N}, {6.1, WindDirection::S},
      {6.1, WindDirection::E},    {7.6, WindDirection::N}, {7.6, WindDirection::S},
      {7.6, WindDirection::E}};
  std::mt19937_64 rng(mix(seed, 0xC0FFEE));
  ScenarioVariant v;
  v.wind = kGrid[std::uniform_int_distribution<std::size_t>(0, std::size(kGrid) - 1)(rng)];
  const Tick max_jitter = to_tick(max_jitter_s);
  std::uniform_int_distribution<Tick> jitter(0, std::max<Tick>(0, max_jitter));
  for (auto r : base.requests) {
    r.submit_time = seconds(to_tick(r.submit_time) + jitter(rng));
    v.requests.push_back(r);
  }
  return v;
}

Scenario random_scenario(std::size_t n_nodes, std::size_t n_drones, std::uint64_t seed,
                         double extent_cm, double max_range_cm, double submit_window_s) {
  if (n_nodes < 2) throw Error(ErrorCode::InvalidArgument, "need at least two nodes");
  Scenario s;
  const auto pos = random_positions(n_nodes, seed, extent_cm);
  for (std::size_t i = 0; i < n_nodes; ++i) s.nodes.push_back({static_cast<NodeId>(i), pos[i]});
  s.edges = range_limited_edges(s.nodes, max_range_cm);
  std::mt19937_64 rng(mix(seed, 0x5CE7A210));
  std::uniform_int_distribution<std::size_t> pick(0, n_nodes - 1);
  std::uniform_int_distribution<Tick> submit(0, to_tick(submit_window_s));
  for (std::size_t k = 0; k < n_drones; ++k) {
    DeliveryRequest r;
    r.src = static_cast<NodeId>(pick(rng));
    do {
      r.dest = static_cast<NodeId>(pick(rng));
    } while (r.dest == r.src);
    r.submit_time = seconds(submit(rng));
    s.requests.push_back(r);
  }
  return s;
}

}  // namespace epds
