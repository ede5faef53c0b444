#include "dccsim/simulation.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>

#include "dccsim/rng.hpp"

namespace dccsim {

struct Simulation::Vehicle {
  ca::CaState ca;
  std::unique_ptr<dcc::DccGate> gate;
};

std::unique_ptr<mobility::Mobility> make_mobility(const ScenarioConfig& config) {
  if (config.kind == ScenarioKind::Static) return std::make_unique<mobility::StaticLine>(config.static_layout);
  return std::make_unique<mobility::Ring>(config.ring, config.seed);
}

std::string run_id(const ScenarioConfig& config) { return config.name + "-s" + std::to_string(config.seed); }

Simulation::Simulation(const ScenarioConfig& config, ca::Mode mode) : config_{config}, mode_{mode} {
  const auto diagnostics = validate(config_);
  if (!runnable(diagnostics)) {
    for (const auto& d : diagnostics) {
      if (d.severity == Diagnostic::Severity::Error) throw ConfigError(d.field, d.reason);
    }
  }
  if (config_.trigger == TriggerKind::Fixed) policy_.fixed_interval = config_.trigger_interval;
  policy_.thresholds = config_.thresholds;

  mobility_ = make_mobility(config_);
  channel_ = std::make_unique<channel::Channel>(config_.channel, *mobility_, config_.seed);

  result_.run_id = run_id(config_);
  result_.mode = mode_;
  result_.mac_phy_delay = config_.channel.mac_phy_delay;
  result_.epsilon = config_.epsilon;

  const auto n = static_cast<std::uint32_t>(mobility_->vehicle_count());
  vehicles_.resize(n);
  result_.queues.resize(n);
  dcc::GateConfig gate_config{config_.tc2_replace, config_.queue_capacity};
  for (std::uint32_t v = 0; v < n; ++v) {
    vehicles_[v].gate = std::make_unique<dcc::DccGate>(make_controller(v), gate_config);
    vehicles_[v].gate->set_listener([this, v](SimTime t_go, Duration t_dcc) { on_gate_update(v, t_go, t_dcc); });
  }
}

Simulation::~Simulation() = default;

void Simulation::set_trace(std::ostream* sink) { scheduler_.set_trace(sink); }

std::unique_ptr<dcc::RateController> Simulation::make_controller(std::uint32_t v) {
  switch (config_.controller) {
    case ControllerKind::Constant:
      return std::make_unique<dcc::ConstantRate>(config_.t_dcc);
    case ControllerKind::Scripted: {
      std::vector<std::pair<SimTime, Duration>> trace;
      for (const auto& [at, value] : config_.script) trace.emplace_back(SimTime::zero() + at, value);
      return std::make_unique<dcc::ScriptedRate>(std::move(trace));
    }
    case ControllerKind::LoadProportional:
      return std::make_unique<dcc::LoadProportionalRate>(
          config_.load_base, config_.load_gain,
          [this, v](SimTime now) { return channel_->measure_cbr(v, config_.channel.cbr_window, now); });
  }
  throw std::logic_error("unhandled controller kind");
}

void Simulation::start() {
  const auto n = static_cast<std::uint32_t>(vehicles_.size());
  std::uniform_int_distribution<std::int64_t> phase{0, Duration::s(1).count() - 1};

  for (std::uint32_t v = 0; v < n; ++v) {
    if (config_.tc3 == Tc3Kind::Off) continue;
    auto rng = make_rng(config_.seed, RngStream::TrafficPhase, v);
    const SimTime at = SimTime::from_us(config_.random_phases ? phase(rng) : 0);
    if (config_.tc3 == Tc3Kind::Saturating) {
      scheduler_.schedule(at, EventKind::TrafficArrival, v, [this, v] {
        enqueue(v, dcc::make_generic(v, dcc::TrafficClass::TC3, config_.tc3_size, scheduler_.now()));
      });
    } else {
      const auto period = Duration::us(std::max<std::int64_t>(1, std::llround(1e6 / config_.tc3_rate_hz)));
      scheduler_.schedule(at, EventKind::TrafficArrival, v, [this, v, period] { tc3_arrival(v, period); });
    }
  }
  for (const auto& burst : config_.tc1_bursts) {
    for (std::uint32_t v = 0; v < n; ++v) {
      scheduler_.schedule(SimTime::zero() + burst.at, EventKind::TrafficArrival, v, [this, v, count = burst.count] {
        for (int i = 0; i < count; ++i) {
          vehicles_[v].gate->enqueue(
              dcc::make_generic(v, dcc::TrafficClass::TC1, config_.tc1_size, scheduler_.now()));
        }
        if (auto msg = vehicles_[v].gate->pass_through(scheduler_.now())) on_transmit(v, *msg);
      });
    }
  }
  track_zone_ = config_.kind == ScenarioKind::Ring && config_.ring.zone_half_length_m > 0.0;
  if (track_zone_) {
    for (std::uint32_t v = 0; v < n; ++v) zone_change(v);
  }
  // Background sources start within the first second and CA services within
  // the next one, so gate phases never inherit the first CAM's phase.
  for (std::uint32_t v = 0; v < n; ++v) {
    auto rng = make_rng(config_.seed, RngStream::CaPhase, v);
    const SimTime at = SimTime::from_us(config_.random_phases ? Duration::s(1).count() + phase(rng) : 0);
    scheduler_.schedule(at, EventKind::TriggerEvaluation, v, [this, v] { poll(v); });
  }
}

void Simulation::zone_change(std::uint32_t v) {
  const SimTime now = scheduler_.now();
  auto it = std::lower_bound(zone_members_.begin(), zone_members_.end(), v);
  const bool listed = it != zone_members_.end() && *it == v;
  const bool inside = mobility_->in_measurement_zone(v, now);
  if (inside && !listed) zone_members_.insert(it, v);
  if (!inside && listed) zone_members_.erase(it);
  const SimTime next = mobility_->next_zone_change(v, now);
  if (next <= SimTime::zero() + config_.duration) {
    scheduler_.schedule(next, EventKind::MobilityStep, v, [this, v] { zone_change(v); });
  }
}

void Simulation::tc3_arrival(std::uint32_t v, Duration period) {
  enqueue(v, dcc::make_generic(v, dcc::TrafficClass::TC3, config_.tc3_size, scheduler_.now()));
  scheduler_.schedule(scheduler_.now() + period, EventKind::TrafficArrival, v,
                      [this, v, period] { tc3_arrival(v, period); });
}

void Simulation::poll(std::uint32_t v) {
  const SimTime now = scheduler_.now();
  auto& vehicle = vehicles_[v];
  // A pending GoT trigger absorbs further evaluations until it completes.
  if (!vehicle.ca.pending) {
    const auto dynamics = mobility_->dynamics_at(v, now);
    const auto decision = ca::evaluate_trigger(vehicle.ca, policy_, dynamics, now);
    if (decision != ca::TriggerDecision::None) on_trigger(v, decision, dynamics);
  }
  scheduler_.schedule(now + config_.poll_interval, EventKind::TriggerEvaluation, v, [this, v] { poll(v); });
}

void Simulation::on_trigger(std::uint32_t v, ca::TriggerDecision decision, const ca::VehicleDynamics& dynamics) {
  const SimTime now = scheduler_.now();
  auto& vehicle = vehicles_[v];
  if (mode_ == ca::Mode::Got) {
    const auto action =
        ca::got_on_trigger(vehicle.ca, decision, dynamics, now, vehicle.gate->next_gate_time(), config_.epsilon);
    if (action.kind == ca::GotAction::Kind::Defer) {
      ++result_.got_deferrals;
      vehicle.ca.pending->wakeup =
          scheduler_.schedule(action.wakeup_at, EventKind::GotWakeup, v, [this, v] { got_wakeup(v); });
      return;
    }
  }
  emit_cam(v, ca::generate_cam_etsi(vehicle.ca, decision, v, dynamics, now, config_.cam_size));
}

void Simulation::got_wakeup(std::uint32_t v) {
  const SimTime now = scheduler_.now();
  auto& vehicle = vehicles_[v];
  if (!vehicle.ca.pending) throw InvariantViolation("GoT wakeup without a pending trigger");
  vehicle.ca.pending->wakeup = EventHandle{};
  // Higher-priority traffic will take the coming opening; its transmission
  // moves t_go and re-arms this trigger.
  if (vehicle.gate->higher_priority_backlog(dcc::TrafficClass::TC2) > 0) {
    ++result_.got_blocked_wakeups;
    return;
  }
  const auto fresh = mobility_->dynamics_at(v, now);
  emit_cam(v, ca::got_complete(vehicle.ca, v, fresh, now, config_.cam_size));
}

void Simulation::on_gate_update(std::uint32_t v, SimTime t_go, Duration t_dcc) {
  auto& vehicle = vehicles_[v];
  ca::set_dcc_feedback(vehicle.ca, t_dcc);
  if (!vehicle.ca.pending) return;
  const SimTime now = scheduler_.now();
  scheduler_.cancel(vehicle.ca.pending->wakeup);
  const auto wakeup = ca::got_rearm(vehicle.ca, t_go, config_.epsilon, now);
  ++result_.got_rearms;
  vehicle.ca.pending->wakeup = scheduler_.schedule(*wakeup, EventKind::GotWakeup, v, [this, v] { got_wakeup(v); });
}

void Simulation::emit_cam(std::uint32_t v, const ca::CamMessage& cam) {
  const SimTime now = scheduler_.now();
  if (recording(cam.gen_timestamp)) result_.cam_generations.push_back(VehicleInstant{v, cam.gen_timestamp});
  const SimTime baseline = vehicles_[v].ca.baseline_time;
  if (recording(baseline)) result_.trigger_baselines.push_back(VehicleInstant{v, baseline});
  enqueue(v, dcc::make_cam(cam, now));
}

void Simulation::enqueue(std::uint32_t v, dcc::QueuedMessage msg) {
  auto& gate = *vehicles_[v].gate;
  gate.enqueue(std::move(msg));
  if (auto out = gate.pass_through(scheduler_.now())) on_transmit(v, *out);
}

void Simulation::gate_open(std::uint32_t v) {
  if (auto msg = vehicles_[v].gate->on_gate_open(scheduler_.now())) on_transmit(v, *msg);
}

void Simulation::on_transmit(std::uint32_t v, const dcc::QueuedMessage& msg) {
  const SimTime now = scheduler_.now();
  auto& gate = *vehicles_[v].gate;
  scheduler_.schedule(gate.next_gate_time(), EventKind::GateOpen, v, [this, v] { gate_open(v); });

  auto record = metrics::make_tx_record(msg, now, gate.current_t_dcc());
  if (record.queue_wait < Duration::zero()) throw InvariantViolation("negative queue wait");
  if (recording(now)) result_.tx.push_back(record);

  if (msg.is_cam()) {
    auto deliveries = track_zone_ ? channel_->broadcast_to(msg.size, v, now, zone_members_)
                                  : channel_->broadcast(msg.size, v, now);
    const SimTime gen = msg.cam().gen_timestamp;
    scheduler_.schedule(now + config_.channel.mac_phy_delay, EventKind::Delivery, v,
                        [this, d = std::move(deliveries), gen] { deliver(d, gen); });
  } else {
    channel_->occupy(msg.size, v, now);
  }

  if (config_.tc3 == Tc3Kind::Saturating && msg.traffic_class == dcc::TrafficClass::TC3) {
    enqueue(v, dcc::make_generic(v, dcc::TrafficClass::TC3, config_.tc3_size, now));
  }
}

void Simulation::deliver(const std::vector<channel::Delivery>& deliveries, SimTime gen_timestamp) {
  for (const auto& d : deliveries) {
    if (config_.distance_filter_m > 0.0 && d.distance_m > config_.distance_filter_m) continue;
    auto [rx, age] = neighbors_.record_reception(d.sender, d.receiver, gen_timestamp, d.rx_time, d.distance_m);
    if (rx.e2e_delay < config_.channel.mac_phy_delay) throw InvariantViolation("e2e below channel delay");
    if (!recording(d.rx_time)) continue;
    result_.rx.push_back(rx);
    if (age) result_.age.push_back(*age);
  }
}

RunResult Simulation::run() {
  start();
  scheduler_.run_until(SimTime::zero() + config_.duration);
  for (std::size_t v = 0; v < vehicles_.size(); ++v) {
    for (std::size_t c = 0; c < dcc::kTrafficClassCount; ++c) {
      const auto tc = static_cast<dcc::TrafficClass>(c);
      result_.queues[v].stats[c] = vehicles_[v].gate->stats(tc);
      result_.queues[v].still_queued[c] = vehicles_[v].gate->queue_length(tc);
    }
  }
  result_.events_processed = scheduler_.processed_count();
  result_.busy_seconds = channel_->total_busy_seconds();
  return std::move(result_);
}

std::vector<RunResult> run_scenario(const ScenarioConfig& config, std::ostream* trace_etsi, std::ostream* trace_got) {
  std::vector<RunResult> out;
  auto run_one = [&](ca::Mode mode, std::ostream* trace) {
    Simulation sim{config, mode};
    sim.set_trace(trace);
    out.push_back(sim.run());
  };
  if (config.mode != RunMode::Got) run_one(ca::Mode::Etsi, trace_etsi);
  if (config.mode != RunMode::Etsi) run_one(ca::Mode::Got, trace_got);
  return out;
}

namespace {

template <typename Key>
std::vector<std::int64_t> successive_gaps(std::vector<std::pair<Key, std::int64_t>> items) {
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::int64_t> out;
  for (std::size_t i = 1; i < items.size(); ++i) {
    if (items[i].first == items[i - 1].first) out.push_back(items[i].second - items[i - 1].second);
  }
  return out;
}

double mean_of(const std::vector<std::int64_t>& v) {
  if (v.empty()) return 0.0;
  long double sum = 0.0L;
  for (auto x : v) sum += static_cast<long double>(x);
  return static_cast<double>(sum / static_cast<long double>(v.size()));
}

}  // namespace

std::vector<std::int64_t> cam_queue_waits(const RunResult& run) {
  std::vector<std::int64_t> out;
  for (const auto& t : run.tx) {
    if (t.traffic_class == dcc::TrafficClass::TC2) out.push_back(t.queue_wait.count());
  }
  return out;
}

std::vector<std::int64_t> cam_tx_intervals(const RunResult& run) {
  std::vector<std::pair<std::uint32_t, std::int64_t>> items;
  for (const auto& t : run.tx) {
    if (t.traffic_class == dcc::TrafficClass::TC2) items.emplace_back(t.sender, t.tx_time.us());
  }
  return successive_gaps(std::move(items));
}

std::vector<std::int64_t> cam_gen_intervals(const RunResult& run) {
  std::vector<std::pair<std::uint32_t, std::int64_t>> items;
  for (const auto& g : run.cam_generations) items.emplace_back(g.vehicle, g.at.us());
  return successive_gaps(std::move(items));
}

std::map<std::string, metrics::SummaryStats> summarize_run(const RunResult& run) {
  std::map<std::string, metrics::SummaryStats> out;
  auto add = [&](const std::string& name, const std::vector<std::int64_t>& values, Duration bin) {
    if (!values.empty()) out.emplace(name, metrics::summarize(values, bin));
  };
  std::vector<std::int64_t> e2e, ipg, age, t_dcc;
  for (const auto& r : run.rx) {
    e2e.push_back(r.e2e_delay.count());
    if (r.ipg) ipg.push_back(r.ipg->count());
  }
  for (const auto& a : run.age) age.push_back(a.age.count());
  for (const auto& t : run.tx) t_dcc.push_back(t.t_dcc.count());
  add("queue_wait", cam_queue_waits(run), metrics::kDelayBinWidth);
  add("e2e", e2e, metrics::kDelayBinWidth);
  add("ipg", ipg, metrics::kIntervalBinWidth);
  add("age", age, metrics::kIntervalBinWidth);
  add("gen_interval", cam_gen_intervals(run), metrics::kIntervalBinWidth);
  add("tx_interval", cam_tx_intervals(run), metrics::kIntervalBinWidth);
  add("t_dcc", t_dcc, metrics::kIntervalBinWidth);
  return out;
}

ComparisonRow compare_row(const RunResult& run) {
  ComparisonRow row;
  row.mode = std::string{ca::to_string(run.mode)};
  std::vector<std::int64_t> e2e, ipg, age, t_dcc;
  for (const auto& r : run.rx) {
    e2e.push_back(r.e2e_delay.count());
    if (r.ipg) ipg.push_back(r.ipg->count());
  }
  for (const auto& a : run.age) age.push_back(a.age.count());
  for (const auto& t : run.tx) t_dcc.push_back(t.t_dcc.count());
  row.mean_e2e_ms = mean_of(e2e) / 1e3;
  row.mean_ipg_ms = mean_of(ipg) / 1e3;
  row.mean_age_ms = mean_of(age) / 1e3;
  row.mean_queue_wait_ms = mean_of(cam_queue_waits(run)) / 1e3;
  row.mean_t_dcc_ms = mean_of(t_dcc) / 1e3;
  row.mean_t_cam_ms = mean_of(cam_gen_intervals(run)) / 1e3;
  row.expected_queue_wait_ms = row.mean_t_dcc_ms / 2.0;
  row.min_info_age_ms = row.mean_queue_wait_ms + row.mean_t_cam_ms + run.mac_phy_delay.to_ms();
  return row;
}

void write_csvs(const CsvSinks& sinks, const std::vector<RunResult>& runs) {
  using namespace metrics;
  if (sinks.tx) write_tx_header(*sinks.tx);
  if (sinks.rx) write_rx_header(*sinks.rx);
  if (sinks.age) write_age_header(*sinks.age);
  if (sinks.summary) write_summary_header(*sinks.summary);
  if (sinks.histogram) write_histogram_header(*sinks.histogram);
  if (sinks.queues) *sinks.queues << "run_id,mode,vehicle_id,tc,enqueued,replaced,dropped,transmitted,queued\n";
  if (sinks.comparison) {
    *sinks.comparison << "run_id,mode,mean_e2e_ms,mean_age_ms,mean_ipg_ms,mean_queue_wait_ms,mean_t_dcc_ms,"
                         "mean_t_cam_ms,expected_queue_wait_ms,min_info_age_ms\n";
  }
  for (const auto& run : runs) {
    const std::string mode{ca::to_string(run.mode)};
    if (sinks.tx) write_tx_rows(*sinks.tx, run.run_id, mode, run.tx);
    if (sinks.rx) write_rx_rows(*sinks.rx, run.run_id, mode, run.rx);
    if (sinks.age) write_age_rows(*sinks.age, run.run_id, mode, run.age);
    if (sinks.summary || sinks.histogram) {
      for (const auto& [metric, stats] : summarize_run(run)) {
        if (sinks.summary) write_summary_row(*sinks.summary, run.run_id, mode, metric, stats);
        if (sinks.histogram) write_histogram_rows(*sinks.histogram, run.run_id, mode, metric, stats.histogram);
      }
    }
    if (sinks.queues) {
      for (std::size_t v = 0; v < run.queues.size(); ++v) {
        for (std::size_t c = 0; c < dcc::kTrafficClassCount; ++c) {
          const auto& s = run.queues[v].stats[c];
          if (s.enqueued == 0) continue;
          *sinks.queues << run.run_id << ',' << mode << ',' << v << ','
                        << dcc::to_string(static_cast<dcc::TrafficClass>(c)) << ',' << s.enqueued << ','
                        << s.replaced << ',' << s.dropped << ',' << s.transmitted << ','
                        << run.queues[v].still_queued[c] << '\n';
        }
      }
    }
    if (sinks.comparison) {
      const auto row = compare_row(run);
      *sinks.comparison << run.run_id << ',' << row.mode << ',' << format_fixed(row.mean_e2e_ms) << ','
                        << format_fixed(row.mean_age_ms) << ',' << format_fixed(row.mean_ipg_ms) << ','
                        << format_fixed(row.mean_queue_wait_ms) << ',' << format_fixed(row.mean_t_dcc_ms) << ','
                        << format_fixed(row.mean_t_cam_ms) << ',' << format_fixed(row.expected_queue_wait_ms)
                        << ',' << format_fixed(row.min_info_age_ms) << '\n';
    }
  }
}

void write_outputs(const std::string& dir, const ScenarioConfig& config, const std::vector<RunResult>& runs) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base{dir};
  std::ofstream tx{base / "tx.csv"}, rx{base / "rx.csv"}, age{base / "age.csv"}, summary{base / "summary.csv"},
      histogram{base / "histogram.csv"}, queues{base / "queues.csv"}, comparison{base / "comparison.csv"},
      effective{base / "config.ini"};
  for (auto* s : {&tx, &rx, &age, &summary, &histogram, &queues, &comparison, &effective}) {
    if (!*s) throw std::runtime_error("cannot write into output directory '" + dir + "'");
  }
  write_csvs(CsvSinks{&tx, &rx, &age, &summary, &histogram, &queues, &comparison}, runs);
  effective << serialize_config(config);
}

void print_comparison(std::ostream& os, const std::vector<RunResult>& runs) {
  using metrics::format_fixed;
  os << "mode   e2e_ms    age_ms    ipg_ms    t_q_ms    t_dcc_ms  t_cam_ms  E[t_q]_ms  min_age_ms\n";
  for (const auto& run : runs) {
    const auto r = compare_row(run);
    char line[256];
    std::snprintf(line, sizeof line, "%-6s %-9s %-9s %-9s %-9s %-9s %-9s %-10s %s\n", r.mode.c_str(),
                  format_fixed(r.mean_e2e_ms, 2).c_str(), format_fixed(r.mean_age_ms, 2).c_str(),
                  format_fixed(r.mean_ipg_ms, 2).c_str(), format_fixed(r.mean_queue_wait_ms, 2).c_str(),
                  format_fixed(r.mean_t_dcc_ms, 2).c_str(), format_fixed(r.mean_t_cam_ms, 2).c_str(),
                  format_fixed(r.expected_queue_wait_ms, 2).c_str(), format_fixed(r.min_info_age_ms, 2).c_str());
    os << line;
  }
}

}  // namespace dccsim
