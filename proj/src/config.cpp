#include "dccsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dccsim/dcc_access.hpp"

namespace dccsim {

ConfigError::ConfigError(std::string field, const std::string& reason)
    : std::runtime_error(field + ": " + reason), field_{std::move(field)} {}

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  auto same_ring = [](const mobility::RingConfig& a, const mobility::RingConfig& b) {
    return a.circumference_m == b.circumference_m && a.lanes == b.lanes && a.density == b.density &&
           a.mean_speed_mps == b.mean_speed_mps && a.speed_jitter == b.speed_jitter &&
           a.curve_radius_m == b.curve_radius_m && a.lane_width_m == b.lane_width_m &&
           a.zone_half_length_m == b.zone_half_length_m;
  };
  auto same_channel = [](const channel::ChannelConfig& a, const channel::ChannelConfig& b) {
    return a.range_m == b.range_m && a.mac_phy_delay == b.mac_phy_delay &&
           a.loss_probability == b.loss_probability && a.data_rate_bps == b.data_rate_bps &&
           a.cbr_window == b.cbr_window;
  };
  return name == o.name && kind == o.kind && mode == o.mode && duration == o.duration && warmup == o.warmup &&
         seed == o.seed && random_phases == o.random_phases &&
         static_layout.vehicles == o.static_layout.vehicles &&
         static_layout.spacing_m == o.static_layout.spacing_m && same_ring(ring, o.ring) &&
         trigger == o.trigger && trigger_interval == o.trigger_interval && poll_interval == o.poll_interval &&
         epsilon == o.epsilon && thresholds == o.thresholds && cam_size == o.cam_size &&
         controller == o.controller && t_dcc == o.t_dcc && script == o.script && load_base == o.load_base &&
         load_gain == o.load_gain && tc2_replace == o.tc2_replace && queue_capacity == o.queue_capacity &&
         tc3 == o.tc3 && tc3_rate_hz == o.tc3_rate_hz && tc3_size == o.tc3_size && tc1_bursts == o.tc1_bursts &&
         tc1_size == o.tc1_size && same_channel(channel, o.channel) && distance_filter_m == o.distance_filter_m &&
         out_dir == o.out_dir;
}

std::string_view to_string(ScenarioKind k) { return k == ScenarioKind::Static ? "static" : "ring"; }

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::Etsi: return "etsi";
    case RunMode::Got: return "got";
    case RunMode::Paired: return "paired";
  }
  return "?";
}

std::string_view to_string(TriggerKind k) { return k == TriggerKind::Fixed ? "fixed" : "dynamics"; }

std::string_view to_string(ControllerKind k) {
  switch (k) {
    case ControllerKind::Constant: return "constant";
    case ControllerKind::Scripted: return "scripted";
    case ControllerKind::LoadProportional: return "load";
  }
  return "?";
}

std::string_view to_string(Tc3Kind k) {
  switch (k) {
    case Tc3Kind::Saturating: return "saturating";
    case Tc3Kind::Rate: return "rate";
    case Tc3Kind::Off: return "off";
  }
  return "?";
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string{s.substr(b, e - b + 1)};
}

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

double parse_double(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || end != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
    throw ConfigError(field, "expected a number, got '" + t + "'");
  }
  return v;
}

std::int64_t parse_int(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  std::int64_t v = 0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || end != t.data() + t.size() || t.empty()) {
    throw ConfigError(field, "expected an integer, got '" + t + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || end != t.data() + t.size() || t.empty()) {
    throw ConfigError(field, "expected a non-negative integer, got '" + t + "'");
  }
  return v;
}

bool parse_bool(const std::string& field, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(field, "expected true/false, got '" + t + "'");
}

Duration ms_value(const std::string& field, const std::string& text) {
  return Duration::us(std::llround(parse_double(field, text) * 1e3));
}

Duration s_value(const std::string& field, const std::string& text) {
  return Duration::us(std::llround(parse_double(field, text) * 1e6));
}

std::string fmt_ms(Duration d) { return fmt_double(static_cast<double>(d.count()) / 1e3); }
std::string fmt_s(Duration d) { return fmt_double(static_cast<double>(d.count()) / 1e6); }

template <typename E>
E parse_enum(const std::string& field, const std::string& text, std::initializer_list<E> values) {
  const std::string t = trim(text);
  for (E v : values) {
    if (to_string(v) == t) return v;
  }
  std::string allowed;
  for (E v : values) allowed += (allowed.empty() ? "" : "|") + std::string{to_string(v)};
  throw ConfigError(field, "expected one of " + allowed + ", got '" + t + "'");
}

// "a:b, c:d" pairs of numbers.
std::vector<std::pair<double, double>> parse_pairs(const std::string& field, const std::string& text) {
  std::vector<std::pair<double, double>> out;
  std::stringstream ss{text};
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    const auto colon = t.find(':');
    if (colon == std::string::npos) throw ConfigError(field, "expected 'time_ms:value' pairs, got '" + t + "'");
    out.emplace_back(parse_double(field, t.substr(0, colon)), parse_double(field, t.substr(colon + 1)));
  }
  return out;
}

struct Field {
  const char* section;
  const char* key;
  std::function<void(ScenarioConfig&, const std::string& field, const std::string& value)> parse;
  std::function<std::string(const ScenarioConfig&)> format;
};

const std::vector<Field>& fields() {
  using C = ScenarioConfig;
  using S = const std::string&;
  static const std::vector<Field> table = {
      {"scenario", "name", [](C& c, S, S v) { c.name = trim(v); }, [](const C& c) { return c.name; }},
      {"scenario", "kind",
       [](C& c, S f, S v) { c.kind = parse_enum(f, v, {ScenarioKind::Static, ScenarioKind::Ring}); },
       [](const C& c) { return std::string{to_string(c.kind)}; }},
      {"scenario", "mode",
       [](C& c, S f, S v) { c.mode = parse_enum(f, v, {RunMode::Etsi, RunMode::Got, RunMode::Paired}); },
       [](const C& c) { return std::string{to_string(c.mode)}; }},
      {"scenario", "duration_s", [](C& c, S f, S v) { c.duration = s_value(f, v); },
       [](const C& c) { return fmt_s(c.duration); }},
      {"scenario", "warmup_s", [](C& c, S f, S v) { c.warmup = s_value(f, v); },
       [](const C& c) { return fmt_s(c.warmup); }},
      {"scenario", "seed", [](C& c, S f, S v) { c.seed = parse_uint(f, v); },
       [](const C& c) { return std::to_string(c.seed); }},
      {"scenario", "random_phases", [](C& c, S f, S v) { c.random_phases = parse_bool(f, v); },
       [](const C& c) { return std::string{c.random_phases ? "true" : "false"}; }},
      {"scenario", "vehicles",
       [](C& c, S f, S v) { c.static_layout.vehicles = static_cast<std::size_t>(parse_uint(f, v)); },
       [](const C& c) { return std::to_string(c.static_layout.vehicles); }},
      {"scenario", "spacing_m", [](C& c, S f, S v) { c.static_layout.spacing_m = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.static_layout.spacing_m); }},
      {"scenario", "circumference_m", [](C& c, S f, S v) { c.ring.circumference_m = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.ring.circumference_m); }},
      {"scenario", "lanes", [](C& c, S f, S v) { c.ring.lanes = static_cast<int>(parse_int(f, v)); },
       [](const C& c) { return std::to_string(c.ring.lanes); }},
      {"scenario", "density", [](C& c, S f, S v) { c.ring.density = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.ring.density); }},
      {"scenario", "mean_speed_mps", [](C& c, S f, S v) { c.ring.mean_speed_mps = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.ring.mean_speed_mps); }},
      {"scenario", "speed_jitter", [](C& c, S f, S v) { c.ring.speed_jitter = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.ring.speed_jitter); }},
      {"scenario", "curve_radius_m", [](C& c, S f, S v) { c.ring.curve_radius_m = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.ring.curve_radius_m); }},
      {"scenario", "lane_width_m", [](C& c, S f, S v) { c.ring.lane_width_m = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.ring.lane_width_m); }},
      {"scenario", "zone_half_length_m", [](C& c, S f, S v) { c.ring.zone_half_length_m = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.ring.zone_half_length_m); }},

      {"ca", "trigger",
       [](C& c, S f, S v) { c.trigger = parse_enum(f, v, {TriggerKind::Fixed, TriggerKind::Dynamics}); },
       [](const C& c) { return std::string{to_string(c.trigger)}; }},
      {"ca", "trigger_interval_ms", [](C& c, S f, S v) { c.trigger_interval = ms_value(f, v); },
       [](const C& c) { return fmt_ms(c.trigger_interval); }},
      {"ca", "poll_ms", [](C& c, S f, S v) { c.poll_interval = ms_value(f, v); },
       [](const C& c) { return fmt_ms(c.poll_interval); }},
      {"ca", "epsilon_ms", [](C& c, S f, S v) { c.epsilon = ms_value(f, v); },
       [](const C& c) { return fmt_ms(c.epsilon); }},
      {"ca", "position_delta_m", [](C& c, S f, S v) { c.thresholds.position_delta = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.thresholds.position_delta); }},
      {"ca", "speed_delta_mps", [](C& c, S f, S v) { c.thresholds.speed_delta = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.thresholds.speed_delta); }},
      {"ca", "heading_delta_deg", [](C& c, S f, S v) { c.thresholds.heading_delta = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.thresholds.heading_delta); }},
      {"ca", "cam_size", [](C& c, S f, S v) { c.cam_size = static_cast<std::uint32_t>(parse_uint(f, v)); },
       [](const C& c) { return std::to_string(c.cam_size); }},

      {"dcc", "controller",
       [](C& c, S f, S v) {
         c.controller = parse_enum(
             f, v, {ControllerKind::Constant, ControllerKind::Scripted, ControllerKind::LoadProportional});
       },
       [](const C& c) { return std::string{to_string(c.controller)}; }},
      {"dcc", "t_dcc_ms", [](C& c, S f, S v) { c.t_dcc = ms_value(f, v); },
       [](const C& c) { return fmt_ms(c.t_dcc); }},
      {"dcc", "script",
       [](C& c, S f, S v) {
         c.script.clear();
         for (auto [at, val] : parse_pairs(f, v)) {
           c.script.emplace_back(Duration::us(std::llround(at * 1e3)), Duration::us(std::llround(val * 1e3)));
         }
       },
       [](const C& c) {
         std::string out;
         for (const auto& [at, val] : c.script) {
           out += (out.empty() ? "" : ", ") + fmt_ms(at) + ":" + fmt_ms(val);
         }
         return out;
       }},
      {"dcc", "base_ms", [](C& c, S f, S v) { c.load_base = ms_value(f, v); },
       [](const C& c) { return fmt_ms(c.load_base); }},
      {"dcc", "gain", [](C& c, S f, S v) { c.load_gain = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.load_gain); }},
      {"dcc", "cbr_window_ms", [](C& c, S f, S v) { c.channel.cbr_window = ms_value(f, v); },
       [](const C& c) { return fmt_ms(c.channel.cbr_window); }},
      {"dcc", "tc2_replace", [](C& c, S f, S v) { c.tc2_replace = parse_bool(f, v); },
       [](const C& c) { return std::string{c.tc2_replace ? "true" : "false"}; }},
      {"dcc", "queue_capacity", [](C& c, S f, S v) { c.queue_capacity = static_cast<std::size_t>(parse_uint(f, v)); },
       [](const C& c) { return std::to_string(c.queue_capacity); }},

      {"traffic", "tc3",
       [](C& c, S f, S v) { c.tc3 = parse_enum(f, v, {Tc3Kind::Saturating, Tc3Kind::Rate, Tc3Kind::Off}); },
       [](const C& c) { return std::string{to_string(c.tc3)}; }},
      {"traffic", "tc3_rate_hz", [](C& c, S f, S v) { c.tc3_rate_hz = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.tc3_rate_hz); }},
      {"traffic", "tc3_size", [](C& c, S f, S v) { c.tc3_size = static_cast<std::uint32_t>(parse_uint(f, v)); },
       [](const C& c) { return std::to_string(c.tc3_size); }},
      {"traffic", "tc1_bursts",
       [](C& c, S f, S v) {
         c.tc1_bursts.clear();
         for (auto [at, n] : parse_pairs(f, v)) {
           if (n != std::floor(n)) throw ConfigError(f, "burst counts must be integers");
           c.tc1_bursts.push_back(Tc1Burst{Duration::us(std::llround(at * 1e3)), static_cast<int>(n)});
         }
       },
       [](const C& c) {
         std::string out;
         for (const auto& b : c.tc1_bursts) out += (out.empty() ? "" : ", ") + fmt_ms(b.at) + ":" + std::to_string(b.count);
         return out;
       }},
      {"traffic", "tc1_size", [](C& c, S f, S v) { c.tc1_size = static_cast<std::uint32_t>(parse_uint(f, v)); },
       [](const C& c) { return std::to_string(c.tc1_size); }},

      {"channel", "range_m", [](C& c, S f, S v) { c.channel.range_m = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.channel.range_m); }},
      {"channel", "mac_phy_delay_ms", [](C& c, S f, S v) { c.channel.mac_phy_delay = ms_value(f, v); },
       [](const C& c) { return fmt_ms(c.channel.mac_phy_delay); }},
      {"channel", "loss_probability", [](C& c, S f, S v) { c.channel.loss_probability = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.channel.loss_probability); }},
      {"channel", "data_rate_bps", [](C& c, S f, S v) { c.channel.data_rate_bps = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.channel.data_rate_bps); }},

      {"metrics", "distance_filter_m", [](C& c, S f, S v) { c.distance_filter_m = parse_double(f, v); },
       [](const C& c) { return fmt_double(c.distance_filter_m); }},

      {"output", "dir", [](C& c, S, S v) { c.out_dir = trim(v); }, [](const C& c) { return c.out_dir; }},
  };
  return table;
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string{text}};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }

  ScenarioConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section, "keys must live inside a [section]");
    for (const auto& [key, value] : body) {
      const std::string field = section + "." + key;
      const auto& table = fields();
      auto it = std::find_if(table.begin(), table.end(),
                             [&](const Field& f) { return section == f.section && key == f.key; });
      if (it == table.end()) throw ConfigError(field, "unknown key");
      it->parse(config, field, value.data());
    }
  }
  return config;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in{path};
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string serialize_config(const ScenarioConfig& config) {
  std::string out;
  std::string current;
  for (const auto& f : fields()) {
    if (current != f.section) {
      if (!current.empty()) out += "\n";
      current = f.section;
      out += "[" + current + "]\n";
    }
    out += std::string{f.key} + " = " + f.format(config) + "\n";
  }
  return out;
}

std::vector<Diagnostic> validate(const ScenarioConfig& c) {
  std::vector<Diagnostic> out;
  auto error = [&](std::string field, std::string reason) {
    out.push_back(Diagnostic{Diagnostic::Severity::Error, std::move(field), std::move(reason)});
  };
  auto warning = [&](std::string field, std::string reason) {
    out.push_back(Diagnostic{Diagnostic::Severity::Warning, std::move(field), std::move(reason)});
  };
  const auto gate_ok = [](Duration d) { return d >= dcc::kMinGateInterval && d <= dcc::kMaxGateInterval; };

  if (c.name.empty()) error("scenario.name", "must not be empty");
  if (c.duration <= Duration::zero()) error("scenario.duration_s", "must be positive");
  if (c.warmup < Duration::zero()) error("scenario.warmup_s", "must not be negative");
  if (c.warmup >= c.duration && c.duration > Duration::zero()) error("scenario.warmup_s", "must be shorter than the run");

  if (c.kind == ScenarioKind::Static) {
    if (c.static_layout.vehicles < 1) error("scenario.vehicles", "need at least one vehicle");
    if (!(c.static_layout.spacing_m > 0.0)) error("scenario.spacing_m", "must be positive");
  } else {
    const auto& r = c.ring;
    if (r.lanes < 2 || r.lanes % 2 != 0) error("scenario.lanes", "must be an even number >= 2");
    if (!(r.density > 0.0)) error("scenario.density", "must be positive");
    if (!(r.mean_speed_mps > 0.0)) error("scenario.mean_speed_mps", "must be positive");
    if (r.speed_jitter < 0.0 || r.speed_jitter >= 1.0) error("scenario.speed_jitter", "must lie in [0, 1)");
    if (!(r.lane_width_m > 0.0)) error("scenario.lane_width_m", "must be positive");
    if (!(r.curve_radius_m - (r.lanes / 2) * r.lane_width_m > 0.0)) {
      error("scenario.curve_radius_m", "inner lanes would have a non-positive radius");
    }
    if (!(r.circumference_m > 2.0 * std::numbers::pi * r.curve_radius_m)) {
      error("scenario.circumference_m", "too short for two curves of the configured radius");
    }
    if (r.zone_half_length_m < 0.0) error("scenario.zone_half_length_m", "must not be negative");
  }

  if (c.trigger == TriggerKind::Fixed && c.trigger_interval <= Duration::zero()) {
    error("ca.trigger_interval_ms", "must be positive");
  }
  if (c.poll_interval <= Duration::zero()) error("ca.poll_ms", "must be positive");
  if (c.epsilon < Duration::zero()) {
    error("ca.epsilon_ms", "must not be negative");
  } else if (c.epsilon == Duration::zero()) {
    warning("ca.epsilon_ms", "zero leaves no time to build the CAM before the gate opens");
  } else if (c.controller == ControllerKind::Constant && c.epsilon >= c.t_dcc) {
    warning("ca.epsilon_ms", "not below t_dcc; GoT will always generate immediately");
  }
  if (!(c.thresholds.position_delta > 0.0)) error("ca.position_delta_m", "must be positive");
  if (!(c.thresholds.speed_delta > 0.0)) error("ca.speed_delta_mps", "must be positive");
  if (!(c.thresholds.heading_delta > 0.0)) error("ca.heading_delta_deg", "must be positive");
  if (c.cam_size == 0) error("ca.cam_size", "must be positive");

  switch (c.controller) {
    case ControllerKind::Constant:
      if (!gate_ok(c.t_dcc)) error("dcc.t_dcc_ms", "outside the gate range [25, 1000] ms");
      break;
    case ControllerKind::Scripted:
      if (c.script.empty()) error("dcc.script", "scripted controller needs at least one entry");
      for (const auto& [at, val] : c.script) {
        if (at < Duration::zero()) error("dcc.script", "entry times must not be negative");
        if (!gate_ok(val)) error("dcc.script", "entry outside the gate range [25, 1000] ms");
      }
      break;
    case ControllerKind::LoadProportional:
      if (c.load_base <= Duration::zero()) error("dcc.base_ms", "must be positive");
      if (c.load_gain < 0.0) error("dcc.gain", "must not be negative");
      break;
  }
  if (c.channel.cbr_window <= Duration::zero()) error("dcc.cbr_window_ms", "must be positive");
  if (c.queue_capacity < 1) error("dcc.queue_capacity", "must be at least 1");

  if (c.tc3 == Tc3Kind::Rate && !(c.tc3_rate_hz > 0.0)) error("traffic.tc3_rate_hz", "must be positive");
  if (c.tc3_size == 0) error("traffic.tc3_size", "must be positive");
  if (c.tc1_size == 0) error("traffic.tc1_size", "must be positive");
  for (const auto& b : c.tc1_bursts) {
    if (b.at < Duration::zero()) error("traffic.tc1_bursts", "burst times must not be negative");
    if (b.count < 1) error("traffic.tc1_bursts", "burst counts must be at least 1");
  }

  if (!(c.channel.range_m > 0.0)) error("channel.range_m", "must be positive");
  if (c.channel.mac_phy_delay < Duration::zero()) error("channel.mac_phy_delay_ms", "must not be negative");
  if (c.channel.loss_probability < 0.0 || c.channel.loss_probability > 1.0) {
    error("channel.loss_probability", "must lie in [0, 1]");
  }
  if (!(c.channel.data_rate_bps > 0.0)) error("channel.data_rate_bps", "must be positive");
  if (c.distance_filter_m < 0.0) error("metrics.distance_filter_m", "must not be negative");
  if (c.out_dir.empty()) error("output.dir", "must not be empty");
  return out;
}

bool runnable(const std::vector<Diagnostic>& diagnostics) {
  return std::none_of(diagnostics.begin(), diagnostics.end(),
                      [](const Diagnostic& d) { return d.severity == Diagnostic::Severity::Error; });
}

}  // namespace dccsim
