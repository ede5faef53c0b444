#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dccsim/ca_service.hpp"
#include "dccsim/channel.hpp"
#include "dccsim/mobility.hpp"
#include "dccsim/sim_time.hpp"

namespace dccsim {

enum class ScenarioKind : std::uint8_t { Static, Ring };
enum class RunMode : std::uint8_t { Etsi, Got, Paired };
enum class TriggerKind : std::uint8_t { Fixed, Dynamics };
enum class ControllerKind : std::uint8_t { Constant, Scripted, LoadProportional };
enum class Tc3Kind : std::uint8_t { Saturating, Rate, Off };

struct Tc1Burst {
  Duration at;  // offset from simulation start
  int count = 1;
  bool operator==(const Tc1Burst&) const = default;
};

/// Everything needed to reproduce one run (or one ETSI/GoT pair). Durations
/// are stored at microsecond resolution; the text format uses milliseconds
/// and seconds.
struct ScenarioConfig {
  // [scenario]
  std::string name = "scenario";
  ScenarioKind kind = ScenarioKind::Static;
  RunMode mode = RunMode::Paired;
  Duration duration = Duration::s(300);
  Duration warmup = Duration::zero();
  std::uint64_t seed = 1;
  bool random_phases = true;
  mobility::StaticConfig static_layout;
  mobility::RingConfig ring;

  // [ca]
  TriggerKind trigger = TriggerKind::Fixed;
  Duration trigger_interval = Duration::ms(300);
  Duration poll_interval = Duration::ms(10);
  Duration epsilon = Duration::ms(15);
  ca::TriggerThresholds thresholds;
  std::uint32_t cam_size = ca::kDefaultCamSize;

  // [dcc]
  ControllerKind controller = ControllerKind::Constant;
  Duration t_dcc = Duration::ms(200);
  std::vector<std::pair<Duration, Duration>> script;  // (at, t_dcc)
  Duration load_base = Duration::ms(100);
  double load_gain = 4.0;
  bool tc2_replace = true;
  std::size_t queue_capacity = 100;

  // [traffic]
  Tc3Kind tc3 = Tc3Kind::Saturating;
  double tc3_rate_hz = 0.0;
  std::uint32_t tc3_size = 332;
  std::vector<Tc1Burst> tc1_bursts;
  std::uint32_t tc1_size = 300;

  // [channel]
  channel::ChannelConfig channel;

  // [metrics]
  double distance_filter_m = 0.0;  // 0 keeps every in-range pair

  // [output]
  std::string out_dir = "out";

  bool operator==(const ScenarioConfig&) const;
};

/// Malformed text, unknown keys or unparsable values. field() names the
/// offending "section.key".
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& reason);
  const std::string& field() const { return field_; }

private:
  std::string field_;
};

struct Diagnostic {
  enum class Severity : std::uint8_t { Warning, Error };
  Severity severity = Severity::Error;
  std::string field;
  std::string reason;
};

ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::string& path);

/// Every field made explicit; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ScenarioConfig& config);

/// Range and consistency checks. The config is runnable iff no diagnostic has
/// Error severity.
std::vector<Diagnostic> validate(const ScenarioConfig& config);
bool runnable(const std::vector<Diagnostic>& diagnostics);

std::string_view to_string(ScenarioKind k);
std::string_view to_string(RunMode m);
std::string_view to_string(TriggerKind k);
std::string_view to_string(ControllerKind k);
std::string_view to_string(Tc3Kind k);

}  // namespace dccsim
