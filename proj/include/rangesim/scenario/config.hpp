#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rangesim/apps/benign_agent.hpp"
#include "rangesim/apps/services.hpp"
#include "rangesim/flows/flows.hpp"
#include "rangesim/net/topology.hpp"

namespace rangesim {

enum class ScenarioKind : std::uint8_t { Mitm, Dos, Bf, BenignOnly };

const char* to_string(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario_kind(std::string_view text);

struct ScenarioInfo {
  ScenarioKind kind;
  const char* description;
};
const std::vector<ScenarioInfo>& builtin_scenarios();

class ConfigParseError : public std::runtime_error {
 public:
  ConfigParseError(const std::string& what, std::size_t line, std::size_t column)
      : std::runtime_error(what), line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class ConfigValidationError : public std::invalid_argument {
 public:
  ConfigValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct MitmParams {
  Cidr scan_subnet = Cidr::parse("192.168.128.0/24");
  std::vector<std::uint16_t> scan_ports;
  SimTime scan_start = Seconds(5);
  SimTime scan_window = Seconds(30);
  SimTime poison_start = Seconds(35);
  /// Default: duration - 10 s.
  std::optional<SimTime> poison_end;
  SimTime poison_period = Seconds(2);
  /// Hosts poisoned against the router; default: every User-LAN host.
  std::vector<std::string> victims;
  bool relay = true;
};

struct DosParams {
  std::string target = "web-server";
  std::uint16_t port = 80;
  double pshack_rate = 1000.0;
  double icmp_igmp_rate = 500.0;
  double icmp_fraction = 0.5;
  /// Default: min(300 s, duration / 6).
  std::optional<SimTime> phase_length;
  /// Run the three phases concurrently instead of one after another.
  bool parallel = false;
  bool spoof_source = false;
};

struct BfParams {
  std::string ssh_target = "admin-ubuntu";
  std::string ftp_target = "ftp-server";
  SimTime start = Seconds(60);
  SimTime sleep = Seconds(1800);
  SimTime attempt_interval = Seconds(1);
  std::size_t wordlist_size = 200;
  bool include_correct = true;
};

struct OutputPaths {
  std::optional<std::filesystem::path> pcap;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> flows;
};

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::BenignOnly;
  std::uint64_t seed = 1;
  SimTime duration = Seconds(3600);
  TopologyConfig topology;
  std::map<std::string, Credentials> credentials = ServiceSuite::default_credentials();
  std::vector<BenignAgentConfig> lanes;
  MitmParams mitm;
  DosParams dos;
  BfParams bf;
  std::vector<LanId> mirror;
  FlowConfig flows;
  OutputPaths output;
};

/// Fills scenario-dependent defaults (lanes, mirrored LANs, victims,
/// poison end) that were left empty.
void apply_defaults(ScenarioConfig& config);

/// Default benign lanes of a scenario on the reference topology.
std::vector<BenignAgentConfig> default_lanes(ScenarioKind kind, const Topology& topo);

/// Throws ConfigValidationError naming the offending field.
void validate(const ScenarioConfig& config);

/// Parses a JSON document without filling scenario defaults or running
/// cross-field validation; field types and unknown keys are still checked.
ScenarioConfig parse_config(std::string_view document);

/// Parses a JSON document. Throws ConfigParseError (with line/column) or
/// ConfigValidationError; unknown keys are rejected with a suggestion.
ScenarioConfig load_config(std::string_view document);
ScenarioConfig load_config_file(const std::filesystem::path& path);

/// DoS phase windows as [start, end) in order PSH-ACK, ICMP/IGMP, kill.
struct DosSchedule {
  SimTime length;
  std::array<SimTime, 3> starts;
};
DosSchedule dos_schedule(const ScenarioConfig& config);

std::string closest_match(std::string_view word, const std::vector<std::string>& candidates);

}  // namespace rangesim
