#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rangesim/scenario/runner.hpp"

namespace rangesim {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

nlohmann::json summary_json(const RunSummary& s) {
  nlohmann::json j;
  j["scenario"] = to_string(s.kind);
  j["seed"] = s.seed;
  j["duration"] = format_duration(s.duration);
  j["events"] = s.events;
  j["capture_records"] = s.capture_records;
  nlohmann::json labels = nlohmann::json::object();
  for (int i = 0; i < kLabelCount; ++i) {
    if (s.label_counts[i] > 0) labels[to_string(static_cast<LabelTag>(i))] = s.label_counts[i];
  }
  j["packets_per_label"] = labels;
  nlohmann::json benign = nlohmann::json::object();
  for (const auto& [kind, st] : s.benign) {
    benign[to_string(kind)] = {{"attempts", st.attempts},
                               {"successes", st.successes},
                               {"failures", st.attempts - st.successes}};
  }
  j["benign"] = benign;
  nlohmann::json phases = nlohmann::json::array();
  for (const auto& p : s.phases) {
    nlohmann::json e = {{"label", to_string(p.label)}, {"start_ns", p.start.ns()}, {"summary", p.summary}};
    e["end_ns"] = p.end ? nlohmann::json(p.end->ns()) : nlohmann::json(nullptr);
    phases.push_back(std::move(e));
  }
  j["phases"] = phases;
  j["relayed_packets"] = s.loot_records;
  j["flows"] = s.flows;
  j["wall_seconds"] = s.wall_seconds;
  return j;
}

struct RunOptions {
  std::string scenario;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string duration;
  std::string out_pcap;
  std::string out_labels;
  std::string out_flows;
};

ScenarioConfig resolve(const RunOptions& o) {
  ScenarioConfig c;
  if (!o.config.empty()) {
    std::ifstream in(o.config, std::ios::binary);
    if (!in) throw ConfigValidationError("--config", "cannot open " + o.config);
    std::ostringstream ss;
    ss << in.rdbuf();
    c = parse_config(ss.str());
  }
  if (!o.scenario.empty()) {
    auto k = parse_scenario_kind(o.scenario);
    if (!k) throw ConfigValidationError("--scenario", "unknown scenario '" + o.scenario + "'");
    c.kind = *k;
  }
  if (o.seed) c.seed = *o.seed;
  if (!o.duration.empty()) {
    try {
      c.duration = parse_duration(o.duration);
    } catch (const std::exception& e) {
      throw ConfigValidationError("--duration", e.what());
    }
  }
  if (!o.out_pcap.empty()) c.output.pcap = o.out_pcap;
  if (!o.out_labels.empty()) c.output.labels = o.out_labels;
  if (!o.out_flows.empty()) c.output.flows = o.out_flows;
  try {
    build_reference_topology(c.topology);
  } catch (const std::exception& e) {
    throw ConfigValidationError("topology.addresses", e.what());
  }
  apply_defaults(c);
  validate(c);
  return c;
}

int extract_offline(const std::string& pcap, const std::string& labels, const std::string& out) {
  const auto records = read_pcap(pcap);
  const auto rows = read_labels(labels);
  if (records.size() != rows.size()) {
    std::cerr << "error: " << pcap << " has " << records.size() << " records but " << labels << " has "
              << rows.size() << " label rows\n";
    return kExitRuntime;
  }
  std::vector<LabeledFrame> frames;
  frames.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& row = rows[i];
    if (row.frame_index != i || row.timestamp_ns / 1000 != records[i].timestamp().ns() / 1000) {
      std::cerr << "error: label row " << i << " does not match pcap record " << i << '\n';
      return kExitRuntime;
    }
    frames.push_back(LabeledFrame{SimTime(row.timestamp_ns), records[i].bytes, row.label});
  }
  const FlowSet set = extract_flows(frames);
  emit_flow_csv(set.flows, out);
  emit_arp_summary(set, arp_summary_path(out));
  std::cout << set.flows.size() << " flows from " << frames.size() << " frames written to " << out << '\n';
  return kExitOk;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Deterministic packet-level attack scenario simulator"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write pcap, labels and flows");
  run_cmd->add_option("--scenario", run.scenario, "mitm, dos, bf or benign-only");
  run_cmd->add_option("--config", run.config, "JSON scenario config (flags override it)");
  run_cmd->add_option("--seed", run.seed, "Run seed");
  run_cmd->add_option("--duration", run.duration, "Simulated duration, e.g. 3600s or 30m");
  run_cmd->add_option("--out-pcap", run.out_pcap, "Capture output");
  run_cmd->add_option("--out-labels", run.out_labels, "Per-frame label CSV output");
  run_cmd->add_option("--out-flows", run.out_flows, "Flow feature CSV output");

  app.add_subcommand("list-scenarios", "List the built-in scenarios");

  std::string validate_path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario config");
  validate_cmd->add_option("--config", validate_path, "JSON scenario config")->required();

  std::string ex_pcap, ex_labels, ex_out;
  auto* extract_cmd = app.add_subcommand("extract-flows", "Recompute flows from a pcap and its label CSV");
  extract_cmd->add_option("--pcap", ex_pcap)->required();
  extract_cmd->add_option("--labels", ex_labels)->required();
  extract_cmd->add_option("--out", ex_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand("list-scenarios")) {
      for (const auto& s : builtin_scenarios()) std::cout << to_string(s.kind) << "  " << s.description << '\n';
      return kExitOk;
    }
    if (app.got_subcommand(validate_cmd)) {
      const ScenarioConfig c = load_config_file(validate_path);
      std::cout << "ok: " << to_string(c.kind) << ", seed " << c.seed << ", duration " << format_duration(c.duration)
                << ", " << c.lanes.size() << " benign lanes\n";
      return kExitOk;
    }
    if (app.got_subcommand(extract_cmd)) return extract_offline(ex_pcap, ex_labels, ex_out);

    if (run.scenario.empty() && run.config.empty()) {
      std::cerr << "error: run needs --scenario or --config\n";
      return kExitUsage;
    }
    const ScenarioConfig config = resolve(run);
    const RunSummary summary = run_scenario(config);
    std::cout << summary_json(summary).dump(2) << '\n';
    return kExitOk;
  } catch (const ConfigParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigValidationError& e) {
    std::cerr << "error: invalid field " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace rangesim
