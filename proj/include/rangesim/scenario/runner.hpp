#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rangesim/apps/app_log.hpp"
#include "rangesim/apps/benign_agent.hpp"
#include "rangesim/attacks/operations.hpp"
#include "rangesim/capture/capture.hpp"
#include "rangesim/flows/flows.hpp"
#include "rangesim/scenario/config.hpp"

namespace rangesim {

struct InterceptionStats {
  /// Victim<->router IP packets delivered while poisoning was established.
  std::uint64_t observed = 0;
  std::uint64_t relayed = 0;
};

struct RunSummary {
  ScenarioKind kind = ScenarioKind::BenignOnly;
  std::uint64_t seed = 0;
  SimTime duration;
  std::uint64_t events = 0;
  std::uint64_t capture_records = 0;
  std::array<std::uint64_t, kLabelCount> label_counts{};
  std::vector<std::pair<AppKind, AppStats>> benign;
  std::vector<PhaseRecord> phases;
  std::uint64_t loot_records = 0;
  std::uint64_t flows = 0;
  double wall_seconds = 0.0;
};

/// Owns one scenario execution: engine, network, services, agents,
/// attacker and capture. Accessors stay valid after run().
class ScenarioRunner {
 public:
  explicit ScenarioRunner(ScenarioConfig config);
  ~ScenarioRunner();

  /// Builds everything, runs the engine to the configured duration and
  /// writes any configured outputs.
  RunSummary run();

  const ScenarioConfig& config() const { return config_; }
  Scheduler& scheduler() { return scheduler_; }
  Network& network() { return *net_; }
  const AppLog& app_log() const { return log_; }
  const CaptureStore& capture() const { return *capture_; }
  const Attacker* attacker() const { return attacker_.get(); }
  const ServiceSuite& services() const { return *services_; }
  const FlowSet& flows() const { return flows_; }
  const RunSummary& summary() const { return summary_; }
  const InterceptionStats& interception() const { return interception_; }

  std::shared_ptr<const NetworkScan> scan() const { return scan_; }
  std::shared_ptr<const ArpPoison> poison() const { return poison_; }
  std::shared_ptr<const Flood> pshack_flood() const { return pshack_; }
  std::shared_ptr<const Flood> icmp_igmp_flood() const { return icmp_igmp_; }
  const TcpKiller* killer() const { return killer_.get(); }
  std::shared_ptr<const BruteForce> bf_ssh() const { return bf_ssh_; }
  std::shared_ptr<const BruteForce> bf_ftp() const { return bf_ftp_; }
  const Wordlist& ssh_wordlist() const { return ssh_words_; }
  const Wordlist& ftp_wordlist() const { return ftp_words_; }
  /// Names of the hosts poisoned in the current scenario.
  const std::vector<std::string>& victims() const { return victims_; }

 private:
  void build();
  void schedule_mitm();
  void schedule_dos();
  void schedule_bf();
  void start_bf_phase(LabelTag label, BruteForceService service, const std::string& target, const Wordlist& words);
  void watch_interception();
  std::vector<PoisonPair> victim_pairs();
  void write_outputs();

  ScenarioConfig config_;
  Scheduler scheduler_;
  std::unique_ptr<Network> net_;
  std::unique_ptr<ServiceSuite> services_;
  std::unique_ptr<CaptureStore> capture_;
  AppLog log_;
  std::vector<std::unique_ptr<BenignAgent>> agents_;
  std::unique_ptr<Attacker> attacker_;
  std::shared_ptr<NetworkScan> scan_;
  std::shared_ptr<ArpPoison> poison_;
  std::shared_ptr<Flood> pshack_;
  std::shared_ptr<Flood> icmp_igmp_;
  std::unique_ptr<TcpKiller> killer_;
  std::shared_ptr<BruteForce> bf_ssh_;
  std::shared_ptr<BruteForce> bf_ftp_;
  Wordlist ssh_words_;
  Wordlist ftp_words_;
  std::vector<std::string> victims_;
  InterceptionStats interception_;
  SimTime interception_from_ = SimTime::max();
  SimTime interception_to_ = SimTime::max();
  FlowSet flows_;
  RunSummary summary_;
};

RunSummary run_scenario(const ScenarioConfig& config);

/// Command-line entry point; returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace rangesim
