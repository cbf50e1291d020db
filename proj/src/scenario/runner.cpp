#include "rangesim/scenario/runner.hpp"

#include <chrono>
#include <set>

namespace rangesim {

ScenarioRunner::ScenarioRunner(ScenarioConfig config) : config_(std::move(config)) {
  apply_defaults(config_);
  validate(config_);
}

ScenarioRunner::~ScenarioRunner() = default;

namespace {

LabelTag first_label(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Mitm: return LabelTag::MitmScan;
    case ScenarioKind::Dos: return LabelTag::DosPshAck;
    case ScenarioKind::Bf: return LabelTag::BfSsh;
    case ScenarioKind::BenignOnly: break;
  }
  return LabelTag::Benign;
}

std::string bf_summary(const BruteForce& bf) {
  return std::to_string(bf.attempts().size()) + " attempts, " + std::to_string(bf.failures()) + " failures, " +
         (bf.succeeded() ? "credentials found" : "no valid credentials");
}

}  // namespace

void ScenarioRunner::build() {
  Topology topo = build_reference_topology(config_.topology);
  for (LanId lan : config_.mirror) enable_span(topo, lan);
  net_ = std::make_unique<Network>(scheduler_, std::move(topo), config_.seed);

  capture_ = std::make_unique<CaptureStore>();
  for (LanId lan : config_.mirror) attach_capture(*net_, lan, *capture_);

  services_ = std::make_unique<ServiceSuite>(*net_, config_.credentials);
  services_->install();

  if (config_.kind != ScenarioKind::BenignOnly) {
    attacker_ = std::make_unique<Attacker>(*net_, net_->topology().attacker, first_label(config_.kind));
  }
  net_->boot();

  for (const auto& lane : config_.lanes) {
    Credentials creds;
    if (auto it = config_.credentials.find(lane.target); it != config_.credentials.end()) creds = it->second;
    agents_.push_back(run_benign_agent(*net_, lane, creds, log_));
  }

  switch (config_.kind) {
    case ScenarioKind::Mitm: schedule_mitm(); break;
    case ScenarioKind::Dos: schedule_dos(); break;
    case ScenarioKind::Bf: schedule_bf(); break;
    case ScenarioKind::BenignOnly: break;
  }
}

std::vector<PoisonPair> ScenarioRunner::victim_pairs() {
  const Topology& topo = net_->topology();
  const Ipv4Address gateway = topo.lan(LanId::User).gateway;
  std::vector<PoisonPair> pairs;
  for (const auto& name : victims_) pairs.push_back(PoisonPair{topo.hosts[topo.host_index(name)].primary().ip, gateway});
  return pairs;
}

void ScenarioRunner::schedule_mitm() {
  const MitmParams& m = config_.mitm;
  victims_ = m.victims;
  Scheduler& s = scheduler_;

  s.schedule(m.scan_start, EventKind::AgentWakeup, [this, &m] {
    const std::size_t phase = attacker_->begin_phase(LabelTag::MitmScan);
    ScanConfig sc;
    sc.subnet = m.scan_subnet;
    sc.ports = m.scan_ports;
    scan_ = std::make_shared<NetworkScan>(*attacker_, sc, [this, phase](const ScanReport& r) {
      std::size_t open = 0;
      for (const auto& h : r.hosts) open += h.open_ports.size();
      attacker_->end_phase(phase, std::to_string(r.hosts.size()) + " hosts up, " + std::to_string(open) +
                                      " open ports");
    });
    scan_->start();
  });

  s.schedule(m.poison_start, EventKind::AgentWakeup, [this, &m] {
    const std::size_t phase = attacker_->begin_phase(LabelTag::MitmArp);
    attacker_->enable_relay(m.relay);
    poison_ = std::make_shared<ArpPoison>(*attacker_, victim_pairs(), m.poison_period,
                                          scan_ ? &scan_->report() : nullptr);
    poison_->start();
    const SimTime end = *m.poison_end;
    scheduler_.schedule(end, EventKind::AgentWakeup, [this, phase] {
      poison_->stop();
      attacker_->end_phase(phase, std::to_string(poison_->rounds()) + " rounds, " +
                                      std::to_string(attacker_->loot().size()) + " packets relayed");
    });
  });

  interception_from_ = m.poison_start + m.poison_period;
  interception_to_ = *m.poison_end;
  watch_interception();
}

void ScenarioRunner::watch_interception() {
  const Topology& topo = net_->topology();
  const std::size_t router = topo.router;
  std::set<std::size_t> victims;
  std::set<std::uint32_t> victim_ips;
  for (const auto& name : victims_) {
    victims.insert(topo.host_index(name));
    victim_ips.insert(topo.hosts[topo.host_index(name)].primary().ip.value);
  }
  const Cidr user = topo.lan(LanId::User).subnet;
  net_->add_delivery_observer([this, router, victims, victim_ips, user](std::size_t host, std::size_t itf,
                                                                        const WireFrame& frame) {
    const SimTime now = net_->now();
    if (now < interception_from_ || now >= interception_to_) return;
    const bool to_router = host == router;
    if (!to_router && !victims.contains(host)) return;
    const Bytes& b = *frame.bytes;
    PacketInfo p;
    if (classify_frame(b, p) != FrameClass::Ipv4) return;
    const Interface& nic = net_->topology().hosts[host].interfaces[itf];
    if (!std::equal(nic.mac.octets.begin(), nic.mac.octets.end(), b.begin())) return;
    bool counted = false;
    if (to_router) {
      counted = nic.lan == LanId::User && victim_ips.contains(p.src.value);
    } else {
      counted = p.dst == nic.ip && !user.contains(p.src);
    }
    if (!counted) return;
    ++interception_.observed;
    if (frame.provenance.relayed) ++interception_.relayed;
  });
}

void ScenarioRunner::schedule_dos() {
  const DosParams& d = config_.dos;
  const DosSchedule sched = dos_schedule(config_);
  const Topology& topo = net_->topology();
  const Ipv4Address target = topo.hosts[topo.host_index(d.target)].primary().ip;
  for (std::size_t h : topo.hosts_with_role(HostRole::UserHost)) victims_.push_back(topo.hosts[h].name);

  FloodConfig fc;
  fc.target = target;
  fc.port = d.port;
  fc.duration = sched.length;
  fc.icmp_fraction = d.icmp_fraction;
  fc.spoof_source = d.spoof_source;

  scheduler_.schedule(sched.starts[0], EventKind::AgentWakeup, [this, fc, rate = d.pshack_rate, len = sched.length] {
    const std::size_t phase = attacker_->begin_phase(LabelTag::DosPshAck);
    FloodConfig c = fc;
    c.rate = rate;
    pshack_ = std::make_shared<Flood>(*attacker_, FloodKind::PshAck, c, RngStream(config_.seed, "attacker/flood/pshack"));
    pshack_->start();
    scheduler_.schedule_in(len, EventKind::AgentWakeup, [this, phase] {
      attacker_->end_phase(phase, std::to_string(pshack_->stats().emitted) + " PSH-ACK segments");
    });
  });

  scheduler_.schedule(sched.starts[1], EventKind::AgentWakeup, [this, fc, rate = d.icmp_igmp_rate, len = sched.length] {
    const std::size_t phase = attacker_->begin_phase(LabelTag::DosIcmpIgmp);
    FloodConfig c = fc;
    c.rate = rate;
    icmp_igmp_ = std::make_shared<Flood>(*attacker_, FloodKind::IcmpIgmp, c,
                                         RngStream(config_.seed, "attacker/flood/icmp-igmp"));
    icmp_igmp_->start();
    scheduler_.schedule_in(len, EventKind::AgentWakeup, [this, phase] {
      const auto& st = icmp_igmp_->stats();
      attacker_->end_phase(phase, std::to_string(st.icmp) + " ICMP, " + std::to_string(st.igmp) + " IGMP");
    });
  });

  scheduler_.schedule(sched.starts[2], EventKind::AgentWakeup, [this, len = sched.length] {
    const std::size_t phase = attacker_->begin_phase(LabelTag::DosTcpKill);
    attacker_->enable_relay(true);
    poison_ = std::make_shared<ArpPoison>(*attacker_, victim_pairs(), config_.mitm.poison_period);
    killer_ = std::make_unique<TcpKiller>(*attacker_);
    killer_->start();
    poison_->start();
    scheduler_.schedule_in(len, EventKind::AgentWakeup, [this, phase] {
      killer_->stop();
      poison_->stop();
      attacker_->end_phase(phase, std::to_string(killer_->kills().size()) + " connections killed");
    });
  });
}

void ScenarioRunner::schedule_bf() {
  const BfParams& b = config_.bf;
  auto words = [&](const std::string& host, const char* key) {
    std::optional<Credentials> correct;
    std::string hint = "admin";
    if (auto it = config_.credentials.find(host); it != config_.credentials.end()) {
      hint = it->second.user;
      if (b.include_correct) correct = it->second;
    }
    return Wordlist::generate(RngStream(config_.seed, std::string("attacker/bf/") + key), b.wordlist_size, correct,
                              hint);
  };
  ssh_words_ = words(b.ssh_target, "ssh");
  ftp_words_ = words(b.ftp_target, "ftp");

  scheduler_.schedule(b.start, EventKind::AgentWakeup, [this] {
    start_bf_phase(LabelTag::BfSsh, BruteForceService::Ssh, config_.bf.ssh_target, ssh_words_);
  });
}

void ScenarioRunner::start_bf_phase(LabelTag label, BruteForceService service, const std::string& target,
                                    const Wordlist& words) {
  const Topology& topo = net_->topology();
  const Ipv4Address ip = topo.hosts[topo.host_index(target)].primary().ip;
  const std::size_t phase = attacker_->begin_phase(label);
  const bool first = label == LabelTag::BfSsh;
  auto bf = std::make_shared<BruteForce>(*attacker_, service, ip, words, config_.bf.attempt_interval, [this, phase, first] {
    const BruteForce& done = first ? *bf_ssh_ : *bf_ftp_;
    attacker_->end_phase(phase, bf_summary(done));
    if (!first) return;
    scheduler_.schedule(*done.finished_at() + config_.bf.sleep, EventKind::AgentWakeup, [this] {
      start_bf_phase(LabelTag::BfFtp, BruteForceService::Ftp, config_.bf.ftp_target, ftp_words_);
    });
  });
  (first ? bf_ssh_ : bf_ftp_) = bf;
  bf->start();
}

RunSummary ScenarioRunner::run() {
  const auto wall_start = std::chrono::steady_clock::now();
  build();
  summary_.events = scheduler_.run_until(config_.duration);

  FlowExtractor extractor(config_.flows);
  capture_->for_each([&](const CaptureRecord& r) { extractor.add(r.timestamp, *r.bytes, r.provenance.label); });
  flows_ = extractor.finish();
  label_flows(flows_.flows);
  write_outputs();

  summary_.kind = config_.kind;
  summary_.seed = config_.seed;
  summary_.duration = config_.duration;
  summary_.capture_records = capture_->size();
  summary_.label_counts = capture_->label_counts();
  for (auto k : {AppKind::Http, AppKind::Ftp, AppKind::Ssh, AppKind::Ntp, AppKind::Ping}) {
    const AppStats st = log_.stats(k);
    if (st.attempts > 0) summary_.benign.emplace_back(k, st);
  }
  if (attacker_) {
    summary_.phases = attacker_->phases();
    summary_.loot_records = attacker_->loot().size();
  }
  summary_.flows = flows_.flows.size();
  summary_.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return summary_;
}

void ScenarioRunner::write_outputs() {
  const OutputPaths& out = config_.output;
  if (out.pcap) write_pcap(*capture_, *out.pcap);
  if (out.labels) write_labels(*capture_, net_->agents(), *out.labels);
  if (out.flows) {
    emit_flow_csv(flows_.flows, *out.flows);
    emit_arp_summary(flows_, arp_summary_path(*out.flows));
  }
}

RunSummary run_scenario(const ScenarioConfig& config) {
  ScenarioRunner runner(config);
  return runner.run();
}

}  // namespace rangesim
