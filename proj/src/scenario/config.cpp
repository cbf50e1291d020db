#include "rangesim/scenario/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rangesim/attacks/operations.hpp"

namespace rangesim {

using nlohmann::json;

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Mitm: return "mitm";
    case ScenarioKind::Dos: return "dos";
    case ScenarioKind::Bf: return "bf";
    case ScenarioKind::BenignOnly: return "benign-only";
  }
  return "?";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) {
  for (auto k : {ScenarioKind::Mitm, ScenarioKind::Dos, ScenarioKind::Bf, ScenarioKind::BenignOnly}) {
    if (text == to_string(k)) return k;
  }
  return std::nullopt;
}

const std::vector<ScenarioInfo>& builtin_scenarios() {
  static const std::vector<ScenarioInfo> list = {
      {ScenarioKind::Mitm, "network scan, then ARP poisoning with relay; benign HTTP and NTP"},
      {ScenarioKind::Dos, "PSH-ACK flood, ICMP/IGMP flood, TCP connection killer; benign HTTP, ping, SSH"},
      {ScenarioKind::Bf, "SSH brute force, 30 min sleep, FTP brute force; benign HTTP, ping, SSH"},
      {ScenarioKind::BenignOnly, "benign lanes only, no attacker"},
  };
  return list;
}

std::string closest_match(std::string_view word, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = SIZE_MAX;
  for (const auto& c : candidates) {
    std::vector<std::size_t> row(c.size() + 1);
    for (std::size_t j = 0; j <= c.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= word.size(); ++i) {
      std::size_t diag = row[0];
      row[0] = i;
      for (std::size_t j = 1; j <= c.size(); ++j) {
        const std::size_t up = row[j];
        row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (word[i - 1] == c[j - 1] ? 0 : 1)});
        diag = up;
      }
    }
    if (row[c.size()] < best_d) {
      best_d = row[c.size()];
      best = c;
    }
  }
  return best;
}

std::vector<BenignAgentConfig> default_lanes(ScenarioKind kind, const Topology& topo) {
  std::vector<std::string> users;
  for (std::size_t h : topo.hosts_with_role(HostRole::UserHost)) users.push_back(topo.hosts[h].name);

  std::vector<BenignAgentConfig> lanes;
  auto add = [&](BenignKind k, const std::string& host, const std::string& target) {
    lanes.push_back(BenignAgentConfig{k, host, target, default_mean_interval(k), SimTime(), SimTime::max()});
  };
  const bool mitm_mix = kind == ScenarioKind::Mitm || kind == ScenarioKind::BenignOnly;
  const bool dos_mix = kind != ScenarioKind::Mitm;
  for (std::size_t i = 0; i < users.size(); ++i) {
    add(BenignKind::HttpBrowser, users[i], "web-server");
    if (mitm_mix) add(BenignKind::NtpClient, users[i], "web-server");
    if (dos_mix) {
      add(BenignKind::Ping, users[i], "web-server");
      add(BenignKind::SshClient, users[i], i % 2 == 0 ? "admin-ubuntu" : "admin-win");
    }
    if (kind == ScenarioKind::BenignOnly) add(BenignKind::FtpClient, users[i], "ftp-server");
  }
  return lanes;
}

void apply_defaults(ScenarioConfig& c) {
  if (c.lanes.empty()) c.lanes = default_lanes(c.kind, build_reference_topology(c.topology));
  if (c.mirror.empty()) c.mirror = {LanId::Service};
  if (c.mitm.scan_ports.empty()) c.mitm.scan_ports = default_scan_ports();
  if (!c.mitm.poison_end) c.mitm.poison_end = c.duration - Seconds(10);
  if (c.mitm.victims.empty()) {
    const Topology topo = build_reference_topology(c.topology);
    for (std::size_t h : topo.hosts_with_role(HostRole::UserHost)) c.mitm.victims.push_back(topo.hosts[h].name);
  }
  if (!c.dos.phase_length) c.dos.phase_length = std::min(Seconds(300), SimTime(c.duration.ns() / 6));
}

DosSchedule dos_schedule(const ScenarioConfig& c) {
  DosSchedule s;
  s.length = c.dos.phase_length.value_or(std::min(Seconds(300), SimTime(c.duration.ns() / 6)));
  if (c.dos.parallel) {
    const SimTime gap = SimTime((c.duration - s.length).ns() / 2);
    s.starts = {gap, gap, gap};
    return s;
  }
  const SimTime gap = SimTime((c.duration - s.length * 3).ns() / 4);
  for (std::uint64_t i = 0; i < 3; ++i) s.starts[i] = gap * (i + 1) + s.length * i;
  return s;
}

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) { throw ConfigValidationError(field, what); }

bool offers(const Topology& topo, const std::string& host, std::uint16_t port, Transport t) {
  auto h = topo.find_host(host);
  return h && topo.hosts[*h].offers(port, t);
}

void require_host(const Topology& topo, const std::string& field, const std::string& name) {
  if (!topo.find_host(name)) fail(field, "unknown host '" + name + "'");
}

}  // namespace

void validate(const ScenarioConfig& c) {
  if (c.duration.ns() == 0) fail("duration", "must be > 0");
  Topology topo;
  try {
    topo = build_reference_topology(c.topology);
  } catch (const std::exception& e) {
    fail("topology.addresses", e.what());
  }

  for (const auto& [host, creds] : c.credentials) {
    require_host(topo, "credentials." + host, host);
    if (creds.user.empty()) fail("credentials." + host + ".user", "must not be empty");
  }

  for (std::size_t i = 0; i < c.lanes.size(); ++i) {
    const auto& l = c.lanes[i];
    const std::string f = "benign[" + std::to_string(i) + "]";
    require_host(topo, f + ".host", l.host);
    require_host(topo, f + ".target", l.target);
    const auto role = topo.hosts[topo.host_index(l.host)].role;
    if (role == HostRole::Attacker || role == HostRole::Monitor || role == HostRole::Router) {
      fail(f + ".host", "'" + l.host + "' cannot run a benign lane");
    }
    if (l.mean_interval.ns() == 0) fail(f + ".mean_interval", "must be > 0");
    if (l.start >= l.stop) fail(f + ".stop", "must be after start");
    if (l.start >= c.duration) fail(f + ".start", "lies past the run duration");
    bool ok = true;
    switch (l.kind) {
      case BenignKind::HttpBrowser: ok = offers(topo, l.target, 80, Transport::Tcp); break;
      case BenignKind::FtpClient: ok = offers(topo, l.target, 21, Transport::Tcp); break;
      case BenignKind::SshClient: ok = offers(topo, l.target, 22, Transport::Tcp); break;
      case BenignKind::NtpClient: ok = offers(topo, l.target, 123, Transport::Udp); break;
      case BenignKind::Ping: break;
    }
    if (!ok) fail(f + ".target", "'" + l.target + "' does not offer " + to_string(l.kind));
  }

  if (c.mirror.empty()) fail("capture.mirror", "must list at least one LAN");
  if (c.flows.idle_timeout.ns() == 0) fail("flows.idle_timeout", "must be > 0");
  if (c.flows.active_timeout.ns() == 0) fail("flows.active_timeout", "must be > 0");

  switch (c.kind) {
    case ScenarioKind::Mitm: {
      const auto& m = c.mitm;
      if (m.scan_start + m.scan_window > c.duration) fail("attacks.scan.window", "scan extends past duration");
      if (m.poison_period.ns() == 0) fail("attacks.arp_poison.period", "must be > 0");
      const SimTime end = m.poison_end.value_or(c.duration - Seconds(10));
      if (end > c.duration) fail("attacks.arp_poison.end", "poisoning extends past duration");
      if (m.poison_start >= end) fail("attacks.arp_poison.start", "must be before end");
      for (std::size_t i = 0; i < m.victims.size(); ++i) {
        const std::string f = "attacks.arp_poison.victims[" + std::to_string(i) + "]";
        require_host(topo, f, m.victims[i]);
        const auto& spec = topo.hosts[topo.host_index(m.victims[i])];
        if (spec.role == HostRole::Attacker || spec.primary().lan != LanId::User) {
          fail(f, "'" + m.victims[i] + "' is not a User-LAN victim");
        }
      }
      if (!topo.lan(LanId::Service).subnet.contains(m.scan_subnet.network) &&
          !topo.lan(LanId::User).subnet.contains(m.scan_subnet.network) &&
          !topo.lan(LanId::Soc).subnet.contains(m.scan_subnet.network)) {
        fail("attacks.scan.subnet", "not a LAN of the topology");
      }
      break;
    }
    case ScenarioKind::Dos: {
      const auto& d = c.dos;
      require_host(topo, "attacks.dos.target", d.target);
      if (d.pshack_rate <= 0) fail("attacks.dos.pshack_rate", "must be > 0");
      if (d.icmp_igmp_rate <= 0) fail("attacks.dos.icmp_igmp_rate", "must be > 0");
      if (d.icmp_fraction < 0 || d.icmp_fraction > 1) fail("attacks.dos.icmp_fraction", "must be within [0, 1]");
      const SimTime len = d.phase_length.value_or(std::min(Seconds(300), SimTime(c.duration.ns() / 6)));
      if (len.ns() == 0) fail("attacks.dos.phase_length", "must be > 0");
      if ((d.parallel ? len : len * 3) > c.duration) fail("attacks.dos.phase_length", "phases extend past duration");
      break;
    }
    case ScenarioKind::Bf: {
      const auto& b = c.bf;
      if (!offers(topo, b.ssh_target, 22, Transport::Tcp)) fail("attacks.bf.ssh_target", "not an SSH host");
      if (!offers(topo, b.ftp_target, 21, Transport::Tcp)) fail("attacks.bf.ftp_target", "not an FTP host");
      if (b.wordlist_size == 0) fail("attacks.bf.wordlist_size", "must be > 0");
      if (b.attempt_interval.ns() == 0) fail("attacks.bf.attempt_interval", "must be > 0");
      const SimTime one = b.attempt_interval * (b.wordlist_size - 1);
      if (b.start + one + b.sleep + one >= c.duration) fail("attacks.bf.sleep", "phases extend past duration");
      for (const auto* host : {&b.ssh_target, &b.ftp_target}) {
        if (b.include_correct && !c.credentials.contains(*host)) {
          fail("credentials", "no credentials for brute-force target '" + *host + "'");
        }
      }
      break;
    }
    case ScenarioKind::BenignOnly: break;
  }
}

// ---------------------------------------------------------------- JSON

namespace {

void check_keys(const json& obj, const std::string& path, const std::vector<std::string>& allowed) {
  if (!obj.is_object()) fail(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) != allowed.end()) continue;
    const std::string field = path.empty() ? key : path + "." + key;
    const std::string hint = closest_match(key, allowed);
    fail(field, "unknown key" + (hint.empty() ? std::string() : "; did you mean '" + hint + "'?"));
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string get_string(const json& v, const std::string& field) {
  if (!v.is_string()) fail(field, "expected a string");
  return v.get<std::string>();
}

SimTime get_duration(const json& v, const std::string& field) {
  if (!v.is_string()) fail(field, "expected a duration string such as \"30s\"");
  try {
    return parse_duration(v.get<std::string>());
  } catch (const std::exception& e) {
    fail(field, e.what());
  }
}

std::uint64_t get_uint(const json& v, const std::string& field, std::uint64_t max = UINT64_MAX) {
  if (!v.is_number_unsigned()) fail(field, "expected a non-negative integer");
  const auto x = v.get<std::uint64_t>();
  if (x > max) fail(field, "must be <= " + std::to_string(max));
  return x;
}

double get_double(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  return v.get<double>();
}

bool get_bool(const json& v, const std::string& field) {
  if (!v.is_boolean()) fail(field, "expected true or false");
  return v.get<bool>();
}

template <class Fn>
void each(const json& obj, const std::string& path, Fn&& fn) {
  for (const auto& [key, value] : obj.items()) fn(key, value, join(path, key));
}

void parse_topology(const json& j, ScenarioConfig& c) {
  check_keys(j, "topology", {"link_latency", "server_ingress_pps", "server_ingress_queue", "addresses"});
  each(j, "topology", [&](const std::string& k, const json& v, const std::string& f) {
    if (k == "link_latency") c.topology.link_latency = get_duration(v, f);
    if (k == "server_ingress_pps") c.topology.server_ingress_pps = static_cast<std::uint32_t>(get_uint(v, f, UINT32_MAX));
    if (k == "server_ingress_queue") {
      c.topology.server_ingress_queue = static_cast<std::uint32_t>(get_uint(v, f, UINT32_MAX));
    }
    if (k == "addresses") {
      if (!v.is_object()) fail(f, "expected an object of host -> address");
      for (const auto& [host, addr] : v.items()) {
        try {
          c.topology.address_overrides[host] = Ipv4Address::parse(get_string(addr, f + "." + host));
        } catch (const ConfigValidationError&) {
          throw;
        } catch (const std::exception& e) {
          fail(f + "." + host, e.what());
        }
      }
    }
  });
}

void parse_credentials(const json& j, ScenarioConfig& c) {
  if (!j.is_object()) fail("credentials", "expected an object of host -> {user, password}");
  for (const auto& [host, v] : j.items()) {
    const std::string f = "credentials." + host;
    check_keys(v, f, {"user", "password"});
    Credentials creds;
    if (!v.contains("user") || !v.contains("password")) fail(f, "needs both user and password");
    creds.user = get_string(v["user"], f + ".user");
    creds.password = get_string(v["password"], f + ".password");
    c.credentials[host] = std::move(creds);
  }
}

void parse_lanes(const json& j, ScenarioConfig& c) {
  if (!j.is_array()) fail("benign", "expected an array of lanes");
  c.lanes.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string path = "benign[" + std::to_string(i) + "]";
    const json& l = j[i];
    check_keys(l, path, {"kind", "host", "target", "mean_interval", "start", "stop"});
    for (const char* req : {"kind", "host", "target"}) {
      if (!l.contains(req)) fail(join(path, req), "required");
    }
    BenignAgentConfig lane;
    const std::string kind = get_string(l["kind"], path + ".kind");
    auto k = parse_benign_kind(kind);
    if (!k) fail(path + ".kind", "unknown kind '" + kind + "'; expected http, ftp, ssh, ntp or ping");
    lane.kind = *k;
    lane.host = get_string(l["host"], path + ".host");
    lane.target = get_string(l["target"], path + ".target");
    lane.mean_interval = l.contains("mean_interval") ? get_duration(l["mean_interval"], path + ".mean_interval")
                                                     : default_mean_interval(lane.kind);
    if (l.contains("start")) lane.start = get_duration(l["start"], path + ".start");
    if (l.contains("stop")) lane.stop = get_duration(l["stop"], path + ".stop");
    c.lanes.push_back(std::move(lane));
  }
  if (c.lanes.empty()) fail("benign", "must list at least one lane");
}

void parse_scan(const json& j, MitmParams& m) {
  const std::string p = "attacks.scan";
  check_keys(j, p, {"subnet", "ports", "start", "window"});
  each(j, p, [&](const std::string& k, const json& v, const std::string& f) {
    if (k == "subnet") {
      try {
        m.scan_subnet = Cidr::parse(get_string(v, f));
      } catch (const ConfigValidationError&) {
        throw;
      } catch (const std::exception& e) {
        fail(f, e.what());
      }
    }
    if (k == "ports") {
      if (!v.is_array() || v.empty()) fail(f, "expected a non-empty array of ports");
      m.scan_ports.clear();
      for (std::size_t i = 0; i < v.size(); ++i) {
        const auto port = get_uint(v[i], f + "[" + std::to_string(i) + "]", 65535);
        if (port == 0) fail(f + "[" + std::to_string(i) + "]", "port 0 is not scannable");
        m.scan_ports.push_back(static_cast<std::uint16_t>(port));
      }
    }
    if (k == "start") m.scan_start = get_duration(v, f);
    if (k == "window") m.scan_window = get_duration(v, f);
  });
}

void parse_poison(const json& j, MitmParams& m) {
  const std::string p = "attacks.arp_poison";
  check_keys(j, p, {"start", "end", "period", "victims", "relay"});
  each(j, p, [&](const std::string& k, const json& v, const std::string& f) {
    if (k == "start") m.poison_start = get_duration(v, f);
    if (k == "end") m.poison_end = get_duration(v, f);
    if (k == "period") m.poison_period = get_duration(v, f);
    if (k == "relay") m.relay = get_bool(v, f);
    if (k == "victims") {
      if (!v.is_array() || v.empty()) fail(f, "expected a non-empty array of host names");
      m.victims.clear();
      for (std::size_t i = 0; i < v.size(); ++i) m.victims.push_back(get_string(v[i], f + "[" + std::to_string(i) + "]"));
    }
  });
}

void parse_dos(const json& j, DosParams& d) {
  const std::string p = "attacks.dos";
  check_keys(j, p,
             {"target", "port", "pshack_rate", "icmp_igmp_rate", "icmp_fraction", "phase_length", "parallel",
              "spoof_source"});
  each(j, p, [&](const std::string& k, const json& v, const std::string& f) {
    if (k == "target") d.target = get_string(v, f);
    if (k == "port") d.port = static_cast<std::uint16_t>(get_uint(v, f, 65535));
    if (k == "pshack_rate") d.pshack_rate = get_double(v, f);
    if (k == "icmp_igmp_rate") d.icmp_igmp_rate = get_double(v, f);
    if (k == "icmp_fraction") d.icmp_fraction = get_double(v, f);
    if (k == "phase_length") d.phase_length = get_duration(v, f);
    if (k == "parallel") d.parallel = get_bool(v, f);
    if (k == "spoof_source") d.spoof_source = get_bool(v, f);
  });
}

void parse_bf(const json& j, BfParams& b) {
  const std::string p = "attacks.bf";
  check_keys(j, p,
             {"ssh_target", "ftp_target", "start", "sleep", "attempt_interval", "wordlist_size", "include_correct"});
  each(j, p, [&](const std::string& k, const json& v, const std::string& f) {
    if (k == "ssh_target") b.ssh_target = get_string(v, f);
    if (k == "ftp_target") b.ftp_target = get_string(v, f);
    if (k == "start") b.start = get_duration(v, f);
    if (k == "sleep") b.sleep = get_duration(v, f);
    if (k == "attempt_interval") b.attempt_interval = get_duration(v, f);
    if (k == "wordlist_size") b.wordlist_size = get_uint(v, f, 1'000'000);
    if (k == "include_correct") b.include_correct = get_bool(v, f);
  });
}

void parse_attacks(const json& j, ScenarioConfig& c) {
  check_keys(j, "attacks", {"scan", "arp_poison", "dos", "bf"});
  auto owner = [](const std::string& key) {
    if (key == "scan" || key == "arp_poison") return ScenarioKind::Mitm;
    if (key == "dos") return ScenarioKind::Dos;
    return ScenarioKind::Bf;
  };
  for (const auto& [key, value] : j.items()) {
    if (owner(key) != c.kind) {
      fail("attacks." + key, std::string("not used by scenario ") + to_string(c.kind));
    }
    if (key == "scan") parse_scan(value, c.mitm);
    if (key == "arp_poison") parse_poison(value, c.mitm);
    if (key == "dos") parse_dos(value, c.dos);
    if (key == "bf") parse_bf(value, c.bf);
  }
}

void parse_capture(const json& j, ScenarioConfig& c) {
  check_keys(j, "capture", {"mirror"});
  if (!j.contains("mirror")) return;
  const json& m = j["mirror"];
  if (!m.is_array() || m.empty()) fail("capture.mirror", "expected a non-empty array of LAN names");
  c.mirror.clear();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::string f = "capture.mirror[" + std::to_string(i) + "]";
    const std::string name = get_string(m[i], f);
    auto lan = parse_lan(name);
    if (!lan) fail(f, "unknown LAN '" + name + "'; expected service, user or soc");
    if (std::find(c.mirror.begin(), c.mirror.end(), *lan) == c.mirror.end()) c.mirror.push_back(*lan);
  }
}

void parse_flows(const json& j, ScenarioConfig& c) {
  check_keys(j, "flows", {"idle_timeout", "active_timeout"});
  each(j, "flows", [&](const std::string& k, const json& v, const std::string& f) {
    if (k == "idle_timeout") c.flows.idle_timeout = get_duration(v, f);
    if (k == "active_timeout") c.flows.active_timeout = get_duration(v, f);
  });
}

void parse_output(const json& j, ScenarioConfig& c) {
  check_keys(j, "output", {"pcap", "labels", "flows"});
  each(j, "output", [&](const std::string& k, const json& v, const std::string& f) {
    const std::filesystem::path path = get_string(v, f);
    if (k == "pcap") c.output.pcap = path;
    if (k == "labels") c.output.labels = path;
    if (k == "flows") c.output.flows = path;
  });
}

std::pair<std::size_t, std::size_t> line_column(std::string_view doc, std::size_t byte) {
  std::size_t line = 1, column = 1;
  const std::size_t end = std::min(byte, doc.size());
  for (std::size_t i = 0; i + 1 < end; ++i) {
    if (doc[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

ScenarioConfig parse_config(std::string_view document) {
  json j;
  try {
    j = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(document, e.byte);
    throw ConfigParseError("parse error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                               ": " + e.what(),
                           line, column);
  }
  check_keys(j, "",
             {"scenario", "seed", "duration", "topology", "credentials", "benign", "attacks", "capture", "flows",
              "output"});
  if (!j.contains("scenario")) fail("scenario", "required");

  ScenarioConfig c;
  const std::string kind = get_string(j["scenario"], "scenario");
  auto k = parse_scenario_kind(kind);
  if (!k) fail("scenario", "unknown scenario '" + kind + "'; expected mitm, dos, bf or benign-only");
  c.kind = *k;
  if (j.contains("seed")) c.seed = get_uint(j["seed"], "seed");
  if (j.contains("duration")) c.duration = get_duration(j["duration"], "duration");
  if (j.contains("topology")) parse_topology(j["topology"], c);
  if (j.contains("credentials")) parse_credentials(j["credentials"], c);
  if (j.contains("benign")) parse_lanes(j["benign"], c);
  if (j.contains("attacks")) {
    if (c.kind == ScenarioKind::BenignOnly && !j["attacks"].empty()) {
      fail("attacks", "benign-only runs take no attacks");
    }
    parse_attacks(j["attacks"], c);
  }
  if (j.contains("capture")) parse_capture(j["capture"], c);
  if (j.contains("flows")) parse_flows(j["flows"], c);
  if (j.contains("output")) parse_output(j["output"], c);

  return c;
}

ScenarioConfig load_config(std::string_view document) {
  ScenarioConfig c = parse_config(document);
  try {
    build_reference_topology(c.topology);
  } catch (const std::exception& e) {
    fail("topology.addresses", e.what());
  }
  apply_defaults(c);
  validate(c);
  return c;
}

ScenarioConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_config(ss.str());
}

}  // namespace rangesim
