#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include "rangesim/capture/capture.hpp"
#include "rangesim/scenario/runner.hpp"
#include "support/testbed.hpp"

using namespace rangesim;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("rangesim_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& f) const { return path / f; }
};

Bytes slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

std::uint32_t le32(const Bytes& b, std::size_t at) {
  return std::uint32_t{b[at]} | std::uint32_t{b[at + 1]} << 8 | std::uint32_t{b[at + 2]} << 16 |
         std::uint32_t{b[at + 3]} << 24;
}
std::uint16_t le16(const Bytes& b, std::size_t at) { return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8); }

WireFrame numbered_frame(std::size_t n, std::size_t size, LabelTag label = LabelTag::Benign) {
  Bytes b(size);
  for (std::size_t i = 0; i < size; ++i) b[i] = static_cast<std::uint8_t>(n * 31 + i);
  return make_wire_frame(std::move(b), Provenance{AgentId{static_cast<std::uint32_t>(n % 3)}, label, n % 2 == 0});
}

ScenarioConfig short_config(ScenarioKind kind, SimTime duration, std::uint64_t seed = 3) {
  ScenarioConfig c;
  c.kind = kind;
  c.seed = seed;
  c.duration = duration;
  return c;
}

bool is_attacker(const std::string& agent) { return agent == "kali-attacker" || agent == "kali-attacker:relay"; }

}  // namespace

TEST_CASE("empty capture writes a bare global header") {
  TempDir dir("cap_empty");
  CaptureStore store;
  write_pcap(store, dir / "e.pcap");
  const Bytes b = slurp(dir / "e.pcap");
  REQUIRE(b.size() == 24);
  CHECK(b[0] == 0xd4);
  CHECK(b[1] == 0xc3);
  CHECK(b[2] == 0xb2);
  CHECK(b[3] == 0xa1);
  CHECK(le16(b, 4) == 2);
  CHECK(le16(b, 6) == 4);
  CHECK(le32(b, 8) == 0);
  CHECK(le32(b, 12) == 0);
  CHECK(le32(b, 16) == 65535);
  CHECK(le32(b, 20) == 1);
  CHECK(read_pcap(dir / "e.pcap").empty());
}

TEST_CASE("one 60-byte frame gives a 100-byte file with split timestamp") {
  TempDir dir("cap_one");
  CaptureStore store;
  store.append(SimTime(1'500'000'700), numbered_frame(1, 60));
  write_pcap(store, dir / "one.pcap");
  const Bytes b = slurp(dir / "one.pcap");
  REQUIRE(b.size() == 100);
  CHECK(le32(b, 24) == 1);
  CHECK(le32(b, 28) == 500000);
  CHECK(le32(b, 32) == 60);
  CHECK(le32(b, 36) == 60);
  CHECK(std::equal(b.begin() + 40, b.end(), numbered_frame(1, 60).bytes->begin()));
}

TEST_CASE("pcap read then rewrite is byte identical") {
  TempDir dir("cap_rt");
  CaptureStore store;
  for (std::size_t i = 0; i < 200; ++i) store.append(SimTime(i * 1'234'567), numbered_frame(i, 60 + i * 7 % 1400));
  write_pcap(store, dir / "a.pcap");
  const auto records = read_pcap(dir / "a.pcap");
  REQUIRE(records.size() == 200);
  write_pcap(records, dir / "b.pcap");
  CHECK(slurp(dir / "a.pcap") == slurp(dir / "b.pcap"));
  CHECK(records[3].timestamp() == SimTime(3'703'000));
}

TEST_CASE("malformed and unwritable paths raise IoFailure") {
  TempDir dir("cap_io");
  CaptureStore store;
  CHECK_THROWS_AS(write_pcap(store, dir / "missing" / "x.pcap"), IoFailure);
  CHECK_THROWS_AS(read_pcap(dir / "absent.pcap"), IoFailure);
  {
    std::ofstream out(dir / "short.pcap", std::ios::binary);
    out << "abc";
  }
  CHECK_THROWS_AS(read_pcap(dir / "short.pcap"), IoFailure);
  store.append(SimTime(1), numbered_frame(0, 60));
  write_pcap(store, dir / "t.pcap");
  Bytes b = slurp(dir / "t.pcap");
  b.resize(b.size() - 5);
  {
    std::ofstream out(dir / "t.pcap", std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
  }
  CHECK_THROWS_AS(read_pcap(dir / "t.pcap"), IoFailure);
}

TEST_CASE("spilled records stream back in order") {
  CaptureStore store(CaptureLimits{50, std::size_t{1} << 20});
  std::vector<WireFrame> sent;
  for (std::size_t i = 0; i < 1000; ++i) {
    sent.push_back(numbered_frame(i, 60 + i % 300, static_cast<LabelTag>(i % kLabelCount)));
    store.append(SimTime(i * 1000), sent.back());
  }
  CHECK(store.size() == 1000);
  CHECK(store.spilled());
  CHECK(store.spilled_records() >= 950);
  std::size_t n = 0;
  store.for_each([&](const CaptureRecord& r) {
    CHECK(r.index == n);
    CHECK(r.timestamp == SimTime(n * 1000));
    CHECK(*r.bytes == *sent[n].bytes);
    CHECK(r.provenance.agent == sent[n].provenance.agent);
    CHECK(r.provenance.label == sent[n].provenance.label);
    CHECK(r.provenance.relayed == sent[n].provenance.relayed);
    ++n;
  });
  CHECK(n == 1000);
  for (int l = 0; l < kLabelCount; ++l) CHECK(store.label_counts()[static_cast<std::size_t>(l)] == 125);
}

TEST_CASE("label sidecar has one row per record") {
  TempDir dir("cap_labels");
  AgentRegistry agents;
  agents.intern("a");
  agents.intern("b");
  agents.intern("c");
  CaptureStore store;
  for (std::size_t i = 0; i < 40; ++i) store.append(SimTime(i * 10), numbered_frame(i, 64, static_cast<LabelTag>(i % kLabelCount)));
  write_labels(store, agents, dir / "l.csv");
  std::ifstream in(dir / "l.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "frame_index,timestamp_ns,agent_id,label");
  const auto rows = read_labels(dir / "l.csv");
  REQUIRE(rows.size() == 40);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].frame_index == i);
    CHECK(rows[i].timestamp_ns == i * 10);
    CHECK(rows[i].agent == std::string(1, static_cast<char>('a' + i % 3)));
    CHECK(rows[i].label == static_cast<LabelTag>(i % kLabelCount));
  }
}

TEST_CASE("capture without traffic is empty") {
  Scheduler s;
  Topology topo = build_reference_topology({});
  enable_span(topo, LanId::Service);
  Network net(s, std::move(topo), 1);
  CaptureStore store;
  attach_capture(net, LanId::Service, store);
  s.run_until(Seconds(10));
  CHECK(store.size() == 0);
}

TEST_CASE("attaching to a LAN without SPAN fails") {
  Scheduler s;
  Topology topo = build_reference_topology({});
  enable_span(topo, LanId::Service);
  Network net(s, std::move(topo), 1);
  CaptureStore store;
  CHECK_THROWS_AS(attach_capture(net, LanId::User, store), NoSpanPort);
  CHECK_NOTHROW(attach_capture(net, LanId::Service, store));
}

TEST_CASE("capture sees every frame the Service switch mirrors") {
  test::Testbed bed;
  CaptureStore store;
  attach_capture(*bed.net, LanId::Service, store);
  bed.lane(BenignKind::HttpBrowser, "user-1", "web-server", Seconds(5));
  bed.lane(BenignKind::FtpClient, "user-2", "ftp-server", Seconds(20));
  bed.run(Seconds(120));
  CHECK(store.size() == bed.span_frames.size());
  std::size_t n = 0;
  SimTime last;
  store.for_each([&](const CaptureRecord& r) {
    CHECK(r.bytes == bed.span_frames[n].bytes);
    CHECK(r.timestamp >= last);
    CHECK(r.provenance.label == LabelTag::Benign);
    last = r.timestamp;
    ++n;
  });
}

TEST_CASE("benign-only scenario labels everything BENIGN") {
  TempDir dir("cap_benign");
  ScenarioConfig c = short_config(ScenarioKind::BenignOnly, Seconds(120));
  c.output.pcap = dir / "b.pcap";
  c.output.labels = dir / "b.csv";
  ScenarioRunner runner(c);
  const RunSummary sum = runner.run();
  const auto rows = read_labels(dir / "b.csv");
  CHECK(rows.size() == sum.capture_records);
  CHECK(read_pcap(dir / "b.pcap").size() == rows.size());
  for (const auto& r : rows) CHECK(r.label == LabelTag::Benign);
}

TEST_CASE("relayed MitM traffic is captured and labelled") {
  ScenarioConfig c = short_config(ScenarioKind::Mitm, Seconds(120));
  c.mirror = {LanId::Service, LanId::User};
  ScenarioRunner runner(c);
  const RunSummary sum = runner.run();
  REQUIRE(sum.loot_records > 0);
  std::uint64_t relayed = 0;
  const AgentRegistry& agents = runner.network().agents();
  std::set<LabelTag> labels;
  runner.capture().for_each([&](const CaptureRecord& r) {
    const std::string& agent = agents.name(r.provenance.agent);
    labels.insert(r.provenance.label);
    CHECK((r.provenance.label != LabelTag::Benign) == is_attacker(agent));
    if (r.provenance.relayed) {
      ++relayed;
      CHECK(r.provenance.label == LabelTag::MitmArp);
      CHECK(agent == "kali-attacker:relay");
    }
  });
  CHECK(relayed >= sum.loot_records);
  for (LabelTag l : labels) CHECK((l == LabelTag::Benign || l == LabelTag::MitmScan || l == LabelTag::MitmArp));
  CHECK(labels.count(LabelTag::MitmArp) == 1);
}

TEST_CASE("DoS labelled frames match their phase signature") {
  TempDir dir("cap_dos");
  ScenarioConfig c = short_config(ScenarioKind::Dos, Seconds(600));
  c.output.pcap = dir / "d.pcap";
  c.output.labels = dir / "d.csv";
  run_scenario(c);
  const auto frames = read_pcap(dir / "d.pcap");
  const auto rows = read_labels(dir / "d.csv");
  REQUIRE(frames.size() == rows.size());
  std::array<std::uint64_t, kLabelCount> seen{};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const LabelTag label = rows[i].label;
    seen[static_cast<std::size_t>(label)]++;
    CHECK((label == LabelTag::Benign || label == LabelTag::DosPshAck || label == LabelTag::DosIcmpIgmp ||
           label == LabelTag::DosTcpKill));
    CHECK((label != LabelTag::Benign) == is_attacker(rows[i].agent));
    if (label == LabelTag::Benign || rows[i].agent == "kali-attacker:relay") continue;
    const EthernetFrame f = decode_frame(frames[i].bytes).frame;
    if (f.arp()) continue;
    const Ipv4Packet* ip = f.ipv4();
    REQUIRE(ip != nullptr);
    if (label == LabelTag::DosPshAck) {
      REQUIRE(ip->tcp() != nullptr);
      CHECK(ip->tcp()->flags == (tcp_flag::kPsh | tcp_flag::kAck));
    } else if (label == LabelTag::DosIcmpIgmp) {
      const bool echo = ip->icmp() && ip->icmp()->type == icmp_type::kEchoRequest;
      CHECK((echo || ip->igmp() != nullptr));
    } else if (label == LabelTag::DosTcpKill) {
      REQUIRE(ip->tcp() != nullptr);
      CHECK(ip->tcp()->has(tcp_flag::kRst));
    }
  }
  CHECK(seen[static_cast<std::size_t>(LabelTag::DosPshAck)] > 0);
  CHECK(seen[static_cast<std::size_t>(LabelTag::DosIcmpIgmp)] > 0);
  CHECK(seen[static_cast<std::size_t>(LabelTag::DosTcpKill)] > 0);
}
