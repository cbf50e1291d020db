#include "flow_oracle.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "rangesim/proto/wire.hpp"

namespace rangesim::oracle {

namespace {

struct Pkt {
  bool ip = false;
  bool arp = false;
  std::uint32_t src = 0, dst = 0;
  std::uint16_t sport = 0, dport = 0;
  std::uint8_t proto = 0;
  std::uint8_t flags = 0;
  std::uint32_t length = 0;
};

std::uint16_t be16(const Bytes& b, std::size_t at) { return static_cast<std::uint16_t>(b[at] << 8 | b[at + 1]); }
std::uint32_t be32(const Bytes& b, std::size_t at) {
  return std::uint32_t{b[at]} << 24 | std::uint32_t{b[at + 1]} << 16 | std::uint32_t{b[at + 2]} << 8 | b[at + 3];
}

Pkt parse(const Bytes& b) {
  Pkt p;
  if (b.size() < 34) {
    p.arp = b.size() >= 14 && be16(b, 12) == 0x0806;
    return p;
  }
  const std::uint16_t type = be16(b, 12);
  if (type == 0x0806) p.arp = true;
  if (type != 0x0800) return p;
  p.ip = true;
  const std::size_t ihl = (b[14] & 0x0F) * 4u;
  p.length = be16(b, 16);
  p.proto = b[23];
  p.src = be32(b, 26);
  p.dst = be32(b, 30);
  const std::size_t l4 = 14 + ihl;
  if (p.proto == 6 || p.proto == 17) {
    p.sport = be16(b, l4);
    p.dport = be16(b, l4 + 2);
  }
  if (p.proto == 6) p.flags = b[l4 + 13];
  return p;
}

bool same_key(const Pkt& a, const Pkt& b) {
  if (a.proto != b.proto) return false;
  const bool same = a.src == b.src && a.sport == b.sport && a.dst == b.dst && a.dport == b.dport;
  const bool swapped = a.src == b.dst && a.sport == b.dport && a.dst == b.src && a.dport == b.sport;
  return same || swapped;
}

struct Group {
  std::vector<std::size_t> members;
  bool closed = false;
};

/// True if the last member (already appended) ends the TCP conversation.
bool closes(const std::vector<Pkt>& pkts, const Group& g) {
  const Pkt& last = pkts[g.members.back()];
  if (last.proto != 6) return false;
  if (last.flags & 0x04) return true;
  if (!(last.flags & 0x10) || (last.flags & 0x03)) return false;
  // Find the first FIN sender and whether the other side also sent FIN
  // before this packet.
  const Pkt& first = pkts[g.members.front()];
  int first_fin_dir = -1;
  bool fin_dir[2] = {false, false};
  for (std::size_t k = 0; k + 1 < g.members.size(); ++k) {
    const Pkt& q = pkts[g.members[k]];
    const int d = (q.src == first.src && q.sport == first.sport) ? 0 : 1;
    if (q.flags & 0x01) {
      if (first_fin_dir < 0) first_fin_dir = d;
      fin_dir[d] = true;
    }
  }
  const int d = (last.src == first.src && last.sport == first.sport) ? 0 : 1;
  return fin_dir[0] && fin_dir[1] && d == first_fin_dir;
}

OracleDir direction_stats(const std::vector<Pkt>& pkts, const std::vector<LabeledFrame>& frames,
                          const std::vector<std::size_t>& idx) {
  OracleDir s;
  s.packets = idx.size();
  if (idx.empty()) return s;
  double sum = 0.0;
  s.len_min = pkts[idx[0]].length;
  s.len_max = pkts[idx[0]].length;
  for (std::size_t i : idx) {
    const Pkt& p = pkts[i];
    s.bytes += p.length;
    sum += p.length;
    if (p.length < s.len_min) s.len_min = p.length;
    if (p.length > s.len_max) s.len_max = p.length;
    if (p.flags & 0x02) ++s.syn;
    if (p.flags & 0x10) ++s.ack;
    if (p.flags & 0x08) ++s.psh;
    if (p.flags & 0x01) ++s.fin;
    if (p.flags & 0x04) ++s.rst;
  }
  s.len_mean = sum / static_cast<double>(idx.size());
  double var = 0.0;
  for (std::size_t i : idx) var += (pkts[i].length - s.len_mean) * (pkts[i].length - s.len_mean);
  s.len_std = std::sqrt(var / static_cast<double>(idx.size()));
  if (idx.size() > 1) {
    std::vector<double> gaps;
    for (std::size_t k = 1; k < idx.size(); ++k) {
      gaps.push_back(static_cast<double>(frames[idx[k]].timestamp.ns() - frames[idx[k - 1]].timestamp.ns()));
    }
    double gsum = 0.0;
    for (double g : gaps) gsum += g;
    s.iat_mean = gsum / static_cast<double>(gaps.size());
    double gvar = 0.0;
    for (double g : gaps) gvar += (g - s.iat_mean) * (g - s.iat_mean);
    s.iat_std = std::sqrt(gvar / static_cast<double>(gaps.size()));
  }
  return s;
}

}  // namespace

OracleResult brute_force_flows(const std::vector<LabeledFrame>& frames, std::uint64_t active_timeout_ns,
                               std::uint64_t idle_timeout_ns) {
  OracleResult out;
  std::vector<Pkt> pkts;
  for (const auto& f : frames) pkts.push_back(parse(f.bytes));

  std::vector<Group> groups;
  std::vector<std::size_t> group_of(frames.size(), SIZE_MAX);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!pkts[i].ip) {
      if (pkts[i].arp) ++out.arp_frames;
      continue;
    }
    ++out.ip_packets;
    // The most recent earlier packet with the same key decides membership.
    std::size_t prev = SIZE_MAX;
    for (std::size_t j = 0; j < i; ++j) {
      if (pkts[j].ip && same_key(pkts[i], pkts[j])) prev = j;
    }
    bool join = false;
    if (prev != SIZE_MAX) {
      const Group& g = groups[group_of[prev]];
      const std::uint64_t t = frames[i].timestamp.ns();
      const std::uint64_t start = frames[g.members.front()].timestamp.ns();
      const std::uint64_t last = frames[g.members.back()].timestamp.ns();
      join = !g.closed && t - last <= idle_timeout_ns && t - start <= active_timeout_ns;
    }
    if (!join) groups.push_back(Group{});
    const std::size_t gi = join ? group_of[prev] : groups.size() - 1;
    groups[gi].members.push_back(i);
    group_of[i] = gi;
    if (closes(pkts, groups[gi])) groups[gi].closed = true;
  }

  for (const Group& g : groups) {
    OracleFlow f;
    const Pkt& first = pkts[g.members.front()];
    f.src_ip = first.src;
    f.dst_ip = first.dst;
    f.src_port = first.sport;
    f.dst_port = first.dport;
    f.protocol = first.proto;
    f.start_ns = frames[g.members.front()].timestamp.ns();
    f.end_ns = frames[g.members.back()].timestamp.ns();
    f.members = g.members;
    std::vector<std::size_t> fwd, bwd;
    for (std::size_t i : g.members) {
      const bool forward = pkts[i].src == first.src && pkts[i].sport == first.sport;
      (forward ? fwd : bwd).push_back(i);
    }
    f.fwd = direction_stats(pkts, frames, fwd);
    f.bwd = direction_stats(pkts, frames, bwd);
    // Majority malicious label; earliest packet wins ties.
    std::uint64_t best = 0;
    for (std::size_t i : g.members) {
      const LabelTag l = frames[i].label;
      if (l == LabelTag::Benign) continue;
      std::uint64_t c = 0;
      for (std::size_t k : g.members) c += frames[k].label == l ? 1 : 0;
      if (c > best) {
        best = c;
        f.label = l;
      }
    }
    out.flows.push_back(std::move(f));
  }
  // Groups are created in flow-id order; stable sort on start keeps ties.
  std::stable_sort(out.flows.begin(), out.flows.end(),
                   [](const OracleFlow& a, const OracleFlow& b) { return a.start_ns < b.start_ns; });
  return out;
}

namespace {

bool close_enough(double a, double b, double tol) {
  if (a == b) return true;
  return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b));
}

std::string compare_dir(const DirectionStats& a, const OracleDir& e, double tol) {
  std::ostringstream o;
  if (a.packets != e.packets) o << "packets " << a.packets << " vs " << e.packets << "; ";
  if (a.bytes != e.bytes) o << "bytes " << a.bytes << " vs " << e.bytes << "; ";
  if (e.packets > 0 && (a.len_min != e.len_min || a.len_max != e.len_max)) o << "len min/max; ";
  if (!close_enough(a.len_mean, e.len_mean, tol)) o << "len_mean " << a.len_mean << " vs " << e.len_mean << "; ";
  if (!close_enough(a.len_std, e.len_std, tol)) o << "len_std " << a.len_std << " vs " << e.len_std << "; ";
  if (!close_enough(a.iat_mean, e.iat_mean, tol)) o << "iat_mean " << a.iat_mean << " vs " << e.iat_mean << "; ";
  if (!close_enough(a.iat_std, e.iat_std, tol)) o << "iat_std " << a.iat_std << " vs " << e.iat_std << "; ";
  if (a.syn != e.syn || a.ack != e.ack || a.psh != e.psh || a.fin != e.fin || a.rst != e.rst) o << "flags; ";
  return o.str();
}

}  // namespace

std::string compare(const FlowSet& actual, const OracleResult& expected, double rel_tol) {
  std::ostringstream o;
  if (actual.ip_packets != expected.ip_packets) {
    o << "ip packets " << actual.ip_packets << " vs " << expected.ip_packets;
    return o.str();
  }
  if (actual.flows.size() != expected.flows.size()) {
    o << "flow count " << actual.flows.size() << " vs " << expected.flows.size();
    return o.str();
  }
  for (std::size_t i = 0; i < actual.flows.size(); ++i) {
    const FlowRecord& a = actual.flows[i];
    const OracleFlow& e = expected.flows[i];
    std::string d;
    if (a.src_ip.value != e.src_ip || a.dst_ip.value != e.dst_ip || a.src_port != e.src_port ||
        a.dst_port != e.dst_port || a.protocol != e.protocol) {
      d += "key; ";
    }
    if (a.start.ns() != e.start_ns || a.end.ns() != e.end_ns) d += "boundaries; ";
    if (a.label != e.label) d += std::string("label ") + to_string(a.label) + " vs " + to_string(e.label) + "; ";
    const std::string fd = compare_dir(a.fwd, e.fwd, rel_tol);
    const std::string bd = compare_dir(a.bwd, e.bwd, rel_tol);
    if (!fd.empty()) d += "fwd: " + fd;
    if (!bd.empty()) d += "bwd: " + bd;
    if (!d.empty()) {
      o << "flow " << i << " (start " << e.start_ns << "): " << d;
      return o.str();
    }
  }
  return {};
}

std::vector<LabeledFrame> random_capture(std::uint64_t seed, const RandomCaptureSpec& spec) {
  std::mt19937_64 rng(seed);
  auto pick = [&](std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng); };
  const std::uint32_t base = 0xC0A88000;  // 192.168.128.0
  const std::uint16_t ports[] = {21, 22, 80, 123, 40000, 40001, 51515};
  const std::uint8_t tcp_flags[] = {0x02, 0x12, 0x10, 0x18, 0x11, 0x10, 0x18, 0x04, 0x14, 0x11, 0x10};
  const LabelTag malicious[] = {LabelTag::MitmArp, LabelTag::DosPshAck, LabelTag::DosTcpKill, LabelTag::BfSsh};

  struct Conversation {
    std::uint32_t a = 0, b = 0;
    std::uint16_t pa = 0, pb = 0;
    std::uint64_t proto = 0;
  } conv;

  std::vector<LabeledFrame> out;
  std::uint64_t t = pick(1'000'000'000);
  for (std::size_t n = 0; n < spec.packets; ++n) {
    const std::uint64_t r = pick(100);
    if (r < 80) {
      t += pick(spec.idle_timeout_ns / 50 + 1);
    } else if (r < 95) {
      t += pick(spec.idle_timeout_ns + 1);
    } else {
      t += spec.idle_timeout_ns + pick(spec.idle_timeout_ns);
    }
    LabeledFrame f;
    f.timestamp = SimTime(t);
    const std::uint64_t lr = pick(10);
    f.label = lr < 7 ? LabelTag::Benign : malicious[pick(std::size(malicious))];

    EthernetFrame e;
    e.src = MacAddress{{0x02, 0, 0, 0, 0, static_cast<std::uint8_t>(pick(6))}};
    e.dst = MacAddress{{0x02, 0, 0, 0, 0, static_cast<std::uint8_t>(pick(6))}};
    const std::uint64_t kind = pick(100);
    if (kind < 4) {
      ArpMessage a;
      a.op = pick(2) ? ArpOp::Request : ArpOp::Reply;
      a.sender_ip = Ipv4Address(base + 1 + static_cast<std::uint32_t>(pick(4)));
      a.target_ip = Ipv4Address(base + 1 + static_cast<std::uint32_t>(pick(4)));
      e.payload = a;
    } else if (kind < 6) {
      e.payload = RawPayload{0x86dd, Bytes(40, 0x60)};
    } else {
      // Continue the previous conversation often so long flows, FIN
      // exchanges and timeouts all occur.
      if (out.empty() || pick(10) < 6) {
        conv.a = base + 1 + static_cast<std::uint32_t>(pick(4));
        conv.b = base + 1 + static_cast<std::uint32_t>(pick(4));
        conv.proto = pick(10);
        conv.pa = conv.proto < 6 ? ports[pick(3)] : ports[3 + pick(4)];
        conv.pb = conv.proto < 6 ? ports[pick(3)] : ports[3 + pick(4)];
      } else if (pick(2)) {
        std::swap(conv.a, conv.b);
        std::swap(conv.pa, conv.pb);
      }
      Ipv4Packet ip;
      ip.src = Ipv4Address(conv.a);
      ip.dst = Ipv4Address(conv.b);
      ip.identification = static_cast<std::uint16_t>(n);
      const Bytes payload(pick(3) == 0 ? 0 : pick(1400), 0xAB);
      const std::uint64_t proto = conv.proto;
      if (proto < 6) {
        TcpSegment s;
        s.src_port = conv.pa;
        s.dst_port = conv.pb;
        s.seq = static_cast<std::uint32_t>(pick(1u << 31));
        s.ack = static_cast<std::uint32_t>(pick(1u << 31));
        s.flags = tcp_flags[pick(std::size(tcp_flags))];
        s.payload = payload;
        ip.payload = s;
      } else if (proto < 8) {
        UdpDatagram u;
        u.src_port = conv.pa;
        u.dst_port = conv.pb;
        u.payload = payload;
        ip.payload = u;
      } else if (proto < 9) {
        IcmpMessage m;
        m.type = pick(2) ? icmp_type::kEchoRequest : icmp_type::kEchoReply;
        m.id = 7;
        m.payload = payload;
        ip.payload = m;
      } else {
        IgmpMessage g;
        g.group = Ipv4Address(224, 0, 0, 22);
        ip.payload = g;
      }
      e.payload = ip;
    }
    f.bytes = encode_frame(e);
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace rangesim::oracle
