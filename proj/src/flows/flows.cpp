#include "rangesim/flows/flows.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "rangesim/capture/capture.hpp"
#include "rangesim/engine/rng.hpp"
#include "rangesim/proto/wire.hpp"

namespace rangesim {

std::size_t FlowKeyHash::operator()(const FlowKey& k) const noexcept {
  std::uint64_t h = (std::uint64_t{k.ip_lo.value} << 32) | k.ip_hi.value;
  h = splitmix64_mix(h ^ ((std::uint64_t{k.port_lo} << 24) | (std::uint64_t{k.port_hi} << 8) | k.protocol));
  return static_cast<std::size_t>(h);
}

FrameClass classify_frame(std::span<const std::uint8_t> f, PacketInfo& info) {
  if (f.size() < kEthernetHeaderLen) return FrameClass::Other;
  const std::uint16_t type = static_cast<std::uint16_t>((f[12] << 8) | f[13]);
  if (type == ethertype::kArp) return FrameClass::Arp;
  if (type != ethertype::kIpv4) return FrameClass::Other;
  const auto ip = f.subspan(kEthernetHeaderLen);
  if (ip.size() < kIpv4HeaderLen || (ip[0] >> 4) != 4) return FrameClass::Other;
  const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0F) * 4;
  const std::uint32_t total = (std::uint32_t{ip[2]} << 8) | ip[3];
  if (ihl < kIpv4HeaderLen || total < ihl || total > ip.size()) return FrameClass::Other;
  info = PacketInfo{};
  info.length = total;
  info.protocol = ip[9];
  info.src = Ipv4Address(ip[12], ip[13], ip[14], ip[15]);
  info.dst = Ipv4Address(ip[16], ip[17], ip[18], ip[19]);
  const auto l4 = ip.subspan(ihl, total - ihl);
  if ((info.protocol == ipproto::kTcp || info.protocol == ipproto::kUdp) && l4.size() >= 4) {
    info.src_port = static_cast<std::uint16_t>((l4[0] << 8) | l4[1]);
    info.dst_port = static_cast<std::uint16_t>((l4[2] << 8) | l4[3]);
  }
  if (info.protocol == ipproto::kTcp && l4.size() >= 14) info.tcp_flags = l4[13];
  return FrameClass::Ipv4;
}

FlowKey make_flow_key(const PacketInfo& p) {
  FlowKey k;
  k.protocol = p.protocol;
  const bool src_low = std::tie(p.src.value, p.src_port) <= std::tie(p.dst.value, p.dst_port);
  if (src_low) {
    k.ip_lo = p.src;
    k.port_lo = p.src_port;
    k.ip_hi = p.dst;
    k.port_hi = p.dst_port;
  } else {
    k.ip_lo = p.dst;
    k.port_lo = p.dst_port;
    k.ip_hi = p.src;
    k.port_hi = p.src_port;
  }
  return k;
}

FlowExtractor::FlowExtractor(FlowConfig config) : config_(config) {
  if (config_.active_timeout.ns() == 0 || config_.idle_timeout.ns() == 0) {
    throw std::invalid_argument("flow timeouts must be > 0");
  }
}

void FlowExtractor::add(SimTime t, std::span<const std::uint8_t> frame, LabelTag label) {
  PacketInfo p;
  switch (classify_frame(frame, p)) {
    case FrameClass::Ipv4: add_packet(t, p, label); break;
    case FrameClass::Arp:
      ++out_.non_ip_frames;
      ++out_.arp_by_label[static_cast<std::size_t>(label)];
      break;
    case FrameClass::Other: ++out_.non_ip_frames; break;
  }
}

void FlowExtractor::add_packet(SimTime t, const PacketInfo& p, LabelTag label) {
  ++out_.ip_packets;
  const FlowKey key = make_flow_key(p);
  std::size_t slot;
  auto it = index_.find(key);
  if (it != index_.end()) {
    Accumulator& a = open_[it->second];
    if (t - a.last_seen > config_.idle_timeout || t - a.record.start > config_.active_timeout) {
      close(it->second);
      it = index_.end();
    }
  }
  if (it == index_.end()) {
    if (free_slots_.empty()) {
      slot = open_.size();
      open_.emplace_back();
    } else {
      slot = free_slots_.back();
      free_slots_.pop_back();
      open_[slot] = Accumulator{};
    }
    FlowRecord& r = open_[slot].record;
    r.flow_id = next_id_++;
    r.key = key;
    r.src_ip = p.src;
    r.src_port = p.src_port;
    r.dst_ip = p.dst;
    r.dst_port = p.dst_port;
    r.protocol = p.protocol;
    r.start = t;
    index_[key] = slot;
  } else {
    slot = it->second;
  }

  Accumulator& a = open_[slot];
  FlowRecord& r = a.record;
  const int d = (p.src == r.src_ip && p.src_port == r.src_port) ? 0 : 1;
  DirectionStats& s = d == 0 ? r.fwd : r.bwd;
  auto& w = a.dir[d];

  ++s.packets;
  s.bytes += p.length;
  if (s.packets == 1) {
    s.len_min = s.len_max = p.length;
  } else {
    s.len_min = std::min(s.len_min, p.length);
    s.len_max = std::max(s.len_max, p.length);
    const double iat = static_cast<double>(t.ns() - w.last.ns());
    ++w.iats;
    const double di = iat - s.iat_mean;
    s.iat_mean += di / static_cast<double>(w.iats);
    w.iat_m2 += di * (iat - s.iat_mean);
  }
  const double len = p.length;
  const double dl = len - s.len_mean;
  s.len_mean += dl / static_cast<double>(s.packets);
  w.len_m2 += dl * (len - s.len_mean);
  w.last = t;

  const std::uint8_t f = p.protocol == ipproto::kTcp ? p.tcp_flags : 0;
  if (f & tcp_flag::kSyn) ++s.syn;
  if (f & tcp_flag::kAck) ++s.ack;
  if (f & tcp_flag::kPsh) ++s.psh;
  if (f & tcp_flag::kFin) ++s.fin;
  if (f & tcp_flag::kRst) ++s.rst;

  auto& count = r.label_counts[static_cast<std::size_t>(label)];
  if (count++ == 0) r.label_order.push_back(label);
  r.end = t;
  a.last_seen = t;

  if (p.protocol != ipproto::kTcp) return;
  if (f & tcp_flag::kRst) {
    close(slot);
    return;
  }
  const bool both_fins = a.fin_seen[0] && a.fin_seen[1];
  if (both_fins && d == a.first_fin && (f & tcp_flag::kAck) && !(f & (tcp_flag::kFin | tcp_flag::kSyn))) {
    close(slot);
    return;
  }
  if (f & tcp_flag::kFin) {
    if (a.first_fin < 0) a.first_fin = d;
    a.fin_seen[d] = true;
  }
}

void FlowExtractor::close(std::size_t slot) {
  Accumulator& a = open_[slot];
  for (int d = 0; d < 2; ++d) {
    DirectionStats& s = d == 0 ? a.record.fwd : a.record.bwd;
    const auto& w = a.dir[d];
    s.len_std = s.packets > 0 ? std::sqrt(std::max(0.0, w.len_m2 / static_cast<double>(s.packets))) : 0.0;
    s.iat_std = w.iats > 0 ? std::sqrt(std::max(0.0, w.iat_m2 / static_cast<double>(w.iats))) : 0.0;
  }
  index_.erase(a.record.key);
  out_.flows.push_back(std::move(a.record));
  free_slots_.push_back(slot);
}

FlowSet FlowExtractor::finish() {
  std::vector<std::size_t> slots;
  slots.reserve(index_.size());
  for (const auto& [key, slot] : index_) slots.push_back(slot);
  for (std::size_t slot : slots) close(slot);
  std::sort(out_.flows.begin(), out_.flows.end(), [](const FlowRecord& x, const FlowRecord& y) {
    return std::tie(x.start, x.flow_id) < std::tie(y.start, y.flow_id);
  });
  FlowSet out = std::move(out_);
  out_ = FlowSet{};
  open_.clear();
  free_slots_.clear();
  return out;
}

FlowSet extract_flows(const std::vector<LabeledFrame>& frames, FlowConfig config) {
  FlowExtractor ex(config);
  for (const auto& f : frames) ex.add(f.timestamp, f.bytes, f.label);
  FlowSet set = ex.finish();
  label_flows(set.flows);
  return set;
}

LabelTag flow_label(const FlowRecord& flow) {
  LabelTag best = LabelTag::Benign;
  std::uint64_t best_count = 0;
  for (LabelTag l : flow.label_order) {
    if (l == LabelTag::Benign) continue;
    const std::uint64_t c = flow.label_counts[static_cast<std::size_t>(l)];
    if (c > best_count) {
      best = l;
      best_count = c;
    }
  }
  return best;
}

void label_flows(std::vector<FlowRecord>& flows) {
  for (auto& f : flows) f.label = flow_label(f);
}

void emit_flow_csv(const std::vector<FlowRecord>& flows, const std::filesystem::path& path) {
  std::FILE* out = std::fopen(path.c_str(), "wb");
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  std::fprintf(out, "%s\n", kFlowCsvHeader);
  for (const auto& f : flows) {
    const auto& a = f.fwd;
    const auto& b = f.bwd;
    std::fprintf(out,
                 "%llu,%s,%s,%u,%u,%u,%llu,%llu,%llu,%llu,%llu,%llu,%.6f,%.6f,%u,%u,%.6f,%.6f,%u,%u,%.6f,%.6f,%.6f,"
                 "%.6f,%llu,%llu,%llu,%llu,%llu,%s\n",
                 static_cast<unsigned long long>(f.flow_id), f.src_ip.to_string().c_str(),
                 f.dst_ip.to_string().c_str(), unsigned{f.src_port}, unsigned{f.dst_port}, unsigned{f.protocol},
                 static_cast<unsigned long long>(f.start.ns()), static_cast<unsigned long long>(f.duration_ns()),
                 static_cast<unsigned long long>(a.packets), static_cast<unsigned long long>(b.packets),
                 static_cast<unsigned long long>(a.bytes), static_cast<unsigned long long>(b.bytes), a.len_mean,
                 a.len_std, a.len_min, a.len_max, b.len_mean, b.len_std, b.len_min, b.len_max, a.iat_mean, a.iat_std,
                 b.iat_mean, b.iat_std, static_cast<unsigned long long>(a.syn + b.syn),
                 static_cast<unsigned long long>(a.ack + b.ack), static_cast<unsigned long long>(a.psh + b.psh),
                 static_cast<unsigned long long>(a.fin + b.fin), static_cast<unsigned long long>(a.rst + b.rst),
                 to_string(f.label));
  }
  const bool ok = std::ferror(out) == 0;
  if (std::fclose(out) != 0 || !ok) throw IoFailure("write to " + path.string() + " failed");
}

void emit_arp_summary(const FlowSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  out << "label,count\n";
  for (int i = 0; i < kLabelCount; ++i) out << to_string(static_cast<LabelTag>(i)) << ',' << set.arp_by_label[i] << '\n';
  out.flush();
  if (!out) throw IoFailure("write to " + path.string() + " failed");
}

std::filesystem::path arp_summary_path(const std::filesystem::path& flows_path) {
  std::filesystem::path p = flows_path;
  p.replace_extension(".arp.csv");
  return p;
}

}  // namespace rangesim
