#include "rangesim/capture/capture.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace rangesim {

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 24)};
  out.write(b, 4);
}
void put_u16(std::ostream& out, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v), static_cast<char>(v >> 8)};
  out.write(b, 2);
}
void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}
bool get_u32(std::istream& in, std::uint32_t& v) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) return false;
  v = std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) | (std::uint32_t{b[3]} << 24);
  return true;
}
bool get_u64(std::istream& in, std::uint64_t& v) {
  std::uint32_t lo, hi;
  if (!get_u32(in, lo) || !get_u32(in, hi)) return false;
  v = (std::uint64_t{hi} << 32) | lo;
  return true;
}

void write_header(std::ostream& out) {
  put_u32(out, kPcapMagic);
  put_u16(out, 2);
  put_u16(out, 4);
  put_u32(out, 0);
  put_u32(out, 0);
  put_u32(out, kPcapSnaplen);
  put_u32(out, kLinktypeEthernet);
}

void write_record(std::ostream& out, SimTime t, const Bytes& bytes) {
  put_u32(out, static_cast<std::uint32_t>(t.ns() / 1'000'000'000ULL));
  put_u32(out, static_cast<std::uint32_t>((t.ns() % 1'000'000'000ULL) / 1000));
  put_u32(out, static_cast<std::uint32_t>(bytes.size()));
  put_u32(out, static_cast<std::uint32_t>(bytes.size()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open " + path.string() + " for writing");
  return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoFailure("write to " + path.string() + " failed");
}

std::filesystem::path make_spill_path() {
  static std::atomic<std::uint64_t> counter{0};
  return std::filesystem::temp_directory_path() /
         ("rangesim-capture-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + ".spill");
}

}  // namespace

CaptureStore::CaptureStore(CaptureLimits limits) : limits_(limits) {}

CaptureStore::~CaptureStore() {
  if (!spill_path_.empty()) {
    std::error_code ec;
    std::filesystem::remove(spill_path_, ec);
  }
}

void CaptureStore::append(SimTime t, const WireFrame& frame) {
  memory_.push_back(CaptureRecord{count_, t, frame.bytes, frame.provenance});
  memory_bytes_ += frame.size();
  ++count_;
  ++label_counts_[static_cast<std::size_t>(frame.provenance.label)];
  if (memory_.size() > limits_.max_records_in_memory || memory_bytes_ > limits_.max_bytes_in_memory) spill();
}

// Spill format per record: u64 index, u64 ns, u32 agent, u8 label, u8 relayed, u32 len, bytes.
void CaptureStore::spill() {
  if (spill_path_.empty()) spill_path_ = make_spill_path();
  std::ofstream out(spill_path_, std::ios::binary | std::ios::app);
  if (!out) throw IoFailure("cannot open capture spill file " + spill_path_.string());
  for (const auto& r : memory_) {
    put_u64(out, r.index);
    put_u64(out, r.timestamp.ns());
    put_u32(out, r.provenance.agent.value);
    out.put(static_cast<char>(r.provenance.label));
    out.put(static_cast<char>(r.provenance.relayed ? 1 : 0));
    put_u32(out, static_cast<std::uint32_t>(r.bytes->size()));
    out.write(reinterpret_cast<const char*>(r.bytes->data()), static_cast<std::streamsize>(r.bytes->size()));
  }
  check_written(out, spill_path_);
  spilled_records_ += memory_.size();
  memory_.clear();
  memory_.shrink_to_fit();
  memory_bytes_ = 0;
}

void CaptureStore::for_each(const std::function<void(const CaptureRecord&)>& fn) const {
  if (spilled_records_ > 0) {
    std::ifstream in(spill_path_, std::ios::binary);
    if (!in) throw IoFailure("cannot reopen capture spill file " + spill_path_.string());
    for (std::uint64_t i = 0; i < spilled_records_; ++i) {
      CaptureRecord r;
      std::uint64_t ns = 0;
      std::uint32_t agent = 0, len = 0;
      char label = 0, relayed = 0;
      if (!get_u64(in, r.index) || !get_u64(in, ns) || !get_u32(in, agent) || !in.get(label) || !in.get(relayed) ||
          !get_u32(in, len)) {
        throw IoFailure("capture spill file truncated");
      }
      auto bytes = std::make_shared<Bytes>(len);
      if (!in.read(reinterpret_cast<char*>(bytes->data()), len)) throw IoFailure("capture spill file truncated");
      r.timestamp = SimTime(ns);
      r.bytes = std::move(bytes);
      r.provenance = Provenance{AgentId{agent}, static_cast<LabelTag>(label), relayed != 0};
      fn(r);
    }
  }
  for (const auto& r : memory_) fn(r);
}

void attach_capture(Network& net, LanId lan, CaptureStore& store) {
  if (!net.topology().switch_of(lan).span_port) {
    throw NoSpanPort(std::string("switch of the ") + to_string(lan) + " LAN has no SPAN port");
  }
  net.add_span_sink([lan, &store](LanId from, const WireFrame& frame, SimTime t) {
    if (from == lan) store.append(t, frame);
  });
}

void write_pcap(const CaptureStore& store, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_header(out);
  store.for_each([&](const CaptureRecord& r) { write_record(out, r.timestamp, *r.bytes); });
  check_written(out, path);
}

void write_pcap(const std::vector<PcapRecord>& records, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_header(out);
  for (const auto& r : records) {
    put_u32(out, r.ts_sec);
    put_u32(out, r.ts_usec);
    put_u32(out, static_cast<std::uint32_t>(r.bytes.size()));
    put_u32(out, static_cast<std::uint32_t>(r.bytes.size()));
    out.write(reinterpret_cast<const char*>(r.bytes.data()), static_cast<std::streamsize>(r.bytes.size()));
  }
  check_written(out, path);
}

std::vector<PcapRecord> read_pcap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::uint32_t magic = 0, version = 0, zone = 0, sigfigs = 0, snaplen = 0, linktype = 0;
  if (!get_u32(in, magic) || !get_u32(in, version) || !get_u32(in, zone) || !get_u32(in, sigfigs) ||
      !get_u32(in, snaplen) || !get_u32(in, linktype)) {
    throw IoFailure(path.string() + ": truncated pcap header");
  }
  if (magic != kPcapMagic) throw IoFailure(path.string() + ": not a little-endian microsecond pcap");
  if (linktype != kLinktypeEthernet) throw IoFailure(path.string() + ": unsupported link type");
  std::vector<PcapRecord> out;
  while (true) {
    PcapRecord r;
    std::uint32_t incl = 0, orig = 0;
    if (!get_u32(in, r.ts_sec)) break;
    if (!get_u32(in, r.ts_usec) || !get_u32(in, incl) || !get_u32(in, orig)) {
      throw IoFailure(path.string() + ": truncated record header");
    }
    if (incl > snaplen || incl > orig) throw IoFailure(path.string() + ": bad record length");
    r.bytes.resize(incl);
    if (!in.read(reinterpret_cast<char*>(r.bytes.data()), incl)) throw IoFailure(path.string() + ": truncated record");
    out.push_back(std::move(r));
  }
  return out;
}

void write_labels(const CaptureStore& store, const AgentRegistry& agents, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kLabelsHeader << '\n';
  store.for_each([&](const CaptureRecord& r) {
    out << r.index << ',' << r.timestamp.ns() << ',' << agents.name(r.provenance.agent) << ','
        << to_string(r.provenance.label) << '\n';
  });
  check_written(out, path);
}

std::vector<LabelRow> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kLabelsHeader) throw IoFailure(path.string() + ": bad label header");
  std::vector<LabelRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string index, ts, agent, label;
    if (!std::getline(fields, index, ',') || !std::getline(fields, ts, ',') || !std::getline(fields, agent, ',') ||
        !std::getline(fields, label)) {
      throw IoFailure(path.string() + ":" + std::to_string(lineno) + ": expected 4 fields");
    }
    auto tag = parse_label(label);
    if (!tag) throw IoFailure(path.string() + ":" + std::to_string(lineno) + ": unknown label " + label);
    try {
      rows.push_back(LabelRow{std::stoull(index), std::stoull(ts), agent, *tag});
    } catch (const std::exception&) {
      throw IoFailure(path.string() + ":" + std::to_string(lineno) + ": bad number");
    }
  }
  return rows;
}

}  // namespace rangesim
