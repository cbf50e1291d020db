#pragma once

#include <memory>
#include <vector>

#include "rangesim/apps/benign_agent.hpp"
#include "rangesim/apps/services.hpp"
#include "rangesim/net/host_stack.hpp"
#include "rangesim/net/network.hpp"

namespace rangesim::test {

/// Reference network with services installed and the Service LAN mirrored.
struct Testbed {
  Scheduler scheduler;
  std::unique_ptr<Network> net;
  std::unique_ptr<ServiceSuite> services;
  AppLog log;
  std::vector<std::unique_ptr<BenignAgent>> agents;
  std::vector<WireFrame> span_frames;

  explicit Testbed(std::uint64_t seed = 1, TopologyConfig config = {}) {
    Topology topo = build_reference_topology(config);
    enable_span(topo, LanId::Service);
    net = std::make_unique<Network>(scheduler, std::move(topo), seed);
    net->add_span_sink([this](LanId, const WireFrame& f, SimTime) { span_frames.push_back(f); });
    services = std::make_unique<ServiceSuite>(*net, ServiceSuite::default_credentials());
    services->install();
    net->boot();
  }

  const Topology& topo() const { return net->topology(); }
  std::size_t index(std::string_view name) const { return topo().host_index(name); }
  Ipv4Address ip(std::string_view name) const { return topo().hosts[index(name)].primary().ip; }
  MacAddress mac(std::string_view name) const { return topo().hosts[index(name)].primary().mac; }

  ClientContext client(std::string_view name) {
    const std::size_t h = index(name);
    return ClientContext{net.get(), h, net->host(h).agent()};
  }

  void lane(BenignKind kind, std::string host, std::string target, SimTime mean = SimTime()) {
    BenignAgentConfig c;
    c.kind = kind;
    c.host = std::move(host);
    c.target = std::move(target);
    c.mean_interval = mean.ns() ? mean : default_mean_interval(kind);
    Credentials creds;
    if (kind == BenignKind::SshClient || kind == BenignKind::FtpClient) creds = services->credentials_for(c.target);
    agents.push_back(run_benign_agent(*net, c, creds, log));
  }

  void run(SimTime until) { scheduler.run_until(until); }
};

}  // namespace rangesim::test
