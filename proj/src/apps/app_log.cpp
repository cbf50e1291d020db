#include "rangesim/apps/app_log.hpp"

#include <algorithm>

namespace rangesim {

const char* to_string(AppKind kind) {
  switch (kind) {
    case AppKind::Http: return "http";
    case AppKind::Ftp: return "ftp";
    case AppKind::Ssh: return "ssh";
    case AppKind::Ntp: return "ntp";
    case AppKind::Ping: return "ping";
  }
  return "?";
}

AppStats AppLog::stats(AppKind kind, SimTime from, SimTime to) const {
  AppStats s;
  for (const auto& e : entries_) {
    if (e.kind != kind || e.started < from || e.started >= to) continue;
    ++s.attempts;
    if (e.result.success) ++s.successes;
  }
  return s;
}

AppStats AppLog::stats_all(SimTime from, SimTime to, const std::vector<std::string>& agents) const {
  AppStats s;
  for (const auto& e : entries_) {
    if (e.started < from || e.started >= to) continue;
    if (!agents.empty() && std::find(agents.begin(), agents.end(), e.agent) == agents.end()) continue;
    ++s.attempts;
    if (e.result.success) ++s.successes;
  }
  return s;
}

}  // namespace rangesim
