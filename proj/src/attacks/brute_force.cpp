#include <set>

#include "rangesim/attacks/operations.hpp"

namespace rangesim {

Wordlist Wordlist::generate(RngStream rng, std::size_t size, const std::optional<Credentials>& correct,
                            std::string_view user_hint) {
  static constexpr const char* kUsers[] = {"root", "admin", "administrator", "user", "test", "guest", "ubuntu",
                                           "ftp", "oracle", "support"};
  static constexpr const char* kWords[] = {"password", "123456", "qwerty", "letmein", "welcome", "admin",
                                           "changeme", "dragon", "monkey", "secret", "sunshine", "master"};
  Wordlist w;
  std::set<std::pair<std::string, std::string>> seen;
  if (correct) seen.emplace(correct->user, correct->password);
  const std::size_t fakes = correct && size > 0 ? size - 1 : size;
  while (w.pairs.size() < fakes) {
    std::string user = rng.bernoulli(0.5) && !user_hint.empty() ? std::string(user_hint)
                                                                 : kUsers[rng.uniform(std::size(kUsers))];
    std::string pass = kWords[rng.uniform(std::size(kWords))];
    if (rng.bernoulli(0.7)) pass += std::to_string(rng.uniform(10000));
    if (seen.emplace(user, pass).second) w.pairs.push_back(Credentials{user, pass});
  }
  if (correct && size > 0) {
    const std::size_t index = rng.uniform_range(1, size);
    w.pairs.insert(w.pairs.begin() + static_cast<std::ptrdiff_t>(index - 1), *correct);
    w.correct_index = index;
  }
  return w;
}

BruteForce::BruteForce(Attacker& attacker, BruteForceService service, Ipv4Address target, Wordlist wordlist,
                       SimTime attempt_interval, std::function<void()> done)
    : attacker_(attacker),
      service_(service),
      target_(target),
      wordlist_(std::move(wordlist)),
      interval_(attempt_interval),
      done_(std::move(done)) {
  if (wordlist_.pairs.empty()) throw EmptyWordlist("brute force needs a non-empty wordlist");
}

void BruteForce::start() { attempt(0); }

void BruteForce::attempt(std::size_t i) {
  BruteForceAttempt a;
  a.index = i + 1;
  a.creds = wordlist_.pairs[i];
  a.started = attacker_.net().now();
  attempts_.push_back(a);
  const ClientContext ctx{&attacker_.net(), attacker_.host(), attacker_.agent()};
  auto self = shared_from_this();
  auto cb = [self, i](const ExchangeResult& r) { self->complete(i, r); };
  if (service_ == BruteForceService::Ssh) {
    ssh_session(ctx, target_, a.creds, 0, cb);
  } else {
    ftp_session(ctx, target_, a.creds, true, 0, cb);
  }
}

void BruteForce::complete(std::size_t i, const ExchangeResult& r) {
  Network& net = attacker_.net();
  BruteForceAttempt& a = attempts_.at(i);
  a.finished = net.now();
  a.success = r.success;
  a.reason = r.reason;
  if (r.success || i + 1 == wordlist_.pairs.size()) {
    finished_ = true;
    finished_at_ = net.now();
    if (done_) done_();
    return;
  }
  const SimTime next = std::max(a.started + interval_, net.now());
  auto self = shared_from_this();
  net.scheduler().schedule(next, EventKind::AgentWakeup, [self, i] { self->attempt(i + 1); });
}

std::size_t BruteForce::failures() const {
  std::size_t n = 0;
  for (const auto& a : attempts_) n += a.success ? 0 : 1;
  return n;
}

bool BruteForce::succeeded() const { return !attempts_.empty() && attempts_.back().success; }

}  // namespace rangesim
