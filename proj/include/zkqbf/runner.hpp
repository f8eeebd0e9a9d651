#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zkqbf/session.hpp"
#include "zkqbf/transport.hpp"

namespace zkq {

struct PartyOutcome {
  Verdict verdict;
  SessionStats stats;
  std::uint64_t bytesSent = 0;
  std::uint64_t bytesReceived = 0;
  std::vector<FrameRecord> log;
  std::string error;  // set when the party threw
};

struct PairOutcome {
  PartyOutcome prover;
  PartyOutcome verifier;
  std::vector<std::uint8_t> stream;  // verifier-side capture when requested
};

struct PairOptions {
  Backend backend = Backend::ItMac;
  unsigned fieldBits = 64;
  std::uint64_t seed = 1;
  bool hashChallenges = false;
  bool capture = false;
  // Applied to frames the prover sends.
  std::function<void(std::size_t, std::vector<std::uint8_t>&)> tamper;
};

SessionOptions sessionOptions(Role role, Backend backend, unsigned fieldBits, std::uint64_t seed,
                              bool hashChallenges = false);

// Runs one party script to its verdict on a transport; exceptions become a rejecting verdict.
PartyOutcome runParty(Transport& t, const SessionOptions& opt, const std::function<void(Session&)>& script);

// Both parties in threads over an in-memory transport.
PairOutcome runPair(const PairOptions& opt, const std::function<void(Session&)>& prover,
                    const std::function<void(Session&)>& verifier);

enum class Mode { QRes, Cube, Herbrand, Skolem };
const char* modeName(Mode m);
std::optional<Mode> parseMode(const std::string& s);
std::optional<Backend> parseBackend(const std::string& s);

struct SessionConfig {
  Role role = Role::Prover;
  Mode mode = Mode::QRes;
  Backend backend = Backend::ItMac;
  unsigned fieldBits = 64;
  std::size_t bucketSize = 0;
  std::string listen;
  std::string connect;
  bool inProcess = false;
  std::string qbfPath;
  std::string certPath;
  std::string statsPath;
  std::uint64_t seed = 1;
};

// Exit codes of the command-line tool.
inline constexpr int kExitAccept = 0;
inline constexpr int kExitReject = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAbort = 3;

struct StatsReport {
  std::string role;
  std::string mode;
  std::string backend;
  bool accept = false;
  std::string stage;
  std::map<std::string, std::string> params;  // public parameters
  PartyOutcome party;
  double wallSeconds = 0;
  std::string error;
  int exitCode = kExitAbort;
};

std::string formatStats(const StatsReport& r);

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Validates a command-line configuration (throws ConfigError).
void validateConfig(const SessionConfig& cfg);
// Runs the handshake and the configured protocol on an open transport; transport flags are ignored.
StatsReport runSession(const SessionConfig& cfg, Transport& t);
// Opens the configured transport; in-process mode runs both roles (cfg.certPath needed) and returns the verifier's report.
StatsReport runSession(const SessionConfig& cfg);

}  // namespace zkq
