#include "zkqbf/runner.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "zkqbf/cube.hpp"
#include "zkqbf/qres.hpp"
#include "zkqbf/strategy.hpp"

namespace zkq {

SessionOptions sessionOptions(Role role, Backend backend, unsigned fieldBits, std::uint64_t seed,
                              bool hashChallenges) {
  SessionOptions o;
  o.role = role;
  o.backend = backend;
  o.fieldBits = fieldBits;
  o.dealerSeed = seed * 0x9E3779B97F4A7C15ull + 1;
  o.verifierSeed = seed * 0xC2B2AE3D27D4EB4Full + 7;
  o.hashChallenges = hashChallenges;
  return o;
}

PartyOutcome runParty(Transport& t, const SessionOptions& opt, const std::function<void(Session&)>& script) {
  PartyOutcome out;
  try {
    Session s(t, opt);
    script(s);
    out.verdict = s.finalize();
    out.stats = s.stats();
  } catch (const std::exception& e) {
    out.error = e.what();
    out.verdict = {false, "protocol"};
    if (opt.role == Role::Verifier) {
      try {
        std::string msg = "abort";
        t.send(Frame{Tag::Abort, std::vector<std::uint8_t>(msg.begin(), msg.end())});
      } catch (...) {
      }
    }
    t.close();
  }
  out.bytesSent = t.bytesSent();
  out.bytesReceived = t.bytesReceived();
  out.log = t.log();
  return out;
}

PairOutcome runPair(const PairOptions& opt, const std::function<void(Session&)>& prover,
                    const std::function<void(Session&)>& verifier) {
  auto [pt, vt] = MemoryTransport::pair();
  if (opt.tamper) pt->setTamper(opt.tamper);
  if (opt.capture) vt->setCapture(true);
  PairOutcome out;
  auto po = sessionOptions(Role::Prover, opt.backend, opt.fieldBits, opt.seed, opt.hashChallenges);
  auto vo = sessionOptions(Role::Verifier, opt.backend, opt.fieldBits, opt.seed, opt.hashChallenges);
  std::thread th([&] { out.prover = runParty(*pt, po, prover); });
  out.verifier = runParty(*vt, vo, verifier);
  if (!out.verifier.error.empty()) pt->close();
  th.join();
  if (opt.capture) out.stream = vt->captured();
  return out;
}

const char* modeName(Mode m) {
  switch (m) {
    case Mode::QRes: return "qres";
    case Mode::Cube: return "cube";
    case Mode::Herbrand: return "herbrand";
    case Mode::Skolem: return "skolem";
  }
  return "?";
}

std::optional<Mode> parseMode(const std::string& s) {
  for (Mode m : {Mode::QRes, Mode::Cube, Mode::Herbrand, Mode::Skolem})
    if (s == modeName(m)) return m;
  return std::nullopt;
}

std::optional<Backend> parseBackend(const std::string& s) {
  if (s == "cleartext") return Backend::Cleartext;
  if (s == "itmac") return Backend::ItMac;
  return std::nullopt;
}

std::string formatStats(const StatsReport& r) {
  std::ostringstream os;
  auto kv = [&](const std::string& k, const auto& v) { os << k << '=' << v << '\n'; };
  kv("role", r.role);
  kv("mode", r.mode);
  kv("backend", r.backend);
  kv("verdict", r.exitCode == kExitAccept ? "accept" : r.exitCode == kExitReject ? "reject" : "abort");
  kv("stage", r.stage);
  kv("exit_code", r.exitCode);
  for (const auto& [k, v] : r.params) kv("param." + k, v);
  const auto& st = r.party.stats;
  kv("committed_values", st.committed);
  kv("multiplications", st.multiplications);
  kv("poly_eq_checks", st.polyEqChecks);
  kv("zero_checks", st.zeroChecks);
  kv("challenges", st.challenges);
  kv("bytes_sent", r.party.bytesSent);
  kv("bytes_received", r.party.bytesReceived);
  std::size_t framesSent = 0;
  for (const auto& f : r.party.log) framesSent += f.sent ? 1 : 0;
  kv("frames_sent", framesSent);
  kv("frames_received", r.party.log.size() - framesSent);
  for (const auto& [name, secs] : st.phases) kv("time." + name, secs);
  kv("wall_seconds", r.wallSeconds);
  if (!r.error.empty()) kv("error", r.error);
  return os.str();
}

namespace {

void validateFields(const SessionConfig& cfg) {
  if (cfg.qbfPath.empty()) throw ConfigError("--qbf is required");
  if (cfg.fieldBits < 8 || cfg.fieldBits > 64) throw ConfigError("--field-bits must lie in 8..64");
  bool proverSide = cfg.inProcess || cfg.role == Role::Prover;
  if (proverSide && cfg.certPath.empty()) throw ConfigError("the prover needs --cert");
  if (!cfg.inProcess && cfg.role == Role::Verifier && !cfg.certPath.empty())
    throw ConfigError("the verifier takes no certificate");
}

}  // namespace

void validateConfig(const SessionConfig& cfg) {
  int transports = (cfg.listen.empty() ? 0 : 1) + (cfg.connect.empty() ? 0 : 1) + (cfg.inProcess ? 1 : 0);
  if (transports != 1) throw ConfigError("choose exactly one of --listen, --connect, --in-process");
  validateFields(cfg);
}

namespace {

constexpr const char* kProtocolVersion = "zkqbf/1";
constexpr std::uint64_t kMaxSteps = 1u << 22;
constexpr std::uint64_t kMaxWidth = 1u << 16;

std::string readFile(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string hex(const Digest& d) {
  std::ostringstream os;
  for (auto b : d) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(b);
  return os.str();
}

std::string instanceDigest(const QbfInstance& inst) {
  auto text = serializeQdimacs(inst);
  return hex(sha256(text.data(), text.size()));
}

using Params = std::map<std::string, std::string>;

std::string encodeParams(const Params& p) {
  std::string out;
  for (const auto& [k, v] : p) out += k + ' ' + v + '\n';
  return out;
}

Params decodeParams(const std::vector<std::uint8_t>& payload) {
  Params p;
  std::istringstream is(std::string(payload.begin(), payload.end()));
  std::string line;
  while (std::getline(is, line)) {
    auto sp = line.find(' ');
    if (sp == std::string::npos) throw ProtocolError("malformed handshake line");
    p[line.substr(0, sp)] = line.substr(sp + 1);
  }
  return p;
}

std::uint64_t number(const Params& p, const std::string& key, std::uint64_t max) {
  auto it = p.find(key);
  if (it == p.end()) throw ProtocolError("handshake lacks " + key);
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != it->second.size() || v > max) throw ProtocolError("handshake value out of range: " + key);
  return v;
}

// What one party needs to run its half; the prover side also holds the certificate.
struct Job {
  Mode mode = Mode::QRes;
  QbfInstance inst;
  Params params;
  std::optional<QResTrace> qres;
  std::optional<CubeTrace> cube;
  std::optional<StrategyBundle> strategy;
  QResPublic qresPub;
  CubePublic cubePub;
  StrategyPublic stratPub;
  std::uint32_t maxOrder = 0;
};

void loadCertificate(Job& job, const SessionConfig& cfg) {
  auto text = readFile(cfg.certPath);
  try {
    switch (job.mode) {
      case Mode::QRes:
        job.qres = parseQResTrace(text);
        if (job.qres->kind != TraceKind::QRes) throw ConfigError("qres mode needs a p zkqres trace");
        job.qresPub = qresPublic(*job.qres);
        job.params = {{"R", std::to_string(job.qresPub.steps)},
                      {"w", std::to_string(job.qresPub.width)},
                      {"d", std::to_string(job.qresPub.degree)}};
        break;
      case Mode::Cube:
        job.cube = parseCubeTrace(text);
        job.cubePub = cubePublic(*job.cube);
        job.params = {{"I", std::to_string(job.cubePub.cubes)},
                      {"R", std::to_string(job.cubePub.steps)},
                      {"w", std::to_string(job.cubePub.width)},
                      {"d", std::to_string(job.cubePub.degree)}};
        break;
      case Mode::Herbrand:
      case Mode::Skolem: {
        job.strategy = parseStrategyBundle(text, job.inst.numVars());
        auto want = job.mode == Mode::Herbrand ? StrategyKind::Herbrand : StrategyKind::Skolem;
        if (job.strategy->strategy.kind != want) throw ConfigError("strategy kind does not match --mode");
        if (job.strategy->proof.kind != TraceKind::Prop) throw ConfigError("strategy proof must be a p zkprop trace");
        job.stratPub = strategyPublic(job.inst, *job.strategy, cfg.bucketSize);
        job.params = {{"gates", std::to_string(job.stratPub.gates)},
                      {"aux", std::to_string(job.stratPub.numAux)},
                      {"R", std::to_string(job.stratPub.plan.readBuckets.size())},
                      {"plan", serializePlan(job.stratPub.plan)}};
        break;
      }
    }
  } catch (const CertError& e) {
    throw ConfigError(std::string("certificate: ") + e.what());
  }
}

// Verifier side: rebuild the public parameters the prover declared.
void acceptParams(Job& job, const Params& p) {
  switch (job.mode) {
    case Mode::QRes:
      job.qresPub = {static_cast<std::uint32_t>(number(p, "R", kMaxSteps)),
                     static_cast<std::uint32_t>(number(p, "w", kMaxWidth)),
                     static_cast<std::uint32_t>(number(p, "d", kMaxWidth))};
      job.params = {{"R", p.at("R")}, {"w", p.at("w")}, {"d", p.at("d")}};
      break;
    case Mode::Cube:
      job.cubePub = {static_cast<std::uint32_t>(number(p, "I", kMaxSteps)),
                     static_cast<std::uint32_t>(number(p, "R", kMaxSteps)),
                     static_cast<std::uint32_t>(number(p, "w", kMaxWidth)),
                     static_cast<std::uint32_t>(number(p, "d", kMaxWidth))};
      job.params = {{"I", p.at("I")}, {"R", p.at("R")}, {"w", p.at("w")}, {"d", p.at("d")}};
      break;
    case Mode::Herbrand:
    case Mode::Skolem: {
      job.stratPub.kind = job.mode == Mode::Herbrand ? StrategyKind::Herbrand : StrategyKind::Skolem;
      job.stratPub.gates = static_cast<std::uint32_t>(number(p, "gates", kMaxSteps));
      job.stratPub.numAux = static_cast<std::uint32_t>(number(p, "aux", kMaxSteps));
      auto it = p.find("plan");
      if (it == p.end()) throw ProtocolError("handshake lacks plan");
      try {
        job.stratPub.plan = parsePlan(it->second);
      } catch (const std::invalid_argument& e) {
        throw ProtocolError(e.what());
      }
      for (auto w : job.stratPub.plan.widths)
        if (w > kMaxWidth) throw ProtocolError("bucket width out of range");
      job.params = {{"gates", p.at("gates")},
                    {"aux", p.at("aux")},
                    {"R", std::to_string(job.stratPub.plan.readBuckets.size())},
                    {"plan", it->second}};
      break;
    }
  }
}

std::function<void(Session&)> script(const Job& job, bool prover) {
  return [&job, prover](Session& s) {
    switch (job.mode) {
      case Mode::QRes:
        runQResProof(s, job.inst, job.qresPub, prover ? &*job.qres : nullptr);
        break;
      case Mode::Cube:
        runCubeProof(s, job.inst, job.cubePub, prover ? &*job.cube : nullptr);
        break;
      case Mode::Herbrand:
      case Mode::Skolem:
        runStrategyProof(s, job.inst, job.stratPub, prover ? &*job.strategy : nullptr);
        break;
    }
  };
}

Job prepare(const SessionConfig& cfg, bool prover) {
  Job job;
  job.mode = cfg.mode;
  try {
    job.inst = parseQdimacs(readFile(cfg.qbfPath));
  } catch (const QdimacsError& e) {
    throw ConfigError(std::string("instance: ") + e.what());
  }
  if (prover) loadCertificate(job, cfg);
  std::uint32_t aux = job.strategy ? job.strategy->strategy.numAux : 0;
  bool strat = cfg.mode == Mode::Herbrand || cfg.mode == Mode::Skolem;
  job.maxOrder = strat ? strategyMaxOrder(job.inst, cfg.mode == Mode::Herbrand ? StrategyKind::Herbrand : StrategyKind::Skolem, aux)
                       : job.inst.rankedCount();
  if (codeBitsFor(job.maxOrder) > cfg.fieldBits) throw ConfigError("field too small for the literal codes");
  return job;
}

StatsReport baseReport(const SessionConfig& cfg, Role role) {
  StatsReport r;
  r.role = role == Role::Prover ? "prover" : "verifier";
  r.mode = modeName(cfg.mode);
  r.backend = backendName(cfg.backend);
  return r;
}

void finish(StatsReport& r, const PartyOutcome& party) {
  r.party = party;
  r.accept = party.verdict.accept;
  r.stage = party.verdict.stage;
  r.error = party.error;
  r.exitCode = !party.error.empty() ? kExitAbort : party.verdict.accept ? kExitAccept : kExitReject;
}

StatsReport runRole(const SessionConfig& cfg, Role role, Transport& t) {
  auto start = std::chrono::steady_clock::now();
  StatsReport r = baseReport(cfg, role);
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };
  auto abort = [&](const std::string& why) {
    r.error = why;
    r.stage = "handshake";
    r.exitCode = kExitAbort;
    r.party.bytesSent = t.bytesSent();
    r.party.bytesReceived = t.bytesReceived();
    r.party.log = t.log();
    r.wallSeconds = elapsed();
    return r;
  };
  Job job = prepare(cfg, role == Role::Prover);
  Params hello = {{"version", kProtocolVersion},
                  {"field", std::to_string(cfg.fieldBits)},
                  {"mode", modeName(cfg.mode)},
                  {"backend", backendName(cfg.backend)},
                  {"dealer", std::to_string(cfg.seed)},
                  {"digest", instanceDigest(job.inst)}};
  try {
    if (role == Role::Prover) {
      Params msg = hello;
      for (const auto& [k, v] : job.params) msg["param." + k] = v;
      auto text = encodeParams(msg);
      t.send(Frame{Tag::Hello, std::vector<std::uint8_t>(text.begin(), text.end())});
      Frame ack = t.recv();
      if (ack.tag == Tag::Abort) return abort("verifier refused: " + std::string(ack.payload.begin(), ack.payload.end()));
      if (ack.tag != Tag::HelloAck) return abort("unexpected frame during handshake");
    } else {
      Frame f = t.recv();
      if (f.tag != Tag::Hello) return abort("unexpected frame during handshake");
      Params got = decodeParams(f.payload);
      std::string why;
      for (const auto& [k, v] : hello) {
        auto it = got.find(k);
        if (it == got.end() || it->second != v) {
          why = k + " mismatch";
          break;
        }
      }
      if (why.empty()) {
        Params declared;
        for (const auto& [k, v] : got)
          if (k.rfind("param.", 0) == 0) declared[k.substr(6)] = v;
        try {
          acceptParams(job, declared);
        } catch (const ProtocolError& e) {
          why = e.what();
        }
      }
      if (!why.empty()) {
        t.send(Frame{Tag::Abort, std::vector<std::uint8_t>(why.begin(), why.end())});
        return abort(why);
      }
      t.send(Frame{Tag::HelloAck, {}});
    }
  } catch (const std::exception& e) {
    return abort(e.what());
  }
  r.params = job.params;
  auto opt = sessionOptions(role, cfg.backend, cfg.fieldBits, cfg.seed);
  PartyOutcome party = runParty(t, opt, script(job, role == Role::Prover));
  finish(r, party);
  r.wallSeconds = elapsed();
  return r;
}

}  // namespace

StatsReport runSession(const SessionConfig& cfg, Transport& t) {
  SessionConfig local = cfg;
  local.inProcess = false;
  validateFields(local);
  return runRole(cfg, cfg.role, t);
}

StatsReport runSession(const SessionConfig& cfg) {
  validateConfig(cfg);
  if (cfg.inProcess) {
    auto [pt, vt] = MemoryTransport::pair();
    SessionConfig pc = cfg, vc = cfg;
    pc.role = Role::Prover;
    vc.role = Role::Verifier;
    vc.certPath.clear();
    StatsReport proverReport;
    std::exception_ptr proverError;
    std::thread th([&] {
      try {
        proverReport = runRole(pc, Role::Prover, *pt);
      } catch (...) {
        proverError = std::current_exception();
        pt->close();
      }
    });
    StatsReport out;
    try {
      out = runRole(vc, Role::Verifier, *vt);
    } catch (...) {
      vt->close();
      th.join();
      throw;
    }
    th.join();
    if (proverError) std::rethrow_exception(proverError);
    return out;
  }
  std::unique_ptr<Transport> t;
  try {
    if (!cfg.listen.empty())
      t = TcpTransport::listen(cfg.listen);
    else
      t = TcpTransport::connect(cfg.connect);
  } catch (const std::exception& e) {
    StatsReport r = baseReport(cfg, cfg.role);
    r.error = e.what();
    r.stage = "transport";
    r.exitCode = kExitAbort;
    return r;
  }
  auto r = runRole(cfg, cfg.role, *t);
  t->close();
  return r;
}

}  // namespace zkq
