#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "zkqbf/gf.hpp"
#include "zkqbf/transport.hpp"

namespace zkq {

enum class Role { Prover, Verifier };
enum class Backend { Cleartext, ItMac };

const char* backendName(Backend b);

using Digest = std::array<std::uint8_t, 32>;
Digest sha256(const void* data, std::size_t size);

// A committed value as seen by one party. Prover: v = value, t = mac.
// IT-MAC verifier: t = key. Public values carry v on both sides.
struct Val {
  Elem v = 0;
  Elem t = 0;
  bool pub = false;
};

using CPoly = std::vector<Val>;  // coefficient i of X^i

class ProtocolError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Verdict {
  bool accept = false;
  std::string stage;  // first failing stage on reject
};

struct SessionStats {
  std::uint64_t committed = 0;
  std::uint64_t multiplications = 0;
  std::uint64_t polyEqChecks = 0;
  std::uint64_t zeroChecks = 0;
  std::uint64_t challenges = 0;
  std::vector<std::pair<std::string, double>> phases;  // seconds per named phase
};

struct SessionOptions {
  Role role = Role::Prover;
  Backend backend = Backend::ItMac;
  unsigned fieldBits = 64;
  std::uint64_t dealerSeed = 1;
  std::uint64_t verifierSeed = 2;
  // Challenges derived from a transcript hash instead of verifier coins (non-interactive heuristic).
  bool hashChallenges = false;
};

// Correlated randomness from a simulated trusted dealer. Both parties replay the same tape;
// the prover only reads the value/mac halves, the verifier only the keys.
class Dealer {
public:
  Dealer(const Field& f, std::uint64_t seed);
  Elem delta() const { return delta_; }
  struct Share {
    Elem r, mac, key;
  };
  Share next();

private:
  const Field* f_;
  std::mt19937_64 rng_;
  Elem delta_;
};

class Session {
public:
  Session(Transport& t, const SessionOptions& opt);

  Role role() const { return opt_.role; }
  bool isProver() const { return opt_.role == Role::Prover; }
  Backend backend() const { return opt_.backend; }
  const Field& field() const { return f_; }
  const SessionStats& stats() const { return stats_; }
  Transport& transport() { return *t_; }
  // Closes the running phase (if any) and starts a new one; finalize closes the last.
  void markPhase(const std::string& name);

  // Labels attached to the checks registered from now on.
  void setStage(const std::string& name) { stage_ = name; }
  const std::string& stage() const { return stage_; }

  // A stage plus registration order; the verdict names the failing check with the lowest ticket.
  struct CheckTag {
    std::string stage;
    std::uint64_t ticket = 0;
  };
  CheckTag tag() { return context(); }
  // Checks registered inside fn are attributed to t.
  template <class F>
  void under(const CheckTag& t, F&& fn) {
    const CheckTag* saved = hookCtx_;
    hookCtx_ = &t;
    fn();
    hookCtx_ = saved;
  }

  Val constant(Elem c) const;
  Val witness(Elem x);  // verifier passes any value
  CPoly witnessPoly(const std::vector<Elem>& coeffs, std::size_t n);
  // Both parties supply x; a mismatch rejects with stage "instance".
  Val instance(Elem x);

  Val add(const Val& a, const Val& b) const;
  Val scale(const Val& a, Elem c) const;
  Val addConst(const Val& a, Elem c) const { return add(a, constant(c)); }
  Val mul(const Val& a, const Val& b);
  Val mulMany(const std::vector<Val>& xs);
  // Registers x*y == z without committing anything new.
  void assertProduct(const Val& x, const Val& y, const Val& z);
  void assertZero(const Val& a);
  void assertEqual(const Val& a, const Val& b) { assertZero(add(a, b)); }
  void assertBit(const Val& b) { assertProduct(b, b, b); }

  Val evalPoly(const CPoly& p, Elem x) const;
  // Deferred product-of-polynomials identity, evaluated at the final challenge.
  void polyEq(std::vector<CPoly> lhs, std::vector<CPoly> rhs);

  Elem challenge();
  std::vector<Elem> challenges(std::size_t n);

  // Hooks run during finalize: first with the fingerprint challenges, then with the evaluation point.
  using FingerprintHook = std::function<void(Session&, Elem chi, Elem beta)>;
  using EvalHook = std::function<void(Session&, Elem r)>;
  void onFingerprint(FingerprintHook h);
  void onEval(EvalHook h);

  // Runs all deferred checks and exchanges the verdict. Must be called by both parties.
  Verdict finalize();
  // Reject until finalize has completed.
  Verdict verdict() const;
  bool finalized() const { return finalized_; }

private:
  using Ctx = CheckTag;
  struct Triple {
    Val x, y, z;
    Ctx ctx;
  };
  struct Zero {
    Val v;
    Ctx ctx;
  };

  Ctx context();
  void sendElem(Elem e);
  Elem recvElem();
  void flush();
  void fetchRound();
  Elem drawChallenge();
  void fail(const Ctx& c);

  Field f_;
  Transport* t_;
  SessionOptions opt_;
  Dealer dealer_;
  std::mt19937_64 coins_;
  Elem delta_ = 0;

  std::string stage_ = "setup";
  std::uint64_t nextTicket_ = 0;
  const Ctx* hookCtx_ = nullptr;

  std::vector<std::uint8_t> out_;
  std::vector<std::uint8_t> in_;
  std::size_t inPos_ = 0;
  bool roundFetched_ = false;
  std::vector<std::uint8_t> transcript_;

  std::vector<Triple> triples_;
  std::vector<Zero> zeros_;
  std::vector<std::pair<FingerprintHook, Ctx>> fpHooks_;
  std::vector<std::pair<EvalHook, Ctx>> evalHooks_;
  std::vector<std::uint8_t> instanceLog_;

  std::string phase_;
  std::chrono::steady_clock::time_point phaseStart_;

  bool finalized_ = false;
  Verdict verdict_{false, "pending deferred checks"};
  SessionStats stats_;
  // Cleartext failures found while the script runs (verifier side).
  bool haveFailure_ = false;
  Ctx firstFailure_{};
};

}  // namespace zkq
