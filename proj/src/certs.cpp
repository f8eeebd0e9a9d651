#include "zkqbf/certs.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

namespace zkq {

namespace {

std::vector<std::vector<std::string_view>> tokenLines(std::string_view text) {
  std::vector<std::vector<std::string_view>> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      if (j > i) words.push_back(line.substr(i, j - i));
      i = j;
    }
    if (words.empty() || words[0] == "c") continue;
    out.push_back(std::move(words));
  }
  return out;
}

long toLong(std::string_view s, const char* what) {
  long v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw CertError(std::string("bad ") + what + " '" + std::string(s) + "'");
  return v;
}

std::uint32_t toCount(std::string_view s, const char* what) {
  long v = toLong(s, what);
  if (v < 0) throw CertError(std::string("negative ") + what);
  return static_cast<std::uint32_t>(v);
}

std::string litText(Lit l) {
  if (l.isSentinel()) return l.pos ? "T" : "-T";
  return std::to_string(l.dimacs());
}

struct StepParser {
  std::uint32_t width, degree;
  bool allowRemoval;

  ResStep parse(const std::vector<std::string_view>& w, std::uint32_t expectId) const {
    if (w.size() < 6) throw CertError("truncated step line");
    std::uint32_t id = toCount(w[0], "clause id");
    if (id != expectId)
      throw CertError("step id " + std::to_string(id) + " out of sequence, expected " +
                      std::to_string(expectId));
    ResStep s;
    long a = toLong(w[1], "premise id"), b = toLong(w[2], "premise id");
    for (long p : {a, b}) {
      if (p <= 0) throw CertError("dangling premise id " + std::to_string(p));
      if (p >= static_cast<long>(id))
        throw CertError("premise " + std::to_string(p) + " referenced before derivation");
    }
    s.premA = static_cast<std::uint32_t>(a);
    s.premB = static_cast<std::uint32_t>(b);
    if (w[3] == "T") {
      s.pivot = Lit::top();
    } else {
      long p = toLong(w[3], "pivot");
      if (p == 0) throw CertError("bad pivot 0");
      s.pivot = Lit::fromDimacs(p);
    }
    if (w[4] != "r") throw CertError("expected 'r' before removed literals");
    bool closed = false;
    for (std::size_t i = 5; i < w.size(); ++i) {
      if (closed) throw CertError("tokens after terminating 0");
      long v = toLong(w[i], "removed literal");
      if (v == 0) {
        closed = true;
        continue;
      }
      s.removed.push_back(Lit::fromDimacs(v));
    }
    if (!closed) throw CertError("step line not terminated");
    if (!allowRemoval && !s.removed.empty())
      throw CertError("propositional trace step removes literals");
    if (s.removed.size() > degree || s.removed.size() > width)
      throw CertError("removed set of step " + std::to_string(id) +
                      " exceeds declared width or degree");
    return s;
  }
};

Lit parseGateLit(std::string_view s, std::uint32_t numVars, std::uint32_t numAux) {
  bool neg = false;
  if (!s.empty() && s[0] == '-') {
    neg = true;
    s.remove_prefix(1);
  }
  if (s == "T") return Lit{0, !neg};
  if (!s.empty() && s[0] == 'a') {
    long j = toLong(s.substr(1), "aux index");
    if (j < 1 || static_cast<std::uint32_t>(j) > numAux)
      throw CertError("aux index out of range: " + std::string(s));
    return Lit{numVars + static_cast<std::uint32_t>(j), !neg};
  }
  long v = toLong(s, "gate literal");
  if (v <= 0 || static_cast<std::uint32_t>(v) > numVars)
    throw CertError("gate variable out of range: " + std::string(s));
  return Lit{static_cast<std::uint32_t>(v), !neg};
}

std::string gateLitText(Lit l, std::uint32_t base) {
  if (l.isSentinel()) return l.pos ? "T" : "-T";
  std::string body = l.var > base ? "a" + std::to_string(l.var - base) : std::to_string(l.var);
  return l.pos ? body : "-" + body;
}

Clause simplifyGateClause(Clause c, bool dropSatisfied) {
  Clause out;
  for (auto l : c) {
    if (l == Lit::bottom()) continue;
    if (l == Lit::top() && dropSatisfied) return {};
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
  return out;
}

}  // namespace

QResTrace parseQResTrace(std::string_view text) {
  auto lines = tokenLines(text);
  if (lines.empty()) throw CertError("empty trace");
  const auto& h = lines[0];
  if (h.size() != 5 || h[0] != "p" || (h[1] != "zkqres" && h[1] != "zkprop"))
    throw CertError("malformed trace header");
  QResTrace t;
  t.kind = h[1] == "zkqres" ? TraceKind::QRes : TraceKind::Prop;
  std::uint32_t R = toCount(h[2], "step count");
  t.width = toCount(h[3], "width");
  t.degree = toCount(h[4], "degree");
  if (lines.size() - 1 != R)
    throw CertError("trace declares " + std::to_string(R) + " steps but lists " +
                    std::to_string(lines.size() - 1));
  StepParser sp{t.width, t.degree, t.kind == TraceKind::QRes};
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (i == 1) {
      t.firstId = toCount(lines[1][0], "clause id");
      if (t.firstId == 0) throw CertError("clause ids start at 1");
    }
    t.steps.push_back(sp.parse(lines[i], t.firstId + static_cast<std::uint32_t>(i - 1)));
  }
  return t;
}

std::string serializeQResTrace(const QResTrace& t) {
  std::ostringstream os;
  os << "p " << (t.kind == TraceKind::QRes ? "zkqres " : "zkprop ") << t.steps.size() << ' '
     << t.width << ' ' << t.degree << '\n';
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& s = t.steps[i];
    os << t.firstId + i << ' ' << s.premA << ' ' << s.premB << ' ' << litText(s.pivot) << " r";
    for (auto l : s.removed) os << ' ' << l.dimacs();
    os << " 0\n";
  }
  return os.str();
}

CubeTrace parseCubeTrace(std::string_view text) {
  auto lines = tokenLines(text);
  if (lines.empty()) throw CertError("empty trace");
  const auto& h = lines[0];
  if (h.size() != 6 || h[0] != "p" || h[1] != "zkcube") throw CertError("malformed cube header");
  CubeTrace t;
  std::uint32_t I = toCount(h[2], "cube count");
  std::uint32_t R = toCount(h[3], "step count");
  t.width = toCount(h[4], "width");
  t.degree = toCount(h[5], "degree");
  if (lines.size() - 1 != static_cast<std::size_t>(I) + R)
    throw CertError("cube trace line count does not match header");
  std::optional<std::size_t> numWitness;
  for (std::uint32_t i = 0; i < I; ++i) {
    const auto& w = lines[1 + i];
    if (w[0] != "i") throw CertError("expected initial cube line");
    InitialCube c;
    std::size_t k = 1;
    for (; k < w.size(); ++k) {
      long v = toLong(w[k], "cube literal");
      if (v == 0) break;
      c.cube.push_back(Lit::fromDimacs(v));
    }
    if (k == w.size()) throw CertError("initial cube not terminated");
    if (c.cube.size() > t.width) throw CertError("initial cube wider than declared width");
    bool closed = false;
    for (++k; k < w.size(); ++k) {
      if (closed) throw CertError("tokens after terminating 0");
      if (w[k] == "*") {
        c.witnesses.emplace_back(std::nullopt);
        continue;
      }
      long v = toLong(w[k], "witness literal");
      if (v == 0) {
        closed = true;
        continue;
      }
      c.witnesses.emplace_back(Lit::fromDimacs(v));
    }
    if (!closed) throw CertError("witness list not terminated");
    if (numWitness && *numWitness != c.witnesses.size())
      throw CertError("initial cubes list different witness counts");
    numWitness = c.witnesses.size();
    t.cubes.push_back(std::move(c));
  }
  StepParser sp{t.width, t.degree, true};
  for (std::uint32_t i = 0; i < R; ++i) t.steps.push_back(sp.parse(lines[1 + I + i], I + 1 + i));
  return t;
}

std::string serializeCubeTrace(const CubeTrace& t) {
  std::ostringstream os;
  os << "p zkcube " << t.cubes.size() << ' ' << t.steps.size() << ' ' << t.width << ' '
     << t.degree << '\n';
  for (const auto& c : t.cubes) {
    os << 'i';
    for (auto l : c.cube) os << ' ' << l.dimacs();
    os << " 0";
    for (const auto& w : c.witnesses) os << ' ' << (w ? std::to_string(w->dimacs()) : "*");
    os << " 0\n";
  }
  for (std::size_t i = 0; i < t.steps.size(); ++i) {
    const auto& s = t.steps[i];
    os << t.cubes.size() + 1 + i << ' ' << s.premA << ' ' << s.premB << ' ' << litText(s.pivot)
       << " r";
    for (auto l : s.removed) os << ' ' << l.dimacs();
    os << " 0\n";
  }
  return os.str();
}

Strategy parseStrategy(std::string_view text, std::uint32_t numVars) {
  auto lines = tokenLines(text);
  if (lines.empty()) throw CertError("empty strategy");
  const auto& h = lines[0];
  if (h.size() != 5 || h[0] != "p" || h[1] != "zkstrat" || (h[2] != "herbrand" && h[2] != "skolem"))
    throw CertError("malformed strategy header");
  Strategy s;
  s.kind = h[2] == "herbrand" ? StrategyKind::Herbrand : StrategyKind::Skolem;
  std::uint32_t G = toCount(h[3], "gate count");
  s.numAux = toCount(h[4], "aux count");
  s.baseVars = numVars;
  if (lines.size() - 1 != G) throw CertError("gate count does not match header");
  std::set<std::uint32_t> defined;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& w = lines[i];
    if (w.size() != 4 || w[0] != "g") throw CertError("malformed gate line");
    Gate g;
    Lit out = parseGateLit(w[1], numVars, s.numAux);
    if (!out.pos || out.isSentinel()) throw CertError("gate output must be a variable");
    g.out = out.var;
    g.a = parseGateLit(w[2], numVars, s.numAux);
    g.b = parseGateLit(w[3], numVars, s.numAux);
    for (Lit in : {g.a, g.b})
      if (s.isAux(in.var) && !defined.count(in.var))
        throw CertError("gate input " + gateLitText(in, numVars) + " used before definition");
    if (!defined.insert(g.out).second)
      throw CertError("variable " + gateLitText(out, numVars) + " defined twice");
    s.gates.push_back(g);
  }
  return s;
}

std::string serializeStrategy(const Strategy& s) {
  std::ostringstream os;
  os << "p zkstrat " << (s.kind == StrategyKind::Herbrand ? "herbrand " : "skolem ")
     << s.gates.size() << ' ' << s.numAux << '\n';
  for (const auto& g : s.gates)
    os << "g " << gateLitText(Lit{g.out, true}, s.baseVars) << ' ' << gateLitText(g.a, s.baseVars)
       << ' ' << gateLitText(g.b, s.baseVars) << '\n';
  return os.str();
}

StrategyBundle parseStrategyBundle(std::string_view text, std::uint32_t numVars) {
  std::size_t at = text.find("p zkprop");
  if (at == std::string_view::npos) throw CertError("strategy certificate lacks a p zkprop section");
  StrategyBundle b;
  b.strategy = parseStrategy(text.substr(0, at), numVars);
  b.proof = parseQResTrace(text.substr(at));
  return b;
}

std::string serializeStrategyBundle(const StrategyBundle& b) {
  return serializeStrategy(b.strategy) + serializeQResTrace(b.proof);
}

std::vector<Clause> tseitinGates(const std::vector<Gate>& gates) {
  std::vector<Clause> out;
  for (const auto& g : gates) {
    Lit x{g.out, true};
    std::vector<Clause> three = {{~x, g.a}, {~x, g.b}, {x, ~g.a, ~g.b}};
    std::vector<Clause> kept;
    for (auto& c : three) {
      Clause s = simplifyGateClause(c, true);
      if (s.empty() && std::find(c.begin(), c.end(), Lit::top()) != c.end()) continue;
      if (std::find(kept.begin(), kept.end(), s) == kept.end()) kept.push_back(s);
    }
    out.insert(out.end(), kept.begin(), kept.end());
  }
  return out;
}

std::vector<Clause> positionalTseitin(const std::vector<Gate>& gates) {
  std::vector<Clause> out;
  for (const auto& g : gates) {
    Lit x{g.out, true};
    out.push_back(simplifyGateClause({~x, g.a}, false));
    out.push_back(simplifyGateClause({~x, g.b}, false));
    out.push_back(simplifyGateClause({x, ~g.a, ~g.b}, false));
  }
  return out;
}

std::vector<Clause> negateCnf(const std::vector<Clause>& cnf, std::uint32_t firstVar) {
  std::vector<Clause> out;
  Clause any;
  for (std::size_t j = 0; j < cnf.size(); ++j) {
    Lit sel{firstVar + static_cast<std::uint32_t>(j), true};
    for (auto l : cnf[j]) out.push_back({~sel, ~l});
    any.push_back(sel);
  }
  Lit o{firstVar + static_cast<std::uint32_t>(cnf.size()), true};
  Clause big{~o};
  big.insert(big.end(), any.begin(), any.end());
  out.push_back(big);
  out.push_back({o});
  return out;
}

std::uint32_t selectorBase(const QbfInstance& inst, const Strategy& s) {
  return inst.numVars() + s.numAux + 1;
}

std::vector<Clause> strategyPublicClauses(const QbfInstance& inst, const Strategy& s) {
  if (s.kind == StrategyKind::Herbrand) return inst.originalMatrix();
  return negateCnf(inst.originalMatrix(), selectorBase(inst, s));
}

std::vector<Clause> strategyAxioms(const QbfInstance& inst, const Strategy& s) {
  auto out = strategyPublicClauses(inst, s);
  auto tc = positionalTseitin(s.gates);
  out.insert(out.end(), tc.begin(), tc.end());
  return out;
}

}  // namespace zkq
