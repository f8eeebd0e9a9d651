#include "zkqbf/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace zkq {

namespace {

using Assign = std::vector<signed char>;  // -1 unassigned, else 0/1

int litValue(const Assign& a, Lit l) {
  if (l.isSentinel()) return l.pos ? 1 : 0;
  int v = a[l.var];
  if (v < 0) return -1;
  return l.pos ? v : 1 - v;
}

// 1 all satisfied, 0 some clause falsified, -1 open.
int cnfStatus(const std::vector<Clause>& cnf, const Assign& a) {
  bool open = false;
  for (const auto& c : cnf) {
    bool sat = false, undecided = false;
    for (auto l : c) {
      int v = litValue(a, l);
      if (v == 1) {
        sat = true;
        break;
      }
      if (v < 0) undecided = true;
    }
    if (sat) continue;
    if (!undecided) return 0;
    open = true;
  }
  return open ? -1 : 1;
}

class Expander {
public:
  Expander(const QbfInstance& inst, const std::vector<Clause>& matrix)
      : inst_(inst), matrix_(matrix), order_(inst.orderedVars()) {}

  bool eval(std::size_t i, Assign& a) const {
    int st = cnfStatus(matrix_, a);
    if (st >= 0) return st == 1;
    if (i == order_.size()) return false;
    auto v = order_[i];
    bool uni = inst_.isUniversal(v);
    for (int b = 0; b < 2; ++b) {
      a[v] = static_cast<signed char>(b);
      bool r = eval(i + 1, a);
      a[v] = -1;
      if (uni && !r) return false;
      if (!uni && r) return true;
    }
    return uni;
  }

  const std::vector<std::uint32_t>& order() const { return order_; }

private:
  const QbfInstance& inst_;
  const std::vector<Clause>& matrix_;
  std::vector<std::uint32_t> order_;
};

bool contains(const Clause& c, Lit l) { return std::find(c.begin(), c.end(), l) != c.end(); }

Clause without(const Clause& c, Lit l) {
  Clause out;
  for (auto x : c)
    if (x != l) out.push_back(x);
  return out;
}

Clause merge(const Clause& a, const Clause& b, Lit pivot) {
  Clause m = without(a, pivot);
  for (auto l : without(b, ~pivot)) m.push_back(l);
  return sortedUnique(std::move(m));
}

bool subsetOf(const Clause& small, const Clause& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

PlainResult invalid(std::string reason) { return {false, std::move(reason)}; }
PlainResult valid() { return {true, ""}; }

// Steps are counted from 1; the clause id follows.
std::string at(std::size_t step, std::uint32_t id) {
  return " at step " + std::to_string(step + 1) + " (clause " + std::to_string(id) + ")";
}

bool boundLits(const QbfInstance& inst, const Clause& c) {
  for (auto l : c)
    if (l.isSentinel() || !inst.isBound(l.var)) return false;
  return true;
}

// Shared rules of clause and cube steps. `pivotQ` is the pivot quantifier, the other class is reduced.
PlainResult checkSteps(const QbfInstance& inst, std::vector<Clause>& items, const std::vector<ResStep>& steps,
                       std::uint32_t firstId, std::uint32_t width, std::uint32_t degree, Quant pivotQ,
                       const char* contradiction) {
  const Quant keptQ = pivotQ;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& st = steps[i];
    std::uint32_t id = firstId + static_cast<std::uint32_t>(i);
    if (st.premA < 1 || st.premA >= id || st.premB < 1 || st.premB >= id) return invalid("dangling premise" + at(i, id));
    if (!st.pivot.isSentinel() && (!inst.isBound(st.pivot.var) || inst.quant(st.pivot.var) != pivotQ))
      return invalid("pivot quantifier" + at(i, id));
    Clause merged = merge(items[st.premA - 1], items[st.premB - 1], st.pivot);
    if (isTautology(merged)) return invalid(std::string(contradiction) + at(i, id));
    if (merged.size() > width) return invalid("width exceeded" + at(i, id));
    Clause removed = sortedUnique(st.removed);
    if (removed.size() > degree) return invalid("degree exceeded" + at(i, id));
    Clause result;
    for (auto l : merged)
      if (!contains(removed, l)) result.push_back(l);
    for (auto r : removed) {
      if (!contains(merged, r)) return invalid("removed literal absent" + at(i, id));
      if (!inst.isBound(r.var) || inst.quant(r.var) == keptQ) return invalid("reduced literal quantifier" + at(i, id));
      for (auto k : result)
        if (inst.quant(k.var) == keptQ && inst.rank(k.var) > inst.rank(r.var))
          return invalid("reduction order violation" + at(i, id));
    }
    items.push_back(std::move(result));
  }
  return valid();
}

}  // namespace

bool evalQbf(const QbfInstance& inst) {
  if (inst.numVars() > kEvalVarCap) throw std::invalid_argument("instance above the evaluation cap");
  Assign a(inst.numVars() + 1, -1);
  return Expander(inst, inst.matrix()).eval(0, a);
}

bool evalCnf(const std::vector<Clause>& cnf, const std::vector<bool>& assignment) {
  for (const auto& c : cnf) {
    bool sat = false;
    for (auto l : c) {
      bool v = l.isSentinel() ? true : assignment.at(l.var);
      if (v == l.pos) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

PlainResult plainCheck(const QbfInstance& inst, const QResTrace& trace) {
  const auto L = static_cast<std::uint32_t>(inst.matrix().size());
  if (trace.kind != TraceKind::QRes) return invalid("not a Q-resolution trace");
  if (trace.firstId != L + 1) return invalid("first derived id does not follow the matrix");
  if (trace.steps.empty()) return invalid("no steps");
  std::vector<Clause> items = inst.matrix();
  for (const auto& c : items)
    if (c.size() > trace.width) return invalid("width below a matrix clause");
  for (const auto& st : trace.steps)
    if (!boundLits(inst, st.removed)) return invalid("unknown literal in removed set");
  auto r = checkSteps(inst, items, trace.steps, L + 1, trace.width, trace.degree, Quant::Exists, "tautological resolvent");
  if (!r) return r;
  if (!items.back().empty()) return invalid("final clause is not empty");
  return valid();
}

PlainResult plainCheck(const QbfInstance& inst, const CubeTrace& trace) {
  const auto& matrix = inst.matrix();
  if (trace.cubes.empty()) return invalid("no initial cubes");
  if (trace.width == 0) return invalid("zero width");
  std::vector<Clause> items;
  for (std::size_t i = 0; i < trace.cubes.size(); ++i) {
    const auto& ic = trace.cubes[i];
    std::string where = " in initial cube " + std::to_string(i + 1);
    if (!boundLits(inst, ic.cube)) return invalid("unknown literal" + where);
    Clause cube = sortedUnique(ic.cube);
    if (isTautology(cube)) return invalid("contradictory cube" + where);
    if (cube.size() > trace.width) return invalid("width exceeded" + where);
    for (std::size_t j = 0; j < matrix.size(); ++j) {
      if (j >= ic.witnesses.size() || !ic.witnesses[j]) return invalid("missing witness" + where);
      Lit w = *ic.witnesses[j];
      if (!contains(matrix[j], w) || !contains(cube, w)) return invalid("witness outside clause or cube" + where);
    }
    items.push_back(std::move(cube));
  }
  for (const auto& st : trace.steps)
    if (!boundLits(inst, st.removed)) return invalid("unknown literal in removed set");
  auto r = checkSteps(inst, items, trace.steps, static_cast<std::uint32_t>(trace.cubes.size()) + 1, trace.width,
                      trace.degree, Quant::Forall, "contradictory resolvent");
  if (!r) return r;
  if (!items.back().empty()) return invalid("final cube is not empty");
  return valid();
}

PlainResult plainWellFormed(const QbfInstance& inst, const Strategy& s) {
  const bool herbrand = s.kind == StrategyKind::Herbrand;
  const Quant outQ = herbrand ? Quant::Forall : Quant::Exists;
  ExtendedCoder coder(inst);
  auto isBase = [&](std::uint32_t v) { return v >= 1 && v <= inst.numVars() && inst.isBound(v); };
  std::set<std::uint32_t> outs;
  for (const auto& g : s.gates) {
    bool aux = g.out > s.baseVars && g.out <= s.baseVars + s.numAux;
    if (!aux && !(isBase(g.out) && inst.quant(g.out) == outQ))
      return invalid("uniqueness: gate output of the wrong class");
    if (!outs.insert(g.out).second) return invalid("uniqueness: variable defined twice");
  }
  std::map<std::uint32_t, std::uint32_t> dep;
  dep[0] = 0;
  for (std::uint32_t v = 1; v <= inst.numVars(); ++v)
    if (isBase(v) && inst.quant(v) != outQ) dep[v] = coder.order(v);
  for (std::size_t i = 0; i < s.gates.size(); ++i) {
    const auto& g = s.gates[i];
    for (Lit in : {g.a, g.b})
      if (!dep.count(in.var)) return invalid("acyclicity: gate " + std::to_string(i + 1) + " reads an undefined input");
    std::uint32_t d = std::max(dep[g.a.var], dep[g.b.var]);
    bool aux = g.out > s.baseVars;
    if (!aux && d > coder.order(g.out)) return invalid("prefix: gate " + std::to_string(i + 1) + " depends on a later variable");
    dep[g.out] = d;
  }
  if (!herbrand)
    for (auto v : inst.varsOf(Quant::Exists))
      if (!outs.count(v)) return invalid("coverage: existential variable without a gate");
  return valid();
}

std::optional<std::vector<std::uint32_t>> evaluationOrder(const Strategy& s) {
  std::map<std::uint32_t, std::size_t> gateOf;
  for (std::size_t i = 0; i < s.gates.size(); ++i) gateOf[s.gates[i].out] = i;
  std::vector<int> state(s.gates.size(), 0);
  std::vector<std::uint32_t> order;
  std::function<bool(std::size_t)> visit = [&](std::size_t i) {
    if (state[i] == 2) return true;
    if (state[i] == 1) return false;
    state[i] = 1;
    for (Lit in : {s.gates[i].a, s.gates[i].b}) {
      auto it = gateOf.find(in.var);
      if (it != gateOf.end() && !visit(it->second)) return false;
    }
    state[i] = 2;
    order.push_back(s.gates[i].out);
    return true;
  };
  for (std::size_t i = 0; i < s.gates.size(); ++i)
    if (!visit(i)) return std::nullopt;
  return order;
}

PlainResult plainCheck(const QbfInstance& inst, const StrategyBundle& bundle) {
  const auto& s = bundle.strategy;
  auto wf = plainWellFormed(inst, s);
  if (!wf) return wf;
  auto axioms = strategyAxioms(inst, s);
  const auto& tr = bundle.proof;
  if (tr.kind != TraceKind::Prop) return invalid("not a propositional trace");
  if (tr.firstId != axioms.size() + 1) return invalid("first derived id does not follow the axioms");
  if (tr.steps.empty()) return invalid("no steps");
  std::vector<Clause> items;
  for (const auto& c : axioms) items.push_back(sortedUnique(c));
  for (std::size_t i = 0; i < tr.steps.size(); ++i) {
    const auto& st = tr.steps[i];
    std::uint32_t id = tr.firstId + static_cast<std::uint32_t>(i);
    if (st.premA < 1 || st.premA >= id || st.premB < 1 || st.premB >= id) return invalid("dangling premise" + at(i, id));
    if (st.pivot.isSentinel()) return invalid("constant pivot" + at(i, id));
    Clause merged = merge(items[st.premA - 1], items[st.premB - 1], st.pivot);
    if (isTautology(merged)) return invalid("tautological resolvent" + at(i, id));
    if (contains(merged, Lit::top())) return invalid("true literal in resolvent" + at(i, id));
    items.push_back(std::move(merged));
  }
  if (!items.back().empty()) return invalid("final clause is not empty");

  // Truth-table cross-check of the substituted strategy.
  const std::uint32_t n = inst.numVars();
  const bool herbrand = s.kind == StrategyKind::Herbrand;
  auto free = inst.varsOf(herbrand ? Quant::Exists : Quant::Forall);
  if (free.size() <= 16) {
    std::vector<bool> val(n + s.numAux + 1, false);
    for (std::uint64_t m = 0; m < (1ULL << free.size()); ++m) {
      std::fill(val.begin(), val.end(), false);
      for (std::size_t i = 0; i < free.size(); ++i) val[free[i]] = (m >> i) & 1;
      auto get = [&](Lit l) { return l.isSentinel() ? l.pos : val[l.var] == l.pos; };
      for (const auto& g : s.gates) val[g.out] = get(g.a) && get(g.b);
      if (evalCnf(inst.originalMatrix(), val) != !herbrand) return invalid("substituted strategy loses");
    }
  }
  return valid();
}

std::optional<QResTrace> searchTinyRefutation(const QbfInstance& inst) {
  if (inst.numVars() > kSearchVarCap || inst.matrix().size() > kSearchClauseCap)
    throw std::invalid_argument("instance above the search cap");
  struct Node {
    Clause c;
    std::uint32_t a = 0, b = 0;
    Lit pivot = Lit::top();
    Clause removed;
    std::size_t merged = 0;
    int level = 0;
  };
  const auto L = static_cast<std::uint32_t>(inst.matrix().size());
  std::vector<Node> nodes;
  for (const auto& c : inst.matrix()) nodes.push_back({c, 0, 0, Lit::top(), {}, c.size(), 0});
  auto reduce = [&](const Clause& merged, Clause& removed) {
    std::uint32_t inner = 0;
    for (auto l : merged)
      if (inst.isExistential(l.var)) inner = std::max(inner, inst.rank(l.var));
    Clause out;
    for (auto l : merged) (inst.isUniversal(l.var) && inst.rank(l.var) > inner ? removed : out).push_back(l);
    return out;
  };
  std::optional<std::size_t> empty;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].c.empty()) {
      Node copy{{}, static_cast<std::uint32_t>(i + 1), static_cast<std::uint32_t>(i + 1), Lit::top(), {}, 0, 1};
      nodes.push_back(copy);
      empty = nodes.size() - 1;
      break;
    }
  for (int level = 1; !empty; ++level) {
    std::vector<Node> fresh;
    auto known = [&](const Clause& c) {
      for (const auto& n : nodes)
        if (subsetOf(n.c, c)) return true;
      for (const auto& n : fresh)
        if (subsetOf(n.c, c)) return true;
      return false;
    };
    for (std::size_t i = 0; i < nodes.size() && !empty; ++i) {
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (std::max(nodes[i].level, nodes[j].level) != level - 1) continue;
        for (auto p : nodes[i].c) {
          if (!inst.isExistential(p.var) || !contains(nodes[j].c, ~p)) continue;
          Clause merged = merge(nodes[i].c, nodes[j].c, p);
          if (isTautology(merged)) continue;
          Clause removed;
          Clause res = reduce(merged, removed);
          if (known(res)) continue;
          fresh.push_back({res, static_cast<std::uint32_t>(i + 1), static_cast<std::uint32_t>(j + 1), p, removed,
                           merged.size(), level});
          if (res.empty()) break;
        }
        if (!fresh.empty() && fresh.back().c.empty()) {
          empty = nodes.size() + fresh.size() - 1;
          break;
        }
      }
    }
    if (fresh.empty()) return std::nullopt;
    for (auto& n : fresh) nodes.push_back(std::move(n));
  }

  // Keep the derivations the empty clause depends on.
  std::set<std::size_t> used;
  std::vector<std::size_t> stack{*empty};
  while (!stack.empty()) {
    auto k = stack.back();
    stack.pop_back();
    if (k < L || !used.insert(k).second) continue;
    stack.push_back(nodes[k].a - 1);
    stack.push_back(nodes[k].b - 1);
  }
  std::map<std::size_t, std::uint32_t> newId;
  for (std::uint32_t i = 0; i < L; ++i) newId[i] = i + 1;
  QResTrace t;
  t.kind = TraceKind::QRes;
  t.firstId = L + 1;
  std::size_t width = 1, degree = 0;
  for (const auto& c : inst.matrix()) width = std::max(width, c.size());
  for (auto k : used) {
    newId[k] = L + 1 + static_cast<std::uint32_t>(t.steps.size());
    const auto& n = nodes[k];
    t.steps.push_back({newId[n.a - 1], newId[n.b - 1], n.pivot, n.removed});
    width = std::max(width, n.merged);
    degree = std::max(degree, n.removed.size());
  }
  t.width = static_cast<std::uint32_t>(width);
  t.degree = static_cast<std::uint32_t>(degree);
  return t;
}

std::optional<CubeTrace> searchTinyCubeProof(const QbfInstance& inst) {
  if (inst.numVars() > kSearchVarCap || inst.matrix().size() > kSearchClauseCap)
    throw std::invalid_argument("instance above the search cap");
  const auto& matrix = inst.matrix();
  auto hitsAll = [&](const Clause& cube) {
    for (const auto& c : matrix) {
      bool hit = false;
      for (auto l : c) hit = hit || contains(cube, l);
      if (!hit) return false;
    }
    return true;
  };
  // Implicants shrunk from the models of the matrix, universals dropped first.
  auto order = inst.orderedVars();
  std::vector<std::uint32_t> dropOrder;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if (inst.isUniversal(*it)) dropOrder.push_back(*it);
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if (inst.isExistential(*it)) dropOrder.push_back(*it);
  std::vector<Clause> cubes;
  for (std::uint64_t m = 0; m < (1ULL << order.size()); ++m) {
    Clause cube;
    for (std::size_t i = 0; i < order.size(); ++i) cube.push_back(Lit{order[i], ((m >> i) & 1) != 0});
    cube = sortedUnique(cube);
    if (!hitsAll(cube)) continue;
    for (auto v : dropOrder) {
      Clause smaller;
      for (auto l : cube)
        if (l.var != v) smaller.push_back(l);
      if (hitsAll(smaller)) cube = smaller;
    }
    if (std::find(cubes.begin(), cubes.end(), cube) == cubes.end()) cubes.push_back(cube);
  }
  if (cubes.empty()) return std::nullopt;

  struct Node {
    Clause c;
    std::uint32_t a = 0, b = 0;  // node indices + 1; 0 for initial cubes
    Lit pivot = Lit::top();
    Clause removed;
    std::size_t merged = 0;
    int level = 0;
  };
  auto reduce = [&](const Clause& merged, Clause& removed) {
    std::uint32_t inner = 0;
    for (auto l : merged)
      if (inst.isUniversal(l.var)) inner = std::max(inner, inst.rank(l.var));
    Clause out;
    for (auto l : merged) (inst.isExistential(l.var) && inst.rank(l.var) > inner ? removed : out).push_back(l);
    return out;
  };
  const std::size_t I = cubes.size();
  std::vector<Node> nodes;
  for (const auto& c : cubes) nodes.push_back({c, 0, 0, Lit::top(), {}, c.size(), -1});
  std::optional<std::size_t> empty;
  for (std::size_t i = 0; i < I; ++i) {
    Clause removed;
    Clause r = reduce(cubes[i], removed);
    bool dup = false;
    for (std::size_t k = I; k < nodes.size(); ++k) dup = dup || subsetOf(nodes[k].c, r);
    if (dup) continue;
    nodes.push_back({r, static_cast<std::uint32_t>(i + 1), static_cast<std::uint32_t>(i + 1), Lit::top(), removed,
                     cubes[i].size(), 0});
    if (r.empty()) {
      empty = nodes.size() - 1;
      break;
    }
  }
  for (int level = 1; !empty; ++level) {
    std::vector<Node> fresh;
    auto known = [&](const Clause& c) {
      for (std::size_t k = I; k < nodes.size(); ++k)
        if (subsetOf(nodes[k].c, c)) return true;
      for (const auto& n : fresh)
        if (subsetOf(n.c, c)) return true;
      return false;
    };
    for (std::size_t i = I; i < nodes.size() && !empty; ++i) {
      for (std::size_t j = I; j < nodes.size(); ++j) {
        if (std::max(nodes[i].level, nodes[j].level) != level - 1) continue;
        for (auto p : nodes[i].c) {
          if (!inst.isUniversal(p.var) || !contains(nodes[j].c, ~p)) continue;
          Clause merged = merge(nodes[i].c, nodes[j].c, p);
          if (isTautology(merged)) continue;
          Clause removed;
          Clause res = reduce(merged, removed);
          if (known(res)) continue;
          fresh.push_back({res, static_cast<std::uint32_t>(i + 1), static_cast<std::uint32_t>(j + 1), p, removed,
                           merged.size(), level});
          if (res.empty()) break;
        }
        if (!fresh.empty() && fresh.back().c.empty()) {
          empty = nodes.size() + fresh.size() - 1;
          break;
        }
      }
    }
    if (fresh.empty()) return std::nullopt;
    for (auto& n : fresh) nodes.push_back(std::move(n));
  }

  std::set<std::size_t> usedCubes, usedSteps;
  std::vector<std::size_t> stack{*empty};
  while (!stack.empty()) {
    auto k = stack.back();
    stack.pop_back();
    if (k < I) {
      usedCubes.insert(k);
      continue;
    }
    if (!usedSteps.insert(k).second) continue;
    stack.push_back(nodes[k].a - 1);
    stack.push_back(nodes[k].b - 1);
  }
  CubeTrace t;
  std::map<std::size_t, std::uint32_t> newId;
  std::size_t width = 1, degree = 0;
  for (auto k : usedCubes) {
    newId[k] = static_cast<std::uint32_t>(t.cubes.size() + 1);
    InitialCube ic;
    ic.cube = cubes[k];
    for (const auto& c : matrix) {
      std::optional<Lit> w;
      for (auto l : c)
        if (!w && contains(ic.cube, l)) w = l;
      ic.witnesses.push_back(w);
    }
    width = std::max(width, ic.cube.size());
    t.cubes.push_back(std::move(ic));
  }
  for (auto k : usedSteps) {
    newId[k] = static_cast<std::uint32_t>(t.cubes.size() + t.steps.size() + 1);
    const auto& n = nodes[k];
    t.steps.push_back({newId[n.a - 1], newId[n.b - 1], n.pivot, n.removed});
    width = std::max(width, n.merged);
    degree = std::max(degree, n.removed.size());
  }
  t.width = static_cast<std::uint32_t>(width);
  t.degree = static_cast<std::uint32_t>(degree);
  return t;
}

namespace {

class Refuter {
public:
  explicit Refuter(const std::vector<Clause>& cnf) {
    std::uint32_t maxVar = 1;
    for (const auto& c : cnf) {
      clauses_.push_back(sortedUnique(c));
      for (auto l : c) maxVar = std::max(maxVar, l.var);
    }
    firstId_ = static_cast<std::uint32_t>(cnf.size()) + 1;
    for (std::size_t i = 0; i < clauses_.size(); ++i) {
      const auto& c = clauses_[i];
      bool skip = isTautology(c) || contains(c, Lit::top());
      if (!skip) active_.push_back(static_cast<std::uint32_t>(i + 1));
      known_.emplace(c, static_cast<std::uint32_t>(i + 1));
    }
    val_.assign(maxVar + 1, -1);
    reason_.assign(maxVar + 1, 0);
    numVars_ = maxVar;
  }

  std::optional<QResTrace> run() {
    auto d = solve();
    if (!d) return std::nullopt;
    if (!clauses_[*d - 1].empty()) return std::nullopt;
    if (*d >= firstId_) {
      steps_.resize(*d - firstId_ + 1);
    } else {
      steps_.clear();
      clauses_.resize(firstId_ - 1);
      derive(*d, *d, Lit{1, true});
    }
    QResTrace t;
    t.kind = TraceKind::Prop;
    t.firstId = firstId_;
    t.steps = steps_;
    std::size_t w = 1;
    for (const auto& c : clauses_) w = std::max(w, c.size());
    t.width = static_cast<std::uint32_t>(w);
    return t;
  }

private:
  // premA holds the pivot, premB its complement.
  std::uint32_t derive(std::uint32_t a, std::uint32_t b, Lit p) {
    Clause m = merge(clauses_[a - 1], clauses_[b - 1], p);
    auto it = known_.find(m);
    if (it != known_.end() && (!m.empty() || !steps_.empty())) return it->second;
    steps_.push_back({a, b, p, {}});
    clauses_.push_back(m);
    auto id = static_cast<std::uint32_t>(clauses_.size());
    known_[m] = id;
    return id;
  }

  int value(Lit l) const { return litValue(val_, l); }

  void assign(Lit l, std::uint32_t reason) {
    val_[l.var] = l.pos ? 1 : 0;
    reason_[l.var] = reason;
    trail_.push_back(l);
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      val_[trail_.back().var] = -1;
      reason_[trail_.back().var] = 0;
      trail_.pop_back();
    }
  }

  std::uint32_t propagate() {
    for (bool changed = true; changed;) {
      changed = false;
      for (auto id : active_) {
        const auto& c = clauses_[id - 1];
        bool sat = false;
        int open = 0;
        Lit last{};
        for (auto l : c) {
          int v = value(l);
          if (v == 1) {
            sat = true;
            break;
          }
          if (v < 0) {
            ++open;
            last = l;
          }
        }
        if (sat) continue;
        if (open == 0) return id;
        if (open == 1) {
          assign(last, id);
          changed = true;
        }
      }
    }
    return 0;
  }

  std::uint32_t analyze(std::uint32_t conflict) {
    std::uint32_t d = conflict;
    for (std::size_t i = trail_.size(); i-- > 0;) {
      Lit l = trail_[i];
      std::uint32_t r = reason_[l.var];
      if (r == 0 || !contains(clauses_[d - 1], ~l)) continue;
      d = derive(r, d, l);
    }
    return d;
  }

  std::optional<std::uint32_t> solve() {
    std::size_t mark = trail_.size();
    if (auto conflict = propagate()) {
      auto d = analyze(conflict);
      undo(mark);
      return d;
    }
    std::uint32_t v = 0;
    for (std::uint32_t x = 1; x <= numVars_ && !v; ++x)
      if (val_[x] < 0) v = x;
    if (!v) {
      undo(mark);
      return std::nullopt;
    }
    std::optional<std::uint32_t> branch[2];
    for (int b = 1; b >= 0; --b) {
      Lit dec{v, b == 1};
      std::size_t inner = trail_.size();
      assign(dec, 0);
      branch[b] = solve();
      undo(inner);
      if (!branch[b]) {
        undo(mark);
        return std::nullopt;
      }
      if (!contains(clauses_[*branch[b] - 1], ~dec)) {
        undo(mark);
        return branch[b];
      }
    }
    undo(mark);
    return derive(*branch[1], *branch[0], Lit{v, false});
  }

  std::vector<Clause> clauses_;
  std::vector<std::uint32_t> active_;
  std::map<Clause, std::uint32_t> known_;
  std::vector<ResStep> steps_;
  std::uint32_t firstId_ = 1;
  std::uint32_t numVars_ = 0;
  Assign val_;
  std::vector<std::uint32_t> reason_;
  std::vector<Lit> trail_;
};

// And-gate circuit for a truth table over `deps` (bit i of the key is deps[i]); the last gate defines `out`.
void synthesize(Strategy& s, std::uint32_t out, std::vector<std::uint32_t> deps, std::vector<bool> table) {
  for (std::size_t i = deps.size(); i-- > 0;) {
    bool matters = false;
    for (std::size_t k = 0; k < table.size() && !matters; ++k) matters = table[k] != table[k ^ (1ULL << i)];
    if (matters) continue;
    std::vector<bool> smaller;
    for (std::size_t k = 0; k < table.size(); ++k)
      if (!((k >> i) & 1)) smaller.push_back(table[k]);
    table = std::move(smaller);
    deps.erase(deps.begin() + static_cast<long>(i));
  }
  std::vector<std::size_t> ones, zeros;
  for (std::size_t k = 0; k < table.size(); ++k) (table[k] ? ones : zeros).push_back(k);
  if (ones.empty() || zeros.empty()) {
    Lit c = ones.empty() ? Lit::bottom() : Lit::top();
    s.gates.push_back({out, c, c});
    return;
  }
  auto fresh = [&] { return s.baseVars + ++s.numAux; };
  auto conj = [&](std::vector<Lit> lits, std::optional<std::uint32_t> target) -> Lit {
    if (lits.size() == 1 && !target) return lits[0];
    if (lits.size() == 1) {
      s.gates.push_back({*target, lits[0], lits[0]});
      return Lit{*target, true};
    }
    Lit acc = lits[0];
    for (std::size_t i = 1; i < lits.size(); ++i) {
      std::uint32_t v = (i + 1 == lits.size() && target) ? *target : fresh();
      s.gates.push_back({v, acc, lits[i]});
      acc = Lit{v, true};
    }
    return acc;
  };
  bool useOnes = ones.size() <= zeros.size();
  std::vector<Lit> terms;
  for (auto k : useOnes ? ones : zeros) {
    std::vector<Lit> lits;
    for (std::size_t i = 0; i < deps.size(); ++i) lits.push_back(Lit{deps[i], ((k >> i) & 1) != 0});
    terms.push_back(~conj(lits, std::nullopt));
  }
  if (!useOnes) {
    conj(terms, out);
    return;
  }
  Lit none = conj(terms, std::nullopt);
  s.gates.push_back({out, ~none, ~none});
}

}  // namespace

std::optional<QResTrace> refuteCnf(const std::vector<Clause>& cnf) { return Refuter(cnf).run(); }

StrategyBundle synthesizeStrategy(const QbfInstance& inst) {
  bool truth = evalQbf(inst);
  Strategy s;
  s.kind = truth ? StrategyKind::Skolem : StrategyKind::Herbrand;
  s.baseVars = inst.numVars();
  const Quant mine = truth ? Quant::Exists : Quant::Forall;
  Expander ex(inst, inst.originalMatrix());
  const auto& order = ex.order();
  std::map<std::uint32_t, std::vector<std::uint32_t>> deps;
  std::map<std::uint32_t, std::vector<bool>> tables;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (inst.quant(order[i]) != mine) continue;
    std::vector<std::uint32_t> d;
    for (std::size_t j = 0; j < i; ++j)
      if (inst.quant(order[j]) != mine) d.push_back(order[j]);
    deps[order[i]] = d;
    tables[order[i]].assign(1ULL << d.size(), false);
  }
  Assign a(inst.numVars() + 1, -1);
  std::function<void(std::size_t)> walk = [&](std::size_t i) {
    if (i == order.size()) return;
    auto v = order[i];
    if (inst.quant(v) == mine) {
      a[v] = 1;
      bool pick = ex.eval(i + 1, a) == truth;
      a[v] = pick ? 1 : 0;
      std::size_t key = 0;
      const auto& d = deps[v];
      for (std::size_t j = 0; j < d.size(); ++j)
        if (a[d[j]] == 1) key |= 1ULL << j;
      tables[v][key] = pick;
      walk(i + 1);
      a[v] = -1;
      return;
    }
    for (int b = 0; b < 2; ++b) {
      a[v] = static_cast<signed char>(b);
      walk(i + 1);
    }
    a[v] = -1;
  };
  walk(0);
  for (auto v : order)
    if (inst.quant(v) == mine) synthesize(s, v, deps[v], tables[v]);
  StrategyBundle b;
  b.strategy = s;
  auto proof = refuteCnf(strategyAxioms(inst, s));
  if (!proof) throw std::logic_error("synthesized strategy does not refute its composed formula");
  b.proof = *proof;
  return b;
}

QbfInstance randomQbf(std::mt19937_64& rng, const RandomShape& shape) {
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng); };
  auto n = static_cast<std::uint32_t>(pick(1, shape.maxVars));
  auto nb = static_cast<std::uint32_t>(pick(1, std::min(shape.maxBlocks, n)));
  std::vector<std::uint32_t> vars(n);
  for (std::uint32_t i = 0; i < n; ++i) vars[i] = i + 1;
  std::shuffle(vars.begin(), vars.end(), rng);
  std::vector<std::size_t> cuts;
  while (cuts.size() + 1 < nb) {
    auto c = pick(1, n - 1);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(n);
  bool uni = pick(0, 1) == 1;
  std::ostringstream os;
  auto m = pick(1, shape.maxClauses);
  os << "p cnf " << n << ' ' << m << '\n';
  std::size_t start = 0;
  for (auto c : cuts) {
    os << (uni ? 'a' : 'e');
    for (std::size_t i = start; i < c; ++i) os << ' ' << vars[i];
    os << " 0\n";
    start = c;
    uni = !uni;
  }
  for (std::uint64_t k = 0; k < m; ++k) {
    auto len = pick(1, std::min<std::size_t>(shape.maxClauseLen, n));
    std::vector<std::uint32_t> pool(vars);
    std::shuffle(pool.begin(), pool.end(), rng);
    for (std::size_t i = 0; i < len; ++i) os << (pick(0, 1) ? "" : "-") << pool[i] << ' ';
    os << "0\n";
  }
  return parseQdimacs(os.str());
}

}  // namespace zkq
