#include "zkqbf/qbf.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace zkq {

namespace {

using Kind = QdimacsError::Kind;

std::vector<std::string_view> splitWords(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool toLong(std::string_view s, long& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

}  // namespace

QbfInstance::QbfInstance(std::uint32_t numVars, std::vector<Block> blocks, std::vector<Clause> matrix,
                         std::optional<std::vector<Clause>> original)
    : numVars_(numVars), blocks_(std::move(blocks)), matrix_(std::move(matrix)) {
  original_ = original ? std::move(*original) : matrix_;
  if (original_.size() != matrix_.size()) throw std::invalid_argument("original matrix of a different length");
  rank_.assign(numVars_ + 1, 0);
  quant_.assign(numVars_ + 1, Quant::Exists);
  std::uint32_t next = 1;
  for (auto& b : blocks_) {
    std::sort(b.vars.begin(), b.vars.end());
    for (auto v : b.vars) {
      if (v == 0 || v > numVars_) throw QdimacsError(Kind::VarOutOfRange, "variable out of range");
      if (rank_[v]) throw QdimacsError(Kind::DuplicateQuantification, "variable quantified twice");
      rank_[v] = next++;
      quant_[v] = b.q;
    }
  }
  ranked_ = next - 1;
}

bool QbfInstance::isBound(std::uint32_t var) const {
  return var == 0 || (var <= numVars_ && rank_[var] != 0);
}

std::uint32_t QbfInstance::rank(std::uint32_t var) const {
  if (var == 0) return 0;
  if (var > numVars_ || rank_[var] == 0)
    throw std::out_of_range("unknown variable " + std::to_string(var));
  return rank_[var];
}

Quant QbfInstance::quant(std::uint32_t var) const {
  rank(var);
  return quant_[var];
}

std::vector<std::uint32_t> QbfInstance::orderedVars() const {
  std::vector<std::uint32_t> out;
  for (const auto& b : blocks_) out.insert(out.end(), b.vars.begin(), b.vars.end());
  return out;
}

std::vector<std::uint32_t> QbfInstance::varsOf(Quant q) const {
  std::vector<std::uint32_t> out;
  for (const auto& b : blocks_)
    if (b.q == q) out.insert(out.end(), b.vars.begin(), b.vars.end());
  return out;
}

Clause sortedUnique(Clause c) {
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

bool isTautology(const Clause& c) {
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      if (c[i].var == c[j].var && c[i].pos != c[j].pos) return true;
  return false;
}

Clause reduceUniversal(const QbfInstance& inst, const Clause& c) {
  std::uint32_t maxE = 0;
  for (auto l : c)
    if (!l.isSentinel() && inst.isExistential(l.var)) maxE = std::max(maxE, inst.rank(l.var));
  Clause out;
  for (auto l : c) {
    if (!l.isSentinel() && inst.isUniversal(l.var) && inst.rank(l.var) > maxE) continue;
    out.push_back(l);
  }
  return out;
}

QbfInstance parseQdimacs(std::string_view text) {
  long numVars = -1, numClauses = -1;
  std::vector<Block> blocks;
  std::vector<Clause> raw;
  Clause cur;
  bool inClauses = false;
  std::size_t lineNo = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineNo;
    auto words = splitWords(line);
    if (words.empty() || words[0] == "c" || words[0][0] == 'c') continue;
    std::string where = " (line " + std::to_string(lineNo) + ")";
    if (words[0] == "p") {
      if (numVars >= 0) throw QdimacsError(Kind::MalformedHeader, "duplicate header" + where);
      if (words.size() != 4 || words[1] != "cnf" || !toLong(words[2], numVars) ||
          !toLong(words[3], numClauses) || numVars < 0 || numClauses < 0)
        throw QdimacsError(Kind::MalformedHeader, "malformed header" + where);
      continue;
    }
    if (numVars < 0) throw QdimacsError(Kind::MalformedHeader, "missing header" + where);
    if (words[0] == "a" || words[0] == "e") {
      if (inClauses || !cur.empty())
        throw QdimacsError(Kind::Syntax, "quantifier line after clauses" + where);
      Block b{words[0] == "a" ? Quant::Forall : Quant::Exists, {}};
      bool closed = false;
      for (std::size_t i = 1; i < words.size(); ++i) {
        long v;
        if (!toLong(words[i], v) || v < 0) throw QdimacsError(Kind::Syntax, "bad variable" + where);
        if (closed) throw QdimacsError(Kind::Syntax, "tokens after terminating 0" + where);
        if (v == 0) {
          closed = true;
          continue;
        }
        if (v > numVars) throw QdimacsError(Kind::VarOutOfRange, "variable out of range" + where);
        b.vars.push_back(static_cast<std::uint32_t>(v));
      }
      if (!closed) throw QdimacsError(Kind::Syntax, "quantifier line not terminated" + where);
      if (b.vars.empty()) continue;
      if (!blocks.empty() && blocks.back().q == b.q)
        blocks.back().vars.insert(blocks.back().vars.end(), b.vars.begin(), b.vars.end());
      else
        blocks.push_back(std::move(b));
      continue;
    }
    inClauses = true;
    for (auto w : words) {
      long v;
      if (!toLong(w, v)) throw QdimacsError(Kind::Syntax, "bad literal" + where);
      if (v == 0) {
        raw.push_back(std::move(cur));
        cur.clear();
        continue;
      }
      if (v > numVars || -v > numVars)
        throw QdimacsError(Kind::VarOutOfRange, "variable out of range" + where);
      cur.push_back(Lit::fromDimacs(v));
    }
  }
  if (numVars < 0) throw QdimacsError(Kind::MalformedHeader, "missing header");
  if (!cur.empty()) throw QdimacsError(Kind::Syntax, "unterminated clause");
  if (static_cast<long>(raw.size()) != numClauses)
    throw QdimacsError(Kind::MalformedHeader, "clause count does not match header");

  // Duplicate quantification is detected before the implicit block is built.
  {
    std::vector<char> seen(static_cast<std::size_t>(numVars) + 1, 0);
    for (const auto& b : blocks)
      for (auto v : b.vars) {
        if (seen[v]) throw QdimacsError(Kind::DuplicateQuantification,
                                        "variable " + std::to_string(v) + " quantified twice");
        seen[v] = 1;
      }
    std::vector<std::uint32_t> free;
    for (const auto& c : raw)
      for (auto l : c)
        if (!seen[l.var]) {
          seen[l.var] = 1;
          free.push_back(l.var);
        }
    if (!free.empty()) {
      if (!blocks.empty() && blocks.front().q == Quant::Exists)
        blocks.front().vars.insert(blocks.front().vars.end(), free.begin(), free.end());
      else
        blocks.insert(blocks.begin(), Block{Quant::Exists, free});
    }
  }
  QbfInstance prefixOnly(static_cast<std::uint32_t>(numVars), blocks, {});
  std::vector<Clause> matrix, original;
  matrix.reserve(raw.size());
  for (auto& c : raw) {
    Clause u = sortedUnique(std::move(c));
    if (isTautology(u)) throw QdimacsError(Kind::Tautology, "tautological clause " + toString(u));
    matrix.push_back(reduceUniversal(prefixOnly, u));
    original.push_back(std::move(u));
  }
  return QbfInstance(static_cast<std::uint32_t>(numVars), std::move(blocks), std::move(matrix), std::move(original));
}

std::string serializeQdimacs(const QbfInstance& inst) {
  std::ostringstream os;
  os << "p cnf " << inst.numVars() << ' ' << inst.matrix().size() << '\n';
  for (const auto& b : inst.blocks()) {
    os << (b.q == Quant::Forall ? 'a' : 'e');
    for (auto v : b.vars) os << ' ' << v;
    os << " 0\n";
  }
  for (const auto& c : inst.originalMatrix()) {
    for (auto l : sortedUnique(c)) os << l.dimacs() << ' ';
    os << "0\n";
  }
  return os.str();
}

Elem encodeLiteral(const QbfInstance& inst, Lit lit) {
  return literalCode(inst.rank(lit.var), lit.pos);
}

std::vector<Elem> clauseCodes(const QbfInstance& inst, const Clause& c) {
  std::vector<Elem> out;
  out.reserve(c.size());
  for (auto l : c) {
    Elem code = encodeLiteral(inst, l);
    if (code != 0) out.push_back(code);
  }
  return out;
}

Poly padPoly(const Field& f, const std::vector<Elem>& codes, std::size_t width) {
  if (codes.size() > width) throw std::invalid_argument("clause wider than padded width");
  std::vector<Elem> roots = codes;
  roots.resize(width, 0);
  return poly::fromRoots(f, roots);
}

Poly clausePoly(const Field& f, const QbfInstance& inst, const Clause& c, std::size_t width) {
  return padPoly(f, clauseCodes(inst, c), width);
}

std::vector<Elem> literalSet(const QbfInstance& inst, Quant q) {
  std::vector<Elem> out;
  for (auto v : inst.varsOf(q)) {
    out.push_back(literalCode(inst.rank(v), true));
    out.push_back(literalCode(inst.rank(v), false));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint32_t ExtendedCoder::order(std::uint32_t var) const {
  if (var <= inst_->numVars()) return inst_->rank(var);
  return inst_->rankedCount() + (var - inst_->numVars());
}

std::vector<Elem> ExtendedCoder::codes(const Clause& c) const {
  std::vector<Elem> out;
  out.reserve(c.size());
  for (auto l : c) {
    Elem code = this->code(l);
    if (code != 0) out.push_back(code);
  }
  return out;
}

std::string toString(const Clause& c) {
  std::string s = "(";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += ' ';
    if (c[i].isSentinel())
      s += c[i].pos ? "T" : "-T";
    else
      s += std::to_string(c[i].dimacs());
  }
  return s + ")";
}

}  // namespace zkq
