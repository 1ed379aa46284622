#include "repwb/group.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>

#include "repwb/errors.hpp"

namespace repwb {

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::finite_table: return "finite-table";
    case GroupKind::free: return "free";
    case GroupKind::fg_abelian: return "fg-abelian";
    case GroupKind::rewriting: return "rewriting-presented";
    case GroupKind::coordinate: return "coordinate";
  }
  return "?";
}

std::size_t ElementHash::operator()(const Element& e) const noexcept {
  std::size_t h = static_cast<std::size_t>(e.kind()) * 0x9e3779b97f4a7c15ULL;
  for (auto x : e.payload()) {
    h ^= std::hash<std::int64_t>{}(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

namespace {

std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  auto r = a % m;
  return r < 0 ? r + m : r;
}

bool ends_with(const Word& w, const Word& suffix) {
  return w.size() >= suffix.size() && std::equal(suffix.rbegin(), suffix.rend(), w.rbegin());
}

void check_letters(const Word& w, int rank, const char* what) {
  for (auto x : w) {
    if (x == 0 || x > rank || x < -rank) {
      throw StructuralError(std::string(what) + ": letter " + std::to_string(x) + " outside alphabet +-1..+-" +
                            std::to_string(rank));
    }
  }
}

std::vector<std::int64_t> parse_ints(const std::string& text) {
  std::vector<std::int64_t> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw StructuralError("empty entry in element string '" + text + "'");
    item = item.substr(b, e - b + 1);
    std::size_t used = 0;
    std::int64_t v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      throw StructuralError("cannot parse integer '" + item + "' in element string '" + text + "'");
    }
    if (used != item.size()) throw StructuralError("trailing characters in element string '" + text + "'");
    out.push_back(v);
  }
  return out;
}

std::string join_ints(const std::vector<std::int64_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

}  // namespace

GroupOracle GroupOracle::free(int rank) {
  if (rank < 0) throw PreconditionError("free group rank must be >= 0");
  GroupOracle g;
  g.kind_ = GroupKind::free;
  g.rank_ = rank;
  for (int i = 1; i <= rank; ++i) g.generators_.emplace_back(GroupKind::free, Word{i});
  g.finish_generators(true);
  return g;
}

GroupOracle GroupOracle::fg_abelian(std::vector<std::int64_t> torsion, std::vector<Element> generators) {
  GroupOracle g;
  g.kind_ = GroupKind::fg_abelian;
  for (auto t : torsion) {
    if (t < 0 || t == 1) throw PreconditionError("torsion entries must be 0 (free) or >= 2");
  }
  g.rank_ = static_cast<int>(torsion.size());
  g.torsion_ = std::move(torsion);
  std::vector<Element> standard;
  for (int i = 0; i < g.rank_; ++i) {
    std::vector<std::int64_t> v(g.rank_, 0);
    v[i] = 1;
    standard.emplace_back(GroupKind::fg_abelian, v);
  }
  if (generators.empty()) {
    g.generators_ = standard;
  } else {
    for (const auto& s : generators) g.validate(s);
    g.generators_ = std::move(generators);
  }
  g.finish_generators(g.generators_ == standard);
  return g;
}

GroupOracle GroupOracle::finite_table(std::vector<std::vector<std::int64_t>> table, std::vector<Element> generators) {
  const auto n = static_cast<std::int64_t>(table.size());
  if (n == 0) throw PreconditionError("multiplication table is empty");
  for (const auto& row : table) {
    if (static_cast<std::int64_t>(row.size()) != n) throw PreconditionError("multiplication table is not square");
    for (auto x : row) {
      if (x < 0 || x >= n) throw PreconditionError("multiplication table entry out of range");
    }
  }
  std::int64_t e = -1;
  for (std::int64_t i = 0; i < n && e < 0; ++i) {
    bool ok = true;
    for (std::int64_t j = 0; j < n && ok; ++j) ok = table[i][j] == j && table[j][i] == j;
    if (ok) e = i;
  }
  if (e < 0) throw PreconditionError("multiplication table has no identity");
  for (std::int64_t i = 0; i < n; ++i) {
    bool has_inverse = false;
    for (std::int64_t j = 0; j < n && !has_inverse; ++j) has_inverse = table[i][j] == e && table[j][i] == e;
    if (!has_inverse) throw PreconditionError("element " + std::to_string(i) + " has no inverse in the table");
  }
  for (std::int64_t a = 0; a < n; ++a) {
    for (std::int64_t b = 0; b < n; ++b) {
      for (std::int64_t c = 0; c < n; ++c) {
        if (table[table[a][b]][c] != table[a][table[b][c]]) {
          throw PreconditionError("multiplication table is not associative at (" + std::to_string(a) + "," +
                                  std::to_string(b) + "," + std::to_string(c) + ")");
        }
      }
    }
  }
  GroupOracle g;
  g.kind_ = GroupKind::finite_table;
  g.table_ = std::move(table);
  g.table_identity_ = e;
  for (const auto& s : generators) {
    g.validate(s);
  }
  g.generators_ = std::move(generators);
  g.finish_generators(false);

  // Shortest words for every reachable element (right multiplication BFS).
  g.table_words_.assign(static_cast<std::size_t>(n), Word{});
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::deque<std::int64_t> queue{e};
  seen[static_cast<std::size_t>(e)] = true;
  while (!queue.empty()) {
    auto x = queue.front();
    queue.pop_front();
    for (std::size_t k = 0; k < g.generators_.size(); ++k) {
      for (int sign : {1, -1}) {
        auto s = sign > 0 ? g.generators_[k] : g.invert(g.generators_[k]);
        auto y = g.table_[static_cast<std::size_t>(x)][static_cast<std::size_t>(s.payload()[0])];
        if (!seen[static_cast<std::size_t>(y)]) {
          seen[static_cast<std::size_t>(y)] = true;
          auto w = g.table_words_[static_cast<std::size_t>(x)];
          w.push_back(sign * static_cast<std::int64_t>(k + 1));
          g.table_words_[static_cast<std::size_t>(y)] = std::move(w);
          queue.push_back(y);
        }
      }
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw PreconditionError("generators do not generate the finite group");
  }
  return g;
}

GroupOracle GroupOracle::rewriting(int rank, std::vector<RewriteRule> rules) {
  if (rank < 0) throw PreconditionError("rewriting rank must be >= 0");
  GroupOracle g;
  g.kind_ = GroupKind::rewriting;
  g.rank_ = rank;
  for (const auto& r : rules) {
    if (r.lhs.empty()) throw PreconditionError("rewriting rule with empty left-hand side");
    check_letters(r.lhs, rank, "rewriting rule");
    check_letters(r.rhs, rank, "rewriting rule");
  }
  g.rules_ = std::move(rules);
  for (int i = 1; i <= rank; ++i) {
    for (std::int64_t letter : {std::int64_t{i}, std::int64_t{-i}}) {
      if (g.normalize(Word{letter}) != Word{letter}) {
        throw PreconditionError("single letters must be irreducible; letter " + std::to_string(letter) + " rewrites");
      }
    }
    g.generators_.emplace_back(GroupKind::rewriting, Word{i});
  }
  g.finish_generators(true);
  return g;
}

void GroupOracle::finish_generators(bool standard) {
  standard_generators_ = standard;
  for (const auto& s : generators_) {
    if (s == identity()) throw PreconditionError("generating set contains the identity");
  }
  symmetric_ = generators_;
  for (const auto& s : generators_) {
    auto inv = invert(s);
    if (std::find(symmetric_.begin(), symmetric_.end(), inv) == symmetric_.end()) symmetric_.push_back(inv);
  }
}

Word GroupOracle::normalize(Word w) const {
  Word out;
  std::deque<std::int64_t> in(w.begin(), w.end());
  std::size_t steps = 0;
  while (!in.empty()) {
    if (++steps > 10'000'000) throw StructuralError("rewriting system did not terminate on input");
    out.push_back(in.front());
    in.pop_front();
    if (out.size() >= 2 && out[out.size() - 1] == -out[out.size() - 2]) {
      out.resize(out.size() - 2);
      continue;
    }
    for (const auto& r : rules_) {
      if (ends_with(out, r.lhs)) {
        out.resize(out.size() - r.lhs.size());
        in.insert(in.begin(), r.rhs.begin(), r.rhs.end());
        break;
      }
    }
  }
  return out;
}

Element GroupOracle::identity() const {
  switch (kind_) {
    case GroupKind::free:
    case GroupKind::rewriting: return {kind_, {}};
    case GroupKind::fg_abelian: return {kind_, std::vector<std::int64_t>(static_cast<std::size_t>(rank_), 0)};
    case GroupKind::finite_table: return {kind_, {table_identity_}};
    case GroupKind::coordinate: break;
  }
  throw StructuralError("coordinate labels have no identity");
}

void GroupOracle::validate(const Element& a) const {
  if (a.kind() != kind_) {
    throw StructuralError("element of kind " + to_string(a.kind()) + " used with a " + to_string(kind_) + " group");
  }
  const auto& p = a.payload();
  switch (kind_) {
    case GroupKind::free:
      check_letters(p, rank_, "free word");
      for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i] == -p[i - 1]) throw StructuralError("free word is not reduced");
      }
      return;
    case GroupKind::rewriting:
      check_letters(p, rank_, "word");
      if (normalize(p) != p) throw StructuralError("word is not in rewriting normal form");
      return;
    case GroupKind::fg_abelian:
      if (p.size() != torsion_.size()) throw StructuralError("abelian element has wrong length");
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (torsion_[i] != 0 && (p[i] < 0 || p[i] >= torsion_[i])) {
          throw StructuralError("torsion coordinate not reduced");
        }
      }
      return;
    case GroupKind::finite_table:
      if (p.size() != 1 || p[0] < 0 || p[0] >= static_cast<std::int64_t>(table_.size())) {
        throw StructuralError("table index out of range");
      }
      return;
    case GroupKind::coordinate: break;
  }
  throw StructuralError("invalid oracle kind");
}

Element GroupOracle::multiply(const Element& a, const Element& b) const {
  validate(a);
  validate(b);
  switch (kind_) {
    case GroupKind::free: {
      Word w = a.payload();
      for (auto x : b.payload()) {
        if (!w.empty() && w.back() == -x) {
          w.pop_back();
        } else {
          w.push_back(x);
        }
      }
      return {kind_, std::move(w)};
    }
    case GroupKind::rewriting: {
      Word w = a.payload();
      w.insert(w.end(), b.payload().begin(), b.payload().end());
      return {kind_, normalize(std::move(w))};
    }
    case GroupKind::fg_abelian: {
      std::vector<std::int64_t> v(a.payload().size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = a.payload()[i] + b.payload()[i];
        if (torsion_[i] != 0) v[i] = floor_mod(v[i], torsion_[i]);
      }
      return {kind_, std::move(v)};
    }
    case GroupKind::finite_table:
      return {kind_,
              {table_[static_cast<std::size_t>(a.payload()[0])][static_cast<std::size_t>(b.payload()[0])]}};
    case GroupKind::coordinate: break;
  }
  throw StructuralError("invalid oracle kind");
}

Element GroupOracle::invert(const Element& a) const {
  validate(a);
  switch (kind_) {
    case GroupKind::free:
    case GroupKind::rewriting: {
      Word w(a.payload().rbegin(), a.payload().rend());
      for (auto& x : w) x = -x;
      return {kind_, kind_ == GroupKind::free ? std::move(w) : normalize(std::move(w))};
    }
    case GroupKind::fg_abelian: {
      std::vector<std::int64_t> v(a.payload().size());
      for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = -a.payload()[i];
        if (torsion_[i] != 0) v[i] = floor_mod(v[i], torsion_[i]);
      }
      return {kind_, std::move(v)};
    }
    case GroupKind::finite_table: {
      const auto& row = table_[static_cast<std::size_t>(a.payload()[0])];
      for (std::size_t j = 0; j < row.size(); ++j) {
        if (row[j] == table_identity_) return {kind_, {static_cast<std::int64_t>(j)}};
      }
      break;
    }
    case GroupKind::coordinate: break;
  }
  throw StructuralError("invalid oracle kind");
}

Word GroupOracle::word_of(const Element& g) const {
  validate(g);
  switch (kind_) {
    case GroupKind::free:
    case GroupKind::rewriting: return g.payload();
    case GroupKind::finite_table: return table_words_[static_cast<std::size_t>(g.payload()[0])];
    case GroupKind::fg_abelian: {
      if (!standard_generators_) {
        throw UnsupportedError("word_of on an abelian group needs the standard generators");
      }
      Word w;
      for (std::size_t i = 0; i < g.payload().size(); ++i) {
        auto c = g.payload()[i];
        auto letter = static_cast<std::int64_t>(i + 1);
        for (std::int64_t k = 0; k < (c < 0 ? -c : c); ++k) w.push_back(c < 0 ? -letter : letter);
      }
      return w;
    }
    case GroupKind::coordinate: break;
  }
  throw StructuralError("invalid oracle kind");
}

Element GroupOracle::evaluate(const Word& word) const {
  Element x = identity();
  for (auto letter : word) {
    auto k = static_cast<std::size_t>(letter < 0 ? -letter : letter);
    if (letter == 0 || k > generators_.size()) throw StructuralError("word letter outside the generating set");
    const auto& s = generators_[k - 1];
    x = multiply(x, letter > 0 ? s : invert(s));
  }
  return x;
}

std::string GroupOracle::format(const Element& a) const {
  validate(a);
  if ((kind_ == GroupKind::free || kind_ == GroupKind::rewriting) && a.payload().empty()) return "e";
  return join_ints(a.payload());
}

Element GroupOracle::parse(const std::string& text) const {
  Element out;
  switch (kind_) {
    case GroupKind::free:
    case GroupKind::rewriting:
      out = Element(kind_, text == "e" ? Word{} : parse_ints(text));
      break;
    case GroupKind::fg_abelian:
    case GroupKind::finite_table:
      out = Element(kind_, parse_ints(text));
      break;
    case GroupKind::coordinate: throw StructuralError("invalid oracle kind");
  }
  validate(out);
  return out;
}

std::optional<std::size_t> GroupOracle::order() const {
  switch (kind_) {
    case GroupKind::finite_table: return table_.size();
    case GroupKind::free:
      if (rank_ == 0) return 1;
      return std::nullopt;
    case GroupKind::fg_abelian: {
      std::size_t n = 1;
      for (auto t : torsion_) {
        if (t == 0) return std::nullopt;
        n *= static_cast<std::size_t>(t);
      }
      return n;
    }
    default: return std::nullopt;
  }
}

bool operator==(const GroupOracle& a, const GroupOracle& b) {
  return a.kind_ == b.kind_ && a.rank_ == b.rank_ && a.torsion_ == b.torsion_ && a.table_ == b.table_ &&
         a.rules_ == b.rules_ && a.generators_ == b.generators_;
}

Ball ball(const GroupOracle& oracle, int radius, std::size_t cap) {
  if (radius < 0) throw PreconditionError("ball radius must be >= 0");
  Ball b;
  b.radius = radius;
  auto e = oracle.identity();
  b.elements.push_back(e);
  b.length.push_back(0);
  b.index.emplace(e, 0);
  b.layer_end.push_back(1);
  const auto& gens = oracle.symmetric_generators();
  std::size_t frontier_begin = 0;
  for (int r = 1; r <= radius; ++r) {
    const std::size_t frontier_end = b.elements.size();
    for (std::size_t i = frontier_begin; i < frontier_end; ++i) {
      for (const auto& s : gens) {
        auto y = oracle.multiply(b.elements[i], s);
        if (b.index.contains(y)) continue;
        if (b.elements.size() >= cap) {
          throw ResourceError("ball: element cap " + std::to_string(cap) + " exceeded at radius " +
                              std::to_string(r));
        }
        b.index.emplace(y, b.elements.size());
        b.elements.push_back(std::move(y));
        b.length.push_back(r);
      }
    }
    frontier_begin = frontier_end;
    b.layer_end.push_back(b.elements.size());
  }
  return b;
}

}  // namespace repwb
