#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace repwb {

enum class GroupKind { finite_table, free, fg_abelian, rewriting, coordinate };

std::string to_string(GroupKind kind);

// A word over the signed generator alphabet: letter +i is generator i (1-based),
// -i its inverse.
using Word = std::vector<std::int64_t>;

// Canonical-form group element. The payload is interpreted by the oracle kind:
//   free / rewriting : reduced (normal-form) word
//   fg_abelian       : integer tuple, torsion coordinates reduced into [0, t)
//   finite_table     : single row index
//   coordinate       : single basis index of a finite-dimensional space (not a
//                      group element; used to label coordinates of vectors)
class Element {
 public:
  Element() = default;
  Element(GroupKind kind, std::vector<std::int64_t> payload) : kind_(kind), payload_(std::move(payload)) {}

  static Element coordinate(std::int64_t index) { return {GroupKind::coordinate, {index}}; }

  GroupKind kind() const { return kind_; }
  const std::vector<std::int64_t>& payload() const { return payload_; }

  friend bool operator==(const Element&, const Element&) = default;
  friend std::strong_ordering operator<=>(const Element& a, const Element& b) {
    if (auto c = a.kind_ <=> b.kind_; c != 0) return c;
    return a.payload_ <=> b.payload_;
  }

 private:
  GroupKind kind_ = GroupKind::coordinate;
  std::vector<std::int64_t> payload_;
};

struct ElementHash {
  std::size_t operator()(const Element& e) const noexcept;
};

struct RewriteRule {
  Word lhs;
  Word rhs;
  friend bool operator==(const RewriteRule&, const RewriteRule&) = default;
};

// Arithmetic for one countable group with a distinguished finite generating
// set S. Immutable after construction.
class GroupOracle {
 public:
  // Free group on `rank` letters; S = the letters.
  static GroupOracle free(int rank);
  // Z^d x prod Z/t_i; torsion[i] == 0 marks a free coordinate. Empty
  // `generators` means the standard basis.
  static GroupOracle fg_abelian(std::vector<std::int64_t> torsion, std::vector<Element> generators = {});
  // table[i][j] = index of (i * j). The identity row is located automatically.
  static GroupOracle finite_table(std::vector<std::vector<std::int64_t>> table, std::vector<Element> generators);
  // Group given by a complete (terminating + confluent) rewriting system over
  // the letters +-1..+-rank. Free cancellation x x^-1 -> e is always included.
  static GroupOracle rewriting(int rank, std::vector<RewriteRule> rules);

  GroupKind kind() const { return kind_; }
  int rank() const { return rank_; }
  const std::vector<std::int64_t>& torsion() const { return torsion_; }
  const std::vector<std::vector<std::int64_t>>& table() const { return table_; }
  const std::vector<RewriteRule>& rules() const { return rules_; }

  // The distinguished generating set S, in order.
  const std::vector<Element>& generators() const { return generators_; }
  // S followed by the inverses not already in S (duplicates removed).
  const std::vector<Element>& symmetric_generators() const { return symmetric_; }
  // True when S is the standard letter set / standard basis.
  bool standard_generators() const { return standard_generators_; }

  Element identity() const;
  Element multiply(const Element& a, const Element& b) const;
  Element invert(const Element& a) const;
  bool is_identity(const Element& a) const { return a == identity(); }

  // Throws StructuralError unless `a` is a canonical element of this group.
  void validate(const Element& a) const;

  // A word over the generator indices of S (signed, 1-based) evaluating to g.
  // Supported for free/rewriting (letters), abelian with standard generators,
  // and finite tables (shortest word by BFS). Throws UnsupportedError otherwise.
  Word word_of(const Element& g) const;
  // Evaluate a signed word over S.
  Element evaluate(const Word& word) const;

  // Canonical string forms: "e" or "1,-2" for words, "1,0" for tuples, "3" for
  // table rows.
  std::string format(const Element& a) const;
  Element parse(const std::string& text) const;

  // Order of the group when finite.
  std::optional<std::size_t> order() const;

  friend bool operator==(const GroupOracle& a, const GroupOracle& b);

 private:
  GroupOracle() = default;
  void finish_generators(bool standard);
  Word normalize(Word w) const;

  GroupKind kind_ = GroupKind::free;
  int rank_ = 0;
  std::vector<std::int64_t> torsion_;
  std::vector<std::vector<std::int64_t>> table_;
  std::int64_t table_identity_ = 0;
  std::vector<RewriteRule> rules_;
  std::vector<Element> generators_;
  std::vector<Element> symmetric_;
  bool standard_generators_ = true;
  // finite tables: shortest words for every element, filled at construction
  std::vector<Word> table_words_;
};

using OraclePtr = std::shared_ptr<const GroupOracle>;

// Cayley ball B_r over S u S^-1, in BFS order. elements[0] is the identity.
struct Ball {
  int radius = 0;
  std::vector<Element> elements;
  std::vector<int> length;
  std::unordered_map<Element, std::size_t, ElementHash> index;
  // Number of elements of word length <= k, for k = 0..radius.
  std::vector<std::size_t> layer_end;

  std::size_t size() const { return elements.size(); }
  std::optional<std::size_t> find(const Element& e) const {
    auto it = index.find(e);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

inline constexpr std::size_t kDefaultElementCap = 100000;

Ball ball(const GroupOracle& oracle, int radius, std::size_t cap = kDefaultElementCap);

}  // namespace repwb
