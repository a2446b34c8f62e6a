// -*- mode: c++ -*-
#ifndef CTXPARSE_INDEX_HPP
#define CTXPARSE_INDEX_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctxparse/error.hpp"
#include "ctxparse/grammar.hpp"
#include "ctxparse/pattern.hpp"

namespace ctxparse {

// Discrimination tree over ground rule patterns.
//
// A pattern is keyed by its preorder path string: an internal node emits
// OPEN, NT(label), its children, CLOSE; a frontier nonterminal emits NT(label)
// alone and a terminal emits TERM(token). Path strings are balanced, so no
// indexed path is a proper prefix of another and every accepting trie node is
// a leaf. Each trie node keeps its outgoing edges sorted by symbol code and
// lookups binary-search them.
class SubtreeIndex {
 public:
  enum class SymbolKind : std::uint8_t { Open = 0, Close = 1, Nonterminal = 2, Terminal = 3 };

  struct Symbol {
    SymbolKind kind;
    std::string label;

    friend bool operator==(const Symbol&, const Symbol&) = default;
  };
  using PathString = std::vector<Symbol>;

  struct Match {
    int depth;
    double probability;
  };

  SubtreeIndex() : nodes_(1) {}

  static PathString path_string(const Pattern& p) {
    PathString out;
    append_path(out, p);
    return out;
  }

  /// Inverse of path_string(); throws on an unbalanced path.
  static Pattern pattern_from_path(const PathString& path) {
    std::size_t pos = 0;
    Pattern p = read_path(path, pos);
    if (pos != path.size()) throw Error(Errc::FormatError, "trailing symbols in path string");
    return p;
  }

  /// Inserts or overwrites the probability stored for `p`.
  void insert(const Pattern& p, double probability) {
    std::uint32_t node = 0;
    insert_walk(p, node);
    auto& n = nodes_[node];
    if (n.depth == 0) ++size_;
    n.depth = static_cast<std::uint32_t>(height(p));
    n.probability = probability;
  }

  /// Exact-match retrieval; never a partial or unifying match.
  std::optional<Match> find(const Pattern& p) const {
    std::uint32_t node = 0;
    if (!lookup_walk(p, node)) return std::nullopt;
    const auto& n = nodes_[node];
    if (n.depth == 0) return std::nullopt;
    return Match{static_cast<int>(n.depth), n.probability};
  }

  std::optional<double> lookup(const Pattern& p) const {
    if (auto m = find(p)) return m->probability;
    return std::nullopt;
  }

  bool empty() const noexcept { return size_ == 0; }
  std::size_t size() const noexcept { return size_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  /// Total length of all path strings passed to insert().
  std::size_t symbol_count() const noexcept { return symbols_inserted_; }

  /// Indented text rendering of the trie, one edge per line.
  void dump(std::ostream& out) const { dump_node(out, 0, 0); }

 private:
  struct Edge {
    std::uint32_t symbol;
    std::uint32_t child;
  };
  struct Node {
    std::vector<Edge> edges;  // sorted by symbol
    double probability = 0.0;
    std::uint32_t depth = 0;  // 0: not accepting
  };

  static constexpr std::uint32_t kOpen = 0;
  static constexpr std::uint32_t kClose = 1;
  static constexpr std::uint32_t npos = 0xffffffffu;

  static void append_path(PathString& out, const Pattern& p) {
    switch (p.kind) {
      case Pattern::Kind::Terminal:
        out.push_back({SymbolKind::Terminal, p.label});
        return;
      case Pattern::Kind::Frontier:
        out.push_back({SymbolKind::Nonterminal, p.label});
        return;
      case Pattern::Kind::Internal:
        out.push_back({SymbolKind::Open, {}});
        out.push_back({SymbolKind::Nonterminal, p.label});
        for (const auto& c : p.children) append_path(out, c);
        out.push_back({SymbolKind::Close, {}});
        return;
    }
  }

  static Pattern read_path(const PathString& path, std::size_t& pos) {
    if (pos >= path.size()) throw Error(Errc::FormatError, "truncated path string");
    const auto& s = path[pos++];
    switch (s.kind) {
      case SymbolKind::Terminal:
        return Pattern::terminal(s.label);
      case SymbolKind::Nonterminal:
        return Pattern::frontier(s.label);
      case SymbolKind::Close:
        throw Error(Errc::FormatError, "unexpected CLOSE in path string");
      case SymbolKind::Open:
        break;
    }
    if (pos >= path.size() || path[pos].kind != SymbolKind::Nonterminal)
      throw Error(Errc::FormatError, "OPEN must be followed by a nonterminal");
    std::string label = path[pos++].label;
    std::vector<Pattern> kids;
    while (true) {
      if (pos >= path.size()) throw Error(Errc::FormatError, "unbalanced path string");
      if (path[pos].kind == SymbolKind::Close) {
        ++pos;
        break;
      }
      kids.push_back(read_path(path, pos));
    }
    if (kids.empty()) throw Error(Errc::FormatError, "internal node without children in path string");
    return Pattern::internal(std::move(label), std::move(kids));
  }

  static std::uint32_t encode(SymbolKind kind, std::uint32_t id) {
    return (id << 2) | static_cast<std::uint32_t>(kind);
  }

  std::uint32_t intern(const std::string& label) {
    auto [it, inserted] = label_ids_.emplace(label, static_cast<std::uint32_t>(labels_.size()));
    if (inserted) labels_.push_back(label);
    return it->second;
  }

  std::uint32_t id_of(const std::string& label) const {
    auto it = label_ids_.find(label);
    return it == label_ids_.end() ? npos : it->second;
  }

  std::uint32_t child(std::uint32_t node, std::uint32_t symbol) const {
    const auto& edges = nodes_[node].edges;
    auto it = std::lower_bound(edges.begin(), edges.end(), symbol,
                               [](const Edge& e, std::uint32_t s) { return e.symbol < s; });
    return (it != edges.end() && it->symbol == symbol) ? it->child : npos;
  }

  void step_insert(std::uint32_t& node, std::uint32_t symbol) {
    ++symbols_inserted_;
    auto& edges = nodes_[node].edges;
    auto it = std::lower_bound(edges.begin(), edges.end(), symbol,
                               [](const Edge& e, std::uint32_t s) { return e.symbol < s; });
    if (it != edges.end() && it->symbol == symbol) {
      node = it->child;
      return;
    }
    const auto fresh = static_cast<std::uint32_t>(nodes_.size());
    edges.insert(it, Edge{symbol, fresh});
    nodes_.emplace_back();  // invalidates `edges`
    node = fresh;
  }

  void insert_walk(const Pattern& p, std::uint32_t& node) {
    switch (p.kind) {
      case Pattern::Kind::Terminal:
        step_insert(node, encode(SymbolKind::Terminal, intern(p.label)));
        return;
      case Pattern::Kind::Frontier:
        step_insert(node, encode(SymbolKind::Nonterminal, intern(p.label)));
        return;
      case Pattern::Kind::Internal:
        step_insert(node, kOpen);
        step_insert(node, encode(SymbolKind::Nonterminal, intern(p.label)));
        for (const auto& c : p.children) insert_walk(c, node);
        step_insert(node, kClose);
        return;
    }
  }

  bool lookup_step(std::uint32_t& node, std::uint32_t symbol) const {
    node = child(node, symbol);
    return node != npos;
  }

  bool lookup_walk(const Pattern& p, std::uint32_t& node) const {
    std::uint32_t id = 0;
    switch (p.kind) {
      case Pattern::Kind::Terminal:
        if ((id = id_of(p.label)) == npos) return false;
        return lookup_step(node, encode(SymbolKind::Terminal, id));
      case Pattern::Kind::Frontier:
        if ((id = id_of(p.label)) == npos) return false;
        return lookup_step(node, encode(SymbolKind::Nonterminal, id));
      case Pattern::Kind::Internal:
        if ((id = id_of(p.label)) == npos) return false;
        if (!lookup_step(node, kOpen) || !lookup_step(node, encode(SymbolKind::Nonterminal, id))) return false;
        for (const auto& c : p.children)
          if (!lookup_walk(c, node)) return false;
        return lookup_step(node, kClose);
    }
    return false;
  }

  std::string symbol_text(std::uint32_t symbol) const {
    switch (static_cast<SymbolKind>(symbol & 3u)) {
      case SymbolKind::Open: return "OPEN";
      case SymbolKind::Close: return "CLOSE";
      case SymbolKind::Nonterminal: return "NT " + sexpr::atom_string(labels_[symbol >> 2]);
      case SymbolKind::Terminal: return "TERM " + sexpr::atom_string(labels_[symbol >> 2]);
    }
    return "?";
  }

  void dump_node(std::ostream& out, std::uint32_t node, int indent) const {
    for (const auto& e : nodes_[node].edges) {
      out << std::string(static_cast<std::size_t>(indent) * 2, ' ') << symbol_text(e.symbol);
      const auto& c = nodes_[e.child];
      if (c.depth != 0) out << "  => depth " << c.depth << " p " << format_probability(c.probability);
      out << '\n';
      dump_node(out, e.child, indent + 1);
    }
  }

  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::uint32_t> label_ids_;
  std::vector<std::string> labels_;
  std::size_t size_ = 0;
  std::size_t symbols_inserted_ = 0;
};

/// Indexes every rule of depth >= `min_depth`.
inline SubtreeIndex build_index(const Grammar& g, int min_depth = 3) {
  SubtreeIndex index;
  for (const auto& [cls, rules] : g.classes())
    if (cls.depth >= min_depth)
      for (const auto& r : rules) index.insert(r.pattern, r.probability);
  return index;
}

}  // namespace ctxparse

#endif
