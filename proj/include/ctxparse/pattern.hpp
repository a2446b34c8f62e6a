// -*- mode: c++ -*-
#ifndef CTXPARSE_PATTERN_HPP
#define CTXPARSE_PATTERN_HPP

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctxparse/error.hpp"
#include "ctxparse/sexpr.hpp"
#include "ctxparse/tree.hpp"

namespace ctxparse {

/// A tree pattern of bounded height: the right-hand side of a (possibly deep)
/// grammar rule. Nonterminals cut off at the truncation level become childless
/// frontier nodes; terminals are kept verbatim at every level.
///
/// In text form a frontier nonterminal is written as a one-element list,
/// `(Num)`, so that it cannot be confused with a terminal token:
///   (Num (Num (Num) * (Num)) + (Num (Num) * (Num)))
struct Pattern {
  enum class Kind : std::uint8_t { Terminal, Frontier, Internal };

  Kind kind = Kind::Terminal;
  std::string label;
  std::vector<Pattern> children;

  static Pattern terminal(std::string token) { return {Kind::Terminal, std::move(token), {}}; }
  static Pattern frontier(std::string nonterminal) { return {Kind::Frontier, std::move(nonterminal), {}}; }
  static Pattern internal(std::string nonterminal, std::vector<Pattern> kids) {
    return {Kind::Internal, std::move(nonterminal), std::move(kids)};
  }

  bool is_terminal() const noexcept { return kind == Kind::Terminal; }
  bool is_frontier() const noexcept { return kind == Kind::Frontier; }
  bool is_internal() const noexcept { return kind == Kind::Internal; }

  friend bool operator==(const Pattern&, const Pattern&) = default;
};

inline std::size_t height(const Pattern& p) {
  std::size_t h = 0;
  for (const auto& c : p.children) h = std::max(h, height(c));
  return h + 1;
}

inline void print_pattern_to(std::string& out, const Pattern& p) {
  switch (p.kind) {
    case Pattern::Kind::Terminal:
      sexpr::append_atom(out, p.label);
      return;
    case Pattern::Kind::Frontier:
      out += '(';
      sexpr::append_atom(out, p.label);
      out += ')';
      return;
    case Pattern::Kind::Internal:
      out += '(';
      sexpr::append_atom(out, p.label);
      for (const auto& c : p.children) {
        out += ' ';
        print_pattern_to(out, c);
      }
      out += ')';
      return;
  }
}

/// Unambiguous canonical form, used in grammar files and as rule key.
inline std::string to_string(const Pattern& p) {
  std::string out;
  print_pattern_to(out, p);
  return out;
}

inline void display_to(std::string& out, const Pattern& p) {
  if (!p.is_internal()) {
    sexpr::append_atom(out, p.label);
    return;
  }
  out += '(';
  sexpr::append_atom(out, p.label);
  for (const auto& c : p.children) {
    out += ' ';
    display_to(out, c);
  }
  out += ')';
}

/// Human-oriented form with frontier nonterminals printed bare, e.g.
/// `(Num (Num Num * Num) + (Num Num * Num))`.
inline std::string display(const Pattern& p) {
  std::string out;
  display_to(out, p);
  return out;
}

/// `lhs -> child child ...` in the same bare notation.
inline std::string display_rule(const Pattern& p) {
  std::string out;
  sexpr::append_atom(out, p.label);
  out += " ->";
  for (const auto& c : p.children) {
    out += ' ';
    display_to(out, c);
  }
  return out;
}

inline Pattern pattern_from_sexpr(const SExpr& e) {
  if (e.is_atom()) return Pattern::terminal(e.token());
  const auto& items = e.children();
  if (items.empty()) throw Error(Errc::MalformedTree, "empty list is not a pattern");
  if (!items.front().is_atom()) throw Error(Errc::MalformedTree, "pattern label must be an atom");
  if (items.size() == 1) return Pattern::frontier(items.front().token());
  std::vector<Pattern> kids;
  kids.reserve(items.size() - 1);
  for (std::size_t i = 1; i < items.size(); ++i) kids.push_back(pattern_from_sexpr(items[i]));
  return Pattern::internal(items.front().token(), std::move(kids));
}

inline Pattern parse_pattern(std::string_view text) { return pattern_from_sexpr(sexpr::read(text)); }

inline Pattern pattern_from_tree(const ParseTree& t) {
  if (t.is_leaf()) return Pattern::terminal(t.label);
  std::vector<Pattern> kids;
  kids.reserve(t.children.size());
  for (const auto& c : t.children) kids.push_back(pattern_from_tree(c));
  return Pattern::internal(t.label, std::move(kids));
}

namespace detail {

inline Pattern truncate_at(const ParseTree& t, std::size_t level, std::size_t depth) {
  if (t.is_leaf()) return Pattern::terminal(t.label);
  if (level == depth) return Pattern::frontier(t.label);
  std::vector<Pattern> kids;
  kids.reserve(t.children.size());
  for (const auto& c : t.children) kids.push_back(truncate_at(c, level + 1, depth));
  return Pattern::internal(t.label, std::move(kids));
}

inline Pattern truncate_at(const Pattern& p, std::size_t level, std::size_t depth) {
  if (!p.is_internal()) return p;
  if (level == depth) return Pattern::frontier(p.label);
  std::vector<Pattern> kids;
  kids.reserve(p.children.size());
  for (const auto& c : p.children) kids.push_back(truncate_at(c, level + 1, depth));
  return Pattern::internal(p.label, std::move(kids));
}

}  // namespace detail

/// Top `depth` levels of `tree` (root at level 1). Internal nodes at level
/// `depth` become frontier nonterminals, so the result has height
/// min(depth, height(tree)).
inline Pattern truncate(const ParseTree& tree, std::size_t depth) {
  if (depth < 2) throw Error(Errc::InvalidArgument, "truncation depth must be >= 2");
  return detail::truncate_at(tree, 1, depth);
}

inline Pattern truncate(const Pattern& pattern, std::size_t depth) {
  if (depth < 2) throw Error(Errc::InvalidArgument, "truncation depth must be >= 2");
  return detail::truncate_at(pattern, 1, depth);
}

}  // namespace ctxparse

#endif
