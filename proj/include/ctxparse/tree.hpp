// -*- mode: c++ -*-
#ifndef CTXPARSE_TREE_HPP
#define CTXPARSE_TREE_HPP

#include <algorithm>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctxparse/error.hpp"
#include "ctxparse/sexpr.hpp"

namespace ctxparse {

/// Rooted ordered tree. Leaves carry terminal tokens; internal nodes carry
/// nonterminal labels and always have at least one child.
struct ParseTree {
  std::string label;
  std::vector<ParseTree> children;

  ParseTree() = default;
  explicit ParseTree(std::string l) : label(std::move(l)) {}
  ParseTree(std::string l, std::vector<ParseTree> c) : label(std::move(l)), children(std::move(c)) {}

  bool is_leaf() const noexcept { return children.empty(); }

  friend bool operator==(const ParseTree&, const ParseTree&) = default;
};

/// Token sequence; the yield of a tree.
using Sentence = std::vector<std::string>;

inline std::size_t height(const ParseTree& t) {
  std::size_t h = 0;
  for (const auto& c : t.children) h = std::max(h, height(c));
  return h + 1;
}

inline std::size_t leaf_count(const ParseTree& t) {
  if (t.is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : t.children) n += leaf_count(c);
  return n;
}

inline void yield_into(const ParseTree& t, Sentence& out) {
  if (t.is_leaf()) {
    out.push_back(t.label);
    return;
  }
  for (const auto& c : t.children) yield_into(c, out);
}

inline Sentence yield(const ParseTree& t) {
  Sentence out;
  yield_into(t, out);
  return out;
}

inline void print_tree_to(std::string& out, const ParseTree& t) {
  if (t.is_leaf()) {
    sexpr::append_atom(out, t.label);
    return;
  }
  out += '(';
  sexpr::append_atom(out, t.label);
  for (const auto& c : t.children) {
    out += ' ';
    print_tree_to(out, c);
  }
  out += ')';
}

/// Canonical single-line form. Two trees are equal iff their canonical
/// strings are equal.
inline std::string to_string(const ParseTree& t) {
  std::string out;
  print_tree_to(out, t);
  return out;
}

inline SExpr to_sexpr(const ParseTree& t) {
  if (t.is_leaf()) return SExpr::atom(t.label);
  std::vector<SExpr> items;
  items.reserve(t.children.size() + 1);
  items.push_back(SExpr::atom(t.label));
  for (const auto& c : t.children) items.push_back(to_sexpr(c));
  return SExpr::list(std::move(items));
}

inline ParseTree from_sexpr(const SExpr& e) {
  if (e.is_atom()) return ParseTree(e.token());
  const auto& items = e.children();
  if (items.empty()) throw Error(Errc::MalformedTree, "empty list is not a tree");
  if (!items.front().is_atom()) throw Error(Errc::MalformedTree, "node label must be an atom");
  if (items.size() == 1)
    throw Error(Errc::MalformedTree, "internal node '" + items.front().token() + "' has no children");
  ParseTree t(items.front().token());
  t.children.reserve(items.size() - 1);
  for (std::size_t i = 1; i < items.size(); ++i) t.children.push_back(from_sexpr(items[i]));
  return t;
}

inline ParseTree parse_tree(std::string_view text) { return from_sexpr(sexpr::read(text)); }

inline std::string join(const Sentence& s, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += sep;
    out += s[i];
  }
  return out;
}

/// Splits on ASCII whitespace.
inline Sentence tokenize(std::string_view text) {
  Sentence out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace ctxparse

#endif
