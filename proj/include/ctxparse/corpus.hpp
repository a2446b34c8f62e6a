// -*- mode: c++ -*-
#ifndef CTXPARSE_CORPUS_HPP
#define CTXPARSE_CORPUS_HPP

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ctxparse/error.hpp"
#include "ctxparse/tree.hpp"

namespace ctxparse {

/// A set of gold trees sharing one start nonterminal.
struct Treebank {
  std::string start = "S";
  std::vector<ParseTree> trees;

  bool empty() const noexcept { return trees.empty(); }
  std::size_t size() const noexcept { return trees.size(); }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Calls `fn(line_number, tree)` for every tree line of `in`. Blank lines and
/// lines starting with '#' are skipped; read errors carry the line number.
template <typename Fn>
void for_each_tree_line(std::istream& in, const std::string& source, Fn&& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    ParseTree t;
    try {
      t = parse_tree(body);
    } catch (const Error& e) {
      throw Error(e.code(), source + ":" + std::to_string(lineno) + ": " + e.what(), e.position(), lineno);
    }
    fn(lineno, std::move(t));
  }
}

inline std::vector<ParseTree> read_trees(std::istream& in, const std::string& source = "<stream>") {
  std::vector<ParseTree> out;
  for_each_tree_line(in, source, [&](std::size_t, ParseTree t) { out.push_back(std::move(t)); });
  return out;
}

inline std::vector<ParseTree> load_trees(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
  return read_trees(in, path);
}

/// Reads a treebank, one tree per line. Without an explicit start symbol the
/// first tree's root label is used; every tree must then share it.
inline Treebank read_treebank(std::istream& in, std::optional<std::string> start = std::nullopt,
                              const std::string& source = "<stream>") {
  Treebank tb;
  if (start) tb.start = *start;
  bool have_start = start.has_value();
  for_each_tree_line(in, source, [&](std::size_t lineno, ParseTree t) {
    const auto where = source + ":" + std::to_string(lineno) + ": ";
    if (t.is_leaf()) throw Error(Errc::MalformedTree, where + "tree is a bare token", 0, lineno);
    if (!have_start) {
      tb.start = t.label;
      have_start = true;
    } else if (t.label != tb.start) {
      throw Error(Errc::MixedStartSymbol, where + "root '" + t.label + "' differs from start '" + tb.start + "'", 0,
                  lineno);
    }
    tb.trees.push_back(std::move(t));
  });
  return tb;
}

inline Treebank load_treebank(const std::string& path, std::optional<std::string> start = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open treebank '" + path + "'");
  return read_treebank(in, std::move(start), path);
}

inline void write_treebank(std::ostream& out, const Treebank& tb) {
  for (const auto& t : tb.trees) out << to_string(t) << '\n';
}

inline void store_treebank(const Treebank& tb, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write treebank '" + path + "'");
  write_treebank(out, tb);
  if (!out) throw Error(Errc::IoError, "write failed for '" + path + "'");
}

}  // namespace ctxparse

#endif
