// -*- mode: c++ -*-
#ifndef CTXPARSE_SEXPR_HPP
#define CTXPARSE_SEXPR_HPP

#include <cctype>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctxparse/error.hpp"

namespace ctxparse {

// S-expression values for treebanks, grammars and parser output.
//
// Atoms remember whether they were written quoted so that a normalized input
// line reads and prints back byte for byte (HOL constant names such as "!"
// stay quoted). Atoms that contain whitespace, parentheses or a double quote
// are always quoted.
class SExpr {
 public:
  SExpr() : list_(true) {}

  static SExpr atom(std::string token, bool quoted = false) {
    SExpr e;
    e.list_ = false;
    e.quoted_ = quoted || needs_quoting(token);
    e.token_ = std::move(token);
    return e;
  }

  static SExpr list(std::vector<SExpr> children = {}) {
    SExpr e;
    e.children_ = std::move(children);
    return e;
  }

  bool is_atom() const noexcept { return !list_; }
  bool is_list() const noexcept { return list_; }
  bool quoted() const noexcept { return quoted_; }

  const std::string& token() const noexcept { return token_; }
  const std::vector<SExpr>& children() const noexcept { return children_; }
  std::vector<SExpr>& children() noexcept { return children_; }

  friend bool operator==(const SExpr& a, const SExpr& b) {
    return a.list_ == b.list_ && a.quoted_ == b.quoted_ && a.token_ == b.token_ &&
           a.children_ == b.children_;
  }

  static bool needs_quoting(std::string_view token) noexcept {
    if (token.empty()) return true;
    for (char c : token)
      if (c == '(' || c == ')' || c == '"' || std::isspace(static_cast<unsigned char>(c))) return true;
    return false;
  }

 private:
  bool list_ = true;
  bool quoted_ = false;
  std::string token_;
  std::vector<SExpr> children_;
};

namespace sexpr {

inline void append_quoted(std::string& out, std::string_view token) {
  out += '"';
  for (char c : token) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
}

/// Appends `token` as an atom, quoting only when required.
inline void append_atom(std::string& out, std::string_view token, bool force_quote = false) {
  if (force_quote || SExpr::needs_quoting(token))
    append_quoted(out, token);
  else
    out += token;
}

inline std::string atom_string(std::string_view token) {
  std::string out;
  append_atom(out, token);
  return out;
}

inline void print_to(std::string& out, const SExpr& e) {
  if (e.is_atom()) {
    append_atom(out, e.token(), e.quoted());
    return;
  }
  out += '(';
  bool first = true;
  for (const auto& child : e.children()) {
    if (!first) out += ' ';
    first = false;
    print_to(out, child);
  }
  out += ')';
}

inline std::string print(const SExpr& e) {
  std::string out;
  print_to(out, e);
  return out;
}

/// Reads exactly one s-expression. Quoted atoms use backslash escapes for
/// `"` and `\`.
inline SExpr read(std::string_view text) {
  std::vector<std::vector<SExpr>> stack;
  std::vector<std::size_t> open_positions;
  std::vector<SExpr> top;
  std::size_t i = 0;
  const std::size_t n = text.size();

  auto emit = [&](SExpr e) {
    if (stack.empty())
      top.push_back(std::move(e));
    else
      stack.back().push_back(std::move(e));
  };

  while (i < n) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '(') {
      if (stack.empty() && !top.empty())
        throw Error(Errc::FormatError, "trailing input at position " + std::to_string(i), i);
      stack.emplace_back();
      open_positions.push_back(i);
      ++i;
    } else if (c == ')') {
      if (stack.empty())
        throw Error(Errc::UnbalancedParens, "unexpected ')' at position " + std::to_string(i), i);
      auto children = std::move(stack.back());
      stack.pop_back();
      open_positions.pop_back();
      emit(SExpr::list(std::move(children)));
      ++i;
    } else {
      if (stack.empty() && !top.empty())
        throw Error(Errc::FormatError, "trailing input at position " + std::to_string(i), i);
      if (c == '"') {
        const std::size_t start = i;
        std::string token;
        ++i;
        bool closed = false;
        while (i < n) {
          const char q = text[i];
          if (q == '\\') {
            if (i + 1 >= n) break;
            token += text[i + 1];
            i += 2;
          } else if (q == '"') {
            closed = true;
            ++i;
            break;
          } else {
            token += q;
            ++i;
          }
        }
        if (!closed)
          throw Error(Errc::UnterminatedQuote,
                      "unterminated quote starting at position " + std::to_string(start), start);
        if (token.empty())
          throw Error(Errc::EmptyAtom, "empty quoted atom at position " + std::to_string(start), start);
        emit(SExpr::atom(std::move(token), true));
      } else {
        const std::size_t start = i;
        while (i < n) {
          const char a = text[i];
          if (a == '(' || a == ')' || a == '"' || std::isspace(static_cast<unsigned char>(a))) break;
          ++i;
        }
        emit(SExpr::atom(std::string(text.substr(start, i - start))));
      }
    }
  }
  if (!stack.empty())
    throw Error(Errc::UnbalancedParens,
                "unclosed '(' at position " + std::to_string(open_positions.back()),
                open_positions.back());
  if (top.empty()) throw Error(Errc::EmptyInput, "no s-expression in input");
  return std::move(top.front());
}

/// Collapses inter-token whitespace; equivalent to print(read(text)).
inline std::string normalize(std::string_view text) { return print(read(text)); }

}  // namespace sexpr
}  // namespace ctxparse

#endif
