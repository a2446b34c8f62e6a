// -*- mode: c++ -*-
#ifndef CTXPARSE_TRANSFORM_HPP
#define CTXPARSE_TRANSFORM_HPP

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ctxparse/corpus.hpp"
#include "ctxparse/error.hpp"
#include "ctxparse/tree.hpp"

namespace ctxparse {

/// Tables driving informalization of formal HOL trees. Missing entries mean
/// "leave unchanged".
struct AmbiguationConfig {
  std::map<std::string, std::string> overload_map;  // constant -> ambiguous token
  std::vector<std::string> strip_prefixes;
  std::vector<std::string> delete_functors;  // unary casting functors
  std::set<std::string> infix_symbols;

  /// Surface token of a formal constant: overload entry first, then the first
  /// matching prefix removed.
  std::string render(const std::string& constant) const {
    if (auto it = overload_map.find(constant); it != overload_map.end()) return it->second;
    for (const auto& p : strip_prefixes)
      if (constant.size() > p.size() && constant.compare(0, p.size(), p) == 0) return constant.substr(p.size());
    return constant;
  }

  bool is_ambiguous(const std::string& constant) const {
    return overload_map.count(constant) != 0 || render(constant) != constant;
  }

  bool is_infix(const std::string& constant) const {
    return infix_symbols.count(constant) != 0 || infix_symbols.count(render(constant)) != 0;
  }

  bool is_deleted_functor(const std::string& constant) const {
    return std::find(delete_functors.begin(), delete_functors.end(), constant) != delete_functors.end();
  }

  bool empty() const noexcept {
    return overload_map.empty() && strip_prefixes.empty() && delete_functors.empty() && infix_symbols.empty();
  }
};

/// Plain-text config with sections [overload], [prefixes], [functors] and
/// [infix]. Overload lines hold `constant token`; the others one entry each.
inline AmbiguationConfig read_ambiguation_config(std::istream& in, const std::string& source = "<stream>") {
  AmbiguationConfig cfg;
  std::string section;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw Error(Errc::FormatError, source + ":" + std::to_string(lineno) + ": " + msg, 0, lineno);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    if (body.front() == '[') {
      if (body.back() != ']') fail("bad section header");
      section = std::string(body.substr(1, body.size() - 2));
      if (section != "overload" && section != "prefixes" && section != "functors" && section != "infix")
        fail("unknown section [" + section + "]");
      continue;
    }
    const auto fields = tokenize(body);
    if (section.empty()) fail("entry outside of a section");
    if (section == "overload") {
      if (fields.size() != 2) fail("overload entries need exactly 'constant token'");
      cfg.overload_map[fields[0]] = fields[1];
    } else {
      if (fields.size() != 1) fail("expected one entry per line");
      if (section == "prefixes")
        cfg.strip_prefixes.push_back(fields[0]);
      else if (section == "functors")
        cfg.delete_functors.push_back(fields[0]);
      else
        cfg.infix_symbols.insert(fields[0]);
    }
  }
  return cfg;
}

inline AmbiguationConfig load_ambiguation_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open config '" + path + "'");
  return read_ambiguation_config(in, path);
}

namespace hol {

inline constexpr std::string_view kConceptPrefix = "$#";

[[noreturn]] inline void malformed(const std::string& path, const std::string& what) {
  throw Error(Errc::MalformedHolTree, "at " + (path.empty() ? std::string("/") : path) + ": " + what);
}

inline std::string child_path(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

inline const std::string& leaf_name(const ParseTree& node, const std::string& path, const char* what) {
  if (!node.is_leaf()) malformed(path, std::string(what) + " must be a plain name");
  return node.label;
}

inline void check_type(const ParseTree& ty, const std::string& path) {
  if (ty.label == "Tyvar") {
    if (ty.children.size() != 1) malformed(path, "Tyvar expects one name");
    leaf_name(ty.children[0], child_path(path, 0), "type variable");
  } else if (ty.label == "Tyapp") {
    if (ty.children.empty()) malformed(path, "Tyapp without a type name");
    leaf_name(ty.children[0], child_path(path, 0), "type constructor");
    for (std::size_t i = 1; i < ty.children.size(); ++i) check_type(ty.children[i], child_path(path, i));
  } else {
    malformed(path, "expected a type (Tyapp/Tyvar), found '" + ty.label + "'");
  }
}

/// Compact curried rendering: `real`, `(fun real bool)`.
inline std::string render_type(const ParseTree& ty) {
  const auto& name = ty.children[0].label;
  if (ty.label == "Tyvar" || ty.children.size() == 1) return name;
  std::string out = "(" + name;
  for (std::size_t i = 1; i < ty.children.size(); ++i) out += " " + render_type(ty.children[i]);
  return out + ")";
}

inline std::string type_label(const ParseTree& ty) { return "(Type " + render_type(ty) + ")"; }

inline ParseTree fun_type(ParseTree from, ParseTree to) {
  return ParseTree("Tyapp", {ParseTree("fun"), std::move(from), std::move(to)});
}

inline bool is_fun(const ParseTree& ty) {
  return ty.label == "Tyapp" && ty.children.size() == 3 && ty.children[0].label == "fun";
}

struct Spine {
  const ParseTree* head = nullptr;
  std::string head_path;
  std::vector<const ParseTree*> args;  // left to right
  std::vector<std::string> arg_paths;
};

inline Spine flatten(const ParseTree& comb, const std::string& path) {
  Spine s;
  const ParseTree* cur = &comb;
  std::string cur_path = path;
  while (cur->label == "Comb") {
    if (cur->children.size() != 2) malformed(cur_path, "Comb expects 2 children, has " + std::to_string(cur->children.size()));
    s.args.push_back(&cur->children[1]);
    s.arg_paths.push_back(child_path(cur_path, 1));
    cur_path = child_path(cur_path, 0);
    cur = &cur->children[0];
  }
  std::reverse(s.args.begin(), s.args.end());
  std::reverse(s.arg_paths.begin(), s.arg_paths.end());
  s.head = cur;
  s.head_path = cur_path;
  return s;
}

inline void check_annotated(const ParseTree& node, const std::string& path, std::size_t arity) {
  if (node.children.size() != arity)
    malformed(path, node.label + " expects " + std::to_string(arity) + " children, has " +
                        std::to_string(node.children.size()));
}

struct Typed {
  ParseTree tree;
  ParseTree type;
};

inline Typed compress(const ParseTree& node, const std::string& path, const AmbiguationConfig& cfg) {
  if (node.label == "Const" || node.label == "Var") {
    check_annotated(node, path, 2);
    const auto& name = leaf_name(node.children[0], child_path(path, 0), "name");
    check_type(node.children[1], child_path(path, 1));
    ParseTree inner = node.label == "Const" ? ParseTree(name) : ParseTree("Var", {ParseTree(name)});
    return {ParseTree(type_label(node.children[1]), {std::move(inner)}), node.children[1]};
  }
  if (node.label == "Abs") {
    check_annotated(node, path, 3);
    const auto& name = leaf_name(node.children[0], child_path(path, 0), "bound variable");
    check_type(node.children[1], child_path(path, 1));
    auto body = compress(node.children[2], child_path(path, 2), cfg);
    ParseTree bound(type_label(node.children[1]), {ParseTree("Var", {ParseTree(name)})});
    ParseTree ty = fun_type(node.children[1], body.type);
    ParseTree abs("Abs", {std::move(bound), std::move(body.tree)});
    return {ParseTree(type_label(ty), {std::move(abs)}), std::move(ty)};
  }
  if (node.label == "Comb") {
    const auto spine = flatten(node, path);
    const ParseTree& head = *spine.head;
    ParseTree head_type;
    bool const_head = false;
    if (head.label == "Const") {
      check_annotated(head, spine.head_path, 2);
      leaf_name(head.children[0], child_path(spine.head_path, 0), "constant name");
      check_type(head.children[1], child_path(spine.head_path, 1));
      head_type = head.children[1];
      const_head = true;
    }
    std::vector<Typed> args;
    args.reserve(spine.args.size());
    for (std::size_t i = 0; i < spine.args.size(); ++i) args.push_back(compress(*spine.args[i], spine.arg_paths[i], cfg));

    std::vector<ParseTree> children;
    if (!const_head) {
      auto h = compress(head, spine.head_path, cfg);
      head_type = std::move(h.type);
      children.push_back(std::move(h.tree));
    }
    ParseTree result_type = head_type;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (!is_fun(result_type)) malformed(spine.arg_paths[i], "application of a non-function");
      ParseTree next = result_type.children[2];
      result_type = std::move(next);
    }
    if (const_head) {
      const auto& c = head.children[0].label;
      if (cfg.is_deleted_functor(c) && args.size() == 1) {
        children.push_back(std::move(args[0].tree));
      } else if (cfg.is_infix(c) && args.size() == 2) {
        children.push_back(std::move(args[0].tree));
        children.emplace_back(c);
        children.push_back(std::move(args[1].tree));
      } else {
        children.emplace_back(c);
        for (auto& a : args) children.push_back(std::move(a.tree));
      }
    } else {
      for (auto& a : args) children.push_back(std::move(a.tree));
    }
    return {ParseTree(type_label(result_type), std::move(children)), std::move(result_type)};
  }
  malformed(path, "unknown constructor '" + node.label + "'");
}

inline void ambiguate_into(const ParseTree& node, const std::string& path, const AmbiguationConfig& cfg,
                           Sentence& out) {
  if (node.label == "Const" || node.label == "Var") {
    check_annotated(node, path, 2);
    const auto& name = leaf_name(node.children[0], child_path(path, 0), "name");
    check_type(node.children[1], child_path(path, 1));
    out.push_back(node.label == "Const" ? cfg.render(name) : name);
    return;
  }
  if (node.label == "Abs") {
    check_annotated(node, path, 3);
    out.push_back(leaf_name(node.children[0], child_path(path, 0), "bound variable"));
    check_type(node.children[1], child_path(path, 1));
    ambiguate_into(node.children[2], child_path(path, 2), cfg, out);
    return;
  }
  if (node.label == "Comb") {
    const auto spine = flatten(node, path);
    const ParseTree& head = *spine.head;
    if (head.label == "Const") {
      check_annotated(head, spine.head_path, 2);
      const auto& c = leaf_name(head.children[0], child_path(spine.head_path, 0), "constant name");
      check_type(head.children[1], child_path(spine.head_path, 1));
      const auto n = spine.args.size();
      if (cfg.is_deleted_functor(c) && n == 1) {
        ambiguate_into(*spine.args[0], spine.arg_paths[0], cfg, out);
      } else if (cfg.is_infix(c) && n == 2) {
        ambiguate_into(*spine.args[0], spine.arg_paths[0], cfg, out);
        out.push_back(cfg.render(c));
        ambiguate_into(*spine.args[1], spine.arg_paths[1], cfg, out);
      } else {
        out.push_back(cfg.render(c));
        for (std::size_t i = 0; i < n; ++i) ambiguate_into(*spine.args[i], spine.arg_paths[i], cfg, out);
      }
    } else {
      ambiguate_into(head, spine.head_path, cfg, out);
      for (std::size_t i = 0; i < spine.args.size(); ++i) ambiguate_into(*spine.args[i], spine.arg_paths[i], cfg, out);
    }
    return;
  }
  malformed(path, "unknown constructor '" + node.label + "'");
}

inline void wrap_node(ParseTree& node, const AmbiguationConfig& cfg) {
  if (node.label == "Var" || node.label.rfind(kConceptPrefix, 0) == 0) return;
  for (auto& child : node.children) {
    if (child.is_leaf()) {
      if (cfg.is_ambiguous(child.label)) {
        std::string concept_label = std::string(kConceptPrefix) + child.label;
        child = ParseTree(std::move(concept_label), {ParseTree(cfg.render(child.label))});
      }
    } else {
      wrap_node(child, cfg);
    }
  }
}

}  // namespace hol

/// Turns a raw HOL tree (Comb/Abs/Const/Var/Tyapp/Tyvar) into a tree whose
/// term nodes are opaque `(Type τ)` nonterminals. Application spines are
/// flattened; configured infix constants go between their two operands and
/// deleted casting functors leave only their argument.
inline ParseTree compress_types(const ParseTree& hol_tree, const AmbiguationConfig& cfg = {}) {
  return hol::compress(hol_tree, "", cfg).tree;
}

/// Replaces each ambiguous constant terminal c by `($#c token)`. Terminals
/// under `Var` and already wrapped terminals are left alone.
inline ParseTree wrap_concepts(const ParseTree& typed_tree, const AmbiguationConfig& cfg) {
  ParseTree out = typed_tree;
  if (out.is_leaf()) {
    if (cfg.is_ambiguous(out.label))
      out = ParseTree(std::string(hol::kConceptPrefix) + out.label, {ParseTree(cfg.render(out.label))});
    return out;
  }
  hol::wrap_node(out, cfg);
  return out;
}

/// Informal token sequence of a raw HOL tree: overloads and prefixes erased,
/// configured functors dropped, infix symbols between operands, no types or
/// brackets.
inline Sentence ambiguate(const ParseTree& formal_tree, const AmbiguationConfig& cfg) {
  Sentence out;
  hol::ambiguate_into(formal_tree, "", cfg, out);
  return out;
}

}  // namespace ctxparse

#endif
