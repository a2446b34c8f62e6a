// -*- mode: c++ -*-
#ifndef CTXPARSE_GRAMMAR_HPP
#define CTXPARSE_GRAMMAR_HPP

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctxparse/corpus.hpp"
#include "ctxparse/error.hpp"
#include "ctxparse/pattern.hpp"
#include "ctxparse/tree.hpp"

namespace ctxparse {

/// Every internal node whose subtree is at least `depth` high contributes its
/// truncation to depth `depth`. Shallower nodes contribute nothing here.
inline std::vector<Pattern> extract_rules(const ParseTree& tree, std::size_t depth) {
  if (depth < 2) throw Error(Errc::InvalidArgument, "rule depth must be >= 2");
  std::vector<Pattern> out;
  auto visit = [&](auto&& self, const ParseTree& node) -> std::size_t {
    if (node.is_leaf()) return 1;
    std::size_t h = 0;
    for (const auto& c : node.children) h = std::max(h, self(self, c));
    ++h;
    if (h >= depth) out.push_back(truncate(node, depth));
    return h;
  };
  visit(visit, tree);
  return out;
}

/// Rules are normalized within (depth, lhs) classes.
struct RuleClass {
  int depth = 2;
  std::string lhs;

  friend auto operator<=>(const RuleClass&, const RuleClass&) = default;
  friend bool operator==(const RuleClass&, const RuleClass&) = default;
};

struct Rule {
  int depth = 2;
  Pattern pattern;
  std::string key;  // to_string(pattern)
  double probability = 0.0;
  std::size_t count = 0;

  const std::string& lhs() const noexcept { return pattern.label; }
};

class Grammar {
 public:
  using class_map = std::map<RuleClass, std::vector<Rule>>;

  Grammar() = default;
  Grammar(std::string start, int max_depth) : start_(std::move(start)), max_depth_(max_depth) {}

  const std::string& start() const noexcept { return start_; }
  int max_depth() const noexcept { return max_depth_; }
  const class_map& classes() const noexcept { return classes_; }
  bool empty() const noexcept { return lookup_.empty(); }
  std::size_t size() const noexcept { return lookup_.size(); }

  /// Rule with the given depth and canonical pattern string, or nullptr.
  const Rule* find(int depth, const std::string& key) const {
    auto it = lookup_.find(lookup_key(depth, key));
    return it == lookup_.end() ? nullptr : it->second;
  }

  std::vector<const Rule*> rules(int depth) const {
    std::vector<const Rule*> out;
    for (const auto& [cls, rs] : classes_)
      if (cls.depth == depth)
        for (const auto& r : rs) out.push_back(&r);
    return out;
  }

  /// The same grammar without rule classes deeper than `max_depth`.
  Grammar restricted(int max_depth) const {
    Grammar g(start_, std::min(max_depth, max_depth_));
    for (const auto& [cls, rs] : classes_)
      if (cls.depth <= max_depth)
        for (const auto& r : rs) g.add(r);
    g.finish();
    return g;
  }

  void add(Rule rule) {
    RuleClass cls{rule.depth, rule.lhs()};
    classes_[cls].push_back(std::move(rule));
  }

  /// Sorts each class by pattern string and rebuilds the lookup table. Must be
  /// called after the last add().
  void finish() {
    lookup_.clear();
    for (auto& [cls, rs] : classes_) {
      std::sort(rs.begin(), rs.end(), [](const Rule& a, const Rule& b) { return a.key < b.key; });
      for (const auto& r : rs) {
        auto [it, inserted] = lookup_.emplace(lookup_key(r.depth, r.key), &r);
        if (!inserted) throw Error(Errc::FormatError, "duplicate rule " + r.key);
      }
    }
  }

  Grammar(const Grammar& other) : start_(other.start_), max_depth_(other.max_depth_), classes_(other.classes_) {
    finish();
  }
  Grammar& operator=(const Grammar& other) {
    if (this != &other) {
      start_ = other.start_;
      max_depth_ = other.max_depth_;
      classes_ = other.classes_;
      finish();
    }
    return *this;
  }
  Grammar(Grammar&&) noexcept = default;
  Grammar& operator=(Grammar&&) noexcept = default;

 private:
  static std::string lookup_key(int depth, const std::string& key) { return std::to_string(depth) + '\t' + key; }

  std::string start_ = "S";
  int max_depth_ = 2;
  class_map classes_;
  std::unordered_map<std::string, const Rule*> lookup_;
};

/// Relative-frequency estimate per (depth, lhs) class for depths 2..max_depth.
inline Grammar train(const Treebank& tb, int max_depth) {
  if (max_depth < 2) throw Error(Errc::InvalidArgument, "max depth must be >= 2");
  if (tb.empty()) throw Error(Errc::EmptyTreebank, "cannot train on an empty treebank");

  struct Counted {
    Pattern pattern;
    std::size_t count = 0;
  };
  std::vector<std::map<std::string, Counted>> counts(static_cast<std::size_t>(max_depth) + 1);

  auto visit = [&](auto&& self, const ParseTree& node) -> int {
    if (node.is_leaf()) return 1;
    int h = 0;
    for (const auto& c : node.children) h = std::max(h, self(self, c));
    ++h;
    for (int d = 2; d <= std::min(h, max_depth); ++d) {
      Pattern p = truncate(node, static_cast<std::size_t>(d));
      auto key = to_string(p);
      auto& slot = counts[static_cast<std::size_t>(d)][key];
      if (slot.count == 0) slot.pattern = std::move(p);
      ++slot.count;
    }
    return h;
  };
  for (const auto& t : tb.trees) visit(visit, t);

  std::map<RuleClass, std::size_t> totals;
  for (int d = 2; d <= max_depth; ++d)
    for (const auto& [key, c] : counts[static_cast<std::size_t>(d)]) totals[{d, c.pattern.label}] += c.count;

  Grammar g(tb.start, max_depth);
  for (int d = 2; d <= max_depth; ++d) {
    for (auto& [key, c] : counts[static_cast<std::size_t>(d)]) {
      const auto total = totals[{d, c.pattern.label}];
      Rule r;
      r.depth = d;
      r.key = key;
      r.probability = static_cast<double>(c.count) / static_cast<double>(total);
      r.count = c.count;
      r.pattern = std::move(c.pattern);
      g.add(std::move(r));
    }
  }
  g.finish();
  return g;
}

/// Largest |sum - 1| over all (depth, lhs) classes.
inline double normalization_error(const Grammar& g) {
  double worst = 0.0;
  for (const auto& [cls, rs] : g.classes()) {
    double sum = 0.0;
    for (const auto& r : rs) sum += r.probability;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

inline bool approx_equal(const Grammar& a, const Grammar& b, double tolerance) {
  if (a.start() != b.start() || a.max_depth() != b.max_depth() || a.size() != b.size()) return false;
  auto ia = a.classes().begin();
  auto ib = b.classes().begin();
  for (; ia != a.classes().end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.size() != ib->second.size()) return false;
    for (std::size_t i = 0; i < ia->second.size(); ++i) {
      const auto& ra = ia->second[i];
      const auto& rb = ib->second[i];
      if (ra.key != rb.key || std::abs(ra.probability - rb.probability) > tolerance) return false;
    }
  }
  return true;
}

inline std::string format_probability(double p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", p);
  return buf;
}

/// Rule lines are `depth TAB probability TAB pattern`, sorted by depth, lhs
/// and pattern string. Two metadata lines carry the start symbol and the
/// trained maximum depth.
inline void write_grammar(std::ostream& out, const Grammar& g) {
  out << "#start\t" << g.start() << '\n';
  out << "#max_depth\t" << g.max_depth() << '\n';
  for (const auto& [cls, rs] : g.classes())
    for (const auto& r : rs) out << r.depth << '\t' << format_probability(r.probability) << '\t' << r.key << '\n';
}

inline void save_grammar(const Grammar& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write grammar '" + path + "'");
  write_grammar(out, g);
  if (!out) throw Error(Errc::IoError, "write failed for '" + path + "'");
}

inline Grammar read_grammar(std::istream& in, const std::string& source = "<stream>") {
  std::string start = "S";
  int declared_depth = 0;
  std::vector<Rule> rules;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](Errc code, const std::string& msg) -> void {
    throw Error(code, source + ":" + std::to_string(lineno) + ": " + msg, 0, lineno);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    if (line.front() == '#') {
      if (line.rfind("#start\t", 0) == 0) {
        start = line.substr(7);
      } else if (line.rfind("#max_depth\t", 0) == 0) {
        declared_depth = std::atoi(line.c_str() + 11);
        if (declared_depth < 2) fail(Errc::FormatError, "bad #max_depth");
      }
      continue;
    }
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? std::string::npos : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos) fail(Errc::FormatError, "expected 'depth<TAB>probability<TAB>pattern'");

    const std::string depth_field = line.substr(0, tab1);
    const std::string prob_field = line.substr(tab1 + 1, tab2 - tab1 - 1);
    char* end = nullptr;
    const long depth = std::strtol(depth_field.c_str(), &end, 10);
    if (depth_field.empty() || *end != '\0' || depth < 2) fail(Errc::FormatError, "bad depth '" + depth_field + "'");
    const double prob = std::strtod(prob_field.c_str(), &end);
    if (prob_field.empty() || *end != '\0') fail(Errc::FormatError, "bad probability '" + prob_field + "'");
    if (!std::isfinite(prob) || prob <= 0.0 || prob > 1.0)
      fail(Errc::InvalidProbability, "probability out of (0, 1]: " + prob_field);

    Rule r;
    r.depth = static_cast<int>(depth);
    try {
      r.pattern = parse_pattern(std::string_view(line).substr(tab2 + 1));
    } catch (const Error& e) {
      fail(Errc::FormatError, e.what());
    }
    if (!r.pattern.is_internal()) fail(Errc::FormatError, "rule pattern must have a nonterminal root");
    if (height(r.pattern) != static_cast<std::size_t>(depth))
      fail(Errc::FormatError, "pattern height " + std::to_string(height(r.pattern)) + " does not match depth " +
                                  depth_field);
    r.key = to_string(r.pattern);
    r.probability = prob;
    rules.push_back(std::move(r));
  }
  if (rules.empty()) throw Error(Errc::EmptyGrammar, source + ": grammar has no rules");

  int max_depth = declared_depth;
  for (const auto& r : rules) max_depth = std::max(max_depth, r.depth);
  Grammar g(start, max_depth);
  for (auto& r : rules) g.add(std::move(r));
  g.finish();
  return g;
}

inline Grammar load_grammar(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open grammar '" + path + "'");
  return read_grammar(in, path);
}

}  // namespace ctxparse

#endif
