// -*- mode: c++ -*-
#ifndef CTXPARSE_PARSER_HPP
#define CTXPARSE_PARSER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctxparse/error.hpp"
#include "ctxparse/grammar.hpp"
#include "ctxparse/index.hpp"
#include "ctxparse/pattern.hpp"
#include "ctxparse/sexpr.hpp"
#include "ctxparse/tree.hpp"

namespace ctxparse {

struct ParserConfig {
  static constexpr std::size_t unlimited = std::numeric_limits<std::size_t>::max();

  std::size_t top_k = 20;
  std::size_t beam_width = 20;  // per root nonterminal and cell
  std::optional<int> max_depth;  // deepest rule class consulted; grammar's by default
  std::size_t unary_chain_limit = 3;
  bool semantic_filter_enabled = true;
  bool recompute_after_cut = false;  // phase (ii) on beam survivors only

  // Variable bindings are harvested from `(<type_prefix>...)` nodes whose sole
  // child is `(<variable_label> name)`.
  std::string type_prefix = "(Type ";
  std::string variable_label = "Var";

  void validate() const {
    if (top_k == 0) throw Error(Errc::InvalidArgument, "top_k must be positive");
    if (top_k > beam_width) throw Error(Errc::InvalidArgument, "top_k must not exceed beam_width");
    if (max_depth && *max_depth < 2) throw Error(Errc::InvalidArgument, "max_depth must be >= 2");
  }
};

/// Free variable -> type nonterminal, sorted by variable.
using Bindings = std::vector<std::pair<std::string, std::string>>;

/// Union of two binding maps, or nullopt when a variable would get two types.
inline std::optional<Bindings> merge_bindings(const Bindings& a, const Bindings& b) {
  if (b.empty()) return a;
  if (a.empty()) return b;
  Bindings out;
  out.reserve(a.size() + b.size());
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (ia->first < ib->first) {
      out.push_back(*ia++);
    } else if (ib->first < ia->first) {
      out.push_back(*ib++);
    } else {
      if (ia->second != ib->second) return std::nullopt;
      out.push_back(*ia++);
      ++ib;
    }
  }
  out.insert(out.end(), ia, a.end());
  out.insert(out.end(), ib, b.end());
  return out;
}

/// One analysis of a span rooted at one nonterminal.
struct ChartEntry {
  struct Child {
    const ChartEntry* entry = nullptr;  // nullptr: terminal token at `token`
    std::uint32_t token = 0;
  };

  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  std::uint32_t nonterminal = 0;
  const std::string* label = nullptr;
  std::vector<Child> children;
  double rule_log_prob = 0.0;
  double cf_log_prob = 0.0;  // depth-2 rule times children
  double log_prob = 0.0;     // after max-combination with deep rules
  Bindings bindings;
  std::string key;  // canonical tree string
  std::uint32_t height = 0;
  std::uint32_t unary_chain = 0;  // stacked unary rules on top of a base analysis
};

inline std::optional<Bindings> semantic_filter(const ChartEntry& left, const ChartEntry& right) {
  return merge_bindings(left.bindings, right.bindings);
}

struct ParseResult {
  ParseTree tree;
  std::string canonical;
  double log_prob = 0.0;

  double probability() const { return std::exp(log_prob); }
};

/// 1-based position of `target` in `results`.
inline std::optional<std::size_t> rank_of(const ParseTree& target, const std::vector<ParseResult>& results) {
  const auto key = to_string(target);
  for (std::size_t i = 0; i < results.size(); ++i)
    if (results[i].canonical == key) return i + 1;
  return std::nullopt;
}

// Probabilistic CYK over depth-2 rules of arbitrary arity.
//
// Rules are consumed left to right through dotted items, which plays the role
// of binarization without rewriting the grammar; the rule probability is
// applied when the last symbol is matched. A cell is finished in two phases:
// (i) all candidates from depth-2 rules, closed under unary rules; (ii) each
// candidate's probability becomes the maximum of its context-free value and,
// for every depth d = 3..m it reaches, p(deep pattern) times the
// probabilities of the subtrees at the pattern's frontier. The per-nonterminal
// beam is applied afterwards. Log probabilities throughout.
class Parser {
 public:
  Parser(const Grammar& g, const SubtreeIndex& index, ParserConfig cfg = {})
      : index_(&index), cfg_(std::move(cfg)) {
    cfg_.validate();
    max_depth_ = cfg_.max_depth.value_or(g.max_depth());
    compile(g);
  }

  Parser(const Parser&) = delete;
  Parser& operator=(const Parser&) = delete;

  const ParserConfig& config() const noexcept { return cfg_; }

  /// Up to top_k parses rooted at the start symbol, best first; ties are
  /// ordered by canonical tree string. Empty when the sentence has no parse.
  std::vector<ParseResult> parse(const Sentence& tokens) const {
    Run run(*this, tokens);
    return run.execute();
  }

 private:
  struct Symbol {
    bool terminal = false;
    std::uint32_t nonterminal = 0;
    std::string token;
  };
  struct CompiledRule {
    std::uint32_t lhs = 0;
    std::vector<Symbol> rhs;
    double log_prob = 0.0;
  };
  struct Active {
    const CompiledRule* rule = nullptr;
    std::uint32_t dot = 0;  // symbols matched
    const Active* prev = nullptr;
    ChartEntry::Child child;
    Bindings bindings;
  };
  struct Cell {
    std::vector<const ChartEntry*> survivors;
    std::unordered_map<std::uint32_t, std::vector<const ChartEntry*>> by_nonterminal;
    std::vector<const Active*> actives;
  };

  std::uint32_t intern(const std::string& label) {
    auto [it, inserted] = nt_ids_.emplace(label, static_cast<std::uint32_t>(nt_labels_.size()));
    if (inserted) nt_labels_.push_back(label);
    return it->second;
  }

  void compile(const Grammar& g) {
    for (const auto& [cls, rules] : g.classes())
      if (cls.depth == 2) intern(cls.lhs);
    for (const Rule* r : g.rules(2)) {
      CompiledRule c;
      c.lhs = intern(r->lhs());
      c.log_prob = std::log(r->probability);
      for (const auto& child : r->pattern.children) {
        Symbol s;
        if (child.is_terminal()) {
          s.terminal = true;
          s.token = child.label;
        } else {
          s.nonterminal = intern(child.label);
        }
        c.rhs.push_back(std::move(s));
      }
      rules_.push_back(std::move(c));
    }
    unary_.resize(nt_labels_.size());
    starts_nt_.resize(nt_labels_.size());
    for (const auto& r : rules_) {
      const auto& first = r.rhs.front();
      if (r.rhs.size() == 1) {
        if (first.terminal)
          lexical_[first.token].push_back(&r);
        else
          unary_[first.nonterminal].push_back(&r);
      } else if (first.terminal) {
        starts_term_[first.token].push_back(&r);
      } else {
        starts_nt_[first.nonterminal].push_back(&r);
      }
    }
    if (auto it = nt_ids_.find(g.start()); it != nt_ids_.end()) start_ = it->second;
    var_id_ = nt_ids_.count(cfg_.variable_label) ? nt_ids_.at(cfg_.variable_label) : kNone;
    deep_enabled_ = max_depth_ >= 3 && !index_->empty();
  }

  static bool better(const ChartEntry* a, const ChartEntry* b) {
    if (a->log_prob != b->log_prob) return a->log_prob > b->log_prob;
    return a->key < b->key;
  }

  class Run {
   public:
    Run(const Parser& p, const Sentence& tokens) : p_(p), tokens_(tokens), n_(tokens.size()) {
      cells_.resize((n_ + 1) * (n_ + 1));
    }

    std::vector<ParseResult> execute() {
      if (n_ == 0 || p_.start_ == kNone) return {};
      for (std::size_t len = 1; len <= n_; ++len)
        for (std::size_t i = 0; i + len <= n_; ++i) complete_cell(i, i + len);

      const auto& root = cell(0, n_).by_nonterminal;
      auto it = root.find(p_.start_);
      if (it == root.end()) return {};
      std::vector<const ChartEntry*> best = it->second;
      std::sort(best.begin(), best.end(), better);
      if (best.size() > p_.cfg_.top_k) best.resize(p_.cfg_.top_k);

      std::vector<ParseResult> out;
      out.reserve(best.size());
      for (const auto* e : best) out.push_back({materialize(*e), e->key, e->log_prob});
      return out;
    }

   private:
    Cell& cell(std::size_t i, std::size_t j) { return cells_[i * (n_ + 1) + j]; }

    void complete_cell(std::size_t i, std::size_t j) {
      std::vector<ChartEntry*> candidates;
      auto& here = cell(i, j);

      if (j == i + 1) {
        if (auto it = p_.lexical_.find(tokens_[i]); it != p_.lexical_.end())
          for (const auto* rule : it->second) {
            ChartEntry::Child c{nullptr, static_cast<std::uint32_t>(i)};
            if (auto* e = make_entry(*rule, {c}, {}, i, j, 0)) candidates.push_back(e);
          }
        if (auto it = p_.starts_term_.find(tokens_[i]); it != p_.starts_term_.end())
          for (const auto* rule : it->second) {
            actives_.push_back(Active{rule, 1, nullptr, {nullptr, static_cast<std::uint32_t>(i)}, {}});
            here.actives.push_back(&actives_.back());
          }
      }

      for (std::size_t k = i + 1; k < j; ++k) {
        for (const Active* act : cell(i, k).actives) {
          const auto& next = act->rule->rhs[act->dot];
          if (next.terminal) {
            if (k + 1 == j && tokens_[k] == next.token)
              extend(*act, {nullptr, static_cast<std::uint32_t>(k)}, nullptr, i, j, candidates);
          } else {
            const auto& right = cell(k, j).by_nonterminal;
            auto it = right.find(next.nonterminal);
            if (it == right.end()) continue;
            for (const ChartEntry* e : it->second) extend(*act, {e, 0}, &e->bindings, i, j, candidates);
          }
        }
      }

      // Phase (i) continued: unary closure. Children are finalized before
      // their unary parents are built.
      const bool late = p_.cfg_.recompute_after_cut;
      if (!late)
        for (auto* e : candidates) finalize(*e);
      for (std::size_t q = 0; q < candidates.size(); ++q) {
        ChartEntry* child = candidates[q];
        if (child->unary_chain >= p_.cfg_.unary_chain_limit) continue;
        for (const auto* rule : p_.unary_[child->nonterminal]) {
          if (in_chain(*child, rule->lhs)) continue;
          if (auto* e = make_entry(*rule, {{child, 0}}, child->bindings, i, j, child->unary_chain + 1)) {
            if (!late) finalize(*e);
            candidates.push_back(e);
          }
        }
      }

      // Beam per root nonterminal.
      std::unordered_map<std::uint32_t, std::vector<ChartEntry*>> groups;
      for (auto* e : candidates) groups[e->nonterminal].push_back(e);
      const auto beam = p_.cfg_.beam_width;
      for (auto& [nt, group] : groups) {
        if (late) {
          // Survivors by context-free score, then recomputed.
          std::sort(group.begin(), group.end(), [](const ChartEntry* a, const ChartEntry* b) {
            if (a->cf_log_prob != b->cf_log_prob) return a->cf_log_prob > b->cf_log_prob;
            return a->key < b->key;
          });
        } else if (group.size() > beam) {
          std::sort(group.begin(), group.end(), better);
        }
        if (group.size() > beam) group.resize(beam);
        auto& slot = here.by_nonterminal[nt];
        for (auto* e : group) {
          slot.push_back(e);
          here.survivors.push_back(e);
        }
      }
      if (late) {
        std::vector<ChartEntry*> kept;
        for (auto* e : candidates)
          if (std::find(here.survivors.begin(), here.survivors.end(), e) != here.survivors.end()) kept.push_back(e);
        for (auto* e : kept) finalize(*e);
      }
      std::sort(here.survivors.begin(), here.survivors.end(), better);

      for (const ChartEntry* e : here.survivors)
        for (const auto* rule : p_.starts_nt_[e->nonterminal]) {
          actives_.push_back(Active{rule, 1, nullptr, {e, 0}, e->bindings});
          here.actives.push_back(&actives_.back());
        }
    }

    void extend(const Active& act, ChartEntry::Child child, const Bindings* child_bindings, std::size_t i,
                std::size_t j, std::vector<ChartEntry*>& candidates) {
      Bindings merged;
      if (child_bindings) {
        auto m = merge_bindings(act.bindings, *child_bindings);
        if (!m) {
          if (p_.cfg_.semantic_filter_enabled) return;
          merged = act.bindings;  // unchecked; conflicts are ignored
        } else {
          merged = std::move(*m);
        }
      } else {
        merged = act.bindings;
      }
      const auto dot = act.dot + 1;
      if (dot < act.rule->rhs.size()) {
        actives_.push_back(Active{act.rule, dot, &act, child, std::move(merged)});
        cell(i, j).actives.push_back(&actives_.back());
        return;
      }
      std::vector<ChartEntry::Child> children(dot);
      children[dot - 1] = child;
      const Active* cur = &act;
      for (std::size_t pos = dot - 1; pos-- > 0;) {
        children[pos] = cur->child;
        cur = cur->prev;
      }
      if (auto* e = make_entry(*act.rule, std::move(children), std::move(merged), i, j, 0)) candidates.push_back(e);
    }

    bool in_chain(const ChartEntry& e, std::uint32_t nt) const {
      const ChartEntry* cur = &e;
      while (true) {
        if (cur->nonterminal == nt) return true;
        if (cur->unary_chain == 0) return false;
        cur = cur->children.front().entry;
      }
    }

    ChartEntry* make_entry(const CompiledRule& rule, std::vector<ChartEntry::Child> children, Bindings bindings,
                           std::size_t i, std::size_t j, std::uint32_t unary_chain) {
      entries_.emplace_back();
      ChartEntry& e = entries_.back();
      e.begin = static_cast<std::uint32_t>(i);
      e.end = static_cast<std::uint32_t>(j);
      e.nonterminal = rule.lhs;
      e.label = &p_.nt_labels_[rule.lhs];
      e.unary_chain = unary_chain;
      e.rule_log_prob = rule.log_prob;
      e.cf_log_prob = rule.log_prob;
      std::uint32_t h = 1;
      e.key = "(";
      sexpr::append_atom(e.key, *e.label);
      for (const auto& c : children) {
        e.key += ' ';
        if (c.entry) {
          e.cf_log_prob += c.entry->log_prob;
          h = std::max(h, c.entry->height);
          e.key += c.entry->key;
        } else {
          sexpr::append_atom(e.key, tokens_[c.token]);
        }
      }
      e.key += ')';
      e.height = h + 1;
      e.log_prob = e.cf_log_prob;
      e.children = std::move(children);
      e.bindings = std::move(bindings);

      // (Type τ) over (Var name) binds name to the type.
      if (p_.var_id_ != kNone && e.children.size() == 1 && e.children[0].entry &&
          e.children[0].entry->nonterminal == p_.var_id_ &&
          e.label->compare(0, p_.cfg_.type_prefix.size(), p_.cfg_.type_prefix) == 0) {
        const ChartEntry& var = *e.children[0].entry;
        if (var.children.size() == 1 && !var.children[0].entry) {
          Bindings own{{tokens_[var.children[0].token], *e.label}};
          auto m = merge_bindings(e.bindings, own);
          if (!m) {
            if (p_.cfg_.semantic_filter_enabled) {
              entries_.pop_back();
              return nullptr;
            }
          } else {
            e.bindings = std::move(*m);
          }
        }
      }
      return &e;
    }

    Pattern truncate_entry(const ChartEntry& e, std::size_t level, std::size_t depth,
                           std::vector<const ChartEntry*>& frontier) const {
      if (level == depth) {
        frontier.push_back(&e);
        return Pattern::frontier(*e.label);
      }
      std::vector<Pattern> kids;
      kids.reserve(e.children.size());
      for (const auto& c : e.children) {
        if (c.entry)
          kids.push_back(truncate_entry(*c.entry, level + 1, depth, frontier));
        else
          kids.push_back(Pattern::terminal(tokens_[c.token]));
      }
      return Pattern::internal(*e.label, std::move(kids));
    }

    // Phase (ii). Children are final by the time their parent is finalized.
    void finalize(ChartEntry& e) const {
      e.cf_log_prob = e.rule_log_prob;
      for (const auto& c : e.children)
        if (c.entry) e.cf_log_prob += c.entry->log_prob;
      e.log_prob = e.cf_log_prob;
      if (!p_.deep_enabled_) return;
      const auto top = std::min<std::size_t>(static_cast<std::size_t>(p_.max_depth_), e.height);
      std::vector<const ChartEntry*> frontier;
      for (std::size_t d = 3; d <= top; ++d) {
        frontier.clear();
        const Pattern pattern = truncate_entry(e, 1, d, frontier);
        const auto match = p_.index_->find(pattern);
        if (!match) continue;
        double candidate = std::log(match->probability);
        for (const auto* f : frontier) candidate += f->log_prob;
        e.log_prob = std::max(e.log_prob, candidate);
      }
    }

    ParseTree materialize(const ChartEntry& e) const {
      ParseTree t(*e.label);
      t.children.reserve(e.children.size());
      for (const auto& c : e.children) {
        if (c.entry)
          t.children.push_back(materialize(*c.entry));
        else
          t.children.emplace_back(tokens_[c.token]);
      }
      return t;
    }

    const Parser& p_;
    const Sentence& tokens_;
    std::size_t n_;
    std::vector<Cell> cells_;
    std::deque<ChartEntry> entries_;
    std::deque<Active> actives_;
  };

  static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

  const SubtreeIndex* index_;
  ParserConfig cfg_;
  int max_depth_ = 2;
  bool deep_enabled_ = false;
  std::unordered_map<std::string, std::uint32_t> nt_ids_;
  std::vector<std::string> nt_labels_;
  std::deque<CompiledRule> rules_;
  std::unordered_map<std::string, std::vector<const CompiledRule*>> lexical_;
  std::unordered_map<std::string, std::vector<const CompiledRule*>> starts_term_;
  std::vector<std::vector<const CompiledRule*>> unary_;
  std::vector<std::vector<const CompiledRule*>> starts_nt_;
  std::uint32_t start_ = kNone;
  std::uint32_t var_id_ = kNone;
};

inline std::vector<ParseResult> parse(const Grammar& g, const SubtreeIndex& index, const Sentence& sentence,
                                      const ParserConfig& cfg = {}) {
  return Parser(g, index, cfg).parse(sentence);
}

}  // namespace ctxparse

#endif
