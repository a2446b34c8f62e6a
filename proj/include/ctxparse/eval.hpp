// -*- mode: c++ -*-
#ifndef CTXPARSE_EVAL_HPP
#define CTXPARSE_EVAL_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ctxparse/corpus.hpp"
#include "ctxparse/error.hpp"
#include "ctxparse/grammar.hpp"
#include "ctxparse/index.hpp"
#include "ctxparse/parser.hpp"

namespace ctxparse {

/// xorshift64* (Marsaglia shifts 12/25/27, multiplier 0x2545F4914F6CDD1D),
/// seeded through one splitmix64 step so that every 64-bit seed, including
/// 0, gives a non-zero state.
class XorShift64Star {
 public:
  explicit XorShift64Star(std::uint64_t seed) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z ^= z >> 31;
    state_ = z ? z : 0x9E3779B97F4A7C15ull;
  }

  std::uint64_t next() {
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545F4914F6CDD1Dull;
  }

  /// Value in [0, bound) by plain modulo reduction.
  std::uint64_t below(std::uint64_t bound) { return next() % bound; }

 private:
  std::uint64_t state_;
};

/// Fisher-Yates shuffle of 0..n-1, swapping position i with below(i + 1)
/// for i = n-1 down to 1.
inline std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  XorShift64Star rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
  return perm;
}

/// Chunk c holds positions [c*n/folds, (c+1)*n/folds) of `order`.
inline std::vector<std::vector<std::size_t>> split_folds(const std::vector<std::size_t>& order, std::size_t folds) {
  std::vector<std::vector<std::size_t>> out(folds);
  const std::size_t n = order.size();
  for (std::size_t c = 0; c < folds; ++c)
    for (std::size_t p = c * n / folds; p < (c + 1) * n / folds; ++p) out[c].push_back(order[p]);
  return out;
}

struct EvalConfig {
  std::size_t folds = 100;
  std::size_t top_k = 20;
  std::size_t beam_width = 20;
  std::vector<int> depths{2, 3, 4, 5, 6, 7};
  std::uint64_t seed = 0;
  std::optional<std::size_t> max_sentence_len;  // longer sentences are dropped before permuting
  std::size_t jobs = 1;
  bool semantic_filter = true;

  void validate() const {
    if (folds < 2) throw Error(Errc::InvalidArgument, "folds must be >= 2");
    if (depths.empty()) throw Error(Errc::InvalidArgument, "no depths to evaluate");
    for (int d : depths)
      if (d < 2) throw Error(Errc::InvalidArgument, "depths must be >= 2");
    if (top_k == 0 || top_k > beam_width) throw Error(Errc::InvalidArgument, "need 0 < top_k <= beam_width");
    if (jobs == 0) throw Error(Errc::InvalidArgument, "jobs must be >= 1");
  }
};

struct SentenceRecord {
  std::size_t sentence_id = 0;  // line order in the treebank
  std::size_t fold = 0;
  std::size_t length = 0;
  std::size_t parses = 0;
  std::optional<std::size_t> rank;
  double seconds = 0.0;
};

struct DepthReport {
  int depth = 2;
  std::vector<SentenceRecord> records;  // by sentence id

  std::size_t sentences() const noexcept { return records.size(); }
  std::size_t parsed_count() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.parses > 0; }));
  }
  std::size_t correct_found_count() const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const auto& r) { return r.rank.has_value(); }));
  }
  double correct_found_rate() const {
    return records.empty() ? 0.0 : static_cast<double>(correct_found_count()) / static_cast<double>(records.size());
  }
  /// Mean rank over sentences whose gold tree was found.
  std::optional<double> avg_rank_of_correct() const {
    std::size_t found = 0;
    std::size_t total = 0;
    for (const auto& r : records)
      if (r.rank) {
        ++found;
        total += *r.rank;
      }
    if (found == 0) return std::nullopt;
    return static_cast<double>(total) / static_cast<double>(found);
  }
};

struct EvalReport {
  std::vector<DepthReport> depths;
  std::size_t folds_checked = 0;  // folds that passed the leakage assertion

  bool any_no_parse() const {
    for (const auto& d : depths)
      if (d.parsed_count() != d.sentences()) return true;
    return false;
  }
};

inline EvalReport cross_validate(const Treebank& tb, const EvalConfig& cfg) {
  cfg.validate();
  std::vector<std::size_t> kept;
  std::vector<Sentence> sentences(tb.size());
  for (std::size_t i = 0; i < tb.size(); ++i) {
    sentences[i] = yield(tb.trees[i]);
    if (!cfg.max_sentence_len || sentences[i].size() <= *cfg.max_sentence_len) kept.push_back(i);
  }
  if (kept.size() < cfg.folds)
    throw Error(Errc::CorpusTooSmall, "corpus of " + std::to_string(kept.size()) + " trees is smaller than " +
                                          std::to_string(cfg.folds) + " folds");

  const auto perm = seeded_permutation(kept.size(), cfg.seed);
  std::vector<std::size_t> order(kept.size());
  for (std::size_t p = 0; p < perm.size(); ++p) order[p] = kept[perm[p]];
  const auto chunks = split_folds(order, cfg.folds);
  const int deepest = *std::max_element(cfg.depths.begin(), cfg.depths.end());

  // fold -> depth slot -> records
  std::vector<std::vector<std::vector<SentenceRecord>>> results(cfg.folds);
  std::atomic<std::size_t> next_fold{0};
  std::atomic<std::size_t> checked{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto run_fold = [&](std::size_t f) {
    std::vector<bool> in_test(tb.size(), false);
    for (auto id : chunks[f]) in_test[id] = true;
    Treebank training;
    training.start = tb.start;
    std::vector<bool> in_train(tb.size(), false);
    for (std::size_t c = 0; c < cfg.folds; ++c) {
      if (c == f) continue;
      for (auto id : chunks[c]) {
        training.trees.push_back(tb.trees[id]);
        in_train[id] = true;
      }
    }
    for (auto id : chunks[f])
      if (in_train[id])
        throw Error(Errc::LeakageDetected, "tree " + std::to_string(id) + " is in its own training fold");
    ++checked;

    const Grammar g = train(training, std::max(deepest, 2));
    const SubtreeIndex index = build_index(g);
    results[f].resize(cfg.depths.size());
    for (std::size_t di = 0; di < cfg.depths.size(); ++di) {
      ParserConfig pc;
      pc.top_k = cfg.top_k;
      pc.beam_width = cfg.beam_width;
      pc.max_depth = cfg.depths[di];
      pc.semantic_filter_enabled = cfg.semantic_filter;
      const Parser parser(g, index, pc);
      for (auto id : chunks[f]) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto parses = parser.parse(sentences[id]);
        const auto t1 = std::chrono::steady_clock::now();
        SentenceRecord rec;
        rec.sentence_id = id;
        rec.fold = f;
        rec.length = sentences[id].size();
        rec.parses = parses.size();
        rec.rank = rank_of(tb.trees[id], parses);
        rec.seconds = std::chrono::duration<double>(t1 - t0).count();
        results[f][di].push_back(std::move(rec));
      }
    }
  };

  auto worker = [&] {
    while (true) {
      const auto f = next_fold++;
      if (f >= cfg.folds) return;
      try {
        run_fold(f);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next_fold = cfg.folds;
        return;
      }
    }
  };

  const auto jobs = std::min(cfg.jobs, cfg.folds);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  EvalReport report;
  report.folds_checked = checked;
  for (std::size_t di = 0; di < cfg.depths.size(); ++di) {
    DepthReport dr;
    dr.depth = cfg.depths[di];
    for (auto& fold : results)
      for (auto& rec : fold[di]) dr.records.push_back(rec);
    std::sort(dr.records.begin(), dr.records.end(),
              [](const auto& a, const auto& b) { return a.sentence_id < b.sentence_id; });
    report.depths.push_back(std::move(dr));
  }
  return report;
}

namespace detail {

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace detail

inline constexpr const char* kSummaryHeader = "depth,correct_found,correct_found_pct,avg_rank";
inline constexpr const char* kDetailsHeader = "depth,sentence,fold,length,parses,rank";

/// One row per depth: found count, percentage (1 decimal) and average rank of
/// the correct parse (2 decimals, NA when never found).
inline std::string summary_csv(const EvalReport& r) {
  std::ostringstream out;
  out << kSummaryHeader << '\n';
  for (const auto& d : r.depths) {
    const auto avg = d.avg_rank_of_correct();
    out << d.depth << ',' << d.correct_found_count() << ',' << detail::fixed(100.0 * d.correct_found_rate(), 1) << ','
        << (avg ? detail::fixed(*avg, 2) : std::string("NA")) << '\n';
  }
  return out.str();
}

inline std::string details_csv(const EvalReport& r) {
  std::ostringstream out;
  out << kDetailsHeader << '\n';
  for (const auto& d : r.depths)
    for (const auto& rec : d.records) {
      out << d.depth << ',' << rec.sentence_id << ',' << rec.fold << ',' << rec.length << ',' << rec.parses << ',';
      if (rec.rank) out << *rec.rank;
      out << '\n';
    }
  return out.str();
}

// Wall times are kept apart so that summary.csv and details.csv are
// reproducible byte for byte.
inline std::string timing_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "depth,sentence,seconds\n";
  for (const auto& d : r.depths)
    for (const auto& rec : d.records) out << d.depth << ',' << rec.sentence_id << ',' << detail::fixed(rec.seconds, 6) << '\n';
  return out.str();
}

/// Writes summary.csv, details.csv and timing.csv into `dir`.
inline void emit_report(const EvalReport& r, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::IoError, "cannot create '" + dir + "': " + ec.message());
  auto write = [&](const char* name, const std::string& body) {
    const auto path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write '" + path + "'");
    out << body;
    if (!out) throw Error(Errc::IoError, "write failed for '" + path + "'");
  };
  write("summary.csv", summary_csv(r));
  write("details.csv", details_csv(r));
  write("timing.csv", timing_csv(r));
}

}  // namespace ctxparse

#endif
