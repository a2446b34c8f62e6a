#include <gtest/gtest.h>

#include <random>
#include <set>

#include "ctxparse/eval.hpp"
#include "support/fixtures.hpp"

using namespace ctxparse;
using fixtures::error_code;

namespace {

// Worked-example tree with its four leaf tokens redrawn, so every copy has
// the same shape but not the same yield.
Treebank perturbed_gold_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> digits{"1", "2", "3", "4", "5"};
  const std::vector<std::string> vars{"x", "y", "z"};
  auto pick = [&](const auto& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
  Treebank tb;
  for (std::size_t i = 0; i < n; ++i)
    tb.trees.push_back(parse_tree("(S (Num (Num (Num " + pick(digits) + ") * (Num " + pick(vars) + ")) + (Num (Num " +
                                  pick(digits) + ") * (Num " + pick(vars) + "))) .)"));
  return tb;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

EvalConfig small_config() {
  EvalConfig cfg;
  cfg.folds = 5;
  cfg.depths = {2, 3};
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST(Rng, ReferenceValues) {
  // Reference values from an independent arbitrary-precision implementation.
  XorShift64Star a(0);
  EXPECT_EQ(a.next(), 0x7bbcb40d550682d0ull);
  EXPECT_EQ(a.next(), 0xde7fe413d00cc9fdull);
  EXPECT_EQ(a.next(), 0xb3c638353c668c91ull);
  XorShift64Star b(42);
  EXPECT_EQ(b.next(), 0x31b0ece7c4f697a2ull);
  EXPECT_EQ(b.next(), 0x9008a3b1cb686f03ull);
  EXPECT_EQ(seeded_permutation(10, 0), (std::vector<std::size_t>{2, 3, 0, 7, 5, 9, 6, 1, 4, 8}));
  EXPECT_EQ(seeded_permutation(10, 7), (std::vector<std::size_t>{4, 0, 6, 2, 1, 3, 9, 5, 7, 8}));
}

TEST(Rng, PermutationProperties) {
  EXPECT_TRUE(seeded_permutation(0, 3).empty());
  EXPECT_EQ(seeded_permutation(1, 3), std::vector<std::size_t>{0});
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto n = 1 + seed * 7;
    auto p = seeded_permutation(n, seed);
    ASSERT_EQ(p, seeded_permutation(n, seed));
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(p[i], i);
  }
  EXPECT_NE(seeded_permutation(100, 1), seeded_permutation(100, 2));
}

TEST(Folds, ChunksPartitionTheCorpus) {
  for (std::size_t n = 2; n < 120; n += 7)
    for (std::size_t folds = 2; folds <= n; folds += 3) {
      const auto order = seeded_permutation(n, n * 31 + folds);
      const auto chunks = split_folds(order, folds);
      ASSERT_EQ(chunks.size(), folds);
      std::vector<std::size_t> all;
      std::size_t lo = n;
      std::size_t hi = 0;
      for (const auto& c : chunks) {
        lo = std::min(lo, c.size());
        hi = std::max(hi, c.size());
        all.insert(all.end(), c.begin(), c.end());
      }
      ASSERT_LE(hi - lo, 1u);
      ASSERT_EQ(all, order);  // chunks are consecutive slices, hence disjoint and covering
    }
}

TEST(CrossValidate, TenTreesFiveFolds) {
  auto tb = fixtures::ArithmeticCorpus(5).treebank(10, 1, 3);
  const auto report = cross_validate(tb, small_config());
  EXPECT_EQ(report.folds_checked, 5u);
  ASSERT_EQ(report.depths.size(), 2u);
  for (const auto& d : report.depths) {
    ASSERT_EQ(d.sentences(), 10u);
    std::map<std::size_t, std::size_t> per_fold;
    for (std::size_t i = 0; i < 10; ++i) {
      const auto& r = d.records[i];
      EXPECT_EQ(r.sentence_id, i);
      EXPECT_EQ(r.length, yield(tb.trees[i]).size());
      EXPECT_LE(r.parses, 20u);
      if (r.rank) {
        EXPECT_GE(*r.rank, 1u);
        EXPECT_LE(*r.rank, r.parses);
      }
      ++per_fold[r.fold];
    }
    EXPECT_EQ(per_fold.size(), 5u);
    for (const auto& [f, count] : per_fold) EXPECT_EQ(count, 2u);
    EXPECT_LE(d.correct_found_count(), d.parsed_count());
    EXPECT_LE(d.parsed_count(), d.sentences());
    EXPECT_DOUBLE_EQ(d.correct_found_rate(), d.correct_found_count() / 10.0);
  }
}

TEST(CrossValidate, RecordsMatchADirectRetrain) {
  auto tb = fixtures::ArithmeticCorpus(9).treebank(12, 1, 4);
  auto cfg = small_config();
  cfg.folds = 4;
  const auto report = cross_validate(tb, cfg);
  const auto chunks = split_folds(seeded_permutation(tb.size(), cfg.seed), cfg.folds);
  for (std::size_t f = 0; f < cfg.folds; ++f) {
    Treebank training;
    for (std::size_t c = 0; c < cfg.folds; ++c)
      if (c != f)
        for (auto id : chunks[c]) training.trees.push_back(tb.trees[id]);
    for (std::size_t di = 0; di < cfg.depths.size(); ++di) {
      const auto g = train(training, cfg.depths[di]);
      const auto index = build_index(g);
      ParserConfig pc;
      pc.max_depth = cfg.depths[di];
      for (auto id : chunks[f]) {
        const auto parses = parse(g, index, yield(tb.trees[id]), pc);
        const auto& rec = report.depths[di].records[id];
        EXPECT_EQ(rec.fold, f);
        EXPECT_EQ(rec.parses, parses.size());
        EXPECT_EQ(rec.rank, rank_of(tb.trees[id], parses));
      }
    }
  }
}

TEST(CrossValidate, Errors) {
  auto tb = fixtures::ArithmeticCorpus(1).treebank(4, 1, 2);
  auto cfg = small_config();
  EXPECT_EQ(error_code([&] { cross_validate(tb, cfg); }), Errc::CorpusTooSmall);
  tb = fixtures::ArithmeticCorpus(1).treebank(8, 0, 3);
  cfg.max_sentence_len = 3;  // only the zero-operator sentences survive, and not five of them
  EXPECT_EQ(error_code([&] { cross_validate(tb, cfg); }), Errc::CorpusTooSmall);

  auto bad = small_config();
  bad.folds = 1;
  EXPECT_EQ(error_code([&] { bad.validate(); }), Errc::InvalidArgument);
  bad = small_config();
  bad.depths = {1, 2};
  EXPECT_EQ(error_code([&] { bad.validate(); }), Errc::InvalidArgument);
  bad = small_config();
  bad.depths.clear();
  EXPECT_EQ(error_code([&] { bad.validate(); }), Errc::InvalidArgument);
  bad = small_config();
  bad.jobs = 0;
  EXPECT_EQ(error_code([&] { bad.validate(); }), Errc::InvalidArgument);
  bad = small_config();
  bad.top_k = 21;
  EXPECT_EQ(error_code([&] { bad.validate(); }), Errc::InvalidArgument);
}

TEST(CrossValidate, MaxSentenceLengthDropsLongSentences) {
  auto tb = fixtures::ArithmeticCorpus(3).treebank(30, 0, 5);
  auto cfg = small_config();
  cfg.max_sentence_len = 8;
  const auto report = cross_validate(tb, cfg);
  std::size_t expected = 0;
  for (const auto& t : tb.trees) expected += yield(t).size() <= 8;
  for (const auto& d : report.depths) {
    EXPECT_EQ(d.sentences(), expected);
    for (const auto& r : d.records) EXPECT_LE(r.length, 8u);
  }
}

TEST(CrossValidate, DefaultsMirrorTheOriginalProtocol) {
  const EvalConfig cfg;
  EXPECT_EQ(cfg.folds, 100u);
  EXPECT_EQ(cfg.top_k, 20u);
  EXPECT_EQ(cfg.depths, (std::vector<int>{2, 3, 4, 5, 6, 7}));
  EXPECT_FALSE(cfg.max_sentence_len);
}

TEST(CrossValidate, DeterministicAndSchedulingIndependent) {
  auto tb = fixtures::ArithmeticCorpus(21).treebank(40, 1, 4);
  auto cfg = small_config();
  cfg.folds = 8;
  const auto a = cross_validate(tb, cfg);
  const auto b = cross_validate(tb, cfg);
  cfg.jobs = 4;
  const auto c = cross_validate(tb, cfg);
  EXPECT_EQ(summary_csv(a), summary_csv(b));
  EXPECT_EQ(details_csv(a), details_csv(b));
  EXPECT_EQ(summary_csv(a), summary_csv(c));
  EXPECT_EQ(details_csv(a), details_csv(c));
  cfg.seed = 12;
  EXPECT_NE(details_csv(a), details_csv(cross_validate(tb, cfg)));
}

TEST(CrossValidate, DeepRulesHelpOnPerturbedWorkedExample) {
  const auto tb = perturbed_gold_corpus(100, 4);
  EvalConfig cfg;
  cfg.folds = 10;
  cfg.depths = {2, 3};
  const auto report = cross_validate(tb, cfg);
  const auto& d2 = report.depths[0];
  const auto& d3 = report.depths[1];
  EXPECT_EQ(d2.parsed_count(), 100u);
  EXPECT_GE(d3.correct_found_rate(), d2.correct_found_rate());
  ASSERT_TRUE(d2.avg_rank_of_correct() && d3.avg_rank_of_correct());
  EXPECT_LE(*d3.avg_rank_of_correct(), *d2.avg_rank_of_correct());
  // Every bracketing ties at depth 2; at depth 3 the training shape wins outright.
  EXPECT_DOUBLE_EQ(*d3.avg_rank_of_correct(), 1.0);
  EXPECT_GT(*d2.avg_rank_of_correct(), 1.0);
}

TEST(Report, ExactHeaderAndFormatting) {
  EvalReport r;
  DepthReport d;
  d.depth = 3;
  for (std::size_t i = 0; i < 3; ++i) {
    SentenceRecord rec;
    rec.sentence_id = i;
    rec.length = 4;
    rec.parses = i == 2 ? 0 : 5;
    if (i == 0) rec.rank = 1;
    if (i == 1) rec.rank = 2;
    d.records.push_back(rec);
  }
  r.depths.push_back(d);
  DepthReport none;
  none.depth = 4;
  SentenceRecord miss;
  none.records.push_back(miss);
  r.depths.push_back(none);
  EXPECT_EQ(summary_csv(r),
            "depth,correct_found,correct_found_pct,avg_rank\n"
            "3,2,66.7,1.50\n"
            "4,0,0.0,NA\n");
  EXPECT_EQ(details_csv(r),
            "depth,sentence,fold,length,parses,rank\n"
            "3,0,0,4,5,1\n"
            "3,1,0,4,5,2\n"
            "3,2,0,4,0,\n"
            "4,0,0,0,0,\n");
  EXPECT_TRUE(r.any_no_parse());
}

TEST(Report, EmptyReportWritesHeadersOnly) {
  fixtures::TempDir dir("empty_report");
  emit_report(EvalReport{}, dir.file("out"));
  EXPECT_EQ(fixtures::slurp(dir.file("out/summary.csv")), std::string(kSummaryHeader) + "\n");
  EXPECT_EQ(fixtures::slurp(dir.file("out/details.csv")), std::string(kDetailsHeader) + "\n");
  EXPECT_EQ(fixtures::slurp(dir.file("out/timing.csv")), "depth,sentence,seconds\n");
}

TEST(Report, ReemissionIsIdempotent) {
  auto tb = fixtures::ArithmeticCorpus(2).treebank(10, 1, 3);
  const auto report = cross_validate(tb, small_config());
  fixtures::TempDir dir("reemit");
  emit_report(report, dir.path().string());
  const auto s1 = fixtures::slurp(dir.file("summary.csv"));
  const auto d1 = fixtures::slurp(dir.file("details.csv"));
  const auto t1 = fixtures::slurp(dir.file("timing.csv"));
  emit_report(report, dir.path().string());
  EXPECT_EQ(fixtures::slurp(dir.file("summary.csv")), s1);
  EXPECT_EQ(fixtures::slurp(dir.file("details.csv")), d1);
  EXPECT_EQ(fixtures::slurp(dir.file("timing.csv")), t1);
}

TEST(Report, UnwritableDirectoryIsIoError) {
  fixtures::TempDir dir("io");
  fixtures::spit(dir.file("blocker"), "x");
  EXPECT_EQ(error_code([&] { emit_report(EvalReport{}, dir.file("blocker/sub")); }), Errc::IoError);
}

// Rebuilds summary.csv from nothing but the rows of details.csv.
TEST(Report, SummaryRecomputableFromDetails) {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto tb = fixtures::ArithmeticCorpus(seed).treebank(25, 0, 5);
    auto cfg = small_config();
    cfg.seed = seed;
    cfg.top_k = 3;
    cfg.beam_width = 3;
    cfg.depths = {2, 3, 4};
    const auto report = cross_validate(tb, cfg);
    const auto lines = split(details_csv(report), '\n');
    ASSERT_EQ(lines.front(), kDetailsHeader);
    std::map<int, std::tuple<std::size_t, std::size_t, std::size_t>> acc;  // depth -> rows, found, rank sum
    std::vector<int> order;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const auto f = split(lines[i], ',');
      ASSERT_EQ(f.size(), 6u);
      const int depth = std::stoi(f[0]);
      if (!acc.count(depth)) order.push_back(depth);
      auto& [rows, found, sum] = acc[depth];
      ++rows;
      if (!f[5].empty()) {
        ++found;
        sum += std::stoul(f[5]);
      }
    }
    std::string rebuilt = std::string(kSummaryHeader) + "\n";
    for (int depth : order) {
      const auto [rows, found, sum] = acc[depth];
      char buf[128];
      std::snprintf(buf, sizeof buf, "%d,%zu,%.1f,", depth, found, 100.0 * found / rows);
      rebuilt += buf;
      if (found) {
        std::snprintf(buf, sizeof buf, "%.2f", static_cast<double>(sum) / found);
        rebuilt += buf;
      } else {
        rebuilt += "NA";
      }
      rebuilt += "\n";
    }
    EXPECT_EQ(rebuilt, summary_csv(report));
  }
}
