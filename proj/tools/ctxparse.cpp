#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ctxparse/ctxparse.hpp"

using namespace ctxparse;

namespace {

constexpr int kOk = 0;
constexpr int kNoParse = 1;
constexpr int kUsage = 2;

// Output file or stdout when the path is empty.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_.open(path, std::ios::binary);
    if (!file_) throw Error(Errc::IoError, "cannot write '" + path + "'");
  }
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  void close(const std::string& path) {
    if (!file_.is_open()) return;
    file_.close();
    if (!file_) throw Error(Errc::IoError, "write failed for '" + path + "'");
  }

 private:
  std::ofstream file_;
};

std::vector<ParseTree> read_tree_file(const std::string& path) {
  if (path == "-") return read_trees(std::cin, "<stdin>");
  return load_trees(path);
}

AmbiguationConfig config_or_empty(const std::string& path) {
  return path.empty() ? AmbiguationConfig{} : load_ambiguation_config(path);
}

std::string format_scientific(double p) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.11e", p);
  return buf;
}

struct TrainArgs {
  std::string treebank;
  std::string out;
  int max_depth = 2;
};

int cmd_train(const TrainArgs& a) {
  const auto tb = load_treebank(a.treebank);
  const auto g = train(tb, a.max_depth);
  save_grammar(g, a.out);
  std::map<int, std::size_t> counts;
  for (const auto& [cls, rules] : g.classes()) counts[cls.depth] += rules.size();
  for (int d = 2; d <= a.max_depth; ++d) std::cout << "depth=" << d << " rules=" << counts[d] << '\n';
  return kOk;
}

struct ParseArgs {
  std::string grammar;
  std::string sentence;
  bool from_stdin = false;
  std::size_t top_k = 20;
  std::optional<std::size_t> beam_width;
  std::optional<int> max_depth;
  bool no_filter = false;
};

int cmd_parse(const ParseArgs& a) {
  const auto g = load_grammar(a.grammar);
  const auto index = build_index(g);
  ParserConfig cfg;
  cfg.top_k = a.top_k;
  cfg.beam_width = a.beam_width.value_or(std::max<std::size_t>(cfg.beam_width, a.top_k));
  cfg.max_depth = a.max_depth;
  cfg.semantic_filter_enabled = !a.no_filter;
  const Parser parser(g, index, cfg);

  std::vector<Sentence> sentences;
  if (a.from_stdin) {
    std::string line;
    while (std::getline(std::cin, line)) {
      auto s = tokenize(line);
      if (!s.empty()) sentences.push_back(std::move(s));
    }
  } else {
    sentences.push_back(tokenize(a.sentence));
  }

  bool any_missing = false;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (i) std::cout << '\n';
    const auto results = parser.parse(sentences[i]);
    if (results.empty()) {
      any_missing = true;
      std::cerr << "no parse: " << join(sentences[i]) << '\n';
    }
    for (std::size_t r = 0; r < results.size(); ++r)
      std::cout << r + 1 << '\t' << format_scientific(results[r].probability()) << '\t' << results[r].canonical << '\n';
  }
  return any_missing ? kNoParse : kOk;
}

struct EvalArgs {
  std::string treebank;
  std::string out;
  EvalConfig cfg;
  std::optional<std::size_t> beam_width;
  bool no_filter = false;
};

int cmd_eval(EvalArgs a) {
  const auto tb = load_treebank(a.treebank);
  a.cfg.beam_width = a.beam_width.value_or(std::max(a.cfg.beam_width, a.cfg.top_k));
  a.cfg.semantic_filter = !a.no_filter;
  const auto report = cross_validate(tb, a.cfg);
  emit_report(report, a.out);
  std::cout << summary_csv(report);
  return report.any_no_parse() ? kNoParse : kOk;
}

struct AmbiguateArgs {
  std::string treebank;
  std::string config;
  std::string out;
};

int cmd_ambiguate(const AmbiguateArgs& a) {
  const auto cfg = config_or_empty(a.config);
  const auto trees = read_tree_file(a.treebank);
  Sink sink(a.out);
  for (const auto& t : trees) sink.out() << join(ambiguate(t, cfg)) << '\n';
  sink.close(a.out);
  return kOk;
}

struct TransformArgs {
  std::string mode;
  std::string config;
  std::string in = "-";
  std::string out;
};

int cmd_transform(const TransformArgs& a) {
  const auto cfg = config_or_empty(a.config);
  const auto trees = read_tree_file(a.in);
  Sink sink(a.out);
  for (const auto& t : trees) {
    const auto result = a.mode == "compress" ? compress_types(t, cfg) : wrap_concepts(t, cfg);
    sink.out() << to_string(result) << '\n';
  }
  sink.close(a.out);
  return kOk;
}

struct StatsArgs {
  std::string treebank;
  std::vector<int> depths{2};
};

int cmd_stats(const StatsArgs& a) {
  const auto trees = read_tree_file(a.treebank);
  std::cout << "trees=" << trees.size() << '\n';
  for (int d : a.depths) {
    std::set<std::string> distinct;
    std::size_t total = 0;
    for (const auto& t : trees)
      for (const auto& p : extract_rules(t, static_cast<std::size_t>(d))) {
        distinct.insert(to_string(p));
        ++total;
      }
    std::cout << "depth=" << d << " distinct=" << distinct.size() << " total=" << total << '\n';
  }
  std::map<std::size_t, std::size_t> heights;
  for (const auto& t : trees) ++heights[height(t)];
  for (const auto& [h, n] : heights) std::cout << "height=" << h << " trees=" << n << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic parsing with deep-subtree rules and semantic pruning"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a grammar from a treebank");
  train_cmd->add_option("--treebank", train_args.treebank, "Treebank file, one tree per line")->required();
  train_cmd->add_option("--max-depth", train_args.max_depth, "Deepest rule class to extract")
      ->check(CLI::Range(2, 64))
      ->capture_default_str();
  train_cmd->add_option("--out", train_args.out, "Grammar file to write")->required();

  ParseArgs parse_args;
  auto* parse_cmd = app.add_subcommand("parse", "Print the best parses of a sentence");
  parse_cmd->add_option("--grammar", parse_args.grammar, "Grammar file")->required();
  auto* sentence_opt = parse_cmd->add_option("--sentence", parse_args.sentence, "Whitespace separated tokens");
  auto* stdin_opt = parse_cmd->add_flag("--stdin", parse_args.from_stdin, "Parse one sentence per stdin line");
  sentence_opt->excludes(stdin_opt);
  parse_cmd->add_option("--top-k", parse_args.top_k, "Parses to print")->check(CLI::PositiveNumber)->capture_default_str();
  parse_cmd->add_option("--beam-width", parse_args.beam_width, "Chart entries kept per cell and nonterminal")
      ->check(CLI::PositiveNumber);
  parse_cmd->add_option("--max-depth", parse_args.max_depth, "Deepest rule class consulted")->check(CLI::Range(2, 64));
  parse_cmd->add_flag("--no-semantic-filter", parse_args.no_filter, "Keep parses with conflicting variable types");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Cross-validate a treebank and write CSV reports");
  eval_cmd->add_option("--treebank", eval_args.treebank, "Treebank file")->required();
  eval_cmd->add_option("--out", eval_args.out, "Report directory")->required();
  eval_cmd->add_option("--folds", eval_args.cfg.folds, "Number of folds")->check(CLI::Range(2, 1 << 30))->capture_default_str();
  eval_cmd->add_option("--depths", eval_args.cfg.depths, "Comma separated depths")
      ->delimiter(',')
      ->check(CLI::Range(2, 64))
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval_args.cfg.seed, "Permutation seed")->capture_default_str();
  eval_cmd->add_option("--top-k", eval_args.cfg.top_k, "Parses kept per sentence")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--beam-width", eval_args.beam_width, "Chart entries kept per cell and nonterminal")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_option("--jobs", eval_args.cfg.jobs, "Folds evaluated in parallel")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--max-sentence-len", eval_args.cfg.max_sentence_len, "Drop longer sentences")
      ->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--no-semantic-filter", eval_args.no_filter, "Disable variable type filtering");

  AmbiguateArgs amb_args;
  auto* amb_cmd = app.add_subcommand("ambiguate", "Print the informal sentence of each HOL tree");
  amb_cmd->add_option("--treebank", amb_args.treebank, "HOL trees, one per line ('-' for stdin)")->required();
  amb_cmd->add_option("--config", amb_args.config, "Ambiguation table");
  amb_cmd->add_option("--out", amb_args.out, "Output file (stdout by default)");

  TransformArgs tr_args;
  auto* tr_cmd = app.add_subcommand("transform", "Compress HOL types or wrap overloaded constants");
  tr_cmd->add_option("--mode", tr_args.mode, "compress or wrap")->required()->check(CLI::IsMember({"compress", "wrap"}));
  tr_cmd->add_option("--config", tr_args.config, "Ambiguation table");
  tr_cmd->add_option("--in", tr_args.in, "Input trees ('-' for stdin)")->capture_default_str();
  tr_cmd->add_option("--out", tr_args.out, "Output file (stdout by default)");

  StatsArgs stats_args;
  auto* stats_cmd = app.add_subcommand("stats", "Count rule patterns per depth");
  stats_cmd->add_option("--treebank", stats_args.treebank, "Treebank file")->required();
  stats_cmd->add_option("--depths", stats_args.depths, "Comma separated depths")
      ->delimiter(',')
      ->check(CLI::Range(2, 64))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train_args);
    if (*parse_cmd) {
      if (!*sentence_opt && !parse_args.from_stdin) {
        std::cerr << "parse: one of --sentence or --stdin is required\n";
        return kUsage;
      }
      return cmd_parse(parse_args);
    }
    if (*eval_cmd) return cmd_eval(eval_args);
    if (*amb_cmd) return cmd_ambiguate(amb_args);
    if (*tr_cmd) return cmd_transform(tr_args);
    if (*stats_cmd) return cmd_stats(stats_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
