#ifndef CTXPARSE_TESTS_FIXTURES_HPP
#define CTXPARSE_TESTS_FIXTURES_HPP

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ctxparse/ctxparse.hpp"

namespace fixtures {

/// Code of the ctxparse::Error thrown by `f`, or nullopt if none is thrown.
template <class F>
std::optional<ctxparse::Errc> error_code(F&& f) {
  try {
    f();
  } catch (const ctxparse::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline std::string data_path(const std::string& name) { return std::string(CTXPARSE_DATA_DIR) + "/" + name; }

// The arithmetic example "1 * x + 2 * x ." with its gold tree, followed by
// every bracketing the six induced productions admit.
inline const std::string kGold = "(S (Num (Num (Num 1) * (Num x)) + (Num (Num 2) * (Num x))) .)";
inline const std::string kSentence = "1 * x + 2 * x .";
inline const std::array<std::string, 5> kAllParses{
    "(S (Num (Num 1) * (Num (Num (Num x) + (Num 2)) * (Num x))) .)",
    "(S (Num (Num 1) * (Num (Num x) + (Num (Num 2) * (Num x)))) .)",
    "(S (Num (Num (Num 1) * (Num (Num x) + (Num 2))) * (Num x)) .)",
    "(S (Num (Num (Num (Num 1) * (Num x)) + (Num 2)) * (Num x)) .)",
    kGold,
};

inline ctxparse::Treebank gold_treebank() {
  ctxparse::Treebank tb;
  tb.trees.push_back(ctxparse::parse_tree(kGold));
  return tb;
}

// REAL_NEGNEG as a raw HOL term, after type compression, after concept
// wrapping, and as an informal sentence.
inline const std::string kNegNegHol =
    "(Comb (Const \"!\" (Tyapp \"fun\" (Tyapp \"fun\" (Tyapp \"real\") (Tyapp \"bool\")) (Tyapp \"bool\"))) "
    "(Abs \"A0\" (Tyapp \"real\") (Comb (Comb (Const \"=\" (Tyapp \"fun\" (Tyapp \"real\") (Tyapp \"fun\" "
    "(Tyapp \"real\") (Tyapp \"bool\")))) (Comb (Const \"real_neg\" (Tyapp \"fun\" (Tyapp \"real\") (Tyapp "
    "\"real\"))) (Comb (Const \"real_neg\" (Tyapp \"fun\" (Tyapp \"real\") (Tyapp \"real\"))) (Var \"A0\" "
    "(Tyapp \"real\"))))) (Var \"A0\" (Tyapp \"real\")))))";
inline const std::string kNegNegTyped =
    "(\"(Type bool)\" ! (\"(Type (fun real bool))\" (Abs (\"(Type real)\" (Var A0)) (\"(Type bool)\" "
    "(\"(Type real)\" real_neg (\"(Type real)\" real_neg (\"(Type real)\" (Var A0)))) = (\"(Type real)\" "
    "(Var A0))))))";
inline const std::string kNegNegWrapped =
    "(\"(Type bool)\" ! (\"(Type (fun real bool))\" (Abs (\"(Type real)\" (Var A0)) (\"(Type bool)\" "
    "(\"(Type real)\" ($#real_neg --) (\"(Type real)\" ($#real_neg --) (\"(Type real)\" (Var A0)))) ($#= =) "
    "(\"(Type real)\" (Var A0))))))";
inline const std::string kNegNegSentence = "! A0 -- -- A0 = A0";

inline ctxparse::AmbiguationConfig negneg_config() {
  ctxparse::AmbiguationConfig cfg;
  cfg.overload_map = {{"real_neg", "--"}, {"=", "="}};
  cfg.infix_symbols = {"="};
  return cfg;
}

// Variable u is typed real in one tree and complex in another; the last
// tree licenses an equation whose sides have different types, which is what
// lets an unfiltered parse bind u to both.
inline ctxparse::Treebank two_type_treebank() {
  ctxparse::Treebank tb;
  for (const char* t : {
           "(S (\"(Type bool)\" (\"(Type real)\" (Var u)) = (\"(Type real)\" (Var v))))",
           "(S (\"(Type bool)\" (\"(Type complex)\" (Var u)) = (\"(Type complex)\" (Var w))))",
           "(S (\"(Type bool)\" (\"(Type complex)\" (Var z)) = (\"(Type real)\" (Var x))))",
       })
    tb.trees.push_back(ctxparse::parse_tree(t));
  return tb;
}

/// Variable -> set of types over every `(Type ..)` node directly above a
/// `(Var name)` node.
inline std::map<std::string, std::set<std::string>> variable_types(const ctxparse::ParseTree& t) {
  std::map<std::string, std::set<std::string>> out;
  auto visit = [&](auto&& self, const ctxparse::ParseTree& n) -> void {
    if (n.label.rfind("(Type ", 0) == 0 && n.children.size() == 1 && n.children[0].label == "Var" &&
        n.children[0].children.size() == 1 && n.children[0].children[0].is_leaf())
      out[n.children[0].children[0].label].insert(n.label);
    for (const auto& c : n.children) self(self, c);
  };
  visit(visit, t);
  return out;
}

// Arithmetic expressions over + and * where * binds tighter and both are
// left associative, wrapped as (S (Num ...) .) like the worked example.
class ArithmeticCorpus {
 public:
  explicit ArithmeticCorpus(std::uint64_t seed) : rng_(seed) {}

  ctxparse::ParseTree expression(std::size_t operators) {
    std::vector<std::string> operands;
    std::vector<std::string> ops;
    for (std::size_t i = 0; i <= operators; ++i) operands.push_back(kAtoms[pick(kAtoms.size())]);
    for (std::size_t i = 0; i < operators; ++i) ops.push_back(pick(2) ? "+" : "*");
    // Fold products first, then sums, both left to right.
    std::vector<ctxparse::ParseTree> terms;
    ctxparse::ParseTree acc = leaf(operands[0]);
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (ops[i] == "*") {
        acc = binary(std::move(acc), "*", leaf(operands[i + 1]));
      } else {
        terms.push_back(std::move(acc));
        acc = leaf(operands[i + 1]);
      }
    }
    terms.push_back(std::move(acc));
    ctxparse::ParseTree sum = std::move(terms[0]);
    for (std::size_t i = 1; i < terms.size(); ++i) sum = binary(std::move(sum), "+", std::move(terms[i]));
    ctxparse::ParseTree root("S");
    root.children.push_back(std::move(sum));
    root.children.emplace_back(".");
    return root;
  }

  ctxparse::Treebank treebank(std::size_t trees, std::size_t min_ops, std::size_t max_ops) {
    ctxparse::Treebank tb;
    for (std::size_t i = 0; i < trees; ++i) tb.trees.push_back(expression(min_ops + pick(max_ops - min_ops + 1)));
    return tb;
  }

 private:
  static inline const std::vector<std::string> kAtoms{"1", "2", "3", "x", "y", "z"};

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  static ctxparse::ParseTree leaf(const std::string& tok) {
    ctxparse::ParseTree n("Num");
    n.children.emplace_back(tok);
    return n;
  }
  static ctxparse::ParseTree binary(ctxparse::ParseTree l, const std::string& op, ctxparse::ParseTree r) {
    ctxparse::ParseTree n("Num");
    n.children.push_back(std::move(l));
    n.children.emplace_back(op);
    n.children.push_back(std::move(r));
    return n;
  }

  std::mt19937_64 rng_;
};

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("ctxparse_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

}  // namespace fixtures

#endif
