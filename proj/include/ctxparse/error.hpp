// -*- mode: c++ -*-
#ifndef CTXPARSE_ERROR_HPP
#define CTXPARSE_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ctxparse {

enum class Errc {
  UnbalancedParens,
  EmptyInput,
  UnterminatedQuote,
  EmptyAtom,
  MalformedTree,
  MalformedHolTree,
  MixedStartSymbol,
  EmptyTreebank,
  EmptyGrammar,
  InvalidProbability,
  FormatError,
  CorpusTooSmall,
  InvalidArgument,
  IoError,
  LeakageDetected,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::UnbalancedParens: return "UnbalancedParens";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::UnterminatedQuote: return "UnterminatedQuote";
    case Errc::EmptyAtom: return "EmptyAtom";
    case Errc::MalformedTree: return "MalformedTree";
    case Errc::MalformedHolTree: return "MalformedHolTree";
    case Errc::MixedStartSymbol: return "MixedStartSymbol";
    case Errc::EmptyTreebank: return "EmptyTreebank";
    case Errc::EmptyGrammar: return "EmptyGrammar";
    case Errc::InvalidProbability: return "InvalidProbability";
    case Errc::FormatError: return "FormatError";
    case Errc::CorpusTooSmall: return "CorpusTooSmall";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::IoError: return "IoError";
    case Errc::LeakageDetected: return "LeakageDetected";
  }
  return "Unknown";
}

/// All library failures are reported through this exception type. `position`
/// is a byte offset for reader errors and `line` a 1-based line number for
/// file loaders; both are 0 when not applicable.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::size_t position = 0, std::size_t line = 0)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        position_(position),
        line_(line) {}

  Errc code() const noexcept { return code_; }
  std::size_t position() const noexcept { return position_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Errc code_;
  std::size_t position_;
  std::size_t line_;
};

}  // namespace ctxparse

#endif
