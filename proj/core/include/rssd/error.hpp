#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rssd {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kNotOnManifold,
  kRankDeficient,
  kBacktrackExhausted,
  kIo,
  kConfig,
};

std::string_view ToString(ErrorCode code);

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ToString(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class BacktrackExhausted : public Error {
 public:
  explicit BacktrackExhausted(int backtracks)
      : Error(ErrorCode::kBacktrackExhausted,
              "no Armijo step accepted after " + std::to_string(backtracks) + " backtracks"),
        backtracks_(backtracks) {}

  int backtracks() const noexcept { return backtracks_; }

 private:
  int backtracks_;
};

inline void Require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace rssd
