#ifndef PERFECTSIM_ERRORS_HPP
#define PERFECTSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace perfectsim {

// All failures carry a stable machine-parsable code (printed by the CLI on
// stderr as "error: <code>: <message>").
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& msg, const std::string& code = "config.invalid")
      : Error(code, msg) {}
};

struct UnsupportedKernel : Error {
  explicit UnsupportedKernel(const std::string& msg) : Error("kernel.unsupported", msg) {}
};

struct InadmissibleHistory : Error {
  explicit InadmissibleHistory(const std::string& msg) : Error("history.inadmissible", msg) {}
};

struct DepthCapExceeded : Error {
  explicit DepthCapExceeded(const std::string& msg) : Error("cap.exceeded", msg) {}
};

struct NegativeIncrement : Error {
  explicit NegativeIncrement(const std::string& msg) : Error("layout.negative_increment", msg) {}
};

struct NormalizationError : Error {
  explicit NormalizationError(const std::string& msg) : Error("layout.normalization", msg) {}
};

struct SupportMismatch : Error {
  explicit SupportMismatch(const std::string& msg) : Error("verify.support_mismatch", msg) {}
};

struct NotFiniteMemory : Error {
  explicit NotFiniteMemory(const std::string& msg) : Error("verify.not_finite_memory", msg) {}
};

struct DegenerateRegime : Error {
  explicit DegenerateRegime(const std::string& msg) : Error("regime.degenerate", msg) {}
};

}  // namespace perfectsim

#endif
