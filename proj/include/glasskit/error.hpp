#ifndef GLASSKIT_ERROR_HPP
#define GLASSKIT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace glasskit {

// Numeric values are shared with the C API status codes in glasskit.h.
enum class ErrorCode : int {
  InvalidMixture = 1,
  Domain = 2,
  InvalidPerturbation = 3,
  SingularMeasure = 4,
  NonConvergence = 5,
  FieldRangeExceeded = 6,
  BoundInvalid = 7,
  Resolution = 8,
  EmptyInterval = 9,
  TooLarge = 10,
  Shape = 11,
  DegenerateTestFunction = 12,
  Io = 13,
  InvalidArgument = 14,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace glasskit

#endif  // GLASSKIT_ERROR_HPP
