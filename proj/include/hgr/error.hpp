#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hgr {

enum class Errc {
  // Input validation.
  MalformedFrame,
  Missing3D,
  UnknownReference,
  UnknownLabel,
  ShapeMismatch,
  EmptyDataset,
  SingleClassDataset,
  EmptyNegatives,
  EmptyInput,
  LengthMismatch,
  NonMonotonicTimestamp,
  OutOfBox,
  BadConfig,
  // Numerical failures.
  DegenerateRotation,
  DegenerateScale,
  DegeneratePalm,
  ZeroSegment,
  BehindCamera,
  DivergedFit,
};

std::string_view errc_name(Errc code);

// Numerical errors map to CLI exit code 3, everything else to 2.
constexpr bool is_numerical(Errc code) { return code >= Errc::DegenerateRotation; }

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code), message_(what) {}

  Errc code() const noexcept { return code_; }
  // what() without the code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

}  // namespace hgr
