#pragma once

#include <stdexcept>
#include <string>

namespace cspec {

// Bad input: maps to CLI exit code 2.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Quadrature/root/eigensolver failure: maps to CLI exit code 1.
// `payload` carries a JSON diagnostic string when one is available.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what, std::string payload = {})
      : std::runtime_error(what), payload_(std::move(payload)) {}
  const std::string& payload() const { return payload_; }

private:
  std::string payload_;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

}  // namespace cspec
