#pragma once

#include <stdexcept>
#include <string>

namespace eecoord {

// Base of every exception thrown by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function (e.g. negative SINR).
class domain_error : public error {
 public:
  using error::error;
};

// Efficiency order for which x f'(x) = f(x) has no positive root.
class unsupported_order : public error {
 public:
  using error::error;
};

class convergence_error : public error {
 public:
  using error::error;
};

// Inconsistent sizes between configuration, channels and allocations.
class dimension_error : public error {
 public:
  using error::error;
};

// A player has no carrier with strictly positive effective gain left.
class no_usable_carrier : public error {
 public:
  using error::error;
};

class precondition_error : public error {
 public:
  using error::error;
};

class parse_error : public error {
 public:
  using error::error;
};

}  // namespace eecoord
