#pragma once

#include <stdexcept>
#include <string>

namespace xwalk {

/// Argument outside the mathematical domain of a kinematic or statistical formula.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A replayed command trace does not fit the session it is replayed into.
class TraceMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedLog : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input to a statistical test carries no usable variation (or has the wrong shape).
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A client message the server cannot act on.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SessionClosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CapacityExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace xwalk
