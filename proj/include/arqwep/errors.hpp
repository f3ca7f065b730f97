#pragma once

#include <stdexcept>
#include <string>

namespace arqwep {

// Bad model parameters or a malformed configuration document.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg), line_(-1) {}
  ConfigError(int line, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Unrecoverable protocol state: ACK-history window overflow, receiver desync,
// or an operation invoked outside its protocol phase.
class ProtocolError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Integrity check failed while decoding a frame with a caller-supplied key.
class IcvError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The requested expectation does not exist under the given fading model
// (an erasure probability can reach 1 with positive mass).
class DivergentExpectationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace arqwep
