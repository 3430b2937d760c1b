#pragma once

#include <stdexcept>
#include <string>

namespace embedkit {

// Error categories map onto distinct CLI exit codes.
enum class ErrorKind {
  config = 2,        // bad or inconsistent configuration
  missing_input = 3, // referenced file does not exist
  schema = 4,        // input record violates a documented schema
  data = 5,          // semantically invalid data (sizes, shapes, ranges)
  io = 6,            // read/write failure
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

[[noreturn]] inline void fail_config(const std::string& m) { fail(ErrorKind::config, m); }
[[noreturn]] inline void fail_schema(const std::string& m) { fail(ErrorKind::schema, m); }
[[noreturn]] inline void fail_data(const std::string& m) { fail(ErrorKind::data, m); }
[[noreturn]] inline void fail_io(const std::string& m) { fail(ErrorKind::io, m); }

}  // namespace embedkit
