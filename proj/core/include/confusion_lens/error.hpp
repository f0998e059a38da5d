#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace confusion_lens {

/// Broad failure classes. The numeric values double as CLI exit codes.
enum class ErrorKind { usage = 1, data = 2, backend = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  int exit_code() const { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& message)
      : Error(ErrorKind::usage, message) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& message)
      : Error(ErrorKind::data, message) {}
};

class BackendError : public Error {
 public:
  explicit BackendError(const std::string& message)
      : Error(ErrorKind::backend, message) {}
};

/// Token pieces could not be mapped onto the source text.
class AlignmentError : public BackendError {
 public:
  AlignmentError(std::size_t offset, const std::string& detail)
      : BackendError("token alignment failed at byte offset " +
                     std::to_string(offset) + ": " + detail),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace confusion_lens
