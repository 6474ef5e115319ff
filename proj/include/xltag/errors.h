#ifndef XLTAG_ERRORS_H_
#define XLTAG_ERRORS_H_

#include <stdexcept>
#include <string>

namespace xltag {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad or inconsistent input data. The CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

// Source and target files of a parallel corpus disagree in line count.
class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

// Malformed file contents (empty corpus line, ragged tagged line, bad magic).
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

// Tag label not present in the tagset.
class TagsetError : public DataError {
 public:
  using DataError::DataError;
};

// Vector or matrix dimensions do not agree.
class ShapeError : public DataError {
 public:
  using DataError::DataError;
};

// Parallel structures (links vs sentences, predictions vs gold) differ in
// length.
class ConsistencyError : public DataError {
 public:
  using DataError::DataError;
};

// Training cannot start (empty corpus, no validation data).
class TrainingError : public DataError {
 public:
  using DataError::DataError;
};

// Invalid configuration or command-line usage. Exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss during training. Exit code 3.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string &message, int epoch, size_t sentence)
      : Error(message), epoch_(epoch), sentence_(sentence) {}

  int epoch() const { return epoch_; }
  size_t sentence() const { return sentence_; }

 private:
  int epoch_;
  size_t sentence_;
};

}  // namespace xltag

#endif  // XLTAG_ERRORS_H_
