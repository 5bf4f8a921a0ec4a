#ifndef EUD_ERROR_HPP
#define EUD_ERROR_HPP

#include <stdexcept>
#include <string>

namespace eud {

/// Input data could not be used: malformed files, violated transform
/// preconditions, misaligned corpora, unknown labels.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

/// A label uses one of the separators reserved by the graph transforms.
class ReservedSymbolError : public DataError {
 public:
  using DataError::DataError;
};

class StructureError : public DataError {
 public:
  using DataError::DataError;
};

class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

class VocabularyError : public DataError {
 public:
  using DataError::DataError;
};

class ModelFormatError : public DataError {
 public:
  using DataError::DataError;
};

/// Raised when training produces a non-finite gradient.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace eud

#endif  // EUD_ERROR_HPP
