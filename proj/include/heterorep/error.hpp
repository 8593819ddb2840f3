#pragma once

#include <stdexcept>
#include <string>

namespace heterorep {

// Base of every error the library throws. CLI maps DataError -> exit 1 and
// UsageError -> exit 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

class IngestionError : public DataError {
 public:
  using DataError::DataError;
};

class ParameterError : public UsageError {
 public:
  using UsageError::UsageError;
};

class IntegrityError : public DataError {
 public:
  using DataError::DataError;
};

class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

class CompositionError : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class TrainingError : public DataError {
 public:
  using DataError::DataError;
};

class EvaluationError : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace heterorep
