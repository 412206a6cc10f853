#pragma once

#include <stdexcept>
#include <string>

namespace fairaudit {

// Two families: ValidationError covers malformed inputs (CLI exit 2),
// ComputeError covers analysis preconditions (CLI exit 3).

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ValidationError : Error {
  using Error::Error;
};

struct ComputeError : Error {
  using Error::Error;
};

#define FAIRAUDIT_VALIDATION_ERROR(NAME)          \
  struct NAME : ValidationError {                 \
    explicit NAME(const std::string& msg)         \
        : ValidationError(#NAME ": " + msg) {}    \
  }

#define FAIRAUDIT_COMPUTE_ERROR(NAME)             \
  struct NAME : ComputeError {                    \
    explicit NAME(const std::string& msg)         \
        : ComputeError(#NAME ": " + msg) {}       \
  }

FAIRAUDIT_VALIDATION_ERROR(MissingColumn);
FAIRAUDIT_VALIDATION_ERROR(OutOfRangeScore);
FAIRAUDIT_VALIDATION_ERROR(NonBinaryLabel);
FAIRAUDIT_VALIDATION_ERROR(DuplicateKey);
FAIRAUDIT_VALIDATION_ERROR(DimensionMismatch);
FAIRAUDIT_VALIDATION_ERROR(NonFiniteEntry);
FAIRAUDIT_VALIDATION_ERROR(EmptyFrame);
FAIRAUDIT_VALIDATION_ERROR(InvalidConfig);
FAIRAUDIT_VALIDATION_ERROR(IoError);
FAIRAUDIT_VALIDATION_ERROR(BadField);

FAIRAUDIT_COMPUTE_ERROR(DegenerateLabels);
FAIRAUDIT_COMPUTE_ERROR(ConstantVector);
FAIRAUDIT_COMPUTE_ERROR(LengthMismatch);
FAIRAUDIT_COMPUTE_ERROR(MissingClassInGroup);
FAIRAUDIT_COMPUTE_ERROR(ModelMismatch);
FAIRAUDIT_COMPUTE_ERROR(TooFewModels);
FAIRAUDIT_COMPUTE_ERROR(SingleClassTrain);
FAIRAUDIT_COMPUTE_ERROR(MissingMetric);
FAIRAUDIT_COMPUTE_ERROR(MissingOodGap);
FAIRAUDIT_COMPUTE_ERROR(NoErmBaseline);
FAIRAUDIT_COMPUTE_ERROR(EmptySetting);
FAIRAUDIT_COMPUTE_ERROR(UnknownGroup);

#undef FAIRAUDIT_VALIDATION_ERROR
#undef FAIRAUDIT_COMPUTE_ERROR

}  // namespace fairaudit
