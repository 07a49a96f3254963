#ifndef MIMU_ERRORS_HPP
#define MIMU_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mimu {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data. CLI exit code 2.
struct DataError : Error {
  using Error::Error;
};

// Numerical failure of an algorithm on valid input. CLI exit code 3.
struct NumericalError : Error {
  using Error::Error;
};

struct NotSkewSymmetric : DataError { using DataError::DataError; };
struct TooFewSamples : DataError { using DataError::DataError; };
struct OutOfRange : DataError { using DataError::DataError; };
struct NonMonotonicTime : DataError { using DataError::DataError; };
struct EmptyInput : DataError { using DataError::DataError; };
struct LengthMismatch : DataError { using DataError::DataError; };
struct RateMismatch : DataError { using DataError::DataError; };
struct WindowTooLarge : DataError { using DataError::DataError; };
struct TrackExhausted : DataError { using DataError::DataError; };
struct ParseError : DataError { using DataError::DataError; };
struct SchemaError : DataError { using DataError::DataError; };
struct MonotonicityError : DataError { using DataError::DataError; };
struct InsufficientMotion : DataError { using DataError::DataError; };
struct NoOverlap : DataError { using DataError::DataError; };
struct IoError : DataError { using DataError::DataError; };

struct NoConvergence : NumericalError { using NumericalError::NumericalError; };
struct Diverged : NumericalError { using NumericalError::NumericalError; };
struct Degenerate : NumericalError { using NumericalError::NumericalError; };
struct CoplanarAxes : NumericalError { using NumericalError::NumericalError; };

}  // namespace mimu

#endif
