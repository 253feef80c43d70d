#pragma once

#include <stdexcept>
#include <string>

namespace fibertb {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broad classes; the CLI maps each to its own exit status.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

#define FIBERTB_DEFINE_ERROR(Name, Base) \
  class Name : public Base {             \
   public:                               \
    using Base::Base;                    \
  }

FIBERTB_DEFINE_ERROR(InvalidArgument, NumericError);
FIBERTB_DEFINE_ERROR(UnitMismatch, NumericError);

// core-model
FIBERTB_DEFINE_ERROR(IncompatibleSpans, ConfigError);
FIBERTB_DEFINE_ERROR(MissingCalibration, ConfigError);

// noise-sim / estimation
FIBERTB_DEFINE_ERROR(InvalidRate, NumericError);
FIBERTB_DEFINE_ERROR(NegativeWind, NumericError);
FIBERTB_DEFINE_ERROR(RateTooLow, NumericError);
FIBERTB_DEFINE_ERROR(RateTooHigh, NumericError);
FIBERTB_DEFINE_ERROR(TooShort, NumericError);
FIBERTB_DEFINE_ERROR(DegenerateInput, NumericError);
FIBERTB_DEFINE_ERROR(RangeEmpty, NumericError);
FIBERTB_DEFINE_ERROR(OutOfRange, NumericError);

// protocol
FIBERTB_DEFINE_ERROR(CapacityExceeded, ConfigError);
FIBERTB_DEFINE_ERROR(LengthMismatch, NumericError);
FIBERTB_DEFINE_ERROR(DelayMismatch, ConfigError);
FIBERTB_DEFINE_ERROR(LockLost, NumericError);
FIBERTB_DEFINE_ERROR(DesyncError, NumericError);
FIBERTB_DEFINE_ERROR(Misaligned, NumericError);

// env-ingest
FIBERTB_DEFINE_ERROR(ParseError, IoError);
FIBERTB_DEFINE_ERROR(EmptySeries, IoError);

#undef FIBERTB_DEFINE_ERROR

}  // namespace fibertb
