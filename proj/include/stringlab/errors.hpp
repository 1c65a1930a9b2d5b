#pragma once

#include <stdexcept>
#include <string>

namespace stringlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The induced metric determinant g = 1 - Lphi*Lbphi dropped to the
/// degeneracy threshold. Callers treat this as a blow-up indicator.
class TimelikeViolation : public Error {
 public:
  TimelikeViolation(double g, double gmin)
      : Error("timelike violation: g = " + std::to_string(g) +
              " <= gmin = " + std::to_string(gmin)),
        g_(g) {}
  double g() const { return g_; }

 private:
  double g_;
};

/// 1 + p^2 - w^2 <= 0: the first-order system is no longer strictly
/// hyperbolic.
class HyperbolicityLoss : public Error {
 public:
  explicit HyperbolicityLoss(double discriminant)
      : Error("hyperbolicity loss: 1 + p^2 - w^2 = " +
              std::to_string(discriminant)),
        discriminant_(discriminant) {}
  double discriminant() const { return discriminant_; }

 private:
  double discriminant_;
};

class NonIntegrable : public Error {
 public:
  using Error::Error;
};

class InsufficientHistory : public Error {
 public:
  using Error::Error;
};

/// Raised by the time stepper. `time()` is the time of the last valid state.
class BlowupDetected : public Error {
 public:
  BlowupDetected(double last_valid_time, std::string reason)
      : Error("blow-up detected after t = " + std::to_string(last_valid_time) +
              ": " + reason),
        time_(last_valid_time),
        reason_(std::move(reason)) {}
  double time() const { return time_; }
  const std::string& reason() const { return reason_; }

 private:
  double time_;
  std::string reason_;
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace stringlab
