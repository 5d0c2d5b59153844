#pragma once

#include <stdexcept>
#include <string>

namespace uailab {

// Malformed descriptors, mismatched alphabets, out-of-range parameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Observed data has probability zero under every hypothesis in a class.
class ImpossibleEvidenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Enumeration request exceeds the joint-entry guard.
class SizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A log term would be -inf: a model assigns zero probability to a point
// that carries positive mass under the expectation.
class SupportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double lower, double upper)
      : std::runtime_error(what), lower_(lower), upper_(upper) {}

  double lower_bound() const { return lower_; }
  double upper_bound() const { return upper_; }

 private:
  double lower_;
  double upper_;
};

}  // namespace uailab
