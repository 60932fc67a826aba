#ifndef ARMSYNTH_ERROR_HPP
#define ARMSYNTH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace armsynth {

/// Malformed input text. `locus` is "line N" or a JSON pointer to the field.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string locus, const std::string& what)
      : std::runtime_error(locus.empty() ? what : locus + ": " + what), locus_(std::move(locus)) {}
  const std::string& locus() const { return locus_; }

 private:
  std::string locus_;
};

/// Well-formed input that violates a model invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Misuse of the kinematic API (dimension mismatch, illegal append, ...).
class KinematicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace armsynth

#endif  // ARMSYNTH_ERROR_HPP
