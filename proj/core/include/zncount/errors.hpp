#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace zncount {

// Base for failures that are not plain precondition violations.
// Precondition violations throw std::invalid_argument directly.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A floating-point cross-check disagreed with its exact counterpart
// (e.g. the imaginary residue of a Fourier count).
class NumericalInconsistency : public Error {
 public:
  using Error::Error;
};

// A deterministic scan exhausted its candidates.
class SearchFailure : public Error {
 public:
  using Error::Error;
};

// The transfer plan cannot be used for the requested stage.
class PlanRejected : public Error {
 public:
  using Error::Error;
};

// An identity that holds by construction was violated.
class InternalError : public Error {
 public:
  using Error::Error;
};

// Wraps a failure with the pipeline stage that produced it. kind() names the
// original failure: "search-failure", "plan-rejected", "numerical-inconsistency"
// or "internal-error".
class StageError : public Error {
 public:
  StageError(std::string stage, std::string kind, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)), kind_(std::move(kind)) {}
  const std::string& stage() const noexcept { return stage_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string stage_;
  std::string kind_;
};

inline const char* error_kind(const Error& e) {
  if (const auto* s = dynamic_cast<const StageError*>(&e)) return s->kind().c_str();
  if (dynamic_cast<const SearchFailure*>(&e)) return "search-failure";
  if (dynamic_cast<const PlanRejected*>(&e)) return "plan-rejected";
  if (dynamic_cast<const NumericalInconsistency*>(&e)) return "numerical-inconsistency";
  return "internal-error";
}

}  // namespace zncount
