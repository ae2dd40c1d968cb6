#pragma once

#include <stdexcept>
#include <string>

namespace hardyheat {

/// Library error codes. Mirrored one-to-one by the C API status values.
enum class Errc : int {
  ok = 0,
  no_such_stratum,
  outside_domain,
  radius_too_large,
  non_integrable_weight,
  hardy_constant_exceeded,
  parameter_out_of_range,
  overlapping_singularities,
  asymmetric_coefficient,
  budget_exceeded,
  quadrature_breakdown,
  not_bounded_below,
  window_too_narrow,
  division_underflow,
  factorization_failed,
  nonfinite_state,
  tail_not_converged,
  empty_grid,
  unbounded_ratio,
  nonconverged_minimizer,
  nonfinite_entropy,
  zero_denominator,
  excluded_exponent,
  nonpositive_solution,
  config_invalid,
  schema_mismatch,
  io_error,
  internal,
};

const char* errc_name(Errc c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool cond, Errc code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

}  // namespace hardyheat
