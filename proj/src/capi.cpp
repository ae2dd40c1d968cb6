#include "hardyheat.h"

#include <cstring>
#include <string>

#include "hardyheat/errors.hpp"
#include "hardyheat/experiment.hpp"
#include "hardyheat/report.hpp"

namespace {

thread_local std::string g_last_error;

hh_status to_status(hardyheat::Errc c) {
  using hardyheat::Errc;
  switch (c) {
    case Errc::ok: return HH_OK;
    case Errc::no_such_stratum: return HH_ERR_NO_SUCH_STRATUM;
    case Errc::outside_domain: return HH_ERR_OUTSIDE_DOMAIN;
    case Errc::radius_too_large: return HH_ERR_RADIUS_TOO_LARGE;
    case Errc::non_integrable_weight: return HH_ERR_NON_INTEGRABLE_WEIGHT;
    case Errc::hardy_constant_exceeded: return HH_ERR_HARDY_CONSTANT_EXCEEDED;
    case Errc::parameter_out_of_range: return HH_ERR_PARAMETER_OUT_OF_RANGE;
    case Errc::overlapping_singularities: return HH_ERR_OVERLAPPING_SINGULARITIES;
    case Errc::asymmetric_coefficient: return HH_ERR_ASYMMETRIC_COEFFICIENT;
    case Errc::budget_exceeded: return HH_ERR_BUDGET_EXCEEDED;
    case Errc::quadrature_breakdown: return HH_ERR_QUADRATURE_BREAKDOWN;
    case Errc::not_bounded_below: return HH_ERR_NOT_BOUNDED_BELOW;
    case Errc::window_too_narrow: return HH_ERR_WINDOW_TOO_NARROW;
    case Errc::division_underflow: return HH_ERR_DIVISION_UNDERFLOW;
    case Errc::factorization_failed: return HH_ERR_FACTORIZATION_FAILED;
    case Errc::nonfinite_state: return HH_ERR_NONFINITE_STATE;
    case Errc::tail_not_converged: return HH_ERR_TAIL_NOT_CONVERGED;
    case Errc::empty_grid: return HH_ERR_EMPTY_GRID;
    case Errc::unbounded_ratio: return HH_ERR_UNBOUNDED_RATIO;
    case Errc::nonconverged_minimizer: return HH_ERR_NONCONVERGED_MINIMIZER;
    case Errc::nonfinite_entropy: return HH_ERR_NONFINITE_ENTROPY;
    case Errc::zero_denominator: return HH_ERR_ZERO_DENOMINATOR;
    case Errc::excluded_exponent: return HH_ERR_EXCLUDED_EXPONENT;
    case Errc::nonpositive_solution: return HH_ERR_NONPOSITIVE_SOLUTION;
    case Errc::config_invalid: return HH_ERR_CONFIG_INVALID;
    case Errc::schema_mismatch: return HH_ERR_SCHEMA_MISMATCH;
    case Errc::io_error: return HH_ERR_IO;
    case Errc::internal: return HH_ERR_INTERNAL;
  }
  return HH_ERR_INTERNAL;
}

template <typename F>
hh_status guard(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return HH_OK;
  } catch (const hardyheat::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HH_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

struct hh_report {
  hardyheat::Json json;
};

extern "C" {

const char* hh_version(void) { return "0.1.0"; }

const char* hh_last_error(void) { return g_last_error.c_str(); }

const char* hh_status_name(hh_status s) {
  return hardyheat::errc_name(static_cast<hardyheat::Errc>(s));
}

hh_status hh_validate_config(const char* config_path) {
  return guard([&] { hardyheat::validate_config(hardyheat::load_json(config_path)); });
}

hh_status hh_run(const char* config_path, const hh_run_options* opts, int* exit_code) {
  return guard([&] {
    hardyheat::RunOptions ro;
    if (opts) {
      if (opts->out_dir) ro.out_dir = opts->out_dir;
      if (opts->seed >= 0) ro.seed = static_cast<std::uint64_t>(opts->seed);
      ro.jobs = opts->jobs;
      ro.dry_run = opts->dry_run != 0;
      ro.dump_matrices = opts->dump_matrices != 0;
    }
    int code = hardyheat::run_experiment(config_path, ro);
    if (exit_code) *exit_code = code;
  });
}

hh_status hh_report_open(const char* path, hh_report** out) {
  return guard([&] {
    auto* rep = new hh_report{hardyheat::load_json(path)};
    *out = rep;
  });
}

void hh_report_close(hh_report* report) { delete report; }

hh_status hh_report_compare(const hh_report* a, const hh_report* b, double rel_tol,
                            int* within, char** diff_json) {
  return guard([&] {
    hardyheat::Comparison cmp = hardyheat::compare_reports(a->json, b->json, rel_tol);
    if (within) *within = cmp.within ? 1 : 0;
    if (diff_json) *diff_json = dup_string(cmp.diffs.dump(2));
  });
}

hh_status hh_catalog_json(char** json) {
  return guard([&] { *json = dup_string(hardyheat::catalog_json().dump(2)); });
}

void hh_string_free(char* s) { std::free(s); }

}  // extern "C"
