#include "hardyheat/report.hpp"

#include <cmath>
#include <fstream>

#include "hardyheat/errors.hpp"

namespace hardyheat {

Json load_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::io_error, "cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(Errc::config_invalid, std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return j;
}

void write_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  require(out.good(), Errc::io_error, "cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

namespace {

void compare_walk(const Json& a, const Json& b, const std::string& path, double rel_tol,
                  Comparison& cmp) {
  if (a.is_object() && b.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key()))
        fail(Errc::schema_mismatch, "missing key in second report: " + path + "/" + it.key());
      compare_walk(it.value(), b.at(it.key()), path + "/" + it.key(), rel_tol, cmp);
    }
    for (auto it = b.begin(); it != b.end(); ++it)
      if (!a.contains(it.key()))
        fail(Errc::schema_mismatch, "missing key in first report: " + path + "/" + it.key());
    return;
  }
  if (a.is_array() && b.is_array()) {
    if (a.size() != b.size())
      fail(Errc::schema_mismatch, "array length mismatch at " + path);
    for (size_t i = 0; i < a.size(); ++i)
      compare_walk(a[i], b[i], path + "/" + std::to_string(i), rel_tol, cmp);
    return;
  }
  if (a.is_number() && b.is_number()) {
    const double va = a.get<double>(), vb = b.get<double>();
    const double denom = std::max({std::abs(va), std::abs(vb), 1e-300});
    const double rel = std::abs(va - vb) / denom;
    cmp.max_rel_diff = std::max(cmp.max_rel_diff, rel);
    if (rel > rel_tol) {
      cmp.within = false;
      cmp.diffs[path] = Json{{"a", va}, {"b", vb}, {"rel", rel}};
    }
    return;
  }
  if (a != b) {
    cmp.within = false;
    cmp.diffs[path] = Json{{"a", a}, {"b", b}};
  }
}

void flatten(const Json& j, const std::string& prefix, std::string& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array()) {
    for (size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "." + std::to_string(i), out);
  } else if (j.is_number()) {
    char buf[64];
    snprintf(buf, sizeof(buf), "%.17g", j.get<double>());
    out += prefix + "," + buf + "\n";
  }
}

}  // namespace

Comparison compare_reports(const Json& a, const Json& b, double rel_tol) {
  require(a.contains("schema_version") && b.contains("schema_version"), Errc::schema_mismatch,
          "reports lack a schema version");
  require(a.at("schema_version") == b.at("schema_version"), Errc::schema_mismatch,
          "schema versions differ");
  Comparison cmp;
  compare_walk(a, b, "", rel_tol, cmp);
  return cmp;
}

std::string summary_csv(const Json& report) {
  std::string out = "key,value\n";
  if (report.contains("tasks")) flatten(report.at("tasks"), "", out);
  return out;
}

}  // namespace hardyheat
