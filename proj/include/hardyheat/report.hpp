#pragma once

#include <nlohmann/json.hpp>
#include <string>

namespace hardyheat {

/// Reports keep insertion order so a fixed task order yields byte-identical
/// files run to run.
using Json = nlohmann::ordered_json;

Json load_json(const std::string& path);
void write_json(const Json& j, const std::string& path);

struct Comparison {
  double max_rel_diff = 0.0;
  bool within = true;
  Json diffs;  // path -> {a, b, rel}
};

/// Relative differences of all numeric leaves. SchemaMismatch when the schema
/// versions differ or the tree structures disagree.
Comparison compare_reports(const Json& a, const Json& b, double rel_tol);

/// Flatten numeric leaves under "tasks" into task,key,value rows.
std::string summary_csv(const Json& report);

}  // namespace hardyheat
