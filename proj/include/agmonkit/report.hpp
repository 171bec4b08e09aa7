#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace agmonkit {

using Json = nlohmann::ordered_json;

/// Named constants and verdicts of one scenario, in insertion order.
struct DecayReport {
  std::string id;
  Json provenance = Json::object();
  std::vector<std::pair<std::string, double>> constants;
  std::vector<std::pair<std::string, bool>> verdicts;
  Json details = Json::object();

  /// Throws on a non-finite value; replaces an existing entry of that name.
  void set(const std::string& name, double value);
  void verdict(const std::string& name, bool pass);
  /// NaN when absent.
  double constant(const std::string& name) const;
  bool has_verdict(const std::string& name) const;
  bool verdict_value(const std::string& name) const;
  bool all_pass() const;

  Json to_json() const;
  static DecayReport from_json(const Json& j);
};

/// Two-space indented JSON with a trailing newline.
void write_report_json(std::ostream& os, const Json& j);
/// "name,value" rows, full precision.
void write_constants_csv(std::ostream& os, const DecayReport& r);

struct SweepRow {
  std::string id;
  std::string status;  // "ok", "verdict_failed" or "error"
  std::string message;
  DecayReport report;
};

/// One row per scenario in input order; columns are the union of constant
/// names in first-seen order, blank where a scenario lacks one.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace agmonkit
