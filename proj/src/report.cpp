#include "agmonkit/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "agmonkit/error.hpp"
#include "agmonkit/field_io.hpp"

namespace agmonkit {

void DecayReport::set(const std::string& name, double value) {
  if (!std::isfinite(value)) {
    throw Error("report constant '" + name + "' is not finite (" + format_double(value) + ")");
  }
  for (auto& [k, v] : constants) {
    if (k == name) {
      v = value;
      return;
    }
  }
  constants.emplace_back(name, value);
}

void DecayReport::verdict(const std::string& name, bool pass) {
  for (auto& [k, v] : verdicts) {
    if (k == name) {
      v = pass;
      return;
    }
  }
  verdicts.emplace_back(name, pass);
}

double DecayReport::constant(const std::string& name) const {
  for (const auto& [k, v] : constants) {
    if (k == name) return v;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

bool DecayReport::has_verdict(const std::string& name) const {
  return std::any_of(verdicts.begin(), verdicts.end(),
                     [&](const auto& kv) { return kv.first == name; });
}

bool DecayReport::verdict_value(const std::string& name) const {
  for (const auto& [k, v] : verdicts) {
    if (k == name) return v;
  }
  throw InvalidArgument("no verdict named '" + name + "'");
}

bool DecayReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& kv) { return kv.second; });
}

Json DecayReport::to_json() const {
  Json j = Json::object();
  j["id"] = id;
  j["all_pass"] = all_pass();
  Json c = Json::object();
  for (const auto& [k, v] : constants) c[k] = v;
  j["constants"] = c;
  Json vd = Json::object();
  for (const auto& [k, v] : verdicts) vd[k] = v;
  j["verdicts"] = vd;
  j["details"] = details;
  j["provenance"] = provenance;
  return j;
}

DecayReport DecayReport::from_json(const Json& j) {
  DecayReport r;
  r.id = j.value("id", std::string());
  if (j.contains("constants")) {
    for (const auto& [k, v] : j.at("constants").items()) r.constants.emplace_back(k, v.get<double>());
  }
  if (j.contains("verdicts")) {
    for (const auto& [k, v] : j.at("verdicts").items()) r.verdicts.emplace_back(k, v.get<bool>());
  }
  if (j.contains("details")) r.details = j.at("details");
  if (j.contains("provenance")) r.provenance = j.at("provenance");
  return r;
}

void write_report_json(std::ostream& os, const Json& j) { os << j.dump(2) << '\n'; }

void write_constants_csv(std::ostream& os, const DecayReport& r) {
  os << "name,value\n";
  for (const auto& [k, v] : r.constants) os << k << ',' << format_double(v) << '\n';
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + '"';
}

}  // namespace

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  std::vector<std::string> names;
  for (const auto& row : rows) {
    for (const auto& [k, v] : row.report.constants) {
      if (std::find(names.begin(), names.end(), k) == names.end()) names.push_back(k);
    }
  }
  os << "scenario,status,message";
  for (const auto& n : names) os << ',' << n;
  os << '\n';
  for (const auto& row : rows) {
    os << csv_escape(row.id) << ',' << row.status << ',' << csv_escape(row.message);
    for (const auto& n : names) {
      os << ',';
      const double v = row.report.constant(n);
      if (!std::isnan(v)) os << format_double(v);
    }
    os << '\n';
  }
}

}  // namespace agmonkit
