#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace strongmax {

using json = nlohmann::ordered_json;

/// JSON number, or a string for non-finite values ("inf", "-inf", "nan").
inline json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline json num_array(const std::vector<double>& xs) {
  json a = json::array();
  for (double x : xs) a.push_back(num(x));
  return a;
}

/// lhs / rhs with the conventions 0/0 = 0 and x/0 = inf.
inline double safe_ratio(double lhs, double rhs) {
  if (rhs > 0.0) return lhs / rhs;
  return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

enum class Status { Pass, Fail, Skipped, NotApplicable };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Skipped: return "skipped";
    case Status::NotApplicable: return "n/a";
  }
  return "?";
}

struct CorpusStats {
  std::size_t count = 0;
  double max_ratio = 0.0;
  double median_ratio = 0.0;

  static CorpusStats of(std::vector<double> ratios) {
    CorpusStats s;
    s.count = ratios.size();
    if (ratios.empty()) return s;
    std::sort(ratios.begin(), ratios.end());
    s.max_ratio = ratios.back();
    std::size_t mid = ratios.size() / 2;
    s.median_ratio = ratios.size() % 2 ? ratios[mid] : 0.5 * (ratios[mid - 1] + ratios[mid]);
    return s;
  }
};

/// Outcome of one inequality or characterization check.
struct VerificationReport {
  std::string id;
  json config = json::object();
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  Status status = Status::NotApplicable;
  std::string note;
  std::string witness;
  std::optional<CorpusStats> corpus;
  json data = json::object();
  std::vector<VerificationReport> children;

  bool passed() const { return status == Status::Pass; }
  bool failed() const {
    if (status == Status::Fail) return true;
    return std::any_of(children.begin(), children.end(), [](const auto& c) { return c.failed(); });
  }

  void set_values(double l, double r) {
    lhs = l;
    rhs = r;
    ratio = safe_ratio(l, r);
  }

  json to_json() const {
    json j;
    j["id"] = id;
    j["status"] = to_string(status);
    j["config"] = config;
    j["lhs"] = num(lhs);
    j["rhs"] = num(rhs);
    j["ratio"] = num(ratio);
    if (!note.empty()) j["note"] = note;
    if (!witness.empty()) j["witness"] = witness;
    if (corpus) {
      j["corpus"] = {{"count", corpus->count},
                     {"max_ratio", num(corpus->max_ratio)},
                     {"median_ratio", num(corpus->median_ratio)}};
    }
    if (!data.empty()) j["data"] = data;
    if (!children.empty()) {
      json c = json::array();
      for (const auto& ch : children) c.push_back(ch.to_json());
      j["checks"] = c;
    }
    return j;
  }
};

/// Status from a list of child checks: fail if any failed, pass if any passed,
/// otherwise skipped.
inline Status aggregate_status(const std::vector<VerificationReport>& rs) {
  bool any_pass = false;
  for (const auto& r : rs) {
    if (r.failed()) return Status::Fail;
    any_pass = any_pass || r.passed();
  }
  return any_pass ? Status::Pass : Status::Skipped;
}

}  // namespace strongmax
