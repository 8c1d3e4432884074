#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "resflow/index_flow.hpp"

namespace resflow {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "resflow 0.1.0";

Json to_json(cplx z);
Json matrix_to_json(const CMatrix& a);
Json model_to_json(const OperatorModel& m);
// Throws ParseError naming the offending field, e.g. "finite.V[1][2].im".
OperatorModel model_from_json(const Json& j);
OperatorModel parse_model(const std::string& text);
OperatorModel load_model(const std::string& path);

// 64-bit FNV-1a over the canonical model JSON, as 16 hex digits.
std::string model_digest(const OperatorModel& m);

struct SplitMarker {
  cplx r;
  int mult = 1;
  bool anti = false;  // anti-resonance point (conjugate of a point at lambda - iy)
  bool operator==(const SplitMarker&) const = default;
};

struct PointReport {
  double r_lambda = 0.0;
  int order_d = 0;
  int geom_mult = 0;
  int N = 0;
  int N_plus = 0;
  int N_minus = 0;
  int ind_splitting = 0;
  int ind_rindex = 0;
  int ind_signature = 0;
  int dim_upsilon1 = 0;
  bool consistency = false;
  bool uturn_ok = false;
  double y_used = 0.0;
  std::optional<std::string> type_I;
  std::optional<bool> property_S, property_P, pp_spectrum_ok, property_M;
  std::vector<SplitMarker> split_points;
  bool operator==(const PointReport&) const = default;
};

struct ExampleSection {
  std::string name;
  std::vector<std::pair<std::string, Json>> expected;
  std::vector<std::pair<std::string, Json>> measured;
  std::vector<std::string> mismatches;
  bool operator==(const ExampleSection&) const = default;
};

struct Report {
  std::string tool_version = kToolVersion;
  std::optional<std::uint64_t> seed;
  std::string model_kind;
  std::string model_hash;
  int dims = 0;
  double lambda = 0.0;
  std::optional<std::pair<double, double>> interval;
  std::optional<double> at;
  std::vector<PointReport> points;
  int total = 0;
  std::optional<int> ssf_counting;
  std::optional<int> tracking;
  bool agreement = true;
  std::optional<ExampleSection> example;
  std::vector<std::string> diagnostics;
  bool operator==(const Report&) const = default;
};

Json report_to_json(const Report& r);
Report report_from_json(const Json& j);

struct AnalyzeOptions {
  std::optional<std::pair<double, double>> interval;
  std::optional<double> at;
  bool strict = false;
  bool classify = true;
};

PointReport point_report(const OperatorModel& m, const IndexReport& ir, bool classify);
Report analyze(const OperatorModel& m, double lambda, const AnalyzeOptions& opt);

// s-plane splitting diagram: filled markers for resonance points, open for anti-resonance points.
std::string splitting_svg(const Report& r);

struct SweepRow {
  double lambda = 0.0;
  int total_index = 0;
  std::optional<int> ssf;
  bool agreement = true;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::string> warnings;
};

// Grid spec "A:B:N"; throws ParseError on malformed input.
std::vector<double> parse_grid(const std::string& spec);
SweepResult sweep(const OperatorModel& m, const std::vector<double>& grid, double a, double b, bool strict = false);
std::string sweep_csv(const SweepResult& s);

}  // namespace resflow
