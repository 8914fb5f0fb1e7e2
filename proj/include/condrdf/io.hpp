#pragma once

#include "condrdf/gaussian_core.hpp"
#include "condrdf/oracle.hpp"
#include "condrdf/waterfill.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace condrdf::io {

/// On-disk description of a source:
///   {"dims": {"n_x": 1, "n_s": 1, "n_y": 1},
///    "covariance": [[...], [...], [...]],
///    "label": "optional"}
/// Unknown keys are rejected.
struct SourceSpecFile {
  Dims dims;
  Matrix covariance;
  std::string label;
};

/// Throws Error{ParseError} naming the offending field.
SourceSpecFile parse_spec_file(std::string_view text);
SourceSpecFile load_spec_file(const std::filesystem::path& path);
std::string format_spec_file(const SourceSpecFile& file);

struct CurveRecord {
  double delta = 0.0;
  double rate_nats = 0.0;
  double rate_bits = 0.0;
  double xi = 0.0;
  int active_count = 0;
  bool feasible = false;
  std::string error;

  bool operator==(const CurveRecord&) const = default;
};

inline constexpr std::string_view kCurveCsvHeader =
    "delta,rate_nats,rate_bits,xi,active_count,feasible,error";
inline constexpr std::string_view kDiscrepancyCsvHeader =
    "delta,prior_noise_variance,prior_z_variance,wyner_h,wyner_noise_variance,"
    "wyner_z_variance,classical_reproduction_variance,divergent";

double nats_to_bits(double nats);

CurveRecord to_record(const CurvePoint& point);

/// 17 significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double value);
double parse_number(std::string_view text);

void write_curve_csv(std::ostream& out, const std::vector<CurveRecord>& records);
/// Throws Error{ParseError} on a malformed document.
std::vector<CurveRecord> read_curve_csv(std::istream& in);

void write_discrepancy_csv(std::ostream& out, const std::vector<oracle::DiscrepancyRow>& rows);

}  // namespace condrdf::io
