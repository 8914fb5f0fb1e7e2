#include "condrdf/io.hpp"

#include "condrdf/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace condrdf::io {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ParseError, "spec file field '" + field + "': " + why);
}

Eigen::Index read_dim(const json& dims, const char* key) {
  const std::string field = std::string("dims.") + key;
  if (!dims.contains(key)) parse_fail(field, "missing");
  const json& v = dims.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) parse_fail(field, "must be an integer");
  const auto n = v.get<std::int64_t>();
  if (n <= 0) parse_fail(field, "must be positive");
  return static_cast<Eigen::Index>(n);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

SourceSpecFile parse_spec_file(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("spec file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) parse_fail("<root>", "must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "dims" && key != "covariance" && key != "label") parse_fail(key, "unknown key");
  }

  SourceSpecFile out;
  if (!doc.contains("dims")) parse_fail("dims", "missing");
  const json& dims = doc.at("dims");
  if (!dims.is_object()) parse_fail("dims", "must be an object");
  for (const auto& [key, value] : dims.items()) {
    if (key != "n_x" && key != "n_s" && key != "n_y") parse_fail("dims." + key, "unknown key");
  }
  out.dims.n_x = read_dim(dims, "n_x");
  out.dims.n_s = read_dim(dims, "n_s");
  out.dims.n_y = read_dim(dims, "n_y");

  if (!doc.contains("covariance")) parse_fail("covariance", "missing");
  const json& cov = doc.at("covariance");
  const Eigen::Index n = out.dims.total();
  if (!cov.is_array()) parse_fail("covariance", "must be an array of rows");
  if (static_cast<Eigen::Index>(cov.size()) != n) {
    parse_fail("covariance", "expected " + std::to_string(n) + " rows, got " +
                                 std::to_string(cov.size()));
  }
  out.covariance.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = cov.at(static_cast<std::size_t>(i));
    const std::string row_field = "covariance[" + std::to_string(i) + "]";
    if (!row.is_array()) parse_fail(row_field, "must be an array");
    if (static_cast<Eigen::Index>(row.size()) != n) {
      parse_fail(row_field, "expected " + std::to_string(n) + " entries, got " +
                                std::to_string(row.size()));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      const json& v = row.at(static_cast<std::size_t>(j));
      if (!v.is_number()) parse_fail(row_field + "[" + std::to_string(j) + "]", "must be a number");
      out.covariance(i, j) = v.get<double>();
    }
  }

  if (doc.contains("label")) {
    if (!doc.at("label").is_string()) parse_fail("label", "must be a string");
    out.label = doc.at("label").get<std::string>();
  }
  return out;
}

SourceSpecFile load_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open spec file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_file(buf.str());
}

std::string format_spec_file(const SourceSpecFile& file) {
  json doc;
  doc["dims"] = {{"n_x", file.dims.n_x}, {"n_s", file.dims.n_s}, {"n_y", file.dims.n_y}};
  json rows = json::array();
  for (Eigen::Index i = 0; i < file.covariance.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < file.covariance.cols(); ++j) row.push_back(file.covariance(i, j));
    rows.push_back(row);
  }
  doc["covariance"] = rows;
  if (!file.label.empty()) doc["label"] = file.label;
  return doc.dump(2);
}

double nats_to_bits(double nats) { return nats / std::numbers::ln2; }

CurveRecord to_record(const CurvePoint& point) {
  CurveRecord r;
  r.delta = point.delta;
  r.rate_nats = point.rate;
  r.rate_bits = nats_to_bits(point.rate);
  r.xi = point.xi;
  r.active_count = point.active_count;
  r.feasible = point.feasible;
  r.error = point.error;
  return r;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double parse_number(std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorCode::ParseError, "not a number: '" + s + "'");
  }
  return v;
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRecord>& records) {
  out << kCurveCsvHeader << '\n';
  for (const auto& r : records) {
    out << format_number(r.delta) << ',' << format_number(r.rate_nats) << ','
        << format_number(r.rate_bits) << ',' << format_number(r.xi) << ',' << r.active_count
        << ',' << (r.feasible ? "true" : "false") << ',' << r.error << '\n';
  }
}

std::vector<CurveRecord> read_curve_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCurveCsvHeader) {
    throw Error(ErrorCode::ParseError, "curve CSV header mismatch");
  }
  std::vector<CurveRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 7) {
      throw Error(ErrorCode::ParseError, "curve CSV row has " + std::to_string(cells.size()) +
                                             " fields: " + line);
    }
    CurveRecord r;
    r.delta = parse_number(cells[0]);
    r.rate_nats = parse_number(cells[1]);
    r.rate_bits = parse_number(cells[2]);
    r.xi = parse_number(cells[3]);
    r.active_count = static_cast<int>(parse_number(cells[4]));
    if (cells[5] != "true" && cells[5] != "false") {
      throw Error(ErrorCode::ParseError, "feasible must be true or false: " + cells[5]);
    }
    r.feasible = cells[5] == "true";
    r.error = cells[6];
    records.push_back(std::move(r));
  }
  return records;
}

void write_discrepancy_csv(std::ostream& out, const std::vector<oracle::DiscrepancyRow>& rows) {
  out << kDiscrepancyCsvHeader << '\n';
  for (const auto& r : rows) {
    out << format_number(r.delta) << ',' << format_number(r.prior_noise_variance) << ','
        << format_number(r.prior_z_variance) << ',' << format_number(r.wyner_h) << ','
        << format_number(r.wyner_q_w) << ',' << format_number(r.wyner_z_variance) << ','
        << format_number(r.classical_reproduction_variance) << ','
        << (r.divergent ? "true" : "false") << '\n';
  }
}

}  // namespace condrdf::io
