#pragma once

// Subcommands of the condrdf tool. Each writes its result to `out`,
// diagnostics to `err`, and returns the process exit code.

#include "condrdf/oracle.hpp"
#include "condrdf/test_channel.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace condrdf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitPointErrors = 2;
inline constexpr int kExitVerificationFailed = 3;

enum class Format { Csv, Json };

/// Either an explicit list or an inclusive linear grid of `points` values.
struct DeltaGrid {
  std::vector<double> explicit_values;
  std::optional<double> min;
  std::optional<double> max;
  int points = 0;
};

/// Throws Error{InvalidArgument} if the grid is empty or inconsistent.
std::vector<double> expand_grid(const DeltaGrid& grid);

struct CurveOptions {
  std::string spec_path;
  DeltaGrid grid;
  Format format = Format::Csv;
  bool bits = false;
};

struct ChannelOptions {
  std::string spec_path;
  double delta = 0.0;
  Format format = Format::Json;
  bool bits = false;
};

struct VerifyOptions {
  std::string spec_path;
  double delta = 0.0;
  std::int64_t samples = 1000000;
  std::uint64_t seed = 7;
  bool bits = false;
  /// Test hook: mutates the synthesized channel before it is verified.
  std::function<void(TestChannel&)> channel_hook;
};

struct OracleOptions {
  std::string spec_path;
  double delta = 0.0;
  oracle::Resolution resolution;
  bool bits = false;
};

struct DiscrepancyOptions {
  double q = 1.0;
  DeltaGrid grid;
};

int cmd_curve(const CurveOptions& opts, std::ostream& out, std::ostream& err);
int cmd_channel(const ChannelOptions& opts, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& err);
int cmd_oracle(const OracleOptions& opts, std::ostream& out, std::ostream& err);
int cmd_remark3(const DiscrepancyOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches to the subcommands above.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace condrdf::cli
