#include "condrdf/cli.hpp"

#include "condrdf/error.hpp"
#include "condrdf/io.hpp"
#include "condrdf/waterfill.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <ostream>

namespace condrdf::cli {

namespace {

using nlohmann::ordered_json;

struct Problem {
  io::SourceSpecFile file;
  GaussianSourceSpec spec;
  ConditionalStats stats;
};

void report_error(std::ostream& err, const Error& e) {
  err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
}

Problem load_problem(const std::string& path) {
  Problem p;
  p.file = io::load_spec_file(path);
  p.spec = validate_spec(p.file.covariance, p.file.dims);
  p.stats = conditional_stats(p.spec);
  return p;
}

ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return io::format_number(v);
}

ordered_json matrix_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json vector_json(const Vector& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

double in_unit(double nats, bool bits) { return bits ? io::nats_to_bits(nats) : nats; }
const char* unit_name(bool bits) { return bits ? "bits" : "nats"; }

ordered_json range_json(const DistortionRange& r) {
  return ordered_json{{"lower", number(r.lower)}, {"upper", number(r.upper)}};
}

ordered_json structure_json(const StructuralReport& rep) {
  ordered_json residuals = ordered_json::object();
  ordered_json passed = ordered_json::object();
  for (const auto& [name, value] : rep.residuals) residuals[name] = number(value);
  for (const auto& [name, ok] : rep.passed) passed[name] = ok;
  return ordered_json{{"tolerance", rep.tolerance},
                      {"residuals", residuals},
                      {"passed", passed},
                      {"all_passed", rep.all_passed()}};
}

void write_matrix_csv(std::ostream& out, const std::string& name, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << name << ',' << i << ',' << j << ',' << io::format_number(m(i, j)) << '\n';
    }
  }
}

void write_scalar_csv(std::ostream& out, const std::string& name, double v) {
  out << name << ",0,0," << io::format_number(v) << '\n';
}

}  // namespace

std::vector<double> expand_grid(const DeltaGrid& grid) {
  const bool has_range = grid.min.has_value() || grid.max.has_value() || grid.points > 0;
  if (!grid.explicit_values.empty()) {
    if (has_range) {
      throw Error(ErrorCode::InvalidArgument,
                  "give either --delta values or --delta-min/--delta-max/--points, not both");
    }
    return grid.explicit_values;
  }
  if (!grid.min || !grid.max || grid.points < 1) {
    throw Error(ErrorCode::InvalidArgument,
                "distortion grid needs --delta or all of --delta-min, --delta-max, --points");
  }
  if (*grid.max < *grid.min) {
    throw Error(ErrorCode::InvalidArgument, "--delta-max must not be below --delta-min");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(grid.points));
  if (grid.points == 1) {
    out.push_back(*grid.min);
    return out;
  }
  const double span = *grid.max - *grid.min;
  for (int i = 0; i < grid.points; ++i) {
    // Endpoints are emitted exactly.
    if (i == grid.points - 1) {
      out.push_back(*grid.max);
    } else {
      out.push_back(*grid.min + span * static_cast<double>(i) / (grid.points - 1));
    }
  }
  return out;
}

int cmd_curve(const CurveOptions& opts, std::ostream& out, std::ostream& err) {
  Problem p;
  SpectralSetup setup;
  std::vector<double> deltas;
  try {
    deltas = expand_grid(opts.grid);
    p = load_problem(opts.spec_path);
    setup = spectral_setup(p.spec, p.stats);
  } catch (const Error& e) {
    report_error(err, e);
    return kExitInputError;
  }

  const RdfCurve curve = rdf_curve(setup, deltas);
  std::vector<io::CurveRecord> records;
  records.reserve(curve.size());
  bool any_error = false;
  for (const auto& pt : curve) {
    records.push_back(io::to_record(pt));
    if (!pt.feasible) {
      any_error = true;
      err << "warning: delta=" << io::format_number(pt.delta) << ": " << pt.error << '\n';
    }
  }

  if (opts.format == Format::Csv) {
    io::write_curve_csv(out, records);
  } else {
    ordered_json doc;
    doc["label"] = p.file.label;
    doc["distortion_range"] = range_json(distortion_range(setup));
    doc["rate_unit"] = unit_name(opts.bits);
    ordered_json points = ordered_json::array();
    for (const auto& r : records) {
      points.push_back(ordered_json{{"delta", number(r.delta)},
                                    {"rate", number(opts.bits ? r.rate_bits : r.rate_nats)},
                                    {"rate_nats", number(r.rate_nats)},
                                    {"rate_bits", number(r.rate_bits)},
                                    {"xi", number(r.xi)},
                                    {"active_count", r.active_count},
                                    {"feasible", r.feasible},
                                    {"error", r.error}});
    }
    doc["points"] = std::move(points);
    out << doc.dump(2) << '\n';
  }
  return any_error ? kExitPointErrors : kExitOk;
}

int cmd_channel(const ChannelOptions& opts, std::ostream& out, std::ostream& err) {
  Problem p;
  SpectralSetup setup;
  WaterfillSolution sol;
  TestChannel ch;
  try {
    p = load_problem(opts.spec_path);
    setup = spectral_setup(p.spec, p.stats);
    sol = solve_waterfill(setup, opts.delta);
    ch = build_channel(p.spec, p.stats, sol.sigma_delta);
  } catch (const Error& e) {
    report_error(err, e);
    return kExitInputError;
  }

  const ChannelRate rates = rate_of_channel(p.spec, ch);
  const DecoderOnlyChannel split = decoder_only_form(ch);
  const double split_rate = rate_of_split(p.spec, split);
  const StructuralReport rep = verify_structure(p.spec, ch);

  if (opts.format == Format::Csv) {
    out << "quantity,row,col,value\n";
    write_scalar_csv(out, "delta", opts.delta);
    write_scalar_csv(out, std::string("rate_waterfill_") + unit_name(opts.bits),
                     in_unit(sol.rate, opts.bits));
    write_scalar_csv(out, std::string("rate_via_posterior_") + unit_name(opts.bits),
                     in_unit(rates.via_posterior, opts.bits));
    write_scalar_csv(out, std::string("rate_via_noise_") + unit_name(opts.bits),
                     in_unit(rates.via_noise, opts.bits));
    write_scalar_csv(out, std::string("rate_decoder_split_") + unit_name(opts.bits),
                     in_unit(split_rate, opts.bits));
    write_scalar_csv(out, "xi", sol.xi);
    write_matrix_csv(out, "H", ch.h);
    write_matrix_csv(out, "G", ch.g);
    write_matrix_csv(out, "Q_W", ch.q_w);
    write_matrix_csv(out, "Sigma_delta", ch.sigma_delta);
    write_matrix_csv(out, "Q_xhat_given_y", ch.q_xhat_given_y);
    write_matrix_csv(out, "Q_s_given_xhat_y", ch.q_s_given_xhat_y);
    for (const auto& [name, value] : rep.residuals) write_scalar_csv(out, "residual:" + name, value);
    return kExitOk;
  }

  ordered_json doc;
  doc["label"] = p.file.label;
  doc["delta"] = number(opts.delta);
  doc["distortion_range"] = range_json(distortion_range(setup));
  doc["rate_unit"] = unit_name(opts.bits);
  doc["rate"] = ordered_json{{"waterfill", number(in_unit(sol.rate, opts.bits))},
                             {"via_posterior", number(in_unit(rates.via_posterior, opts.bits))},
                             {"via_noise", number(in_unit(rates.via_noise, opts.bits))},
                             {"decoder_split", number(in_unit(split_rate, opts.bits))},
                             {"discrepancy", number(in_unit(rates.discrepancy, opts.bits))}};
  doc["water_level"] = number(sol.xi);
  doc["zero_rate"] = sol.zero_rate;
  doc["singular_values"] = vector_json(setup.d);
  doc["lambda"] = vector_json(sol.lambda);
  doc["channel"] = ordered_json{{"H", matrix_json(ch.h)},
                                {"G", matrix_json(ch.g)},
                                {"Q_W", matrix_json(ch.q_w)},
                                {"Sigma_delta", matrix_json(ch.sigma_delta)},
                                {"Q_xhat_given_y", matrix_json(ch.q_xhat_given_y)},
                                {"Q_s_given_xhat_y", matrix_json(ch.q_s_given_xhat_y)}};
  doc["decoder_only"] = ordered_json{
      {"z_channel", ordered_json{{"H", matrix_json(split.h)}, {"Q_W", matrix_json(split.q_w)}}},
      {"decoder_gain", matrix_json(split.g)}};
  doc["structure"] = structure_json(rep);
  out << doc.dump(2) << '\n';
  return kExitOk;
}

int cmd_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& err) {
  Problem p;
  WaterfillSolution sol;
  TestChannel ch;
  SimulationResult sim;
  try {
    if (opts.samples < 2) {
      throw Error(ErrorCode::InvalidArgument, "--samples must be at least 2");
    }
    p = load_problem(opts.spec_path);
    const SpectralSetup setup = spectral_setup(p.spec, p.stats);
    sol = solve_waterfill(setup, opts.delta);
    ch = build_channel(p.spec, p.stats, sol.sigma_delta);
    if (opts.channel_hook) opts.channel_hook(ch);
    sim = simulate_channel(p.spec, ch, opts.samples, opts.seed);
  } catch (const Error& e) {
    report_error(err, e);
    return kExitInputError;
  }

  const StructuralReport rep = verify_structure(p.spec, ch);
  const double expected = sol.sigma_delta.trace();
  const double gap = std::abs(sim.empirical_distortion - expected);
  const double allowed = 4.0 * sim.standard_error;
  const bool mc_pass = gap <= allowed;
  const bool pass = mc_pass && rep.all_passed();

  ordered_json doc;
  doc["label"] = p.file.label;
  doc["delta"] = number(opts.delta);
  doc["rate_unit"] = unit_name(opts.bits);
  doc["rate"] = number(in_unit(sol.rate, opts.bits));
  doc["structure"] = structure_json(rep);
  doc["monte_carlo"] = ordered_json{{"samples", sim.n_samples},
                                    {"seed", opts.seed},
                                    {"expected_distortion", number(expected)},
                                    {"empirical_distortion", number(sim.empirical_distortion)},
                                    {"standard_error", number(sim.standard_error)},
                                    {"abs_gap", number(gap)},
                                    {"allowed_gap", number(allowed)},
                                    {"passed", mc_pass}};
  doc["verdict"] = pass ? "pass" : "fail";
  out << doc.dump(2) << '\n';
  if (!pass) {
    err << "verification failed\n";
    return kExitVerificationFailed;
  }
  return kExitOk;
}

int cmd_oracle(const OracleOptions& opts, std::ostream& out, std::ostream& err) {
  Problem p;
  WaterfillSolution sol;
  oracle::OracleResult brute;
  try {
    p = load_problem(opts.spec_path);
    const Dims& d = p.spec.dims();
    if (d.n_x != d.n_s || d.n_x > 2) {
      throw Error(ErrorCode::DimensionUnsupported,
                  "oracle comparison supports n_x = n_s <= 2 only");
    }
    const SpectralSetup setup = spectral_setup(p.spec, p.stats);
    sol = solve_waterfill(setup, opts.delta);
    brute = oracle::brute_force_rdf(p.spec, opts.delta, opts.resolution);
  } catch (const Error& e) {
    report_error(err, e);
    return kExitInputError;
  }

  const double tol = oracle::resolution_tolerance(opts.resolution);
  const double gap = std::abs(brute.rate - sol.rate);
  // A grid minimum can never undercut the true infimum.
  const bool sound = brute.rate >= sol.rate - 1e-9;
  const bool pass = sound && gap <= tol;

  ordered_json doc;
  doc["label"] = p.file.label;
  doc["delta"] = number(opts.delta);
  doc["rate_unit"] = unit_name(opts.bits);
  doc["waterfill_rate"] = number(in_unit(sol.rate, opts.bits));
  doc["oracle_rate"] = number(in_unit(brute.rate, opts.bits));
  doc["abs_gap_nats"] = number(gap);
  doc["tolerance_nats"] = tol;
  doc["oracle"] = ordered_json{{"eigen_points", opts.resolution.eigen_points},
                               {"angle_points", brute.angle_points},
                               {"eigen_step", number(brute.eigen_step)},
                               {"evaluated_points", brute.evaluated_points},
                               {"feasible_points", brute.feasible_points},
                               {"argmin_q_xhat_given_y", matrix_json(brute.argmin)}};
  doc["verdict"] = pass ? "pass" : "fail";
  out << doc.dump(2) << '\n';
  if (!pass) {
    err << "oracle disagreement exceeds tolerance\n";
    return kExitVerificationFailed;
  }
  return kExitOk;
}

int cmd_remark3(const DiscrepancyOptions& opts, std::ostream& out, std::ostream& err) {
  std::vector<oracle::DiscrepancyRow> rows;
  try {
    rows = oracle::remark3_discrepancy(opts.q, expand_grid(opts.grid));
  } catch (const Error& e) {
    report_error(err, e);
    return kExitInputError;
  }
  io::write_discrepancy_csv(out, rows);
  return kExitOk;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conditional rate-distortion for remote Gaussian sources with decoder side information"};
  app.require_subcommand(1);

  const std::map<std::string, Format> formats{{"csv", Format::Csv}, {"json", Format::Json}};

  auto add_grid = [](CLI::App* cmd, DeltaGrid& grid) {
    cmd->add_option("--delta", grid.explicit_values, "Explicit distortion values");
    cmd->add_option("--delta-min", grid.min, "First grid distortion");
    cmd->add_option("--delta-max", grid.max, "Last grid distortion");
    cmd->add_option("--points", grid.points, "Number of grid points")->check(CLI::PositiveNumber);
  };

  CurveOptions curve;
  auto* curve_cmd = app.add_subcommand("curve", "Sweep the rate-distortion curve");
  curve_cmd->add_option("spec", curve.spec_path, "Source spec file")->required();
  add_grid(curve_cmd, curve.grid);
  curve_cmd->add_option("--format", curve.format, "Output format")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  curve_cmd->add_flag("--bits", curve.bits, "Report the headline rate in bits (json)");

  ChannelOptions channel;
  auto* channel_cmd = app.add_subcommand("channel", "Synthesize and check the optimal test channel");
  channel_cmd->add_option("spec", channel.spec_path, "Source spec file")->required();
  channel_cmd->add_option("--delta", channel.delta, "Distortion")->required();
  channel_cmd->add_option("--format", channel.format, "Output format")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  channel_cmd->add_flag("--bits", channel.bits, "Report rates in bits");

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "Analytic and Monte Carlo verification");
  verify_cmd->add_option("spec", verify.spec_path, "Source spec file")->required();
  verify_cmd->add_option("--delta", verify.delta, "Distortion")->required();
  verify_cmd->add_option("--samples", verify.samples, "Monte Carlo sample count");
  verify_cmd->add_option("--seed", verify.seed, "Random seed");
  verify_cmd->add_flag("--bits", verify.bits, "Report rates in bits");

  OracleOptions oracle_opts;
  auto* oracle_cmd = app.add_subcommand("oracle", "Compare water-filling against brute force");
  oracle_cmd->add_option("spec", oracle_opts.spec_path, "Source spec file")->required();
  oracle_cmd->add_option("--delta", oracle_opts.delta, "Distortion")->required();
  oracle_cmd->add_option("--resolution", oracle_opts.resolution.eigen_points,
                         "Grid points per eigenvalue axis")
      ->check(CLI::Range(2, 100000));
  oracle_cmd->add_option("--angles", oracle_opts.resolution.angle_points,
                         "Rotation angles for 2x2 problems")
      ->check(CLI::Range(1, 100000));
  oracle_cmd->add_flag("--bits", oracle_opts.bits, "Report rates in bits");

  DiscrepancyOptions remark3;
  auto* remark3_cmd =
      app.add_subcommand("remark3", "Additive-noise auxiliary vs Wyner channel, scalar case");
  remark3_cmd->add_option("--q", remark3.q, "Conditional variance Q_{X|Y}");
  add_grid(remark3_cmd, remark3.grid);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitInputError;
  }

  if (curve_cmd->parsed()) return cmd_curve(curve, out, err);
  if (channel_cmd->parsed()) return cmd_channel(channel, out, err);
  if (verify_cmd->parsed()) return cmd_verify(verify, out, err);
  if (oracle_cmd->parsed()) return cmd_oracle(oracle_opts, out, err);
  if (remark3_cmd->parsed()) return cmd_remark3(remark3, out, err);
  return kExitInputError;
}

}  // namespace condrdf::cli
