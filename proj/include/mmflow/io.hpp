#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "mmflow/dynamics.hpp"
#include "mmflow/verify.hpp"

namespace mmflow {

/// Shortest form is not used: every float is written with 17 significant
/// digits so that parsing it back gives the same double.
std::string format_double(double v);

/// Parse a full-string double; throws ValidationError otherwise.
double parse_double(std::string_view text);

inline constexpr std::string_view kTrajectoryCsvHeader = "t,mu_w,mu_g,skew_fro,x_norm,phi_dev_sq";

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

/// Reads the scalar channels back; x and W samples are not part of the CSV.
Trajectory read_trajectory_csv(std::istream& in);

/// Sidecar dump of the recorded x and W samples, one block per sample:
/// "# t <time>", the x vector on one line, then the n rows of W.
void write_snapshots(std::ostream& out, const Trajectory& traj);

/// Whitespace-separated rows, one matrix row per non-empty line; '#' starts a comment.
SquareMatrix read_dense_matrix(std::istream& in);
SquareMatrix load_dense_matrix(const std::filesystem::path& path);
void write_dense_matrix(std::ostream& out, const SquareMatrix& m);

nlohmann::ordered_json report_to_json(const VerificationReport& report);
VerificationReport report_from_json(const nlohmann::json& doc);
std::string render_report(const VerificationReport& report);

/// Every SimConfig field, one `key=value` per line, matrices inline.
std::string canonical_config_text(const SimConfig& cfg);

/// 64-bit FNV-1a of canonical_config_text, 16 lowercase hex digits.
std::string config_digest(const SimConfig& cfg);

}  // namespace mmflow
