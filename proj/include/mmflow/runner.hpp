#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mmflow/config.hpp"
#include "mmflow/verify.hpp"

namespace mmflow {

struct RunResult {
    RunSpec spec;
    VerificationReport report;
    bool as_expected = false;  // report.status == spec.expect
};

/// Simulate and verify every run on up to `jobs` worker threads, writing
/// <out_dir>/<run_name>/{trajectory.csv, report.json[, snapshots.txt]}.
/// Results come back in input order. Throws std::runtime_error on I/O failure.
std::vector<RunResult> run_all(const std::vector<RunSpec>& runs, const std::filesystem::path& out_dir,
                               unsigned jobs = 1);

std::string summary_line(const RunResult& result);

/// Expands, runs, writes <out_dir>/summary.txt and echoes summary lines to
/// `log`. Returns 0 iff every run ended in its expected status.
int run(const std::vector<Scenario>& scenarios, const std::filesystem::path& out_dir, unsigned jobs,
        std::ostream& log);

struct SweepRow {
    double value = 0.0;
    ReportStatus status = ReportStatus::Pass;
    double theorem1_margin = 0.0;
    CheckStatus crossing_status = CheckStatus::HypothesisUnmet;
    std::optional<double> crossing_time;
};

/// One row per sweep point; every result must come from the same swept scenario.
std::vector<SweepRow> sweep_summary(const std::vector<RunResult>& results);

/// CSV rendering: value,status,theorem1_margin,crossing_status,crossing_t
std::string render_sweep_csv(const std::vector<SweepRow>& rows, const std::string& param);

}  // namespace mmflow
