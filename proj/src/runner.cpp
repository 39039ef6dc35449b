#include "mmflow/runner.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "mmflow/io.hpp"

namespace mmflow {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

RunResult execute(const RunSpec& spec, const std::filesystem::path& out_dir) {
    RunResult result{spec, {}, false};
    VerifiedRun run = verify_run(spec.sim, spec.verify);
    result.report = std::move(run.report);
    result.as_expected = result.report.status == spec.expect;

    const auto dir = out_dir / spec.run_name;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());

    std::ostringstream csv;
    write_trajectory_csv(csv, run.trajectory);
    write_file(dir / "trajectory.csv", csv.str());
    write_file(dir / "report.json", render_report(result.report));
    if (spec.snapshots) {
        std::ostringstream snap;
        write_snapshots(snap, run.trajectory);
        write_file(dir / "snapshots.txt", snap.str());
    }
    return result;
}

}  // namespace

std::vector<RunResult> run_all(const std::vector<RunSpec>& runs, const std::filesystem::path& out_dir,
                               unsigned jobs) {
    std::vector<std::optional<RunResult>> slots(runs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= runs.size()) return;
            try {
                slots[i] = execute(runs[i], out_dir);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(runs.size())));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<RunResult> results;
    results.reserve(runs.size());
    for (auto& s : slots) results.push_back(std::move(*s));
    return results;
}

std::string summary_line(const RunResult& r) {
    std::string line = r.spec.run_name + ": " + std::string(to_string(r.report.status));
    if (r.spec.expect != ReportStatus::Pass) line += " (expected " + std::string(to_string(r.spec.expect)) + ")";
    if (const auto* t1 = r.report.find("theorem1")) line += " theorem1_margin=" + format_double(t1->worst_margin);
    for (const auto& c : r.report.checks)
        if (c.status != CheckStatus::Pass) line += " " + c.name + "=" + std::string(to_string(c.status));
    if (!r.as_expected) line += " [UNEXPECTED]";
    return line;
}

int run(const std::vector<Scenario>& scenarios, const std::filesystem::path& out_dir, unsigned jobs,
        std::ostream& log) {
    const auto runs = expand(scenarios);
    if (runs.empty()) return 0;
    const auto results = run_all(runs, out_dir, jobs);
    std::string summary;
    bool ok = true;
    for (const auto& r : results) {
        summary += summary_line(r) + "\n";
        ok = ok && r.as_expected;
    }
    write_file(out_dir / "summary.txt", summary);
    log << summary;
    return ok ? 0 : 1;
}

std::vector<SweepRow> sweep_summary(const std::vector<RunResult>& results) {
    std::vector<SweepRow> rows;
    for (const auto& r : results) {
        if (r.spec.scenario_name != results.front().spec.scenario_name ||
            r.spec.sweep_param != results.front().spec.sweep_param)
            throw ValidationError("sweep summary over mixed scenarios");
        SweepRow row;
        row.value = r.spec.sweep_value;
        row.status = r.report.status;
        if (const auto* t1 = r.report.find("theorem1")) row.theorem1_margin = t1->worst_margin;
        if (const auto* cr = r.report.find("crossing")) {
            row.crossing_status = cr->status;
            if (cr->status == CheckStatus::Pass) row.crossing_time = cr->observed;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string render_sweep_csv(const std::vector<SweepRow>& rows, const std::string& param) {
    std::string out = param + ",status,theorem1_margin,crossing_status,crossing_t\n";
    for (const auto& r : rows) {
        out += format_double(r.value) + "," + std::string(to_string(r.status)) + "," +
               format_double(r.theorem1_margin) + "," + std::string(to_string(r.crossing_status)) + "," +
               (r.crossing_time ? format_double(*r.crossing_time) : std::string()) + "\n";
    }
    return out;
}

}  // namespace mmflow
