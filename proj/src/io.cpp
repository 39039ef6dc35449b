#include "mmflow/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace mmflow {

std::string format_double(double v) {
    char buf[40];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(len));
}

double parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc{} || ptr != end)
        throw ValidationError("not a number: '" + std::string(text) + "'");
    return v;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << kTrajectoryCsvHeader << '\n';
    const auto& ch = traj.channels;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << format_double(traj.times[i]) << ',' << format_double(ch.mu_W[i]) << ','
            << format_double(ch.mu_G[i]) << ',' << format_double(ch.skew_fro[i]) << ','
            << format_double(ch.x_norm[i]) << ',' << format_double(ch.phi_dev_sq[i]) << '\n';
    }
}

Trajectory read_trajectory_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("empty trajectory CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTrajectoryCsvHeader)
        throw ValidationError("unexpected trajectory CSV header: '" + line + "'");

    Trajectory traj;
    auto& ch = traj.channels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        Vector row;
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            const std::string_view cell =
                std::string_view(line).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            try {
                row.push_back(parse_double(cell));
            } catch (const ValidationError& e) {
                throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (row.size() != 6)
            throw ValidationError("line " + std::to_string(line_no) + ": expected 6 columns");
        if (!traj.times.empty() && !(row[0] > traj.times.back()))
            throw ValidationError("line " + std::to_string(line_no) + ": times must increase");
        traj.times.push_back(row[0]);
        ch.mu_W.push_back(row[1]);
        ch.mu_G.push_back(row[2]);
        ch.skew_fro.push_back(row[3]);
        ch.x_norm.push_back(row[4]);
        ch.phi_dev_sq.push_back(row[5]);
    }
    return traj;
}

void write_snapshots(std::ostream& out, const Trajectory& traj) {
    for (std::size_t i = 0; i < traj.size(); ++i) {
        out << "# t " << format_double(traj.times[i]) << '\n';
        const auto& x = traj.x_samples[i];
        for (std::size_t j = 0; j < x.size(); ++j) out << (j ? " " : "") << format_double(x[j]);
        out << '\n';
        write_dense_matrix(out, traj.W_samples[i]);
    }
}

SquareMatrix read_dense_matrix(std::istream& in) {
    std::vector<double> data;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        std::string tok;
        std::size_t count = 0;
        while (ss >> tok) {
            data.push_back(parse_double(tok));
            ++count;
        }
        if (count == 0) continue;
        if (rows == 0) cols = count;
        else if (count != cols) throw ValidationError("ragged matrix rows");
        ++rows;
    }
    if (rows == 0 || rows != cols)
        throw ValidationError("matrix file must hold a non-empty square matrix, got " +
                              std::to_string(rows) + "x" + std::to_string(cols));
    return SquareMatrix(rows, std::move(data));
}

SquareMatrix load_dense_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open matrix file " + path.string());
    try {
        return read_dense_matrix(in);
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

void write_dense_matrix(std::ostream& out, const SquareMatrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < m.size(); ++j) out << (j ? " " : "") << format_double(m(i, j));
        out << '\n';
    }
}

nlohmann::ordered_json report_to_json(const VerificationReport& report) {
    nlohmann::ordered_json doc;
    doc["status"] = std::string(to_string(report.status));
    doc["config_digest"] = report.config_digest;
    auto checks = nlohmann::ordered_json::array();
    for (const auto& c : report.checks) {
        nlohmann::ordered_json j;
        j["name"] = c.name;
        j["passed"] = c.passed;
        j["worst_margin"] = c.worst_margin;
        j["location_t"] = c.location;
        j["tolerance"] = c.tolerance_used;
        j["status"] = std::string(to_string(c.status));
        j["observed"] = c.observed;
        checks.push_back(std::move(j));
    }
    doc["checks"] = std::move(checks);
    return doc;
}

VerificationReport report_from_json(const nlohmann::json& doc) {
    VerificationReport report;
    const auto status = parse_report_status(doc.at("status").get<std::string>());
    if (!status) throw ValidationError("unknown report status");
    report.status = *status;
    report.config_digest = doc.at("config_digest").get<std::string>();
    for (const auto& j : doc.at("checks")) {
        CheckResult c;
        c.name = j.at("name").get<std::string>();
        c.passed = j.at("passed").get<bool>();
        c.worst_margin = j.at("worst_margin").get<double>();
        c.location = j.at("location_t").get<double>();
        c.tolerance_used = j.at("tolerance").get<double>();
        c.observed = j.value("observed", 0.0);
        const std::string s = j.value("status", c.passed ? "pass" : "fail");
        if (s == "pass") c.status = CheckStatus::Pass;
        else if (s == "fail") c.status = CheckStatus::Fail;
        else if (s == "hypothesis_unmet") c.status = CheckStatus::HypothesisUnmet;
        else if (s == "assumption_violated") c.status = CheckStatus::AssumptionViolated;
        else throw ValidationError("unknown check status '" + s + "'");
        report.checks.push_back(std::move(c));
    }
    return report;
}

std::string render_report(const VerificationReport& report) {
    return report_to_json(report).dump(2) + "\n";
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

std::string join(std::span<const double> v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s + "]";
}

std::string join(const SquareMatrix& m) { return join(m.values()); }

}  // namespace

std::string canonical_config_text(const SimConfig& cfg) {
    std::ostringstream out;
    out << "n=" << cfg.n << '\n'
        << "epsilon=" << format_double(cfg.epsilon) << '\n'
        << "gamma=" << format_double(cfg.gamma.gamma0) << '\n'
        << "gamma_amplitude=" << format_double(cfg.gamma.amplitude) << '\n'
        << "gamma_omega=" << format_double(cfg.gamma.omega) << '\n'
        << "rule=" << rule_name(cfg.rule) << '\n';
    std::visit(overloaded{
                   [](const rule::AntiHebbian&) {},
                   [&](const rule::HadamardHebbian& r) { out << "K=" << join(r.K) << '\n'; },
                   [&](const rule::DongHopfield& r) { out << "nu=" << format_double(r.nu) << '\n'; },
                   [&](const rule::Covariance& r) {
                       out << "nu=" << format_double(r.nu) << "\ndelta=" << format_double(r.delta)
                           << "\nsigma_sq=" << format_double(r.sigma_sq)
                           << "\nnormalize_window=" << (r.normalize_window ? "true" : "false") << '\n';
                   },
                   [&](const rule::Presynaptic& r) {
                       out << "b=" << join(r.b) << "\nphi_max=" << format_double(r.phi_max) << '\n';
                   },
                   [&](const rule::GradientFlow& r) {
                       out << "target=" << join(r.target)
                           << "\nlipschitz_L=" << format_double(r.lipschitz_L) << '\n';
                   },
               },
               cfg.rule);
    out << "measure=" << to_string(cfg.measure_id) << '\n';
    std::visit(overloaded{
                   [&](const input::Zero&) { out << "input=zero\n"; },
                   [&](const input::Constant& c) { out << "input=constant\ninput_c=" << join(c.c) << '\n'; },
                   [&](const input::Sinusoid& s) {
                       out << "input=sinusoid\ninput_amplitude=" << join(s.amplitude)
                           << "\ninput_frequency=" << format_double(s.frequency)
                           << "\ninput_phase=" << format_double(s.phase) << '\n';
                   },
                   [&](const input::Pulse& p) {
                       out << "input=pulse\ninput_c=" << join(p.c) << "\ninput_t_on=" << format_double(p.t_on)
                           << "\ninput_t_off=" << format_double(p.t_off) << '\n';
                   },
               },
               cfg.input);
    out << "x0=" << join(cfg.x0) << '\n'
        << "W0=" << join(cfg.W0) << '\n'
        << "dt=" << format_double(cfg.dt) << '\n'
        << "t_end=" << format_double(cfg.t_end) << '\n'
        << "seed=" << cfg.seed << '\n'
        << "k=" << format_double(cfg.k_threshold) << '\n'
        << "record_stride=" << cfg.record_stride << '\n'
        << "freeze_weights=" << (cfg.freeze_weights ? "true" : "false") << '\n';
    return out.str();
}

std::string config_digest(const SimConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_config_text(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mmflow
