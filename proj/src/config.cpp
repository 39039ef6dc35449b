#include "mmflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mmflow/io.hpp"
#include "mmflow/random.hpp"

namespace mmflow {

namespace {

enum class Kind { Real, Int, Bool, Word, Vec, WordList };

struct KeySpec {
    Kind kind;
    bool sweepable;
};

const std::map<std::string, KeySpec, std::less<>>& key_table() {
    static const std::map<std::string, KeySpec, std::less<>> table{
        {"n", {Kind::Int, false}},
        {"epsilon", {Kind::Real, true}},
        {"gamma", {Kind::Real, true}},
        {"gamma_amplitude", {Kind::Real, true}},
        {"gamma_omega", {Kind::Real, true}},
        {"rule", {Kind::Word, false}},
        {"measure", {Kind::Word, false}},
        {"input", {Kind::Word, false}},
        {"input_c", {Kind::Vec, false}},
        {"input_amplitude", {Kind::Vec, false}},
        {"input_frequency", {Kind::Real, true}},
        {"input_phase", {Kind::Real, true}},
        {"input_t_on", {Kind::Real, true}},
        {"input_t_off", {Kind::Real, true}},
        {"x0", {Kind::Word, false}},  // "random" or a bracketed vector
        {"x0_scale", {Kind::Real, true}},
        {"W0", {Kind::Word, false}},  // random | random_symmetric | zero | <matrix file>
        {"W0_diag", {Kind::Vec, false}},
        {"W0_scale", {Kind::Real, true}},
        {"dt", {Kind::Real, true}},
        {"t_end", {Kind::Real, true}},
        {"seed", {Kind::Int, true}},
        {"k", {Kind::Real, true}},
        {"record_stride", {Kind::Int, true}},
        {"freeze_weights", {Kind::Bool, false}},
        {"nu", {Kind::Real, true}},
        {"delta", {Kind::Real, true}},
        {"sigma_sq", {Kind::Real, true}},
        {"normalize_window", {Kind::Bool, false}},
        {"K", {Kind::Word, false}},  // random | <matrix file>
        {"K_scale", {Kind::Real, true}},
        {"b", {Kind::Vec, false}},
        {"phi_max", {Kind::Real, true}},
        {"lipschitz_L", {Kind::Real, true}},
        {"target", {Kind::Word, false}},  // random | zero | <matrix file>
        {"target_scale", {Kind::Real, true}},
        {"checks", {Kind::WordList, false}},
        {"expect", {Kind::Word, false}},
        {"fault_mu_w_growth", {Kind::Real, true}},
        {"contraction_x0_b", {Kind::Vec, false}},
        {"snapshots", {Kind::Bool, false}},
    };
    return table;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

bool is_list(std::string_view v) { return !v.empty() && v.front() == '['; }

std::vector<std::string> split_list(std::string_view v) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw ValidationError("malformed list '" + std::string(v) + "'");
    std::vector<std::string> items;
    const std::string_view body = v.substr(1, v.size() - 2);
    if (trim(body).empty()) return items;
    std::size_t pos = 0;
    while (true) {
        const auto comma = body.find(',', pos);
        const std::string item = trim(body.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (item.empty()) throw ValidationError("empty list element in '" + std::string(v) + "'");
        items.push_back(item);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return items;
}

Vector parse_vector(std::string_view v) {
    Vector out;
    for (const auto& item : split_list(v)) out.push_back(parse_double(item));
    if (out.empty()) throw ValidationError("empty vector");
    if (!all_finite(out)) throw ValidationError("vector entries must be finite");
    return out;
}

std::int64_t parse_int(std::string_view v) {
    std::int64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size()) {
        // Accept integral floats such as "3.0" (sweep values arrive as doubles).
        const double d = parse_double(v);
        if (d != std::floor(d) || std::abs(d) > 9.0e15)
            throw ValidationError("not an integer: '" + std::string(v) + "'");
        return static_cast<std::int64_t>(d);
    }
    return out;
}

std::string normalize_list(std::string_view v) {
    const auto items = split_list(v);
    std::string s = "[";
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? ", " : "") + items[i];
    return s + "]";
}

struct Section {
    std::string name;
    std::size_t line = 0;
    std::vector<ConfigEntry> entries;
};

// Typed access to one section's entries; records errors against lines.
class Reader {
public:
    Reader(const std::vector<ConfigEntry>& entries, std::size_t header_line, std::vector<ParseError>& errors)
        : header_line_(header_line), errors_(errors) {
        for (const auto& e : entries) map_.emplace(e.key, &e);
    }

    bool has(const std::string& key) const { return map_.contains(key); }

    std::size_t line_of(const std::string& key) const {
        const auto it = map_.find(key);
        return it == map_.end() ? header_line_ : it->second->line;
    }

    void error(const std::string& key, const std::string& msg) { errors_.push_back({line_of(key), msg}); }

    const std::string* raw(const std::string& key) {
        const auto it = map_.find(key);
        if (it == map_.end()) return nullptr;
        used_.insert(key);
        return &it->second->value;
    }

    template <class Check>
    double real(const std::string& key, double fallback, Check&& ok, const char* requirement) {
        const std::string* v = raw(key);
        if (!v) return fallback;
        try {
            const double d = parse_double(*v);
            if (!std::isfinite(d) || !ok(d)) {
                error(key, key + " = " + *v + " violates invariant: " + key + " " + requirement);
                return fallback;
            }
            return d;
        } catch (const ValidationError& e) {
            error(key, key + ": " + e.what());
            return fallback;
        }
    }

    double real(const std::string& key, double fallback) {
        return real(key, fallback, [](double) { return true; }, "");
    }

    std::int64_t integer(const std::string& key, std::int64_t fallback, std::int64_t min) {
        const std::string* v = raw(key);
        if (!v) return fallback;
        try {
            const auto i = parse_int(*v);
            if (i < min) {
                error(key, key + " = " + *v + " violates invariant: " + key + " >= " + std::to_string(min));
                return fallback;
            }
            return i;
        } catch (const ValidationError& e) {
            error(key, key + ": " + e.what());
            return fallback;
        }
    }

    bool boolean(const std::string& key, bool fallback) {
        const std::string* v = raw(key);
        if (!v) return fallback;
        if (*v == "true") return true;
        if (*v == "false") return false;
        error(key, key + ": expected true or false, got '" + *v + "'");
        return fallback;
    }

    std::optional<Vector> vec(const std::string& key) {
        const std::string* v = raw(key);
        if (!v) return std::nullopt;
        try {
            return parse_vector(*v);
        } catch (const ValidationError& e) {
            error(key, key + ": " + e.what());
            return std::nullopt;
        }
    }

    std::optional<Vector> vec_of_length(const std::string& key, std::size_t n) {
        auto v = vec(key);
        if (v && v->size() != n) {
            error(key, key + " has length " + std::to_string(v->size()) + ", expected n = " + std::to_string(n));
            return std::nullopt;
        }
        return v;
    }

    void report_unused() {
        for (const auto& [key, entry] : map_)
            if (!used_.contains(key))
                errors_.push_back({entry->line, "key '" + key + "' does not apply to this scenario"});
    }

private:
    std::size_t header_line_;
    std::vector<ParseError>& errors_;
    std::map<std::string, const ConfigEntry*> map_;
    std::set<std::string> used_;
};

struct Materialized {
    SimConfig sim;
    std::vector<std::string> checks;
    ReportStatus expect = ReportStatus::Pass;
    VerifyOptions verify;
    bool snapshots = false;
};

SquareMatrix matrix_source(Reader& rd, const std::string& key, const std::string& value, std::size_t n,
                           const ParseOptions& opts) {
    const auto path = std::filesystem::path(value);
    try {
        SquareMatrix m = load_dense_matrix(path.is_absolute() ? path : opts.base_dir / path);
        if (m.size() != n) {
            rd.error(key, key + " file holds a " + std::to_string(m.size()) + "x" + std::to_string(m.size()) +
                              " matrix, expected n = " + std::to_string(n));
            return SquareMatrix(n);
        }
        return m;
    } catch (const ValidationError& e) {
        rd.error(key, key + ": " + e.what());
        return SquareMatrix(n);
    }
}

// Materialize one section; `errors` grows on failure.
Materialized materialize(const std::vector<ConfigEntry>& entries, std::size_t header_line,
                         const ParseOptions& opts, std::vector<ParseError>& errors) {
    const std::size_t errors_before = errors.size();
    Reader rd(entries, header_line, errors);
    Materialized out;
    SimConfig& cfg = out.sim;

    if (!rd.has("n")) {
        errors.push_back({header_line, "missing required key 'n'"});
        return out;
    }
    const auto n = static_cast<std::size_t>(rd.integer("n", 1, 1));
    cfg.n = n;
    cfg.seed = static_cast<std::uint64_t>(rd.integer("seed", 0, 0));
    if (opts.seed_override) cfg.seed = *opts.seed_override;

    const auto pos = [](double v) { return v > 0.0; };
    const auto nonneg = [](double v) { return v >= 0.0; };
    cfg.epsilon = rd.real("epsilon", 0.1, pos, "> 0");
    cfg.gamma.gamma0 = rd.real("gamma", 1.0, nonneg, ">= 0");
    cfg.gamma.amplitude = rd.real("gamma_amplitude", 0.0, [](double a) { return a >= 0.0 && a < 1.0; }, "in [0, 1)");
    cfg.gamma.omega = rd.real("gamma_omega", 0.0);
    cfg.dt = rd.has("dt") ? rd.real("dt", 0.01, pos, "> 0") : max_stable_dt(cfg);
    cfg.t_end = rd.real("t_end", 10.0, pos, "> 0");
    cfg.k_threshold = rd.real("k", 1.0, pos, "> 0");
    cfg.record_stride = static_cast<std::size_t>(rd.integer("record_stride", 1, 1));
    cfg.freeze_weights = rd.boolean("freeze_weights", false);

    // Rule.
    const std::string* rule = rd.raw("rule");
    if (!rule) {
        errors.push_back({header_line, "missing required key 'rule'"});
        return out;
    }
    auto matrix_key = [&](const std::string& key, const std::string& fallback, std::uint64_t stream,
                          const std::string& scale_key) -> SquareMatrix {
        const std::string* v = rd.raw(key);
        const std::string value = v ? *v : fallback;
        const double scale = rd.real(scale_key, 1.0, pos, "> 0");
        if (value == "random") {
            if (key == "K") return make_psd(derive_seed(cfg.seed, stream), n, scale);
            return seeded_normal_matrix(derive_seed(cfg.seed, stream), n, scale / std::sqrt(double(n)));
        }
        if (value == "zero") return SquareMatrix(n);
        return matrix_source(rd, key, value, n, opts);
    };
    if (*rule == "anti_hebbian") {
        cfg.rule = rule::AntiHebbian{};
    } else if (*rule == "hadamard_hebbian") {
        cfg.rule = rule::HadamardHebbian{matrix_key("K", "random", 3, "K_scale")};
    } else if (*rule == "dong_hopfield") {
        cfg.rule = rule::DongHopfield{rd.real("nu", 0.1, nonneg, ">= 0")};
    } else if (*rule == "covariance") {
        rule::Covariance c;
        c.nu = rd.real("nu", 0.1, nonneg, ">= 0");
        c.delta = rd.real("delta", 1.0, pos, "> 0");
        c.sigma_sq = rd.real("sigma_sq", 4.0 * double(n), nonneg, ">= 0");
        c.normalize_window = rd.boolean("normalize_window", true);
        cfg.rule = c;
    } else if (*rule == "presynaptic") {
        rule::Presynaptic p;
        if (auto b = rd.vec_of_length("b", n)) p.b = *b;
        else {
            if (!rd.has("b")) rd.error("rule", "presynaptic rule needs key 'b'");
            p.b = Vector(n, 0.0);
        }
        p.phi_max = rd.real("phi_max", 1.0, pos, "> 0");
        cfg.rule = p;
    } else if (*rule == "gradient_flow") {
        rule::GradientFlow g{matrix_key("target", "random", 4, "target_scale"), 1.0};
        g.lipschitz_L = rd.real("lipschitz_L", 1.0, pos, "> 0");
        cfg.rule = g;
    } else {
        rd.error("rule", "unknown rule '" + *rule + "'");
    }

    if (const std::string* m = rd.raw("measure")) {
        if (auto id = parse_measure_id(*m)) cfg.measure_id = *id;
        else rd.error("measure", "unknown measure '" + *m + "' (mu1, mu2, muinf)");
    } else {
        cfg.measure_id = bound_D(cfg.rule, n).measure;
    }

    // Input.
    const std::string* in = rd.raw("input");
    const std::string input = in ? *in : "zero";
    if (input == "zero") {
        cfg.input = input::Zero{};
    } else if (input == "constant") {
        cfg.input = input::Constant{rd.vec_of_length("input_c", n).value_or(Vector(n, 0.0))};
    } else if (input == "sinusoid") {
        input::Sinusoid s;
        s.amplitude = rd.vec_of_length("input_amplitude", n).value_or(Vector(n, 0.0));
        s.frequency = rd.real("input_frequency", 1.0);
        s.phase = rd.real("input_phase", 0.0);
        cfg.input = s;
    } else if (input == "pulse") {
        input::Pulse p;
        p.c = rd.vec_of_length("input_c", n).value_or(Vector(n, 0.0));
        p.t_on = rd.real("input_t_on", 0.0);
        p.t_off = rd.real("input_t_off", 0.0);
        cfg.input = p;
    } else {
        rd.error("input", "unknown input '" + input + "' (zero, constant, sinusoid, pulse)");
    }

    // Initial state.
    const double x0_scale = rd.real("x0_scale", 1.0, pos, "> 0");
    const std::string* x0 = rd.raw("x0");
    if (!x0 || *x0 == "random") {
        cfg.x0 = seeded_normal_vector(derive_seed(cfg.seed, 2), n, x0_scale);
    } else {
        try {
            cfg.x0 = parse_vector(*x0);
            if (cfg.x0.size() != n) rd.error("x0", "x0 has length " + std::to_string(cfg.x0.size()) +
                                                      ", expected n = " + std::to_string(n));
        } catch (const ValidationError& e) {
            rd.error("x0", std::string("x0: ") + e.what());
        }
        for (double& v : cfg.x0) v *= x0_scale;
    }

    const double w_scale = rd.real("W0_scale", 1.0, pos, "> 0");
    if (rd.has("W0") && rd.has("W0_diag")) rd.error("W0_diag", "W0 and W0_diag are mutually exclusive");
    if (auto diag = rd.vec_of_length("W0_diag", n)) {
        cfg.W0 = SquareMatrix::diagonal(*diag);
        cfg.W0 *= w_scale;
    } else {
        const std::string* w = rd.raw("W0");
        const std::string value = w ? *w : "random";
        if (value == "random" || value == "random_symmetric") {
            cfg.W0 = seeded_normal_matrix(derive_seed(cfg.seed, 1), n, w_scale / std::sqrt(double(n)));
            if (value == "random_symmetric") cfg.W0 = symmetric_part(cfg.W0);
        } else if (value == "zero") {
            cfg.W0 = SquareMatrix(n);
        } else {
            cfg.W0 = matrix_source(rd, "W0", value, n, opts);
            cfg.W0 *= w_scale;
        }
    }

    // Verification settings.
    if (const std::string* c = rd.raw("checks")) {
        try {
            for (const auto& name : split_list(*c)) {
                const auto& known = known_check_names();
                if (std::find(known.begin(), known.end(), name) == known.end())
                    rd.error("checks", "unknown check '" + name + "'");
                out.checks.push_back(name);
            }
        } catch (const ValidationError& e) {
            rd.error("checks", std::string("checks: ") + e.what());
        }
    }
    if (const std::string* e = rd.raw("expect")) {
        if (auto s = parse_report_status(*e)) out.expect = *s;
        else rd.error("expect", "unknown status '" + *e + "' (pass, fail, assumption_violated, blow_up)");
    }
    out.verify.checks = {out.checks.begin(), out.checks.end()};
    out.verify.fault_mu_w_growth = rd.real("fault_mu_w_growth", 0.0);
    out.verify.contraction_x0_b = rd.vec_of_length("contraction_x0_b", n);
    out.snapshots = rd.boolean("snapshots", false);

    rd.report_unused();
    if (errors.size() == errors_before) {
        try {
            validate_config(cfg);
        } catch (const ValidationError& e) {
            errors.push_back({header_line, e.what()});
        }
    }
    return out;
}

std::vector<Section> lex(std::string_view text, std::vector<ParseError>& errors) {
    std::vector<Section> sections;
    std::set<std::string> names;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            const std::string prefix = "[scenario.";
            if (line.back() != ']' || line.rfind(prefix, 0) != 0 || line.size() <= prefix.size() + 1) {
                errors.push_back({line_no, "expected a [scenario.<name>] header"});
                continue;
            }
            std::string name = line.substr(prefix.size(), line.size() - prefix.size() - 1);
            const bool ok = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
                return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
            });
            if (!ok) errors.push_back({line_no, "scenario names use [A-Za-z0-9_-] only"});
            if (!names.insert(name).second) errors.push_back({line_no, "duplicate scenario name '" + name + "'"});
            sections.push_back({std::move(name), line_no, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back({line_no, "expected 'key = value'"});
            continue;
        }
        const std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (sections.empty()) {
            errors.push_back({line_no, "key '" + key + "' appears before any [scenario.<name>] header"});
            continue;
        }
        if (!key_table().contains(key)) {
            errors.push_back({line_no, "unknown key '" + key + "'"});
            continue;
        }
        if (value.empty()) {
            errors.push_back({line_no, "key '" + key + "' has no value"});
            continue;
        }
        auto& entries = sections.back().entries;
        if (std::any_of(entries.begin(), entries.end(), [&](const ConfigEntry& e) { return e.key == key; })) {
            errors.push_back({line_no, "duplicate key '" + key + "'"});
            continue;
        }
        if (is_list(value)) {
            try {
                value = normalize_list(value);
            } catch (const ValidationError& e) {
                errors.push_back({line_no, e.what()});
                continue;
            }
        }
        entries.push_back({key, std::move(value), line_no});
    }
    return sections;
}

std::string format_sweep_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::vector<ConfigEntry> substitute(std::vector<ConfigEntry> entries, const std::string& key, double value) {
    for (auto& e : entries)
        if (e.key == key) {
            e.value = format_double(value);
            return entries;
        }
    entries.push_back({key, format_double(value), 0});
    return entries;
}

// Build a Scenario from a lexed section; sweep points are all validated.
std::optional<Scenario> build(const Section& sec, const ParseOptions& opts, std::vector<ParseError>& errors) {
    Scenario sc;
    sc.name = sec.name;
    sc.line = sec.line;
    sc.entries = sec.entries;
    sc.base_dir = opts.base_dir;
    const std::size_t before = errors.size();

    for (const auto& e : sec.entries) {
        const auto& spec = key_table().at(e.key);
        if (!is_list(e.value) || spec.kind == Kind::Vec || spec.kind == Kind::WordList || e.key == "x0") continue;
        if (!spec.sweepable) {
            errors.push_back({e.line, "key '" + e.key + "' cannot take a list of values"});
            continue;
        }
        if (sc.sweep) {
            errors.push_back({e.line, "only one swept key per scenario (already sweeping '" + sc.sweep->param + "')"});
            continue;
        }
        try {
            sc.sweep = Sweep{e.key, parse_vector(e.value)};
        } catch (const ValidationError& err) {
            errors.push_back({e.line, e.key + ": " + err.what()});
        }
    }
    if (errors.size() != before) return std::nullopt;

    if (sc.sweep) {
        bool first = true;
        for (double v : sc.sweep->values) {
            auto m = materialize(substitute(sec.entries, sc.sweep->param, v), sec.line, opts, errors);
            if (first) {
                sc.sim = m.sim;
                sc.checks_enabled = m.checks;
                sc.expect = m.expect;
                sc.verify = m.verify;
                sc.snapshots = m.snapshots;
                first = false;
            }
        }
    } else {
        auto m = materialize(sec.entries, sec.line, opts, errors);
        sc.sim = std::move(m.sim);
        sc.checks_enabled = std::move(m.checks);
        sc.expect = m.expect;
        sc.verify = std::move(m.verify);
        sc.snapshots = m.snapshots;
    }
    if (errors.size() != before) return std::nullopt;
    if (opts.seed_override) {
        auto& entries = sc.entries;
        const std::string seed = std::to_string(*opts.seed_override);
        auto it = std::find_if(entries.begin(), entries.end(), [](const ConfigEntry& e) { return e.key == "seed"; });
        if (it != entries.end()) it->value = seed;
        else entries.push_back({"seed", seed, 0});
    }
    return sc;
}

}  // namespace

ConfigError::ConfigError(std::vector<ParseError> errors)
    : std::runtime_error([&] {
          std::string msg;
          for (const auto& e : errors) msg += "line " + std::to_string(e.line) + ": " + e.message + "\n";
          return msg;
      }()),
      errors_(std::move(errors)) {}

const ConfigEntry* Scenario::entry(std::string_view key) const noexcept {
    for (const auto& e : entries)
        if (e.key == key) return &e;
    return nullptr;
}

bool is_sweepable(std::string_view key) noexcept {
    const auto it = key_table().find(key);
    return it != key_table().end() && it->second.sweepable;
}

std::vector<Scenario> parse_config(std::string_view text, const ParseOptions& opts) {
    std::vector<ParseError> errors;
    const auto sections = lex(text, errors);
    std::vector<Scenario> out;
    for (const auto& sec : sections)
        if (auto sc = build(sec, opts, errors)) out.push_back(std::move(*sc));
    if (!errors.empty()) {
        std::stable_sort(errors.begin(), errors.end(),
                         [](const ParseError& a, const ParseError& b) { return a.line < b.line; });
        throw ConfigError(std::move(errors));
    }
    return out;
}

std::vector<Scenario> load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw ConfigError({{0, "cannot open config file " + path.string()}});
    std::stringstream ss;
    ss << in.rdbuf();
    ParseOptions opts;
    opts.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    opts.seed_override = seed_override;
    return parse_config(ss.str(), opts);
}

std::string render(const Scenario& scenario) {
    std::string out = "[scenario." + scenario.name + "]\n";
    for (const auto& e : scenario.entries) out += e.key + " = " + e.value + "\n";
    return out;
}

std::string render(const std::vector<Scenario>& scenarios) {
    std::string out;
    for (std::size_t i = 0; i < scenarios.size(); ++i) out += (i ? "\n" : "") + render(scenarios[i]);
    return out;
}

Scenario with_sweep(const Scenario& scenario, const Sweep& sweep) {
    if (!is_sweepable(sweep.param))
        throw ConfigError({{scenario.line, "parameter '" + sweep.param + "' is not a sweepable numeric field"}});
    if (sweep.values.empty() || !all_finite(sweep.values))
        throw ConfigError({{scenario.line, "sweep values must be finite and non-empty"}});
    // A previously swept key falls back to its first point.
    std::vector<ConfigEntry> entries = scenario.entries;
    if (scenario.sweep) entries = substitute(entries, scenario.sweep->param, scenario.sweep->values.front());
    std::string list = "[";
    for (std::size_t i = 0; i < sweep.values.size(); ++i) list += (i ? ", " : "") + format_double(sweep.values[i]);
    auto it = std::find_if(entries.begin(), entries.end(), [&](const ConfigEntry& e) { return e.key == sweep.param; });
    if (it != entries.end()) it->value = list + "]";
    else entries.push_back({sweep.param, list + "]", scenario.line});

    std::vector<ParseError> errors;
    auto built = build(Section{scenario.name, scenario.line, std::move(entries)}, ParseOptions{scenario.base_dir, {}},
                       errors);
    if (!built) throw ConfigError(std::move(errors));
    return *built;
}

std::vector<RunSpec> expand(const Scenario& scenario) {
    std::vector<RunSpec> runs;
    auto make = [&](const SimConfig& sim, const VerifyOptions& verify) {
        RunSpec r;
        r.run_name = scenario.name;
        r.scenario_name = scenario.name;
        r.sim = sim;
        r.verify = verify;
        r.expect = scenario.expect;
        r.snapshots = scenario.snapshots;
        return r;
    };
    if (!scenario.sweep) {
        runs.push_back(make(scenario.sim, scenario.verify));
        return runs;
    }
    const ParseOptions o{scenario.base_dir, {}};
    for (double v : scenario.sweep->values) {
        std::vector<ParseError> errors;
        auto m = materialize(substitute(scenario.entries, scenario.sweep->param, v), scenario.line, o, errors);
        if (!errors.empty()) throw ConfigError(std::move(errors));
        RunSpec r = make(m.sim, m.verify);
        r.run_name = scenario.name + "__" + scenario.sweep->param + "=" + format_sweep_value(v);
        r.sweep_param = scenario.sweep->param;
        r.sweep_value = v;
        runs.push_back(std::move(r));
    }
    return runs;
}

std::vector<RunSpec> expand(const std::vector<Scenario>& scenarios) {
    std::vector<RunSpec> runs;
    for (const auto& sc : scenarios) {
        auto more = expand(sc);
        runs.insert(runs.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    }
    return runs;
}

std::optional<std::uint64_t> seed_from_environment() {
    const char* env = std::getenv("MMFLOW_SEED");
    if (env == nullptr || *env == '\0') return std::nullopt;
    std::uint64_t seed = 0;
    const std::string_view s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ValidationError("MMFLOW_SEED must be a non-negative integer, got '" + std::string(s) + "'");
    return seed;
}

}  // namespace mmflow
