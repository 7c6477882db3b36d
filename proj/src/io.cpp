#include "wcascade/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "wcascade/error.hpp"

namespace wcascade {

namespace {

const char* side_name(Side s) { return s == Side::left ? "l" : "r"; }

// Missing keys keep the caller's default; present keys must have the right type.
template <typename T>
void read_field(const json& j, const char* key, T& out) {
    auto it = j.find(key);
    if (it == j.end()) return;
    try {
        out = it->template get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument(std::string("config field '") + key + "' has the wrong type");
    }
}

template <typename T>
T require_field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw std::invalid_argument(std::string("missing field '") + key + "'");
    }
    T out{};
    read_field(j, key, out);
    return out;
}

// Non-finite numbers are stored as strings so that the file stays valid JSON.
json number(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

json numbers(std::span<const double> v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

double as_number(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw std::invalid_argument("expected a number");
}

std::vector<double> number_array(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_array()) {
        throw std::invalid_argument(std::string("missing array '") + key + "'");
    }
    std::vector<double> out;
    for (const auto& x : j.at(key)) out.push_back(as_number(x));
    return out;
}

json strings(const std::vector<std::string>& v) { return json(v); }

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::vector<std::string_view> lines_of(const std::string& text) {
    std::vector<std::string_view> out;
    for (auto line : split(text, '\n')) {
        line = trim(line);
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

json to_json(const CascadeSpec& spec) {
    json m;
    const auto& law = spec.multiplier_law;
    switch (law.kind) {
        case MultiplierLaw::Kind::lognormal:
            m = {{"law", "lognormal"}, {"mean_log", law.mean_log}, {"var_log", law.var_log},
                 {"random_sign", law.random_sign}};
            break;
        case MultiplierLaw::Kind::point_mass:
            m = {{"law", "point_mass"}, {"value", law.value}, {"random_sign", law.random_sign}};
            break;
        case MultiplierLaw::Kind::cauchy:
            m = {{"law", "cauchy"}, {"scale", law.scale}};
            break;
    }
    json a;
    if (spec.additive_law.kind == AdditiveLaw::Kind::zero) {
        a = {{"law", "zero"}};
    } else {
        a = {{"law", "normal"}, {"variance", spec.additive_law.variance}};
    }
    return {{"depth", spec.depth},
            {"seed", spec.seed},
            {"root_detail", spec.root_detail},
            {"root_approx", spec.root_approx},
            {"multiplier", m},
            {"additive", a}};
}

CascadeSpec cascade_spec_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("cascade spec must be a JSON object");
    CascadeSpec spec;
    read_field(j, "depth", spec.depth);
    read_field(j, "seed", spec.seed);
    read_field(j, "root_detail", spec.root_detail);
    read_field(j, "root_approx", spec.root_approx);

    if (j.contains("multiplier")) {
        const json& m = j.at("multiplier");
        const auto law = require_field<std::string>(m, "law");
        bool random_sign = true;
        read_field(m, "random_sign", random_sign);
        if (law == "lognormal") {
            // Either natural-log parameters or multiples of ln 2.
            if (m.contains("mean_log2") || m.contains("var_log2")) {
                spec.multiplier_law = MultiplierLaw::lognormal_log2_units(
                    require_field<double>(m, "mean_log2"), require_field<double>(m, "var_log2"),
                    random_sign);
            } else {
                spec.multiplier_law = MultiplierLaw::lognormal(
                    require_field<double>(m, "mean_log"), require_field<double>(m, "var_log"),
                    random_sign);
            }
        } else if (law == "point_mass") {
            spec.multiplier_law =
                MultiplierLaw::point_mass(require_field<double>(m, "value"), random_sign);
        } else if (law == "cauchy") {
            spec.multiplier_law = MultiplierLaw::cauchy(require_field<double>(m, "scale"));
        } else {
            throw std::invalid_argument("unknown multiplier law '" + law + "'");
        }
    }
    if (j.contains("additive")) {
        const json& a = j.at("additive");
        const auto law = require_field<std::string>(a, "law");
        if (law == "zero") {
            spec.additive_law = AdditiveLaw::zero();
        } else if (law == "normal") {
            double variance = 0.0;
            if (a.contains("std")) {
                const double sd = require_field<double>(a, "std");
                variance = sd * sd;
            } else {
                variance = require_field<double>(a, "variance");
            }
            spec.additive_law = AdditiveLaw::normal(variance);
        } else {
            throw std::invalid_argument("unknown additive law '" + law + "'");
        }
    }
    spec.validate();
    return spec;
}

json to_json(const WtmmConfig& c) {
    return {{"wavelet_order", c.wavelet_order},
            {"voices_per_octave", c.voices_per_octave},
            {"min_scale", c.min_scale},
            {"max_scale", c.max_scale},
            {"q_min", c.q_min},
            {"q_max", c.q_max},
            {"q_count", c.q_count},
            {"fit_min", c.fit_min},
            {"fit_max", c.fit_max},
            {"detrend", c.detrend},
            {"relative_floor", c.relative_floor},
            {"link_radius_factor", c.link_radius_factor}};
}

WtmmConfig wtmm_config_from_json(const json& j, WtmmConfig c) {
    if (!j.is_object()) throw std::invalid_argument("wtmm config must be a JSON object");
    read_field(j, "wavelet_order", c.wavelet_order);
    read_field(j, "voices_per_octave", c.voices_per_octave);
    read_field(j, "min_scale", c.min_scale);
    read_field(j, "max_scale", c.max_scale);
    read_field(j, "q_min", c.q_min);
    read_field(j, "q_max", c.q_max);
    read_field(j, "q_count", c.q_count);
    read_field(j, "fit_min", c.fit_min);
    read_field(j, "fit_max", c.fit_max);
    read_field(j, "detrend", c.detrend);
    read_field(j, "relative_floor", c.relative_floor);
    read_field(j, "link_radius_factor", c.link_radius_factor);
    c.validate();
    return c;
}

json to_json(const WaveletPyramid& p) {
    json layers = json::array();
    for (const auto& l : p.layers) layers.push_back(numbers(l));
    return {{"depth", p.depth},
            {"rescaled", p.rescaled},
            {"root_approx", number(p.root_approx)},
            {"root_detail", number(p.root_detail)},
            {"layers", layers}};
}

WaveletPyramid pyramid_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("pyramid must be a JSON object");
    WaveletPyramid p;
    p.depth = require_field<int>(j, "depth");
    p.rescaled = require_field<bool>(j, "rescaled");
    if (!j.contains("root_approx") || !j.contains("root_detail")) {
        throw std::invalid_argument("pyramid: missing root coefficients");
    }
    p.root_approx = as_number(j.at("root_approx"));
    p.root_detail = as_number(j.at("root_detail"));
    if (!j.contains("layers") || !j.at("layers").is_array()) {
        throw std::invalid_argument("pyramid: missing layers");
    }
    for (const auto& l : j.at("layers")) {
        if (!l.is_array()) throw std::invalid_argument("pyramid: layer must be an array");
        std::vector<double> v;
        v.reserve(l.size());
        for (const auto& x : l) v.push_back(as_number(x));
        p.layers.push_back(std::move(v));
    }
    if (p.depth < 1) throw std::invalid_argument("pyramid: depth must be >= 1");
    p.validate();
    return p;
}

json to_json(const SingularSpectrum& s) {
    return {{"q", numbers(s.q)},
            {"tau", numbers(s.tau)},
            {"tau_stderr", numbers(s.tau_stderr)},
            {"alpha", numbers(s.alpha)},
            {"D", numbers(s.D)},
            {"support_min", number(s.support_min)},
            {"support_max", number(s.support_max)},
            {"peak_alpha", number(s.peak_alpha)},
            {"concave", s.concave},
            {"warnings", strings(s.warnings)}};
}

SingularSpectrum spectrum_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("spectrum must be a JSON object");
    SingularSpectrum s;
    s.q = number_array(j, "q");
    s.tau = number_array(j, "tau");
    s.tau_stderr = number_array(j, "tau_stderr");
    s.alpha = number_array(j, "alpha");
    s.D = number_array(j, "D");
    const std::size_t n = s.q.size();
    if (n == 0 || s.tau.size() != n || s.tau_stderr.size() != n || s.alpha.size() != n ||
        s.D.size() != n) {
        throw std::invalid_argument("spectrum: arrays must be non-empty and aligned");
    }
    for (const char* key : {"support_min", "support_max", "peak_alpha"}) {
        if (!j.contains(key)) throw std::invalid_argument(std::string("spectrum: missing ") + key);
    }
    s.support_min = as_number(j.at("support_min"));
    s.support_max = as_number(j.at("support_max"));
    s.peak_alpha = as_number(j.at("peak_alpha"));
    read_field(j, "concave", s.concave);
    read_field(j, "warnings", s.warnings);
    return s;
}

json to_json(const FitResult& f) {
    return {{"family", to_string(f.family)},
            {"location", number(f.location)},
            {"scale", number(f.scale)},
            {"goodness", number(f.goodness)}};
}

json to_json(const RegressionResult& r) {
    return {{"a", number(r.slope)},
            {"b", number(r.intercept)},
            {"std_a", number(r.stderr_slope)},
            {"std_b", number(r.stderr_intercept)},
            {"r2", number(r.r2)},
            {"adj_r2", number(r.adj_r2)},
            {"n", r.n}};
}

json to_json(const CorrelationTable& t) {
    json rows = json::array();
    for (const auto& r : t.rows) {
        rows.push_back({{"layer", r.layer},
                        {"successive_pairs", r.successive_pairs},
                        {"successive_r", r.successive_valid ? number(r.successive_r) : json()},
                        {"parent_pairs", r.parent_pairs},
                        {"parent_r", r.parent_valid ? number(r.parent_r) : json()}});
    }
    return {{"transform", "log_abs"}, {"rows", rows}, {"warnings", strings(t.warnings)}};
}

json to_json(const VarianceEstimate& e) {
    json rows = json::array();
    for (const auto& r : e.rows) {
        json bins = json::array();
        for (const auto& b : r.bins.all_bins) {
            bins.push_back({{"center", number(b.center)},
                            {"count", b.count},
                            {"variance", number(b.variance)},
                            {"included", b.included}});
        }
        rows.push_back({{"scale", r.parent_layer},
                        {"side", side_name(r.side)},
                        {"fit", to_json(r.fit)},
                        {"var_w", number(r.var_w)},
                        {"var_eta", number(r.var_eta)},
                        {"clamped", r.clamped},
                        {"h_parent", number(r.h_parent)},
                        {"h_child", number(r.h_child)},
                        {"layer_ratio", number(r.layer_ratio)},
                        {"identity_residual", number(r.identity_residual)},
                        {"bins", bins}});
    }
    return {{"rows", rows}, {"warnings", strings(e.warnings)}};
}

json to_json(const CollapseResult& c) {
    return {{"H", number(c.H)},
            {"distance", number(c.distance)},
            {"at_boundary", c.at_boundary},
            {"layers_used", c.layers_used},
            {"H_grid", numbers(c.H_grid)},
            {"curve", numbers(c.curve)},
            {"warnings", strings(c.warnings)}};
}

std::string series_csv(std::span<const double> values) {
    std::string out = "index,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        out += std::to_string(i) + "," + format_number(values[i]) + "\n";
    }
    return out;
}

std::string tau_csv(const SingularSpectrum& s) {
    std::string out = "q,tau,tau_stderr\n";
    for (std::size_t i = 0; i < s.q.size(); ++i) {
        out += format_number(s.q[i]) + "," + format_number(s.tau[i]) + "," +
               format_number(s.tau_stderr[i]) + "\n";
    }
    return out;
}

std::string alpha_csv(const SingularSpectrum& s) {
    std::string out = "q,alpha,D\n";
    for (std::size_t i = 0; i < s.q.size(); ++i) {
        out += format_number(s.q[i]) + "," + format_number(s.alpha[i]) + "," +
               format_number(s.D[i]) + "\n";
    }
    return out;
}

std::string correlations_csv(const CorrelationTable& t) {
    std::string out = "layer,successive_pairs,successive_r,parent_pairs,parent_r\n";
    for (const auto& r : t.rows) {
        out += std::to_string(r.layer) + "," + std::to_string(r.successive_pairs) + "," +
               (r.successive_valid ? format_number(r.successive_r) : "") + "," +
               std::to_string(r.parent_pairs) + "," +
               (r.parent_valid ? format_number(r.parent_r) : "") + "\n";
    }
    return out;
}

std::string variances_csv(const VarianceEstimate& e) {
    std::string out = "Scale,side,a,b,Std a,Std b,Adj R2,Var(W),Var(eta),S,residual\n";
    for (const auto& r : e.rows) {
        out += std::to_string(r.parent_layer) + "," + side_name(r.side) + "," +
               format_number(r.fit.slope) + "," + format_number(r.fit.intercept) + "," +
               format_number(r.fit.stderr_slope) + "," + format_number(r.fit.stderr_intercept) +
               "," + format_number(r.fit.adj_r2) + "," + format_number(r.var_w) + "," +
               format_number(r.var_eta) + "," + format_number(r.layer_ratio) + "," +
               format_number(r.identity_residual) + "\n";
    }
    return out;
}

std::string collapse_csv(const CollapseResult& c) {
    std::string out = "H,distance\n";
    for (std::size_t i = 0; i < c.H_grid.size(); ++i) {
        out += format_number(c.H_grid[i]) + "," + format_number(c.curve[i]) + "\n";
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw io_error("error reading " + path.string());
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw io_error("error writing " + path.string());
}

json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path.string() + ": invalid JSON (" + e.what() + ")");
    }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

std::vector<double> parse_series_csv(const std::string& text) {
    std::vector<double> out;
    const auto lines = lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto fields = split(lines[i], ',');
        double v = 0.0;
        if (!parse_double(fields.back(), v)) {
            if (i == 0) continue;  // header
            throw std::invalid_argument("series CSV line " + std::to_string(i + 1) +
                                        ": not a number");
        }
        if (!std::isfinite(v)) {
            throw std::invalid_argument("series CSV line " + std::to_string(i + 1) +
                                        ": non-finite value");
        }
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("series CSV contains no values");
    return out;
}

std::vector<double> read_series_csv(const std::filesystem::path& path) {
    return parse_series_csv(read_text_file(path));
}

ReturnPanel parse_panel_csv(const std::string& text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw std::invalid_argument("panel CSV is empty");
    const auto header = split(lines[0], ',');
    if (header.size() < 2 || trim(header[0]) != "timestamp") {
        throw std::invalid_argument("panel CSV header must be timestamp,ISSUE1,...");
    }
    ReturnPanel panel;
    for (std::size_t c = 1; c < header.size(); ++c) {
        panel.issues.emplace_back(trim(header[c]));
        if (panel.issues.back().empty()) throw std::invalid_argument("panel CSV: empty issue name");
    }
    panel.prices.assign(panel.issues.size(), {});

    std::string previous_date;
    int previous_minute = -1;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string where = "panel CSV line " + std::to_string(i + 1) + ": ";
        const auto fields = split(lines[i], ',');
        if (fields.size() != header.size()) throw std::invalid_argument(where + "wrong field count");
        const auto ts = trim(fields[0]);
        // YYYY-MM-DDTHH:MM[...]
        if (ts.size() < 16 || ts[4] != '-' || ts[7] != '-' || (ts[10] != 'T' && ts[10] != ' ') ||
            ts[13] != ':' || !all_digits(ts.substr(0, 4)) || !all_digits(ts.substr(5, 2)) ||
            !all_digits(ts.substr(8, 2)) || !all_digits(ts.substr(11, 2)) ||
            !all_digits(ts.substr(14, 2))) {
            throw std::invalid_argument(where + "timestamp is not ISO-8601");
        }
        const int hh = (ts[11] - '0') * 10 + (ts[12] - '0');
        const int mm = (ts[14] - '0') * 10 + (ts[15] - '0');
        if (hh > 23 || mm > 59) throw std::invalid_argument(where + "invalid time of day");
        const std::string date(ts.substr(0, 10));
        const int minute = hh * 60 + mm;
        const std::size_t row = panel.minute_of_day.size();
        if (date != previous_date) {
            if (!previous_date.empty() && date < previous_date) {
                throw std::invalid_argument(where + "dates must be non-decreasing");
            }
            panel.day_starts.push_back(row);
        } else if (minute <= previous_minute) {
            throw std::invalid_argument(where + "timestamps must increase within a day");
        }
        previous_date = date;
        previous_minute = minute;
        panel.timestamps.emplace_back(ts);
        panel.minute_of_day.push_back(minute);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            double v = 0.0;
            if (!parse_double(fields[c], v)) throw std::invalid_argument(where + "price is not a number");
            panel.prices[c - 1].push_back(v);
        }
    }
    panel.validate();
    return panel;
}

ReturnPanel read_panel_csv(const std::filesystem::path& path) {
    return parse_panel_csv(read_text_file(path));
}

std::string panel_csv(const ReturnPanel& panel) {
    panel.validate();
    if (panel.timestamps.size() != panel.rows()) {
        throw std::invalid_argument("panel_csv: panel has no timestamps");
    }
    std::string out = "timestamp";
    for (const auto& name : panel.issues) out += "," + name;
    out += "\n";
    for (std::size_t t = 0; t < panel.rows(); ++t) {
        out += panel.timestamps[t];
        for (const auto& col : panel.prices) out += "," + format_number(col[t]);
        out += "\n";
    }
    return out;
}

}  // namespace wcascade
