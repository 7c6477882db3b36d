#include "wcascade/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "wcascade/cascade.hpp"
#include "wcascade/dwt.hpp"
#include "wcascade/empirics.hpp"
#include "wcascade/error.hpp"
#include "wcascade/io.hpp"
#include "wcascade/stats.hpp"
#include "wcascade/wtmm.hpp"

namespace wcascade {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::string input;
    std::string out;
    std::string format = "json";
    std::optional<std::uint64_t> seed;
    std::string q_range;
    std::string scale_range;
    std::string fit_range;
    std::string h_grid;
    std::optional<double> zero_tol;
    std::optional<double> bin_width;
    std::optional<std::size_t> min_count;
    std::optional<std::size_t> min_layer_size;
    std::optional<int> dt;
};

// Settings for the analysis commands, after config file and flags are merged.
struct Analysis {
    WtmmConfig wtmm;
    double zero_tol = 1e-6;
    VarianceOptions variances;
    std::size_t collapse_min_layer_size = 64;
    std::vector<double> h_grid = default_H_grid();
    int dt = 1;
};

std::vector<double> parse_numbers(const std::string& text, const std::string& flag,
                                  std::size_t count) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto pos = std::min(text.find(':', start), text.size());
        double v = 0.0;
        const char* first = text.data() + start;
        const char* last = text.data() + pos;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
            throw std::invalid_argument(flag + ": expected " + std::to_string(count) +
                                        " colon-separated numbers, got '" + text + "'");
        }
        out.push_back(v);
        start = pos + 1;
    }
    if (out.size() != count) {
        throw std::invalid_argument(flag + ": expected " + std::to_string(count) +
                                    " colon-separated numbers, got '" + text + "'");
    }
    return out;
}

std::vector<double> make_h_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi > lo)) {
        throw std::invalid_argument("--h-grid: need lo < hi and step > 0");
    }
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (n < 2 || n > 100000) throw std::invalid_argument("--h-grid: between 2 and 100000 points");
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = lo + step * static_cast<double>(i);
    return g;
}

json load_config(const Options& o) {
    if (o.config.empty()) return json::object();
    json j = read_json_file(o.config);
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    return j;
}

Analysis resolve_analysis(const Options& o) {
    const json cfg = load_config(o);
    Analysis a;
    if (cfg.contains("wtmm")) a.wtmm = wtmm_config_from_json(cfg.at("wtmm"));
    if (cfg.contains("analysis")) {
        const json& j = cfg.at("analysis");
        if (!j.is_object()) throw std::invalid_argument("config 'analysis' must be an object");
        auto get = [&](const char* key, auto& field) {
            if (!j.contains(key)) return;
            try {
                field = j.at(key).get<std::decay_t<decltype(field)>>();
            } catch (const json::exception&) {
                throw std::invalid_argument(std::string("config field '") + key +
                                            "' has the wrong type");
            }
        };
        get("zero_tol", a.zero_tol);
        get("bin_width", a.variances.bin_width);
        get("min_count", a.variances.min_count);
        get("min_layer_size", a.variances.min_layer_size);
        get("collapse_min_layer_size", a.collapse_min_layer_size);
        get("dt", a.dt);
        if (j.contains("h_grid")) {
            std::vector<double> g;
            get("h_grid", g);
            if (g.size() != 3) throw std::invalid_argument("config h_grid must be [lo, hi, step]");
            a.h_grid = make_h_grid(g[0], g[1], g[2]);
        }
    }

    if (!o.q_range.empty()) {
        const auto v = parse_numbers(o.q_range, "--q-range", 3);
        if (v[2] != std::floor(v[2])) throw std::invalid_argument("--q-range: count must be an integer");
        a.wtmm.q_min = v[0];
        a.wtmm.q_max = v[1];
        a.wtmm.q_count = static_cast<int>(v[2]);
    }
    if (!o.scale_range.empty()) {
        const auto v = parse_numbers(o.scale_range, "--scale-range", 2);
        a.wtmm.min_scale = v[0];
        a.wtmm.max_scale = v[1];
    }
    if (!o.fit_range.empty()) {
        const auto v = parse_numbers(o.fit_range, "--fit-range", 2);
        a.wtmm.fit_min = v[0];
        a.wtmm.fit_max = v[1];
    }
    if (!o.h_grid.empty()) {
        const auto v = parse_numbers(o.h_grid, "--h-grid", 3);
        a.h_grid = make_h_grid(v[0], v[1], v[2]);
    }
    if (o.zero_tol) a.zero_tol = *o.zero_tol;
    if (o.bin_width) a.variances.bin_width = *o.bin_width;
    if (o.min_count) a.variances.min_count = *o.min_count;
    if (o.min_layer_size) a.variances.min_layer_size = *o.min_layer_size;
    if (o.dt) a.dt = *o.dt;
    a.wtmm.validate();
    if (!(a.zero_tol >= 0.0)) throw std::invalid_argument("zero_tol must be >= 0");
    if (a.dt < 1) throw std::invalid_argument("dt must be >= 1");
    return a;
}

fs::path prepare_out_dir(const std::string& out) {
    if (out.empty()) throw std::invalid_argument("--out is required");
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw io_error("cannot create output directory " + out);
    return fs::path(out);
}

void print_warnings(std::ostream& err, const std::string& stage,
                    const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) err << "warning: " << stage << ": " << w << "\n";
}

// The most recent 2^J samples of a path file.
TimeSeries load_path(const std::string& input) {
    if (input.empty()) throw std::invalid_argument("--input is required");
    const auto v = read_series_csv(input);
    if (v.size() < 2) throw std::invalid_argument(input + ": need at least two samples");
    std::size_t n = 1;
    while (n * 2 <= v.size()) n *= 2;
    return TimeSeries(std::vector<double>(v.end() - static_cast<std::ptrdiff_t>(n), v.end()));
}

WaveletPyramid pyramid_of(const TimeSeries& ts) {
    return rescale(dwt_forward(ts, WaveletBasis::daubechies4()), RescaleDirection::to_rescaled);
}

// A pyramid JSON file, or a path CSV decomposed with the Daubechies-4 basis.
WaveletPyramid load_pyramid(const std::string& input) {
    if (input.empty()) throw std::invalid_argument("--input is required");
    if (fs::path(input).extension() == ".json") {
        WaveletPyramid p = pyramid_from_json(read_json_file(input));
        return p.rescaled ? p : rescale(p, RescaleDirection::to_rescaled);
    }
    return pyramid_of(load_path(input));
}

json fit_range_json(const WtmmResult& r) {
    return {{"fit_min", r.tau.fit_min},
            {"fit_max", r.tau.fit_max},
            {"scales_used", r.tau.scales_used},
            {"line_count", r.line_total}};
}

WtmmResult spectrum_stage(const TimeSeries& ts, const WtmmConfig& cfg, std::ostream& err) {
    WtmmResult r = run_wtmm(ts, cfg);
    err << "spectrum: fit range scales " << format_number(r.tau.fit_min) << " to "
        << format_number(r.tau.fit_max) << " (" << r.tau.scales_used << " scales, "
        << r.line_total << " maxima lines)\n";
    print_warnings(err, "spectrum", r.spectrum.warnings);
    return r;
}

json spectrum_document(const WtmmResult& r, const WtmmConfig& cfg, std::size_t length) {
    json j = to_json(r.spectrum);
    j["length"] = length;
    j["fit"] = fit_range_json(r);
    j["config"] = to_json(cfg);
    return j;
}

struct MultiplierReport {
    MultiplierSet set;
    CorrelationTable correlations;
    std::vector<FitResult> fits;
    std::vector<std::string> warnings;
};

MultiplierReport multiplier_stage(const WaveletPyramid& p, double zero_tol) {
    MultiplierReport r;
    r.set = extract_multipliers(p, zero_tol);
    r.correlations = multiplier_correlations(r.set, p);
    // Pool the ratios of every transition out of a layer with >= 256 parents.
    std::vector<double> pooled;
    for (const auto& t : r.set.transitions) {
        if (t.left.size() < 256) continue;
        for (std::size_t k = 0; k < t.left.size(); ++k) {
            if (t.masked[k]) continue;
            pooled.push_back(t.left[k]);
            pooled.push_back(t.right[k]);
        }
    }
    if (pooled.size() >= 100) {
        for (auto family : {DensityFamily::student_t2, DensityFamily::cauchy, DensityFamily::normal}) {
            try {
                r.fits.push_back(fit_density(family, pooled));
            } catch (const std::invalid_argument& e) {
                r.warnings.push_back(to_string(family) + " fit skipped: " + e.what());
            }
        }
    } else {
        r.warnings.push_back("too few ratios for density fits");
    }
    return r;
}

json multiplier_document(const MultiplierReport& r) {
    json transitions = json::array();
    for (const auto& t : r.set.transitions) {
        transitions.push_back({{"parent_layer", t.parent_layer},
                               {"parents", t.masked.size()},
                               {"unmasked", t.unmasked()}});
    }
    json fits = json::array();
    for (const auto& f : r.fits) fits.push_back(to_json(f));
    std::vector<std::string> warnings = r.set.warnings;
    warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
    return {{"zero_tol", r.set.zero_tol},
            {"transitions", transitions},
            {"ratio_fits", fits},
            {"correlations", to_json(r.correlations)},
            {"warnings", warnings}};
}

std::string fits_csv(const std::vector<FitResult>& fits) {
    std::string out = "family,location,scale,goodness\n";
    for (const auto& f : fits) {
        out += to_string(f.family) + "," + format_number(f.location) + "," +
               format_number(f.scale) + "," + format_number(f.goodness) + "\n";
    }
    return out;
}

bool use_csv(const Options& o) {
    if (o.format == "csv") return true;
    if (o.format == "json") return false;
    throw std::invalid_argument("--format must be json or csv");
}

// Runs a pipeline stage, prefixing any failure with the stage name while keeping the
// failure class (and so the exit code).
template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    const std::string prefix = std::string("stage ") + name + ": ";
    try {
        return f();
    } catch (const io_error& e) {
        throw io_error(prefix + e.what());
    } catch (const analysis_error& e) {
        throw analysis_error(prefix + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(prefix + e.what());
    }
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
    const json cfg = load_config(o);
    CascadeSpec spec = cascade_spec_from_json(cfg.contains("cascade") ? cfg.at("cascade") : cfg);
    if (o.seed) spec.seed = *o.seed;
    const fs::path dir = prepare_out_dir(o.out);
    const WaveletPyramid p = synthesize(spec);
    const TimeSeries path = dwt_inverse(p, WaveletBasis::daubechies4());
    write_json_file(dir / "spec.json", to_json(spec));
    write_json_file(dir / "pyramid.json", to_json(p));
    write_text_file(dir / "path.csv", series_csv(path.values()));
    (void)err;
    out << "simulate: depth " << spec.depth << ", " << path.size() << " samples written to "
        << dir.string() << "\n";
    return exit_ok;
}

int cmd_spectrum(const Options& o, std::ostream& out, std::ostream& err) {
    const bool csv = use_csv(o);
    const Analysis a = resolve_analysis(o);
    const TimeSeries ts = load_path(o.input);
    const fs::path dir = prepare_out_dir(o.out);
    const WtmmResult r = spectrum_stage(ts, a.wtmm, err);
    if (csv) {
        write_text_file(dir / "tau.csv", tau_csv(r.spectrum));
        write_text_file(dir / "spectrum.csv", alpha_csv(r.spectrum));
    } else {
        write_json_file(dir / "spectrum.json", spectrum_document(r, a.wtmm, ts.size()));
    }
    out << "spectrum: peak_alpha " << format_fixed(r.spectrum.peak_alpha, 4) << ", support ["
        << format_fixed(r.spectrum.support_min, 4) << ", "
        << format_fixed(r.spectrum.support_max, 4) << "]\n";
    return exit_ok;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream&) {
    if (o.input.empty()) throw std::invalid_argument("--input is required");
    const SingularSpectrum s = spectrum_from_json(read_json_file(o.input));
    const std::size_t n = s.q.size();
    if (n < 3) throw std::invalid_argument("spectrum needs at least three q values");

    // Forward: D = q alpha - tau with alpha the discrete derivative of tau.
    double forward = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
        const double slope = (s.tau[hi] - s.tau[lo]) / (s.q[hi] - s.q[lo]);
        forward = std::max(forward, std::abs(slope - s.alpha[i]));
        forward = std::max(forward, std::abs(s.q[i] * s.alpha[i] - s.tau[i] - s.D[i]));
    }
    // Inverse: tau(q) = min over alpha of (q alpha - D(alpha)), exact for a concave
    // polyline; allow three standard errors where tau was kept as estimated.
    double inverse_excess = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double m = s.q[i] * s.alpha[0] - s.D[0];
        for (std::size_t k = 1; k < n; ++k) m = std::min(m, s.q[i] * s.alpha[k] - s.D[k]);
        const double allowance = 1e-9 + (s.concave ? 3.0 * s.tau_stderr[i] : 0.0);
        inverse_excess = std::max(inverse_excess, std::abs(m - s.tau[i]) - allowance);
    }
    const bool pass = forward <= 1e-9 && inverse_excess <= 0.0;
    out << "verify: Legendre duality " << (pass ? "pass" : "FAIL") << " (forward error "
        << format_number(forward) << ")\n";
    if (!pass) throw analysis_error("spectrum file fails the Legendre duality check");
    return exit_ok;
}

int cmd_multipliers(const Options& o, std::ostream& out, std::ostream& err) {
    const bool csv = use_csv(o);
    const Analysis a = resolve_analysis(o);
    const WaveletPyramid p = load_pyramid(o.input);
    const fs::path dir = prepare_out_dir(o.out);
    const MultiplierReport r = multiplier_stage(p, a.zero_tol);
    print_warnings(err, "multipliers", r.set.warnings);
    print_warnings(err, "multipliers", r.correlations.warnings);
    print_warnings(err, "multipliers", r.warnings);
    if (csv) {
        write_text_file(dir / "correlations.csv", correlations_csv(r.correlations));
        write_text_file(dir / "ratio_fits.csv", fits_csv(r.fits));
    } else {
        write_json_file(dir / "multipliers.json", multiplier_document(r));
    }
    out << "multipliers: " << r.set.transitions.size() << " transitions, "
        << r.correlations.rows.size() << " correlation rows\n";
    return exit_ok;
}

int cmd_variances(const Options& o, std::ostream& out, std::ostream& err) {
    const bool csv = use_csv(o);
    const Analysis a = resolve_analysis(o);
    const WaveletPyramid p = load_pyramid(o.input);
    const fs::path dir = prepare_out_dir(o.out);
    const VarianceEstimate v = estimate_variances(p, a.variances);
    print_warnings(err, "variances", v.warnings);
    if (csv) {
        write_text_file(dir / "variances.csv", variances_csv(v));
    } else {
        write_json_file(dir / "variances.json", to_json(v));
    }
    out << "variances: " << v.rows.size() << " fitted rows\n";
    return exit_ok;
}

int cmd_collapse(const Options& o, std::ostream& out, std::ostream& err) {
    const bool csv = use_csv(o);
    const Analysis a = resolve_analysis(o);
    const WaveletPyramid p = load_pyramid(o.input);
    const fs::path dir = prepare_out_dir(o.out);
    const CollapseResult c = collapse_H(p, a.h_grid, a.collapse_min_layer_size);
    print_warnings(err, "collapse", c.warnings);
    if (csv) {
        write_text_file(dir / "collapse.csv", collapse_csv(c));
    } else {
        write_json_file(dir / "collapse.json", to_json(c));
    }
    out << "collapse: H " << format_fixed(c.H, 2) << "\n";
    return exit_ok;
}

int cmd_ingest(const Options& o, std::ostream& out, std::ostream& err) {
    const Analysis a = resolve_analysis(o);
    if (o.input.empty()) throw std::invalid_argument("--input is required");
    const ReturnPanel panel = read_panel_csv(o.input);
    const fs::path dir = prepare_out_dir(o.out);
    const DeseasonalizedReturns d = deseasonalize_returns(panel, a.dt);
    print_warnings(err, "ingest", d.warnings);
    const TimeSeries path = accumulate_path(d.values);
    write_text_file(dir / "deltas.csv", series_csv(d.values));
    write_text_file(dir / "path.csv", series_csv(path.values()));
    out << "ingest: " << d.values.size() << " returns, path length " << path.size() << "\n";
    return exit_ok;
}

int cmd_pipeline(const Options& o, std::ostream& out, std::ostream& err) {
    const Analysis a = stage("config", [&] { return resolve_analysis(o); });
    const ReturnPanel panel = stage("ingest", [&] {
        if (o.input.empty()) throw std::invalid_argument("--input is required");
        return read_panel_csv(o.input);
    });
    const fs::path dir = stage("output", [&] { return prepare_out_dir(o.out); });
    const DeseasonalizedReturns d =
        stage("deseasonalize", [&] { return deseasonalize_returns(panel, a.dt); });
    print_warnings(err, "deseasonalize", d.warnings);
    const TimeSeries path = stage("path", [&] { return accumulate_path(d.values); });
    const WaveletPyramid p = stage("dwt", [&] { return pyramid_of(path); });
    const WtmmResult w = stage("spectrum", [&] { return spectrum_stage(path, a.wtmm, err); });
    const MultiplierReport m = stage("multipliers", [&] { return multiplier_stage(p, a.zero_tol); });
    print_warnings(err, "multipliers", m.correlations.warnings);
    const VarianceEstimate v = stage("variances", [&] { return estimate_variances(p, a.variances); });
    print_warnings(err, "variances", v.warnings);
    const CollapseResult c =
        stage("collapse", [&] { return collapse_H(p, a.h_grid, a.collapse_min_layer_size); });
    print_warnings(err, "collapse", c.warnings);

    stage("write", [&] {
        write_text_file(dir / "deltas.csv", series_csv(d.values));
        write_text_file(dir / "path.csv", series_csv(path.values()));
        write_json_file(dir / "pyramid.json", to_json(p));
        write_json_file(dir / "spectrum.json", spectrum_document(w, a.wtmm, path.size()));
        write_text_file(dir / "tau.csv", tau_csv(w.spectrum));
        write_text_file(dir / "spectrum.csv", alpha_csv(w.spectrum));
        write_json_file(dir / "multipliers.json", multiplier_document(m));
        write_text_file(dir / "correlations.csv", correlations_csv(m.correlations));
        write_json_file(dir / "variances.json", to_json(v));
        write_text_file(dir / "variances.csv", variances_csv(v));
        write_json_file(dir / "collapse.json", to_json(c));
        write_text_file(dir / "collapse.csv", collapse_csv(c));
        json summary = {{"issues", panel.issues},
                        {"days", panel.day_starts.size()},
                        {"returns", d.values.size()},
                        {"path_length", path.size()},
                        {"dt", a.dt},
                        {"peak_alpha", w.spectrum.peak_alpha},
                        {"support", {w.spectrum.support_min, w.spectrum.support_max}},
                        {"collapse_H", c.H},
                        {"variance_rows", v.rows.size()},
                        {"deseasonalize_warnings", d.warnings}};
        write_json_file(dir / "summary.json", summary);
        return 0;
    });
    out << "pipeline: report written to " << dir.string() << "\n";
    return exit_ok;
}

void add_common(CLI::App* sub, Options& o, bool analysis) {
    sub->add_option("--config", o.config, "JSON config file");
    sub->add_option("--out", o.out, "Output directory (created if missing)")->required();
    if (!analysis) return;
    sub->add_option("--input", o.input, "Input file")->required();
}

void add_format(CLI::App* sub, Options& o) {
    sub->add_option("--format", o.format, "Output format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
}

void add_wtmm(CLI::App* sub, Options& o) {
    sub->add_option("--q-range", o.q_range, "q grid as min:max:count (default -5:5:41)");
    sub->add_option("--scale-range", o.scale_range,
                    "CWT scales as min:max in samples (default 4:L/8; max 0 = L/8)");
    sub->add_option("--fit-range", o.fit_range,
                    "tau fit scales as min:max (default 8:min(1024,L/128); max 0 = auto)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Wavelet cascade simulation and multifractal analysis", "wcascade"};
    app.require_subcommand(1);
    Options o;

    auto* simulate = app.add_subcommand(
        "simulate", "Synthesize a cascade pyramid and its reconstructed path (pyramid.json, path.csv)");
    add_common(simulate, o, false);
    simulate->add_option("--seed", o.seed, "Override the config seed (u64)");
    simulate->footer(
        "Config: a cascade spec object (top level or under \"cascade\"): depth (10), seed (0), "
        "root_detail (1), root_approx (0), multiplier {law: lognormal (mean_log, var_log | "
        "mean_log2, var_log2), point_mass (value), cauchy (scale); random_sign (true)}, "
        "additive {law: zero | normal (variance | std)}.");

    auto* spectrum = app.add_subcommand(
        "spectrum", "WTMM tau(q) and D(alpha) of a path CSV (spectrum.json or tau.csv + spectrum.csv)");
    add_common(spectrum, o, true);
    add_format(spectrum, o);
    add_wtmm(spectrum, o);

    auto* verify = app.add_subcommand("verify", "Check Legendre duality of a spectrum.json file");
    verify->add_option("--input", o.input, "spectrum.json")->required();

    auto* multipliers = app.add_subcommand(
        "multipliers", "Backward multipliers, correlation tables and ratio fits");
    add_common(multipliers, o, true);
    add_format(multipliers, o);
    multipliers->add_option("--zero-tol", o.zero_tol, "Mask parents below zero_tol * h_j (1e-6)");

    auto* variances = app.add_subcommand("variances", "Conditional variance decomposition table");
    add_common(variances, o, true);
    add_format(variances, o);
    variances->add_option("--bin-width", o.bin_width, "Bin width in units of h_j (0.2)");
    variances->add_option("--min-count", o.min_count, "Minimum samples per bin (100)");
    variances->add_option("--min-layer-size", o.min_layer_size, "Minimum parent layer size (256)");

    auto* collapse = app.add_subcommand("collapse", "PDF-collapse estimate of H");
    add_common(collapse, o, true);
    add_format(collapse, o);
    collapse->add_option("--h-grid", o.h_grid, "H grid as lo:hi:step (default 0:1:0.01)");

    auto* ingest = app.add_subcommand(
        "ingest", "Deseasonalize a price panel CSV into deltas.csv and path.csv");
    add_common(ingest, o, true);
    ingest->add_option("--dt", o.dt, "Return lag in rows (1)");

    auto* pipeline = app.add_subcommand(
        "pipeline", "Panel CSV to full report: path, pyramid, spectrum, multipliers, variances, collapse");
    add_common(pipeline, o, true);
    pipeline->add_option("--dt", o.dt, "Return lag in rows (1)");
    add_wtmm(pipeline, o);
    pipeline->add_option("--h-grid", o.h_grid, "H grid as lo:hi:step (default 0:1:0.01)");
    pipeline->add_option("--zero-tol", o.zero_tol, "Mask parents below zero_tol * h_j (1e-6)");
    pipeline->footer(
        "Report files: summary.json deltas.csv path.csv pyramid.json spectrum.json tau.csv "
        "spectrum.csv multipliers.json correlations.csv variances.json variances.csv "
        "collapse.json collapse.csv");

    auto* reference = app.add_subcommand("reference", "Print the help of every command as one page");

    for (auto* sub : {spectrum, multipliers, variances, collapse, ingest, pipeline}) {
        sub->footer(std::string(sub->get_footer().empty() ? "" : sub->get_footer() + "\n") +
                    "Config sections: \"wtmm\" {wavelet_order 2, voices_per_octave 8, min_scale 4, "
                    "max_scale 0, q_min -5, q_max 5, q_count 41, fit_min 8, fit_max 0, detrend true, "
                    "relative_floor 1e-8, link_radius_factor 8}; \"analysis\" {zero_tol 1e-6, "
                    "bin_width 0.2, min_count 100, min_layer_size 256, collapse_min_layer_size 64, "
                    "h_grid [0, 1, 0.01], dt 1}. Flags override the file.");
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_invalid_input;
    }

    try {
        if (*simulate) return cmd_simulate(o, out, err);
        if (*spectrum) return cmd_spectrum(o, out, err);
        if (*verify) return cmd_verify(o, out, err);
        if (*multipliers) return cmd_multipliers(o, out, err);
        if (*variances) return cmd_variances(o, out, err);
        if (*collapse) return cmd_collapse(o, out, err);
        if (*ingest) return cmd_ingest(o, out, err);
        if (*pipeline) return cmd_pipeline(o, out, err);
        if (*reference) {
            // App::help() would describe the selected subcommand, so format the root directly
            out << "# wcascade command reference\n\n```\n"
                << app.get_formatter()->make_help(&app, app.get_name(), CLI::AppFormatMode::Normal)
                << "```\n";
            for (auto* sub : app.get_subcommands([](CLI::App*) { return true; })) {
                if (sub == reference) continue;
                out << "\n## " << sub->get_name() << "\n\n```\n" << sub->help() << "```\n";
            }
            return exit_ok;
        }
    } catch (const io_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const analysis_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_analysis;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return exit_invalid_input;
    } catch (const std::out_of_range& e) {
        err << "error: " << e.what() << "\n";
        return exit_invalid_input;
    }
    return exit_invalid_input;
}

}  // namespace wcascade
