#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "wcascade/cascade.hpp"
#include "wcascade/cli.hpp"
#include "wcascade/io.hpp"

using namespace wcascade;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path tmp(const std::string& name) {
    const char* base = std::getenv("WCASCADE_TEST_TMP");
    const fs::path root = base ? fs::path(base) : fs::temp_directory_path() / "wcascade_cli_test";
    const fs::path dir = root / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::set<std::string> listing(const fs::path& dir) {
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
    return names;
}

// One-issue panel whose intraday log-price follows the given increments, per_day
// returns (per_day + 1 rows) per day.
std::string panel_from_path(const std::vector<double>& increments, std::size_t per_day) {
    std::ostringstream csv;
    csv << "timestamp,XYZ\n";
    const std::size_t days = increments.size() / per_day;
    for (std::size_t d = 0; d < days; ++d) {
        double logp = std::log(50.0);
        const int day = 1 + static_cast<int>(d % 28);
        const int month = 1 + static_cast<int>(d / 28) % 12;
        const int year = 2000 + static_cast<int>(d / (28 * 12));
        for (std::size_t m = 0; m <= per_day; ++m) {
            if (m > 0) logp += increments[d * per_day + m - 1];
            char stamp[32];
            std::snprintf(stamp, sizeof stamp, "%04d-%02d-%02dT%02d:%02d", year, month, day,
                          static_cast<int>((480 + m) / 60), static_cast<int>((480 + m) % 60));
            csv << stamp << "," << format_number(std::exp(logp)) << "\n";
        }
    }
    return csv.str();
}

}  // namespace

TEST_CASE("help, unknown commands and the reference page") {
    CHECK(run({"--help"}).code == exit_ok);
    CHECK(run({}).code == exit_invalid_input);
    CHECK(run({"transmogrify"}).code == exit_invalid_input);
    CHECK(run({"simulate"}).code == exit_invalid_input);
    const auto ref = run({"reference"});
    CHECK(ref.code == exit_ok);
    // the page opens with the top-level help, not the reference command's own
    CHECK(ref.out.find("Subcommands:") < ref.out.find("## simulate"));
    for (const char* cmd : {"simulate", "spectrum", "verify", "multipliers", "variances", "collapse",
                            "ingest", "pipeline"}) {
        CHECK(ref.out.find(std::string("## ") + cmd) != std::string::npos);
    }
}

TEST_CASE("simulate is deterministic and honours the seed") {
    const auto dir = tmp("simulate");
    write_text_file(dir / "cfg.json", R"({"cascade": {"depth": 12, "seed": 7,
        "multiplier": {"law": "lognormal", "mean_log2": -0.33, "var_log2": 0.02},
        "additive": {"law": "normal", "std": 0.3}}})");
    const auto a = run({"simulate", "--config", (dir / "cfg.json").string(), "--out", (dir / "a").string()});
    const auto b = run({"simulate", "--config", (dir / "cfg.json").string(), "--out", (dir / "b").string()});
    REQUIRE(a.code == exit_ok);
    REQUIRE(b.code == exit_ok);
    CHECK(listing(dir / "a") == std::set<std::string>{"spec.json", "pyramid.json", "path.csv"});
    for (const char* f : {"spec.json", "pyramid.json", "path.csv"}) {
        CHECK(read_text_file(dir / "a" / f) == read_text_file(dir / "b" / f));
    }
    const auto p = pyramid_from_json(read_json_file(dir / "a" / "pyramid.json"));
    CascadeSpec s = cascade_spec_from_json(read_json_file(dir / "a" / "spec.json"));
    CHECK(s.seed == 7);
    const auto direct = synthesize(s);
    CHECK(p.layer(11)[123] == direct.layer(11)[123]);
    CHECK(read_series_csv(dir / "a" / "path.csv").size() == 4096);

    const auto c = run({"simulate", "--config", (dir / "cfg.json").string(), "--seed", "8", "--out",
                        (dir / "c").string()});
    REQUIRE(c.code == exit_ok);
    CHECK(read_text_file(dir / "a" / "path.csv") != read_text_file(dir / "c" / "path.csv"));
    CHECK(cascade_spec_from_json(read_json_file(dir / "c" / "spec.json")).seed == 8);
}

TEST_CASE("exit codes for bad input and missing files") {
    const auto dir = tmp("errors");
    write_text_file(dir / "depth0.json", R"({"depth": 0})");
    auto r = run({"simulate", "--config", (dir / "depth0.json").string(), "--out", (dir / "o").string()});
    CHECK(r.code == exit_invalid_input);
    CHECK(r.err.find("error:") != std::string::npos);

    write_text_file(dir / "empty.csv", "");
    CHECK(run({"spectrum", "--input", (dir / "empty.csv").string(), "--out", (dir / "o").string()}).code ==
          exit_invalid_input);
    CHECK(run({"spectrum", "--input", (dir / "nope.csv").string(), "--out", (dir / "o").string()}).code ==
          exit_io);
    CHECK(run({"simulate", "--config", (dir / "nope.json").string(), "--out", (dir / "o").string()}).code ==
          exit_io);
    CHECK(run({"collapse", "--input", (dir / "nope.json").string(), "--out", (dir / "o").string()}).code ==
          exit_io);

    // short path: below the analysis minimum
    write_text_file(dir / "short.csv", series_csv(testsupport::brownian(1, 300)));
    CHECK(run({"spectrum", "--input", (dir / "short.csv").string(), "--out", (dir / "o").string()}).code ==
          exit_invalid_input);
    CHECK(run({"spectrum", "--input", (dir / "short.csv").string(), "--out", (dir / "o").string(),
               "--q-range", "1:2"})
              .code == exit_invalid_input);
    CHECK(run({"spectrum", "--input", (dir / "short.csv").string(), "--out", (dir / "o").string(),
               "--format", "xml"})
              .code == exit_invalid_input);
}

TEST_CASE("spectrum of a brownian path and its duality check") {
    const auto dir = tmp("spectrum");
    write_text_file(dir / "bm.csv", series_csv(testsupport::brownian(31, 1u << 16)));
    const auto r = run({"spectrum", "--input", (dir / "bm.csv").string(), "--out", (dir / "json").string()});
    REQUIRE(r.code == exit_ok);
    CHECK(r.err.find("fit range") != std::string::npos);
    const json doc = read_json_file(dir / "json" / "spectrum.json");
    const double peak = doc.at("peak_alpha").get<double>();
    CHECK(peak >= 0.45);
    CHECK(peak <= 0.55);
    CHECK(doc.at("length") == 65536);

    const auto v = run({"verify", "--input", (dir / "json" / "spectrum.json").string()});
    CHECK(v.code == exit_ok);
    CHECK(v.out.find("pass") != std::string::npos);

    json broken = doc;
    broken["D"][3] = broken["D"][3].get<double>() + 0.5;
    write_json_file(dir / "broken.json", broken);
    CHECK(run({"verify", "--input", (dir / "broken.json").string()}).code == exit_analysis);

    const auto csv = run({"spectrum", "--input", (dir / "bm.csv").string(), "--out", (dir / "csv").string(),
                          "--format", "csv", "--q-range", "-2:2:5"});
    REQUIRE(csv.code == exit_ok);
    CHECK(listing(dir / "csv") == std::set<std::string>{"tau.csv", "spectrum.csv"});
    const auto tau = read_text_file(dir / "csv" / "tau.csv");
    CHECK(tau.rfind("q,tau,tau_stderr\n-2,", 0) == 0);
}

TEST_CASE("pyramid commands on a simulated cascade") {
    const auto dir = tmp("pyramid");
    write_text_file(dir / "cfg.json", R"({"depth": 14, "seed": 2,
        "multiplier": {"law": "lognormal", "mean_log2": -0.33, "var_log2": 0.02},
        "additive": {"law": "normal", "std": 0.3}})");
    REQUIRE(run({"simulate", "--config", (dir / "cfg.json").string(), "--out", (dir / "sim").string()}).code ==
            exit_ok);
    const auto pyr = (dir / "sim" / "pyramid.json").string();

    REQUIRE(run({"multipliers", "--input", pyr, "--out", (dir / "m").string()}).code == exit_ok);
    const json m = read_json_file(dir / "m" / "multipliers.json");
    CHECK(m.contains("correlations"));
    REQUIRE(run({"multipliers", "--input", pyr, "--out", (dir / "mc").string(), "--format", "csv"}).code ==
            exit_ok);
    CHECK(listing(dir / "mc") == std::set<std::string>{"correlations.csv", "ratio_fits.csv"});

    REQUIRE(run({"variances", "--input", pyr, "--out", (dir / "v").string(), "--format", "csv"}).code == exit_ok);
    CHECK(read_text_file(dir / "v" / "variances.csv").rfind("Scale,side,", 0) == 0);

    const auto c = run({"collapse", "--input", pyr, "--out", (dir / "c").string(), "--h-grid", "0:0.5:0.01"});
    REQUIRE(c.code == exit_ok);
    const json col = read_json_file(dir / "c" / "collapse.json");
    CHECK(col.at("H").get<double>() > 0.1);
    CHECK(col.at("H").get<double>() < 0.35);
    CHECK(col.at("H_grid").size() == 51);
    CHECK(run({"collapse", "--input", pyr, "--out", (dir / "c").string(), "--h-grid", "0:1"}).code ==
          exit_invalid_input);

    // a path CSV is decomposed; it reproduces the pyramid it came from
    REQUIRE(run({"variances", "--input", (dir / "sim" / "path.csv").string(), "--out", (dir / "vp").string(),
                 "--format", "csv"})
                .code == exit_ok);
    CHECK(read_text_file(dir / "vp" / "variances.csv").rfind("Scale,side,", 0) == 0);
    // a JSON file that is not a pyramid
    CHECK(run({"variances", "--input", (dir / "sim" / "spec.json").string(), "--out", (dir / "x").string()}).code ==
          exit_invalid_input);
}

TEST_CASE("pipeline report from a panel") {
    const auto dir = tmp("pipeline");
    // mixed cascade increments, 1024 days of 64 returns
    CascadeSpec s;
    s.depth = 16;
    s.seed = 1;
    const double v = 0.02 * std::numbers::ln2;
    s.multiplier_law = MultiplierLaw::lognormal(0.5 * std::log(0.18) - v, v);
    s.additive_law = AdditiveLaw::normal(0.32);
    const auto path = dwt_inverse(synthesize(s), WaveletBasis::daubechies4()).values();
    std::vector<double> inc(path.size());
    inc[0] = path[0];
    for (std::size_t i = 1; i < path.size(); ++i) inc[i] = path[i] - path[i - 1];
    const double scale = 1e-3 / std::sqrt(population_variance(inc));
    for (auto& x : inc) x *= scale;
    write_text_file(dir / "panel.csv", panel_from_path(inc, 64));

    const auto r = run({"pipeline", "--input", (dir / "panel.csv").string(), "--out", (dir / "report").string()});
    INFO(r.err);
    REQUIRE(r.code == exit_ok);
    CHECK(listing(dir / "report") ==
          std::set<std::string>{"summary.json", "deltas.csv", "path.csv", "pyramid.json", "spectrum.json",
                                "tau.csv", "spectrum.csv", "multipliers.json", "correlations.csv",
                                "variances.json", "variances.csv", "collapse.json", "collapse.csv"});
    const json summary = read_json_file(dir / "report" / "summary.json");
    CHECK(summary.at("days") == 1024);
    CHECK(summary.at("returns") == 65536);
    CHECK(summary.at("path_length") == 65536);

    // the per-slot rescaling perturbs each increment by a few percent only, so the
    // variance structure of the generator survives the round trip
    const json var = read_json_file(dir / "report" / "variances.json");
    std::size_t checked = 0;
    for (const auto& row : var.at("rows")) {
        if (row.at("scale").get<int>() < 12) continue;
        INFO("layer " << row.at("scale") << " " << row.at("side"));
        CHECK(std::abs(row.at("var_w").get<double>() - 0.18) < 0.08);
        CHECK(std::abs(row.at("var_eta").get<double>() - 0.32) < 0.08);
        ++checked;
    }
    CHECK(checked == 6);

    // same input, same bytes
    REQUIRE(run({"pipeline", "--input", (dir / "panel.csv").string(), "--out", (dir / "again").string()}).code ==
            exit_ok);
    for (const auto& f : listing(dir / "report")) {
        CHECK(read_text_file(dir / "report" / f) == read_text_file(dir / "again" / f));
    }

    CHECK(run({"ingest", "--input", (dir / "panel.csv").string(), "--out", (dir / "ing").string()}).code == exit_ok);
    CHECK(read_text_file(dir / "ing" / "deltas.csv") == read_text_file(dir / "report" / "deltas.csv"));
}

TEST_CASE("pipeline stage errors keep their exit codes") {
    const auto dir = tmp("pipeline_errors");
    std::string flat = "timestamp,AAA\n";
    for (int m = 0; m < 40; ++m) {
        char stamp[32];
        std::snprintf(stamp, sizeof stamp, "2001-01-02T10:%02d", m);
        flat += std::string(stamp) + ",100\n";
    }
    write_text_file(dir / "flat.csv", flat);
    const auto r = run({"pipeline", "--input", (dir / "flat.csv").string(), "--out", (dir / "o").string()});
    CHECK(r.code == exit_invalid_input);
    CHECK(r.err.find("stage deseasonalize") != std::string::npos);

    const auto missing = run({"pipeline", "--input", (dir / "none.csv").string(), "--out", (dir / "o").string()});
    CHECK(missing.code == exit_io);
    CHECK(missing.err.find("stage ingest") != std::string::npos);

    write_text_file(dir / "garbled.csv", "timestamp,AAA\n2001-01-02T10:00,abc\n");
    CHECK(run({"pipeline", "--input", (dir / "garbled.csv").string(), "--out", (dir / "o").string()}).code ==
          exit_invalid_input);
}
