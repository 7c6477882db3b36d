#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "wcascade/cascade.hpp"
#include "wcascade/dwt.hpp"
#include "wcascade/empirics.hpp"
#include "wcascade/spectrum.hpp"
#include "wcascade/stats.hpp"
#include "wcascade/wtmm.hpp"

namespace wcascade {

using json = nlohmann::ordered_json;

// Shortest round-trip decimal form; "nan", "inf" and "-inf" for non-finite values.
std::string format_number(double v);

// JSON encodings. The from_* functions throw std::invalid_argument on missing or
// ill-typed fields and validate the decoded object.
json to_json(const CascadeSpec& spec);
CascadeSpec cascade_spec_from_json(const json& j);

json to_json(const WtmmConfig& config);
// Starts from `base` and overrides the fields present in j.
WtmmConfig wtmm_config_from_json(const json& j, WtmmConfig base = {});

json to_json(const WaveletPyramid& pyramid);
WaveletPyramid pyramid_from_json(const json& j);

json to_json(const SingularSpectrum& spectrum);
SingularSpectrum spectrum_from_json(const json& j);

json to_json(const FitResult& fit);
json to_json(const RegressionResult& fit);
json to_json(const CorrelationTable& table);
json to_json(const VarianceEstimate& estimate);
json to_json(const CollapseResult& collapse);

// CSV tables with a header row.
std::string series_csv(std::span<const double> values);   // index,value
std::string tau_csv(const SingularSpectrum& spectrum);     // q,tau,tau_stderr
std::string alpha_csv(const SingularSpectrum& spectrum);   // q,alpha,D
std::string correlations_csv(const CorrelationTable& table);
// Scale,side,a,b,Std a,Std b,Adj R2,Var(W),Var(eta) plus S_j and the identity residual
std::string variances_csv(const VarianceEstimate& estimate);
std::string collapse_csv(const CollapseResult& collapse);  // H,distance

// File helpers. Open/read/write failures throw io_error; malformed content throws
// std::invalid_argument.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);
json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);

// Numeric series from a CSV: the last column of every row, with an optional
// non-numeric header row.
std::vector<double> parse_series_csv(const std::string& text);
std::vector<double> read_series_csv(const std::filesystem::path& path);

// Panel CSV: header "timestamp,ISSUE1,ISSUE2,..."; ISO-8601 timestamps
// (YYYY-MM-DDTHH:MM[:SS], 'T' or ' ' separator). A new day starts whenever the date
// changes; the time-of-day slot is the minute of the day.
ReturnPanel parse_panel_csv(const std::string& text);
ReturnPanel read_panel_csv(const std::filesystem::path& path);
std::string panel_csv(const ReturnPanel& panel);

}  // namespace wcascade
