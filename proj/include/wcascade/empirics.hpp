#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wcascade/cascade.hpp"
#include "wcascade/dwt.hpp"
#include "wcascade/stats.hpp"

namespace wcascade {

// Prices of several issues on a shared intraday grid.
struct ReturnPanel {
    std::vector<std::string> issues;
    std::vector<std::string> timestamps;
    // prices[i][t] for issue i at row t
    std::vector<std::vector<double>> prices;
    // First row of each trading day, ascending, starting at 0.
    std::vector<std::size_t> day_starts;
    // Time-of-day slot of each row (minute of day for CSV input).
    std::vector<int> minute_of_day;

    std::size_t rows() const { return minute_of_day.size(); }
    // Throws std::invalid_argument on shape mismatch or non-positive prices.
    void validate() const;
};

struct DeseasonalizedReturns {
    std::vector<double> values;
    // time-of-day slot of each output value
    std::vector<int> slots;
    std::vector<std::string> warnings;
};

// Log-returns at lag dt that stay within one day, divided by the issue's per-slot
// standard deviation across days (global issue sigma when a slot has < 2
// observations or zero spread), then z-scored per issue and averaged across issues.
// Throws std::invalid_argument when an issue has zero return variance.
DeseasonalizedReturns deseasonalize_returns(const ReturnPanel& panel, int dt = 1);

// Cumulative sum of the most recent 2^J deltas, 2^J the largest power of two <= size.
TimeSeries accumulate_path(std::span<const double> deltas);

struct MultiplierTransition {
    // Ratios from parent layer j to layer j + 1, indexed by parent k.
    int parent_layer = 0;
    std::vector<double> left;   // d~_{j+1,2k} / d~_{j,k}
    std::vector<double> right;  // d~_{j+1,2k+1} / d~_{j,k}
    // Parent k excluded; left[k] and right[k] are NaN there.
    std::vector<bool> masked;

    std::size_t unmasked() const;
};

struct MultiplierSet {
    double zero_tol = 1e-6;
    // transitions[j] links layer j to layer j + 1
    std::vector<MultiplierTransition> transitions;
    std::vector<std::string> warnings;
};

// Backward ratios child / parent. Parents with |d~_{j,k}| <= zero_tol * h_j (or
// exactly zero) are masked. A raw pyramid is rescaled first.
MultiplierSet extract_multipliers(const WaveletPyramid& pyramid, double zero_tol = 1e-6);

struct CorrelationRow {
    int layer = 0;
    // log|W_{j-1->j}| against log|W_{j->j+1}|, each incoming factor paired with both
    // outgoing factors of its child node
    std::size_t successive_pairs = 0;
    double successive_r = 0.0;
    bool successive_valid = false;
    // log|d~_{j,k}| against log|W_{j->j+1}|
    std::size_t parent_pairs = 0;
    double parent_r = 0.0;
    bool parent_valid = false;
};

struct CorrelationTable {
    std::vector<CorrelationRow> rows;
    std::vector<std::string> warnings;

    const CorrelationRow* find(int layer) const;
};

// Pearson correlations on log-magnitudes per node layer j = 1 .. depth-2. Diagnostics
// with fewer than min_pairs unmasked pairs or constant inputs are marked invalid and
// reported in warnings.
CorrelationTable multiplier_correlations(const MultiplierSet& ms, const WaveletPyramid& pyramid,
                                         std::size_t min_pairs = 30);

struct CollapseResult {
    double H = 0.0;
    double distance = 0.0;
    std::vector<double> H_grid;
    std::vector<double> curve;
    std::vector<int> layers_used;
    bool at_boundary = false;
    std::vector<std::string> warnings;
};

// 0, 0.01, ..., 1
std::vector<double> default_H_grid();

// Two-sample Kolmogorov-Smirnov statistic between scale_a * a and scale_b * b, both
// sorted ascending, scales positive. Values within 1e-9 relative count as ties.
double ks_statistic_scaled(std::span<const double> a_sorted, double scale_a,
                           std::span<const double> b_sorted, double scale_b);

// For each H, rescales layer j by s_j^{-H} and averages the pairwise KS distance over
// all layers with at least min_layer_size coefficients. Needs >= 3 such layers.
CollapseResult collapse_H(const WaveletPyramid& pyramid, std::span<const double> H_grid,
                          std::size_t min_layer_size = 64);

struct VarianceRow {
    int parent_layer = 0;
    Side side = Side::left;
    // Regression in units of h_j: bin variance / h_j^2 against (bin centre / h_j)^2,
    // so slope = Var(W) and intercept = Var(eta) before clamping.
    RegressionResult fit;
    double var_w = 0.0;
    double var_eta = 0.0;
    bool clamped = false;
    double h_parent = 0.0;
    double h_child = 0.0;
    double layer_ratio = 0.0;        // (h_{j+1} / h_j)^2
    double identity_residual = 0.0;  // |ratio - Var(W) - Var(eta)|
    BinnedVariance bins;
};

struct VarianceEstimate {
    std::vector<VarianceRow> rows;
    std::vector<std::string> warnings;

    const VarianceRow* find(int parent_layer, Side side) const;
};

struct VarianceOptions {
    double bin_width = 0.2;  // in units of h_j
    std::size_t min_count = 100;
    std::size_t min_layer_size = 256;
};

VarianceEstimate estimate_variances(const WaveletPyramid& pyramid,
                                    const VarianceOptions& options = {});

}  // namespace wcascade
