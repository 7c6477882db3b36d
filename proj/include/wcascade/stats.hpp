#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wcascade {

// Variances and standard deviations use the population convention (divide by n)
// throughout the library.
double mean(std::span<const double> v);
double population_variance(std::span<const double> v);
// Linear-interpolation quantile of unsorted data, p in [0, 1].
double quantile(std::span<const double> v, double p);

// Minimizes a unimodal f on [lo, hi] by golden-section search until the bracket is
// narrower than rel_tol * (|x| + tiny).
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double rel_tol = 1e-8);

enum class DensityFamily { cauchy, student_t2, normal };

std::string to_string(DensityFamily family);

// Zero-location densities with scale parameter s:
//   cauchy      1 / (pi s (1 + x^2/s^2))
//   student_t2  (1 / (2 sqrt2 s)) (1 + x^2/(2 s^2))^{-3/2}
//   normal      exp(-x^2/(2 s^2)) / (sqrt(2 pi) s)
double family_density(DensityFamily family, double scale, double x);
double family_cdf(DensityFamily family, double scale, double x);

struct HistogramSpec {
    int bins = 101;
    // Fraction of the samples spanned by the default range (central quantiles).
    double central_mass = 0.99;
    // Explicit range; overrides central_mass when both are set.
    std::optional<double> lo;
    std::optional<double> hi;
};

struct Histogram {
    std::vector<double> edges;
    std::vector<double> centers;
    // count / (n_total * width), so the density integrates to the covered fraction.
    std::vector<double> density;
    double width = 0.0;
    std::size_t n_total = 0;
};

Histogram make_histogram(std::span<const double> samples, const HistogramSpec& spec = {});

struct FitResult {
    DensityFamily family = DensityFamily::cauchy;
    double location = 0.0;
    double scale = 1.0;
    // Sum of squared differences between histogram density and the model's
    // bin-averaged density at the optimum.
    double goodness = 0.0;
};

// Least-squares scale fits against a histogram; location is fixed at 0. The scale
// is searched by golden section on [1e-3 IQR, 10 IQR]. Need >= 100 samples that
// are not all equal.
FitResult fit_density(DensityFamily family, std::span<const double> samples,
                      const HistogramSpec& bins = {});
FitResult fit_cauchy(std::span<const double> samples, const HistogramSpec& bins = {});
FitResult fit_student_t2(std::span<const double> samples, const HistogramSpec& bins = {});
FitResult fit_normal(std::span<const double> samples, const HistogramSpec& bins = {});
// Sum of squared residuals of a given scale against a histogram.
double histogram_sse(DensityFamily family, double scale, const Histogram& hist);

struct RegressionResult {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double stderr_intercept = 0.0;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    std::size_t n = 0;
};

// y = slope x + intercept. Needs >= 3 points and non-constant x.
RegressionResult ols(std::span<const double> x, std::span<const double> y);
// "a=0.72 b=0.13 std_a=0.04 std_b=0.01 adj_r2=0.88"
std::string format_regression(const RegressionResult& r, int decimals = 2);
std::string format_fixed(double value, int decimals);

// Throws std::invalid_argument when either input is constant up to rounding
// (standard deviation <= 1e-12 (1 + |mean|)).
double pearson_correlation(std::span<const double> x, std::span<const double> y);

struct VarianceBin {
    double left = 0.0;
    double center = 0.0;
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;
    bool included = false;
};

// Bins are half-open [k w, (k+1) w) over the predecessor values.
struct BinnedVariance {
    double bin_width = 0.0;
    std::size_t min_count = 0;
    // Every non-empty bin, ordered by position (the "all bins" view).
    std::vector<VarianceBin> all_bins;
    std::vector<std::string> warnings;

    std::vector<VarianceBin> main_bins() const;
    std::size_t total_count() const;
};

BinnedVariance binned_conditional_variance(std::span<const double> predecessor,
                                           std::span<const double> successor, double bin_width,
                                           std::size_t min_count);

}  // namespace wcascade
