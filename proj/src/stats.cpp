#include "wcascade/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <stdexcept>

namespace wcascade {

double mean(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("mean of empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double population_variance(std::span<const double> v) {
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size());
}

double quantile(std::span<const double> v, double p) {
    if (v.empty()) throw std::invalid_argument("quantile of empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end());
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double rel_tol) {
    if (!(lo < hi)) throw std::invalid_argument("golden section: empty bracket");
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int iter = 0; iter < 500; ++iter) {
        if (b - a <= rel_tol * (std::abs(a) + std::abs(b)) * 0.5) break;
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

std::string to_string(DensityFamily family) {
    switch (family) {
        case DensityFamily::cauchy: return "cauchy";
        case DensityFamily::student_t2: return "student_t2";
        case DensityFamily::normal: return "normal";
    }
    return "unknown";
}

double family_density(DensityFamily family, double scale, double x) {
    const double t = x / scale;
    switch (family) {
        case DensityFamily::cauchy:
            return 1.0 / (std::numbers::pi * scale * (1.0 + t * t));
        case DensityFamily::student_t2:
            return 1.0 / (2.0 * std::numbers::sqrt2 * scale) * std::pow(1.0 + 0.5 * t * t, -1.5);
        case DensityFamily::normal:
            return std::exp(-0.5 * t * t) / (std::sqrt(2.0 * std::numbers::pi) * scale);
    }
    return 0.0;
}

double family_cdf(DensityFamily family, double scale, double x) {
    const double t = x / scale;
    switch (family) {
        case DensityFamily::cauchy:
            return 0.5 + std::atan(t) / std::numbers::pi;
        case DensityFamily::student_t2:
            return 0.5 + t / (2.0 * std::sqrt(2.0 + t * t));
        case DensityFamily::normal:
            return 0.5 * std::erfc(-t / std::numbers::sqrt2);
    }
    return 0.0;
}

Histogram make_histogram(std::span<const double> samples, const HistogramSpec& spec) {
    if (samples.empty()) throw std::invalid_argument("histogram of empty sample");
    if (spec.bins < 1) throw std::invalid_argument("histogram needs at least one bin");
    double lo = 0.0;
    double hi = 0.0;
    if (spec.lo && spec.hi) {
        lo = *spec.lo;
        hi = *spec.hi;
    } else {
        if (!(spec.central_mass > 0.0 && spec.central_mass <= 1.0)) {
            throw std::invalid_argument("histogram central mass must lie in (0, 1]");
        }
        const double tail = 0.5 * (1.0 - spec.central_mass);
        lo = quantile(samples, tail);
        hi = quantile(samples, 1.0 - tail);
    }
    if (!(hi > lo)) throw std::invalid_argument("histogram range is empty");

    Histogram h;
    const auto bins = static_cast<std::size_t>(spec.bins);
    h.width = (hi - lo) / static_cast<double>(bins);
    h.n_total = samples.size();
    for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(lo + h.width * static_cast<double>(i));
    h.edges.back() = hi;
    std::vector<std::size_t> counts(bins, 0);
    for (double x : samples) {
        if (x < lo || x > hi) continue;
        auto idx = static_cast<std::size_t>((x - lo) / h.width);
        if (idx >= bins) idx = bins - 1;
        ++counts[idx];
    }
    for (std::size_t i = 0; i < bins; ++i) {
        h.centers.push_back(0.5 * (h.edges[i] + h.edges[i + 1]));
        h.density.push_back(static_cast<double>(counts[i]) /
                            (static_cast<double>(h.n_total) * h.width));
    }
    return h;
}

double histogram_sse(DensityFamily family, double scale, const Histogram& hist) {
    double sse = 0.0;
    for (std::size_t i = 0; i < hist.density.size(); ++i) {
        const double lo = hist.edges[i];
        const double hi = hist.edges[i + 1];
        const double model = (family_cdf(family, scale, hi) - family_cdf(family, scale, lo)) /
                             (hi - lo);
        const double r = hist.density[i] - model;
        sse += r * r;
    }
    return sse;
}

FitResult fit_density(DensityFamily family, std::span<const double> samples,
                      const HistogramSpec& bins) {
    if (samples.size() < 100) {
        throw std::invalid_argument("density fit needs at least 100 samples");
    }
    for (double x : samples) {
        if (!std::isfinite(x)) throw std::invalid_argument("density fit: non-finite sample");
    }
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    if (*mn == *mx) throw std::invalid_argument("density fit: all samples are equal");

    const Histogram hist = make_histogram(samples, bins);
    double iqr = quantile(samples, 0.75) - quantile(samples, 0.25);
    if (!(iqr > 0.0)) iqr = hist.edges.back() - hist.edges.front();

    FitResult fit;
    fit.family = family;
    fit.scale = golden_section_minimize(
        [&](double s) { return histogram_sse(family, s, hist); }, 1e-3 * iqr, 10.0 * iqr, 1e-8);
    fit.goodness = histogram_sse(family, fit.scale, hist);
    return fit;
}

FitResult fit_cauchy(std::span<const double> samples, const HistogramSpec& bins) {
    return fit_density(DensityFamily::cauchy, samples, bins);
}

FitResult fit_student_t2(std::span<const double> samples, const HistogramSpec& bins) {
    return fit_density(DensityFamily::student_t2, samples, bins);
}

FitResult fit_normal(std::span<const double> samples, const HistogramSpec& bins) {
    return fit_density(DensityFamily::normal, samples, bins);
}

RegressionResult ols(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("ols: x and y differ in length");
    if (x.size() < 3) throw std::invalid_argument("ols: need at least 3 points");
    const double n = static_cast<double>(x.size());
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("ols: x is constant");

    RegressionResult r;
    r.n = x.size();
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (r.slope * x[i] + r.intercept);
        ssr += e * e;
    }
    const double s2 = ssr / (n - 2.0);
    r.stderr_slope = std::sqrt(s2 / sxx);
    r.stderr_intercept = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    // A perfect fit (including constant y) counts as R^2 = 1.
    r.r2 = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
    if (ssr <= 1e-30 * std::max(syy, 1e-300)) r.r2 = 1.0;
    r.adj_r2 = 1.0 - (1.0 - r.r2) * (n - 1.0) / (n - 2.0);
    return r;
}

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s(buf);
    // "-0.00" reads as noise
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
    return s;
}

std::string format_regression(const RegressionResult& r, int decimals) {
    return "a=" + format_fixed(r.slope, decimals) + " b=" + format_fixed(r.intercept, decimals) +
           " std_a=" + format_fixed(r.stderr_slope, decimals) +
           " std_b=" + format_fixed(r.stderr_intercept, decimals) +
           " adj_r2=" + format_fixed(r.adj_r2, decimals);
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("correlation: length mismatch");
    if (x.size() < 2) throw std::invalid_argument("correlation: need at least 2 pairs");
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    // spread at rounding level (e.g. ratios of a deterministic cascade) is constant
    const double n = static_cast<double>(x.size());
    const auto flat = [n](double ss, double m) {
        return !(std::sqrt(ss / n) > 1e-12 * (1.0 + std::abs(m)));
    };
    if (flat(sxx, mx) || flat(syy, my)) {
        throw std::invalid_argument("correlation: constant input");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<VarianceBin> BinnedVariance::main_bins() const {
    std::vector<VarianceBin> out;
    for (const auto& b : all_bins) {
        if (b.included) out.push_back(b);
    }
    return out;
}

std::size_t BinnedVariance::total_count() const {
    std::size_t n = 0;
    for (const auto& b : all_bins) n += b.count;
    return n;
}

BinnedVariance binned_conditional_variance(std::span<const double> predecessor,
                                           std::span<const double> successor, double bin_width,
                                           std::size_t min_count) {
    if (predecessor.size() != successor.size()) {
        throw std::invalid_argument("binned variance: unpaired inputs");
    }
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
        throw std::invalid_argument("binned variance: bin width must be positive");
    }
    struct Acc {
        std::size_t n = 0;
        double mean = 0.0;
        double m2 = 0.0;
    };
    std::map<std::int64_t, Acc> acc;
    for (std::size_t i = 0; i < predecessor.size(); ++i) {
        if (!std::isfinite(predecessor[i]) || !std::isfinite(successor[i])) {
            throw std::invalid_argument("binned variance: non-finite value");
        }
        const auto k = static_cast<std::int64_t>(std::floor(predecessor[i] / bin_width));
        Acc& a = acc[k];
        ++a.n;
        const double delta = successor[i] - a.mean;
        a.mean += delta / static_cast<double>(a.n);
        a.m2 += delta * (successor[i] - a.mean);
    }
    BinnedVariance out;
    out.bin_width = bin_width;
    out.min_count = min_count;
    for (const auto& [k, a] : acc) {
        VarianceBin b;
        b.left = static_cast<double>(k) * bin_width;
        b.center = b.left + 0.5 * bin_width;
        b.count = a.n;
        b.mean = a.mean;
        b.variance = a.m2 / static_cast<double>(a.n);
        b.included = a.n >= min_count;
        out.all_bins.push_back(b);
    }
    if (out.main_bins().empty()) {
        out.warnings.push_back("no bin reaches the minimum count of " + std::to_string(min_count));
    }
    return out;
}

}  // namespace wcascade
