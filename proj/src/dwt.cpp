#include "wcascade/dwt.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wcascade {

namespace {

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument(std::string(what) + ": non-finite value");
        }
    }
}

// One analysis step on a periodic signal of even length N.
void analysis_step(std::span<const double> in, const WaveletBasis& basis,
                   std::vector<double>& approx, std::vector<double>& detail) {
    const std::size_t n = in.size();
    const std::size_t half = n / 2;
    const auto& h = basis.low_pass();
    const auto& g = basis.high_pass();
    approx.assign(half, 0.0);
    detail.assign(half, 0.0);
    for (std::size_t k = 0; k < half; ++k) {
        double a = 0.0;
        double d = 0.0;
        for (std::size_t t = 0; t < h.size(); ++t) {
            const double x = in[(2 * k + t) % n];
            a += h[t] * x;
            d += g[t] * x;
        }
        approx[k] = a;
        detail[k] = d;
    }
}

void synthesis_step(std::span<const double> approx, std::span<const double> detail,
                    const WaveletBasis& basis, std::vector<double>& out) {
    const std::size_t half = approx.size();
    const std::size_t n = 2 * half;
    const auto& h = basis.low_pass();
    const auto& g = basis.high_pass();
    out.assign(n, 0.0);
    for (std::size_t k = 0; k < half; ++k) {
        for (std::size_t t = 0; t < h.size(); ++t) {
            out[(2 * k + t) % n] += h[t] * approx[k] + g[t] * detail[k];
        }
    }
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

int log2_exact(std::size_t n) {
    if (!is_power_of_two(n)) {
        throw std::invalid_argument("length " + std::to_string(n) + " is not a power of two");
    }
    int j = 0;
    while ((std::size_t{1} << j) < n) ++j;
    return j;
}

TimeSeries::TimeSeries(std::vector<double> values, double sample_interval)
    : values_(std::move(values)), sample_interval_(sample_interval) {
    if (values_.size() < 2 || !is_power_of_two(values_.size())) {
        throw std::invalid_argument("time series length " + std::to_string(values_.size()) +
                                    " is not a power of two >= 2");
    }
    if (!(sample_interval_ > 0.0) || !std::isfinite(sample_interval_)) {
        throw std::invalid_argument("sample interval must be positive");
    }
    require_finite(values_, "time series");
}

int TimeSeries::depth() const { return log2_exact(values_.size()); }

WaveletBasis::WaveletBasis(std::vector<double> low_pass, int vanishing_moments)
    : low_(std::move(low_pass)), vanishing_moments_(vanishing_moments) {
    const std::size_t m = low_.size();
    if (m < 2 || m % 2 != 0) {
        throw std::invalid_argument("low-pass filter must have an even number of taps");
    }
    if (vanishing_moments_ < 1) {
        throw std::invalid_argument("vanishing moments must be positive");
    }
    require_finite(low_, "low-pass filter");
    high_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        high_[k] = sign * low_[m - 1 - k];
    }
    // Orthonormality under even shifts.
    for (std::size_t shift = 0; shift < m; shift += 2) {
        double dot = 0.0;
        for (std::size_t k = 0; k + shift < m; ++k) dot += low_[k] * low_[k + shift];
        const double want = shift == 0 ? 1.0 : 0.0;
        if (std::abs(dot - want) > 1e-12) {
            throw std::invalid_argument("low-pass filter is not orthonormal");
        }
    }
    for (int n = 0; n < vanishing_moments_; ++n) {
        double moment = 0.0;
        double magnitude = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double term = std::pow(static_cast<double>(k), n) * high_[k];
            moment += term;
            magnitude += std::abs(term);
        }
        if (std::abs(moment) > 1e-10 * magnitude) {
            throw std::invalid_argument("wavelet filter lacks vanishing moment of order " +
                                        std::to_string(n));
        }
    }
}

WaveletBasis WaveletBasis::daubechies4() {
    return WaveletBasis({0.48296291314453414337, 0.83651630373780790556,
                         0.22414386804201338103, -0.12940952255126038117},
                        2);
}

WaveletBasis WaveletBasis::haar() {
    return WaveletBasis({0.70710678118654752440, 0.70710678118654752440}, 1);
}

std::span<const double> WaveletPyramid::layer(int j) const {
    if (j == 0) return {&root_detail, 1};
    return layers.at(static_cast<std::size_t>(j - 1));
}

std::span<double> WaveletPyramid::layer(int j) {
    if (j == 0) return {&root_detail, 1};
    return layers.at(static_cast<std::size_t>(j - 1));
}

double WaveletPyramid::scale(int j) const {
    return std::ldexp(1.0, depth - j);
}

void WaveletPyramid::validate() const {
    if (depth < 1) throw std::invalid_argument("pyramid depth must be >= 1");
    if (depth > 40) throw std::invalid_argument("pyramid depth too large");
    if (layers.size() != static_cast<std::size_t>(depth - 1)) {
        throw std::invalid_argument("pyramid of depth " + std::to_string(depth) + " must have " +
                                    std::to_string(depth - 1) + " detail layers below the root");
    }
    for (int j = 1; j < depth; ++j) {
        const auto& l = layers[static_cast<std::size_t>(j - 1)];
        if (l.size() != (std::size_t{1} << j)) {
            throw std::invalid_argument("layer " + std::to_string(j) + " has " +
                                        std::to_string(l.size()) + " entries, expected " +
                                        std::to_string(std::size_t{1} << j));
        }
        require_finite(l, "pyramid layer");
    }
    if (!std::isfinite(root_approx) || !std::isfinite(root_detail)) {
        throw std::invalid_argument("pyramid root: non-finite value");
    }
}

WaveletPyramid WaveletPyramid::zeros(int depth, bool rescaled) {
    if (depth < 1) throw std::invalid_argument("pyramid depth must be >= 1");
    WaveletPyramid p;
    p.depth = depth;
    p.rescaled = rescaled;
    p.layers.reserve(static_cast<std::size_t>(depth - 1));
    for (int j = 1; j < depth; ++j) p.layers.emplace_back(std::size_t{1} << j, 0.0);
    return p;
}

WaveletPyramid dwt_forward(const TimeSeries& series, const WaveletBasis& basis) {
    const auto& x = series.values();
    if (x.size() < 2 || !is_power_of_two(x.size())) {
        throw std::invalid_argument("dwt_forward: length " + std::to_string(x.size()) +
                                    " is not a power of two >= 2");
    }
    require_finite(x, "dwt_forward input");
    const int depth = log2_exact(x.size());
    WaveletPyramid p = WaveletPyramid::zeros(depth, false);

    std::vector<double> current(x.begin(), x.end());
    std::vector<double> approx;
    std::vector<double> detail;
    for (int j = depth - 1; j >= 0; --j) {
        analysis_step(current, basis, approx, detail);
        if (j == 0) {
            p.root_detail = detail[0];
        } else {
            p.layers[static_cast<std::size_t>(j - 1)] = detail;
        }
        current.swap(approx);
    }
    p.root_approx = current[0];
    return p;
}

TimeSeries dwt_inverse(const WaveletPyramid& pyramid, const WaveletBasis& basis) {
    pyramid.validate();
    const WaveletPyramid raw =
        pyramid.rescaled ? rescale(pyramid, RescaleDirection::to_raw) : pyramid;

    std::vector<double> current{raw.root_approx};
    std::vector<double> next;
    for (int j = 0; j < raw.depth; ++j) {
        synthesis_step(current, raw.layer(j), basis, next);
        current.swap(next);
    }
    return TimeSeries(std::move(current));
}

WaveletPyramid rescale(const WaveletPyramid& pyramid, RescaleDirection direction) {
    const bool to_rescaled = direction == RescaleDirection::to_rescaled;
    if (pyramid.rescaled == to_rescaled) {
        throw std::invalid_argument(to_rescaled ? "pyramid is already rescaled"
                                                : "pyramid is already raw");
    }
    WaveletPyramid out = pyramid;
    out.rescaled = to_rescaled;
    for (int j = 1; j < out.depth; ++j) {
        const double factor = std::pow(2.0, 0.5 * j);
        for (double& v : out.layer(j)) v = to_rescaled ? v * factor : v / factor;
    }
    return out;
}

}  // namespace wcascade
