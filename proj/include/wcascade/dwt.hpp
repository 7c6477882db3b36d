#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wcascade {

// Uniformly sampled series whose length is a power of two.
class TimeSeries {
public:
    TimeSeries() = default;
    explicit TimeSeries(std::vector<double> values, double sample_interval = 1.0);

    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double sample_interval() const { return sample_interval_; }
    // log2 of the length
    int depth() const;

private:
    std::vector<double> values_;
    double sample_interval_ = 1.0;
};

bool is_power_of_two(std::size_t n);
int log2_exact(std::size_t n);

// Two-channel orthonormal filter pair. The high-pass filter is derived from the
// low-pass one as g_k = (-1)^k h_{M-1-k}.
class WaveletBasis {
public:
    // Throws std::invalid_argument if the filter is not orthonormal (to 1e-12)
    // or lacks the requested number of discrete vanishing moments.
    WaveletBasis(std::vector<double> low_pass, int vanishing_moments);

    static WaveletBasis daubechies4();
    static WaveletBasis haar();

    const std::vector<double>& low_pass() const { return low_; }
    const std::vector<double>& high_pass() const { return high_; }
    int vanishing_moments() const { return vanishing_moments_; }
    std::size_t taps() const { return low_.size(); }

private:
    std::vector<double> low_;
    std::vector<double> high_;
    int vanishing_moments_;
};

// Dyadic coefficient tree of a series of length L = 2^depth.
//
// Layer j (1 <= j < depth) holds 2^j detail coefficients at scale s_j = L / 2^j,
// so the finest layer sits at scale 2. The root (j = 0) carries one detail
// coefficient and the approximation coefficient. The total coefficient count is L.
// When `rescaled` is set, layer j stores d~_{j,k} = 2^{j/2} d_{j,k}.
struct WaveletPyramid {
    int depth = 0;
    bool rescaled = false;
    double root_approx = 0.0;
    double root_detail = 0.0;
    // layers[j - 1] is layer j
    std::vector<std::vector<double>> layers;

    std::size_t length() const { return std::size_t{1} << depth; }
    // Number of detail layers including the root, i.e. depth.
    int layer_count() const { return depth; }
    // Layer j as a view; j == 0 yields the root detail.
    std::span<const double> layer(int j) const;
    std::span<double> layer(int j);
    double scale(int j) const;

    // Throws std::invalid_argument on inconsistent sizes or non-finite values.
    void validate() const;

    // Zero-filled pyramid of the given depth.
    static WaveletPyramid zeros(int depth, bool rescaled);
};

enum class RescaleDirection { to_rescaled, to_raw };

// Periodic orthonormal DWT. Decimation keeps even phases:
//   a'[k] = sum_n h[n] a[(2k + n) mod N],  d[k] = sum_n g[n] a[(2k + n) mod N].
WaveletPyramid dwt_forward(const TimeSeries& series, const WaveletBasis& basis);

// Inverse of dwt_forward. A rescaled pyramid is converted to raw coefficients first.
TimeSeries dwt_inverse(const WaveletPyramid& pyramid, const WaveletBasis& basis);

// Multiplies (or divides) layer j by 2^{j/2} and flips the flag.
WaveletPyramid rescale(const WaveletPyramid& pyramid, RescaleDirection direction);

}  // namespace wcascade
