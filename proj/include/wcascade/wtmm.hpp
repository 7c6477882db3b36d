#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "wcascade/dwt.hpp"
#include "wcascade/spectrum.hpp"

namespace wcascade {

// n-th derivative of exp(-x^2/2), n >= 1; has exactly n vanishing moments.
class AnalyzingWavelet {
public:
    explicit AnalyzingWavelet(int order);

    int order() const { return order_; }
    double operator()(double x) const;

private:
    int order_;
};

// d^n/dx^n exp(-x^2/2) = (-1)^n He_n(x) exp(-x^2/2) with He_n the probabilists'
// Hermite polynomial.
double gaussian_derivative_wavelet(int order, double x);

// Geometric grid from min_scale to max_scale (inclusive when it lands on a voice).
std::vector<double> geometric_scale_grid(double min_scale, double max_scale,
                                         int voices_per_octave);

// W[f](x, s) = (1/s) sum_u f(u) psi((u - x) / s) on a periodic series.
struct CwtMatrix {
    std::vector<double> scales;
    std::size_t length = 0;
    // Row-major, one row of `length` positions per scale.
    std::vector<double> values;

    std::span<const double> row(std::size_t scale_index) const {
        return {values.data() + scale_index * length, length};
    }
    double at(std::size_t scale_index, std::size_t position) const {
        return values[scale_index * length + position];
    }
};

// Periodic CWT evaluated in the Fourier domain from the analytic transform of the
// Gaussian derivative. Scales must be strictly increasing within [2, L/4].
CwtMatrix cwt(const TimeSeries& series, const AnalyzingWavelet& wavelet,
              std::span<const double> scales);

// Local maxima of |W| along x at each scale (periodic neighbours). A plateau counts
// once, at its leftmost index, when it dominates both neighbours. Values at or
// below relative_floor * (row maximum) are ignored.
std::vector<std::vector<std::size_t>> find_modulus_maxima(const CwtMatrix& cwt,
                                                          double relative_floor = 1e-8);

struct MaximaPoint {
    std::size_t scale_index;
    std::size_t position;
    double modulus;
};

// Points ordered by increasing scale, one per scale starting at the finest one.
struct MaximaLine {
    std::vector<MaximaPoint> points;

    std::size_t last_scale_index() const { return points.back().scale_index; }
};

// Greedy fine-to-coarse linking. Every line starts at the finest scale, so a line
// reaching scale index i has a point at every scale <= s_i. Between adjacent scales
// a line moves to the nearest maximum within max(1, radius_factor * s * dlog s)
// samples (s * ln 2 with the default factor at 8 voices per octave). When several
// lines claim one maximum the line with the larger modulus continues and the others end.
std::vector<MaximaLine> chain_maxima_lines(const CwtMatrix& cwt,
                                           const std::vector<std::vector<std::size_t>>& maxima,
                                           double radius_factor = 8.0);

struct PartitionFunction {
    std::vector<double> q;
    std::vector<double> scales;
    // log2_Z[iq][is]; NaN where no line reaches the scale.
    std::vector<std::vector<double>> log2_Z;
    std::vector<std::size_t> line_count;

    double Z(std::size_t iq, std::size_t is) const;
};

// Z(q, s) = sum over lines reaching s of (sup_{s' <= s} |W| along the line)^q,
// accumulated in log space.
PartitionFunction partition_function(const std::vector<MaximaLine>& lines,
                                     std::span<const double> q_grid,
                                     std::span<const double> scales);

struct TauEstimate {
    std::vector<double> q;
    std::vector<double> tau;
    std::vector<double> tau_stderr;
    std::vector<double> r2;
    double fit_min = 0.0;
    double fit_max = 0.0;
    std::size_t scales_used = 0;
    std::vector<std::string> warnings;
};

// Per-q least squares of log2 Z against log2 s over scales in [fit_min, fit_max].
// Neighbouring voices of one octave are strongly correlated, so the reported
// standard error counts one effective observation per octave: the OLS error is
// inflated by sqrt(points per octave). Scales without lines are dropped with a
// warning. Throws analysis_error with fewer than three usable scales.
TauEstimate estimate_tau(const PartitionFunction& pf, double fit_min, double fit_max);

// Discrete Legendre transform D = q alpha - tau with alpha from centred differences
// (one-sided at the ends). A tau that is not concave beyond three combined standard
// errors is replaced by its concave hull and flagged.
SingularSpectrum legendre_spectrum(std::span<const double> q, std::span<const double> tau,
                                   std::span<const double> tau_stderr);
SingularSpectrum legendre_spectrum(const TauEstimate& tau);

struct WtmmConfig {
    int wavelet_order = 2;
    int voices_per_octave = 8;
    double min_scale = 4.0;
    // 0 selects L / 8.
    double max_scale = 0.0;
    double q_min = -5.0;
    double q_max = 5.0;
    int q_count = 41;
    double fit_min = 8.0;
    // 0 selects min(1024, L / 128).
    double fit_max = 0.0;
    // Subtract the line through the end points so the periodic extension has no jump.
    bool detrend = true;
    double relative_floor = 1e-8;
    double link_radius_factor = 8.0;

    std::vector<double> q_grid() const;
    void validate() const;
};

struct WtmmResult {
    std::vector<double> scales;
    std::size_t line_total = 0;
    PartitionFunction partition;
    TauEstimate tau;
    SingularSpectrum spectrum;
};

// cwt -> maxima -> lines -> partition function -> tau -> Legendre.
WtmmResult run_wtmm(const TimeSeries& series, const WtmmConfig& config = {});
SingularSpectrum singular_spectrum(const TimeSeries& series, const WtmmConfig& config = {});

}  // namespace wcascade
