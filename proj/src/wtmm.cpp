#include "wcascade/wtmm.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>

#include "wcascade/error.hpp"
#include "wcascade/stats.hpp"

namespace wcascade {

namespace {

struct FftwDeleter {
    void operator()(void* p) const { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

struct PlanDeleter {
    void operator()(fftw_plan p) const { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

std::size_t circular_distance(std::size_t a, std::size_t b, std::size_t n) {
    const std::size_t d = a > b ? a - b : b - a;
    return std::min(d, n - d);
}

// Nearest entry of a sorted position list to x on a circle of length n.
std::size_t nearest_index(const std::vector<std::size_t>& sorted, std::size_t x, std::size_t n) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), x);
    const std::size_t hi = it == sorted.end() ? 0 : static_cast<std::size_t>(it - sorted.begin());
    const std::size_t lo = it == sorted.begin() ? sorted.size() - 1
                                                : static_cast<std::size_t>(it - sorted.begin()) - 1;
    return circular_distance(sorted[lo], x, n) <= circular_distance(sorted[hi], x, n) ? lo : hi;
}

}  // namespace

AnalyzingWavelet::AnalyzingWavelet(int order) : order_(order) {
    if (order < 1) throw std::invalid_argument("analyzing wavelet order must be >= 1");
}

double AnalyzingWavelet::operator()(double x) const { return gaussian_derivative_wavelet(order_, x); }

double gaussian_derivative_wavelet(int order, double x) {
    if (order < 1) throw std::invalid_argument("gaussian derivative order must be >= 1");
    double prev = 1.0;  // He_0
    double cur = x;     // He_1
    for (int n = 1; n < order; ++n) {
        const double next = x * cur - n * prev;
        prev = cur;
        cur = next;
    }
    const double sign = (order % 2 == 0) ? 1.0 : -1.0;
    return sign * cur * std::exp(-0.5 * x * x);
}

std::vector<double> geometric_scale_grid(double min_scale, double max_scale,
                                         int voices_per_octave) {
    if (!(min_scale > 0.0) || !(max_scale >= min_scale)) {
        throw std::invalid_argument("scale grid: need 0 < min <= max");
    }
    if (voices_per_octave < 1) throw std::invalid_argument("scale grid: voices must be >= 1");
    std::vector<double> grid;
    const double step = 1.0 / voices_per_octave;
    for (int i = 0;; ++i) {
        const double s = min_scale * std::exp2(step * i);
        if (s > max_scale * (1.0 + 1e-12)) break;
        grid.push_back(s);
    }
    return grid;
}

CwtMatrix cwt(const TimeSeries& series, const AnalyzingWavelet& wavelet,
              std::span<const double> scales) {
    const std::size_t n = series.size();
    if (scales.empty()) throw std::invalid_argument("cwt: empty scale grid");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (!(scales[i] >= 2.0) || !(scales[i] <= static_cast<double>(n) / 4.0)) {
            throw std::invalid_argument("cwt: scale " + std::to_string(scales[i]) +
                                        " outside [2, L/4] for L = " + std::to_string(n));
        }
        if (i > 0 && !(scales[i] > scales[i - 1])) {
            throw std::invalid_argument("cwt: scales must be strictly increasing");
        }
    }

    const std::size_t nfreq = n / 2 + 1;
    FftwBuffer<double> real(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    FftwBuffer<fftw_complex> spectrum(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nfreq)));
    FftwBuffer<fftw_complex> product(
        static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nfreq)));
    if (!real || !spectrum || !product) throw std::bad_alloc();

    const int len = static_cast<int>(n);
    Plan forward(fftw_plan_dft_r2c_1d(len, real.get(), spectrum.get(), FFTW_ESTIMATE));
    Plan backward(fftw_plan_dft_c2r_1d(len, product.get(), real.get(), FFTW_ESTIMATE));

    std::copy(series.values().begin(), series.values().end(), real.get());
    fftw_execute(forward.get());

    CwtMatrix out;
    out.scales.assign(scales.begin(), scales.end());
    out.length = n;
    out.values.resize(scales.size() * n);

    // conj(psi_hat(s w)) with psi_hat(w) = (i w)^N sqrt(2 pi) exp(-w^2/2)
    const int order = wavelet.order();
    const std::complex<double> minus_i_pow = [order] {
        switch (order % 4) {
            case 0: return std::complex<double>(1.0, 0.0);
            case 1: return std::complex<double>(0.0, -1.0);
            case 2: return std::complex<double>(-1.0, 0.0);
            default: return std::complex<double>(0.0, 1.0);
        }
    }();
    const double norm = std::sqrt(2.0 * std::numbers::pi) / static_cast<double>(n);
    for (std::size_t si = 0; si < scales.size(); ++si) {
        const double s = scales[si];
        for (std::size_t k = 0; k < nfreq; ++k) {
            const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            const double sw = s * w;
            const std::complex<double> kernel =
                minus_i_pow * (std::pow(sw, order) * std::exp(-0.5 * sw * sw) * norm);
            const std::complex<double> f(spectrum[k][0], spectrum[k][1]);
            const std::complex<double> v = f * kernel;
            product[k][0] = v.real();
            product[k][1] = v.imag();
        }
        fftw_execute(backward.get());
        std::copy(real.get(), real.get() + n, out.values.begin() + static_cast<std::ptrdiff_t>(si * n));
    }
    return out;
}

std::vector<std::vector<std::size_t>> find_modulus_maxima(const CwtMatrix& m,
                                                          double relative_floor) {
    std::vector<std::vector<std::size_t>> maxima(m.scales.size());
    const std::size_t n = m.length;
    if (n < 3) return maxima;
    for (std::size_t si = 0; si < m.scales.size(); ++si) {
        const auto row = m.row(si);
        double row_max = 0.0;
        for (double v : row) row_max = std::max(row_max, std::abs(v));
        const double floor = relative_floor * row_max;
        for (std::size_t x = 0; x < n; ++x) {
            const double v = std::abs(row[x]);
            if (!(v > floor)) continue;
            const double left = std::abs(row[(x + n - 1) % n]);
            if (left >= v) continue;  // not rising, or not the leftmost plateau index
            std::size_t end = x;
            std::size_t steps = 0;
            while (steps < n && std::abs(row[(end + 1) % n]) == v) {
                end = (end + 1) % n;
                ++steps;
            }
            if (steps >= n - 1) continue;
            if (std::abs(row[(end + 1) % n]) < v) maxima[si].push_back(x);
        }
    }
    return maxima;
}

std::vector<MaximaLine> chain_maxima_lines(const CwtMatrix& m,
                                           const std::vector<std::vector<std::size_t>>& maxima,
                                           double radius_factor) {
    std::vector<MaximaLine> lines;
    if (maxima.empty() || m.scales.empty()) return lines;
    const std::size_t n = m.length;

    std::vector<std::size_t> active;
    for (std::size_t x : maxima[0]) {
        lines.push_back(MaximaLine{{MaximaPoint{0, x, std::abs(m.at(0, x))}}});
        active.push_back(lines.size() - 1);
    }

    for (std::size_t si = 1; si < maxima.size() && !active.empty(); ++si) {
        const auto& targets = maxima[si];
        if (targets.empty()) break;
        const double s = m.scales[si];
        const double radius = std::max(1.0, radius_factor * s * std::log(s / m.scales[si - 1]));

        // winner[t] = line currently holding target t
        std::vector<std::ptrdiff_t> winner(targets.size(), -1);
        for (std::size_t li : active) {
            const MaximaPoint& last = lines[li].points.back();
            const std::size_t t = nearest_index(targets, last.position, n);
            if (static_cast<double>(circular_distance(targets[t], last.position, n)) > radius) {
                continue;
            }
            if (winner[t] < 0) {
                winner[t] = static_cast<std::ptrdiff_t>(li);
                continue;
            }
            const MaximaPoint& held = lines[static_cast<std::size_t>(winner[t])].points.back();
            const std::size_t d_new = circular_distance(targets[t], last.position, n);
            const std::size_t d_held = circular_distance(targets[t], held.position, n);
            if (last.modulus > held.modulus || (last.modulus == held.modulus && d_new < d_held)) {
                winner[t] = static_cast<std::ptrdiff_t>(li);
            }
        }
        std::vector<std::size_t> next;
        for (std::size_t t = 0; t < targets.size(); ++t) {
            if (winner[t] < 0) continue;
            const auto li = static_cast<std::size_t>(winner[t]);
            lines[li].points.push_back(MaximaPoint{si, targets[t], std::abs(m.at(si, targets[t]))});
            next.push_back(li);
        }
        std::sort(next.begin(), next.end());
        active.swap(next);
    }
    return lines;
}

double PartitionFunction::Z(std::size_t iq, std::size_t is) const {
    return std::exp2(log2_Z.at(iq).at(is));
}

PartitionFunction partition_function(const std::vector<MaximaLine>& lines,
                                     std::span<const double> q_grid,
                                     std::span<const double> scales) {
    PartitionFunction pf;
    pf.q.assign(q_grid.begin(), q_grid.end());
    pf.scales.assign(scales.begin(), scales.end());
    pf.line_count.assign(scales.size(), 0);

    // log2 of the running supremum of each line at each scale it reaches
    std::vector<std::vector<double>> log_sup(scales.size());
    for (const auto& line : lines) {
        double sup = 0.0;
        for (const auto& p : line.points) {
            if (p.scale_index >= scales.size()) break;
            sup = std::max(sup, p.modulus);
            if (sup > 0.0) {
                log_sup[p.scale_index].push_back(std::log2(sup));
                ++pf.line_count[p.scale_index];
            }
        }
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    pf.log2_Z.assign(q_grid.size(), std::vector<double>(scales.size(), nan));
    for (std::size_t iq = 0; iq < q_grid.size(); ++iq) {
        const double q = q_grid[iq];
        for (std::size_t is = 0; is < scales.size(); ++is) {
            const auto& ls = log_sup[is];
            if (ls.empty()) continue;
            double top = -std::numeric_limits<double>::infinity();
            for (double v : ls) top = std::max(top, q * v);
            double acc = 0.0;
            for (double v : ls) acc += std::exp2(q * v - top);
            pf.log2_Z[iq][is] = top + std::log2(acc);
        }
    }
    return pf;
}

TauEstimate estimate_tau(const PartitionFunction& pf, double fit_min, double fit_max) {
    if (!(fit_min > 0.0) || !(fit_max >= fit_min)) {
        throw std::invalid_argument("tau fit range must satisfy 0 < min <= max");
    }
    TauEstimate est;
    std::vector<std::size_t> usable;
    for (std::size_t is = 0; is < pf.scales.size(); ++is) {
        const double s = pf.scales[is];
        if (s < fit_min * (1.0 - 1e-12) || s > fit_max * (1.0 + 1e-12)) continue;
        if (pf.line_count[is] == 0) {
            est.warnings.push_back("scale " + std::to_string(s) +
                                   " has no maxima lines; dropped from the fit");
            continue;
        }
        usable.push_back(is);
    }
    if (usable.size() < 3) {
        throw analysis_error("tau fit needs at least 3 scales with maxima lines in [" +
                             std::to_string(fit_min) + ", " + std::to_string(fit_max) + "], got " +
                             std::to_string(usable.size()));
    }
    est.fit_min = pf.scales[usable.front()];
    est.fit_max = pf.scales[usable.back()];
    est.scales_used = usable.size();

    std::vector<double> x;
    for (std::size_t is : usable) x.push_back(std::log2(pf.scales[is]));
    const double octaves = x.back() - x.front();
    const double per_octave = octaves > 0.0 ? static_cast<double>(x.size() - 1) / octaves : 1.0;
    const double correlation_factor = std::sqrt(std::max(1.0, per_octave));
    std::vector<double> y(usable.size());
    for (std::size_t iq = 0; iq < pf.q.size(); ++iq) {
        for (std::size_t i = 0; i < usable.size(); ++i) y[i] = pf.log2_Z[iq][usable[i]];
        const RegressionResult r = ols(x, y);
        est.q.push_back(pf.q[iq]);
        est.tau.push_back(r.slope);
        est.tau_stderr.push_back(r.stderr_slope * correlation_factor);
        est.r2.push_back(r.r2);
    }
    return est;
}

SingularSpectrum legendre_spectrum(std::span<const double> q, std::span<const double> tau,
                                   std::span<const double> tau_stderr) {
    const std::size_t n = q.size();
    if (n < 3 || tau.size() != n || tau_stderr.size() != n) {
        throw std::invalid_argument("legendre transform needs >= 3 aligned (q, tau) points");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(q[i] > q[i - 1])) throw std::invalid_argument("q grid must be strictly increasing");
    }
    SingularSpectrum s;
    s.q.assign(q.begin(), q.end());
    s.tau.assign(tau.begin(), tau.end());
    s.tau_stderr.assign(tau_stderr.begin(), tau_stderr.end());

    // Concavity: slopes must not increase beyond noise.
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double left = (tau[i] - tau[i - 1]) / (q[i] - q[i - 1]);
        const double right = (tau[i + 1] - tau[i]) / (q[i + 1] - q[i]);
        const double noise =
            3.0 * (tau_stderr[i - 1] + 2.0 * tau_stderr[i] + tau_stderr[i + 1]) /
                std::min(q[i] - q[i - 1], q[i + 1] - q[i]) +
            1e-9;
        if (right - left > noise) s.concave = false;
    }
    std::vector<double> t(tau.begin(), tau.end());
    if (!s.concave) {
        s.warnings.push_back("tau(q) is not concave beyond fit noise; using its concave hull");
        // upper hull by monotone chain
        std::vector<std::size_t> hull;
        for (std::size_t i = 0; i < n; ++i) {
            while (hull.size() >= 2) {
                const std::size_t a = hull[hull.size() - 2];
                const std::size_t b = hull.back();
                const double cross = (q[b] - q[a]) * (tau[i] - tau[a]) - (tau[b] - tau[a]) * (q[i] - q[a]);
                if (cross >= 0.0) hull.pop_back();
                else break;
            }
            hull.push_back(i);
        }
        for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
            const std::size_t a = hull[h];
            const std::size_t b = hull[h + 1];
            for (std::size_t i = a; i <= b; ++i) {
                t[i] = tau[a] + (tau[b] - tau[a]) * (q[i] - q[a]) / (q[b] - q[a]);
            }
        }
        s.tau = t;
    }

    s.alpha.resize(n);
    s.D.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == 0) {
            s.alpha[i] = (t[1] - t[0]) / (q[1] - q[0]);
        } else if (i + 1 == n) {
            s.alpha[i] = (t[n - 1] - t[n - 2]) / (q[n - 1] - q[n - 2]);
        } else {
            s.alpha[i] = (t[i + 1] - t[i - 1]) / (q[i + 1] - q[i - 1]);
        }
        s.D[i] = q[i] * s.alpha[i] - t[i];
    }
    const auto [amin, amax] = std::minmax_element(s.alpha.begin(), s.alpha.end());
    s.support_min = *amin;
    s.support_max = *amax;

    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
        const double tol = 1e-12 * std::max(1.0, std::abs(s.D[best]));
        if (s.D[i] > s.D[best] + tol ||
            (std::abs(s.D[i] - s.D[best]) <= tol && std::abs(q[i]) < std::abs(q[best]))) {
            best = i;
        }
    }
    s.peak_alpha = s.alpha[best];
    return s;
}

SingularSpectrum legendre_spectrum(const TauEstimate& tau) {
    SingularSpectrum s = legendre_spectrum(tau.q, tau.tau, tau.tau_stderr);
    s.warnings.insert(s.warnings.begin(), tau.warnings.begin(), tau.warnings.end());
    return s;
}

std::vector<double> WtmmConfig::q_grid() const {
    std::vector<double> q;
    if (q_count == 1) return {q_min};
    for (int i = 0; i < q_count; ++i) {
        q.push_back(q_min + (q_max - q_min) * i / (q_count - 1));
    }
    return q;
}

void WtmmConfig::validate() const {
    if (wavelet_order < 1) throw std::invalid_argument("wtmm: wavelet order must be >= 1");
    if (voices_per_octave < 1) throw std::invalid_argument("wtmm: voices per octave must be >= 1");
    if (!(min_scale >= 2.0)) throw std::invalid_argument("wtmm: min scale must be >= 2");
    if (max_scale != 0.0 && !(max_scale >= min_scale)) {
        throw std::invalid_argument("wtmm: max scale below min scale");
    }
    if (q_count < 3 || !(q_max > q_min)) throw std::invalid_argument("wtmm: need >= 3 q values");
    if (!(fit_min > 0.0) || (fit_max != 0.0 && !(fit_max >= fit_min))) {
        throw std::invalid_argument("wtmm: invalid fit range");
    }
    if (!(relative_floor >= 0.0)) throw std::invalid_argument("wtmm: negative floor");
}

WtmmResult run_wtmm(const TimeSeries& series, const WtmmConfig& config) {
    config.validate();
    const std::size_t n = series.size();
    if (n < 1024) {
        throw std::invalid_argument("wtmm: series length " + std::to_string(n) +
                                    " is below the minimum of 1024");
    }
    TimeSeries input = series;
    if (config.detrend) {
        const auto& v = series.values();
        const double slope = (v.back() - v.front()) / static_cast<double>(n - 1);
        std::vector<double> d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = v[i] - slope * static_cast<double>(i);
        input = TimeSeries(std::move(d), series.sample_interval());
    }
    const double max_scale =
        config.max_scale > 0.0 ? config.max_scale : static_cast<double>(n) / 8.0;
    WtmmResult result;
    result.scales = geometric_scale_grid(config.min_scale, max_scale, config.voices_per_octave);
    const CwtMatrix m = cwt(input, AnalyzingWavelet(config.wavelet_order), result.scales);
    const auto maxima = find_modulus_maxima(m, config.relative_floor);
    const auto lines = chain_maxima_lines(m, maxima, config.link_radius_factor);
    result.line_total = lines.size();
    if (lines.empty()) throw analysis_error("wtmm: no maxima lines found");
    const auto q = config.q_grid();
    result.partition = partition_function(lines, q, result.scales);
    const double fit_max =
        config.fit_max > 0.0 ? config.fit_max : std::min(1024.0, static_cast<double>(n) / 128.0);
    result.tau = estimate_tau(result.partition, config.fit_min, fit_max);
    result.spectrum = legendre_spectrum(result.tau);
    return result;
}

SingularSpectrum singular_spectrum(const TimeSeries& series, const WtmmConfig& config) {
    return run_wtmm(series, config).spectrum;
}

}  // namespace wcascade
