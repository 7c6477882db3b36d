#include "wcascade/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wcascade {

namespace {

constexpr int kMultiplierChannel = 0;
constexpr int kAdditiveChannel = 1;

double population_std(std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

WaveletPyramid root_only(const CascadeSpec& spec) {
    WaveletPyramid p = WaveletPyramid::zeros(spec.depth, true);
    p.root_detail = spec.root_detail;
    p.root_approx = spec.root_approx;
    return p;
}

}  // namespace

MultiplierLaw MultiplierLaw::lognormal(double mean_log, double var_log, bool random_sign) {
    MultiplierLaw law;
    law.kind = Kind::lognormal;
    law.mean_log = mean_log;
    law.var_log = var_log;
    law.random_sign = random_sign;
    law.validate();
    return law;
}

MultiplierLaw MultiplierLaw::lognormal_log2_units(double mean_coeff, double var_coeff,
                                                  bool random_sign) {
    return lognormal(mean_coeff * std::numbers::ln2, var_coeff * std::numbers::ln2,
                     random_sign);
}

MultiplierLaw MultiplierLaw::point_mass(double magnitude, bool random_sign) {
    MultiplierLaw law;
    law.kind = Kind::point_mass;
    law.value = magnitude;
    law.random_sign = random_sign;
    law.validate();
    return law;
}

MultiplierLaw MultiplierLaw::cauchy(double scale) {
    MultiplierLaw law;
    law.kind = Kind::cauchy;
    law.scale = scale;
    law.random_sign = false;
    law.validate();
    return law;
}

double MultiplierLaw::sample(CounterRng& rng) const {
    switch (kind) {
        case Kind::lognormal: {
            const double s = random_sign ? rng.sign() : 1.0;
            return s * std::exp(mean_log + std::sqrt(var_log) * rng.normal());
        }
        case Kind::point_mass: {
            const double s = random_sign ? rng.sign() : 1.0;
            return s * value;
        }
        case Kind::cauchy:
            return scale * std::tan(std::numbers::pi * (rng.uniform() - 0.5));
    }
    return 0.0;
}

double MultiplierLaw::second_moment() const {
    switch (kind) {
        case Kind::lognormal:
            return std::exp(2.0 * mean_log + 2.0 * var_log);
        case Kind::point_mass:
            return value * value;
        case Kind::cauchy:
            return std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

void MultiplierLaw::validate() const {
    switch (kind) {
        case Kind::lognormal:
            if (!std::isfinite(mean_log) || !std::isfinite(var_log) || var_log < 0.0) {
                throw std::invalid_argument("lognormal multiplier: need finite mean and var >= 0");
            }
            break;
        case Kind::point_mass:
            if (!std::isfinite(value)) throw std::invalid_argument("point-mass multiplier: non-finite");
            break;
        case Kind::cauchy:
            if (!(scale > 0.0) || !std::isfinite(scale)) {
                throw std::invalid_argument("cauchy multiplier: scale must be positive");
            }
            break;
    }
}

AdditiveLaw AdditiveLaw::zero() { return {}; }

AdditiveLaw AdditiveLaw::normal(double variance) {
    AdditiveLaw law;
    law.kind = Kind::normal;
    law.variance = variance;
    law.validate();
    return law;
}

double AdditiveLaw::sample(CounterRng& rng) const {
    if (kind == Kind::zero) return 0.0;
    return std::sqrt(variance) * rng.normal();
}

void AdditiveLaw::validate() const {
    if (kind == Kind::normal && (!std::isfinite(variance) || variance < 0.0)) {
        throw std::invalid_argument("normal additive law: variance must be >= 0");
    }
}

void CascadeSpec::validate() const {
    if (depth < 1) throw std::invalid_argument("cascade depth must be >= 1");
    if (depth > 30) throw std::invalid_argument("cascade depth must be <= 30");
    if (!std::isfinite(root_detail) || !std::isfinite(root_approx)) {
        throw std::invalid_argument("cascade root coefficients must be finite");
    }
    multiplier_law.validate();
    additive_law.validate();
}

double draw_multiplier(const CascadeSpec& spec, int parent_layer, std::size_t k, Side side) {
    CounterRng rng(spec.seed,
                   stream_key(parent_layer, k, static_cast<int>(side), kMultiplierChannel));
    return spec.multiplier_law.sample(rng);
}

double draw_additive(const CascadeSpec& spec, int parent_layer, std::size_t k, Side side) {
    CounterRng rng(spec.seed,
                   stream_key(parent_layer, k, static_cast<int>(side), kAdditiveChannel));
    return spec.additive_law.sample(rng);
}

double layer_std(const WaveletPyramid& pyramid, int j) {
    if (j == 0) return std::abs(pyramid.root_detail);
    return population_std(pyramid.layer(j));
}

LayerStats layer_stats(const WaveletPyramid& pyramid) {
    LayerStats stats;
    for (int j = 0; j < pyramid.depth; ++j) {
        const auto l = pyramid.layer(j);
        double mean = 0.0;
        for (double x : l) mean += x;
        stats.mean.push_back(mean / static_cast<double>(l.size()));
        stats.std_dev.push_back(layer_std(pyramid, j));
    }
    return stats;
}

WaveletPyramid synthesize_wcascade(const CascadeSpec& spec) {
    spec.validate();
    if (spec.additive_law.kind != AdditiveLaw::Kind::zero) {
        throw std::invalid_argument(
            "synthesize_wcascade: additive law must be zero; use synthesize_mixed");
    }
    WaveletPyramid p = root_only(spec);
    for (int j = 0; j + 1 < spec.depth; ++j) {
        const auto parent = p.layer(j);
        auto child = p.layer(j + 1);
        for (std::size_t k = 0; k < parent.size(); ++k) {
            child[2 * k] = draw_multiplier(spec, j, k, Side::left) * parent[k];
            child[2 * k + 1] = draw_multiplier(spec, j, k, Side::right) * parent[k];
        }
    }
    return p;
}

WaveletPyramid synthesize_mixed(const CascadeSpec& spec) {
    spec.validate();
    const bool additive = spec.additive_law.kind != AdditiveLaw::Kind::zero;
    WaveletPyramid p = root_only(spec);
    for (int j = 0; j + 1 < spec.depth; ++j) {
        const double h = layer_std(p, j);
        const auto parent = p.layer(j);
        auto child = p.layer(j + 1);
        for (std::size_t k = 0; k < parent.size(); ++k) {
            for (Side side : {Side::left, Side::right}) {
                double v = draw_multiplier(spec, j, k, side) * parent[k];
                if (additive) v += draw_additive(spec, j, k, side) * h;
                child[2 * k + static_cast<std::size_t>(side)] = v;
            }
        }
    }
    return p;
}

WaveletPyramid synthesize(const CascadeSpec& spec) {
    return spec.additive_law.kind == AdditiveLaw::Kind::zero ? synthesize_wcascade(spec)
                                                             : synthesize_mixed(spec);
}

double theoretical_tau_lognormal(double mean_log, double var_log, double q) {
    return -(q * mean_log + 0.5 * q * q * var_log) / std::numbers::ln2 - 1.0;
}

SingularSpectrum theoretical_spectrum_lognormal(double mean_log, double var_log,
                                                std::span<const double> alpha_grid) {
    if (!(var_log > 0.0)) {
        throw std::invalid_argument(
            "theoretical spectrum needs var > 0; with var = 0 it degenerates to the point "
            "alpha = -m / ln2, D = 1");
    }
    const double ln2 = std::numbers::ln2;
    const double alpha0 = -mean_log / ln2;
    SingularSpectrum s;
    for (double a : alpha_grid) {
        const double q = -(a * ln2 + mean_log) / var_log;
        s.q.push_back(q);
        s.tau.push_back(theoretical_tau_lognormal(mean_log, var_log, q));
        s.tau_stderr.push_back(0.0);
        s.alpha.push_back(a);
        s.D.push_back(std::max(0.0, 1.0 - (a - alpha0) * (a - alpha0) * ln2 / (2.0 * var_log)));
    }
    const double half_width = std::sqrt(2.0 * var_log / ln2);
    s.support_min = alpha0 - half_width;
    s.support_max = alpha0 + half_width;
    s.peak_alpha = alpha0;
    return s;
}

}  // namespace wcascade
