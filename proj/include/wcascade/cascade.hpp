#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wcascade/dwt.hpp"
#include "wcascade/rng.hpp"
#include "wcascade/spectrum.hpp"

namespace wcascade {

// Law of the multiplicative factor W. Parameters are in natural-log units.
struct MultiplierLaw {
    enum class Kind { lognormal, point_mass, cauchy };

    Kind kind = Kind::point_mass;
    double mean_log = 0.0;  // lognormal: E log|W|
    double var_log = 0.0;   // lognormal: Var log|W|
    double value = 1.0;     // point_mass: |W|
    double scale = 1.0;     // cauchy
    // Independent fair sign on W. Ignored for the (already symmetric) Cauchy law.
    // A lognormal without random sign is the folded lognormal W = |W|.
    bool random_sign = true;

    static MultiplierLaw lognormal(double mean_log, double var_log, bool random_sign = true);
    // Parameters given as multiples of ln 2, as in "log|W| ~ N(-0.33 log2, 0.02 log2)".
    static MultiplierLaw lognormal_log2_units(double mean_coeff, double var_coeff,
                                              bool random_sign = true);
    static MultiplierLaw point_mass(double magnitude, bool random_sign = true);
    static MultiplierLaw cauchy(double scale);

    double sample(CounterRng& rng) const;
    // E[W^2]; infinite for Cauchy.
    double second_moment() const;
    void validate() const;
};

// Law of the additive factor eta (always zero-mean).
struct AdditiveLaw {
    enum class Kind { zero, normal };

    Kind kind = Kind::zero;
    double variance = 0.0;

    static AdditiveLaw zero();
    static AdditiveLaw normal(double variance);

    double sample(CounterRng& rng) const;
    void validate() const;
};

struct CascadeSpec {
    int depth = 10;
    double root_detail = 1.0;
    double root_approx = 0.0;
    MultiplierLaw multiplier_law;
    AdditiveLaw additive_law;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class Side { left = 0, right = 1 };

// Draws are keyed by (seed, parent layer, parent index, side) so any single factor
// can be regenerated independently of the synthesis loop.
double draw_multiplier(const CascadeSpec& spec, int parent_layer, std::size_t k, Side side);
double draw_additive(const CascadeSpec& spec, int parent_layer, std::size_t k, Side side);

struct LayerStats {
    std::vector<double> mean;
    // Population standard deviation (divisor n). Layer 0 uses |root detail|.
    std::vector<double> std_dev;
};

// Population standard deviation of layer j; |root detail| for j = 0.
double layer_std(const WaveletPyramid& pyramid, int j);
LayerStats layer_stats(const WaveletPyramid& pyramid);

// Pure multiplicative cascade: d~_{j+1,2k} = W^l d~_{j,k}, d~_{j+1,2k+1} = W^r d~_{j,k}.
// Requires a zero additive law.
WaveletPyramid synthesize_wcascade(const CascadeSpec& spec);

// Mixed cascade: d~_{j+1,2k+e} = W^e d~_{j,k} + eta^e h_j with h_j the population
// standard deviation of the finished layer j.
WaveletPyramid synthesize_mixed(const CascadeSpec& spec);

// Picks the pure or mixed generator from the additive law.
WaveletPyramid synthesize(const CascadeSpec& spec);

// tau(q) = -log2 E|W|^q - 1 for log|W| ~ N(m, var), natural-log units.
double theoretical_tau_lognormal(double mean_log, double var_log, double q);

// Closed-form Legendre transform of theoretical_tau_lognormal:
// D(alpha) = 1 - (alpha - alpha0)^2 ln2 / (2 var), alpha0 = -m / ln2, clamped at 0.
SingularSpectrum theoretical_spectrum_lognormal(double mean_log, double var_log,
                                                std::span<const double> alpha_grid);

}  // namespace wcascade
