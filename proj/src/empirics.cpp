#include "wcascade/empirics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "wcascade/error.hpp"

namespace wcascade {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

WaveletPyramid as_rescaled(const WaveletPyramid& p) {
    return p.rescaled ? p : rescale(p, RescaleDirection::to_rescaled);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

void ReturnPanel::validate() const {
    if (issues.empty()) throw std::invalid_argument("panel has no issues");
    if (prices.size() != issues.size()) {
        throw std::invalid_argument("panel: one price column per issue required");
    }
    const std::size_t n = rows();
    if (n < 2) throw std::invalid_argument("panel needs at least two rows");
    if (!timestamps.empty() && timestamps.size() != n) {
        throw std::invalid_argument("panel: timestamp count does not match row count");
    }
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (prices[i].size() != n) {
            throw std::invalid_argument("panel: issue " + issues[i] + " has a ragged column");
        }
        for (double p : prices[i]) {
            if (!(p > 0.0) || !std::isfinite(p)) {
                throw std::invalid_argument("panel: issue " + issues[i] +
                                            " has a non-positive or non-finite price");
            }
        }
    }
    if (day_starts.empty() || day_starts.front() != 0) {
        throw std::invalid_argument("panel: day boundaries must start at row 0");
    }
    for (std::size_t d = 1; d < day_starts.size(); ++d) {
        if (day_starts[d] <= day_starts[d - 1] || day_starts[d] >= n) {
            throw std::invalid_argument("panel: day boundaries must be increasing row indices");
        }
    }
}

DeseasonalizedReturns deseasonalize_returns(const ReturnPanel& panel, int dt) {
    panel.validate();
    if (dt < 1) throw std::invalid_argument("deseasonalize_returns: dt must be >= 1");

    // Return end rows: within a day, every dt-th row after the day's first row.
    std::vector<std::size_t> ends;
    for (std::size_t d = 0; d < panel.day_starts.size(); ++d) {
        const std::size_t begin = panel.day_starts[d];
        const std::size_t end =
            d + 1 < panel.day_starts.size() ? panel.day_starts[d + 1] : panel.rows();
        for (std::size_t t = begin + dt; t < end; t += dt) ends.push_back(t);
    }
    if (ends.size() < 2) {
        throw std::invalid_argument("deseasonalize_returns: fewer than two intraday returns");
    }

    DeseasonalizedReturns out;
    out.values.assign(ends.size(), 0.0);
    out.slots.reserve(ends.size());
    for (std::size_t t : ends) out.slots.push_back(panel.minute_of_day[t]);

    const double n_issues = static_cast<double>(panel.issues.size());
    for (std::size_t i = 0; i < panel.issues.size(); ++i) {
        const auto& p = panel.prices[i];
        std::vector<double> r(ends.size());
        for (std::size_t m = 0; m < ends.size(); ++m) {
            r[m] = std::log(p[ends[m]]) - std::log(p[ends[m] - dt]);
        }
        const double global_sd = std::sqrt(population_variance(r));
        if (!(global_sd > 0.0)) {
            throw std::invalid_argument("deseasonalize_returns: issue " + panel.issues[i] +
                                        " has zero return variance");
        }

        std::map<int, std::vector<double>> by_slot;
        for (std::size_t m = 0; m < r.size(); ++m) by_slot[out.slots[m]].push_back(r[m]);
        std::map<int, double> slot_sd;
        std::size_t fallbacks = 0;
        for (const auto& [slot, xs] : by_slot) {
            double sd = xs.size() >= 2 ? std::sqrt(population_variance(xs)) : 0.0;
            if (!(sd > 0.0)) {
                sd = global_sd;
                ++fallbacks;
            }
            slot_sd[slot] = sd;
        }
        if (fallbacks > 0) {
            out.warnings.push_back("issue " + panel.issues[i] + ": " + std::to_string(fallbacks) +
                                   " time-of-day slot(s) use the global sigma");
        }

        for (std::size_t m = 0; m < r.size(); ++m) r[m] /= slot_sd[out.slots[m]];
        const double mu = mean(r);
        const double sd = std::sqrt(population_variance(r));
        if (!(sd > 0.0)) {
            throw std::invalid_argument("deseasonalize_returns: issue " + panel.issues[i] +
                                        " is degenerate after deseasonalization");
        }
        for (std::size_t m = 0; m < r.size(); ++m) out.values[m] += (r[m] - mu) / sd / n_issues;
    }
    return out;
}

TimeSeries accumulate_path(std::span<const double> deltas) {
    if (deltas.size() < 2) throw std::invalid_argument("accumulate_path: need at least two deltas");
    std::size_t n = 1;
    while (n * 2 <= deltas.size()) n *= 2;
    const auto recent = deltas.subspan(deltas.size() - n);
    std::vector<double> path(n);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(recent[k])) throw std::invalid_argument("accumulate_path: non-finite delta");
        acc += recent[k];
        path[k] = acc;
    }
    return TimeSeries(std::move(path));
}

std::size_t MultiplierTransition::unmasked() const {
    return static_cast<std::size_t>(std::count(masked.begin(), masked.end(), false));
}

MultiplierSet extract_multipliers(const WaveletPyramid& pyramid, double zero_tol) {
    pyramid.validate();
    if (!(zero_tol >= 0.0)) throw std::invalid_argument("extract_multipliers: zero_tol must be >= 0");
    const WaveletPyramid p = as_rescaled(pyramid);

    MultiplierSet out;
    out.zero_tol = zero_tol;
    for (int j = 0; j + 1 < p.depth; ++j) {
        const auto parent = p.layer(j);
        const auto child = p.layer(j + 1);
        const double h = layer_std(p, j);
        MultiplierTransition t;
        t.parent_layer = j;
        t.left.assign(parent.size(), kNaN);
        t.right.assign(parent.size(), kNaN);
        t.masked.assign(parent.size(), true);
        for (std::size_t k = 0; k < parent.size(); ++k) {
            const double d = parent[k];
            if (d == 0.0 || !(std::abs(d) > zero_tol * h)) continue;
            t.masked[k] = false;
            t.left[k] = child[2 * k] / d;
            t.right[k] = child[2 * k + 1] / d;
        }
        if (t.unmasked() == 0) {
            out.warnings.push_back("transition " + std::to_string(j) + "->" +
                                   std::to_string(j + 1) + " is entirely masked");
        }
        out.transitions.push_back(std::move(t));
    }
    return out;
}

const CorrelationRow* CorrelationTable::find(int layer) const {
    for (const auto& r : rows) {
        if (r.layer == layer) return &r;
    }
    return nullptr;
}

namespace {

bool try_pearson(const std::vector<double>& x, const std::vector<double>& y, double& r) {
    try {
        r = pearson_correlation(x, y);
        return std::isfinite(r);
    } catch (const std::invalid_argument&) {
        return false;
    }
}

}  // namespace

CorrelationTable multiplier_correlations(const MultiplierSet& ms, const WaveletPyramid& pyramid,
                                         std::size_t min_pairs) {
    if (ms.transitions.size() < 2) {
        throw std::invalid_argument("multiplier_correlations: need at least two transitions");
    }
    const WaveletPyramid p = as_rescaled(pyramid);
    if (static_cast<std::size_t>(p.depth) != ms.transitions.size() + 1) {
        throw std::invalid_argument("multiplier_correlations: pyramid does not match multiplier set");
    }

    CorrelationTable table;
    for (int j = 1; j + 1 < p.depth; ++j) {
        const auto& in = ms.transitions[j - 1];
        const auto& out = ms.transitions[j];
        const auto coeff = p.layer(j);
        CorrelationRow row;
        row.layer = j;

        std::vector<double> xs, ys, xp, yp;
        for (std::size_t k = 0; k < coeff.size(); ++k) {
            if (out.masked[k]) continue;
            for (double w_out : {out.left[k], out.right[k]}) {
                if (w_out == 0.0) continue;
                const double lw = std::log(std::abs(w_out));
                if (coeff[k] != 0.0) {
                    xp.push_back(std::log(std::abs(coeff[k])));
                    yp.push_back(lw);
                }
                if (!in.masked[k / 2]) {
                    const double w_in = (k % 2 == 0) ? in.left[k / 2] : in.right[k / 2];
                    if (w_in != 0.0) {
                        xs.push_back(std::log(std::abs(w_in)));
                        ys.push_back(lw);
                    }
                }
            }
        }

        const std::string tag = "layer " + std::to_string(j) + ": ";
        row.successive_pairs = xs.size();
        if (xs.size() < min_pairs) {
            table.warnings.push_back(tag + "successive-multiplier correlation omitted (" +
                                     std::to_string(xs.size()) + " pairs)");
        } else if (!try_pearson(xs, ys, row.successive_r)) {
            row.successive_r = 0.0;
            table.warnings.push_back(tag + "successive-multiplier correlation undefined (constant factors)");
        } else {
            row.successive_valid = true;
        }

        row.parent_pairs = xp.size();
        if (xp.size() < min_pairs) {
            table.warnings.push_back(tag + "parent-multiplier correlation omitted (" +
                                     std::to_string(xp.size()) + " pairs)");
        } else if (!try_pearson(xp, yp, row.parent_r)) {
            row.parent_r = 0.0;
            table.warnings.push_back(tag + "parent-multiplier correlation undefined (constant input)");
        } else {
            row.parent_valid = true;
        }
        table.rows.push_back(row);
    }
    return table;
}

std::vector<double> default_H_grid() {
    std::vector<double> g(101);
    for (int i = 0; i <= 100; ++i) g[i] = i / 100.0;
    return g;
}

double ks_statistic_scaled(std::span<const double> a, double ca, std::span<const double> b,
                           double cb) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    if (!(ca > 0.0) || !(cb > 0.0)) throw std::invalid_argument("ks_statistic: scales must be positive");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() || j < b.size()) {
        double v;
        if (i == a.size()) v = cb * b[j];
        else if (j == b.size()) v = ca * a[i];
        else v = std::min(ca * a[i], cb * b[j]);
        // Point-mass layers are two-point laws whose rescaled atoms coincide only up
        // to rounding; equal values must advance both empirical CDFs together.
        const double limit = v + 1e-9 * std::abs(v);
        while (i < a.size() && ca * a[i] <= limit) ++i;
        while (j < b.size() && cb * b[j] <= limit) ++j;
        d = std::max(d, std::abs(i / na - j / nb));
    }
    return d;
}

CollapseResult collapse_H(const WaveletPyramid& pyramid, std::span<const double> H_grid,
                          std::size_t min_layer_size) {
    pyramid.validate();
    if (H_grid.empty()) throw std::invalid_argument("collapse_H: empty H grid");
    for (std::size_t i = 0; i < H_grid.size(); ++i) {
        if (!std::isfinite(H_grid[i]) || (i > 0 && !(H_grid[i] > H_grid[i - 1]))) {
            throw std::invalid_argument("collapse_H: H grid must be finite and strictly increasing");
        }
    }
    const WaveletPyramid p = as_rescaled(pyramid);

    CollapseResult out;
    std::vector<std::vector<double>> samples;
    std::vector<double> scales;
    for (int j = 0; j < p.depth; ++j) {
        const auto layer = p.layer(j);
        if (layer.size() < min_layer_size) continue;
        std::vector<double> v(layer.begin(), layer.end());
        std::sort(v.begin(), v.end());
        samples.push_back(std::move(v));
        scales.push_back(p.scale(j));
        out.layers_used.push_back(j);
    }
    if (samples.size() < 3) {
        throw std::invalid_argument("collapse_H: need at least three layers with " +
                                    std::to_string(min_layer_size) + " coefficients");
    }

    out.H_grid.assign(H_grid.begin(), H_grid.end());
    out.curve.reserve(H_grid.size());
    std::size_t best = 0;
    for (std::size_t h = 0; h < H_grid.size(); ++h) {
        double total = 0.0;
        std::size_t pairs = 0;
        for (std::size_t a = 0; a < samples.size(); ++a) {
            for (std::size_t b = a + 1; b < samples.size(); ++b) {
                total += ks_statistic_scaled(samples[a], std::pow(scales[a], -H_grid[h]), samples[b],
                                             std::pow(scales[b], -H_grid[h]));
                ++pairs;
            }
        }
        out.curve.push_back(total / static_cast<double>(pairs));
        if (out.curve[h] < out.curve[best]) best = h;
    }
    out.H = H_grid[best];
    out.distance = out.curve[best];
    if (H_grid.size() > 1 && (best == 0 || best + 1 == H_grid.size())) {
        out.at_boundary = true;
        out.warnings.push_back("collapse minimum at the edge of the H grid (H=" + fmt(out.H) + ")");
    }
    return out;
}

const VarianceRow* VarianceEstimate::find(int parent_layer, Side side) const {
    for (const auto& r : rows) {
        if (r.parent_layer == parent_layer && r.side == side) return &r;
    }
    return nullptr;
}

VarianceEstimate estimate_variances(const WaveletPyramid& pyramid, const VarianceOptions& options) {
    pyramid.validate();
    if (!(options.bin_width > 0.0)) throw std::invalid_argument("estimate_variances: bin width must be > 0");
    const WaveletPyramid p = as_rescaled(pyramid);

    VarianceEstimate out;
    for (int j = 0; j + 1 < p.depth; ++j) {
        const auto parent = p.layer(j);
        if (parent.size() < options.min_layer_size) continue;
        const auto child = p.layer(j + 1);
        const double h = layer_std(p, j);
        const double h_next = layer_std(p, j + 1);
        const std::string tag =
            "transition " + std::to_string(j) + "->" + std::to_string(j + 1) + ": ";
        if (!(h > 0.0)) {
            out.warnings.push_back(tag + "parent layer has zero spread, omitted");
            continue;
        }

        std::vector<double> x(parent.size());
        for (std::size_t k = 0; k < parent.size(); ++k) x[k] = parent[k] / h;

        for (Side side : {Side::left, Side::right}) {
            std::vector<double> y(parent.size());
            for (std::size_t k = 0; k < parent.size(); ++k) {
                y[k] = child[2 * k + static_cast<std::size_t>(side)] / h;
            }
            VarianceRow row;
            row.parent_layer = j;
            row.side = side;
            row.h_parent = h;
            row.h_child = h_next;
            row.layer_ratio = (h_next / h) * (h_next / h);
            row.bins = binned_conditional_variance(x, y, options.bin_width, options.min_count);

            std::vector<double> bx, by;
            for (const auto& b : row.bins.main_bins()) {
                bx.push_back(b.center * b.center);
                by.push_back(b.variance);
            }
            const std::string side_tag = tag + (side == Side::left ? "l: " : "r: ");
            if (bx.size() < 3) {
                out.warnings.push_back(side_tag + "fewer than 3 usable bins, omitted");
                continue;
            }
            try {
                row.fit = ols(bx, by);
            } catch (const std::invalid_argument& e) {
                out.warnings.push_back(side_tag + "regression failed (" + e.what() + "), omitted");
                continue;
            }
            row.var_w = row.fit.slope;
            row.var_eta = row.fit.intercept;
            if (row.var_w < 0.0 || row.var_eta < 0.0) {
                row.clamped = true;
                row.var_w = std::max(0.0, row.var_w);
                row.var_eta = std::max(0.0, row.var_eta);
                out.warnings.push_back(side_tag + "negative variance estimate clamped to 0");
            }
            row.identity_residual = std::abs(row.layer_ratio - row.var_w - row.var_eta);
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

}  // namespace wcascade
