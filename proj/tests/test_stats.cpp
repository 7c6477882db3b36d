#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "wcascade/stats.hpp"

using namespace wcascade;

namespace {

double cauchy_loglik(const std::vector<double>& x, double s) {
    double l = 0.0;
    for (double v : x) l += -std::log(std::numbers::pi * s * (1.0 + v * v / (s * s)));
    return l;
}

}  // namespace

TEST_CASE("basic moments and quantiles") {
    const std::vector<double> v = {1, 2, 3, 4};
    CHECK(mean(v) == 2.5);
    CHECK(population_variance(v) == 1.25);
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 1.0) == 4.0);
    CHECK(quantile(v, 0.5) == 2.5);
    CHECK(quantile(std::vector<double>{4, 1, 3, 2}, 0.25) == doctest::Approx(1.75));
}

TEST_CASE("golden section finds the minimum of a parabola") {
    const double x = golden_section_minimize([](double t) { return (t - 0.7) * (t - 0.7); }, 0, 3);
    CHECK(x == doctest::Approx(0.7).epsilon(1e-7));
}

TEST_CASE("densities integrate to one and CDFs agree with densities") {
    for (auto f : {DensityFamily::cauchy, DensityFamily::student_t2, DensityFamily::normal}) {
        CAPTURE(to_string(f));
        const double s = 0.8;
        // trapezoid on [-a, a] compared with the CDF difference
        const double a = 30.0;
        const int n = 200000;
        double sum = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double x = -a + 2 * a * i / n;
            sum += (i == 0 || i == n ? 0.5 : 1.0) * family_density(f, s, x);
        }
        sum *= 2 * a / n;
        CHECK(sum == doctest::Approx(family_cdf(f, s, a) - family_cdf(f, s, -a)).epsilon(1e-6));
        CHECK(family_cdf(f, s, 0.0) == doctest::Approx(0.5));
    }
    CHECK(family_density(DensityFamily::cauchy, 1.0, 0.0) == doctest::Approx(1 / std::numbers::pi));
    CHECK(family_density(DensityFamily::student_t2, 1.0, 0.0) ==
          doctest::Approx(1 / (2 * std::sqrt(2.0))));
}

TEST_CASE("histogram spans the central 99 percent with 101 bins") {
    const auto x = testsupport::normals(1, 10000);
    const auto h = make_histogram(x);
    CHECK(h.centers.size() == 101);
    CHECK(h.edges.size() == 102);
    CHECK(h.edges.front() == doctest::Approx(quantile(x, 0.005)));
    CHECK(h.edges.back() == doctest::Approx(quantile(x, 0.995)));
    double mass = 0.0;
    for (double d : h.density) mass += d * h.width;
    CHECK(mass == doctest::Approx(0.99).epsilon(0.002));
}

TEST_CASE("Cauchy fit recovers the scale and agrees with the likelihood oracle") {
    const auto x = testsupport::cauchy_samples(7, 100000, 0.6);
    const auto fit = fit_cauchy(x);
    CHECK(fit.family == DensityFamily::cauchy);
    CHECK(fit.location == 0.0);
    CHECK(std::abs(fit.scale - 0.6) <= 0.05);

    double best_s = 0.0, best_l = -INFINITY;
    for (double s = 0.3; s <= 1.2; s += 0.001) {
        const double l = cauchy_loglik(x, s);
        if (l > best_l) {
            best_l = l;
            best_s = s;
        }
    }
    CHECK(std::abs(fit.scale - best_s) <= 0.1 * best_s);
}

TEST_CASE("Student t2 fit recovers sigma and beats it on its own data only") {
    const auto t2 = testsupport::t2_samples(8, 100000, 1.0);
    const auto fit = fit_student_t2(t2);
    CHECK(std::abs(fit.scale - 1.0) <= 0.05);

    const auto c = testsupport::cauchy_samples(9, 100000, 1.0);
    const auto h = make_histogram(c);
    const auto on_cauchy_t2 = fit_student_t2(c);
    const auto on_cauchy_c = fit_cauchy(c);
    CHECK(on_cauchy_t2.goodness > on_cauchy_c.goodness);
    CHECK(histogram_sse(DensityFamily::cauchy, on_cauchy_c.scale, h) ==
          doctest::Approx(on_cauchy_c.goodness));
}

TEST_CASE("density fits are scale equivariant and sign symmetric") {
    auto x = testsupport::t2_samples(10, 20000, 1.0);
    const auto base = fit_student_t2(x);
    const auto base_c = fit_cauchy(x);
    std::vector<double> scaled(x), flipped(x);
    for (auto& v : scaled) v *= 3.5;
    for (auto& v : flipped) v = -v;
    CHECK(fit_student_t2(scaled).scale == doctest::Approx(3.5 * base.scale).epsilon(1e-6));
    CHECK(fit_cauchy(scaled).scale == doctest::Approx(3.5 * base_c.scale).epsilon(1e-6));
    // the central-quantile range is not exactly mirror symmetric, so allow binning noise
    CHECK(fit_student_t2(flipped).scale == doctest::Approx(base.scale).epsilon(0.01));
    // with an explicit symmetric range the mirrored histogram is the same histogram
    HistogramSpec sym;
    sym.lo = -20.0;
    sym.hi = 20.0;
    CHECK(fit_student_t2(flipped, sym).scale ==
          doctest::Approx(fit_student_t2(x, sym).scale).epsilon(1e-6));
}

TEST_CASE("fits reject degenerate input") {
    CHECK_THROWS_AS(fit_cauchy(std::vector<double>(50, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(fit_cauchy(std::vector<double>(500, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(fit_normal(std::vector<double>(500, 2.0)), std::invalid_argument);
}

TEST_CASE("ols on an exact line") {
    const std::vector<double> x = {0, 1, 2, 3, 4};
    std::vector<double> y;
    for (double v : x) y.push_back(2 * v + 1);
    const auto r = ols(x, y);
    CHECK(r.slope == doctest::Approx(2));
    CHECK(r.intercept == doctest::Approx(1));
    CHECK(r.adj_r2 == 1.0);
    CHECK(r.stderr_slope == doctest::Approx(0).epsilon(1e-12));
    CHECK(r.stderr_intercept == doctest::Approx(0).epsilon(1e-12));
    CHECK(r.n == 5);
    CHECK_THROWS_AS(ols(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}),
                    std::invalid_argument);
    CHECK_THROWS_AS(ols(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                    std::invalid_argument);
}

TEST_CASE("ols matches a normal-equations oracle") {
    const std::size_t n = 500;
    const auto noise = testsupport::normals(12, n, 0.3);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = 0.01 * static_cast<double>(i) - 1.0;
        y[i] = -0.7 * x[i] + 0.25 + noise[i];
    }
    // [n Sx; Sx Sxx] [b; a] = [Sy; Sxy] by Cramer's rule
    double Sx = 0, Sxx = 0, Sy = 0, Sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Sx += x[i];
        Sxx += x[i] * x[i];
        Sy += y[i];
        Sxy += x[i] * y[i];
    }
    const double det = n * Sxx - Sx * Sx;
    const double a = (n * Sxy - Sx * Sy) / det;
    const double b = (Sxx * Sy - Sx * Sxy) / det;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) ssr += std::pow(y[i] - a * x[i] - b, 2);
    const double s2 = ssr / (n - 2);
    // covariance of (b, a) is s2 * inverse of the normal matrix
    const double var_a = s2 * n / det;
    const double var_b = s2 * Sxx / det;

    const auto r = ols(x, y);
    CHECK(std::abs(r.slope - a) <= 1e-10 * std::abs(a));
    CHECK(std::abs(r.intercept - b) <= 1e-10 * std::abs(b));
    CHECK(r.stderr_slope == doctest::Approx(std::sqrt(var_a)).epsilon(1e-10));
    CHECK(r.stderr_intercept == doctest::Approx(std::sqrt(var_b)).epsilon(1e-10));
    double sst = 0.0;
    for (double v : y) sst += std::pow(v - Sy / n, 2);
    const double r2 = 1 - ssr / sst;
    CHECK(r.r2 == doctest::Approx(r2).epsilon(1e-10));
    CHECK(r.adj_r2 == doctest::Approx(1 - (1 - r2) * (n - 1) / (n - 2)).epsilon(1e-10));
    CHECK(r.adj_r2 <= 1.0);

    // residuals are orthogonal to x and to the constant
    double rx = 0.0, r1 = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - r.slope * x[i] - r.intercept;
        rx += e * x[i];
        r1 += e;
        scale += std::abs(y[i] * x[i]);
    }
    CHECK(std::abs(rx) <= 1e-9 * scale);
    CHECK(std::abs(r1) <= 1e-9 * scale);
}

TEST_CASE("regression formatting with two decimals") {
    RegressionResult r;
    r.slope = 0.7219;
    r.intercept = 0.1251;
    r.stderr_slope = 0.0412;
    r.stderr_intercept = 0.0098;
    r.adj_r2 = 0.8849;
    CHECK(format_regression(r) == "a=0.72 b=0.13 std_a=0.04 std_b=0.01 adj_r2=0.88");
    CHECK(format_fixed(-0.004, 2) == "0.00");
    CHECK(format_fixed(1.005, 1) == "1.0");
}

TEST_CASE("pearson correlation") {
    const auto x = testsupport::normals(20, 10000);
    std::vector<double> neg(x);
    for (auto& v : neg) v = -v;
    CHECK(pearson_correlation(x, x) == doctest::Approx(1.0));
    CHECK(pearson_correlation(x, neg) == doctest::Approx(-1.0));
    const auto y = testsupport::normals(21, 10000);
    CHECK(std::abs(pearson_correlation(x, y)) < 0.05);
    CHECK_THROWS_AS(pearson_correlation(std::vector<double>(10, 1.0), x), std::invalid_argument);
}

TEST_CASE("binned conditional variance") {
    SUBCASE("homoskedastic successor gives a flat profile") {
        const auto x = testsupport::normals(30, 200000);
        const auto y = testsupport::normals(31, 200000, std::sqrt(0.4));
        const auto b = binned_conditional_variance(x, y, 0.2, 100);
        CHECK(b.total_count() == x.size());
        for (const auto& bin : b.main_bins()) CHECK(bin.variance == doctest::Approx(0.4).epsilon(0.35));
        CHECK(b.main_bins().size() < b.all_bins.size());
    }
    SUBCASE("multiplicative plus additive pairs follow 0.2 x^2 + 0.3") {
        const std::size_t n = 400000;
        const auto x = testsupport::normals(32, n);
        const auto w = testsupport::normals(33, n, std::sqrt(0.2));
        const auto e = testsupport::normals(34, n, std::sqrt(0.3));
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = w[i] * x[i] + e[i];
        const auto b = binned_conditional_variance(x, y, 0.2, 100);
        for (const auto& bin : b.main_bins()) {
            if (bin.count < 5000) continue;
            // within-bin spread of x adds 0.2 * w^2 / 12 to the variance at the centre
            const double expected = 0.2 * (bin.center * bin.center + 0.04 / 12) + 0.3;
            CAPTURE(bin.center);
            CHECK(bin.variance == doctest::Approx(expected).epsilon(0.05));
        }
    }
    SUBCASE("half-open bins and exclusion flags") {
        const std::vector<double> x = {0.0, 0.1999999, 0.2, -0.2, -1e-12};
        const std::vector<double> y = {1, 2, 3, 4, 5};
        const auto b = binned_conditional_variance(x, y, 0.2, 2);
        REQUIRE(b.all_bins.size() == 3);
        CHECK(b.all_bins[0].left == doctest::Approx(-0.2));
        CHECK(b.all_bins[0].count == 2);
        CHECK(b.all_bins[1].left == 0.0);
        CHECK(b.all_bins[1].count == 2);
        CHECK(b.all_bins[1].variance == doctest::Approx(0.25));
        CHECK(b.all_bins[2].count == 1);
        CHECK_FALSE(b.all_bins[2].included);
        CHECK(b.main_bins().size() == 2);
        CHECK(b.total_count() == 5);
    }
    SUBCASE("no bin reaching the threshold leaves a warning") {
        const std::vector<double> x = {0.0, 1.0, 2.0};
        const auto b = binned_conditional_variance(x, x, 0.2, 100);
        CHECK(b.main_bins().empty());
        CHECK_FALSE(b.warnings.empty());
    }
}
