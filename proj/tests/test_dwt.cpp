#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "support.hpp"
#include "wcascade/dwt.hpp"

using namespace wcascade;

namespace {

// Rows of the orthonormal analysis matrix, built by composing shifted filters level
// by level. detail[j] holds the 2^j rows of layer j (j = 0 is the root detail).
struct AnalysisMatrix {
    std::vector<double> approx;
    std::vector<std::vector<std::vector<double>>> detail;
};

AnalysisMatrix analysis_matrix(const WaveletBasis& basis, std::size_t L) {
    const auto& h = basis.low_pass();
    const auto& g = basis.high_pass();
    std::vector<std::vector<double>> rows(L, std::vector<double>(L, 0.0));
    for (std::size_t i = 0; i < L; ++i) rows[i][i] = 1.0;

    AnalysisMatrix m;
    std::vector<std::vector<std::vector<double>>> details;
    for (std::size_t n = L; n >= 2; n /= 2) {
        std::vector<std::vector<double>> a(n / 2, std::vector<double>(L, 0.0));
        std::vector<std::vector<double>> d(n / 2, std::vector<double>(L, 0.0));
        for (std::size_t k = 0; k < n / 2; ++k) {
            for (std::size_t t = 0; t < h.size(); ++t) {
                const auto& src = rows[(2 * k + t) % n];
                for (std::size_t c = 0; c < L; ++c) {
                    a[k][c] += h[t] * src[c];
                    d[k][c] += g[t] * src[c];
                }
            }
        }
        details.insert(details.begin(), d);
        rows = std::move(a);
    }
    m.approx = rows[0];
    m.detail = std::move(details);
    return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

WaveletPyramid random_pyramid(int depth, std::uint64_t seed) {
    WaveletPyramid p = WaveletPyramid::zeros(depth, false);
    const auto v = testsupport::normals(seed, p.length());
    std::size_t i = 0;
    p.root_approx = v[i++];
    p.root_detail = v[i++];
    for (auto& layer : p.layers) {
        for (auto& x : layer) x = v[i++];
    }
    return p;
}

}  // namespace

TEST_CASE("basis filters satisfy orthonormality and moment conditions") {
    const auto d4 = WaveletBasis::daubechies4();
    const auto& h = d4.low_pass();
    const auto& g = d4.high_pass();
    REQUIRE(h.size() == 4);
    CHECK(dot(h, h) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(h[0] * h[2] + h[1] * h[3]) < 1e-15);
    CHECK(h[0] + h[1] + h[2] + h[3] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(g[k] == (k % 2 == 0 ? 1.0 : -1.0) * h[3 - k]);
    }
    double m0 = 0.0, m1 = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
        m0 += g[k];
        m1 += static_cast<double>(k) * g[k];
    }
    CHECK(std::abs(m0) < 1e-14);
    CHECK(std::abs(m1) < 1e-14);

    CHECK_THROWS_AS(WaveletBasis({0.5, 0.5}, 1), std::invalid_argument);
    CHECK_THROWS_AS(WaveletBasis(WaveletBasis::haar().low_pass(), 2), std::invalid_argument);
}

TEST_CASE("time series rejects bad lengths and values") {
    CHECK_THROWS_AS(TimeSeries(std::vector<double>(6, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(TimeSeries(std::vector<double>(1, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(TimeSeries({1.0, NAN}), std::invalid_argument);
    CHECK_THROWS_AS(TimeSeries({1.0, INFINITY, 0.0, 0.0}), std::invalid_argument);
    CHECK(TimeSeries(std::vector<double>(16, 0.0)).depth() == 4);
}

TEST_CASE("constant series has zero details and root approximation sqrt(L)") {
    const auto p = dwt_forward(TimeSeries(std::vector<double>(8, 1.0)), WaveletBasis::daubechies4());
    CHECK_FALSE(p.rescaled);
    CHECK(std::abs(std::abs(p.root_approx) - std::sqrt(8.0)) < 1e-14);
    CHECK(std::abs(p.root_detail) < 1e-14);
    for (const auto& layer : p.layers) {
        for (double d : layer) CHECK(std::abs(d) < 1e-14);
    }
    for (int j = 1; j < p.depth; ++j) CHECK(p.layer(j).size() == (std::size_t{1} << j));
    CHECK(p.scale(1) == 4.0);
    CHECK(p.scale(2) == 2.0);
}

TEST_CASE("inverse of the constant pyramid is a constant series") {
    auto p = WaveletPyramid::zeros(3, false);
    p.root_approx = std::sqrt(8.0);
    const auto ts = dwt_inverse(p, WaveletBasis::daubechies4());
    REQUIRE(ts.size() == 8);
    for (double x : ts.values()) CHECK(x == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("forward transform matches the analysis-matrix oracle") {
    const std::size_t L = 1024;
    const auto basis = WaveletBasis::daubechies4();
    const auto m = analysis_matrix(basis, L);
    const auto x = testsupport::normals(11, L);
    const auto p = dwt_forward(TimeSeries(x), basis);

    double scale = 0.0;
    for (double v : x) scale = std::max(scale, std::abs(v));
    double worst = std::abs(dot(m.approx, x) - p.root_approx);
    worst = std::max(worst, std::abs(dot(m.detail[0][0], x) - p.root_detail));
    for (int j = 1; j < p.depth; ++j) {
        for (std::size_t k = 0; k < m.detail[j].size(); ++k) {
            worst = std::max(worst, std::abs(dot(m.detail[j][k], x) - p.layer(j)[k]));
        }
    }
    CHECK(worst <= 1e-10 * scale);

    // The oracle itself is orthonormal.
    CHECK(dot(m.detail[5][3], m.detail[5][3]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(dot(m.detail[5][3], m.detail[6][7])) < 1e-12);
    CHECK(std::abs(dot(m.approx, m.detail[9][100])) < 1e-12);
}

TEST_CASE("a unit detail coefficient synthesizes the matrix-oracle basis vector") {
    const std::size_t L = 64;
    const auto basis = WaveletBasis::daubechies4();
    const auto m = analysis_matrix(basis, L);
    auto p = WaveletPyramid::zeros(6, false);
    p.layers[0][0] = 1.0;  // layer j = 1, k = 0
    const auto ts = dwt_inverse(p, basis);
    for (std::size_t i = 0; i < L; ++i) CHECK(std::abs(ts.values()[i] - m.detail[1][0][i]) < 1e-13);
}

TEST_CASE("perfect reconstruction and Parseval across lengths") {
    const auto basis = WaveletBasis::daubechies4();
    for (int J = 3; J <= 17; ++J) {
        CAPTURE(J);
        const auto x = testsupport::normals(100 + J, std::size_t{1} << J);
        const auto p = dwt_forward(TimeSeries(x), basis);
        const auto y = dwt_inverse(p, basis).values();
        double err = 0.0, energy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            err = std::max(err, std::abs(x[i] - y[i]));
            energy += x[i] * x[i];
        }
        CHECK(err <= 1e-10 * testsupport::max_abs(x));
        double coeff = p.root_approx * p.root_approx + p.root_detail * p.root_detail;
        for (const auto& layer : p.layers) {
            for (double d : layer) coeff += d * d;
        }
        CHECK(std::abs(energy - coeff) <= 1e-9 * energy);
    }
}

TEST_CASE("random pyramid round trip through synthesis and analysis") {
    const auto basis = WaveletBasis::daubechies4();
    const auto p = random_pyramid(10, 3);
    const auto q = dwt_forward(dwt_inverse(p, basis), basis);
    double worst = std::abs(p.root_approx - q.root_approx);
    worst = std::max(worst, std::abs(p.root_detail - q.root_detail));
    for (std::size_t j = 0; j < p.layers.size(); ++j) {
        for (std::size_t k = 0; k < p.layers[j].size(); ++k) {
            worst = std::max(worst, std::abs(p.layers[j][k] - q.layers[j][k]));
        }
    }
    CHECK(worst < 1e-10);

    // A rescaled pyramid is unrescaled before synthesis.
    const auto r = rescale(p, RescaleDirection::to_rescaled);
    const auto a = dwt_inverse(p, basis).values();
    const auto b = dwt_inverse(r, basis).values();
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
}

TEST_CASE("linear ramp: details vanish wherever the support avoids the wrap") {
    const std::size_t L = 256;
    const auto basis = WaveletBasis::daubechies4();
    const auto m = analysis_matrix(basis, L);
    std::vector<double> ramp(L);
    for (std::size_t i = 0; i < L; ++i) ramp[i] = static_cast<double>(i);
    double norm = std::sqrt(dot(ramp, ramp));
    const auto p = dwt_forward(TimeSeries(ramp), basis);

    std::size_t interior = 0, boundary_nonzero = 0;
    for (int j = 1; j < p.depth; ++j) {
        for (std::size_t k = 0; k < p.layer(j).size(); ++k) {
            const auto& row = m.detail[j][k];
            const bool wraps = row.front() != 0.0 && row.back() != 0.0;
            if (wraps) {
                if (std::abs(p.layer(j)[k]) > 1e-9 * norm) ++boundary_nonzero;
            } else {
                ++interior;
                CHECK(std::abs(p.layer(j)[k]) <= 1e-9 * norm);
            }
        }
    }
    CHECK(interior > L / 2);
    CHECK(boundary_nonzero > 0);
}

TEST_CASE("rescaling multiplies layer j by 2^{j/2} and is an involution") {
    auto p = WaveletPyramid::zeros(5, false);
    for (double& x : p.layers[2]) x = 1.0;  // layer 3
    const auto r = rescale(p, RescaleDirection::to_rescaled);
    CHECK(r.rescaled);
    for (double x : r.layer(3)) CHECK(x == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-15));
    CHECK_THROWS_AS(rescale(r, RescaleDirection::to_rescaled), std::invalid_argument);
    CHECK_THROWS_AS(rescale(p, RescaleDirection::to_raw), std::invalid_argument);

    const auto q = random_pyramid(12, 5);
    const auto back = rescale(rescale(q, RescaleDirection::to_rescaled), RescaleDirection::to_raw);
    for (std::size_t j = 0; j < q.layers.size(); ++j) {
        for (std::size_t k = 0; k < q.layers[j].size(); ++k) {
            CHECK(back.layers[j][k] == doctest::Approx(q.layers[j][k]).epsilon(1e-15));
        }
    }
    CHECK(back.root_detail == q.root_detail);

    const auto rq = rescale(q, RescaleDirection::to_rescaled);
    for (int j = 1; j < q.depth; ++j) {
        double a = 0.0, b = 0.0;
        for (double x : q.layer(j)) a += x * x;
        for (double x : rq.layer(j)) b += x * x;
        CHECK(std::sqrt(b / a) == doctest::Approx(std::pow(2.0, j / 2.0)).epsilon(1e-12));
    }
}

TEST_CASE("malformed pyramids are rejected") {
    auto p = WaveletPyramid::zeros(4, false);
    p.layers[1].pop_back();
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    CHECK_THROWS_AS(dwt_inverse(p, WaveletBasis::daubechies4()), std::invalid_argument);
    auto q = WaveletPyramid::zeros(4, false);
    q.layers[0][1] = NAN;
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}
