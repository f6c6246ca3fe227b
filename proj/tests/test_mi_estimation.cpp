#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "leakbound/likelihood.hpp"
#include "leakbound/mi_estimation.hpp"

using namespace leakbound;

namespace {

LeakageConfig make_config(unsigned ell, bool masked, double sigma2, SboxKind kind = SboxKind::identity)
{
    const FieldParams field(ell);
    return LeakageConfig(field, sbox_build(kind, field, 9), masked, sigma2);
}

double combined(double a, double b) { return std::sqrt(a * a + b * b); }

}  // namespace

TEST(NoiseEntropy, Examples)
{
    EXPECT_NEAR(noise_entropy(1.0 / (2 * std::numbers::pi * std::numbers::e), 1), 0.0, 1e-15);
    EXPECT_EQ(noise_entropy(3.0, 0), 0.0);
    // log2(2 pi e), 40-digit reference
    EXPECT_NEAR(noise_entropy(1.0, 2), 4.094191170361282, 1e-12);
    EXPECT_THROW(noise_entropy(0.0, 1), std::invalid_argument);
}

TEST(EstimateMiCurves, EmptyPrefixGivesZero)
{
    const auto c = make_config(4, true, 1.0);
    const auto curves = estimate_mi_curves(c, QGrid({0, 3}), 50, SeededRng(1));
    EXPECT_EQ(curves.xyt.values[0], 0.0);
    EXPECT_EQ(curves.uyt.values[0], 0.0);
    EXPECT_EQ(curves.xyt.std_errors[0], 0.0);
}

TEST(EstimateMiCurves, RejectsTooFewDraws)
{
    const auto c = make_config(2, false, 1.0);
    EXPECT_THROW(estimate_mi_curves(c, QGrid({1}), 1, SeededRng(1)), std::invalid_argument);
}

TEST(EstimateMiCurves, ThreadCountDoesNotChangeResults)
{
    const auto c = make_config(6, true, 2.0, SboxKind::seeded_random_bijection);
    const QGrid grid({1, 4, 9, 20});
    EstimatorOptions one, many;
    one.threads = 1;
    one.chunk_size = 37;
    many.threads = 4;
    many.chunk_size = 37;
    const auto a = estimate_mi_curves(c, grid, 700, SeededRng(5), one);
    const auto b = estimate_mi_curves(c, grid, 700, SeededRng(5), many);
    EXPECT_EQ(a.xyt.values, b.xyt.values);
    EXPECT_EQ(a.uyt.values, b.uyt.values);
    EXPECT_EQ(a.uyt.std_errors, b.uyt.std_errors);
}

// The estimator's value and error must be the mean and standard error of
// the per-draw log-likelihoods, recomputed here draw by draw.
TEST(EstimateMiCurves, StdErrorIsSampleSpreadOverRootN)
{
    const auto c = make_config(3, true, 1.0);
    const std::size_t n = 300, q = 4;
    const SeededRng rng(21);
    const auto curves = estimate_mi_curves(c, QGrid({q}), n, rng);
    std::vector<double> h_t, diff;
    for (std::size_t j = 0; j < n; ++j) {
        const DrawBatch d = sample_draw(c, q, rng, j);
        const double lt = log_p_y_given_t_masked(d.plaintexts, d.observed, c);
        const double lu = log_p_y_given_u_masked(d.sensitive, d.observed, c);
        h_t.push_back(-lt);
        diff.push_back(lu - lt);
    }
    auto mean_se = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v)
            m += x / v.size();
        double ss = 0.0;
        for (double x : v)
            ss += (x - m) * (x - m);
        return std::pair{m, std::sqrt(ss / (v.size() - 1) / v.size())};
    };
    const auto [mt, st] = mean_se(h_t);
    const auto [md, sd] = mean_se(diff);
    EXPECT_NEAR(curves.xyt.values[0], mt - noise_entropy(1.0, q), 1e-9);
    EXPECT_NEAR(curves.xyt.std_errors[0], st, 1e-9);
    EXPECT_NEAR(curves.uyt.values[0], md, 1e-9);
    EXPECT_NEAR(curves.uyt.std_errors[0], sd, 1e-9);
}

TEST(EstimateMiCurves, MaskedChainAndKeyEntropyCap)
{
    const auto c = make_config(2, true, 0.5);
    const QGrid grid({1, 2, 5, 10, 20, 40, 80});
    const auto curves = estimate_mi_curves(c, grid, 4000, SeededRng(2));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double slack = 3 * combined(curves.xyt.std_errors[g], curves.uyt.std_errors[g]);
        EXPECT_LE(curves.uyt.values[g], curves.xyt.values[g] + slack) << "q=" << grid[g];
        EXPECT_LE(curves.uyt.values[g], 2.0 + 3 * curves.uyt.std_errors[g]) << "q=" << grid[g];
    }
    // saturates: by q = 80 essentially the whole key is recovered
    EXPECT_GT(curves.uyt.values.back(), 1.9);
    EXPECT_LE(curves.uyt.reported(grid.size() - 1), 2.0);
}

TEST(EstimateMiCurves, UnmaskedUytMatchesXyt)
{
    const auto c = make_config(4, false, 2.0, SboxKind::seeded_random_bijection);
    const QGrid grid({1, 3, 6, 12});
    const auto curves = estimate_mi_curves(c, grid, 3000, SeededRng(3));
    for (std::size_t g = 0; g < grid.size(); ++g)
        EXPECT_NEAR(curves.uyt.values[g], curves.xyt.values[g],
                    3 * combined(curves.xyt.std_errors[g], curves.uyt.std_errors[g]));
}

TEST(EstimateMiCurves, NondecreasingAlongTheGrid)
{
    for (bool masked : {false, true}) {
        const auto c = make_config(4, masked, 1.0);
        const QGrid grid = QGrid::linspace(1, 40, 8);
        const auto curves = estimate_mi_curves(c, grid, 2000, SeededRng(4));
        for (const MiCurve* curve : {&curves.xyt, &curves.uyt})
            for (std::size_t g = 1; g < grid.size(); ++g)
                EXPECT_GE(curve->values[g] + 3 * combined(curve->std_errors[g], curve->std_errors[g - 1]),
                          curve->values[g - 1]);
    }
}

TEST(EstimateMiCurves, SboxOnlyRelabelsKeys)
{
    const QGrid grid({2, 8});
    const auto a = estimate_mi_curves(make_config(4, true, 1.0, SboxKind::identity), grid, 3000, SeededRng(8));
    const auto b =
        estimate_mi_curves(make_config(4, true, 1.0, SboxKind::seeded_random_bijection), grid, 3000, SeededRng(9));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        EXPECT_NEAR(a.h_y_given_t[g].value, b.h_y_given_t[g].value,
                    3 * combined(a.h_y_given_t[g].std_error, b.h_y_given_t[g].std_error));
        EXPECT_NEAR(a.uyt.values[g], b.uyt.values[g], 3 * combined(a.uyt.std_errors[g], b.uyt.std_errors[g]));
    }
}

// At sigma^2 = 10 the per-trace SNR is 0.2, so q = 40 traces carry at most
// 20 log2(1.2) = 5.26 bits; the key is only pinned down well past q = 60.
TEST(EstimateMiCurves, UnprotectedByteAtSigmaTen)
{
    const auto c = make_config(8, false, 10.0, SboxKind::aes_subbytes);
    const QGrid grid({20, 40, 60, 120, 240});
    const auto curves = estimate_mi_curves(c, grid, 1000, SeededRng(10));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double cap = 0.5 * static_cast<double>(grid[g]) * std::log2(1.2);
        EXPECT_LE(curves.xyt.values[g], std::min(cap, 8.0) + 3 * curves.xyt.std_errors[g]) << grid[g];
        EXPECT_LE(curves.uyt.values[g], std::min(cap, 8.0) + 3 * curves.uyt.std_errors[g]) << grid[g];
        // the common-draw difference is far less noisy than H(Y|T) alone
        EXPECT_LT(curves.uyt.std_errors[g], curves.xyt.std_errors[g]);
        if (g > 0)
            EXPECT_GT(curves.uyt.values[g], curves.uyt.values[g - 1]);
    }
    EXPECT_GT(curves.uyt.values[1], 3.5);
    EXPECT_GT(curves.uyt.values[4], 7.8);
}

TEST(ConvergenceSweep, DegenerateAndScaling)
{
    const auto c = make_config(4, false, 10.0);
    const auto tiny = convergence_sweep(c, 5, {2}, SeededRng(1));
    ASSERT_EQ(tiny.size(), 1u);
    EXPECT_TRUE(std::isfinite(tiny[0].mi_bits));
    EXPECT_TRUE(std::isfinite(tiny[0].std_error));

    const auto sweep = convergence_sweep(c, 5, {300, 30000}, SeededRng(2));
    ASSERT_EQ(sweep.size(), 2u);
    const double ratio = sweep[0].std_error / sweep[1].std_error;
    EXPECT_NEAR(ratio, 10.0, 3.0);
    EXPECT_NEAR(sweep[0].mi_bits, sweep[1].mi_bits, 3 * combined(sweep[0].std_error, sweep[1].std_error));
    EXPECT_THROW(convergence_sweep(c, 5, {}, SeededRng(1)), std::invalid_argument);
}

TEST(MiCurve, ReportingClampsButKeepsRawValues)
{
    MiCurve curve;
    curve.kind = MiKind::uyt;
    curve.ell = 4;
    curve.grid = QGrid({1, 2, 3});
    curve.values = {-0.01, 2.0, 4.2};
    curve.std_errors = {0.1, 0.1, 0.1};
    EXPECT_EQ(curve.reported(0), 0.0);
    EXPECT_EQ(curve.reported(2), 4.0);
    EXPECT_EQ(curve.values[0], -0.01);
    EXPECT_EQ(curve.negative_count(), 1u);
    curve.kind = MiKind::xyt;
    EXPECT_EQ(curve.reported(2), 4.2);
}
