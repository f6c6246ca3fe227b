#include <cmath>

#include <gtest/gtest.h>

#include "leakbound/leakage.hpp"
#include "leakbound/numerics.hpp"

using namespace leakbound;

namespace {

LeakageConfig make_config(unsigned ell, bool masked, double sigma2, SboxKind kind = SboxKind::identity)
{
    const FieldParams field(ell);
    return LeakageConfig(field, sbox_build(kind, field, 3), masked, sigma2);
}

}  // namespace

TEST(LeakageConfig, RejectsNonPositiveNoise)
{
    EXPECT_THROW(make_config(4, false, 0.0), std::invalid_argument);
    EXPECT_THROW(make_config(4, false, -1.0), std::invalid_argument);
    EXPECT_THROW(sample_draw(make_config(4, false, 1.0), 0, SeededRng(1), 0), std::invalid_argument);
}

TEST(SampleDraw, MaskedFieldsAreConsistent)
{
    const auto config = make_config(8, true, 2.0, SboxKind::aes_subbytes);
    const FieldParams& field = config.field();
    for (std::uint64_t j = 0; j < 50; ++j) {
        const DrawBatch d = sample_draw(config, 40, SeededRng(17), j);
        ASSERT_EQ(d.size(), 40u);
        ASSERT_TRUE(d.masked());
        for (std::size_t i = 0; i < d.size(); ++i) {
            EXPECT_EQ(d.sensitive[i], config.sbox()(d.plaintexts[i] ^ d.key));
            EXPECT_EQ(d.noiseless[i], hamming_weight(d.sensitive[i] ^ d.masks[i], field)
                                          + hamming_weight(d.masks[i], field));
            EXPECT_EQ(d.masked_share(i), d.sensitive[i] ^ d.masks[i]);
            EXPECT_GE(d.noiseless[i], 0.0);
            EXPECT_LE(d.noiseless[i], 16.0);
        }
    }
}

TEST(SampleDraw, UnmaskedFieldsAreConsistent)
{
    const auto config = make_config(6, false, 1.0, SboxKind::seeded_random_bijection);
    const DrawBatch d = sample_draw(config, 100, SeededRng(5), 9);
    EXPECT_FALSE(d.masked());
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_EQ(d.noiseless[i], hamming_weight(d.sensitive[i], config.field()));
        EXPECT_LE(d.noiseless[i], 6.0);
    }
}

// E[w_H] and Var of the zero-offset sum, each from exhaustive enumeration.
TEST(SampleDraw, LeakageMomentsMatchEnumeration)
{
    const FieldParams field(8);
    double mean_hw = 0.0;
    for (Word w = 0; w < 256; ++w)
        mean_hw += hamming_weight(w, field) / 256.0;
    double m1 = 0.0, m2 = 0.0;
    for (Word u = 0; u < 256; ++u)
        for (Word m = 0; m < 256; ++m) {
            const double x = hamming_weight(u ^ m, field) + hamming_weight(m, field);
            m1 += x / 65536.0;
            m2 += x * x / 65536.0;
        }
    const double var_masked = m2 - m1 * m1;
    EXPECT_DOUBLE_EQ(mean_hw, 4.0);
    EXPECT_DOUBLE_EQ(var_masked, 4.0);

    RunningStats unmasked, masked;
    for (std::uint64_t j = 0; j < 1000; ++j) {
        for (double x : sample_draw(make_config(8, false, 1.0), 100, SeededRng(1), j).noiseless)
            unmasked.push(x);
        for (double x : sample_draw(make_config(8, true, 1.0), 100, SeededRng(2), j).noiseless)
            masked.push(x);
    }
    // Traces within a draw share a key, but t is uniform so x stays i.i.d.
    EXPECT_NEAR(unmasked.mean(), mean_hw, 3 * unmasked.std_error());
    const double var_se = std::sqrt(2.0 / static_cast<double>(masked.count())) * var_masked * 1.5;
    EXPECT_NEAR(masked.variance(), var_masked, 3 * var_se);
}

TEST(SampleDraw, NoiseHasTheConfiguredVariance)
{
    const double sigma2 = 3.0;
    const auto config = make_config(4, true, sigma2);
    RunningStats noise;
    for (std::uint64_t j = 0; j < 2000; ++j) {
        const DrawBatch d = sample_draw(config, 50, SeededRng(8), j);
        for (std::size_t i = 0; i < d.size(); ++i)
            noise.push(d.observed[i] - d.noiseless[i]);
    }
    EXPECT_NEAR(noise.mean(), 0.0, 3 * noise.std_error());
    EXPECT_NEAR(noise.variance(), sigma2, 3 * sigma2 * std::sqrt(2.0 / static_cast<double>(noise.count())));
}

TEST(SampleDraw, DeterministicAndPrefixConsistent)
{
    const auto config = make_config(8, true, 1.5);
    const DrawBatch a = sample_draw(config, 30, SeededRng(77), 4);
    const DrawBatch b = sample_draw(config, 30, SeededRng(77), 4);
    const DrawBatch shorter = sample_draw(config, 11, SeededRng(77), 4);
    EXPECT_EQ(a.key, b.key);
    EXPECT_EQ(a.plaintexts, b.plaintexts);
    EXPECT_EQ(a.masks, b.masks);
    EXPECT_EQ(a.observed, b.observed);
    EXPECT_EQ(shorter.key, a.key);
    for (std::size_t i = 0; i < shorter.size(); ++i) {
        EXPECT_EQ(shorter.plaintexts[i], a.plaintexts[i]);
        EXPECT_EQ(shorter.observed[i], a.observed[i]);
    }
    const DrawBatch other = sample_draw(config, 30, SeededRng(78), 4);
    EXPECT_NE(other.observed, a.observed);
}
