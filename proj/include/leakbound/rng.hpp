#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace leakbound {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// The 128-bit counter is split into a 64-bit stream id (upper half) and a
/// 64-bit block index (lower half), so every (seed, stream) pair names an
/// independent, randomly accessible sequence.
class Philox4x32
{
public:
    using result_type = std::uint32_t;
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          counter_{0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)}
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        if (used_ == 4) {
            block_ = bijection(counter_, key_);
            if (++counter_[0] == 0)
                ++counter_[1];
            used_ = 0;
        }
        return block_[used_++];
    }

    /// The keyed bijection, exposed for known-answer tests.
    static Counter bijection(Counter ctr, Key key) noexcept
    {
        constexpr std::uint32_t m0 = 0xD2511F53, m1 = 0xCD9E8D57;
        constexpr std::uint32_t w0 = 0x9E3779B9, w1 = 0xBB67AE85;
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += w0;
                key[1] += w1;
            }
            const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        }
        return ctr;
    }

private:
    Key key_;
    Counter counter_;
    Counter block_{};
    int used_ = 4;
};

/// Master seed from which every Monte-Carlo draw derives its own substream.
/// Draw j always sees the same numbers, whichever thread evaluates it.
class SeededRng
{
public:
    explicit SeededRng(std::uint64_t master_seed) noexcept : master_seed_(master_seed) {}

    std::uint64_t master_seed() const noexcept { return master_seed_; }
    Philox4x32 substream(std::uint64_t index) const noexcept { return Philox4x32(master_seed_, index); }

private:
    std::uint64_t master_seed_;
};

/// Uniform and Gaussian variates on top of a 32-bit engine.
/// Implemented by hand so streams are identical across standard libraries.
class Variates
{
public:
    explicit Variates(Philox4x32 engine) noexcept : engine_(engine) {}

    /// Uniform on {0, ..., 2^bits - 1}, bits <= 32.
    std::uint32_t bits(unsigned n) noexcept
    {
        const std::uint32_t x = engine_();
        return n >= 32 ? x : x & ((std::uint32_t{1} << n) - 1);
    }

    /// Uniform on (0, 1), 53-bit resolution.
    double open_unit() noexcept
    {
        const std::uint64_t hi = engine_(), lo = engine_();
        const std::uint64_t x = ((hi << 32) | lo) >> 11;
        return (static_cast<double>(x) + 0.5) * 0x1p-53;
    }

    /// Standard normal by the Box-Muller transform; the spare is cached.
    double normal() noexcept
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double radius = std::sqrt(-2.0 * std::log(open_unit()));
        const double angle = 2.0 * std::numbers::pi * open_unit();
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    Philox4x32 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace leakbound
