#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>

namespace leakbound {

inline constexpr double ln2 = std::numbers::ln2;

/// log(sum exp(v)) with the maximum factored out. Empty input gives -inf.
inline double log_sum_exp(std::span<const double> values) noexcept
{
    if (values.empty())
        return -std::numeric_limits<double>::infinity();
    const double top = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(top))
        return top;
    double sum = 0.0;
    for (double v : values)
        sum += std::exp(v - top);
    return top + std::log(sum);
}

/// Streaming mean/variance (Welford), mergeable with Chan's pairwise update.
/// Merging in a fixed order makes the result independent of how the samples
/// were split between workers.
class RunningStats
{
public:
    void push(double x) noexcept
    {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    void merge(const RunningStats& other) noexcept
    {
        if (other.n_ == 0)
            return;
        if (n_ == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(n_), nb = static_cast<double>(other.n_);
        const double delta = other.mean_ - mean_;
        const double total = na + nb;
        mean_ += delta * nb / total;
        m2_ += other.m2_ + delta * delta * na * nb / total;
        n_ += other.n_;
    }

    std::size_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double std_error() const noexcept
    {
        return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace leakbound
