#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "field.hpp"
#include "leakage.hpp"

namespace leakbound {

/// Composite Simpson rule over [s_min - tail*sigma, s_max + tail*sigma]
/// with step sigma * step_fraction (shrunk so the interval count is even).
struct QuadratureSpec
{
    double step_fraction = 1.0 / 50.0;
    double tail_sigmas = 8.0;
};

enum class Conditioning { t, u, x };

struct ExactMi
{
    double i_xyt = 0.0;
    double i_uyt = 0.0;
};

namespace detail {

inline constexpr unsigned oracle_max_ell = 3;
inline constexpr std::size_t oracle_max_q = 2;

struct OracleGrid
{
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline OracleGrid simpson_grid(double lo, double hi, double step)
{
    auto intervals = static_cast<std::size_t>(std::ceil((hi - lo) / step));
    intervals += intervals % 2;
    const double h = (hi - lo) / static_cast<double>(intervals);
    OracleGrid grid;
    for (std::size_t i = 0; i <= intervals; ++i) {
        grid.nodes.push_back(lo + h * static_cast<double>(i));
        const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        grid.weights.push_back(w * h / 3.0);
    }
    return grid;
}

inline double neg_plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

/// Exhaustive mixture densities p(y | u) on the quadrature nodes, by direct
/// enumeration over masks (no class-count shortcut).
class ExactChannel
{
public:
    ExactChannel(const LeakageConfig& config, std::size_t q, const QuadratureSpec& spec) : config_(config)
    {
        if (config.ell() > oracle_max_ell)
            throw std::invalid_argument("exact oracle limited to ell <= " + std::to_string(oracle_max_ell));
        if (q > oracle_max_q)
            throw std::invalid_argument("exact oracle limited to q <= " + std::to_string(oracle_max_q));
        const double sigma = std::sqrt(config.sigma2());
        grid_ = simpson_grid(-spec.tail_sigmas * sigma, config.max_leakage() + spec.tail_sigmas * sigma,
                             sigma * spec.step_fraction);
        const FieldParams& field = config.field();
        const Word order = field.order();
        density_.assign(order, std::vector<double>(grid_.nodes.size(), 0.0));
        for (Word u = 0; u < order; ++u)
            for (std::size_t i = 0; i < grid_.nodes.size(); ++i) {
                const double y = grid_.nodes[i];
                if (!config.masked()) {
                    density_[u][i] = gaussian(y - hamming_weight(u, field));
                    continue;
                }
                double sum = 0.0;
                for (Word m = 0; m < order; ++m)
                    sum += gaussian(y - hamming_weight(u ^ m, field) - hamming_weight(m, field));
                density_[u][i] = sum / order;
            }
    }

    double gaussian(double d) const
    {
        const double s2 = config_.sigma2();
        return std::exp(-d * d / (2 * s2)) / std::sqrt(2 * std::numbers::pi * s2);
    }

    /// H(Y_1 | X_1): entropy of the noise alone.
    double single_noise_entropy() const
    {
        double h = 0.0;
        for (std::size_t i = 0; i < grid_.nodes.size(); ++i)
            h += grid_.weights[i] * neg_plogp(gaussian(grid_.nodes[i]));
        return h;
    }

    /// H(Y_1 | U_1) with U_1 uniform.
    double single_sensitive_entropy() const
    {
        double h = 0.0;
        for (const auto& density : density_)
            for (std::size_t i = 0; i < grid_.nodes.size(); ++i)
                h += grid_.weights[i] * neg_plogp(density[i]);
        return h / static_cast<double>(density_.size());
    }

    /// H(Y | T) for q = 1 or 2, averaging over every plaintext vector.
    double plaintext_entropy(std::size_t q) const
    {
        const Word order = config_.field().order();
        const auto& sbox = config_.sbox();
        const std::size_t n = grid_.nodes.size();
        if (q == 1) {
            double h = 0.0;
            std::vector<double> mix(n);
            for (Word t = 0; t < order; ++t) {
                std::fill(mix.begin(), mix.end(), 0.0);
                for (Word k = 0; k < order; ++k)
                    for (std::size_t i = 0; i < n; ++i)
                        mix[i] += density_[sbox(t ^ k)][i] / order;
                for (std::size_t i = 0; i < n; ++i)
                    h += grid_.weights[i] * neg_plogp(mix[i]);
            }
            return h / order;
        }
        // p(y1, y2 | t1, t2) only depends on t1 ^ t2 (relabel the key), so
        // averaging over the difference covers all 2^(2 ell) plaintext pairs.
        double h = 0.0;
        for (Word delta = 0; delta < order; ++delta) {
            double h_delta = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double row = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    double p = 0.0;
                    for (Word k = 0; k < order; ++k)
                        p += density_[sbox(k)][i] * density_[sbox(delta ^ k)][j];
                    row += grid_.weights[j] * neg_plogp(p / order);
                }
                h_delta += grid_.weights[i] * row;
            }
            h += h_delta;
        }
        return h / order;
    }

private:
    LeakageConfig config_;
    OracleGrid grid_;
    std::vector<std::vector<double>> density_;
};

}  // namespace detail

/// Conditional differential entropy H(Y|T), H(Y|U) or H(Y|X) in bits,
/// computed from the exact Gaussian mixtures by quadrature.
inline double entropy_exact_small(const LeakageConfig& config, std::size_t q, Conditioning conditioning,
                                  const QuadratureSpec& spec = {})
{
    const detail::ExactChannel channel(config, q, spec);
    if (q == 0)
        return 0.0;
    switch (conditioning) {
    case Conditioning::x: return static_cast<double>(q) * channel.single_noise_entropy();
    case Conditioning::u: return static_cast<double>(q) * channel.single_sensitive_entropy();
    case Conditioning::t: return channel.plaintext_entropy(q);
    }
    return 0.0;
}

/// Exact I(X;Y|T) and I(U;Y|T) for tiny parameters (ell <= 3, q <= 2).
inline ExactMi mi_exact_small(const LeakageConfig& config, std::size_t q, const QuadratureSpec& spec = {})
{
    const detail::ExactChannel channel(config, q, spec);
    if (q == 0)
        return {};
    const double h_t = channel.plaintext_entropy(q);
    const double h_x = static_cast<double>(q) * channel.single_noise_entropy();
    const double h_u = static_cast<double>(q) * channel.single_sensitive_entropy();
    return {h_t - h_x, h_t - h_u};
}

}  // namespace leakbound
