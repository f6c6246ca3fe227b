#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "leakage.hpp"
#include "likelihood.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "qgrid.hpp"

namespace leakbound {

/// Differential entropy of q i.i.d. N(0, sigma2) samples, in bits.
inline double noise_entropy(double sigma2, std::size_t q)
{
    if (!(sigma2 > 0.0))
        throw std::invalid_argument("noise_entropy requires sigma2 > 0");
    return static_cast<double>(q) * 0.5 * std::log2(2.0 * std::numbers::pi * std::numbers::e * sigma2);
}

struct EntropyEstimate
{
    double value = 0.0;      // bits
    double std_error = 0.0;  // bits
    std::size_t n_draws = 0;
};

enum class MiKind { xyt, uyt };

inline std::string_view to_string(MiKind kind) { return kind == MiKind::xyt ? "I_XYT" : "I_UYT"; }

/// Mutual information (bits) versus trace count, with Monte-Carlo errors.
/// `values` are raw estimates and may dip below zero at tiny q; use
/// `reported` for the clamped figure.
struct MiCurve
{
    MiKind kind = MiKind::xyt;
    QGrid grid;
    std::vector<double> values;
    std::vector<double> std_errors;
    unsigned ell = 0;
    double sigma2 = 0.0;
    bool masked = false;
    std::size_t n_draws = 0;

    double reported(std::size_t i) const
    {
        const double v = std::max(values[i], 0.0);
        return kind == MiKind::uyt ? std::min(v, static_cast<double>(ell)) : v;
    }

    std::vector<double> reported_values() const
    {
        std::vector<double> out(values.size());
        for (std::size_t i = 0; i < values.size(); ++i)
            out[i] = reported(i);
        return out;
    }

    /// Grid points whose raw estimate was clamped from below.
    std::size_t negative_count() const
    {
        return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](double v) { return v < 0.0; }));
    }

    /// Value at grid point q; throws if q is not on the grid.
    std::size_t index_of(std::size_t q) const
    {
        const auto& pts = grid.points();
        auto it = std::lower_bound(pts.begin(), pts.end(), q);
        if (it == pts.end() || *it != q)
            throw std::out_of_range("q not on the curve's grid");
        return static_cast<std::size_t>(it - pts.begin());
    }
};

struct MiCurves
{
    MiCurve xyt;
    MiCurve uyt;
    std::vector<EntropyEstimate> h_y_given_t;
    std::vector<EntropyEstimate> h_y_given_u;
};

struct EstimatorOptions
{
    std::size_t threads = 0;       // 0: hardware concurrency
    std::size_t chunk_size = 512;  // draws per reduction chunk
    std::uint64_t stream_base = 0; // draw j uses substream stream_base + j
};

/// Monte-Carlo estimates of I(X;Y|T) and I(U;Y|T) over a whole q grid.
///
/// Every draw is evaluated once up to q_max; the per-draw values
/// -log2 p(y|t) and -log2 p(y|u) are recorded at each grid point. Both
/// entropies come from the same draws, so the error of I(U;Y|T) is the
/// spread of the per-draw differences. Chunks of draws are reduced in index
/// order, which makes the result independent of the thread count.
inline MiCurves estimate_mi_curves(const LeakageConfig& config, const QGrid& grid, std::size_t n_draws,
                                   const SeededRng& rng, const EstimatorOptions& options = {})
{
    if (n_draws < 2)
        throw std::invalid_argument("estimate_mi_curves needs at least 2 draws");
    if (grid.size() == 0)
        throw std::invalid_argument("estimate_mi_curves needs a non-empty grid");
    const std::size_t n_points = grid.size();
    const std::size_t q_max = grid.q_max();
    const std::size_t chunk_size = std::max<std::size_t>(1, options.chunk_size);
    const std::size_t n_chunks = (n_draws + chunk_size - 1) / chunk_size;

    struct ChunkStats
    {
        std::vector<RunningStats> h_t, h_u, diff;
    };
    std::vector<ChunkStats> chunks(n_chunks);

    for_each_chunk(n_chunks, options.threads, [&](std::size_t c) {
        ChunkStats& stats = chunks[c];
        stats.h_t.resize(n_points);
        stats.h_u.resize(n_points);
        stats.diff.resize(n_points);
        PrefixEvaluator evaluator(config);
        DrawBatch draw;
        std::vector<double> log_t(n_points), log_u(n_points);
        const std::size_t begin = c * chunk_size;
        const std::size_t end = std::min(n_draws, begin + chunk_size);
        for (std::size_t j = begin; j < end; ++j) {
            if (q_max > 0) {
                sample_draw_into(config, q_max, rng, options.stream_base + j, draw);
                evaluator.evaluate(draw.plaintexts, draw.sensitive, draw.observed, grid.points(), log_t, log_u);
            } else {
                std::fill(log_t.begin(), log_t.end(), 0.0);
                std::fill(log_u.begin(), log_u.end(), 0.0);
            }
            for (std::size_t g = 0; g < n_points; ++g) {
                stats.h_t[g].push(-log_t[g]);
                stats.h_u[g].push(-log_u[g]);
                stats.diff[g].push(log_u[g] - log_t[g]);
            }
        }
    });

    std::vector<RunningStats> h_t(n_points), h_u(n_points), diff(n_points);
    for (const ChunkStats& stats : chunks)
        for (std::size_t g = 0; g < n_points; ++g) {
            h_t[g].merge(stats.h_t[g]);
            h_u[g].merge(stats.h_u[g]);
            diff[g].merge(stats.diff[g]);
        }

    MiCurves out;
    auto init = [&](MiCurve& curve, MiKind kind) {
        curve.kind = kind;
        curve.grid = grid;
        curve.ell = config.ell();
        curve.sigma2 = config.sigma2();
        curve.masked = config.masked();
        curve.n_draws = n_draws;
        curve.values.resize(n_points);
        curve.std_errors.resize(n_points);
    };
    init(out.xyt, MiKind::xyt);
    init(out.uyt, MiKind::uyt);
    for (std::size_t g = 0; g < n_points; ++g) {
        out.h_y_given_t.push_back({h_t[g].mean(), h_t[g].std_error(), n_draws});
        out.h_y_given_u.push_back({h_u[g].mean(), h_u[g].std_error(), n_draws});
        out.xyt.values[g] = h_t[g].mean() - noise_entropy(config.sigma2(), grid[g]);
        out.xyt.std_errors[g] = h_t[g].std_error();
        out.uyt.values[g] = diff[g].mean();
        out.uyt.std_errors[g] = diff[g].std_error();
    }
    return out;
}

struct ConvergencePoint
{
    std::size_t n_draws = 0;
    std::size_t q = 0;
    double mi_bits = 0.0;
    double std_error = 0.0;
};

/// MI estimates for several Monte-Carlo sizes. Each size draws from its own
/// block of substreams, so the estimates are statistically independent.
inline std::vector<ConvergencePoint> convergence_sweep(const LeakageConfig& config, const QGrid& grid,
                                                       const std::vector<std::size_t>& n_draws_list,
                                                       const SeededRng& rng, MiKind kind = MiKind::xyt,
                                                       EstimatorOptions options = {})
{
    if (n_draws_list.empty())
        throw std::invalid_argument("convergence_sweep needs at least one sample size");
    std::vector<ConvergencePoint> out;
    for (std::size_t e = 0; e < n_draws_list.size(); ++e) {
        options.stream_base = static_cast<std::uint64_t>(e) << 40;
        const MiCurves curves = estimate_mi_curves(config, grid, n_draws_list[e], rng, options);
        const MiCurve& curve = kind == MiKind::xyt ? curves.xyt : curves.uyt;
        for (std::size_t g = 0; g < grid.size(); ++g)
            out.push_back({n_draws_list[e], grid[g], curve.values[g], curve.std_errors[g]});
    }
    return out;
}

inline std::vector<ConvergencePoint> convergence_sweep(const LeakageConfig& config, std::size_t q_fixed,
                                                       const std::vector<std::size_t>& n_draws_list,
                                                       const SeededRng& rng, MiKind kind = MiKind::xyt,
                                                       EstimatorOptions options = {})
{
    return convergence_sweep(config, QGrid({q_fixed}), n_draws_list, rng, kind, options);
}

}  // namespace leakbound
