#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "leakage.hpp"
#include "likelihood.hpp"
#include "parallel.hpp"
#include "qgrid.hpp"

namespace leakbound {

struct KeyGuess
{
    Word key = 0;
    bool tied = false;  // another key reached the same top score
};

/// Argmax with ties broken towards the smallest key.
inline KeyGuess argmax_key(std::span<const double> scores)
{
    if (scores.empty())
        throw std::invalid_argument("argmax_key: no scores");
    KeyGuess best{0, false};
    double top = scores[0];
    for (std::size_t k = 1; k < scores.size(); ++k) {
        if (scores[k] > top) {
            top = scores[k];
            best = {static_cast<Word>(k), false};
        } else if (scores[k] == top) {
            best.tied = true;
        }
    }
    return best;
}

struct Distinguished
{
    KeyGuess guess;
    std::vector<double> scores;  // natural-log likelihood per key, constants dropped
};

/// Maximum-likelihood key recovery. In the masked case the mask is
/// marginalised out per trace, which is the optimal higher-order
/// distinguisher for this leakage model.
inline Distinguished ml_distinguish(std::span<const Word> t, std::span<const double> y, const LeakageConfig& config)
{
    if (t.empty())
        throw std::invalid_argument("ml_distinguish requires q >= 1");
    if (t.size() != y.size())
        throw std::invalid_argument("plaintext and observation lengths differ");
    PrefixEvaluator evaluator(config);
    const auto scores = evaluator.key_scores(t, y, t.size());
    Distinguished out;
    out.scores.assign(scores.begin(), scores.end());
    out.guess = argmax_key(out.scores);
    return out;
}

struct AttackConfig
{
    LeakageConfig leakage;
    QGrid grid;
    std::size_t n_attacks = 200;
    std::uint64_t seed = 0;
    std::optional<std::size_t> confusion_at;  // grid q at which to tabulate (K, K^)
    std::size_t threads = 0;
};

/// Two-sided Wilson score interval.
struct Interval
{
    double low = 0.0;
    double high = 1.0;
};

inline Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054)
{
    if (trials == 0)
        return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Row-major 2^ell x 2^ell table of (true key, guessed key) counts.
struct ConfusionMatrix
{
    std::size_t order = 0;
    std::vector<std::uint64_t> counts;

    explicit ConfusionMatrix(std::size_t n = 0) : order(n), counts(n * n, 0) {}
    std::uint64_t& operator()(std::size_t k, std::size_t guess) { return counts[k * order + guess]; }
    std::uint64_t operator()(std::size_t k, std::size_t guess) const { return counts[k * order + guess]; }
};

struct AttackResult
{
    QGrid grid;
    std::size_t n_attacks = 0;
    std::vector<std::size_t> successes;
    std::vector<double> success_rate;
    std::vector<Interval> wilson_ci;
    std::size_t ties = 0;
    std::optional<ConfusionMatrix> confusion;
};

/// Empirical success rate of the ML attack. Repetition r draws one stream of
/// q_max traces from substream r; the grid points are nested prefixes of it.
inline AttackResult success_rate_curve(const AttackConfig& config)
{
    if (config.n_attacks < 1)
        throw std::invalid_argument("n_attacks must be >= 1");
    const QGrid& grid = config.grid;
    if (grid.size() == 0 || grid[0] < 1)
        throw std::invalid_argument("attack grid points must be >= 1");
    if (config.confusion_at && !grid.contains(*config.confusion_at))
        throw std::invalid_argument("confusion_at must be a grid point");

    const std::size_t n_points = grid.size();
    const std::size_t order = config.leakage.field().order();
    const SeededRng rng(config.seed);
    constexpr std::size_t chunk_size = 16;
    const std::size_t n_chunks = (config.n_attacks + chunk_size - 1) / chunk_size;

    struct ChunkTally
    {
        std::vector<std::size_t> successes;
        std::size_t ties = 0;
        std::vector<std::pair<Word, Word>> confusion;
    };
    std::vector<ChunkTally> tallies(n_chunks);

    for_each_chunk(n_chunks, config.threads, [&](std::size_t c) {
        ChunkTally& tally = tallies[c];
        tally.successes.assign(n_points, 0);
        PrefixEvaluator evaluator(config.leakage);
        LikelihoodModel& model = evaluator.model();
        const unsigned char* sbox_weights = config.leakage.sbox_weights().data();
        std::vector<double> scores(order), kernels(model.n_weights());
        DrawBatch draw;
        const std::size_t end = std::min(config.n_attacks, (c + 1) * chunk_size);
        for (std::size_t r = c * chunk_size; r < end; ++r) {
            sample_draw_into(config.leakage, grid.q_max(), rng, r, draw);
            std::fill(scores.begin(), scores.end(), 0.0);
            std::size_t next = 0;
            for (std::size_t i = 0; i < grid.q_max(); ++i) {
                model.class_log_kernels(draw.observed[i], kernels);
                const Word t = draw.plaintexts[i];
                for (Word k = 0; k < order; ++k)
                    scores[k] += kernels[sbox_weights[t ^ k]];
                if (i + 1 != grid[next])
                    continue;
                const KeyGuess guess = argmax_key(scores);
                tally.ties += guess.tied ? 1 : 0;
                tally.successes[next] += guess.key == draw.key ? 1 : 0;
                if (config.confusion_at && *config.confusion_at == grid[next])
                    tally.confusion.emplace_back(draw.key, guess.key);
                ++next;
            }
        }
    });

    AttackResult result;
    result.grid = grid;
    result.n_attacks = config.n_attacks;
    result.successes.assign(n_points, 0);
    if (config.confusion_at)
        result.confusion.emplace(order);
    for (const ChunkTally& tally : tallies) {
        for (std::size_t g = 0; g < n_points; ++g)
            result.successes[g] += tally.successes[g];
        result.ties += tally.ties;
        for (auto [k, guess] : tally.confusion)
            ++(*result.confusion)(k, guess);
    }
    for (std::size_t g = 0; g < n_points; ++g) {
        result.success_rate.push_back(static_cast<double>(result.successes[g])
                                      / static_cast<double>(config.n_attacks));
        result.wilson_ci.push_back(wilson_interval(result.successes[g], config.n_attacks));
    }
    return result;
}

/// Plug-in estimate of I(K; K^) in bits from a confusion table.
inline double empirical_ki_khat(const ConfusionMatrix& confusion)
{
    const std::size_t n = confusion.order;
    std::vector<double> rows(n, 0.0), cols(n, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t g = 0; g < n; ++g) {
            const double c = static_cast<double>(confusion(k, g));
            rows[k] += c;
            cols[g] += c;
            total += c;
        }
    if (total == 0.0)
        return 0.0;
    double mi = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t g = 0; g < n; ++g) {
            const double c = static_cast<double>(confusion(k, g));
            if (c > 0.0)
                mi += c / total * std::log2(c * total / (rows[k] * cols[g]));
        }
    return std::max(0.0, mi);
}

}  // namespace leakbound
