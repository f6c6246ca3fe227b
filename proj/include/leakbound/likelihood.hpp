#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "field.hpp"
#include "leakage.hpp"
#include "numerics.hpp"

namespace leakbound {

/// Per-observation log-likelihood kernels of the Hamming-weight channel.
///
/// For an observation y, `class_log_kernels` yields, for every Hamming weight
/// h of the sensitive variable, the natural-log density of y without the
/// Gaussian normalisation constant:
///   unmasked: -(y-h)^2 / 2 sigma^2
///   masked:   log( 2^-ell * sum_s N[h][s] exp(-(y-s)^2 / 2 sigma^2) )
/// where N is the mask class table.
class LikelihoodModel
{
public:
    explicit LikelihoodModel(const LeakageConfig& config)
        : config_(config),
          classes_(config.field()),
          inv_two_sigma2_(0.5 / config.sigma2()),
          log_norm_(-0.5 * std::log(2.0 * std::numbers::pi * config.sigma2()))
    {
        const unsigned ell = config.ell();
        class_weights_.resize(classes_.n_weights() * classes_.n_levels());
        for (unsigned h = 0; h <= ell; ++h)
            for (unsigned s = 0; s < classes_.n_levels(); ++s)
                class_weights_[h * classes_.n_levels() + s] = static_cast<double>(classes_(h, s));
        exponents_.resize(classes_.n_levels());
        scaled_.resize(classes_.n_levels());
    }

    const LeakageConfig& config() const noexcept { return config_; }
    const MaskClassTable& classes() const noexcept { return classes_; }
    unsigned n_weights() const noexcept { return config_.ell() + 1; }

    /// -1/2 log(2 pi sigma^2), added once per trace.
    double log_norm() const noexcept { return log_norm_; }

    double gaussian_exponent(double y, double mean) const noexcept
    {
        const double d = y - mean;
        return -d * d * inv_two_sigma2_;
    }

    /// Writes n_weights() values. Not thread-safe (uses scratch buffers);
    /// give each worker its own model copy.
    void class_log_kernels(double y, std::span<double> out)
    {
        const unsigned ell = config_.ell();
        if (!config_.masked()) {
            for (unsigned h = 0; h <= ell; ++h)
                out[h] = gaussian_exponent(y, h);
            return;
        }
        const unsigned levels = classes_.n_levels();
        double top = -std::numeric_limits<double>::infinity();
        for (unsigned s = 0; s < levels; ++s) {
            exponents_[s] = gaussian_exponent(y, s);
            top = std::max(top, exponents_[s]);
        }
        for (unsigned s = 0; s < levels; ++s)
            scaled_[s] = std::exp(exponents_[s] - top);
        const double mask_prior = -static_cast<double>(ell) * ln2;
        for (unsigned h = 0; h <= ell; ++h) {
            const double* weights = &class_weights_[h * levels];
            double sum = 0.0;
            for (unsigned s = h; s <= 2 * ell - h; s += 2)
                sum += weights[s] * scaled_[s];
            if (sum > 1e-280) {
                out[h] = top + std::log(sum) + mask_prior;
                continue;
            }
            // Observation far from every level of this class: rescale on the
            // class's own support.
            double class_top = -std::numeric_limits<double>::infinity();
            for (unsigned s = h; s <= 2 * ell - h; s += 2)
                class_top = std::max(class_top, exponents_[s]);
            sum = 0.0;
            for (unsigned s = h; s <= 2 * ell - h; s += 2)
                sum += weights[s] * std::exp(exponents_[s] - class_top);
            out[h] = class_top + std::log(sum) + mask_prior;
        }
    }

private:
    LeakageConfig config_;
    MaskClassTable classes_;
    double inv_two_sigma2_;
    double log_norm_;
    std::vector<double> class_weights_;
    std::vector<double> exponents_;
    std::vector<double> scaled_;
};

/// One-pass evaluation of log2 p(y|t) and log2 p(y|u) at every requested
/// prefix length of a draw.
///
/// Per trace, the n_weights() class kernels are computed once; every key
/// hypothesis then adds a single table lookup to its running score. At each
/// prefix length the key scores are reduced by log-sum-exp.
class PrefixEvaluator
{
public:
    explicit PrefixEvaluator(const LeakageConfig& config)
        : model_(config), key_scores_(config.field().order()), kernels_(config.ell() + 1)
    {
    }

    LikelihoodModel& model() noexcept { return model_; }

    /// `prefixes` must be ascending and not exceed the draw length. Outputs
    /// are in bits; a zero-length prefix gives exactly 0.
    void evaluate(std::span<const Word> plaintexts, std::span<const Word> sensitive,
                  std::span<const double> observed, std::span<const std::size_t> prefixes,
                  std::span<double> log2_p_given_t, std::span<double> log2_p_given_u)
    {
        const LeakageConfig& config = model_.config();
        const FieldParams& field = config.field();
        const Word order = field.order();
        const unsigned char* sbox_weights = config.sbox_weights().data();
        const double key_prior = -static_cast<double>(config.ell()) * ln2;
        const bool want_u = !log2_p_given_u.empty();

        std::fill(key_scores_.begin(), key_scores_.end(), 0.0);
        double sensitive_score = 0.0;
        std::size_t next = 0;
        const std::size_t n = prefixes.empty() ? 0 : prefixes.back();
        if (n > observed.size())
            throw std::invalid_argument("prefix longer than the draw");

        auto emit = [&](std::size_t q) {
            while (next < prefixes.size() && prefixes[next] == q) {
                if (q == 0) {
                    log2_p_given_t[next] = 0.0;
                    if (want_u)
                        log2_p_given_u[next] = 0.0;
                } else {
                    const double norm = static_cast<double>(q) * model_.log_norm();
                    log2_p_given_t[next] = (key_prior + log_sum_exp(key_scores_) + norm) / ln2;
                    if (want_u)
                        log2_p_given_u[next] = (sensitive_score + norm) / ln2;
                }
                ++next;
            }
        };

        emit(0);
        for (std::size_t i = 0; i < n; ++i) {
            model_.class_log_kernels(observed[i], kernels_);
            const double* kernel = kernels_.data();
            const Word t = plaintexts[i];
            double* scores = key_scores_.data();
            for (Word k = 0; k < order; ++k)
                scores[k] += kernel[sbox_weights[t ^ k]];
            if (want_u)
                sensitive_score += kernel[hamming_weight(sensitive[i], field)];
            emit(i + 1);
        }
    }

    /// Per-key log-likelihood scores (natural log, constants dropped) over
    /// the first q traces; the maximum-likelihood key maximises them.
    std::span<const double> key_scores(std::span<const Word> plaintexts, std::span<const double> observed,
                                       std::size_t q)
    {
        const LeakageConfig& config = model_.config();
        const Word order = config.field().order();
        const unsigned char* sbox_weights = config.sbox_weights().data();
        std::fill(key_scores_.begin(), key_scores_.end(), 0.0);
        for (std::size_t i = 0; i < q; ++i) {
            model_.class_log_kernels(observed[i], kernels_);
            const double* kernel = kernels_.data();
            const Word t = plaintexts[i];
            for (Word k = 0; k < order; ++k)
                key_scores_[k] += kernel[sbox_weights[t ^ k]];
        }
        return key_scores_;
    }

private:
    LikelihoodModel model_;
    std::vector<double> key_scores_;
    std::vector<double> kernels_;
};

namespace detail {

inline std::vector<double> log_p_given_t(const LeakageConfig& config, std::span<const Word> t,
                                         std::span<const double> y, std::span<const std::size_t> prefixes)
{
    if (t.size() != y.size())
        throw std::invalid_argument("plaintext and observation lengths differ");
    PrefixEvaluator evaluator(config);
    std::vector<double> out(prefixes.size());
    evaluator.evaluate(t, {}, y, prefixes, out, {});
    return out;
}

inline std::vector<std::size_t> full_prefix(std::size_t q) { return {q}; }

}  // namespace detail

/// log2 p(y|t) for the unprotected channel, one value per prefix length.
inline std::vector<double> log_p_y_given_t_unmasked(std::span<const Word> t, std::span<const double> y,
                                                    const LeakageConfig& config,
                                                    std::span<const std::size_t> prefixes)
{
    if (config.masked())
        throw std::invalid_argument("log_p_y_given_t_unmasked called on a masked configuration");
    return detail::log_p_given_t(config, t, y, prefixes);
}

inline double log_p_y_given_t_unmasked(std::span<const Word> t, std::span<const double> y,
                                       const LeakageConfig& config)
{
    const auto prefix = detail::full_prefix(y.size());
    return log_p_y_given_t_unmasked(t, y, config, prefix).front();
}

/// log2 p(y|t) for first-order Boolean masking with zero-offset leakage.
inline std::vector<double> log_p_y_given_t_masked(std::span<const Word> t, std::span<const double> y,
                                                  const LeakageConfig& config,
                                                  std::span<const std::size_t> prefixes)
{
    if (!config.masked())
        throw std::invalid_argument("log_p_y_given_t_masked called on an unmasked configuration");
    return detail::log_p_given_t(config, t, y, prefixes);
}

inline double log_p_y_given_t_masked(std::span<const Word> t, std::span<const double> y,
                                     const LeakageConfig& config)
{
    const auto prefix = detail::full_prefix(y.size());
    return log_p_y_given_t_masked(t, y, config, prefix).front();
}

/// log2 p(y|u), masked or not, one value per prefix length.
inline std::vector<double> log_p_y_given_u(std::span<const Word> u, std::span<const double> y,
                                           const LeakageConfig& config, std::span<const std::size_t> prefixes)
{
    if (u.size() != y.size())
        throw std::invalid_argument("sensitive and observation lengths differ");
    LikelihoodModel model(config);
    std::vector<double> kernels(model.n_weights());
    std::vector<double> out(prefixes.size());
    double score = 0.0;
    std::size_t next = 0;
    for (std::size_t i = 0; i <= y.size() && next < prefixes.size(); ++i) {
        while (next < prefixes.size() && prefixes[next] == i)
            out[next++] = (score + static_cast<double>(i) * model.log_norm()) / ln2;
        if (i == y.size())
            break;
        model.class_log_kernels(y[i], kernels);
        score += kernels[hamming_weight(u[i], config.field())];
    }
    if (next != prefixes.size())
        throw std::invalid_argument("prefix longer than the draw");
    return out;
}

inline std::vector<double> log_p_y_given_u_masked(std::span<const Word> u, std::span<const double> y,
                                                  const LeakageConfig& config,
                                                  std::span<const std::size_t> prefixes)
{
    if (!config.masked())
        throw std::invalid_argument("log_p_y_given_u_masked called on an unmasked configuration");
    return log_p_y_given_u(u, y, config, prefixes);
}

inline double log_p_y_given_u_masked(std::span<const Word> u, std::span<const double> y,
                                     const LeakageConfig& config)
{
    const auto prefix = detail::full_prefix(y.size());
    return log_p_y_given_u_masked(u, y, config, prefix).front();
}

/// log2 p(y|x): a product of Gaussians centred on the noiseless leakage.
inline double log_p_y_given_x(std::span<const double> x, std::span<const double> y, double sigma2)
{
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - x[i];
        sum += -d * d / (2.0 * sigma2) - 0.5 * std::log(2.0 * std::numbers::pi * sigma2);
    }
    return sum / ln2;
}

}  // namespace leakbound
