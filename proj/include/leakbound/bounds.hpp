#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "field.hpp"
#include "leakage.hpp"
#include "mi_estimation.hpp"

namespace leakbound {

/// Binary entropy in bits, with H2(0) = H2(1) = 0.
inline double binary_entropy(double p)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("binary_entropy: p outside [0, 1]");
    double h = 0.0;
    if (p > 0.0)
        h -= p * std::log2(p);
    if (p < 1.0)
        h -= (1.0 - p) * std::log2(1.0 - p);
    return h;
}

/// Fano's inequality for a uniform ell-bit key:
///   f_P(p) = ell - H2(p) - (1-p) log2(2^ell - 1)  <=  I(K; Y | T)
/// f_P is strictly increasing on [2^-ell, 1], from 0 to ell.
class FanoContext
{
public:
    explicit FanoContext(unsigned ell) : ell_(FieldParams(ell).ell()) {}

    unsigned ell() const noexcept { return ell_; }
    double key_entropy() const noexcept { return static_cast<double>(ell_); }
    double p_min() const noexcept { return std::ldexp(1.0, -static_cast<int>(ell_)); }

    double fp(double p) const
    {
        if (!(p >= p_min() && p <= 1.0))
            throw std::invalid_argument("fano_fp: p outside [2^-ell, 1]");
        return key_entropy() - binary_entropy(p) - (1.0 - p) * std::log2(std::ldexp(1.0, ell_) - 1.0);
    }

    /// Largest success rate compatible with `mi` bits of leakage: solves
    /// f_P(p) = clamp(mi, 0, ell) by bisection to 1e-9 in p.
    double inverse(double mi) const
    {
        if (!(mi > 0.0))
            return p_min();
        if (mi >= key_entropy())
            return 1.0;
        double lo = p_min(), hi = 1.0;
        for (int it = 0; it < 200 && hi - lo > 1e-9; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (fp(mid) < mi)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    unsigned ell_;
};

inline double fano_fp(double p, const FanoContext& ctx) { return ctx.fp(p); }
inline double fano_inverse(double mi, const FanoContext& ctx) { return ctx.inverse(mi); }

/// Success-rate ceiling at every grid point of an MI curve.
inline std::vector<double> ps_ceiling_curve(const MiCurve& curve, const FanoContext& ctx)
{
    std::vector<double> out(curve.values.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = ctx.inverse(curve.reported(i));
    return out;
}

/// Smallest q at which the (clamped) curve reaches `threshold` bits, by
/// linear interpolation between grid points, rounded up. nullopt if the
/// curve never gets there.
inline std::optional<std::size_t> first_crossing(const QGrid& grid, const std::vector<double>& values,
                                                 double threshold)
{
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < threshold)
            continue;
        if (i == 0)
            return grid[0];
        const double q_lo = static_cast<double>(grid[i - 1]), q_hi = static_cast<double>(grid[i]);
        const double frac = (threshold - values[i - 1]) / (values[i] - values[i - 1]);
        const double q = q_lo + std::clamp(frac, 0.0, 1.0) * (q_hi - q_lo);
        return static_cast<std::size_t>(std::ceil(q - 1e-9));
    }
    return std::nullopt;
}

/// Predicted minimum number of traces for success rate `target_ps`.
inline std::optional<std::size_t> q_min_predict(const MiCurve& curve, double target_ps, const FanoContext& ctx)
{
    if (!(target_ps >= ctx.p_min() && target_ps <= 1.0))
        throw std::invalid_argument("q_min_predict: target outside [2^-ell, 1]");
    const double threshold = std::max(0.0, ctx.fp(target_ps));
    return first_crossing(curve.grid, curve.reported_values(), threshold);
}

/// Var(X) / sigma^2 with X the noiseless per-trace leakage under uniform
/// inputs, enumerated over the leakage alphabet (ell/4 unmasked, ell/2 masked).
inline double snr_of(const LeakageConfig& config)
{
    const unsigned ell = config.ell();
    std::vector<double> pmf(config.max_leakage() + 1, 0.0);
    const double total = std::ldexp(1.0, ell);
    if (config.masked()) {
        const MaskClassTable classes(config.field());
        for (unsigned h = 0; h <= ell; ++h) {
            // words of weight h times masks in class s, over 2^(2 ell) pairs
            double words = 1.0;
            for (unsigned i = 0; i < h; ++i)
                words = words * (ell - i) / (i + 1);
            for (unsigned s = 0; s < classes.n_levels(); ++s)
                pmf[s] += words * static_cast<double>(classes(h, s)) / (total * total);
        }
    } else {
        double words = 1.0;
        for (unsigned h = 0; h <= ell; ++h) {
            pmf[h] = words / total;
            words = words * (ell - h) / (h + 1);
        }
    }
    double mean = 0.0, second = 0.0;
    for (std::size_t s = 0; s < pmf.size(); ++s) {
        mean += pmf[s] * static_cast<double>(s);
        second += pmf[s] * static_cast<double>(s * s);
    }
    return (second - mean * mean) / config.sigma2();
}

/// Shannon capacity bound on I(X;Y|T) for q uses of the AWGN channel.
inline double capacity_bound(std::size_t q, double snr)
{
    if (!(snr >= 0.0))
        throw std::invalid_argument("capacity_bound: snr must be non-negative");
    return 0.5 * static_cast<double>(q) * std::log2(1.0 + snr);
}

/// q times the single-trace MI.
inline double linear_mi_bound(double single_letter_mi, std::size_t q)
{
    return static_cast<double>(q) * single_letter_mi;
}

/// Trace count from the single-letter bound: ceil(f_P(target) / I_1).
inline std::optional<std::size_t> q_min_linear(double single_letter_mi, double target_ps, const FanoContext& ctx)
{
    if (!(single_letter_mi > 0.0))
        return std::nullopt;
    const double threshold = std::max(0.0, ctx.fp(target_ps));
    return static_cast<std::size_t>(std::ceil(threshold / single_letter_mi - 1e-12));
}

struct BoundReport
{
    QGrid grid;
    double sigma2 = 0.0;
    double snr = 0.0;
    double target_ps = 0.0;
    std::vector<double> ps_upper_uyt;
    std::vector<double> ps_upper_xyt;
    std::vector<double> capacity_line;
    std::optional<std::size_t> q_min_uyt;
    std::optional<std::size_t> q_min_xyt;
    std::optional<std::size_t> q_min_linear;
};

/// Assembles every bound for one configuration. The linear variant uses the
/// I(U;Y|T) value at q = 1, which must be on the grid.
inline BoundReport make_bound_report(const LeakageConfig& config, const MiCurves& curves, double target_ps)
{
    const FanoContext ctx(config.ell());
    BoundReport report;
    report.grid = curves.uyt.grid;
    report.sigma2 = config.sigma2();
    report.snr = snr_of(config);
    report.target_ps = target_ps;
    report.ps_upper_uyt = ps_ceiling_curve(curves.uyt, ctx);
    report.ps_upper_xyt = ps_ceiling_curve(curves.xyt, ctx);
    for (std::size_t q : report.grid.points())
        report.capacity_line.push_back(capacity_bound(q, report.snr));
    report.q_min_uyt = q_min_predict(curves.uyt, target_ps, ctx);
    report.q_min_xyt = q_min_predict(curves.xyt, target_ps, ctx);
    report.q_min_linear = q_min_linear(curves.uyt.reported(curves.uyt.index_of(1)), target_ps, ctx);
    return report;
}

}  // namespace leakbound
