#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "field.hpp"
#include "rng.hpp"
#include "sbox.hpp"

namespace leakbound {

/// Full channel description: key -> S(t^k) -> shares -> Hamming weight -> AWGN.
/// With masking on, the two shares' weights are summed into one sample.
class LeakageConfig
{
public:
    LeakageConfig(FieldParams field, SboxSpec sbox, bool masked, double sigma2)
        : field_(field), sbox_(std::move(sbox)), masked_(masked), sigma2_(sigma2)
    {
        if (sbox_.size() != field_.order())
            throw std::invalid_argument("sbox size does not match the field order");
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
            throw std::invalid_argument("sigma2 must be a positive finite number");
        weights_.resize(field_.order());
        for (Word v = 0; v < field_.order(); ++v)
            weights_[v] = static_cast<unsigned char>(hamming_weight(sbox_(v), field_));
    }

    const FieldParams& field() const noexcept { return field_; }
    const SboxSpec& sbox() const noexcept { return sbox_; }
    bool masked() const noexcept { return masked_; }
    double sigma2() const noexcept { return sigma2_; }
    unsigned ell() const noexcept { return field_.ell(); }
    unsigned max_leakage() const noexcept { return masked_ ? 2 * ell() : ell(); }

    /// w_H(S(v)) for every v, the only way keys and plaintexts reach the leakage.
    const std::vector<unsigned char>& sbox_weights() const noexcept { return weights_; }

    LeakageConfig with_sigma2(double sigma2) const { return LeakageConfig(field_, sbox_, masked_, sigma2); }

private:
    FieldParams field_;
    SboxSpec sbox_;
    bool masked_;
    double sigma2_;
    std::vector<unsigned char> weights_;
};

/// One Monte-Carlo draw of q traces under a single key.
struct DrawBatch
{
    Word key = 0;
    std::vector<Word> plaintexts;     // t
    std::vector<Word> masks;          // m, empty when unmasked
    std::vector<Word> sensitive;      // u = S(t ^ k)
    std::vector<double> noiseless;    // x
    std::vector<double> observed;     // y = x + n

    std::size_t size() const noexcept { return plaintexts.size(); }
    bool masked() const noexcept { return !masks.empty(); }

    /// First share of trace i: u ^ m when masked, u otherwise.
    Word masked_share(std::size_t i) const { return masked() ? sensitive[i] ^ masks[i] : sensitive[i]; }
};

/// Fills `out` with draw `draw_index` of the stream. Traces are generated one
/// after another (t, m, noise), so a q-trace draw is a prefix of any longer
/// draw with the same index.
inline void sample_draw_into(const LeakageConfig& config, std::size_t q, const SeededRng& rng,
                             std::uint64_t draw_index, DrawBatch& out)
{
    if (q < 1)
        throw std::invalid_argument("sample_draw requires q >= 1");
    const FieldParams& field = config.field();
    const unsigned ell = field.ell();
    const double sigma = std::sqrt(config.sigma2());
    Variates variates(rng.substream(draw_index));

    out.key = variates.bits(ell);
    out.plaintexts.resize(q);
    out.sensitive.resize(q);
    out.noiseless.resize(q);
    out.observed.resize(q);
    out.masks.resize(config.masked() ? q : 0);

    for (std::size_t i = 0; i < q; ++i) {
        const Word t = variates.bits(ell);
        const Word u = config.sbox()(t ^ out.key);
        out.plaintexts[i] = t;
        out.sensitive[i] = u;
        unsigned x;
        if (config.masked()) {
            const Word m = variates.bits(ell);
            out.masks[i] = m;
            x = hamming_weight(u ^ m, field) + hamming_weight(m, field);
        } else {
            x = hamming_weight(u, field);
        }
        out.noiseless[i] = x;
        out.observed[i] = x + sigma * variates.normal();
    }
}

inline DrawBatch sample_draw(const LeakageConfig& config, std::size_t q, const SeededRng& rng,
                             std::uint64_t draw_index)
{
    DrawBatch batch;
    sample_draw_into(config, q, rng, draw_index, batch);
    return batch;
}

}  // namespace leakbound
