#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace leakbound {

/// An element of F_{2^ell}, stored in the low `ell` bits.
using Word = std::uint32_t;

inline constexpr unsigned max_ell = 16;

/// Word width and alphabet size of the targeted field.
class FieldParams
{
public:
    explicit FieldParams(unsigned ell) : ell_(ell)
    {
        if (ell < 1 || ell > max_ell)
            throw std::invalid_argument("ell must lie in [1, " + std::to_string(max_ell)
                                        + "], got " + std::to_string(ell));
    }

    unsigned ell() const noexcept { return ell_; }
    Word order() const noexcept { return Word{1} << ell_; }
    Word mask() const noexcept { return order() - 1; }

    bool operator==(const FieldParams&) const = default;

private:
    unsigned ell_;
};

inline unsigned hamming_weight(Word w, const FieldParams& field) noexcept
{
    return static_cast<unsigned>(std::popcount(w & field.mask()));
}

/// Number of masks m producing zero-offset leakage s = w_H(u^m) + w_H(m),
/// indexed by the Hamming weight h of u. Only depends on h, so the inner
/// mask sum of the masked likelihood collapses to 2*ell+1 terms.
class MaskClassTable
{
public:
    explicit MaskClassTable(const FieldParams& field)
        : ell_(field.ell()), counts_((ell_ + 1) * (2 * ell_ + 1), 0)
    {
        // Each one-bit of u contributes exactly 1 whatever the mask bit;
        // each zero-bit contributes 0 or 2. Hence N[h][h+2j] = 2^h C(ell-h, j).
        for (unsigned h = 0; h <= ell_; ++h) {
            std::uint64_t binom = 1;
            const unsigned free_bits = ell_ - h;
            for (unsigned j = 0; j <= free_bits; ++j) {
                at(h, h + 2 * j) = (std::uint64_t{1} << h) * binom;
                binom = binom * (free_bits - j) / (j + 1);
            }
        }
    }

    unsigned ell() const noexcept { return ell_; }
    unsigned n_weights() const noexcept { return ell_ + 1; }
    unsigned n_levels() const noexcept { return 2 * ell_ + 1; }

    std::uint64_t operator()(unsigned h, unsigned s) const { return counts_.at(h * n_levels() + s); }

private:
    std::uint64_t& at(unsigned h, unsigned s) { return counts_.at(h * n_levels() + s); }

    unsigned ell_;
    std::vector<std::uint64_t> counts_;
};

inline MaskClassTable mask_class_counts(const FieldParams& field) { return MaskClassTable(field); }

}  // namespace leakbound
