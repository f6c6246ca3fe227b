#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace leakbound {

/// Strictly increasing trace counts at which curves are evaluated.
/// A leading 0 is allowed and denotes the empty prefix.
class QGrid
{
public:
    QGrid() = default;

    explicit QGrid(std::vector<std::size_t> points) : points_(std::move(points))
    {
        if (points_.empty())
            throw std::invalid_argument("q grid must not be empty");
        for (std::size_t i = 1; i < points_.size(); ++i)
            if (points_[i] <= points_[i - 1])
                throw std::invalid_argument("q grid must be strictly increasing");
    }

    /// `count` points from `start` to `stop` inclusive, rounded to integers,
    /// duplicates removed.
    static QGrid linspace(std::size_t start, std::size_t stop, std::size_t count)
    {
        if (count == 0 || stop < start)
            throw std::invalid_argument("linspace needs count >= 1 and stop >= start");
        std::vector<std::size_t> pts;
        for (std::size_t i = 0; i < count; ++i) {
            const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
            const auto q = static_cast<std::size_t>(std::llround(static_cast<double>(start)
                                                                  + f * static_cast<double>(stop - start)));
            if (pts.empty() || q > pts.back())
                pts.push_back(q);
        }
        return QGrid(std::move(pts));
    }

    const std::vector<std::size_t>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    std::size_t operator[](std::size_t i) const { return points_[i]; }
    std::size_t q_max() const { return points_.back(); }
    bool contains(std::size_t q) const { return std::binary_search(points_.begin(), points_.end(), q); }

    /// Copy with `q` inserted at its sorted position (no-op if present).
    QGrid with_point(std::size_t q) const
    {
        std::vector<std::size_t> pts = points_;
        auto it = std::lower_bound(pts.begin(), pts.end(), q);
        if (it == pts.end() || *it != q)
            pts.insert(it, q);
        return QGrid(std::move(pts));
    }

    bool operator==(const QGrid&) const = default;

private:
    std::vector<std::size_t> points_;
};

}  // namespace leakbound
