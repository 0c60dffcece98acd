#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "alin/errors.hpp"
#include "alin/sparse.hpp"

namespace alin {

/// The box Ω = { x : ‖x‖_∞ ≤ bound } in `dimension` coordinates.
struct Box {
    double bound = 0.0;
    std::size_t dimension = 0;

    Box() = default;
    Box(double bound_, std::size_t dimension_) : bound(bound_), dimension(dimension_) {
        detail::require(std::isfinite(bound) && bound >= 0.0, "Box: bound must be finite and nonnegative");
    }

    double clip(double v) const { return std::clamp(v, -bound, bound); }

    Vector project(ConstSpan x) const {
        detail::require_dims(x.size() == dimension, "Box::project: length mismatch");
        Vector r(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) r[i] = clip(x[i]);
        return r;
    }

    bool contains(ConstSpan x, double slack = 0.0) const {
        if (x.size() != dimension) return false;
        return std::all_of(x.begin(), x.end(), [&](double v) { return std::abs(v) <= bound + slack; });
    }
};

enum class FaceSide : std::int8_t { Lower = -1, Free = 0, Upper = 1 };

/// Partition of the coordinates into I₋ (at −λ), I₀ (free) and I₊ (at +λ).
/// Stored per coordinate, so the three sets are disjoint and cover 0..n-1 by construction.
class FacePartition {
public:
    FacePartition() = default;
    explicit FacePartition(std::vector<FaceSide> sides) : sides_(std::move(sides)) {}

    static FacePartition all_free(std::size_t n) { return FacePartition(std::vector<FaceSide>(n, FaceSide::Free)); }

    /// Classifies x against the box; coordinates within `activity_tol` of a bound are active.
    static FacePartition from_point(ConstSpan x, const Box& box, double activity_tol = 0.0) {
        std::vector<FaceSide> s(x.size(), FaceSide::Free);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] >= box.bound - activity_tol) s[i] = FaceSide::Upper;
            else if (x[i] <= -box.bound + activity_tol) s[i] = FaceSide::Lower;
        }
        return FacePartition(std::move(s));
    }

    std::size_t size() const noexcept { return sides_.size(); }
    FaceSide side(std::size_t i) const { return sides_[i]; }
    bool is_free(std::size_t i) const { return sides_[i] == FaceSide::Free; }
    void set(std::size_t i, FaceSide s) { sides_[i] = s; }

    std::size_t free_count() const {
        return static_cast<std::size_t>(std::count(sides_.begin(), sides_.end(), FaceSide::Free));
    }

    std::vector<std::size_t> indices(FaceSide s) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < sides_.size(); ++i)
            if (sides_[i] == s) out.push_back(i);
        return out;
    }

    friend bool operator==(const FacePartition&, const FacePartition&) = default;

private:
    std::vector<FaceSide> sides_;
};

}  // namespace alin
