#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "crt/errors.hpp"
#include "crt/vec.hpp"

namespace crt {

/// Geometry of a voxel grid. `origin` is the low corner of the box; voxel
/// (i, j, k) has its center at origin + (i + 1/2, j + 1/2, k + 1/2) * spacing.
struct GridSpec {
    Vec3 origin{};
    Vec3 spacing{1.0, 1.0, 1.0};
    std::array<std::size_t, 3> dims{1, 1, 1};

    /// Grid whose box is exactly [lo, hi] with the given voxel counts.
    static GridSpec covering(const Vec3& lo, const Vec3& hi, std::array<std::size_t, 3> dims) {
        GridSpec g;
        g.origin = lo;
        g.dims = dims;
        for (int a = 0; a < 3; ++a) g.spacing[a] = (hi[a] - lo[a]) / static_cast<double>(dims[a]);
        return g;
    }

    void validate() const {
        for (int a = 0; a < 3; ++a) {
            if (dims[a] < 1) throw ConfigError("grid: dims must be >= 1 on every axis");
            if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
                throw ConfigError("grid: spacing must be positive and finite");
            if (!std::isfinite(origin[a])) throw ConfigError("grid: origin must be finite");
        }
        constexpr std::size_t limit = std::size_t{1} << 40;
        if (dims[0] > limit / dims[1] || dims[0] * dims[1] > limit / dims[2])
            throw ConfigError("grid: dimension product overflows");
    }

    std::size_t size() const { return dims[0] * dims[1] * dims[2]; }

    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
        return i + dims[0] * (j + dims[1] * k);
    }

    std::array<std::size_t, 3> unravel(std::size_t n) const {
        return {n % dims[0], (n / dims[0]) % dims[1], n / (dims[0] * dims[1])};
    }

    Vec3 center(std::size_t i, std::size_t j, std::size_t k) const {
        return {origin.x + (static_cast<double>(i) + 0.5) * spacing.x,
                origin.y + (static_cast<double>(j) + 0.5) * spacing.y,
                origin.z + (static_cast<double>(k) + 0.5) * spacing.z};
    }

    Vec3 center(std::size_t n) const {
        const auto ijk = unravel(n);
        return center(ijk[0], ijk[1], ijk[2]);
    }

    double voxel_volume() const { return spacing.x * spacing.y * spacing.z; }
    double min_spacing() const { return std::min({spacing.x, spacing.y, spacing.z}); }

    /// Box where the trilinear interpolant can be nonzero: the hull of voxel
    /// centers grown by one spacing (the hat functions' reach).
    Box support_box() const {
        Box b;
        for (int a = 0; a < 3; ++a) {
            b.lo[a] = origin[a] - 0.5 * spacing[a];
            b.hi[a] = origin[a] + (static_cast<double>(dims[a]) + 0.5) * spacing[a];
        }
        return b;
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Up to eight (voxel index, weight) pairs of the trilinear interpolant at a
/// point. Voxels outside the grid are dropped (zero extension).
struct Stencil {
    std::array<std::size_t, 8> index{};
    std::array<double, 8> weight{};
    int count = 0;
};

inline Stencil trilinear_stencil(const GridSpec& g, const Vec3& p) {
    Stencil st;
    std::array<std::ptrdiff_t, 3> i0{};
    std::array<double, 3> frac{};
    for (int a = 0; a < 3; ++a) {
        const double c = (p[a] - g.origin[a]) / g.spacing[a] - 0.5;
        if (!(c > -1.0 && c < static_cast<double>(g.dims[a]))) return st;
        const double f = std::floor(c);
        i0[a] = static_cast<std::ptrdiff_t>(f);
        frac[a] = c - f;
    }
    for (int corner = 0; corner < 8; ++corner) {
        double w = 1.0;
        std::array<std::ptrdiff_t, 3> idx{};
        bool inside = true;
        for (int a = 0; a < 3; ++a) {
            const int bit = (corner >> a) & 1;
            idx[a] = i0[a] + bit;
            w *= bit ? frac[a] : 1.0 - frac[a];
            if (idx[a] < 0 || idx[a] >= static_cast<std::ptrdiff_t>(g.dims[a])) inside = false;
        }
        if (!inside || w == 0.0) continue;
        st.index[st.count] = g.index(static_cast<std::size_t>(idx[0]), static_cast<std::size_t>(idx[1]),
                                     static_cast<std::size_t>(idx[2]));
        st.weight[st.count] = w;
        ++st.count;
    }
    return st;
}

/// Point samples at voxel centers, trilinear in between, zero beyond the
/// outermost hats. Values are stored x1-fastest.
class ScalarField3 {
public:
    ScalarField3() = default;

    explicit ScalarField3(GridSpec grid) : grid_(grid) {
        grid_.validate();
        values_.assign(grid_.size(), 0.0);
    }

    ScalarField3(GridSpec grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        grid_.validate();
        if (values_.size() != grid_.size()) throw ConfigError("field: value count does not match dims");
        refresh_upper_half();
    }

    const GridSpec& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double& at(std::size_t i, std::size_t j, std::size_t k) { return values_[grid_.index(i, j, k)]; }
    double at(std::size_t i, std::size_t j, std::size_t k) const { return values_[grid_.index(i, j, k)]; }

    /// True when every nonzero voxel has its center strictly above x2 = 0.
    bool upper_half() const { return upper_half_; }
    void set_upper_half(bool v) { upper_half_ = v; }

    void refresh_upper_half() {
        upper_half_ = true;
        for (std::size_t n = 0; n < values_.size(); ++n) {
            if (values_[n] != 0.0 && !(grid_.center(n).y > 0.0)) {
                upper_half_ = false;
                return;
            }
        }
    }

    double operator()(const Vec3& p) const {
        const Stencil st = trilinear_stencil(grid_, p);
        double v = 0.0;
        for (int c = 0; c < st.count; ++c) v += st.weight[c] * values_[st.index[c]];
        return v;
    }

    Box bounds() const { return grid_.support_box(); }

    double sum() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s;
    }

private:
    GridSpec grid_{};
    std::vector<double> values_ = std::vector<double>(1, 0.0);
    bool upper_half_ = true;
};

/// Anything that can be sampled at a point and reports a box outside which it
/// vanishes. Both analytic phantoms and voxel fields qualify.
template <class F>
concept SpatialFunction = requires(const F& f, const Vec3& p) {
    { f(p) } -> std::convertible_to<double>;
    { f.bounds() } -> std::convertible_to<Box>;
};

}  // namespace crt
