#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crt {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
    constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

    constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec3& operator*=(double a) { x *= a; y *= a; z *= a; return *this; }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// A direction on S². Construction normalizes; the stored components always
/// have unit length to within a few ulps.
class UnitVec3 {
public:
    UnitVec3() = default;

    explicit UnitVec3(const Vec3& v) {
        const double n = norm(v);
        if (!(n > 0.0) || !std::isfinite(n)) {
            throw std::invalid_argument("UnitVec3: zero or non-finite vector");
        }
        v_ = (1.0 / n) * v;
    }

    UnitVec3(double x, double y, double z) : UnitVec3(Vec3{x, y, z}) {}

    /// Wraps components that are already unit length (no renormalization, so
    /// callers that build nodes from a fixed formula stay bit-reproducible).
    static UnitVec3 from_unit(const Vec3& v) {
        UnitVec3 u;
        u.v_ = v;
        return u;
    }

    const Vec3& vec() const { return v_; }
    operator const Vec3&() const { return v_; }
    double x() const { return v_.x; }
    double y() const { return v_.y; }
    double z() const { return v_.z; }
    double operator[](int i) const { return v_[i]; }

private:
    Vec3 v_{0.0, 0.0, 1.0};
};

/// Axis of the cone with parameter beta: (cos b, 0, sin b).
inline UnitVec3 cone_axis(double beta) {
    return UnitVec3::from_unit({std::cos(beta), 0.0, std::sin(beta)});
}

/// Axis-aligned box. A default-constructed box is empty.
struct Box {
    Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
    Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

    bool empty() const { return !(lo.x <= hi.x && lo.y <= hi.y && lo.z <= hi.z); }

    void expand(const Box& o) {
        if (o.empty()) return;
        for (int i = 0; i < 3; ++i) {
            lo[i] = std::min(lo[i], o.lo[i]);
            hi[i] = std::max(hi[i], o.hi[i]);
        }
    }

    bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z &&
               p.z <= hi.z;
    }

    Vec3 center() const { return 0.5 * (lo + hi); }
    double circumradius() const { return 0.5 * norm(hi - lo); }
};

/// Parametric interval [t0, t1] where origin + t*dir lies inside the box, or
/// an empty optional-like result (t0 > t1) when the line misses.
struct Span {
    double t0 = 1.0, t1 = 0.0;
    bool empty() const { return !(t0 <= t1); }
};

inline Span intersect(const Box& box, const Vec3& origin, const Vec3& dir) {
    if (box.empty()) return {};
    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        if (dir[i] == 0.0) {
            if (origin[i] < box.lo[i] || origin[i] > box.hi[i]) return {};
            continue;
        }
        const double inv = 1.0 / dir[i];
        double a = (box.lo[i] - origin[i]) * inv;
        double b = (box.hi[i] - origin[i]) * inv;
        if (a > b) std::swap(a, b);
        t0 = std::max(t0, a);
        t1 = std::min(t1, b);
        if (t0 > t1) return {};
    }
    return {t0, t1};
}

}  // namespace crt
