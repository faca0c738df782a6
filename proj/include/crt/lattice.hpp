#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "crt/errors.hpp"

namespace crt {

/// Node sets of a (u, beta, s) sampling lattice.
struct LatticeSpec {
    std::vector<double> u_nodes;
    std::vector<double> beta_nodes;
    std::vector<double> s_nodes;

    std::size_t size() const { return u_nodes.size() * beta_nodes.size() * s_nodes.size(); }

    void validate() const {
        if (u_nodes.empty() || beta_nodes.empty() || s_nodes.empty())
            throw ConfigError("lattice: every node set must be non-empty");
        auto sorted = [](const std::vector<double>& v) { return std::is_sorted(v.begin(), v.end()); };
        if (!sorted(u_nodes) || !sorted(beta_nodes) || !sorted(s_nodes))
            throw ConfigError("lattice: node sets must be sorted");
        for (double b : beta_nodes)
            if (!(b >= 0.0 && b < 2.0 * std::numbers::pi)) throw ConfigError("lattice: beta outside [0, 2pi)");
        for (double s : s_nodes)
            if (!(s >= -1.0 && s <= 1.0)) throw ConfigError("lattice: s outside [-1, 1]");
    }
};

/// `count` equispaced values over [lo, hi], endpoints included (count == 1
/// gives the midpoint).
inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = 0.5 * (lo + hi);
        return v;
    }
    const double h = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) v[i] = lo + h * static_cast<double>(i);
    v.back() = hi;
    return v;
}

/// beta_k = 2 pi k / count.
inline std::vector<double> uniform_beta(std::size_t count) {
    std::vector<double> v(count);
    for (std::size_t k = 0; k < count; ++k)
        v[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
    return v;
}

/// beta_k = pi k / count: `count` projectively distinct directions.
inline std::vector<double> half_turn_beta(std::size_t count) {
    std::vector<double> v(count);
    for (std::size_t k = 0; k < count; ++k)
        v[k] = std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
    return v;
}

inline std::vector<double> uniform_s(std::size_t count) { return linspace(-1.0, 1.0, count); }

/// Conical sinogram: Cf sampled over a lattice, s fastest, then beta, then u.
class ConeLattice {
public:
    ConeLattice() = default;

    explicit ConeLattice(LatticeSpec spec) : spec_(std::move(spec)) {
        spec_.validate();
        data_.assign(spec_.size(), 0.0);
    }

    const LatticeSpec& spec() const { return spec_; }
    const std::vector<double>& u_nodes() const { return spec_.u_nodes; }
    const std::vector<double>& beta_nodes() const { return spec_.beta_nodes; }
    const std::vector<double>& s_nodes() const { return spec_.s_nodes; }

    std::size_t index(std::size_t iu, std::size_t ib, std::size_t is) const {
        return (iu * spec_.beta_nodes.size() + ib) * spec_.s_nodes.size() + is;
    }

    double& at(std::size_t iu, std::size_t ib, std::size_t is) { return data_[index(iu, ib, is)]; }
    double at(std::size_t iu, std::size_t ib, std::size_t is) const { return data_[index(iu, ib, is)]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    /// Cf(u_i, beta_j, s) with linear interpolation in s; zero for |s| > 1.
    double value_at(std::size_t iu, std::size_t ib, double s) const {
        if (std::abs(s) > 1.0) return 0.0;
        const auto& sn = spec_.s_nodes;
        if (s < sn.front() || s > sn.back()) return 0.0;
        auto it = std::upper_bound(sn.begin(), sn.end(), s);
        if (it == sn.end()) return at(iu, ib, sn.size() - 1);
        const std::size_t hi = static_cast<std::size_t>(it - sn.begin());
        if (hi == 0) return at(iu, ib, 0);
        const std::size_t lo = hi - 1;
        const double t = (s - sn[lo]) / (sn[hi] - sn[lo]);
        return (1.0 - t) * at(iu, ib, lo) + t * at(iu, ib, hi);
    }

private:
    LatticeSpec spec_;
    std::vector<double> data_;
};

/// True when the nodes are equispaced to within a relative 1e-9 of the step.
inline bool is_uniform(const std::vector<double>& v) {
    if (v.size() < 2) return true;
    const double h = (v.back() - v.front()) / static_cast<double>(v.size() - 1);
    if (!(h > 0.0)) return false;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs((v[i] - v[i - 1]) - h) > 1e-9 * h) return false;
    return true;
}

}  // namespace crt
