#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/FFT>

#include "crt/errors.hpp"
#include "crt/field.hpp"
#include "crt/lattice.hpp"
#include "crt/parallel.hpp"
#include "crt/quadrature.hpp"
#include "crt/transforms.hpp"

namespace crt {

// ---------------------------------------------------------------------------
// Q inversion by filtered backprojection on the disk

/// Ramp filter on s-profiles sampled with step ds, applied by FFT on a
/// zero-padded buffer of at least four times the profile length.
///
/// The frequency response is the DFT of the band-limited Ram-Lak kernel
/// h(0) = 1/(4 ds^2), h(odd k) = -1/(pi k ds)^2, scaled to |sigma| with the
/// 1/(2 pi) of the inverse transform folded in. Sampling |sigma| directly
/// leaves a DC error that does not shrink with refinement.
class RampFilter {
public:
    RampFilter(std::size_t n, double ds) : n_(n) {
        m_ = 1;
        while (m_ < 4 * n) m_ *= 2;
        const double pi = std::numbers::pi;
        std::vector<std::complex<double>> kernel(m_, 0.0), spec;
        for (std::size_t k = 0; k < m_; ++k) {
            const auto d = static_cast<double>(k <= m_ / 2 ? k : m_ - k);
            if (d == 0.0) {
                kernel[k] = 1.0 / (4.0 * ds * ds);
            } else if (static_cast<std::size_t>(d) % 2 == 1) {
                kernel[k] = -1.0 / (pi * pi * d * d * ds * ds);
            }
        }
        Eigen::FFT<double> fft;
        fft.fwd(spec, kernel);
        response_.resize(m_);
        for (std::size_t k = 0; k < m_; ++k) response_[k] = 2.0 * pi * ds * spec[k].real();
    }

    std::vector<double> apply(const std::vector<double>& profile) const {
        std::vector<std::complex<double>> buf(m_, 0.0), spec;
        for (std::size_t i = 0; i < n_; ++i) buf[i] = profile[i];
        Eigen::FFT<double> fft;
        fft.fwd(spec, buf);
        for (std::size_t k = 0; k < m_; ++k) spec[k] *= response_[k];
        fft.inv(buf, spec);
        std::vector<double> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = buf[i].real();
        return out;
    }

private:
    std::size_t n_;
    std::size_t m_;
    std::vector<double> response_;
};

namespace detail {

/// Beta must be uniform over a full or a half turn; s uniform over [-1, 1].
inline void check_fbp_lattice(const std::vector<double>& beta, const std::vector<double>& s) {
    if (s.size() < 3 || !is_uniform(s) || std::abs(s.front() + 1.0) > 1e-12 || std::abs(s.back() - 1.0) > 1e-12)
        throw ConfigError("invert_q: s nodes must be uniform over [-1, 1]");
    if (beta.size() < 2 || !is_uniform(beta) || beta.front() != 0.0)
        throw ConfigError("invert_q: beta nodes must be uniform starting at 0");
    const double span = (beta[1] - beta[0]) * static_cast<double>(beta.size());
    const double pi = std::numbers::pi;
    if (std::abs(span - 2.0 * pi) > 1e-9 && std::abs(span - pi) > 1e-9)
        throw ConfigError("invert_q: beta nodes must cover [0, 2pi) or [0, pi)");
}

inline double interp_uniform(const std::vector<double>& v, double lo, double h, double x) {
    const double g = (x - lo) / h;
    const double last = static_cast<double>(v.size() - 1);
    if (!(g >= 0.0 && g <= last)) return 0.0;
    auto i = static_cast<std::size_t>(std::floor(g));
    if (i + 1 >= v.size()) i = v.size() - 2;
    const double t = g - static_cast<double>(i);
    return (1.0 - t) * v[i] + t * v[i + 1];
}

}  // namespace detail

/// Filtered backprojection of sinogram rows {data(beta_k, s_i)} onto an
/// n x n disk grid: Phi(y) = 1/(2 n_beta) sum_k (ramp * data_k)(y . theta_k).
/// The same prefactor serves full turns and half turns.
inline DiskSamples fbp_disk(const std::vector<double>& beta, const std::vector<double>& s,
                            const std::vector<std::vector<double>>& rows, std::size_t n) {
    detail::check_fbp_lattice(beta, s);
    const double ds = s[1] - s[0];
    const RampFilter ramp(s.size(), ds);
    std::vector<std::vector<double>> filtered(beta.size());
    parallel_for(beta.size(), [&](std::size_t k) { filtered[k] = ramp.apply(rows[k]); });
    std::vector<double> cb(beta.size()), sb(beta.size());
    for (std::size_t k = 0; k < beta.size(); ++k) {
        cb[k] = std::cos(beta[k]);
        sb[k] = std::sin(beta[k]);
    }
    DiskSamples out(n);
    const double scale = 1.0 / (2.0 * static_cast<double>(beta.size()));
    parallel_for(n * n, [&](std::size_t idx) {
        const std::size_t i = idx % n, j = idx / n;
        const double y1 = out.node(i), y2 = out.node(j);
        if (!(y1 * y1 + y2 * y2 < 1.0)) return;
        double acc = 0.0;
        for (std::size_t k = 0; k < beta.size(); ++k)
            acc += detail::interp_uniform(filtered[k], -1.0, ds, y1 * cb[k] + y2 * sb[k]);
        out.at(i, j) = scale * acc;
    });
    return out;
}

/// Recovers Pf(u_iu, .) from Cf(u_iu, ., .): Phi by FBP, then pf = Phi sqrt(1 - |y|^2).
inline HemiField invert_q(const ConeLattice& lat, std::size_t iu, std::size_t n_disk = 41) {
    if (iu >= lat.u_nodes().size()) throw ConfigError("invert_q: u index out of range");
    const auto& beta = lat.beta_nodes();
    const auto& s = lat.s_nodes();
    std::vector<std::vector<double>> rows(beta.size(), std::vector<double>(s.size()));
    for (std::size_t k = 0; k < beta.size(); ++k)
        for (std::size_t i = 0; i < s.size(); ++i) rows[k][i] = lat.at(iu, k, i);
    HemiField h = empty_hemifield(lat.u_nodes()[iu], n_disk);
    const DiskSamples phi = fbp_disk(beta, s, rows, n_disk);
    for (std::size_t j = 0; j < n_disk; ++j)
        for (std::size_t i = 0; i < n_disk; ++i) {
            if (!h.retained[i + n_disk * j]) continue;
            const double y1 = phi.node(i), y2 = phi.node(j);
            h.phi.at(i, j) = phi.at(i, j);
            h.pf.at(i, j) = phi.at(i, j) * std::sqrt(1.0 - (y1 * y1 + y2 * y2));
        }
    return h;
}

// ---------------------------------------------------------------------------
// CGLS

struct CglsOptions {
    std::size_t iterations = 200;
    double tol = 1e-10;
    double lambda = 0.0;  // Tikhonov weight; minimizes |Ax - b|^2 + lambda |x|^2
};

struct CglsResult {
    Eigen::VectorXd x;
    std::vector<double> residuals;  // |b - Ax| (augmented with lambda |x|^2 when lambda > 0), per iterate
    std::size_t iterations = 0;
    bool converged = false;
    bool stagnated = false;  // stopped because a step would have raised the residual
};

/// Conjugate gradients on the normal equations. The residual history is
/// nonincreasing: a step that would raise it (rounding at stagnation) is
/// discarded and the iteration stops.
template <class Apply, class Adjoint>
CglsResult cgls(Apply&& apply, Adjoint&& adjoint, const Eigen::VectorXd& b, Eigen::Index n,
                const CglsOptions& opt = {}) {
    if (!b.allFinite()) throw NumericalError("cgls: data has non-finite entries");
    if (opt.lambda < 0.0) throw ConfigError("cgls: lambda must be >= 0");
    CglsResult res;
    res.x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r = b;
    Eigen::VectorXd s = adjoint(r);
    Eigen::VectorXd p = s;
    double gamma = s.squaredNorm();
    const double gamma0 = gamma;
    const double bnorm = b.norm();
    auto residual = [&](const Eigen::VectorXd& rr, const Eigen::VectorXd& xx) {
        return std::sqrt(rr.squaredNorm() + opt.lambda * xx.squaredNorm());
    };
    res.residuals.push_back(residual(r, res.x));
    if (bnorm == 0.0 || gamma == 0.0) {
        res.converged = true;
        return res;
    }
    for (std::size_t it = 0; it < opt.iterations; ++it) {
        const Eigen::VectorXd q = apply(p);
        const double delta = q.squaredNorm() + opt.lambda * p.squaredNorm();
        if (!(delta > 0.0)) break;
        const double alpha = gamma / delta;
        Eigen::VectorXd x_new = res.x + alpha * p;
        Eigen::VectorXd r_new = r - alpha * q;
        const double rn = residual(r_new, x_new);
        if (!std::isfinite(rn)) throw NumericalError("cgls: iteration produced non-finite values");
        if (rn > res.residuals.back()) {
            res.stagnated = true;
            break;
        }
        res.x = std::move(x_new);
        r = std::move(r_new);
        res.residuals.push_back(rn);
        res.iterations = it + 1;
        s = adjoint(r) - opt.lambda * res.x;
        const double gamma_new = s.squaredNorm();
        if (std::sqrt(gamma_new) <= opt.tol * std::sqrt(gamma0) || rn <= opt.tol * bnorm) {
            res.converged = true;
            break;
        }
        p = s + (gamma_new / gamma) * p;
        gamma = gamma_new;
    }
    return res;
}

inline CglsResult cgls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const CglsOptions& opt = {}) {
    if (a.rows() != b.size()) throw ConfigError("cgls: matrix rows do not match data length");
    return cgls([&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return a * v; },
                [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return a.transpose() * v; }, b, a.cols(), opt);
}

// ---------------------------------------------------------------------------
// P inversion

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Discrete weighted ray operator: one row per retained disk node of each
/// hemifield whose ray meets the grid, one column per voxel with center x2 > 0.
struct POperator {
    SparseRows matrix;
    std::vector<std::size_t> columns;
    Eigen::VectorXd data;
    std::size_t dropped_rows = 0;  // rays that never touch a hat
};

inline POperator assemble_p(const std::vector<HemiField>& fields, const GridSpec& grid, double ray_step = 0.0) {
    grid.validate();
    POperator op;
    std::vector<std::ptrdiff_t> col_of(grid.size(), -1);
    for (std::size_t n = 0; n < grid.size(); ++n)
        if (grid.center(n).y > 0.0) {
            col_of[n] = static_cast<std::ptrdiff_t>(op.columns.size());
            op.columns.push_back(n);
        }
    if (op.columns.empty()) throw ConfigError("solve_p: grid has no voxel with center x2 > 0");

    struct Ray {
        Vec3 vertex;
        UnitVec3 dir;
        double value;
    };
    std::vector<Ray> rays;
    for (const auto& h : fields)
        for (std::size_t j = 0; j < h.n(); ++j)
            for (std::size_t i = 0; i < h.n(); ++i)
                if (h.retained[i + h.n() * j])
                    rays.push_back({{h.u, 0.0, 0.0}, HemiField::direction(h.pf.node(i), h.pf.node(j)), h.pf.at(i, j)});

    const Box box = grid.support_box();
    const double step = ray_step > 0.0 ? ray_step : 0.5 * grid.min_spacing();
    std::vector<std::vector<std::pair<std::ptrdiff_t, double>>> entries(rays.size());
    parallel_for(rays.size(), [&](std::size_t r) {
        auto& row = entries[r];
        for_each_ray_node(box, rays[r].vertex, rays[r].dir.vec(), step, [&](double rr, double h) {
            const Stencil st = trilinear_stencil(grid, rays[r].vertex + rr * rays[r].dir.vec());
            for (int k = 0; k < st.count; ++k) {
                const std::ptrdiff_t c = col_of[st.index[k]];
                if (c >= 0) row.emplace_back(c, h * rr * st.weight[k]);
            }
        });
        std::sort(row.begin(), row.end());
    });

    std::vector<Eigen::Triplet<double>> trips;
    std::vector<double> data;
    for (std::size_t r = 0; r < rays.size(); ++r) {
        if (entries[r].empty()) {
            ++op.dropped_rows;
            continue;
        }
        const auto row = static_cast<int>(data.size());
        for (const auto& [c, w] : entries[r]) trips.emplace_back(row, static_cast<int>(c), w);
        data.push_back(rays[r].value);
    }
    op.matrix.resize(static_cast<Eigen::Index>(data.size()), static_cast<Eigen::Index>(op.columns.size()));
    op.matrix.setFromTriplets(trips.begin(), trips.end());
    op.data = Eigen::Map<const Eigen::VectorXd>(data.data(), static_cast<Eigen::Index>(data.size()));
    return op;
}

struct RankCheck {
    double ratio = 0.0;  // sigma_min / sigma_max of the P operator
    bool passed = false;
};

/// sigma_min / sigma_max from the eigenvalues of A^T A; passes above `min_ratio`.
inline RankCheck p_rank_check(const SparseRows& a, double min_ratio = 1e-6) {
    RankCheck rc;
    if (a.rows() < a.cols()) return rc;
    const Eigen::MatrixXd ata = Eigen::MatrixXd(a.transpose() * a);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ata, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double lmax = ev(ev.size() - 1);
    if (!(lmax > 0.0)) return rc;
    rc.ratio = std::sqrt(std::max(0.0, ev(0)) / lmax);
    rc.passed = rc.ratio > min_ratio;
    return rc;
}

struct SolvePOptions {
    /// The iteration cap doubles as the regularizer: at desk scale the error
    /// against the phantom bottoms out after about ten CGLS steps.
    CglsOptions cgls{10, 1e-8, 0.0};
    bool rank_check = true;
    double min_ratio = 1e-6;
    double ray_step = 0.0;
};

struct SolvePResult {
    ScalarField3 field;
    CglsResult cgls;
    RankCheck rank;
    std::size_t rows = 0;
    std::size_t dropped_rows = 0;
};

/// Least-squares voxel field (centers x2 > 0) reproducing the hemifields.
inline SolvePResult solve_p(const std::vector<HemiField>& fields, const GridSpec& grid, const SolvePOptions& opt = {}) {
    if (fields.empty()) throw ConfigError("solve_p: no hemifields");
    const POperator op = assemble_p(fields, grid, opt.ray_step);
    SolvePResult res;
    res.rows = static_cast<std::size_t>(op.matrix.rows());
    res.dropped_rows = op.dropped_rows;
    if (opt.rank_check) {
        res.rank = p_rank_check(op.matrix, opt.min_ratio);
        if (!res.rank.passed && opt.cgls.lambda == 0.0)
            throw NumericalError("solve_p: P operator is numerically rank deficient (sigma_min/sigma_max = " +
                                 std::to_string(res.rank.ratio) + ", rows " + std::to_string(res.rows) +
                                 ", cols " + std::to_string(op.columns.size()) + ")");
    }
    res.cgls = cgls([&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return op.matrix * v; },
                    [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return op.matrix.transpose() * v; }, op.data,
                    static_cast<Eigen::Index>(op.columns.size()), opt.cgls);
    res.field = ScalarField3(grid);
    for (std::size_t c = 0; c < op.columns.size(); ++c)
        res.field.values()[op.columns[c]] = res.cgls.x(static_cast<Eigen::Index>(c));
    res.field.refresh_upper_half();
    return res;
}

// ---------------------------------------------------------------------------
// Full pipeline

struct ReconOptions {
    std::size_t disk_nodes = 161;
    SolvePOptions solve{};
    bool keep_hemifields = false;
};

struct ReconResult {
    ScalarField3 field;
    SolvePResult solve;
    std::vector<HemiField> hemifields;  // filled when requested
};

/// invert_q at every u node, then solve_p.
inline ReconResult reconstruct(const ConeLattice& lat, const GridSpec& grid, const ReconOptions& opt = {}) {
    detail::check_fbp_lattice(lat.beta_nodes(), lat.s_nodes());
    std::vector<HemiField> fields(lat.u_nodes().size());
    for (std::size_t iu = 0; iu < fields.size(); ++iu) fields[iu] = invert_q(lat, iu, opt.disk_nodes);
    ReconResult res;
    res.solve = solve_p(fields, grid, opt.solve);
    res.field = res.solve.field;
    if (opt.keep_hemifields) res.hemifields = std::move(fields);
    return res;
}

inline double relative_l2(const std::vector<double>& a, const std::vector<double>& ref) {
    if (a.size() != ref.size()) throw ConfigError("relative_l2: size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ref[i]) * (a[i] - ref[i]);
        den += ref[i] * ref[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

}  // namespace crt
