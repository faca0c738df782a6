#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crt/errors.hpp"
#include "crt/field.hpp"
#include "crt/lattice.hpp"
#include "crt/parallel.hpp"
#include "crt/quadrature.hpp"
#include "crt/support.hpp"
#include "crt/transforms.hpp"
#include "crt/verification.hpp"

namespace crt {

enum class ScenarioKind { full, directions, vertices, local };

inline std::string to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::full: return "full";
        case ScenarioKind::directions: return "directions";
        case ScenarioKind::vertices: return "vertices";
        case ScenarioKind::local: return "local";
    }
    return "unknown";
}

/// Accepts the names above and the numbered aliases theorem2, theorem3, theorem4.
inline ScenarioKind scenario_from_string(const std::string& s) {
    for (auto k : {ScenarioKind::full, ScenarioKind::directions, ScenarioKind::vertices, ScenarioKind::local})
        if (to_string(k) == s) return k;
    if (s == "theorem2") return ScenarioKind::directions;
    if (s == "theorem3") return ScenarioKind::vertices;
    if (s == "theorem4") return ScenarioKind::local;
    throw ConfigError("unknown scenario '" + s + "'");
}

/// A partial-data experiment: which voxels are unknowns and which cone samples
/// are observed.
///
/// Columns are voxels with center x2 > 0, further restricted to `column_ball`
/// when set. Rows are the lattice samples with |s| < 1; for the local scenario
/// only cones missing cl(U) are kept. The beta set and the vertex set A are
/// expressed through the lattice itself.
struct Scenario {
    ScenarioKind kind = ScenarioKind::full;
    GridSpec grid;
    LatticeSpec lattice;
    std::optional<BallSet> column_ball;
    SupportSet U;
};

struct AssemblyOptions {
    std::size_t max_entries = 10'000'000;
    std::uint64_t seed = 42;
    QuadratureSpec quadrature{};
};

struct RowSample {
    std::size_t iu, ib, is;
};

class RestrictedOperator {
public:
    Eigen::MatrixXd matrix;
    std::vector<RowSample> rows;
    std::vector<std::size_t> columns;  // voxel index of each column
    GridSpec grid;
    LatticeSpec lattice;
    ScenarioKind kind = ScenarioKind::full;

    std::size_t dropped_rim = 0;     // |s| >= 1: the cone is empty
    std::size_t dropped_mask = 0;    // cone meets cl(U)
    std::size_t dropped_budget = 0;  // stratified subsampling

    Eigen::Index n_rows() const { return matrix.rows(); }
    Eigen::Index n_cols() const { return matrix.cols(); }

    /// Voxel values -> column vector (entries of dropped voxels ignored).
    Eigen::VectorXd restrict(const ScalarField3& f) const {
        if (!(f.grid() == grid)) throw ConfigError("restrict: field grid differs from operator grid");
        Eigen::VectorXd x(static_cast<Eigen::Index>(columns.size()));
        for (std::size_t c = 0; c < columns.size(); ++c) x(static_cast<Eigen::Index>(c)) = f.values()[columns[c]];
        return x;
    }

    ScalarField3 extend(const Eigen::VectorXd& x) const {
        ScalarField3 f(grid);
        for (std::size_t c = 0; c < columns.size(); ++c) f.values()[columns[c]] = x(static_cast<Eigen::Index>(c));
        f.refresh_upper_half();
        return f;
    }
};

inline std::vector<std::size_t> scenario_columns(const Scenario& sc) {
    std::vector<std::size_t> cols;
    for (std::size_t n = 0; n < sc.grid.size(); ++n) {
        const Vec3 c = sc.grid.center(n);
        if (!(c.y > 0.0)) continue;
        if (sc.column_ball && !(norm(c - sc.column_ball->center) < sc.column_ball->radius)) continue;
        cols.push_back(n);
    }
    return cols;
}

namespace detail {

/// Keeps `keep` of `n` indices, one drawn uniformly from each of `keep`
/// consecutive strata.
inline std::vector<std::size_t> stratified_pick(std::size_t n, std::size_t keep, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> out(keep);
    for (std::size_t k = 0; k < keep; ++k) {
        const std::size_t lo = n * k / keep, hi = n * (k + 1) / keep;
        std::uniform_int_distribution<std::size_t> d(lo, hi - 1);
        out[k] = d(rng);
    }
    return out;
}

}  // namespace detail

/// Dense matrix of the conical transform on trilinear voxel hats. Entry
/// (row, col) is the quadrature weight the matrix-free conical_forward gives
/// that hat at that sample: the same circle nodes and ray nodes are visited.
inline RestrictedOperator assemble(const Scenario& sc, const AssemblyOptions& opt = {}) {
    sc.grid.validate();
    sc.lattice.validate();
    RestrictedOperator op;
    op.grid = sc.grid;
    op.lattice = sc.lattice;
    op.kind = sc.kind;
    op.columns = scenario_columns(sc);
    if (op.columns.empty()) throw ConfigError("assemble: no voxel with center x2 > 0 in the column region");

    const auto& L = sc.lattice;
    std::vector<RowSample> candidates;
    for (std::size_t iu = 0; iu < L.u_nodes.size(); ++iu)
        for (std::size_t ib = 0; ib < L.beta_nodes.size(); ++ib)
            for (std::size_t is = 0; is < L.s_nodes.size(); ++is) {
                const double s = L.s_nodes[is];
                if (!(std::abs(s) < 1.0)) {
                    ++op.dropped_rim;
                    continue;
                }
                if (sc.kind == ScenarioKind::local && !cone_misses_set(L.u_nodes[iu], L.beta_nodes[ib], s, sc.U)) {
                    ++op.dropped_mask;
                    continue;
                }
                candidates.push_back({iu, ib, is});
            }
    if (candidates.empty()) throw ConfigError("assemble: the scenario mask leaves no cone samples");

    const std::size_t ncol = op.columns.size();
    if (ncol > opt.max_entries) throw ConfigError("assemble: column count alone exceeds the entry budget");
    const std::size_t max_rows = opt.max_entries / ncol;
    if (candidates.size() > max_rows) {
        op.dropped_budget = candidates.size() - max_rows;
        for (std::size_t k : detail::stratified_pick(candidates.size(), max_rows, opt.seed))
            op.rows.push_back(candidates[k]);
    } else {
        op.rows = std::move(candidates);
    }

    std::vector<std::ptrdiff_t> col_of(sc.grid.size(), -1);
    for (std::size_t c = 0; c < ncol; ++c) col_of[op.columns[c]] = static_cast<std::ptrdiff_t>(c);

    const Box box = sc.grid.support_box();
    const double step = opt.quadrature.ray_step > 0.0 ? opt.quadrature.ray_step : 0.5 * sc.grid.min_spacing();
    const auto nrow = static_cast<Eigen::Index>(op.rows.size());
    // row-major scratch so each worker writes a contiguous block
    std::vector<double> dense(op.rows.size() * ncol, 0.0);
    parallel_for(op.rows.size(), [&](std::size_t r) {
        const RowSample& rs = op.rows[r];
        const Vec3 vertex{L.u_nodes[rs.iu], 0.0, 0.0};
        const CircleNodes ring = circle_nodes(cone_axis(L.beta_nodes[rs.ib]), L.s_nodes[rs.is], opt.quadrature.circle_nodes);
        double* row = dense.data() + r * ncol;
        for (const auto& alpha : ring.nodes) {
            for_each_ray_node(box, vertex, alpha.vec(), step, [&](double rr, double h) {
                const Stencil st = trilinear_stencil(sc.grid, vertex + rr * alpha.vec());
                for (int k = 0; k < st.count; ++k) {
                    const std::ptrdiff_t c = col_of[st.index[k]];
                    if (c >= 0) row[c] += ring.weight * h * rr * st.weight[k];
                }
            });
        }
    });
    op.matrix.resize(nrow, static_cast<Eigen::Index>(ncol));
    for (Eigen::Index r = 0; r < nrow; ++r)
        for (std::size_t c = 0; c < ncol; ++c)
            op.matrix(r, static_cast<Eigen::Index>(c)) = dense[static_cast<std::size_t>(r) * ncol + c];
    return op;
}

/// Samples of a sinogram at the operator's rows.
inline Eigen::VectorXd restrict_data(const RestrictedOperator& op, const ConeLattice& lat) {
    Eigen::VectorXd y(op.n_rows());
    for (std::size_t r = 0; r < op.rows.size(); ++r)
        y(static_cast<Eigen::Index>(r)) = lat.at(op.rows[r].iu, op.rows[r].ib, op.rows[r].is);
    return y;
}

struct SpectrumReport {
    Eigen::VectorXd singular_values;  // descending
    double threshold = 1e-8;
    Eigen::Index rank = 0;
    Eigen::MatrixXd null_basis;  // columns
    std::vector<double> outside_w;

    double ratio_min() const {
        if (singular_values.size() == 0 || singular_values(0) == 0.0) return 0.0;
        return singular_values(singular_values.size() - 1) / singular_values(0);
    }
};

/// Full singular spectrum; columns of V with sigma / sigma_max < threshold (and
/// every direction beyond the row count) span the numerical null space.
inline SpectrumReport svd_nullspace(const Eigen::MatrixXd& a, double threshold = 1e-8) {
    if (!a.allFinite()) throw NumericalError("svd_nullspace: matrix has non-finite entries");
    if (!(threshold > 0.0)) throw ConfigError("svd_nullspace: threshold must be positive");
    SpectrumReport rep;
    rep.threshold = threshold;
    const Eigen::Index n = a.cols();
    if (a.rows() == 0 || a.isZero(0.0)) {
        rep.singular_values = Eigen::VectorXd::Zero(std::min(a.rows(), n));
        rep.null_basis = Eigen::MatrixXd::Identity(n, n);
        return rep;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
    rep.singular_values = svd.singularValues();
    const double smax = rep.singular_values(0);
    for (Eigen::Index i = 0; i < rep.singular_values.size(); ++i)
        if (rep.singular_values(i) >= threshold * smax) ++rep.rank;
    rep.null_basis = svd.matrixV().rightCols(n - rep.rank);
    return rep;
}

inline SpectrumReport svd_nullspace(const RestrictedOperator& op, double threshold = 1e-8) {
    return svd_nullspace(op.matrix, threshold);
}

/// Energy fraction of each null vector on columns whose voxel center lies outside W.
inline std::vector<double> nullspace_support(const SpectrumReport& rep, const RegionW& w,
                                             const RestrictedOperator& op) {
    std::vector<double> out;
    if (rep.null_basis.cols() == 0) return out;
    std::vector<char> outside(op.columns.size());
    for (std::size_t c = 0; c < op.columns.size(); ++c) outside[c] = !w.contains(op.grid.center(op.columns[c]));
    for (Eigen::Index k = 0; k < rep.null_basis.cols(); ++k) {
        double tot = 0.0, off = 0.0;
        for (Eigen::Index c = 0; c < rep.null_basis.rows(); ++c) {
            const double v2 = rep.null_basis(c, k) * rep.null_basis(c, k);
            tot += v2;
            if (outside[static_cast<std::size_t>(c)]) off += v2;
        }
        out.push_back(tot > 0.0 ? off / tot : 0.0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Desk-scale scenarios

/// Directions in S given as `n_angles` equispaced angles over [0, pi); all u
/// and s sampled.
inline Scenario direction_scenario(std::size_t n_angles = 9, std::size_t grid_n = 8) {
    Scenario sc;
    sc.kind = ScenarioKind::directions;
    sc.grid = GridSpec::covering({-1, 0, -1}, {1, 2, 1}, {grid_n, grid_n, grid_n});
    sc.lattice = {linspace(-3.0, 3.0, 17), half_turn_beta(n_angles), uniform_s(65)};
    return sc;
}

/// Eight vertices, full beta and s; unknowns inside the half-ball
/// |x - (0,0,1)| < 1, x2 > 0.
inline Scenario vertex_scenario(std::size_t n_vertices = 8) {
    Scenario sc;
    sc.kind = ScenarioKind::vertices;
    sc.grid = GridSpec::covering({-1, 0, 0}, {1, 1, 2}, {8, 4, 8});
    sc.lattice = {linspace(-1.5, 1.5, n_vertices), uniform_beta(36), uniform_s(33)};
    sc.column_ball = BallSet{{0.0, 0.0, 1.0}, 1.0};
    return sc;
}

/// Vertices A in [-0.5, 0.5], cones missing cl(U) for U = B((0,2,0), 0.5).
inline Scenario local_scenario(std::size_t grid_n = 12) {
    Scenario sc;
    sc.kind = ScenarioKind::local;
    sc.grid = GridSpec::covering({-1.5, 0.5, -1.5}, {1.5, 3.5, 1.5}, {grid_n, grid_n, grid_n});
    sc.lattice = {linspace(-0.5, 0.5, 5), uniform_beta(36), uniform_s(65)};
    sc.U = BallSet{{0.0, 2.0, 0.0}, 0.5};
    return sc;
}

}  // namespace crt
