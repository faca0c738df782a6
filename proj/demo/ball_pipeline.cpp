// Project the reference ball, reconstruct it on a 8^3 grid, print the error.
#include <cstdio>

#include "crt/crt.hpp"

using namespace crt;

int main() {
    const auto f = phantoms::reference_ball();
    const GridSpec grid = GridSpec::covering({-0.5, 1.5, -0.5}, {0.5, 2.5, 0.5}, {8, 8, 8});
    const LatticeSpec spec{linspace(-6.0, 6.0, 16), uniform_beta(90), uniform_s(129)};

    const ConeLattice cf = conical_forward(f, spec);
    std::printf("sinogram: %zu x %zu x %zu\n", spec.u_nodes.size(), spec.beta_nodes.size(), spec.s_nodes.size());

    const ReconResult res = reconstruct(cf, grid);
    const auto& h = res.solve.cgls.residuals;
    for (std::size_t k = 0; k < h.size(); ++k) std::printf("  iter %2zu  residual %.4e\n", k, h[k]);

    const double err = relative_l2(res.field.values(), rasterize(f, grid).values());
    std::printf("relative L2 error vs rasterized ball: %.4f\n", err);
}
