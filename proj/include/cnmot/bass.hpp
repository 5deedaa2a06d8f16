#pragma once

#include <optional>
#include <vector>

#include "cnmot/measure.hpp"
#include "cnmot/transport_map.hpp"

namespace cnmot {

struct BassOptions {
    double tol = 1e-8;
    int max_iter = 500;
    std::size_t grid_size = kDefaultGridSize;
    // Starting law F^(0); standard normal on grid_size nodes when empty.
    std::optional<CdfGrid> initial;
};

struct BassSolution {
    Law mu;
    Law nu;
    Law alpha;            // pinned to barycenter zero
    TransportMap t1;      // Q_nu o (alpha * gamma_1)
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> residual_history;
    double grid_spacing = 0.0;
    // W1 errors of the two legs of the commuting diagram
    double mu_leg_error = 0.0;
    double nu_leg_error = 0.0;
};

// T_1 = Q_nu o F_{alpha * gamma_1}
TransportMap bass_t1(const Law& alpha, const Law& nu);
// One unpinned application of the Bass operator in law form.
Law bass_step(const Law& alpha, const Law& mu, const Law& nu);
// The same operator on a cdf; the result is reported on F's grid (extended
// to cover the new law where needed).
CdfGrid bass_operator(const CdfGrid& F, const Law& mu, const Law& nu);

// Fixed point of the Bass operator for an irreducible pair mu <=_c nu.
BassSolution bass_solve(const Law& mu, const Law& nu, const BassOptions& opts = {});

struct BassComponentSolution {
    IrreducibleComponent component;
    BassSolution solution;
};

struct BassDecomposition {
    std::vector<BassComponentSolution> parts;
    Measure1D frozen;
};

// Solves every irreducible component of a (possibly reducible) atomic pair.
BassDecomposition bass_solve_components(const Measure1D& mu, const Measure1D& nu, const BassOptions& opts = {});

// T_t = T_1 * gamma_{1-t}
SmoothedMap map_at_time(const TransportMap& t1, double t);
SmoothedMap map_at_time(const BassSolution& sol, double t);

// int_0^1 Q_eta(u) Phi^{-1}(u) du
double mcov(const Law& eta);

// E[MCov(kernel, gamma)] of the stretched Brownian motion of a solution.
double sbm_value(const BassSolution& sol);
double value_sbm(const Law& mu, const Law& nu, const BassOptions& opts = {});
// b(mu) V(S(mu), S(nu))
double value_gsbm(const Measure1D& mu, const Measure1D& nu, const BassOptions& opts = {});

}  // namespace cnmot
