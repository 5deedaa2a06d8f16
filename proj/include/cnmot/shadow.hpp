#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cnmot/coupling.hpp"
#include "cnmot/lp.hpp"
#include "cnmot/measure.hpp"
#include "cnmot/report.hpp"

namespace cnmot {

inline constexpr std::size_t kDefaultCells = 64;

struct SourceCell {
    double x;
    double u;     // label of the cell (its midpoint)
    double mass;
};

// Discretised source: a measure on (x, u) carried by finitely many cells.
struct Source {
    std::vector<SourceCell> cells;
    std::size_t K = kDefaultCells;
    std::string preset = "custom";

    Measure1D mu() const;
    double total() const;
    void validate() const;
    // cells sitting at x, masses normalised to one
    Source slice(double x) const;
};

// u = F_mu(x): atoms split across contiguous u-cells of the grid k / K.
Source source_monotone(const Measure1D& mu, std::size_t K = kDefaultCells);
// u = 1 - F_mu(x)
Source source_antitone(const Measure1D& mu, std::size_t K = kDefaultCells);
// mu x Lebesgue: every u-cell split among the atoms in increasing x
Source source_product(const Measure1D& mu, std::size_t K = kDefaultCells);
// (x, u, m) -> (1/x, u, x m / sum x m)
Source cn_source(const Source& src);

struct MotSolution {
    MartingaleCoupling pi;
    double value = 0.0;
};

// cost is row-major over (mu atoms) x (nu atoms)
MotSolution mot_solve_linear(const Measure1D& mu, const Measure1D& nu, const std::vector<double>& cost,
                             const LpOptions& opts = {});

// Convexly minimal rho <= nu with theta <=_c rho.
Measure1D shadow_measure(const Measure1D& theta, const Measure1D& nu, const LpOptions& opts = {});

// phi(u) psi(y) with phi decreasing and psi strictly convex
struct ShadowObjective {
    std::function<double(double)> phi = [](double u) { return 1.0 - u; };
    std::function<double(double)> psi = [](double y) { return std::sqrt(1.0 + y * y); };
};

struct ShadowCoupling {
    LiftedCoupling lifted;
    MartingaleCoupling projection;
    double value = 0.0;
};

// Lifted LP over couplings of the source cells with nu.
ShadowCoupling shadow_coupling(const Source& src, const Measure1D& nu, const ShadowObjective& obj = {},
                               const LpOptions& opts = {});
// Cumulative shadows: cells in increasing u, each mapped to the shadow of its
// mass in what is left of nu.
ShadowCoupling shadow_coupling_incremental(const Source& src, const Measure1D& nu, const LpOptions& opts = {});

// Inner cost over lifted couplings from delta_m x slice to eta; b(eta) must equal m.
double weak_shadow_cost(const Measure1D& eta, const Source& slice, double m, const LpOptions& opts = {});

// A = S(projection of the shadow coupling with source src) against
// B = projection of the shadow coupling with source S^(src) between S(mu), S(nu).
CheckReport verify_cn_shadow(const Source& src, const Measure1D& nu, double tol = 1e-8);

// No x < x' with y- < y' < y+ where (x, y-), (x, y+), (x', y') carry mass.
bool is_left_monotone(const MartingaleCoupling& pi, double mass_tol = 1e-12);
bool is_right_monotone(const MartingaleCoupling& pi, double mass_tol = 1e-12);

}  // namespace cnmot
