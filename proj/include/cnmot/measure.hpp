#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cnmot {

inline constexpr double kAtomMergeTol = 1e-12;
inline constexpr double kWeightSumTol = 1e-9;
inline constexpr std::size_t kDefaultGridSize = 2048;

// Finitely supported measure on the line. Atoms are sorted and distinct
// (atoms closer than kAtomMergeTol are merged). Weights are non-negative.
class Measure1D {
public:
    Measure1D() = default;

    // Probability measure. Weights must sum to one within kWeightSumTol and are
    // renormalised exactly.
    Measure1D(std::vector<double> atoms, std::vector<double> weights);

    static Measure1D dirac(double x);
    // Total mass in [0, 1]; no renormalisation.
    static Measure1D sub_probability(std::vector<double> atoms, std::vector<double> weights);
    // Empirical measure of weighted samples, normalised to one.
    static Measure1D from_samples(std::span<const double> values, std::span<const double> weights);

    const std::vector<double>& atoms() const { return atoms_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }
    double mass() const { return mass_; }
    bool is_dirac() const { return atoms_.size() == 1; }
    bool positive_support() const { return !atoms_.empty() && atoms_.front() > 0.0; }

    double mean() const;  // barycenter of the normalised measure
    double first_moment() const;  // sum w_i x_i (unnormalised)
    double variance() const;
    // eta((-inf, x]) and eta((-inf, x)); unnormalised for sub-probabilities.
    double cdf(double x) const;
    double cdf_left(double x) const;
    // Left-continuous generalised inverse of the normalised cdf, u in (0, 1].
    double quantile(double u) const;
    // int |x - y| eta(dy)
    double potential(double x) const;
    Measure1D normalized() const;
    Measure1D scaled(double factor) const;
    Measure1D shifted(double c) const;

private:
    void canonicalise();

    std::vector<double> atoms_;
    std::vector<double> weights_;
    double mass_ = 0.0;
};

double barycenter(const Measure1D& m);

// Probability law with piecewise linear cdf: values[k] = F(grid[k]), F
// non-decreasing, F(grid.front()) = 0 and F(grid.back()) = 1, so the density
// is constant on every cell.
class CdfGrid {
public:
    CdfGrid() = default;
    CdfGrid(std::vector<double> grid, std::vector<double> values);

    // N(mean, sd^2) tabulated on n nodes uniform in x over mean +- half_width*sd.
    static CdfGrid gaussian(double mean, double sd, std::size_t n = kDefaultGridSize,
                            double half_width = 8.0);
    // Atomic measure as a grid law: each atom becomes a cell of width `jump`
    // ending at the atom, merged with the base grid.
    static CdfGrid from_measure(const Measure1D& m, std::span<const double> base_grid,
                                double jump = 1e-9);

    const std::vector<double>& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return grid_.size(); }
    double lower() const { return grid_.front(); }
    double upper() const { return grid_.back(); }

    double cdf(double x) const;
    double quantile(double u) const;   // left-continuous
    double quantile_right(double u) const;  // right-continuous
    double mean() const;
    double variance() const;
    double potential(double x) const;
    double max_spacing() const;
    CdfGrid shifted(double c) const;
    // Same law, nodes with F == 0 or F == 1 trimmed down to one on each side.
    CdfGrid trimmed() const;

private:
    std::vector<double> grid_;
    std::vector<double> values_;
};

// Gaussian smoothing F -> F * gamma_t, evaluated exactly on F's grid.
CdfGrid gaussian_convolve_cdf(const CdfGrid& F, double t);

using Law = std::variant<Measure1D, CdfGrid>;

bool is_atomic(const Law& law);
double law_mean(const Law& law);
double law_variance(const Law& law);
double law_cdf(const Law& law, double x);
double law_cdf_left(const Law& law, double x);
double law_quantile(const Law& law, double u);
double law_potential(const Law& law, double x);
double law_lower(const Law& law);
double law_upper(const Law& law);
Law law_shifted(const Law& law, double c);
// Points where the cdf is not smooth (atoms or grid nodes).
std::vector<double> law_breakpoints(const Law& law);

// Convex order mu <=_c nu: equal mass, equal barycenter and u_mu <= u_nu.
bool convex_order_leq(const Measure1D& mu, const Measure1D& nu, double tol = 1e-9);
bool convex_order_leq(const Law& mu, const Law& nu, double tol = 1e-9);

// One irreducible piece (lower, upper) of a pair in convex order. mu and nu
// are normalised; mass is the common mass of the unnormalised pieces.
struct IrreducibleComponent {
    double lower = 0.0;
    double upper = 0.0;
    double mass = 0.0;
    Measure1D mu;
    Measure1D nu;
};

struct Decomposition {
    std::vector<IrreducibleComponent> components;
    Measure1D frozen;  // part of mu (and of nu) sitting outside every component
};

// Throws NotInConvexOrder if mu is not dominated by nu.
Decomposition irreducible_components(const Measure1D& mu, const Measure1D& nu, double tol = 1e-10);

double wasserstein1(const Measure1D& a, const Measure1D& b);
double wasserstein1(const Law& a, const Law& b);
// sup_x |F_a(x) - F_b(x)|
double kolmogorov_distance(const Law& a, const Law& b);

// Law of A + sqrt(variance) Z for A ~ law, Z standard normal, independent.
class SmoothedCdf {
public:
    SmoothedCdf(const Law& law, double variance);

    double lower(double y) const;   // P(A + sZ <= y)
    double upper(double y) const;   // P(A + sZ > y)
    double density(double y) const;
    // Solve lower(y) = p (p <= 1/2 recommended) or upper(y) = q.
    double inverse_lower(double p, double guess) const;
    double inverse_upper(double q, double guess) const;
    double sd() const { return sd_; }

private:
    double eval(double y, bool use_upper, double* dens) const;
    double solve(double target, bool use_upper, double guess) const;

    std::vector<double> a_;
    std::vector<double> b_;
    std::vector<double> m_;
    std::vector<double> cum_;  // cum_[i] = sum of m_ over pieces before i
    bool atomic_ = true;
    double sd_ = 1.0;
    double total_ = 1.0;
};

}  // namespace cnmot
