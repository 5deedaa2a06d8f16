#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cnmot/bass.hpp"
#include "cnmot/ensemble.hpp"
#include "cnmot/measure.hpp"
#include "cnmot/report.hpp"

namespace cnmot {

enum class Resample { importance_weights, systematic, rejection };

struct SimConfig {
    std::size_t n_paths = 10000;
    std::size_t n_steps = 256;
    std::uint64_t seed = 42;
    Resample resample = Resample::importance_weights;
    double bound = 0.0;       // M for rejection sampling
    unsigned threads = 0;     // 0: hardware concurrency
    std::size_t qv_window = 0;  // 0: max(4, n_steps / 64)

    void validate() const;
};

// Paths are generated in blocks of this many, one generator per block.
inline constexpr std::size_t kPathBlock = 1024;
// Constant C of the discretisation allowance C (dt + grid spacing).
inline constexpr double kAllowanceConstant = 1.0;

PathEnsemble sample_brownian(const Law& alpha, const SimConfig& cfg);
// X_t = T_t(B_t) with B_0 ~ alpha.
PathEnsemble sample_sbm(const BassSolution& sol, const SimConfig& cfg);
// Reducible pairs: each path picks a component (or a frozen atom) by mass.
PathEnsemble sample_sbm(const BassDecomposition& dec, const SimConfig& cfg);
// Reciprocal of the SBM between S(mu) and S(nu), reweighted by the terminal value.
PathEnsemble sample_gsbm(const Measure1D& mu, const Measure1D& nu, const SimConfig& cfg,
                         const BassOptions& opts = {});

// Windowed realised volatility. Window j covers steps [j w, (j+1) w).
struct QvEstimate {
    std::size_t window = 0;
    std::size_t n_windows = 0;
    std::vector<double> t;        // window start times
    std::vector<double> dt;       // window lengths
    std::vector<double> s_abs;    // per (path, window): sigma-hat
    std::vector<double> s_rel;    // sigma-hat / x, relative increments on the left endpoint
    std::vector<double> rv_log;   // realised variance rate of log X per window (positive paths)
    std::vector<double> x_left;   // value at the window start

    std::size_t index(std::size_t path, std::size_t j) const { return path * n_windows + j; }
};

// E[sqrt(chi2_w / w)], the bias of a root-mean-square over w Gaussian increments.
double qv_debias(std::size_t w);
std::size_t default_qv_window(std::size_t n_steps);
QvEstimate realized_qv(const PathEnsemble& e, std::size_t window = 0);

struct MartingaleDiagnostic {
    double residual = 0.0;
    double threshold = 0.0;
    bool pass = true;
};

// max over times t and X_t-bins of |weighted mean of X_1 - X_t| / sd(X_1)
double martingale_residual(const PathEnsemble& e, std::size_t n_bins);
// Same, with the CLT threshold 4 / sqrt(smallest effective bin size).
MartingaleDiagnostic martingale_diagnostic(const PathEnsemble& e, std::size_t n_bins);

// Running cost h(t, x, s) with s the relative volatility sigma_t / x_t.
enum class CostTag { generic, t1, t2 };

struct CostH {
    std::string name;
    std::function<double(double, double, double)> h;
    double lower_bound = 0.0;
    CostTag tag = CostTag::generic;
    std::function<double(double, double)> htilde;  // t1 only: h = htilde(t, x) s

    double operator()(double t, double x, double s) const { return h(t, x, s); }
};

CostH cost_t1(std::string name, std::function<double(double, double)> htilde);
// Generic cost; tagged t2 when the functional equation holds on a probe set.
CostH cost_generic(std::string name, std::function<double(double, double, double)> h, double lower_bound = 0.0);
// h(t, x, s) == x h(t, 1/x, s) on a fixed probe set
bool satisfies_t2(const CostH& h, double tol = 1e-12);

// (t, x, s) -> x h(t, 1/x, s)
CostH s_star_h(const CostH& h);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

// Per-path time integral of h along the windows of q.
std::vector<double> path_cost_samples(const PathEnsemble& e, const QvEstimate& q, const CostH& h);
Estimate weighted_mean(const std::vector<double>& x, const std::vector<double>& w);
Estimate path_cost(const PathEnsemble& e, const CostH& h, std::size_t window = 0);

// Discretisation allowance C (dt + grid spacing)
double discretisation_allowance(const PathEnsemble& e, double grid_spacing);

// L = cost(e, s*(h)) against R = b cost(S(e), h), paired per path.
// For t2 costs the report also compares cost(e, h) with cost(S(e), h).
CheckReport check_ct_identity(const PathEnsemble& e, const CostH& h, double grid_spacing = 0.0);

// E int (1 - s)^2 dt against 1 - 2 E int s dt - 2 int log dnu + 2 int log dmu.
CheckReport check_lemma35(const PathEnsemble& e, const Measure1D& mu, const Measure1D& nu,
                          double grid_spacing = 0.0);

// value (from the fixed point) against the MC estimate of E int s_t dt.
CheckReport check_value(const PathEnsemble& e, double value, double grid_spacing = 0.0);
// largest grid spacing over the solved components
double grid_spacing(const BassDecomposition& dec);

// Weighted W1 of a marginal against a law, with the MC scale int sqrt(F(1-F)) / sqrt(n_eff).
CheckReport check_marginal(const PathEnsemble& e, std::size_t k, const Law& target, double grid_tol);

// |sigma - sigma'|
double gaw_gbm(double sigma, double sigma_p);
// E int (sigma_t - sigma'_t)^2 dt for two GBMs driven by the same Brownian motion.
Estimate gaw_gbm_mc(double sigma, double sigma_p, const SimConfig& cfg);

}  // namespace cnmot
