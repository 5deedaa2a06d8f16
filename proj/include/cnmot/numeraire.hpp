#pragma once

#include <functional>
#include <span>
#include <string>

#include "cnmot/coupling.hpp"
#include "cnmot/ensemble.hpp"
#include "cnmot/measure.hpp"

namespace cnmot {

// b(eta) = int x eta(dx) / eta(R), the normaliser of the numeraire change.
double cn_normalizer(const Measure1D& eta);

// x eta(dx) / b(eta) pushed forward by x -> 1/x.
Measure1D cn_measure(const Measure1D& eta);
// (x, y, w) -> (1/x, 1/y, y w / b(nu)); requires a martingale coupling.
MartingaleCoupling cn_coupling(const MartingaleCoupling& pi, double tol = 1e-9);
// Pointwise reciprocal paths reweighted by the terminal value.
PathEnsemble cn_paths(const PathEnsemble& e);
// (x0, u, x1, w) -> (1/x0, u, 1/x1, x1 w / sum x1 w)
LiftedCoupling cn_lifted(const LiftedCoupling& pi);

using PathCost = std::function<double(std::span<const double>)>;
using PairCost = std::function<double(double, double)>;

// x -> x_T c(1/x)
PathCost cn_cost_path(PathCost c);
// (x0, x1) -> x1 c(1/x0, 1/x1)
PairCost cn_cost_pair(PairCost c);

struct WeakCost {
    std::string name;
    std::function<double(const Measure1D&)> eval;
    double lower_bound = 0.0;
};

// rho -> b(rho) C(S(rho))
WeakCost cn_cost_weak(WeakCost c);

}  // namespace cnmot
