#include "cnmot/numeraire.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cnmot/errors.hpp"

namespace cnmot {

double cn_normalizer(const Measure1D& eta) { return eta.mean(); }

Measure1D cn_measure(const Measure1D& eta)
{
    if (eta.empty() || !eta.positive_support()) throw NonPositiveSupport("measure has non-positive atoms");
    const double total = eta.first_moment();
    std::vector<double> a(eta.size()), w(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) {
        std::size_t r = eta.size() - 1 - i;
        a[r] = 1.0 / eta.atoms()[i];
        w[r] = eta.atoms()[i] * eta.weights()[i] / total;
    }
    return Measure1D(std::move(a), std::move(w));
}

MartingaleCoupling cn_coupling(const MartingaleCoupling& pi, double tol)
{
    if (pi.source().front() <= 0.0 || pi.target().front() <= 0.0)
        throw NonPositiveSupport("coupling has non-positive atoms");
    double scale = std::max(1.0, pi.target().back());
    if (pi.martingale_residual() > tol * scale) throw MartingaleViolation("coupling is not a martingale coupling");
    const std::size_t n = pi.rows(), m = pi.cols();
    double b = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) b += pi.target()[j] * pi.at(i, j);
    std::vector<double> s(n), t(m), w(n * m);
    for (std::size_t i = 0; i < n; ++i) s[n - 1 - i] = 1.0 / pi.source()[i];
    for (std::size_t j = 0; j < m; ++j) t[m - 1 - j] = 1.0 / pi.target()[j];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) w[(n - 1 - i) * m + (m - 1 - j)] = pi.target()[j] * pi.at(i, j) / b;
    return MartingaleCoupling(std::move(s), std::move(t), std::move(w));
}

PathEnsemble cn_paths(const PathEnsemble& e)
{
    e.validate();
    PathEnsemble out = e;
    double b = 0.0;
    for (std::size_t i = 0; i < e.n_paths; ++i) b += e.weights[i] * e.terminal(i);
    for (double& v : out.values) {
        if (!(v > 0.0)) throw NonPositiveSupport("ensemble has non-positive path values");
        v = 1.0 / v;
    }
    for (std::size_t i = 0; i < e.n_paths; ++i) out.weights[i] = e.weights[i] * e.terminal(i) / b;
    out.positive = true;
    out.martingale_checked = false;
    return out;
}

LiftedCoupling cn_lifted(const LiftedCoupling& pi)
{
    double b = 0.0;
    for (const auto& c : pi.cells()) {
        if (!(c.x0 > 0.0) || !(c.x1 > 0.0)) throw NonPositiveSupport("lifted coupling has non-positive atoms");
        b += c.x1 * c.w;
    }
    std::vector<LiftedCell> out;
    out.reserve(pi.size());
    for (const auto& c : pi.cells()) out.push_back({1.0 / c.x0, c.u, 1.0 / c.x1, c.x1 * c.w / b});
    return LiftedCoupling(std::move(out));
}

PathCost cn_cost_path(PathCost c)
{
    return [c = std::move(c)](std::span<const double> x) {
        std::vector<double> inv(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (!(x[k] > 0.0)) throw NonPositiveSupport("path cost evaluated on a non-positive path");
            inv[k] = 1.0 / x[k];
        }
        return x.back() * c(inv);
    };
}

PairCost cn_cost_pair(PairCost c)
{
    return [c = std::move(c)](double x0, double x1) {
        if (!(x0 > 0.0) || !(x1 > 0.0)) throw NonPositiveSupport("pair cost evaluated at non-positive points");
        return x1 * c(1.0 / x0, 1.0 / x1);
    };
}

WeakCost cn_cost_weak(WeakCost c)
{
    WeakCost out;
    out.name = "S*(" + c.name + ")";
    out.lower_bound = c.lower_bound >= 0.0 ? 0.0 : -INFINITY;
    out.eval = [f = std::move(c.eval)](const Measure1D& rho) { return cn_normalizer(rho) * f(cn_measure(rho)); };
    return out;
}

}  // namespace cnmot
