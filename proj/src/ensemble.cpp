#include "cnmot/ensemble.hpp"

#include <cmath>

#include "cnmot/errors.hpp"

namespace cnmot {

Measure1D PathEnsemble::marginal(std::size_t k) const
{
    if (k >= times.size()) throw InvalidInput("marginal time index out of range");
    std::vector<double> col(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) col[i] = at(i, k);
    return Measure1D::from_samples(col, weights);
}

double PathEnsemble::effective_size() const
{
    double s = 0.0;
    for (double w : weights) s += w * w;
    return s > 0.0 ? 1.0 / s : 0.0;
}

void PathEnsemble::validate() const
{
    if (times.size() < 2) throw InvalidInput("ensemble needs at least two times");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw InvalidInput("ensemble times must be increasing");
    if (values.size() != n_paths * times.size() || weights.size() != n_paths)
        throw InvalidInput("ensemble storage does not match its shape");
    double s = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("ensemble weights must be non-negative");
        s += w;
    }
    if (std::abs(s - 1.0) > kWeightSumTol) throw InvalidInput("ensemble weights must sum to one");
    for (double v : values)
        if (!std::isfinite(v)) throw InvalidInput("ensemble contains non-finite values");
}

PathEnsemble make_ensemble(std::vector<double> times, std::size_t n_paths)
{
    PathEnsemble e;
    e.n_paths = n_paths;
    e.values.assign(n_paths * times.size(), 0.0);
    e.weights.assign(n_paths, n_paths ? 1.0 / static_cast<double>(n_paths) : 0.0);
    e.times = std::move(times);
    return e;
}

}  // namespace cnmot
