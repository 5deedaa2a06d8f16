#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cnmot/measure.hpp"

namespace cnmot {

// Weighted paths on a common time grid. values is row-major (path, time).
struct PathEnsemble {
    std::vector<double> times;
    std::size_t n_paths = 0;
    std::vector<double> values;
    std::vector<double> weights;  // sums to one
    bool positive = false;
    bool martingale_checked = false;

    std::size_t n_times() const { return times.size(); }
    std::size_t n_steps() const { return times.empty() ? 0 : times.size() - 1; }
    std::span<const double> path(std::size_t i) const { return {values.data() + i * times.size(), times.size()}; }
    std::span<double> path(std::size_t i) { return {values.data() + i * times.size(), times.size()}; }
    double at(std::size_t i, std::size_t k) const { return values[i * times.size() + k]; }
    double terminal(std::size_t i) const { return values[i * times.size() + times.size() - 1]; }
    Measure1D marginal(std::size_t k) const;
    // sum_i w_i^2 relative to the uniform case, i.e. n / (n * sum w^2)
    double effective_size() const;
    void validate() const;
};

PathEnsemble make_ensemble(std::vector<double> times, std::size_t n_paths);

}  // namespace cnmot
