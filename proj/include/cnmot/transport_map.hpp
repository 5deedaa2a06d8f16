#pragma once

#include <span>
#include <vector>

#include "cnmot/measure.hpp"

namespace cnmot {

struct MapGrid {
    std::vector<double> grid;
    std::vector<double> values;
};

// Piecewise linear map with jumps. Segment k covers [nodes[k], nodes[k+1])
// and runs linearly from left[k] to right[k]; the map equals `below` left of
// nodes.front() and `above` from nodes.back() on.
class TransportMap {
public:
    TransportMap() = default;
    TransportMap(std::vector<double> nodes, std::vector<double> left, std::vector<double> right,
                 double below, double above);

    // Step function: levels[0] below thresholds[0], levels[j] on
    // [thresholds[j-1], thresholds[j]), levels.back() from thresholds.back().
    static TransportMap step(std::vector<double> thresholds, std::vector<double> levels);
    // Continuous interpolant of (grid, values), constant beyond the ends.
    static TransportMap interpolant(std::span<const double> grid, std::span<const double> values);
    static TransportMap identity(double lo, double hi);

    double operator()(double x) const;
    // E[T(x + sqrt(v) Z)] and its x-derivative.
    double smoothed(double x, double variance) const;
    double smoothed_derivative(double x, double variance) const;
    // both at once; deriv may be null
    double smoothed_eval(double x, double variance, double* deriv) const;

    bool is_nondecreasing(double tol = 0.0) const;
    double below() const { return below_; }
    double above() const { return above_; }
    const std::vector<double>& nodes() const { return nodes_; }
    const std::vector<double>& left() const { return left_; }
    const std::vector<double>& right() const { return right_; }
    MapGrid tabulate(std::span<const double> grid) const;

private:
    std::vector<double> nodes_;
    std::vector<double> left_;
    std::vector<double> right_;
    std::vector<double> jump_;   // jump at each node
    double below_ = 0.0;
    double above_ = 0.0;
};

// T smoothed by an independent N(0, variance) shift; variance 0 means T itself.
class SmoothedMap {
public:
    SmoothedMap(TransportMap base, double variance) : base_(std::move(base)), variance_(variance) {}
    double operator()(double x) const { return variance_ > 0.0 ? base_.smoothed(x, variance_) : base_(x); }
    double derivative(double x) const;
    double variance() const { return variance_; }
    const TransportMap& base() const { return base_; }
    MapGrid tabulate(std::span<const double> grid) const;
    // Solve T(x) = y for y strictly inside the range (variance > 0).
    double inverse(double y, double guess) const;

private:
    TransportMap base_;
    double variance_;
};

// Increasing rearrangement Q_{theta2} o F_{theta1}.
TransportMap monotone_map(const Law& theta1, const Law& theta2);

}  // namespace cnmot
