#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cnmot/measure.hpp"

namespace cnmot {

// Discrete coupling on sorted source x sorted target atoms; weights row-major.
class MartingaleCoupling {
public:
    MartingaleCoupling() = default;
    MartingaleCoupling(std::vector<double> source, std::vector<double> target, std::vector<double> weights);

    const std::vector<double>& source() const { return source_; }
    const std::vector<double>& target() const { return target_; }
    const std::vector<double>& weights() const { return weights_; }
    std::size_t rows() const { return source_.size(); }
    std::size_t cols() const { return target_.size(); }
    double at(std::size_t i, std::size_t j) const { return weights_[i * target_.size() + j]; }

    Measure1D source_marginal() const;
    Measure1D target_marginal() const;
    // max over rows of |E[Y | X = x_i] - x_i|
    double martingale_residual() const;
    // max |w - other.w| after aligning atoms (atoms matched within tol)
    double max_abs_diff(const MartingaleCoupling& other, double atom_tol = 1e-9) const;
    template <class F>
    double expectation(F&& c) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < rows(); ++i)
            for (std::size_t j = 0; j < cols(); ++j)
                if (at(i, j) != 0.0) s += at(i, j) * c(source_[i], target_[j]);
        return s;
    }

private:
    std::vector<double> source_;
    std::vector<double> target_;
    std::vector<double> weights_;
};

struct LiftedCell {
    double x0;
    double u;
    double x1;
    double w;
};

// Coupling of (X0, U, X1): U is the auxiliary uniform label of the source.
class LiftedCoupling {
public:
    LiftedCoupling() = default;
    explicit LiftedCoupling(std::vector<LiftedCell> cells);

    const std::vector<LiftedCell>& cells() const { return cells_; }
    std::size_t size() const { return cells_.size(); }
    double total_weight() const;
    Measure1D x0_marginal() const;
    Measure1D x1_marginal() const;
    MartingaleCoupling project() const;
    // max over (x0, u) groups of |E[X1 | x0, u] - x0| / (1 + |x0|)
    double martingale_residual() const;

private:
    std::vector<LiftedCell> cells_;
};

}  // namespace cnmot
