#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace cnmot {

enum class Sense { eq, le, ge };

// min c.x subject to rows, x >= 0. Rows are stored densely.
struct LpProblem {
    std::size_t n = 0;
    std::vector<double> c;
    std::vector<double> A;  // row-major, rows() x n
    std::vector<double> b;
    std::vector<Sense> sense;

    explicit LpProblem(std::size_t n_vars = 0) : n(n_vars), c(n_vars, 0.0) {}
    std::size_t rows() const { return b.size(); }
    void add_row(const std::vector<std::pair<std::size_t, double>>& terms, Sense s, double rhs);
    void add_dense_row(const std::vector<double>& row, Sense s, double rhs);
    double at(std::size_t i, std::size_t j) const { return A[i * n + j]; }
};

struct LpOptions {
    double tol = 1e-9;
    std::size_t max_iter = 200000;
    // consecutive degenerate pivots before switching to Bland's rule
    std::size_t bland_after = 50;
};

struct LpResult {
    double value = 0.0;
    std::vector<double> x;
    std::size_t iterations = 0;
    std::size_t bland_pivots = 0;
};

// Two-phase primal simplex on a dense tableau. The final basis is re-solved
// with an LU factorisation. Throws Infeasible, Unbounded or IterationLimit.
LpResult lp_solve(const LpProblem& p, const LpOptions& opts = {});

}  // namespace cnmot
