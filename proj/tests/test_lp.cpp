#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cnmot/errors.hpp"
#include "cnmot/lp.hpp"

using namespace cnmot;

namespace {

// Solve a small square system by Gaussian elimination; false if singular.
bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x)
{
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
        if (std::abs(a[p][k]) < 1e-12) return false;
        std::swap(a[p], a[k]);
        std::swap(b[p], b[k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= a[k][j] * x[j];
        x[k] = s / a[k][k];
    }
    return true;
}

// Brute force over bases of the equality form {A x = b, x >= 0}.
double vertex_min(const std::vector<std::vector<double>>& A, const std::vector<double>& b, const std::vector<double>& c)
{
    const std::size_t m = b.size(), n = c.size();
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> pick(m);
    std::vector<bool> mask(n, false);
    std::fill(mask.end() - static_cast<std::ptrdiff_t>(m), mask.end(), true);
    do {
        std::size_t k = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (mask[j]) pick[k++] = j;
        std::vector<std::vector<double>> B(m, std::vector<double>(m));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t a = 0; a < m; ++a) B[i][a] = A[i][pick[a]];
        std::vector<double> x;
        if (!solve_dense(B, b, x)) continue;
        bool ok = true;
        double v = 0.0;
        for (std::size_t a = 0; a < m; ++a) {
            if (x[a] < -1e-10) ok = false;
            v += c[pick[a]] * x[a];
        }
        if (ok) best = std::min(best, v);
    } while (std::next_permutation(mask.begin(), mask.end()));
    return best;
}

}  // namespace

TEST(Lp, DiracToDiracDistance)
{
    LpProblem p(1);
    p.c = {1.0};  // |0 - 1|
    p.add_row({{0, 1.0}}, Sense::eq, 1.0);
    LpResult r = lp_solve(p);
    EXPECT_NEAR(r.value, 1.0, 1e-12);
    EXPECT_NEAR(r.x[0], 1.0, 1e-12);
}

TEST(Lp, TwoByTwoAssignment)
{
    const double c[4] = {3.0, 1.0, 2.0, 5.0};
    LpProblem p(4);
    p.c.assign(c, c + 4);
    p.add_row({{0, 1}, {1, 1}}, Sense::eq, 0.5);
    p.add_row({{2, 1}, {3, 1}}, Sense::eq, 0.5);
    p.add_row({{0, 1}, {2, 1}}, Sense::eq, 0.5);
    p.add_row({{1, 1}, {3, 1}}, Sense::eq, 0.5);
    LpResult r = lp_solve(p);
    EXPECT_NEAR(r.value, 0.5 * std::min(c[0] + c[3], c[1] + c[2]), 1e-12);
    EXPECT_NEAR(r.x[1], 0.5, 1e-12);
    EXPECT_NEAR(r.x[2], 0.5, 1e-12);
}

TEST(Lp, InequalitiesAgainstVertexEnumeration)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.1, 2.0), C(-1.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 4;
        LpProblem p(n);
        for (double& v : p.c) v = C(rng);
        // bounded feasible region: sum x <= 3 plus two random rows
        std::vector<std::vector<double>> A;
        std::vector<double> b;
        std::vector<Sense> s{Sense::le, Sense::le, Sense::ge};
        std::vector<std::vector<double>> rows{{1, 1, 1, 1}, {U(rng), U(rng), U(rng), U(rng)}, {U(rng), U(rng), U(rng), U(rng)}};
        std::vector<double> rhs{3.0, 2.5, 0.2};
        for (std::size_t i = 0; i < 3; ++i) p.add_dense_row(rows[i], s[i], rhs[i]);
        // equality form with slacks
        for (std::size_t i = 0; i < 3; ++i) {
            std::vector<double> row = rows[i];
            for (std::size_t k = 0; k < 3; ++k) row.push_back(k == i ? (s[i] == Sense::le ? 1.0 : -1.0) : 0.0);
            A.push_back(row);
        }
        std::vector<double> c = p.c;
        c.resize(n + 3, 0.0);
        double oracle = vertex_min(A, rhs, c);
        LpResult r = lp_solve(p);
        EXPECT_NEAR(r.value, oracle, 1e-10) << "trial " << trial;
        for (std::size_t i = 0; i < 3; ++i) {
            double lhs = 0.0;
            for (std::size_t j = 0; j < n; ++j) lhs += rows[i][j] * r.x[j];
            if (s[i] == Sense::le) EXPECT_LE(lhs, rhs[i] + 1e-10);
            else EXPECT_GE(lhs, rhs[i] - 1e-10);
        }
    }
}

TEST(Lp, NegativeRightHandSide)
{
    // -x0 - x1 <= -1  <=>  x0 + x1 >= 1
    LpProblem p(2);
    p.c = {2.0, 3.0};
    p.add_row({{0, -1.0}, {1, -1.0}}, Sense::le, -1.0);
    EXPECT_NEAR(lp_solve(p).value, 2.0, 1e-12);
}

TEST(Lp, InfeasibleMartingaleProblem)
{
    // delta_0 cannot be coupled to delta_1 as a martingale
    LpProblem p(1);
    p.add_row({{0, 1.0}}, Sense::eq, 1.0);
    p.add_row({{0, 1.0 - 0.0}}, Sense::eq, 0.0);  // E[Y - X] = 0
    EXPECT_THROW(lp_solve(p), Infeasible);
}

TEST(Lp, Unbounded)
{
    LpProblem p(2);
    p.c = {-1.0, 0.0};
    p.add_row({{0, 1.0}, {1, -1.0}}, Sense::le, 1.0);
    EXPECT_THROW(lp_solve(p), Unbounded);
}

TEST(Lp, RedundantRowsAndDegeneracy)
{
    // three copies of the same constraint plus a degenerate vertex
    LpProblem p(3);
    p.c = {1.0, 1.0, -1.0};
    for (int k = 0; k < 3; ++k) p.add_row({{0, 1}, {1, 1}, {2, 1}}, Sense::eq, 1.0);
    p.add_row({{2, 1.0}}, Sense::le, 0.0);
    LpResult r = lp_solve(p);
    EXPECT_NEAR(r.value, 1.0, 1e-12);
    EXPECT_NEAR(r.x[2], 0.0, 1e-12);
}

TEST(Lp, IterationLimit)
{
    LpProblem p(4);
    p.c = {-1, -2, -3, -4};
    p.add_row({{0, 1}, {1, 1}, {2, 1}, {3, 1}}, Sense::le, 1.0);
    LpOptions o;
    o.max_iter = 0;
    EXPECT_THROW(lp_solve(p, o), IterationLimit);
}

TEST(Lp, InvalidInput)
{
    LpProblem p(2);
    p.c = {1.0};
    EXPECT_THROW(lp_solve(p), InvalidInput);
    LpProblem q(1);
    EXPECT_THROW(q.add_row({{3, 1.0}}, Sense::eq, 0.0), InvalidInput);
}
