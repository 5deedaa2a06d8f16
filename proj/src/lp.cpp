#include "cnmot/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "cnmot/errors.hpp"

namespace cnmot {

void LpProblem::add_row(const std::vector<std::pair<std::size_t, double>>& terms, Sense s, double rhs)
{
    std::size_t off = A.size();
    A.resize(off + n, 0.0);
    for (auto [j, v] : terms) {
        if (j >= n) throw InvalidInput("LP row refers to a missing variable");
        A[off + j] += v;
    }
    b.push_back(rhs);
    sense.push_back(s);
}

void LpProblem::add_dense_row(const std::vector<double>& row, Sense s, double rhs)
{
    if (row.size() != n) throw InvalidInput("LP row has the wrong length");
    A.insert(A.end(), row.begin(), row.end());
    b.push_back(rhs);
    sense.push_back(s);
}

namespace {

class Tableau {
public:
    Tableau(const LpProblem& p, const LpOptions& o) : opts(o), m(p.rows()), n(p.n)
    {
        // columns: originals, one slack/surplus per inequality, one artificial per row without a slack
        std::vector<int> slack(m, -1), art(m, -1);
        std::size_t cols = n;
        for (std::size_t i = 0; i < m; ++i)
            if (p.sense[i] != Sense::eq) slack[i] = static_cast<int>(cols++);
        n_struct = cols;
        for (std::size_t i = 0; i < m; ++i) {
            bool flip = p.b[i] < 0.0;
            Sense s = p.sense[i];
            if (flip && s != Sense::eq) s = (s == Sense::le) ? Sense::ge : Sense::le;
            sign.push_back(flip ? -1.0 : 1.0);
            // a <= row with non-negative rhs starts from its slack
            if (s != Sense::le) art[i] = static_cast<int>(cols++);
            row_sense.push_back(s);
        }
        N = cols;
        W = N + 1;
        T.assign(m * W, 0.0);
        basis.assign(m, 0);
        for (std::size_t i = 0; i < m; ++i) {
            double* r = row(i);
            for (std::size_t j = 0; j < n; ++j) r[j] = sign[i] * p.at(i, j);
            r[N] = sign[i] * p.b[i];
            if (slack[i] >= 0) r[slack[i]] = (row_sense[i] == Sense::le) ? 1.0 : -1.0;
            if (art[i] >= 0) {
                r[art[i]] = 1.0;
                basis[i] = static_cast<std::size_t>(art[i]);
            } else {
                basis[i] = static_cast<std::size_t>(slack[i]);
            }
        }
        original = T;
        d.assign(N, 0.0);
    }

    double* row(std::size_t i) { return T.data() + i * W; }
    const double* row(std::size_t i) const { return T.data() + i * W; }
    bool artificial(std::size_t j) const { return j >= n_struct; }

    void pivot(std::size_t r, std::size_t q)
    {
        double* pr = row(r);
        const double inv = 1.0 / pr[q];
        nz.clear();
        for (std::size_t j = 0; j < W; ++j)
            if (pr[j] != 0.0) {
                pr[j] *= inv;
                nz.push_back(j);
            }
        pr[q] = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r) continue;
            double* ri = row(i);
            const double f = ri[q];
            if (f == 0.0) continue;
            for (std::size_t j : nz) ri[j] -= f * pr[j];
            ri[q] = 0.0;
        }
        const double f = d[q];
        if (f != 0.0) {
            for (std::size_t j : nz)
                if (j < N) d[j] -= f * pr[j];
                else z -= f * pr[j];
            d[q] = 0.0;
        }
        basis[r] = q;
    }

    // Runs simplex iterations on the current reduced costs d.
    void optimise(bool allow_artificial)
    {
        std::size_t degenerate = 0;
        bool bland = false;
        for (;;) {
            std::size_t q = N;
            double best = -opts.tol;
            for (std::size_t j = 0; j < N; ++j) {
                if (!allow_artificial && artificial(j)) continue;
                if (d[j] < best) {
                    q = j;
                    if (bland) break;
                    best = d[j];
                }
            }
            if (q == N) return;
            if (++iterations > opts.max_iter) throw IterationLimit("simplex iteration limit reached");
            std::size_t r = m;
            double ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < m; ++i) {
                const double a = row(i)[q];
                if (a <= opts.tol) continue;
                const double t = row(i)[N] / a;
                const double eps = 1e-12 * (1.0 + std::abs(t));
                if (r == m || t < ratio - eps) {
                    r = i;
                    ratio = t;
                } else if (t <= ratio + eps && basis[i] < basis[r]) {
                    // ties leave by smallest basic index
                    r = i;
                    ratio = std::min(ratio, t);
                }
            }
            if (r == m) throw Unbounded("LP objective is unbounded below");
            if (bland) ++bland_pivots;
            if (std::abs(ratio) <= 1e-14) {
                if (++degenerate >= opts.bland_after) bland = true;
            } else {
                degenerate = 0;
                bland = false;
            }
            pivot(r, q);
            // keep right-hand sides feasible against round-off
            for (std::size_t i = 0; i < m; ++i)
                if (row(i)[N] < 0.0 && row(i)[N] > -1e-11) row(i)[N] = 0.0;
        }
    }

    LpResult solve(const LpProblem& p)
    {
        // phase 1: minimise the sum of artificials
        std::fill(d.begin(), d.end(), 0.0);
        z = 0.0;
        double scale = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            scale += std::abs(row(i)[N]);
            if (!artificial(basis[i])) continue;
            const double* r = row(i);
            for (std::size_t j = 0; j < N; ++j)
                if (!artificial(j)) d[j] -= r[j];
            z -= r[N];
        }
        optimise(true);
        if (-z > opts.tol * scale) throw Infeasible("LP is infeasible");
        // drive remaining artificials out of the basis
        redundant.assign(m, false);
        for (std::size_t i = 0; i < m; ++i) {
            if (!artificial(basis[i])) continue;
            std::size_t q = N;
            double best = opts.tol;
            for (std::size_t j = 0; j < n_struct; ++j)
                if (std::abs(row(i)[j]) > best) {
                    best = std::abs(row(i)[j]);
                    q = j;
                }
            if (q == N) redundant[i] = true;
            else pivot(i, q);
        }
        // phase 2
        std::vector<double> cost(N, 0.0);
        for (std::size_t j = 0; j < n; ++j) cost[j] = p.c[j];
        d = cost;
        z = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double cb = cost[basis[i]];
            if (cb == 0.0) continue;
            const double* r = row(i);
            for (std::size_t j = 0; j < N; ++j) d[j] -= cb * r[j];
            z -= cb * r[N];
        }
        for (std::size_t j = 0; j < N; ++j)
            if (artificial(j)) d[j] = 0.0;
        optimise(false);

        LpResult res;
        res.iterations = iterations;
        res.bland_pivots = bland_pivots;
        std::vector<double> xs(N, 0.0);
        for (std::size_t i = 0; i < m; ++i) xs[basis[i]] = row(i)[N];
        refine(xs);
        res.x.assign(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(n));
        double bmax = 0.0;
        for (double v : p.b) bmax = std::max(bmax, std::abs(v));
        // degenerate basics come back as round-off
        for (double& v : res.x)
            if (v < 1e-15 * (1.0 + bmax)) v = 0.0;
        for (std::size_t j = 0; j < n; ++j) res.value += p.c[j] * res.x[j];
        return res;
    }

    // Re-solve B x_B = b on the original rows for full accuracy.
    void refine(std::vector<double>& xs) const
    {
        std::vector<std::size_t> rows_used, cols_used;
        for (std::size_t i = 0; i < m; ++i)
            if (!redundant[i]) {
                rows_used.push_back(i);
                cols_used.push_back(basis[i]);
            }
        const std::size_t k = rows_used.size();
        if (k == 0) return;
        Eigen::MatrixXd B(k, k);
        Eigen::VectorXd rhs(k);
        for (std::size_t a = 0; a < k; ++a) {
            const double* r = original.data() + rows_used[a] * W;
            for (std::size_t c = 0; c < k; ++c) B(a, c) = r[cols_used[c]];
            rhs(a) = r[N];
        }
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
        Eigen::VectorXd sol = lu.solve(rhs);
        if (!sol.allFinite() || (B * sol - rhs).cwiseAbs().maxCoeff() > 1e-9) return;
        for (std::size_t c = 0; c < k; ++c) {
            if (sol(c) < -1e-9) return;  // refinement disagrees; keep the tableau values
        }
        for (std::size_t c = 0; c < k; ++c) xs[cols_used[c]] = std::max(0.0, sol(c));
    }

    LpOptions opts;
    std::size_t m, n, n_struct = 0, N = 0, W = 0;
    std::vector<double> T, original, d, sign;
    std::vector<Sense> row_sense;
    std::vector<std::size_t> basis, nz;
    std::vector<bool> redundant;
    double z = 0.0;
    std::size_t iterations = 0, bland_pivots = 0;
};

}  // namespace

LpResult lp_solve(const LpProblem& p, const LpOptions& opts)
{
    if (p.c.size() != p.n || p.A.size() != p.rows() * p.n || p.sense.size() != p.rows())
        throw InvalidInput("LP dimensions are inconsistent");
    for (double v : p.A)
        if (!std::isfinite(v)) throw InvalidInput("LP matrix has non-finite entries");
    if (p.rows() == 0) {
        LpResult r;
        r.x.assign(p.n, 0.0);
        for (double c : p.c)
            if (c < 0.0) throw Unbounded("LP objective is unbounded below");
        return r;
    }
    Tableau t(p, opts);
    return t.solve(p);
}

}  // namespace cnmot
