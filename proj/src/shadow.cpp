#include "cnmot/shadow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cnmot/errors.hpp"
#include "cnmot/numeraire.hpp"

namespace cnmot {

Measure1D Source::mu() const
{
    std::vector<double> x, w;
    for (const auto& c : cells) {
        x.push_back(c.x);
        w.push_back(c.mass);
    }
    return Measure1D::from_samples(x, w);
}

double Source::total() const
{
    double s = 0.0;
    for (const auto& c : cells) s += c.mass;
    return s;
}

void Source::validate() const
{
    if (cells.empty()) throw InvalidInput("source has no cells");
    for (const auto& c : cells) {
        if (!std::isfinite(c.x) || !std::isfinite(c.mass) || c.mass < 0.0) throw InvalidInput("source cell is invalid");
        if (!(c.u >= 0.0 && c.u <= 1.0)) throw InvalidInput("source label u must lie in [0, 1]");
    }
    if (std::abs(total() - 1.0) > kWeightSumTol) throw InvalidInput("source masses must sum to one");
}

Source Source::slice(double x) const
{
    Source s;
    s.K = K;
    s.preset = preset;
    double m = 0.0;
    for (const auto& c : cells)
        if (c.x == x) {
            s.cells.push_back(c);
            m += c.mass;
        }
    if (!(m > 0.0)) throw InvalidInput("source has no mass at the requested x");
    for (auto& c : s.cells) c.mass /= m;
    return s;
}

namespace {

// atoms laid out along u in the given order, cut at the grid k / K
Source layered(const Measure1D& mu, std::size_t K, bool reverse, const char* name)
{
    if (K < 1) throw InvalidInput("K must be positive");
    Measure1D p = mu.normalized();
    const std::size_t n = p.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (reverse) std::reverse(order.begin(), order.end());
    std::vector<double> edge{0.0};
    for (std::size_t i : order) edge.push_back(edge.back() + p.weights()[i]);
    edge.back() = 1.0;
    std::vector<double> cuts = edge;
    for (std::size_t k = 0; k <= K; ++k) cuts.push_back(static_cast<double>(k) / static_cast<double>(K));
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> u{cuts.front()};
    for (double c : cuts)
        if (c - u.back() > 1e-14) u.push_back(c);
    u.back() = 1.0;
    Source s;
    s.K = K;
    s.preset = name;
    std::size_t a = 0;
    for (std::size_t k = 0; k + 1 < u.size(); ++k) {
        double mid = 0.5 * (u[k] + u[k + 1]);
        while (a + 1 < n && mid > edge[a + 1]) ++a;
        s.cells.push_back({p.atoms()[order[a]], mid, u[k + 1] - u[k]});
    }
    return s;
}

}  // namespace

Source source_monotone(const Measure1D& mu, std::size_t K) { return layered(mu, K, false, "monotone"); }

Source source_antitone(const Measure1D& mu, std::size_t K) { return layered(mu, K, true, "antitone"); }

Source source_product(const Measure1D& mu, std::size_t K)
{
    if (K < 1) throw InvalidInput("K must be positive");
    Measure1D p = mu.normalized();
    Source s;
    s.K = K;
    s.preset = "product";
    const double h = 1.0 / static_cast<double>(K);
    for (std::size_t k = 0; k < K; ++k) {
        double F = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            double w = p.weights()[i];
            s.cells.push_back({p.atoms()[i], h * (static_cast<double>(k) + F + 0.5 * w), w * h});
            F += w;
        }
    }
    return s;
}

Source cn_source(const Source& src)
{
    double b = 0.0;
    for (const auto& c : src.cells) {
        if (!(c.x > 0.0)) throw NonPositiveSupport("source has non-positive atoms");
        b += c.x * c.mass;
    }
    Source out;
    out.K = src.K;
    out.preset = "S(" + src.preset + ")";
    for (const auto& c : src.cells) out.cells.push_back({1.0 / c.x, c.u, c.x * c.mass / b});
    return out;
}

MotSolution mot_solve_linear(const Measure1D& mu, const Measure1D& nu, const std::vector<double>& cost,
                             const LpOptions& opts)
{
    const std::size_t n = mu.size(), m = nu.size();
    if (cost.size() != n * m) throw InvalidInput("cost table must be |mu| x |nu|");
    LpProblem p(n * m);
    p.c = cost;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::pair<std::size_t, double>> mass, bary;
        for (std::size_t j = 0; j < m; ++j) {
            mass.push_back({i * m + j, 1.0});
            bary.push_back({i * m + j, nu.atoms()[j] - mu.atoms()[i]});
        }
        p.add_row(mass, Sense::eq, mu.weights()[i]);
        p.add_row(bary, Sense::eq, 0.0);
    }
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<std::pair<std::size_t, double>> col;
        for (std::size_t i = 0; i < n; ++i) col.push_back({i * m + j, 1.0});
        p.add_row(col, Sense::eq, nu.weights()[j]);
    }
    LpResult r;
    try {
        r = lp_solve(p, opts);
    } catch (const Infeasible&) {
        throw Infeasible("no martingale coupling: mu is not dominated by nu in convex order");
    }
    double total = std::accumulate(r.x.begin(), r.x.end(), 0.0);
    for (double& w : r.x) w /= total;
    MotSolution s{MartingaleCoupling(mu.atoms(), nu.atoms(), r.x), 0.0};
    for (std::size_t k = 0; k < n * m; ++k) s.value += cost[k] * r.x[k];
    return s;
}

namespace {

// Shadow of theta in the sub-measure (y, cap); returns weights aligned with y.
std::vector<double> shadow_weights(const std::vector<double>& tx, const std::vector<double>& tw,
                                   const std::vector<double>& y, const std::vector<double>& cap,
                                   const LpOptions& opts)
{
    const std::size_t n = y.size();
    double mass = 0.0, mom = 0.0;
    for (std::size_t i = 0; i < tx.size(); ++i) {
        mass += tw[i];
        mom += tw[i] * tx[i];
    }
    if (mass <= 0.0) return std::vector<double>(n, 0.0);
    LpProblem p(n);
    for (std::size_t j = 0; j < n; ++j) p.c[j] = std::sqrt(1.0 + y[j] * y[j]);
    std::vector<std::pair<std::size_t, double>> ones, ys;
    for (std::size_t j = 0; j < n; ++j) {
        ones.push_back({j, 1.0});
        ys.push_back({j, y[j]});
        p.add_row({{j, 1.0}}, Sense::le, cap[j]);
    }
    p.add_row(ones, Sense::eq, mass);
    p.add_row(ys, Sense::eq, mom);
    // potential inequalities at every kink of either measure
    std::vector<double> z = y;
    z.insert(z.end(), tx.begin(), tx.end());
    std::sort(z.begin(), z.end());
    z.erase(std::unique(z.begin(), z.end()), z.end());
    for (double zz : z) {
        std::vector<std::pair<std::size_t, double>> row;
        for (std::size_t j = 0; j < n; ++j) row.push_back({j, std::abs(y[j] - zz)});
        double ut = 0.0;
        for (std::size_t i = 0; i < tx.size(); ++i) ut += tw[i] * std::abs(tx[i] - zz);
        p.add_row(row, Sense::ge, ut);
    }
    LpResult r;
    try {
        r = lp_solve(p, opts);
    } catch (const Infeasible&) {
        throw Infeasible("theta has no shadow in nu");
    }
    for (std::size_t j = 0; j < n; ++j) r.x[j] = std::min(r.x[j], cap[j]);
    return r.x;
}

ShadowCoupling finish(std::vector<LiftedCell> cells, double value)
{
    ShadowCoupling s;
    std::erase_if(cells, [](const LiftedCell& c) { return !(c.w > 0.0); });
    s.lifted = LiftedCoupling(std::move(cells));
    s.projection = s.lifted.project();
    s.value = value;
    return s;
}

void check_source_pair(const Source& src, const Measure1D& nu)
{
    src.validate();
    if (!convex_order_leq(src.mu(), nu)) throw NotInConvexOrder("source marginal is not dominated by nu in convex order");
}

}  // namespace

Measure1D shadow_measure(const Measure1D& theta, const Measure1D& nu, const LpOptions& opts)
{
    if (theta.mass() > nu.mass() + kWeightSumTol) throw Infeasible("theta is heavier than nu");
    std::vector<double> rho = shadow_weights(theta.atoms(), theta.weights(), nu.atoms(), nu.weights(), opts);
    return Measure1D::sub_probability(nu.atoms(), rho);
}

ShadowCoupling shadow_coupling(const Source& src, const Measure1D& nu, const ShadowObjective& obj, const LpOptions& opts)
{
    check_source_pair(src, nu);
    const std::size_t nc = src.cells.size(), m = nu.size();
    LpProblem p(nc * m);
    for (std::size_t c = 0; c < nc; ++c) {
        const auto& cell = src.cells[c];
        std::vector<std::pair<std::size_t, double>> mass, bary;
        for (std::size_t j = 0; j < m; ++j) {
            p.c[c * m + j] = obj.phi(cell.u) * obj.psi(nu.atoms()[j]);
            mass.push_back({c * m + j, 1.0});
            bary.push_back({c * m + j, nu.atoms()[j] - cell.x});
        }
        p.add_row(mass, Sense::eq, cell.mass);
        p.add_row(bary, Sense::eq, 0.0);
    }
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<std::pair<std::size_t, double>> col;
        for (std::size_t c = 0; c < nc; ++c) col.push_back({c * m + j, 1.0});
        p.add_row(col, Sense::eq, nu.weights()[j]);
    }
    LpResult r = lp_solve(p, opts);
    std::vector<LiftedCell> cells;
    for (std::size_t c = 0; c < nc; ++c)
        for (std::size_t j = 0; j < m; ++j)
            cells.push_back({src.cells[c].x, src.cells[c].u, nu.atoms()[j], r.x[c * m + j]});
    return finish(std::move(cells), r.value);
}

ShadowCoupling shadow_coupling_incremental(const Source& src, const Measure1D& nu, const LpOptions& opts)
{
    check_source_pair(src, nu);
    std::vector<std::size_t> order(src.cells.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return src.cells[a].u < src.cells[b].u; });
    std::vector<double> rest = nu.weights();
    std::vector<LiftedCell> cells;
    double value = 0.0;
    for (std::size_t c : order) {
        const auto& cell = src.cells[c];
        std::vector<double> rho = shadow_weights({cell.x}, {cell.mass}, nu.atoms(), rest, opts);
        for (std::size_t j = 0; j < nu.size(); ++j) {
            rest[j] = std::max(0.0, rest[j] - rho[j]);
            cells.push_back({cell.x, cell.u, nu.atoms()[j], rho[j]});
            value += (1.0 - cell.u) * std::sqrt(1.0 + nu.atoms()[j] * nu.atoms()[j]) * rho[j];
        }
    }
    return finish(std::move(cells), value);
}

double weak_shadow_cost(const Measure1D& eta, const Source& slice, double m, const LpOptions& opts)
{
    if (std::abs(eta.mean() - m) > 1e-9 * (1.0 + std::abs(m))) throw InvalidInput("b(eta) must equal m");
    const std::size_t nc = slice.cells.size(), k = eta.size();
    if (nc == 0) throw InvalidInput("empty source slice");
    double total = slice.total();
    LpProblem p(nc * k);
    for (std::size_t c = 0; c < nc; ++c) {
        std::vector<std::pair<std::size_t, double>> mass, bary;
        for (std::size_t j = 0; j < k; ++j) {
            double y = eta.atoms()[j];
            p.c[c * k + j] = (1.0 - slice.cells[c].u) * std::sqrt(1.0 + y * y);
            mass.push_back({c * k + j, 1.0});
            bary.push_back({c * k + j, y - m});
        }
        p.add_row(mass, Sense::eq, slice.cells[c].mass / total);
        p.add_row(bary, Sense::eq, 0.0);
    }
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<std::pair<std::size_t, double>> col;
        for (std::size_t c = 0; c < nc; ++c) col.push_back({c * k + j, 1.0});
        p.add_row(col, Sense::eq, eta.weights()[j] / eta.mass());
    }
    return lp_solve(p, opts).value;
}

CheckReport verify_cn_shadow(const Source& src, const Measure1D& nu, double tol)
{
    CheckReport r;
    r.name = "cn-shadow:" + src.preset;
    MartingaleCoupling A = cn_coupling(shadow_coupling(src, nu).projection);
    Measure1D snu = cn_measure(nu);
    MartingaleCoupling B = shadow_coupling(cn_source(src), snu).projection;
    r.diff = A.max_abs_diff(B);
    r.lhs = r.diff;
    r.allowance = 0.0;
    r.pass = r.diff <= tol;

    // the same coupling from a fresh preset on the transformed pair
    Measure1D smu = cn_measure(src.mu());
    if (src.preset == "monotone" || src.preset == "antitone") {
        Source fresh = src.preset == "monotone" ? source_antitone(smu, src.K) : source_monotone(smu, src.K);
        double fd = A.max_abs_diff(shadow_coupling(fresh, snu).projection);
        r.extra["fresh_diff"] = fd;
        r.pass = r.pass && fd <= tol;
        bool shape = src.preset == "monotone" ? is_right_monotone(B, 1e-10) : is_left_monotone(B, 1e-10);
        r.extra["monotone_shape"] = shape ? 1.0 : 0.0;
        r.pass = r.pass && shape;
        r.extra["k_refinement_delta"] = 0.0;
    } else if (src.preset == "product") {
        // informational: the staircase order inside each u-cell differs
        r.extra["fresh_diff"] = A.max_abs_diff(shadow_coupling(source_product(smu, src.K), snu).projection);
        Measure1D mu = src.mu();
        MartingaleCoupling fine = shadow_coupling_incremental(source_product(mu, 2 * src.K), nu).projection;
        MartingaleCoupling coarse = shadow_coupling_incremental(source_product(mu, src.K), nu).projection;
        r.extra["k_refinement_delta"] = fine.max_abs_diff(coarse);
    }
    return r;
}

bool is_left_monotone(const MartingaleCoupling& pi, double mass_tol)
{
    const std::size_t n = pi.rows(), m = pi.cols();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t lo = m, hi = 0;
        for (std::size_t j = 0; j < m; ++j)
            if (pi.at(i, j) > mass_tol) {
                lo = std::min(lo, j);
                hi = std::max(hi, j);
            }
        if (lo == m) continue;
        for (std::size_t k = i + 1; k < n; ++k)
            for (std::size_t j = lo + 1; j < hi; ++j)
                if (pi.at(k, j) > mass_tol) return false;
    }
    return true;
}

bool is_right_monotone(const MartingaleCoupling& pi, double mass_tol)
{
    // mirror x -> -x, y -> -y
    const std::size_t n = pi.rows(), m = pi.cols();
    std::vector<double> s(n), t(m), w(n * m);
    for (std::size_t i = 0; i < n; ++i) s[i] = -pi.source()[n - 1 - i];
    for (std::size_t j = 0; j < m; ++j) t[j] = -pi.target()[m - 1 - j];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) w[i * m + j] = pi.at(n - 1 - i, m - 1 - j);
    return is_left_monotone(MartingaleCoupling(s, t, w), mass_tol);
}

}  // namespace cnmot
