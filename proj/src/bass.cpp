#include "cnmot/bass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cnmot/errors.hpp"
#include "cnmot/normal.hpp"
#include "cnmot/numeraire.hpp"

namespace cnmot {

namespace {

struct Level {
    double lower;  // F
    double upper;  // 1 - F, computed from the other side
};

// Interior jump levels of Q_nu together with the quantile values on each side.
struct QuantileSkeleton {
    std::vector<Level> levels;
    std::vector<double> seg_left;   // value just above levels[l]
    std::vector<double> seg_right;  // value just below levels[l+1]
    double below = 0.0;
    double above = 0.0;
};

QuantileSkeleton skeleton(const Law& nu)
{
    QuantileSkeleton s;
    if (const auto* m = std::get_if<Measure1D>(&nu)) {
        Measure1D p = m->normalized();
        const std::size_t n = p.size();
        std::vector<double> suffix(n + 1, 0.0);
        for (std::size_t j = n; j-- > 0;) suffix[j] = suffix[j + 1] + p.weights()[j];
        double c = 0.0;
        for (std::size_t j = 0; j + 1 < n; ++j) {
            c += p.weights()[j];
            s.levels.push_back({c, suffix[j + 1]});
        }
        for (std::size_t j = 1; j + 1 < n; ++j) {
            s.seg_left.push_back(p.atoms()[j]);
            s.seg_right.push_back(p.atoms()[j]);
        }
        s.below = p.atoms().front();
        s.above = p.atoms().back();
        return s;
    }
    CdfGrid g = std::get<CdfGrid>(nu).trimmed();
    // pieces with positive mass
    std::vector<std::size_t> piece;
    for (std::size_t k = 1; k < g.size(); ++k)
        if (g.values()[k] > g.values()[k - 1]) piece.push_back(k);
    s.below = g.grid()[piece.front() - 1];
    s.above = g.grid()[piece.back()];
    for (std::size_t p = 0; p + 1 < piece.size(); ++p) {
        double u = g.values()[piece[p]];
        s.levels.push_back({u, 1.0 - u});
        std::size_t k = piece[p + 1];
        s.seg_left.push_back(g.grid()[k - 1]);
        s.seg_right.push_back(g.grid()[k]);
    }
    // seg_* are defined between consecutive levels
    if (!s.seg_left.empty()) {
        s.seg_left.pop_back();
        s.seg_right.pop_back();
    }
    return s;
}

std::vector<double> thresholds(const SmoothedCdf& H, const std::vector<Level>& levels)
{
    std::vector<double> c(levels.size());
    double guess = 0.0;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        const Level& lv = levels[l];
        c[l] = lv.lower <= 0.5 ? H.inverse_lower(lv.lower, guess) : H.inverse_upper(lv.upper, guess);
        guess = c[l];
    }
    for (std::size_t l = 1; l < c.size(); ++l) c[l] = std::max(c[l], c[l - 1]);
    return c;
}

Law pin(const Law& alpha) { return law_shifted(alpha, -law_mean(alpha)); }

std::vector<double> working_grid(const Law& a, const Law& b, std::size_t n)
{
    double lo = std::min(law_lower(a), law_lower(b)) - 6.0;
    double hi = std::max(law_upper(a), law_upper(b)) + 6.0;
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k) g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    return g;
}

double residual(const Law& prev, const Law& next, std::size_t n)
{
    if (!is_atomic(prev) && !is_atomic(next)) return kolmogorov_distance(prev, next);
    SmoothedCdf a(prev, 1.0), b(next, 1.0);
    double r = 0.0;
    for (double y : working_grid(prev, next, n)) r = std::max(r, std::abs(a.lower(y) - b.lower(y)));
    return r;
}

bool is_dirac(const Law& l)
{
    const auto* m = std::get_if<Measure1D>(&l);
    return m && m->is_dirac();
}

void check_pair(const Law& mu, const Law& nu)
{
    for (const Law* l : {&mu, &nu})
        if (const auto* m = std::get_if<Measure1D>(l); m && std::abs(m->mass() - 1.0) > kWeightSumTol)
            throw InvalidInput("marginals must be probability measures");
    if (!convex_order_leq(mu, nu)) throw NotInConvexOrder("mu is not dominated by nu in convex order");
    if (is_dirac(nu)) throw DegeneratePair("target marginal is a Dirac mass");
    if (is_atomic(mu) && is_atomic(nu)) {
        const auto& m = std::get<Measure1D>(mu);
        const auto& n = std::get<Measure1D>(nu);
        Decomposition d = irreducible_components(m, n);
        if (d.components.empty()) throw DegeneratePair("mu equals nu; no irreducible component");
        if (d.components.size() > 1 || d.frozen.mass() > 1e-12)
            throw DegeneratePair("pair is reducible; solve its irreducible components separately");
    } else if (kolmogorov_distance(mu, nu) < 1e-12) {
        throw DegeneratePair("mu equals nu");
    }
}

double leg_errors(const BassSolution& s, double& nu_err)
{
    SmoothedMap g(s.t1, 1.0);
    SmoothedCdf H(s.alpha, 1.0);
    double mu_err;
    if (const auto* a = std::get_if<Measure1D>(&s.alpha)) {
        std::vector<double> x(a->size());
        for (std::size_t i = 0; i < a->size(); ++i) x[i] = g(a->atoms()[i]);
        mu_err = wasserstein1(Law{Measure1D::sub_probability(x, a->weights()).normalized()}, s.mu);
    } else {
        const auto& ag = std::get<CdfGrid>(s.alpha);
        std::vector<double> x(ag.size());
        for (std::size_t k = 0; k < ag.size(); ++k) x[k] = g(ag.grid()[k]);
        for (std::size_t k = 1; k < x.size(); ++k) x[k] = std::max(x[k], std::nextafter(x[k - 1], INFINITY));
        mu_err = wasserstein1(Law{CdfGrid(x, ag.values())}, s.mu);
    }
    // law of T_1(alpha * gamma_1)
    const auto& nodes = s.t1.nodes();
    if (const auto* n = std::get_if<Measure1D>(&s.nu)) {
        std::vector<double> w;
        double prev = 0.0;
        for (double c : nodes) {
            double h = H.lower(c);
            w.push_back(std::max(0.0, h - prev));
            prev = h;
        }
        w.push_back(std::max(0.0, 1.0 - prev));
        std::vector<double> y{s.t1.below()};
        y.insert(y.end(), s.t1.left().begin(), s.t1.left().end());
        y.push_back(s.t1.above());
        nu_err = wasserstein1(Law{Measure1D::sub_probability(y, w).normalized()}, Law{*n});
    } else {
        std::vector<double> y{s.t1.below()}, f{0.0};
        for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
            double v = s.t1.left()[k];
            if (v > y.back()) {
                y.push_back(v);
                f.push_back(H.lower(nodes[k]));
            }
        }
        if (s.t1.above() > y.back()) {
            y.push_back(s.t1.above());
            f.push_back(1.0);
        } else {
            f.back() = 1.0;
        }
        nu_err = wasserstein1(Law{CdfGrid(y, f)}, s.nu);
    }
    return mu_err;
}

}  // namespace

TransportMap bass_t1(const Law& alpha, const Law& nu)
{
    SmoothedCdf H(alpha, 1.0);
    QuantileSkeleton q = skeleton(nu);
    if (q.levels.empty()) return TransportMap({0.0}, {}, {}, q.below, q.above);
    std::vector<double> c = thresholds(H, q.levels);
    return TransportMap(std::move(c), q.seg_left, q.seg_right, q.below, q.above);
}

Law bass_step(const Law& alpha, const Law& mu, const Law& nu)
{
    TransportMap t1 = bass_t1(alpha, nu);
    SmoothedMap g(t1, 1.0);
    const double lo = t1.below(), hi = t1.above();
    if (const auto* m = std::get_if<Measure1D>(&mu)) {
        std::vector<double> a(m->size());
        double guess = 0.0;
        for (std::size_t i = 0; i < m->size(); ++i) {
            double x = m->atoms()[i];
            if (!(x > lo && x < hi)) throw NotInConvexOrder("mu has mass outside the open hull of nu");
            a[i] = g.inverse(x, guess);
            guess = a[i];
        }
        return Law{Measure1D(a, m->weights())};
    }
    CdfGrid mg = std::get<CdfGrid>(mu).trimmed();
    const std::size_t n = mg.size();
    std::vector<double> a(n, std::numeric_limits<double>::quiet_NaN());
    double guess = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double x = mg.grid()[k];
        if (x > lo && x < hi) {
            a[k] = g.inverse(x, guess);
            guess = a[k];
        }
    }
    // end nodes of zero mass outside the range of g: unit-slope extrapolation
    for (std::size_t k = n; k-- > 0;)
        if (std::isnan(a[k]) && k + 1 < n && !std::isnan(a[k + 1])) a[k] = a[k + 1] - (mg.grid()[k + 1] - mg.grid()[k]);
    for (std::size_t k = 0; k < n; ++k)
        if (std::isnan(a[k]) && k > 0 && !std::isnan(a[k - 1])) a[k] = a[k - 1] + (mg.grid()[k] - mg.grid()[k - 1]);
    for (double v : a)
        if (std::isnan(v)) throw NotInConvexOrder("mu has mass outside the open hull of nu");
    for (std::size_t k = 1; k < n; ++k)
        if (!(a[k] > a[k - 1])) a[k] = a[k - 1] + 1e-12 * (1.0 + std::abs(a[k - 1]));
    return Law{CdfGrid(std::move(a), mg.values())};
}

CdfGrid bass_operator(const CdfGrid& F, const Law& mu, const Law& nu)
{
    Law next = pin(bass_step(Law{F}, mu, nu));
    if (const auto* m = std::get_if<Measure1D>(&next)) return CdfGrid::from_measure(*m, F.grid());
    const auto& g = std::get<CdfGrid>(next);
    std::vector<double> x = F.grid();
    if (g.lower() < x.front()) x.insert(x.begin(), g.lower());
    if (g.upper() > x.back()) x.push_back(g.upper());
    std::vector<double> v(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) v[k] = g.cdf(x[k]);
    v.front() = 0.0;
    v.back() = 1.0;
    return CdfGrid(std::move(x), std::move(v));
}

BassSolution bass_solve(const Law& mu, const Law& nu, const BassOptions& opts)
{
    check_pair(mu, nu);
    BassSolution s;
    s.mu = mu;
    s.nu = nu;
    const std::size_t n = std::max<std::size_t>(opts.grid_size, 16);

    if (is_dirac(mu)) {
        s.alpha = Law{Measure1D::dirac(0.0)};
        s.t1 = bass_t1(s.alpha, nu);
        s.iterations = 1;
        s.residual = 0.0;
        s.residual_history = {0.0};
    } else {
        Law alpha = opts.initial ? Law{*opts.initial} : Law{CdfGrid::gaussian(0.0, 1.0, n)};
        for (int it = 1;; ++it) {
            Law next = pin(bass_step(alpha, mu, nu));
            double r = residual(alpha, next, n);
            s.residual_history.push_back(r);
            alpha = std::move(next);
            if (r <= opts.tol) {
                s.iterations = it;
                s.residual = r;
                break;
            }
            if (it >= opts.max_iter) throw NoConvergence("Bass iteration did not converge", it, r);
        }
        s.alpha = std::move(alpha);
        s.t1 = bass_t1(s.alpha, nu);
    }
    double spacing = 0.0;
    for (const Law* l : {&s.mu, &s.nu, &s.alpha})
        if (const auto* g = std::get_if<CdfGrid>(l)) spacing = std::max(spacing, g->max_spacing());
    s.grid_spacing = spacing;
    s.mu_leg_error = leg_errors(s, s.nu_leg_error);
    return s;
}

BassDecomposition bass_solve_components(const Measure1D& mu, const Measure1D& nu, const BassOptions& opts)
{
    Decomposition d = irreducible_components(mu, nu);
    if (d.components.empty()) throw DegeneratePair("mu equals nu; no irreducible component");
    BassDecomposition out;
    out.frozen = d.frozen;
    for (auto& c : d.components) {
        BassSolution sol = bass_solve(Law{c.mu}, Law{c.nu}, opts);
        out.parts.push_back({std::move(c), std::move(sol)});
    }
    return out;
}

SmoothedMap map_at_time(const TransportMap& t1, double t)
{
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("time must lie in [0, 1]");
    return SmoothedMap(t1, 1.0 - t);
}

SmoothedMap map_at_time(const BassSolution& sol, double t) { return map_at_time(sol.t1, t); }

namespace {

// phi(Phi^{-1}(F)) using the smaller tail for accuracy
double phi_at_level(double F, double G)
{
    double p = std::min(F, G);
    if (p <= 0.0) return 0.0;
    return normal::pdf(normal::quantile(p));
}

}  // namespace

double mcov(const Law& eta)
{
    if (const auto* m = std::get_if<Measure1D>(&eta)) {
        Measure1D p = m->normalized();
        const std::size_t n = p.size();
        std::vector<double> suffix(n + 1, 0.0);
        for (std::size_t j = n; j-- > 0;) suffix[j] = suffix[j + 1] + p.weights()[j];
        double s = 0.0, F = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double F1 = (i + 1 == n) ? 1.0 : F + p.weights()[i];
            s += p.atoms()[i] * (phi_at_level(F, suffix[i]) - phi_at_level(F1, suffix[i + 1]));
            F = F1;
        }
        return s;
    }
    // Q linear on each cell in u: closed form with
    // int Phi^{-1} du = -phi(s), int (u - u0) Phi^{-1} du = -(u - u0) phi(s) + Phi(sqrt2 s) / (2 sqrt(pi))
    const auto& g = std::get<CdfGrid>(eta);
    const double c = 0.5 / std::sqrt(std::numbers::pi);
    double s = 0.0;
    for (std::size_t k = 1; k < g.size(); ++k) {
        double u0 = g.values()[k - 1], u1 = g.values()[k];
        if (u1 <= u0) continue;
        double z0 = g.grid()[k - 1], z1 = g.grid()[k];
        double f0 = phi_at_level(u0, 1.0 - u0), f1 = phi_at_level(u1, 1.0 - u1);
        double g1 = f0 - f1;
        if (u1 - u0 < 1e-10) {
            s += 0.5 * (z0 + z1) * g1;
            continue;
        }
        double s0 = normal::quantile(u0), s1 = normal::quantile(u1);
        double a0 = std::numbers::sqrt2 * s0, a1 = std::numbers::sqrt2 * s1;
        double dphi2 = (a0 >= 0.0) ? normal::sf(a0) - normal::sf(a1) : normal::cdf(a1) - normal::cdf(a0);
        if (u0 == 0.0) dphi2 = normal::cdf(a1);
        if (u1 == 1.0) dphi2 = (a0 >= 0.0) ? normal::sf(a0) : 1.0 - normal::cdf(a0);
        double g2 = -(u1 - u0) * f1 + c * dphi2;
        double kappa = (z1 - z0) / (u1 - u0);
        s += z0 * g1 + kappa * g2;
    }
    return s;
}

double sbm_value(const BassSolution& sol)
{
    SmoothedMap g(sol.t1, 1.0);
    if (const auto* a = std::get_if<Measure1D>(&sol.alpha)) {
        double s = 0.0;
        for (std::size_t i = 0; i < a->size(); ++i) s += a->weights()[i] * g.derivative(a->atoms()[i]);
        return s;
    }
    const auto& ag = std::get<CdfGrid>(sol.alpha);
    double s = 0.0;
    double prev = g(ag.grid()[0]);
    for (std::size_t k = 1; k < ag.size(); ++k) {
        double cur = g(ag.grid()[k]);
        double m = ag.values()[k] - ag.values()[k - 1];
        if (m > 0.0) s += m * (cur - prev) / (ag.grid()[k] - ag.grid()[k - 1]);
        prev = cur;
    }
    return s;
}

double value_sbm(const Law& mu, const Law& nu, const BassOptions& opts)
{
    if (is_atomic(mu) && is_atomic(nu)) {
        const auto& m = std::get<Measure1D>(mu);
        const auto& n = std::get<Measure1D>(nu);
        if (!convex_order_leq(m, n)) throw NotInConvexOrder("mu is not dominated by nu in convex order");
        Decomposition d = irreducible_components(m, n);
        double v = 0.0;
        for (const auto& c : d.components) v += c.mass * sbm_value(bass_solve(Law{c.mu}, Law{c.nu}, opts));
        return v;
    }
    return sbm_value(bass_solve(mu, nu, opts));
}

double value_gsbm(const Measure1D& mu, const Measure1D& nu, const BassOptions& opts)
{
    return cn_normalizer(mu) * value_sbm(Law{cn_measure(mu)}, Law{cn_measure(nu)}, opts);
}

}  // namespace cnmot
