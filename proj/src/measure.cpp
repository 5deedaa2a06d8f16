#include "cnmot/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "cnmot/errors.hpp"
#include "cnmot/normal.hpp"

namespace cnmot {

namespace {

void check_finite(std::span<const double> v, const char* what)
{
    for (double x : v)
        if (!std::isfinite(x)) throw InvalidInput(std::string(what) + " contains a non-finite value");
}

// Integral over [0, h] of |d0 + (d1 - d0) s / h|.
double abs_linear_integral(double d0, double d1, double h)
{
    if ((d0 >= 0.0 && d1 >= 0.0) || (d0 <= 0.0 && d1 <= 0.0)) return 0.5 * h * (std::abs(d0) + std::abs(d1));
    return 0.5 * h * (d0 * d0 + d1 * d1) / (std::abs(d0) + std::abs(d1));
}

}  // namespace

// ---------------------------------------------------------------- Measure1D

Measure1D::Measure1D(std::vector<double> atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights))
{
    if (atoms_.empty()) throw InvalidInput("probability measure needs at least one atom");
    canonicalise();
    if (std::abs(mass_ - 1.0) > kWeightSumTol) {
        std::ostringstream os;
        os << "weights sum to " << mass_ << ", expected 1";
        throw InvalidInput(os.str());
    }
    for (double& w : weights_) w /= mass_;
    mass_ = 1.0;
}

Measure1D Measure1D::dirac(double x) { return Measure1D({x}, {1.0}); }

Measure1D Measure1D::sub_probability(std::vector<double> atoms, std::vector<double> weights)
{
    Measure1D m;
    m.atoms_ = std::move(atoms);
    m.weights_ = std::move(weights);
    m.canonicalise();
    if (m.mass_ > 1.0 + kWeightSumTol) throw InvalidInput("sub-probability mass exceeds one");
    return m;
}

Measure1D Measure1D::from_samples(std::span<const double> values, std::span<const double> weights)
{
    if (values.size() != weights.size() || values.empty()) throw InvalidInput("sample/weight size mismatch");
    double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw InvalidInput("sample weights must have positive total");
    std::vector<double> w(weights.begin(), weights.end());
    for (double& x : w) x /= total;
    Measure1D m;
    m.atoms_.assign(values.begin(), values.end());
    m.weights_ = std::move(w);
    m.canonicalise();
    for (double& x : m.weights_) x /= m.mass_;
    m.mass_ = 1.0;
    return m;
}

void Measure1D::canonicalise()
{
    if (atoms_.size() != weights_.size()) throw InvalidInput("atoms and weights differ in length");
    check_finite(atoms_, "atoms");
    check_finite(weights_, "weights");
    for (double w : weights_)
        if (w < 0.0) throw InvalidInput("negative weight");
    std::vector<std::size_t> idx(atoms_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return atoms_[i] < atoms_[j]; });
    std::vector<double> a, w;
    a.reserve(idx.size());
    w.reserve(idx.size());
    for (std::size_t i : idx) {
        if (weights_[i] == 0.0) continue;
        if (!a.empty() && atoms_[i] - a.back() <= kAtomMergeTol) {
            w.back() += weights_[i];
            continue;
        }
        a.push_back(atoms_[i]);
        w.push_back(weights_[i]);
    }
    atoms_ = std::move(a);
    weights_ = std::move(w);
    mass_ = std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

double Measure1D::first_moment() const
{
    double s = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) s += weights_[i] * atoms_[i];
    return s;
}

double Measure1D::mean() const
{
    if (mass_ <= 0.0) throw InvalidInput("barycenter of an empty measure");
    return first_moment() / mass_;
}

double Measure1D::variance() const
{
    double m = mean();
    double s = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) s += weights_[i] * (atoms_[i] - m) * (atoms_[i] - m);
    return s / mass_;
}

double Measure1D::cdf(double x) const
{
    auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
    return std::accumulate(weights_.begin(), weights_.begin() + (it - atoms_.begin()), 0.0);
}

double Measure1D::cdf_left(double x) const
{
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x);
    return std::accumulate(weights_.begin(), weights_.begin() + (it - atoms_.begin()), 0.0);
}

double Measure1D::quantile(double u) const
{
    if (atoms_.empty()) throw InvalidInput("quantile of an empty measure");
    double target = u * mass_;
    double c = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        c += weights_[i];
        if (c >= target - 1e-15) return atoms_[i];
    }
    return atoms_.back();
}

double Measure1D::potential(double x) const
{
    double s = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) s += weights_[i] * std::abs(x - atoms_[i]);
    return s;
}

Measure1D Measure1D::normalized() const
{
    if (mass_ <= 0.0) throw InvalidInput("cannot normalise an empty measure");
    Measure1D m = *this;
    for (double& w : m.weights_) w /= mass_;
    m.mass_ = 1.0;
    return m;
}

Measure1D Measure1D::scaled(double factor) const
{
    Measure1D m = *this;
    for (double& w : m.weights_) w *= factor;
    m.mass_ *= factor;
    return m;
}

Measure1D Measure1D::shifted(double c) const
{
    Measure1D m = *this;
    for (double& a : m.atoms_) a += c;
    return m;
}

double barycenter(const Measure1D& m) { return m.mean(); }

// ---------------------------------------------------------------- CdfGrid

CdfGrid::CdfGrid(std::vector<double> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values))
{
    if (grid_.size() != values_.size() || grid_.size() < 2) throw InvalidInput("cdf grid needs >= 2 matching nodes");
    check_finite(grid_, "grid");
    check_finite(values_, "cdf values");
    for (std::size_t k = 1; k < grid_.size(); ++k)
        if (!(grid_[k] > grid_[k - 1])) throw InvalidInput("cdf grid must be strictly increasing");
    if (std::abs(values_.front()) > kWeightSumTol || std::abs(values_.back() - 1.0) > kWeightSumTol)
        throw InvalidInput("cdf grid must start at 0 and end at 1");
    values_.front() = 0.0;
    values_.back() = 1.0;
    for (std::size_t k = 1; k < values_.size(); ++k) {
        if (values_[k] < values_[k - 1] - kWeightSumTol) throw InvalidInput("cdf values must be non-decreasing");
        values_[k] = std::clamp(std::max(values_[k], values_[k - 1]), 0.0, 1.0);
    }
}

CdfGrid CdfGrid::gaussian(double mean, double sd, std::size_t n, double half_width)
{
    if (!(sd > 0.0) || n < 3) throw InvalidInput("gaussian grid needs sd > 0 and n >= 3");
    std::vector<double> x(n), f(n);
    for (std::size_t k = 0; k < n; ++k) {
        double z = -half_width + 2.0 * half_width * static_cast<double>(k) / static_cast<double>(n - 1);
        x[k] = mean + sd * z;
        f[k] = normal::cdf(z);
    }
    f.front() = 0.0;
    f.back() = 1.0;
    return CdfGrid(std::move(x), std::move(f));
}

CdfGrid CdfGrid::from_measure(const Measure1D& m, std::span<const double> base_grid, double jump)
{
    Measure1D p = m.normalized();
    std::vector<double> nodes;
    for (double a : p.atoms()) {
        nodes.push_back(a - jump);
        nodes.push_back(a);
    }
    for (double x : base_grid) {
        bool inside_jump = false;
        for (double a : p.atoms())
            if (x > a - jump * 1.5 && x < a + jump * 0.5) inside_jump = true;
        if (!inside_jump) nodes.push_back(x);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    std::vector<double> v(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        double x = nodes[k];
        v[k] = p.cdf(x);
        // left end of a jump cell
        auto it = std::lower_bound(p.atoms().begin(), p.atoms().end(), x);
        if (it != p.atoms().end() && *it - x > 0.5 * jump && *it - x < 1.5 * jump) v[k] = p.cdf_left(*it);
    }
    if (v.front() > 0.0) {
        nodes.insert(nodes.begin(), nodes.front() - jump);
        v.insert(v.begin(), 0.0);
    }
    if (v.back() < 1.0) {
        nodes.push_back(nodes.back() + jump);
        v.push_back(1.0);
    }
    return CdfGrid(std::move(nodes), std::move(v));
}

double CdfGrid::cdf(double x) const
{
    if (x <= grid_.front()) return 0.0;
    if (x >= grid_.back()) return 1.0;
    std::size_t k = static_cast<std::size_t>(std::upper_bound(grid_.begin(), grid_.end(), x) - grid_.begin());
    double h = grid_[k] - grid_[k - 1];
    return values_[k - 1] + (values_[k] - values_[k - 1]) * (x - grid_[k - 1]) / h;
}

double CdfGrid::quantile(double u) const
{
    if (u <= 0.0) {
        std::size_t k = static_cast<std::size_t>(std::upper_bound(values_.begin(), values_.end(), 0.0) - values_.begin());
        return grid_[k - 1];
    }
    if (u >= 1.0) u = 1.0;
    std::size_t k = static_cast<std::size_t>(std::lower_bound(values_.begin(), values_.end(), u) - values_.begin());
    if (k == 0) return grid_.front();
    if (k >= values_.size()) return grid_.back();
    double dv = values_[k] - values_[k - 1];
    return grid_[k - 1] + (u - values_[k - 1]) / dv * (grid_[k] - grid_[k - 1]);
}

double CdfGrid::quantile_right(double u) const
{
    if (u >= 1.0) {
        std::size_t k = static_cast<std::size_t>(std::lower_bound(values_.begin(), values_.end(), 1.0) - values_.begin());
        return grid_[std::min(k, grid_.size() - 1)];
    }
    if (u < 0.0) u = 0.0;
    std::size_t k = static_cast<std::size_t>(std::upper_bound(values_.begin(), values_.end(), u) - values_.begin());
    if (k == 0) return grid_.front();
    if (k >= values_.size()) return grid_.back();
    double dv = values_[k] - values_[k - 1];
    return grid_[k - 1] + (u - values_[k - 1]) / dv * (grid_[k] - grid_[k - 1]);
}

double CdfGrid::mean() const
{
    double s = 0.0;
    for (std::size_t k = 1; k < grid_.size(); ++k)
        s += (values_[k] - values_[k - 1]) * 0.5 * (grid_[k] + grid_[k - 1]);
    return s;
}

double CdfGrid::variance() const
{
    double m = mean();
    double s = 0.0;
    for (std::size_t k = 1; k < grid_.size(); ++k) {
        double a = grid_[k - 1] - m, b = grid_[k] - m;
        s += (values_[k] - values_[k - 1]) * (a * a + a * b + b * b) / 3.0;
    }
    return s;
}

double CdfGrid::potential(double x) const
{
    double s = 0.0;
    for (std::size_t k = 1; k < grid_.size(); ++k) {
        double m = values_[k] - values_[k - 1];
        if (m == 0.0) continue;
        double a = grid_[k - 1], b = grid_[k];
        if (x <= a) s += m * (0.5 * (a + b) - x);
        else if (x >= b) s += m * (x - 0.5 * (a + b));
        else s += m * ((x - a) * (x - a) + (b - x) * (b - x)) / (2.0 * (b - a));
    }
    return s;
}

double CdfGrid::max_spacing() const
{
    double h = 0.0;
    for (std::size_t k = 1; k < grid_.size(); ++k) h = std::max(h, grid_[k] - grid_[k - 1]);
    return h;
}

CdfGrid CdfGrid::shifted(double c) const
{
    CdfGrid g = *this;
    for (double& x : g.grid_) x += c;
    return g;
}

CdfGrid CdfGrid::trimmed() const
{
    std::size_t i0 = 0;
    while (i0 + 1 < values_.size() && values_[i0 + 1] == 0.0) ++i0;
    std::size_t i1 = values_.size() - 1;
    while (i1 > i0 + 1 && values_[i1 - 1] == 1.0) --i1;
    return CdfGrid(std::vector<double>(grid_.begin() + i0, grid_.begin() + i1 + 1),
                   std::vector<double>(values_.begin() + i0, values_.begin() + i1 + 1));
}

CdfGrid gaussian_convolve_cdf(const CdfGrid& F, double t)
{
    if (t < 0.0) throw InvalidInput("convolution time must be non-negative");
    if (t == 0.0) return F;
    const double s = std::sqrt(t);
    SmoothedCdf H(Law{F}, t);
    std::vector<double> x = F.grid();
    // extend so the smoothed law still fits on the grid
    double h_lo = x[1] - x[0], h_hi = x[x.size() - 1] - x[x.size() - 2];
    std::vector<double> left;
    for (double step = h_lo, y = x.front() - h_lo; y > F.lower() - 9.0 * s; step *= 1.25, y -= step) left.push_back(y);
    left.push_back(F.lower() - 9.0 * s);
    std::reverse(left.begin(), left.end());
    std::vector<double> right;
    for (double step = h_hi, y = x.back() + h_hi; y < F.upper() + 9.0 * s; step *= 1.25, y += step) right.push_back(y);
    right.push_back(F.upper() + 9.0 * s);
    x.insert(x.begin(), left.begin(), left.end());
    x.insert(x.end(), right.begin(), right.end());
    std::vector<double> v(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) v[k] = H.lower(x[k]);
    v.front() = 0.0;
    v.back() = 1.0;
    return CdfGrid(std::move(x), std::move(v));
}

// ---------------------------------------------------------------- Law

bool is_atomic(const Law& law) { return std::holds_alternative<Measure1D>(law); }

double law_mean(const Law& law)
{
    return std::visit([](const auto& l) { return l.mean(); }, law);
}

double law_variance(const Law& law)
{
    return std::visit([](const auto& l) { return l.variance(); }, law);
}

double law_cdf(const Law& law, double x)
{
    if (const auto* m = std::get_if<Measure1D>(&law)) return m->cdf(x) / m->mass();
    return std::get<CdfGrid>(law).cdf(x);
}

double law_cdf_left(const Law& law, double x)
{
    if (const auto* m = std::get_if<Measure1D>(&law)) return m->cdf_left(x) / m->mass();
    return std::get<CdfGrid>(law).cdf(x);
}

double law_quantile(const Law& law, double u)
{
    return std::visit([u](const auto& l) { return l.quantile(u); }, law);
}

double law_potential(const Law& law, double x)
{
    return std::visit([x](const auto& l) { return l.potential(x); }, law);
}

double law_lower(const Law& law)
{
    if (const auto* m = std::get_if<Measure1D>(&law)) return m->atoms().front();
    return std::get<CdfGrid>(law).trimmed().lower();
}

double law_upper(const Law& law)
{
    if (const auto* m = std::get_if<Measure1D>(&law)) return m->atoms().back();
    return std::get<CdfGrid>(law).trimmed().upper();
}

Law law_shifted(const Law& law, double c)
{
    return std::visit([c](const auto& l) { return Law{l.shifted(c)}; }, law);
}

std::vector<double> law_breakpoints(const Law& law)
{
    if (const auto* m = std::get_if<Measure1D>(&law)) return m->atoms();
    return std::get<CdfGrid>(law).grid();
}

// ---------------------------------------------------------------- convex order

bool convex_order_leq(const Measure1D& mu, const Measure1D& nu, double tol)
{
    if (mu.empty() || nu.empty()) return false;
    if (std::abs(mu.mass() - nu.mass()) > kWeightSumTol) return false;
    double scale = 1.0;
    for (double a : nu.atoms()) scale = std::max(scale, std::abs(a));
    for (double a : mu.atoms()) scale = std::max(scale, std::abs(a));
    if (std::abs(mu.first_moment() - nu.first_moment()) > tol * scale) return false;
    for (const auto* m : {&mu, &nu})
        for (double x : m->atoms())
            if (mu.potential(x) > nu.potential(x) + tol * scale) return false;
    return true;
}

bool convex_order_leq(const Law& mu, const Law& nu, double tol)
{
    if (is_atomic(mu) && is_atomic(nu)) return convex_order_leq(std::get<Measure1D>(mu), std::get<Measure1D>(nu), tol);
    double scale = 1.0 + std::max(std::abs(law_lower(nu)), std::abs(law_upper(nu)));
    if (std::abs(law_mean(mu) - law_mean(nu)) > std::max(tol, 1e-9) * scale) return false;
    std::vector<double> pts = law_breakpoints(mu);
    auto b = law_breakpoints(nu);
    pts.insert(pts.end(), b.begin(), b.end());
    std::sort(pts.begin(), pts.end());
    std::size_t n = pts.size();
    for (std::size_t i = 0; i + 1 < n; ++i) pts.push_back(0.5 * (pts[i] + pts[i + 1]));
    for (double x : pts)
        if (law_potential(mu, x) > law_potential(nu, x) + std::max(tol, 1e-9) * scale) return false;
    return true;
}

Decomposition irreducible_components(const Measure1D& mu, const Measure1D& nu, double tol)
{
    if (!convex_order_leq(mu, nu, std::max(tol, 1e-9))) throw NotInConvexOrder("mu is not dominated by nu in convex order");
    std::vector<double> pts = mu.atoms();
    pts.insert(pts.end(), nu.atoms().begin(), nu.atoms().end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double scale = 1.0;
    for (double p : pts) scale = std::max(scale, std::abs(p));
    const double zero = tol * scale;
    std::vector<double> d(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) d[i] = nu.potential(pts[i]) - mu.potential(pts[i]);

    Decomposition out;
    std::vector<std::pair<double, double>> intervals;
    std::size_t i = 0;
    while (i < pts.size()) {
        if (d[i] <= zero) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < pts.size() && d[j] > zero) ++j;
        // d vanishes at the extreme atoms of nu, so i > 0 and j < size
        intervals.emplace_back(pts[i - 1], pts[std::min(j, pts.size() - 1)]);
        i = j;
    }

    std::vector<double> frozen_a, frozen_w;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        double x = mu.atoms()[k];
        bool inside = false;
        for (auto [l, r] : intervals)
            if (x > l && x < r) inside = true;
        if (!inside) {
            frozen_a.push_back(x);
            frozen_w.push_back(mu.weights()[k]);
        }
    }
    out.frozen = Measure1D::sub_probability(frozen_a, frozen_w);

    for (auto [l, r] : intervals) {
        std::vector<double> ma, mw, na, nw;
        double m_mass = 0.0, m_mom = 0.0, n_mass = 0.0, n_mom = 0.0;
        for (std::size_t k = 0; k < mu.size(); ++k) {
            double x = mu.atoms()[k];
            if (x > l && x < r) {
                ma.push_back(x);
                mw.push_back(mu.weights()[k]);
                m_mass += mu.weights()[k];
                m_mom += mu.weights()[k] * x;
            }
        }
        for (std::size_t k = 0; k < nu.size(); ++k) {
            double y = nu.atoms()[k];
            if (y > l && y < r) {
                na.push_back(y);
                nw.push_back(nu.weights()[k]);
                n_mass += nu.weights()[k];
                n_mom += nu.weights()[k] * y;
            }
        }
        // endpoint masses from mass and barycenter balance
        double rest = m_mass - n_mass;
        double rest_mom = m_mom - n_mom;
        double pr = (rest_mom - rest * l) / (r - l);
        double pl = rest - pr;
        if (pl < -1e-9 || pr < -1e-9) throw NotInConvexOrder("inconsistent irreducible decomposition");
        if (pl > 0.0) {
            na.push_back(l);
            nw.push_back(pl);
        }
        if (pr > 0.0) {
            na.push_back(r);
            nw.push_back(pr);
        }
        IrreducibleComponent c;
        c.lower = l;
        c.upper = r;
        c.mass = m_mass;
        c.mu = Measure1D::sub_probability(ma, mw).normalized();
        c.nu = Measure1D::sub_probability(na, nw).normalized();
        out.components.push_back(std::move(c));
    }
    return out;
}

// ---------------------------------------------------------------- distances

double wasserstein1(const Measure1D& a, const Measure1D& b) { return wasserstein1(Law{a.normalized()}, Law{b.normalized()}); }

double wasserstein1(const Law& a, const Law& b)
{
    std::vector<double> pts = law_breakpoints(a);
    auto pb = law_breakpoints(b);
    pts.insert(pts.end(), pb.begin(), pb.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double d0 = law_cdf(a, pts[i]) - law_cdf(b, pts[i]);
        double d1 = law_cdf_left(a, pts[i + 1]) - law_cdf_left(b, pts[i + 1]);
        s += abs_linear_integral(d0, d1, pts[i + 1] - pts[i]);
    }
    return s;
}

double kolmogorov_distance(const Law& a, const Law& b)
{
    std::vector<double> pts = law_breakpoints(a);
    auto pb = law_breakpoints(b);
    pts.insert(pts.end(), pb.begin(), pb.end());
    double d = 0.0;
    for (double x : pts) {
        d = std::max(d, std::abs(law_cdf(a, x) - law_cdf(b, x)));
        d = std::max(d, std::abs(law_cdf_left(a, x) - law_cdf_left(b, x)));
    }
    return d;
}

// ---------------------------------------------------------------- SmoothedCdf

namespace {
constexpr double kWindow = 12.0;
constexpr double kNarrow = 1e-7;
}  // namespace

SmoothedCdf::SmoothedCdf(const Law& law, double variance)
{
    if (!(variance > 0.0)) throw InvalidInput("smoothing variance must be positive");
    sd_ = std::sqrt(variance);
    if (const auto* m = std::get_if<Measure1D>(&law)) {
        a_ = m->atoms();
        b_ = m->atoms();
        m_ = m->weights();
        atomic_ = true;
    } else {
        const auto& g = std::get<CdfGrid>(law);
        atomic_ = false;
        for (std::size_t k = 1; k < g.size(); ++k) {
            double w = g.values()[k] - g.values()[k - 1];
            if (w <= 0.0) continue;
            a_.push_back(g.grid()[k - 1]);
            b_.push_back(g.grid()[k]);
            m_.push_back(w);
        }
    }
    cum_.resize(m_.size() + 1, 0.0);
    for (std::size_t i = 0; i < m_.size(); ++i) cum_[i + 1] = cum_[i] + m_[i];
    total_ = cum_.back();
}

double SmoothedCdf::eval(double y, bool use_upper, double* dens) const
{
    const double lo = y - kWindow * sd_, hi = y + kWindow * sd_;
    std::size_t i = static_cast<std::size_t>(std::upper_bound(b_.begin(), b_.end(), lo) - b_.begin());
    double s = use_upper ? 0.0 : cum_[i];
    double d = 0.0;
    // values at the shared right end of the previous cell
    double prev_b = std::numeric_limits<double>::quiet_NaN(), prev_psi = 0.0, prev_cdf = 0.0;
    for (; i < a_.size() && a_[i] < hi; ++i) {
        double w = b_[i] - a_[i];
        if (w <= kNarrow * sd_) {
            double z = (y - 0.5 * (a_[i] + b_[i])) / sd_;
            s += m_[i] * (use_upper ? normal::sf(z) : normal::cdf(z));
            if (dens) d += m_[i] * normal::pdf(z) / sd_;
            continue;
        }
        // z measured as (a - y)/sd for the upper tail and (y - a)/sd otherwise
        double za = use_upper ? (a_[i] - y) / sd_ : (y - a_[i]) / sd_;
        double zb = use_upper ? (b_[i] - y) / sd_ : (y - b_[i]) / sd_;
        bool shared = (a_[i] == prev_b);
        double pa = shared ? prev_psi : normal::psi(za);
        double pb = normal::psi(zb);
        s += m_[i] * sd_ / w * (use_upper ? (pb - pa) : (pa - pb));
        if (dens) {
            // P(a <= y - sZ < b) in terms of the tail the z's live in
            double ca = shared ? prev_cdf : normal::cdf(za);
            double cb = normal::cdf(zb);
            d += m_[i] / w * (use_upper ? (cb - ca) : (ca - cb));
            prev_cdf = cb;
        }
        prev_b = b_[i];
        prev_psi = pb;
    }
    if (use_upper) s += total_ - cum_[i];
    if (dens) *dens = d;
    return std::clamp(s, 0.0, total_);
}

double SmoothedCdf::lower(double y) const { return eval(y, false, nullptr); }

double SmoothedCdf::upper(double y) const { return eval(y, true, nullptr); }

double SmoothedCdf::density(double y) const
{
    double d;
    eval(y, false, &d);
    return d;
}

double SmoothedCdf::inverse_lower(double p, double guess) const { return solve(p, false, guess); }

double SmoothedCdf::inverse_upper(double q, double guess) const { return solve(q, true, guess); }

double SmoothedCdf::solve(double target, bool use_upper, double guess) const
{
    if (!(target > 0.0) || !(target < total_)) throw InvalidInput("smoothed cdf level out of range");
    const double log_t = std::log(target);
    // g(y) is increasing; Newton in log space, safeguarded by a lazily built bracket
    auto g = [&](double y, double& dg) {
        double dens;
        double v = eval(y, use_upper, &dens);
        if (v <= 0.0) {
            dg = 0.0;
            return use_upper ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        }
        dg = dens / v;
        return use_upper ? log_t - std::log(v) : std::log(v) - log_t;
    };
    if (!std::isfinite(guess)) guess = 0.0;
    double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
    double y = guess, expand = sd_;
    for (int it = 0; it < 300; ++it) {
        double dg;
        double gy = g(y, dg);
        if (gy == 0.0) return y;
        if (gy < 0.0) lo = y;
        else hi = y;
        if (std::isfinite(lo) && std::isfinite(hi) && hi - lo <= 1e-14 * (1.0 + std::abs(y))) break;
        double next = (std::isfinite(gy) && dg > 0.0) ? y - gy / dg : std::numeric_limits<double>::quiet_NaN();
        bool bracketed = std::isfinite(lo) && std::isfinite(hi);
        if (!(next > lo && next < hi) || (!bracketed && std::abs(next - y) > 4.0 * expand)) {
            if (bracketed) next = 0.5 * (lo + hi);
            else {
                next = std::isfinite(lo) ? lo + expand : hi - expand;
                expand *= 2.0;
            }
        }
        if (std::abs(next - y) <= 1e-14 * (1.0 + std::abs(y))) return next;
        y = next;
    }
    return y;
}

}  // namespace cnmot
