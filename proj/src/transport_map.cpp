#include "cnmot/transport_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cnmot/errors.hpp"
#include "cnmot/normal.hpp"

namespace cnmot {

namespace {
constexpr double kWindow = 10.0;

// P(a <= x + sZ < b) with s > 0, careful in both tails
double gauss_mass(double za, double zb)
{
    if (za > 0.0) return normal::sf(za) - normal::sf(zb);
    return normal::cdf(zb) - normal::cdf(za);
}
}  // namespace

TransportMap::TransportMap(std::vector<double> nodes, std::vector<double> left, std::vector<double> right,
                           double below, double above)
    : nodes_(std::move(nodes)), left_(std::move(left)), right_(std::move(right)), below_(below), above_(above)
{
    if (nodes_.empty()) throw InvalidInput("transport map needs at least one node");
    if (left_.size() + 1 != nodes_.size() || right_.size() != left_.size())
        throw InvalidInput("transport map segment count mismatch");
    for (std::size_t k = 1; k < nodes_.size(); ++k)
        if (nodes_[k] < nodes_[k - 1]) throw InvalidInput("transport map nodes must be sorted");
    const std::size_t n = nodes_.size();
    jump_.assign(n, 0.0);
    if (n == 1) {
        jump_[0] = above_ - below_;
        return;
    }
    jump_[0] = left_[0] - below_;
    for (std::size_t k = 1; k + 1 < n; ++k) jump_[k] = left_[k] - right_[k - 1];
    jump_[n - 1] = above_ - right_[n - 2];
}

TransportMap TransportMap::step(std::vector<double> thresholds, std::vector<double> levels)
{
    if (levels.size() != thresholds.size() + 1) throw InvalidInput("step map needs one more level than thresholds");
    if (thresholds.empty()) return TransportMap({0.0}, {}, {}, levels[0], levels[0]);
    std::vector<double> l(levels.begin() + 1, levels.end() - 1);
    return TransportMap(std::move(thresholds), l, l, levels.front(), levels.back());
}

TransportMap TransportMap::interpolant(std::span<const double> grid, std::span<const double> values)
{
    if (grid.size() != values.size() || grid.size() < 2) throw InvalidInput("interpolant needs >= 2 matching nodes");
    std::vector<double> l(values.begin(), values.end() - 1), r(values.begin() + 1, values.end());
    return TransportMap(std::vector<double>(grid.begin(), grid.end()), l, r, values.front(), values.back());
}

TransportMap TransportMap::identity(double lo, double hi)
{
    return TransportMap({lo, hi}, {lo}, {hi}, lo, hi);
}

double TransportMap::operator()(double x) const
{
    if (x < nodes_.front()) return below_;
    if (x >= nodes_.back()) return above_;
    std::size_t k = static_cast<std::size_t>(std::upper_bound(nodes_.begin(), nodes_.end(), x) - nodes_.begin()) - 1;
    double h = nodes_[k + 1] - nodes_[k];
    if (h <= 0.0) return left_[k];
    return left_[k] + (right_[k] - left_[k]) * (x - nodes_[k]) / h;
}

double TransportMap::smoothed(double x, double variance) const
{
    if (variance <= 0.0) return (*this)(x);
    return smoothed_eval(x, variance, nullptr);
}

double TransportMap::smoothed_derivative(double x, double variance) const
{
    double d;
    smoothed_eval(x, variance, &d);
    return d;
}

double TransportMap::smoothed_eval(double x, double variance, double* deriv) const
{
    const double s = std::sqrt(variance);
    const std::size_t n = nodes_.size();
    double out = below_ * normal::cdf((nodes_.front() - x) / s) + above_ * normal::sf((nodes_.back() - x) / s);
    double d = 0.0;
    const double lo = x - kWindow * s, hi = x + kWindow * s;
    std::size_t k = static_cast<std::size_t>(std::upper_bound(nodes_.begin(), nodes_.end(), lo) - nodes_.begin());
    k = k > 0 ? k - 1 : 0;
    // pdf and cdf at the current node are carried over to the next segment
    double za = (nodes_[k] - x) / s;
    double pa = normal::pdf(za), ca = normal::cdf(za);
    for (; k < n && nodes_[k] < hi; ++k) {
        if (deriv && jump_[k] != 0.0) d += jump_[k] * pa / s;
        if (k + 1 == n) break;
        double a = nodes_[k], b = nodes_[k + 1];
        double zb = (b - x) / s;
        double pb = normal::pdf(zb), cb = normal::cdf(zb);
        if (b > a) {
            double m = (right_[k] - left_[k]) / (b - a);
            double mass = (za > 0.0) ? normal::sf(za) - normal::sf(zb) : cb - ca;
            out += (left_[k] + m * (x - a)) * mass + m * s * (pa - pb);
            if (deriv) d += m * mass;
        }
        za = zb;
        pa = pb;
        ca = cb;
    }
    if (deriv) *deriv = d;
    return out;
}

bool TransportMap::is_nondecreasing(double tol) const
{
    for (std::size_t k = 0; k < jump_.size(); ++k)
        if (jump_[k] < -tol) return false;
    for (std::size_t k = 0; k < left_.size(); ++k)
        if (right_[k] < left_[k] - tol) return false;
    return true;
}

MapGrid TransportMap::tabulate(std::span<const double> grid) const
{
    MapGrid g{std::vector<double>(grid.begin(), grid.end()), {}};
    g.values.reserve(grid.size());
    for (double x : grid) g.values.push_back((*this)(x));
    return g;
}

double SmoothedMap::derivative(double x) const
{
    if (variance_ <= 0.0) throw InvalidInput("derivative of an unsmoothed map");
    return base_.smoothed_derivative(x, variance_);
}

MapGrid SmoothedMap::tabulate(std::span<const double> grid) const
{
    MapGrid g{std::vector<double>(grid.begin(), grid.end()), {}};
    g.values.reserve(grid.size());
    for (double x : grid) g.values.push_back((*this)(x));
    return g;
}

double SmoothedMap::inverse(double y, double guess) const
{
    if (variance_ <= 0.0) throw InvalidInput("inverse of an unsmoothed map");
    if (!(y > base_.below() && y < base_.above()) && base_.below() < base_.above())
        throw InvalidInput("map inverse: target outside the range");
    const double sd = std::sqrt(variance_);
    double lo = -INFINITY, hi = INFINITY;
    double x = std::isfinite(guess) ? guess : 0.0, expand = sd;
    for (int it = 0; it < 300; ++it) {
        double d;
        double f = base_.smoothed_eval(x, variance_, &d) - y;
        if (f == 0.0) return x;
        if (f < 0.0) lo = x;
        else hi = x;
        bool bracketed = std::isfinite(lo) && std::isfinite(hi);
        if (bracketed && hi - lo <= 1e-14 * (1.0 + std::abs(x))) break;
        double next = d > 0.0 ? x - f / d : NAN;
        if (!(next > lo && next < hi) || (!bracketed && std::abs(next - x) > 4.0 * expand)) {
            if (bracketed) next = 0.5 * (lo + hi);
            else {
                next = std::isfinite(lo) ? lo + expand : hi - expand;
                expand *= 2.0;
            }
        }
        if (std::abs(next - x) <= 1e-14 * (1.0 + std::abs(x))) return next;
        x = next;
    }
    return x;
}

namespace {

struct QPiece {
    double u0, u1, q0, q1;
    double at(double u) const { return u1 > u0 ? q0 + (u - u0) / (u1 - u0) * (q1 - q0) : q1; }
};

std::vector<QPiece> quantile_pieces(const Law& law)
{
    std::vector<QPiece> out;
    if (const auto* m = std::get_if<Measure1D>(&law)) {
        Measure1D p = m->normalized();
        double c = 0.0;
        for (std::size_t j = 0; j < p.size(); ++j) {
            double c1 = (j + 1 == p.size()) ? 1.0 : c + p.weights()[j];
            out.push_back({c, c1, p.atoms()[j], p.atoms()[j]});
            c = c1;
        }
        return out;
    }
    const auto& g = std::get<CdfGrid>(law);
    for (std::size_t l = 1; l < g.size(); ++l)
        if (g.values()[l] > g.values()[l - 1])
            out.push_back({g.values()[l - 1], g.values()[l], g.grid()[l - 1], g.grid()[l]});
    return out;
}

// piece with u0 < u <= u1
std::size_t piece_at(const std::vector<QPiece>& p, double u)
{
    auto it = std::lower_bound(p.begin(), p.end(), u, [](const QPiece& q, double v) { return q.u1 < v; });
    return std::min(static_cast<std::size_t>(it - p.begin()), p.size() - 1);
}

}  // namespace

TransportMap monotone_map(const Law& theta1, const Law& theta2)
{
    auto pieces = quantile_pieces(theta2);
    const double below = pieces.front().q0, above = pieces.back().q1;
    auto Q = [&](double u) { return pieces[piece_at(pieces, u)].at(u); };

    if (const auto* m = std::get_if<Measure1D>(&theta1)) {
        Measure1D p = m->normalized();
        std::vector<double> nodes = p.atoms(), vals;
        double c = 0.0;
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            c += p.weights()[i];
            vals.push_back(Q(c));
        }
        return TransportMap(nodes, vals, vals, below, above);
    }

    const auto& g = std::get<CdfGrid>(theta1);
    std::vector<double> nodes, left, right;
    for (std::size_t k = 1; k < g.size(); ++k) {
        double x0 = g.grid()[k - 1], x1 = g.grid()[k];
        double G0 = g.values()[k - 1], G1 = g.values()[k];
        if (G1 <= G0) {
            double v = Q(G0);
            nodes.push_back(x0);
            left.push_back(v);
            right.push_back(v);
            continue;
        }
        std::vector<double> us{G0};
        for (std::size_t j = piece_at(pieces, G0); j < pieces.size() && pieces[j].u1 < G1; ++j)
            if (pieces[j].u1 > G0) us.push_back(pieces[j].u1);
        us.push_back(G1);
        for (std::size_t i = 0; i + 1 < us.size(); ++i) {
            double ua = us[i], ub = us[i + 1];
            const QPiece& q = pieces[piece_at(pieces, 0.5 * (ua + ub))];
            nodes.push_back(x0 + (ua - G0) / (G1 - G0) * (x1 - x0));
            left.push_back(q.at(ua));
            right.push_back(q.at(ub));
        }
    }
    nodes.push_back(g.grid().back());
    return TransportMap(std::move(nodes), std::move(left), std::move(right), below, above);
}

}  // namespace cnmot
