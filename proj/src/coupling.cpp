#include "cnmot/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cnmot/errors.hpp"

namespace cnmot {

namespace {

void check_sorted_finite(const std::vector<double>& v, const char* what)
{
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) throw InvalidInput(std::string(what) + " atoms must be finite");
        if (i > 0 && !(v[i] > v[i - 1])) throw InvalidInput(std::string(what) + " atoms must be strictly increasing");
    }
}

// index of each atom of `a` in the merged list, merged within tol
std::vector<double> merge_atoms(const std::vector<double>& a, const std::vector<double>& b, double tol)
{
    std::vector<double> m(a);
    m.insert(m.end(), b.begin(), b.end());
    std::sort(m.begin(), m.end());
    std::vector<double> out;
    for (double x : m)
        if (out.empty() || x - out.back() > tol) out.push_back(x);
    return out;
}

std::size_t find_atom(const std::vector<double>& merged, double x, double tol)
{
    auto it = std::lower_bound(merged.begin(), merged.end(), x - tol);
    return static_cast<std::size_t>(it - merged.begin());
}

}  // namespace

MartingaleCoupling::MartingaleCoupling(std::vector<double> source, std::vector<double> target,
                                       std::vector<double> weights)
    : source_(std::move(source)), target_(std::move(target)), weights_(std::move(weights))
{
    if (source_.empty() || target_.empty()) throw InvalidInput("coupling needs non-empty source and target");
    if (weights_.size() != source_.size() * target_.size()) throw InvalidInput("coupling weight table has wrong size");
    check_sorted_finite(source_, "source");
    check_sorted_finite(target_, "target");
    double total = 0.0;
    for (double w : weights_) {
        if (!std::isfinite(w) || w < 0.0) throw InvalidInput("coupling weights must be finite and non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > kWeightSumTol) throw InvalidInput("coupling weights must sum to one");
}

Measure1D MartingaleCoupling::source_marginal() const
{
    std::vector<double> w(rows(), 0.0);
    for (std::size_t i = 0; i < rows(); ++i)
        for (std::size_t j = 0; j < cols(); ++j) w[i] += at(i, j);
    return Measure1D(source_, w);
}

Measure1D MartingaleCoupling::target_marginal() const
{
    std::vector<double> w(cols(), 0.0);
    for (std::size_t i = 0; i < rows(); ++i)
        for (std::size_t j = 0; j < cols(); ++j) w[j] += at(i, j);
    return Measure1D(target_, w);
}

double MartingaleCoupling::martingale_residual() const
{
    double r = 0.0;
    for (std::size_t i = 0; i < rows(); ++i) {
        double m = 0.0, s = 0.0;
        for (std::size_t j = 0; j < cols(); ++j) {
            m += at(i, j);
            s += at(i, j) * (target_[j] - source_[i]);
        }
        if (m > 0.0) r = std::max(r, std::abs(s) / m);
    }
    return r;
}

double MartingaleCoupling::max_abs_diff(const MartingaleCoupling& other, double atom_tol) const
{
    auto ms = merge_atoms(source_, other.source_, atom_tol);
    auto mt = merge_atoms(target_, other.target_, atom_tol);
    std::vector<double> a(ms.size() * mt.size(), 0.0), b(a.size(), 0.0);
    auto fill = [&](const MartingaleCoupling& c, std::vector<double>& dst) {
        for (std::size_t i = 0; i < c.rows(); ++i) {
            std::size_t ii = find_atom(ms, c.source_[i], atom_tol);
            for (std::size_t j = 0; j < c.cols(); ++j) dst[ii * mt.size() + find_atom(mt, c.target_[j], atom_tol)] += c.at(i, j);
        }
    };
    fill(*this, a);
    fill(other, b);
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

LiftedCoupling::LiftedCoupling(std::vector<LiftedCell> cells) : cells_(std::move(cells))
{
    for (const auto& c : cells_) {
        if (!std::isfinite(c.x0) || !std::isfinite(c.x1) || !std::isfinite(c.u) || !std::isfinite(c.w) || c.w < 0.0)
            throw InvalidInput("lifted coupling cell is not finite/non-negative");
        if (c.u < 0.0 || c.u > 1.0) throw InvalidInput("lifted coupling label u must lie in [0, 1]");
    }
}

double LiftedCoupling::total_weight() const
{
    double s = 0.0;
    for (const auto& c : cells_) s += c.w;
    return s;
}

Measure1D LiftedCoupling::x0_marginal() const
{
    std::vector<double> a, w;
    for (const auto& c : cells_) {
        a.push_back(c.x0);
        w.push_back(c.w);
    }
    return Measure1D::from_samples(a, w);
}

Measure1D LiftedCoupling::x1_marginal() const
{
    std::vector<double> a, w;
    for (const auto& c : cells_) {
        a.push_back(c.x1);
        w.push_back(c.w);
    }
    return Measure1D::from_samples(a, w);
}

MartingaleCoupling LiftedCoupling::project() const
{
    std::map<double, std::size_t> src, tgt;
    for (const auto& c : cells_) {
        if (c.w == 0.0) continue;
        src.emplace(c.x0, 0);
        tgt.emplace(c.x1, 0);
    }
    std::vector<double> s, t;
    for (auto& [x, i] : src) {
        i = s.size();
        s.push_back(x);
    }
    for (auto& [y, j] : tgt) {
        j = t.size();
        t.push_back(y);
    }
    std::vector<double> w(s.size() * t.size(), 0.0);
    double total = total_weight();
    for (const auto& c : cells_)
        if (c.w != 0.0) w[src[c.x0] * t.size() + tgt[c.x1]] += c.w / total;
    return MartingaleCoupling(std::move(s), std::move(t), std::move(w));
}

double LiftedCoupling::martingale_residual() const
{
    std::map<std::pair<double, double>, std::pair<double, double>> g;
    for (const auto& c : cells_) {
        auto& [m, s] = g[{c.x0, c.u}];
        m += c.w;
        s += c.w * (c.x1 - c.x0);
    }
    double r = 0.0;
    for (const auto& [k, v] : g)
        if (v.first > 0.0) r = std::max(r, std::abs(v.second / v.first) / (1.0 + std::abs(k.first)));
    return r;
}

}  // namespace cnmot
