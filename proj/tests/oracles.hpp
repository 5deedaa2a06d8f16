#pragma once

// Independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "cnmot/measure.hpp"

namespace oracle {

inline double Phi(double z) { return boost::math::cdf(boost::math::normal(), z); }
inline double Phi_inv(double u) { return boost::math::quantile(boost::math::normal(), u); }
inline double phi(double z) { return boost::math::pdf(boost::math::normal(), z); }

// composite Simpson on [a, b] with n (even) panels
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000)
{
    if (n % 2) ++n;
    double h = (b - a) / n, s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// E[f(Z)] for Z standard normal; f smooth between the given breakpoints
inline double gauss_expect(const std::function<double(double)>& f, double width = 12.0, int n = 40000,
                           std::vector<double> breaks = {})
{
    breaks.push_back(-width);
    breaks.push_back(width);
    std::sort(breaks.begin(), breaks.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        double a = std::max(breaks[i], -width), b = std::min(breaks[i + 1], width);
        if (b <= a) continue;
        // stay strictly inside so one-sided limits are used at the ends
        double e = 1e-12 * (b - a);
        s += simpson([&](double z) { return f(z) * phi(z); }, a + e, b - e, n);
    }
    return s;
}

// int |F_a - F_b| by sorting equally weighted samples
inline double w1_sorted(std::vector<double> a, std::vector<double> b)
{
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
}

// mu and nu obtained from mu by splitting each atom into a mean-preserving pair
struct Pair {
    cnmot::Measure1D mu;
    cnmot::Measure1D nu;
};

inline Pair random_pair(std::mt19937_64& rng, int n_mu, double lo, double hi, bool positive = true)
{
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<double> a, w;
    double total = 0.0;
    for (int i = 0; i < n_mu; ++i) {
        a.push_back(lo + (hi - lo) * (0.25 + 0.5 * U(rng)));
        w.push_back(0.2 + U(rng));
        total += w.back();
    }
    for (double& x : w) x /= total;
    std::vector<double> b, v;
    for (int i = 0; i < n_mu; ++i) {
        double l = lo + (a[i] - lo) * U(rng) * 0.95;
        double r = a[i] + (hi - a[i]) * (0.05 + 0.95 * U(rng));
        if (positive) l = std::max(l, 1e-3);
        double p = (r - a[i]) / (r - l);
        b.push_back(l);
        v.push_back(w[i] * p);
        b.push_back(r);
        v.push_back(w[i] * (1.0 - p));
    }
    return {cnmot::Measure1D(a, w), cnmot::Measure1D(b, v)};
}

}  // namespace oracle
