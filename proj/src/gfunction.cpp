#include "boltz/gfunction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "boltz/accum.hpp"

namespace boltz {

namespace {

// Leftmost preimage of the piecewise-linear h through (n, h[n]); flats (from
// non-strict B*) map to their left endpoint.
double h_inverse(const std::vector<double>& h, double y) {
    if (y <= h[0]) return 0.0;
    for (std::size_t k = 0; k + 1 < h.size(); ++k) {
        if (y <= h[k + 1]) {
            if (h[k + 1] == h[k]) return double(k);
            return double(k) + (y - h[k]) / (h[k + 1] - h[k]);
        }
    }
    throw std::logic_error("h inverse out of range");
}

}  // namespace

double GFunction::g(double x) const {
    if (x < 0.0) throw std::domain_error("g on negatives");
    if (x < 1.0) return 1.0;
    int k = int(std::floor(std::log2(x)));
    k = std::min(k, int(A_.size()) - 1);
    return A_[std::size_t(k)];
}

double GFunction::G(double x) const {
    if (x < 0.0) throw std::domain_error("G on negatives");
    if (x <= 1.0) return x;
    int k = int(std::floor(std::log2(x)));
    k = std::min(k, int(A_.size()) - 1);
    return Gdyadic_[std::size_t(k)] +
           A_[std::size_t(k)] * (x - std::ldexp(1.0, k));
}

double GFunction::q(double x) const {
    if (x < 0.0) throw std::domain_error("q on negatives");
    if (x == 0.0) return 1.0 / 3.0;
    // \int_0^x G(y^2) dy cell by cell; on a cell with slope A and left dyadic
    // point c, G(y^2) = (G(c) - A c) + A y^2.
    Accum acc;
    double x2 = x * x;
    double seg = std::min(x, 1.0);
    acc.add(seg * seg * seg / 3.0);  // G(y^2) = y^2 below 1
    if (x2 > 1.0) {
        int levels = int(A_.size());
        for (int k = 0;; ++k) {
            double c = std::ldexp(1.0, k);
            if (c >= x2) break;
            double cr = std::ldexp(1.0, k + 1);
            int kk = std::min(k, levels - 1);
            double a = std::sqrt(c);
            double b = (k >= levels - 1) ? x : std::min(x, std::sqrt(cr));
            // last constructed slope extends beyond the final dyadic point
            if (k >= levels - 1) {
                double A = A_[std::size_t(kk)];
                double G0 = Gdyadic_[std::size_t(kk)] - A * std::ldexp(1.0, kk);
                acc.add(G0 * (b - a) + A * (b * b * b - a * a * a) / 3.0);
                break;
            }
            double A = A_[std::size_t(kk)];
            double G0 = Gdyadic_[std::size_t(kk)] - A * c;
            acc.add(G0 * (b - a) + A * (b * b * b - a * a * a) / 3.0);
            if (b >= x) break;
        }
    }
    return acc.value() / (x * x * x);
}

GFunction build_G(std::vector<std::pair<double, double>> energy_samples,
                  int max_level) {
    if (energy_samples.empty())
        throw std::invalid_argument("empty energy sample");
    if (max_level < 2) throw std::invalid_argument("max_level too small");
    for (auto& [x, w] : energy_samples)
        if (!(x >= 0.0) || !(w >= 0.0) || !std::isfinite(x) ||
            !std::isfinite(w))
            throw std::invalid_argument("bad energy sample");
    std::sort(energy_samples.begin(), energy_samples.end());
    double wtot = 0.0;
    for (auto& [x, w] : energy_samples) wtot += w;
    if (!(wtot > 0.0)) throw std::invalid_argument("zero total weight");

    // suffix[i] = sum_{j >= i} w_j x_j / wtot (the tail of the first-moment
    // integral, atoms at the cut included)
    std::size_t n = energy_samples.size();
    std::vector<double> suffix(n + 1, 0.0);
    {
        Accum acc;
        for (std::size_t i = n; i-- > 0;) {
            acc.add(energy_samples[i].first * energy_samples[i].second / wtot);
            suffix[i] = acc.value();
        }
    }
    auto tail = [&](double r) {
        std::size_t i = std::lower_bound(energy_samples.begin(),
                                         energy_samples.end(),
                                         std::make_pair(r, -1.0)) -
                        energy_samples.begin();
        return suffix[i];
    };

    GFunction G;
    auto& tr = G.trace_;

    // r_j: minimal positive integer with tail(r) <= 2^{-j}, forced strictly
    // increasing (a constant run would make B_n infinite for compactly
    // supported data).
    long long rprev = 0;
    for (int j = 1;; ++j) {
        long long r = rprev + 1;
        while (tail(double(r)) > std::ldexp(1.0, -j)) ++r;
        tr.r.push_back(r);
        rprev = r;
        if (r > max_level) break;
    }

    int N = max_level;
    tr.B.resize(std::size_t(N) + 1, 0);  // index by n, entry 0 unused
    for (int nn = 1; nn <= N; ++nn) {
        long long c = 0;
        for (long long rj : tr.r)
            if (rj <= nn) ++c;
        tr.B[std::size_t(nn)] = c;
    }
    tr.Bstar.resize(std::size_t(N) + 1, 0);
    tr.Bstar[1] = tr.B[1];
    for (int nn = 2; nn <= N; ++nn) {
        long long best = -1;
        for (int m = 1; m <= N; ++m)
            if (tr.B[std::size_t(m)] > tr.B[std::size_t(nn)] &&
                (best < 0 || tr.B[std::size_t(m)] < best))
                best = tr.B[std::size_t(m)];
        // B is unbounded with unit steps, so the next value past the computed
        // window is B_n + 1
        tr.Bstar[std::size_t(nn)] = best >= 0 ? best : tr.B[std::size_t(nn)] + 1;
    }
    for (int nn = 1; nn < N; ++nn)
        if (tr.Bstar[std::size_t(nn) + 1] <= tr.Bstar[std::size_t(nn)])
            tr.bstar_strictly_increasing = false;

    tr.h.resize(std::size_t(N) + 1);
    tr.h[0] = 0.0;
    for (int nn = 1; nn <= N; ++nn)
        tr.h[std::size_t(nn)] = double(tr.Bstar[std::size_t(nn)]) + 1.0;
    for (int nn = 0; nn < N; ++nn)
        if (tr.h[std::size_t(nn) + 1] < tr.h[std::size_t(nn)])
            throw std::logic_error("h not monotone");

    G.A_.resize(std::size_t(N));
    for (int nn = 1; nn < N; ++nn)
        G.A_[std::size_t(nn)] =
            h_inverse(tr.h, double(tr.B[std::size_t(nn)]) + 1.0) + 1.0;
    G.A_[0] = G.A_[1];

    // construction guarantees, checked rather than trusted
    double sup_ratio = 0.0;
    for (std::size_t k = 0; k + 1 < G.A_.size(); ++k) {
        if (!(G.A_[k] >= 1.0) || G.A_[k + 1] < G.A_[k] - 1e-12)
            throw std::logic_error("A sequence not nondecreasing from 1");
        sup_ratio = std::max(sup_ratio, G.A_[k + 1] / G.A_[k]);
    }
    tr.sup_ratio = sup_ratio;
    G.lambda2_ = std::max(G.A_[0], sup_ratio);
    G.lambda1_ = 2.0 * G.lambda2_;
    G.lambda3_ = 2.0 * G.lambda2_;

    G.Gdyadic_.resize(G.A_.size() + 1);
    G.Gdyadic_[0] = 1.0;
    for (std::size_t k = 0; k < G.A_.size(); ++k)
        G.Gdyadic_[k + 1] = G.Gdyadic_[k] + G.A_[k] * std::ldexp(1.0, int(k));

    Accum ig;
    for (auto& [x, w] : energy_samples) ig.add(G.G(x) * w / wtot);
    G.int_G_dgamma_ = ig.value();
    return G;
}

GFunction build_G(const Ensemble& mu0, int max_level) {
    std::vector<std::pair<double, double>> s;
    s.reserve(mu0.size());
    for (std::size_t i = 0; i < mu0.size(); ++i)
        s.emplace_back(mu0.points()[i].norm2(), mu0.weights()[i]);
    return build_G(std::move(s), max_level);
}

GConstants constants(const GFunction& G, double m2) {
    GConstants c;
    c.m = int(std::floor(std::log2(G.lambda1() + 1.0))) + 1;
    double p = std::ldexp(1.0, c.m);  // 2^m
    if (!(p > G.lambda1() + 1.0))
        throw std::logic_error("m fails 2^m > lambda1 + 1");
    double g1 = G.G(1.0);
    c.C1 = std::pow(G.lambda3(), 2.0 * c.m) * G.int_G_dgamma() +
           2.0 * std::exp(p) * g1 *
               (1.0 + G.lambda1() * std::pow(p * m2, p) /
                          (p - G.lambda1() - 1.0));
    c.C = 3.0 * G.lambda3() * G.lambda3() * c.C1;
    return c;
}

namespace {

// Weighted mean of f over the ensemble with its standard error.
template <class F>
std::pair<double, double> weighted_mean_se(const Ensemble& e, F&& f) {
    Accum s;
    for (std::size_t i = 0; i < e.size(); ++i)
        s.add(e.weights()[i] * f(e.points()[i]));
    double mean = s.value();
    Accum v;
    for (std::size_t i = 0; i < e.size(); ++i) {
        double d = f(e.points()[i]) - mean;
        v.add(e.weights()[i] * e.weights()[i] * d * d);
    }
    return {mean, std::sqrt(std::max(0.0, v.value()))};
}

}  // namespace

std::vector<UIRow> check_uniform_integrability(
    const std::vector<std::pair<double, Ensemble>>& trajectory,
    const GFunction& G, double C) {
    std::vector<UIRow> rows;
    for (const auto& [t, e] : trajectory) {
        auto [mean, se] = weighted_mean_se(
            e, [&](const Vec3& v) { return v.norm2() * G.q(v.norm()); });
        rows.push_back({t, mean, se, C, mean <= C + 4.0 * se});
    }
    return rows;
}

std::vector<TailRow> check_tail_bound(
    const std::vector<std::pair<double, Ensemble>>& trajectory,
    const GFunction& G, double C, const std::vector<double>& radii) {
    std::vector<TailRow> rows;
    for (double R : radii) {
        TailRow row;
        row.R = R;
        row.bound = C / G.q(R);
        for (const auto& [t, e] : trajectory) {
            auto [mean, se] = weighted_mean_se(e, [&](const Vec3& v) {
                return v.norm() >= R ? v.norm2() : 0.0;
            });
            if (mean >= row.sup_tail) {
                row.sup_tail = mean;
                row.se = se;
            }
        }
        row.pass = row.sup_tail <= row.bound + 4.0 * row.se;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace boltz
