#include "boltz/weakform.hpp"

#include <cmath>
#include <stdexcept>

#include "boltz/accum.hpp"
#include "boltz/collision.hpp"
#include "boltz/quad.hpp"
#include "boltz/rng.hpp"

namespace boltz {

namespace {

Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = a[i] * b[j];
    return m;
}

}  // namespace

TestFunction TestFunction::cosine(const Vec3& xi0) {
    TestFunction f;
    f.value = [xi0](const Vec3& v) { return std::cos(xi0.dot(v)); };
    f.gradient = [xi0](const Vec3& v) {
        return xi0 * (-std::sin(xi0.dot(v)));
    };
    f.hessian = [xi0](const Vec3& v) {
        Mat3 m = outer(xi0, xi0);
        double c = -std::cos(xi0.dot(v));
        for (double& e : m.m) e *= c;
        return m;
    };
    f.sup_value = 1.0;
    f.sup_gradient = xi0.norm();
    f.sup_hessian = xi0.norm2();
    return f;
}

TestFunction TestFunction::sine(const Vec3& xi0) {
    TestFunction f;
    f.value = [xi0](const Vec3& v) { return std::sin(xi0.dot(v)); };
    f.gradient = [xi0](const Vec3& v) { return xi0 * std::cos(xi0.dot(v)); };
    f.hessian = [xi0](const Vec3& v) {
        Mat3 m = outer(xi0, xi0);
        double c = -std::sin(xi0.dot(v));
        for (double& e : m.m) e *= c;
        return m;
    };
    f.sup_value = 1.0;
    f.sup_gradient = xi0.norm();
    f.sup_hessian = xi0.norm2();
    return f;
}

namespace {

// radial profile of the bump: p(s) = exp(1 - 1/(1-s)) for s = |v-c|^2/R^2
double bump_p(double s) { return std::exp(1.0 - 1.0 / (1.0 - s)); }
double bump_dp(double s) {
    double t = 1.0 - s;
    return -bump_p(s) / (t * t);
}
double bump_d2p(double s) {
    double t = 1.0 - s;
    return bump_p(s) * (1.0 / (t * t * t * t) - 2.0 / (t * t * t));
}

}  // namespace

TestFunction TestFunction::bump(const Vec3& center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("bump radius");
    TestFunction f;
    double R2 = radius * radius;
    f.value = [center, R2](const Vec3& v) {
        double s = (v - center).norm2() / R2;
        return s < 1.0 ? bump_p(s) : 0.0;
    };
    f.gradient = [center, R2](const Vec3& v) {
        double s = (v - center).norm2() / R2;
        if (s >= 1.0) return Vec3{};
        return (v - center) * (2.0 * bump_dp(s) / R2);
    };
    f.hessian = [center, R2](const Vec3& v) {
        Mat3 m{};
        double s = (v - center).norm2() / R2;
        if (s >= 1.0) return m;
        Vec3 d = v - center;
        m = outer(d, d);
        double a = 4.0 * bump_d2p(s) / (R2 * R2);
        for (double& e : m.m) e *= a;
        double diag = 2.0 * bump_dp(s) / R2;
        m(0, 0) += diag;
        m(1, 1) += diag;
        m(2, 2) += diag;
        return m;
    };
    f.sup_value = 1.0;
    // certified by a dense radial scan: eigenvalues of the Hessian are
    // (4 s p'' + 2 p')/R^2 (radial) and 2 p'/R^2 (tangential)
    double gmax = 0.0, hmax = 0.0;
    const int n = 200'000;
    for (int i = 0; i < n; ++i) {
        double s = double(i) / n;
        gmax = std::max(gmax, std::abs(bump_dp(s)) * 2.0 * std::sqrt(s));
        hmax = std::max(hmax,
                        std::abs(4.0 * s * bump_d2p(s) + 2.0 * bump_dp(s)));
        hmax = std::max(hmax, 2.0 * std::abs(bump_dp(s)));
    }
    f.sup_gradient = 1.01 * gmax / radius;
    f.sup_hessian = 1.01 * hmax / R2;
    return f;
}

std::pair<double, double> derivative_norms(double d, double x) {
    if (!(std::abs(x) < 1.0)) throw std::domain_error("|x| must be < 1");
    if (d < 0.0) throw std::domain_error("negative distance");
    double x2 = x * x;
    double first_sq =
        d * d * ((1.0 - 2.0 * x2) * (1.0 - 2.0 * x2) / (1.0 - x2) + 4.0 * x2);
    double num = -3.0 * x + 2.0 * x2 * x;
    double second = d * std::sqrt(num * num / ((1.0 - x2) * (1.0 - x2) *
                                               (1.0 - x2)) +
                                  4.0);
    return {first_sq, second};
}

SupCheck villani_sup_check(const std::vector<double>& s_grid,
                           const std::vector<double>& xi_grid) {
    SupCheck out;
    for (double s : s_grid) {
        if (!(s > 0.0 && s < 1.0))
            throw std::invalid_argument("s grid must lie in (0,1)");
        double env = 2.0 * std::sqrt(13.0) / std::sqrt(1.0 - s) + 2.0;
        double m2 = 0.0;
        for (double xi : xi_grid) {
            if (!(xi > 0.0 && xi < 1.0))
                throw std::invalid_argument("xi grid must lie in (0,1)");
            auto [fsq, sec] = derivative_norms(1.0, s * xi);
            out.max_first = std::max(out.max_first, (1.0 - s) * fsq);
            m2 = std::max(m2, (1.0 - s) * sec);
        }
        out.max_second = std::max(out.max_second, m2 / env);
    }
    out.pass_first = out.max_first <= 14.0;
    out.pass_second = out.max_second <= 1.0;
    return out;
}

namespace {

struct Curve {
    Vec3 v, w, u;
    double d;
    CollisionFrame frame;
};

// v*(x), v*'(x), v*''(x) for the direction e(theta) in the collision frame.
struct CurveEval {
    Vec3 vs, ws, dv, d2v;
};

CurveEval eval_curve(const Curve& c, double theta, double x) {
    Vec3 e = c.frame.a * std::cos(theta) + c.frame.b * std::sin(theta);
    double r = std::sqrt(std::max(0.0, 1.0 - x * x));
    Vec3 disp = (e * r + c.u * x) * (c.d * x);
    CurveEval out;
    out.vs = c.v + disp;
    out.ws = c.w - disp;
    out.dv = (e * ((1.0 - 2.0 * x * x) / r) + c.u * (2.0 * x)) * c.d;
    out.d2v = (e * ((-3.0 * x + 2.0 * x * x * x) / (r * r * r)) + c.u * 2.0) *
              c.d;
    return out;
}

double quad_form(const Mat3& m, const Vec3& x) { return x.dot(m * x); }

}  // namespace

double a_psi(const TestFunction& psi, const Vec3& v, const Vec3& w, double xi,
             int n_theta, int n_s) {
    if (!(std::abs(xi) <= 1.0)) throw std::domain_error("|xi| must be <= 1");
    if (v.x == w.x && v.y == w.y && v.z == w.z) return 0.0;
    Curve c;
    c.v = v;
    c.w = w;
    c.d = (w - v).norm();
    c.u = (w - v) / c.d;
    c.frame = orthobasis(c.u);

    GaussLegendre gth(n_theta), gu(n_s);
    Accum total;
    for (int it = 0; it < n_theta; ++it) {
        double theta = M_PI * (gth.x[it] + 1.0);  // [0, 2pi]
        double wth = M_PI * gth.w[it];
        for (int is = 0; is < n_s; ++is) {
            double uu = 0.5 * (gu.x[is] + 1.0);  // [0, 1]
            double wu = 0.5 * gu.w[is] * 2.0 * uu;  // ds = 2u du
            double s = 1.0 - uu * uu;
            double x = s * xi;
            CurveEval ce = eval_curve(c, theta, x);
            double term = psi.gradient(ce.vs).dot(ce.d2v) -
                          psi.gradient(ce.ws).dot(ce.d2v) +
                          quad_form(psi.hessian(ce.vs), ce.dv) +
                          quad_form(psi.hessian(ce.ws), ce.dv);
            total.add(wth * wu * (1.0 - s) * term);
        }
    }
    return total.value() / (8.0 * M_PI);
}

double k_psi(const TestFunction& psi) {
    return psi.sup_gradient * (std::sqrt(13.0) + 0.5) +
           7.0 * psi.sup_hessian;
}

double a_psi_xi_integral(const TestFunction& psi, const Vec3& v, const Vec3& w,
                         const Kernel& kernel, int n_xi, int n_theta,
                         int n_s) {
    GaussLegendre g(n_xi);
    Accum total;
    for (int i = 0; i < n_xi; ++i) {
        double xi = g.x[i];
        total.add(g.w[i] * xi * xi * kernel.b(std::abs(xi)) *
                  a_psi(psi, v, w, xi, n_theta, n_s));
    }
    return total.value();
}

double collision_average(const TestFunction& psi, const Vec3& v, const Vec3& w,
                         const AngleSampler& angles, int n_theta, int n_x) {
    double hv = h_psi(psi.value, v, w, angles, n_theta, n_x);
    double hw = h_psi(psi.value, w, v, angles, n_theta, n_x);
    return 0.5 * (hv + hw - psi.value(v) - psi.value(w));
}

namespace {

std::size_t weighted_index(const std::vector<double>& cdf, double u) {
    std::size_t i =
        std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
    return std::min(i, cdf.size() - 1);
}

}  // namespace

std::vector<ResidualRow> weak_residual(
    const std::vector<std::pair<double, Ensemble>>& trajectory,
    const TestFunction& psi, const AngleSampler& angles,
    const WeakformConfig& cfg) {
    if (trajectory.empty() || trajectory.front().first != 0.0)
        throw std::invalid_argument("trajectory must start at t = 0");
    if (std::abs(angles.kernel().integral() - 1.0) > 1e-9)
        throw std::invalid_argument("weak form requires a normalized kernel");

    // per snapshot: <psi, mu_t> with SE, and the pair functional D(t) by
    // subsampled U-statistics
    std::size_t k = trajectory.size();
    std::vector<double> lin(k), lin_se(k), pair(k), pair_se(k);
    for (std::size_t i = 0; i < k; ++i) {
        const Ensemble& e = trajectory[i].second;
        Accum s;
        for (std::size_t j = 0; j < e.size(); ++j)
            s.add(e.weights()[j] * psi.value(e.points()[j]));
        lin[i] = s.value();
        Accum var;
        for (std::size_t j = 0; j < e.size(); ++j) {
            double d = psi.value(e.points()[j]) - lin[i];
            var.add(e.weights()[j] * e.weights()[j] * d * d);
        }
        lin_se[i] = std::sqrt(std::max(0.0, var.value()));

        std::vector<double> cdf(e.size());
        Accum c;
        for (std::size_t j = 0; j < e.size(); ++j) {
            c.add(e.weights()[j]);
            cdf[j] = c.value();
        }
        Rng rng = Rng::derived(cfg.seed, 0x77666f72u, i);
        MeanSe ms;
        for (std::size_t p = 0; p < cfg.pair_budget; ++p) {
            std::size_t a = weighted_index(cdf, rng.uniform());
            std::size_t b = weighted_index(cdf, rng.uniform());
            if (a == b) {
                ms.add(0.0);  // v = w pairs contribute zero exactly
                continue;
            }
            ms.add(collision_average(psi, e.points()[a], e.points()[b],
                                     angles, cfg.n_theta, cfg.n_x));
        }
        pair[i] = ms.mean();
        pair_se[i] = ms.se();
    }

    std::vector<ResidualRow> rows(k);
    Accum integral, ierr;
    rows[0] = {trajectory[0].first, 0.0, 0.0};
    for (std::size_t i = 1; i < k; ++i) {
        double dt = trajectory[i].first - trajectory[i - 1].first;
        if (!(dt > 0.0)) throw std::invalid_argument("times not increasing");
        integral.add(0.5 * dt * (pair[i] + pair[i - 1]));
        ierr.add(0.5 * dt * (pair_se[i] + pair_se[i - 1]));
        double curv = 0.0;  // trapezoid bias estimate from a 3-point stencil
        if (i + 1 < k) curv = std::abs(pair[i + 1] - 2.0 * pair[i] +
                                       pair[i - 1]);
        else if (i >= 2) curv = std::abs(pair[i] - 2.0 * pair[i - 1] +
                                         pair[i - 2]);
        ierr.add(dt * curv / 12.0);
        rows[i].t = trajectory[i].first;
        rows[i].residual = lin[i] - lin[0] - integral.value();
        rows[i].uncertainty = lin_se[i] + lin_se[0] + ierr.value();
    }
    return rows;
}

}  // namespace boltz
