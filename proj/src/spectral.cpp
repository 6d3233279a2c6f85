#include "boltz/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace boltz {

namespace {

// Shape-preserving endpoint slope (one-sided three-point with clipping).
double endpoint_slope(double h0, double h1, double d0, double d1) {
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0) return 0.0;
    if (d0 * d1 < 0.0 && std::abs(d) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return d;
}

}  // namespace

Pchip Pchip::fit(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("pchip needs >= 2 nodes");
    std::size_t n = xs.size();
    std::vector<double> h(n - 1), del(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = xs[i + 1] - xs[i];
        if (!(h[i] > 0.0)) throw std::invalid_argument("pchip grid not sorted");
        del[i] = (ys[i + 1] - ys[i]) / h[i];
    }
    Pchip p;
    p.d.resize(n);
    if (n == 2) {
        p.d[0] = p.d[1] = del[0];
    } else {
        p.d[0] = endpoint_slope(h[0], h[1], del[0], del[1]);
        p.d[n - 1] =
            endpoint_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (del[i - 1] * del[i] <= 0.0) {
                p.d[i] = 0.0;
            } else {
                double w1 = 2.0 * h[i] + h[i - 1];
                double w2 = h[i] + 2.0 * h[i - 1];
                p.d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
            }
        }
    }
    p.x = std::move(xs);
    p.y = std::move(ys);
    return p;
}

double Pchip::operator()(double t) const {
    if (t <= x.front()) return y.front();
    if (t >= x.back()) return y.back();
    std::size_t j =
        std::upper_bound(x.begin(), x.end(), t) - x.begin() - 1;
    double h = x[j + 1] - x[j];
    double s = (t - x[j]) / h;
    double s2 = s * s, s3 = s2 * s;
    double h00 = 2 * s3 - 3 * s2 + 1;
    double h10 = s3 - 2 * s2 + s;
    double h01 = -2 * s3 + 3 * s2;
    double h11 = s3 - s2;
    return h00 * y[j] + h10 * h * d[j] + h01 * y[j + 1] + h11 * h * d[j + 1];
}

// Interpolation runs in z = r^2. Characteristic functions of isotropic
// measures are even in r with a smooth maximum at 0, where the monotone
// slope limiter degrades to first order; in z the data is locally linear
// with slope -m2/6 and the fit keeps full accuracy at the origin.
double RadialCharFn::operator()(double rr) const { return interp_(rr * rr); }

void RadialCharFn::rebuild() {
    std::vector<double> z(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i] * r[i];
    interp_ = Pchip::fit(std::move(z), phi);
}

RadialCharFn init_radial(const std::function<double(double)>& phi0,
                         double rmax, int cells) {
    if (!(rmax > 0.0) || cells < 2)
        throw std::invalid_argument("bad radial grid");
    RadialCharFn f;
    f.r.resize(cells + 1);
    f.phi.resize(cells + 1);
    for (int k = 0; k <= cells; ++k) {
        f.r[k] = rmax * double(k) / double(cells);
        f.phi[k] = phi0(f.r[k]);
    }
    if (std::abs(f.phi[0] - 1.0) > 1e-12)
        throw std::invalid_argument("characteristic function must be 1 at 0");
    f.phi[0] = 1.0;
    f.rebuild();
    return f;
}

std::vector<double> bobylev_rhs(const RadialCharFn& phi,
                                const AngleSampler& angles, int nq) {
    std::vector<double> xs = angles.beta_nodes(nq);
    std::vector<double> out(phi.r.size());
    for (std::size_t k = 0; k < phi.r.size(); ++k) {
        double rk = phi.r[k];
        double gain = 0.0;
        for (double x : xs)
            gain += phi(rk * std::sqrt(std::max(0.0, 1.0 - x * x))) *
                    phi(rk * x);
        out[k] = gain / double(xs.size()) - phi.phi[k];
    }
    return out;
}

namespace {

// The quadrature arguments r_k*s_i and r_k*x_i never move between stages;
// cache their grid cell and local coordinate once and evaluate the Hermite
// basis directly against the current (y, d) arrays.
struct RhsPlan {
    struct Arg {
        std::size_t cell;
        double h00, h10, h01, h11;  // basis already scaled by the cell width
    };
    std::vector<Arg> args;  // 2*nq per node, node-major
    int nq;

    std::vector<double> z;  // interpolation runs in z = r^2

    RhsPlan(const std::vector<double>& grid, const std::vector<double>& xs) {
        nq = int(xs.size());
        z.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) z[i] = grid[i] * grid[i];
        args.reserve(grid.size() * xs.size() * 2);
        for (double zk : z)
            for (double x : xs) {
                push(z, zk * (1.0 - x * x));
                push(z, zk * x * x);
            }
    }

    void push(const std::vector<double>& grid, double t) {
        t = std::min(t, grid.back());
        std::size_t j =
            std::upper_bound(grid.begin(), grid.end(), t) - grid.begin();
        j = std::min(std::max<std::size_t>(j, 1), grid.size() - 1) - 1;
        double h = grid[j + 1] - grid[j];
        double s = (t - grid[j]) / h;
        double s2 = s * s, s3 = s2 * s;
        args.push_back({j, 2 * s3 - 3 * s2 + 1, (s3 - 2 * s2 + s) * h,
                        -2 * s3 + 3 * s2, (s3 - s2) * h});
    }

    void eval(const std::vector<double>& y, std::vector<double>& out) const {
        Pchip p = Pchip::fit(z, y);
        std::size_t a = 0;
        for (std::size_t k = 0; k < z.size(); ++k) {
            double gain = 0.0;
            for (int i = 0; i < nq; ++i) {
                double u = at(p, a++);
                double v = at(p, a++);
                gain += u * v;
            }
            out[k] = gain / double(nq) - y[k];
        }
    }

    double at(const Pchip& p, std::size_t i) const {
        const Arg& g = args[i];
        return g.h00 * p.y[g.cell] + g.h10 * p.d[g.cell] +
               g.h01 * p.y[g.cell + 1] + g.h11 * p.d[g.cell + 1];
    }
};

double curvature_at_zero(const std::vector<double>& r,
                         const std::vector<double>& phi) {
    double h = r[1] - r[0];
    return (phi[2] - 2.0 * phi[1] + phi[0]) / (h * h);
}

}  // namespace

std::vector<SpectralSnapshot> evolve(const RadialCharFn& phi0,
                                     const AngleSampler& angles,
                                     const std::vector<double>& out_times,
                                     double dt, int nq) {
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    for (std::size_t i = 1; i < out_times.size(); ++i)
        if (out_times[i] < out_times[i - 1])
            throw std::invalid_argument("output times must be sorted");
    if (!out_times.empty() && out_times.front() < 0.0)
        throw std::invalid_argument("negative output time");

    RhsPlan plan(phi0.r, angles.beta_nodes(nq));
    std::vector<double> y = phi0.phi;
    std::vector<double> k1(y.size()), k2(y.size()), k3(y.size()),
        k4(y.size()), tmp(y.size());
    double c0 = curvature_at_zero(phi0.r, y);

    std::vector<SpectralSnapshot> traj;
    double t = 0.0;
    auto snapshot = [&](double at) {
        SpectralSnapshot s;
        s.t = at;
        s.phi.r = phi0.r;
        s.phi.phi = y;
        s.phi.rebuild();
        traj.push_back(std::move(s));
    };
    auto check = [&]() {
        if (std::abs(y[0] - 1.0) > 1e-12)
            throw std::runtime_error("phi(0) drifted from 1");
        for (double v : y)
            if (!(std::abs(v) <= 1.0 + 1e-6))
                throw std::runtime_error(
                    "characteristic function bound violated (step too "
                    "large)");
        double c = curvature_at_zero(phi0.r, y);
        if (std::abs(c - c0) > std::max(0.01 * std::abs(c0), 1e-9))
            throw std::runtime_error("second moment drifted (step too large)");
    };

    for (double target : out_times) {
        double span = target - t;
        if (span > 0.0) {
            int steps = int(std::ceil(span / dt - 1e-12));
            double h = span / double(steps);
            for (int s = 0; s < steps; ++s) {
                plan.eval(y, k1);
                for (std::size_t i = 0; i < y.size(); ++i)
                    tmp[i] = y[i] + 0.5 * h * k1[i];
                plan.eval(tmp, k2);
                for (std::size_t i = 0; i < y.size(); ++i)
                    tmp[i] = y[i] + 0.5 * h * k2[i];
                plan.eval(tmp, k3);
                for (std::size_t i = 0; i < y.size(); ++i)
                    tmp[i] = y[i] + h * k3[i];
                plan.eval(tmp, k4);
                for (std::size_t i = 0; i < y.size(); ++i)
                    y[i] += h / 6.0 *
                            (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t = target;
        }
        check();
        snapshot(target);
    }
    return traj;
}

}  // namespace boltz
