#include "boltz/singular.hpp"

#include <cmath>
#include <stdexcept>

#include "boltz/accum.hpp"
#include "boltz/collision.hpp"
#include "boltz/quad.hpp"
#include "boltz/spectral.hpp"

namespace boltz {

std::vector<Vec3> default_probe_grid() {
    std::vector<Vec3> dirs;
    // canonical axes and diagonals
    dirs.push_back({1, 0, 0});
    dirs.push_back({0, 1, 0});
    dirs.push_back({0, 0, 1});
    dirs.push_back(Vec3{1, 1, 1}.normalized());
    dirs.push_back(Vec3{1, -1, 0}.normalized());
    dirs.push_back(Vec3{1, 0, -1}.normalized());
    dirs.push_back(Vec3{0, 1, -1}.normalized());
    dirs.push_back(Vec3{1, 1, -1}.normalized());
    dirs.push_back(Vec3{1, -1, 1}.normalized());
    dirs.push_back(Vec3{-1, 1, 1}.normalized());
    dirs.push_back(Vec3{1, 2, 3}.normalized());
    dirs.push_back(Vec3{3, 1, 2}.normalized());
    // icosahedron vertices (one of each antipodal pair)
    double p = 0.5 * (1.0 + std::sqrt(5.0));
    const double verts[6][3] = {{0, 1, p},  {0, 1, -p}, {1, p, 0},
                                {1, -p, 0}, {p, 0, 1},  {-p, 0, 1}};
    for (auto& v : verts) dirs.push_back(Vec3{v[0], v[1], v[2]}.normalized());
    dirs.push_back(Vec3{2, -1, 1}.normalized());
    dirs.push_back(Vec3{-1, 2, 1}.normalized());
    dirs.push_back(Vec3{1, 1, 2}.normalized());
    dirs.push_back(Vec3{2, 1, -2}.normalized());
    dirs.push_back(Vec3{1, 3, -1}.normalized());
    dirs.push_back(Vec3{3, -2, 1}.normalized());

    std::vector<Vec3> grid;
    for (double r : {0.25, 0.5, 1.0, 2.0})
        for (const Vec3& d : dirs) grid.push_back(d * r);
    return grid;
}

const ArkerydEntry& ArkerydReport::at(std::size_t level_idx,
                                      std::size_t time_idx,
                                      std::size_t probe_idx) const {
    return values[(level_idx * times.size() + time_idx) * probes.size() +
                  probe_idx];
}

ArkerydReport arkeryd_run(const Kernel& kernel, const InitialDatum& mu0,
                          const std::vector<int>& levels,
                          const std::vector<double>& t_grid,
                          const std::vector<Vec3>& probes,
                          std::size_t samples, std::uint64_t seed,
                          ArkerydMethod method) {
    if (levels.empty() || t_grid.empty() || probes.empty())
        throw std::invalid_argument("empty ladder configuration");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] <= levels[i - 1])
            throw std::invalid_argument("levels must increase");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (t_grid[i] < t_grid[i - 1])
            throw std::invalid_argument("times must be sorted");
    if (method == ArkerydMethod::Spectral && !mu0.isotropic())
        throw std::invalid_argument("spectral ladder needs isotropic datum");

    ArkerydReport rep;
    rep.levels = levels;
    rep.times = t_grid;
    rep.probes = probes;

    for (std::size_t li = 0; li < levels.size(); ++li) {
        TruncatedKernel tk = truncate(kernel, levels[li]);
        AngleSampler angles(tk.normalized);
        std::vector<double> internal(t_grid.size());
        for (std::size_t ti = 0; ti < t_grid.size(); ++ti)
            internal[ti] = tk.Bn * t_grid[ti];

        if (method == ArkerydMethod::Spectral) {
            double rmax = 0.0;
            for (const Vec3& xi : probes) rmax = std::max(rmax, xi.norm());
            RadialCharFn f0 = init_radial(
                [&](double r) { return mu0.radial_char_fn(r); },
                std::max(8.0, 2.0 * rmax), 256);
            auto traj = evolve(f0, angles, internal);
            for (std::size_t ti = 0; ti < t_grid.size(); ++ti)
                for (const Vec3& xi : probes)
                    rep.values.push_back({levels[li], tk.Bn, t_grid[ti], xi,
                                          traj[ti].phi(xi.norm()), 0.0});
        } else {
            auto draw = [&](Rng& r) { return mu0.sample(r); };
            for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
                std::vector<Vec3> pts(samples);
                for (std::size_t s = 0; s < samples; ++s) {
                    // task id depends on ti only: shared randomness couples
                    // the truncation levels, and t = 0 coincides exactly
                    Rng rng = Rng::derived(seed, 0x61726b00u + ti, s);
                    pts[s] = sample_wild(draw, angles, internal[ti], rng);
                }
                Ensemble e = Ensemble::from_points(std::move(pts));
                for (const Vec3& xi : probes) {
                    CharFnValue cv = e.char_fn(xi);
                    rep.values.push_back({levels[li], tk.Bn, t_grid[ti], xi,
                                          cv.value, cv.se});
                }
            }
        }
    }

    for (std::size_t li = 0; li + 1 < levels.size(); ++li) {
        ArkerydReport::Discrepancy d;
        d.level_lo = levels[li];
        d.level_hi = levels[li + 1];
        for (std::size_t ti = 0; ti < t_grid.size(); ++ti)
            for (std::size_t pi = 0; pi < probes.size(); ++pi) {
                const auto& a = rep.at(li, ti, pi);
                const auto& b = rep.at(li + 1, ti, pi);
                double diff = std::abs(a.phi - b.phi);
                if (diff > d.sup) {
                    d.sup = diff;
                    d.se = std::hypot(a.se, b.se);
                }
            }
        rep.discrepancies.push_back(d);
    }
    return rep;
}

CertSummary lipschitz_certificates(const ArkerydReport& report, double m2,
                                   double Bbar) {
    CertSummary s;
    std::size_t nl = report.levels.size();
    std::size_t nt = report.times.size();
    std::size_t np = report.probes.size();
    double sm2 = std::sqrt(m2);
    for (std::size_t li = 0; li < nl; ++li) {
        for (std::size_t ti = 0; ti < nt; ++ti)
            for (std::size_t p1 = 0; p1 < np; ++p1)
                for (std::size_t p2 = p1 + 1; p2 < np; ++p2) {
                    const auto& a = report.at(li, ti, p1);
                    const auto& b = report.at(li, ti, p2);
                    double lhs = std::abs(a.phi - b.phi);
                    double rhs = sm2 * (a.xi - b.xi).norm();
                    double slack = lhs - rhs - 8.0 * std::hypot(a.se, b.se);
                    ++s.checked_space;
                    s.worst_space = std::max(s.worst_space, slack);
                    if (slack > 0.0) {
                        ++s.failed_space;
                        s.failures.push_back({report.levels[li], a.t, b.t,
                                              a.xi, b.xi, lhs, rhs, slack});
                    }
                }
        for (std::size_t pi = 0; pi < np; ++pi)
            for (std::size_t t1 = 0; t1 < nt; ++t1)
                for (std::size_t t2 = t1 + 1; t2 < nt; ++t2) {
                    const auto& a = report.at(li, t1, pi);
                    const auto& b = report.at(li, t2, pi);
                    double lhs = std::abs(a.phi - b.phi);
                    double rhs = 1.5 * Bbar * m2 * a.xi.norm2() *
                                 std::abs(b.t - a.t);
                    double slack = lhs - rhs - 8.0 * std::hypot(a.se, b.se);
                    ++s.checked_time;
                    s.worst_time = std::max(s.worst_time, slack);
                    if (slack > 0.0) {
                        ++s.failed_time;
                        s.failures.push_back({report.levels[li], a.t, b.t,
                                              a.xi, b.xi, lhs, rhs, slack});
                    }
                }
    }
    return s;
}

CharSource char_source(const InitialDatum& datum) {
    if (!datum.has_char_fn())
        throw std::invalid_argument("datum has no closed-form transform");
    CharSource c;
    Vec3 mean = datum.mean_vec();
    c.m2 = datum.m2() - mean.norm2();
    c.hat = [datum, mean](const Vec3& xi) {
        return datum.char_fn(xi) *
               std::exp(std::complex<double>(0.0, -xi.dot(mean)));
    };
    return c;
}

CharSource char_source(const Ensemble& ensemble) {
    CharSource c;
    MomentSummary m = ensemble.moments();
    c.m2 = m.centered_energy;
    Vec3 mean = m.mean;
    c.hat = [ensemble, mean](const Vec3& xi) {
        return ensemble.char_fn(xi).value *
               std::exp(std::complex<double>(0.0, -xi.dot(mean)));
    };
    return c;
}

std::pair<double, double> morimoto_bound(const CharSource& chi,
                                         const AngleSampler& angles,
                                         const Vec3& xi, int n_theta,
                                         int n_x) {
    if (!(xi.norm2() > 0.0)) throw std::invalid_argument("xi must be nonzero");
    if (std::abs(angles.kernel().integral() - 1.0) > 1e-9)
        throw std::invalid_argument("bound requires a normalized kernel");
    Vec3 u = xi.normalized();
    CollisionFrame fr = orthobasis(u);
    std::vector<double> xs = angles.beta_nodes(n_x);
    std::complex<double> chixi = chi.hat(xi);

    // integrand is even under omega -> -omega (xi_- is quadratic in omega),
    // so the |x| nodes of the beta table cover the full sphere
    AccumC acc;
    for (int it = 0; it < n_theta; ++it) {
        double theta = 2.0 * M_PI * (it + 0.5) / n_theta;
        Vec3 e = fr.a * std::cos(theta) + fr.b * std::sin(theta);
        for (double x : xs) {
            Vec3 w = e * std::sqrt(std::max(0.0, 1.0 - x * x)) + u * x;
            Vec3 xim = w * xi.dot(w);
            acc.add(chi.hat(xi - xim) * chi.hat(xim) - chixi);
        }
    }
    double lhs = std::abs(acc.value()) / double(n_theta * xs.size());
    double rhs = 1.5 * angles.kernel().moment(2.0) * xi.norm2() * chi.m2;
    return {lhs, rhs};
}

double morimoto_divergence(double alpha, double eps, const Vec3& xi,
                           int n_theta, int n_x) {
    if (!(eps > 0.0) || eps > 1.0)
        throw std::invalid_argument("eps must lie in (0,1]");
    if (eps == 1.0) return 0.0;  // empty integration range
    if (!(alpha >= 2.0 && alpha < 3.0))
        throw std::invalid_argument("alpha must lie in [2,3)");
    if (!(xi.norm2() > 0.0)) throw std::invalid_argument("xi must be nonzero");
    Mat3 sigma{};
    sigma(1, 1) = 1.0;
    sigma(2, 2) = 1.0;
    sigma(1, 2) = 0.5;
    sigma(2, 1) = 0.5;
    auto hat = [&](const Vec3& eta) {
        return std::exp(-0.5 * eta.dot(sigma * eta));
    };

    Vec3 u = xi.normalized();
    CollisionFrame fr = orthobasis(u);
    double chixi = hat(xi);
    GaussLegendre gl(n_x);

    // x = e^y flattens the grazing singularity of |x|^{-alpha}
    double y0 = std::log(eps);
    Accum total;
    for (int it = 0; it < n_theta; ++it) {
        double theta = 2.0 * M_PI * (it + 0.5) / n_theta;
        Vec3 e = fr.a * std::cos(theta) + fr.b * std::sin(theta);
        double inner = gl.integrate(
            [&](double y) {
                double x = std::exp(y);
                Vec3 w =
                    e * std::sqrt(std::max(0.0, 1.0 - x * x)) + u * x;
                Vec3 xim = w * xi.dot(w);
                double bracket =
                    std::abs(hat(xi - xim) * hat(xim) - chixi);
                return bracket * std::pow(x, 1.0 - alpha);
            },
            y0, 0.0);
        total.add(inner);
    }
    return total.value() / double(n_theta);
}

}  // namespace boltz
