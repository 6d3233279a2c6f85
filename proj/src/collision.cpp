#include "boltz/collision.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace boltz {

CollisionFrame orthobasis(const Vec3& u) {
    double n = u.norm();
    if (!(n > 0.0)) throw std::invalid_argument("orthobasis of zero vector");
    if (std::abs(n - 1.0) > 1e-9)
        throw std::invalid_argument("orthobasis needs a unit vector");
    // axis least aligned with u
    int k = 0;
    double best = std::abs(u.x);
    if (std::abs(u.y) < best) { k = 1; best = std::abs(u.y); }
    if (std::abs(u.z) < best) k = 2;
    Vec3 e{};
    e[k] = 1.0;
    Vec3 a = (e - u.dot(e) * u).normalized();
    Vec3 b = u.cross(a);  // a × b = u  <=>  b = u × a
    return {u, a, b};
}

std::pair<Vec3, Vec3> post_collision(const Vec3& v, const Vec3& w,
                                     double theta, double phi) {
    Vec3 d = w - v;
    double dn = d.norm();
    if (dn == 0.0) return {v, w};
    CollisionFrame f = orthobasis(d / dn);
    double sp = std::sin(phi), cp = std::cos(phi);
    Vec3 omega = std::cos(theta) * sp * f.a + std::sin(theta) * sp * f.b +
                 cp * f.u;
    double proj = d.dot(omega);
    return {v + proj * omega, w - proj * omega};
}

Vec3 sample_q(const VelocitySampler& draw_zeta, const VelocitySampler& draw_eta,
              const AngleSampler& angles, Rng& rng) {
    Vec3 v = draw_zeta(rng);
    Vec3 w = draw_eta(rng);
    double phi = angles.sample_phi(rng);
    double theta = rng.uniform(0.0, 2.0 * M_PI);
    return post_collision(v, w, theta, phi).first;
}

std::size_t sample_nu(double t, Rng& rng) {
    if (t <= 0.0) return 1;  // 0^0 := 1
    double q = -std::expm1(-t);  // 1 − e^{−t}
    double u = rng.uniform();
    if (u <= 0.0) u = 0x1.0p-53;
    // inverse CDF of the geometric law on {1, 2, ...}
    return 1 + std::size_t(std::floor(std::log(u) / std::log(q)));
}

namespace {

// Iterative evaluation of one Q_n draw; recursion depth is the sampled tree
// height, so an explicit stack keeps deep combs safe.
Vec3 eval_qn(std::size_t n, const VelocitySampler& draw_mu0,
             const AngleSampler& angles, Rng& rng, std::size_t leaf_cap) {
    struct Frame {
        std::size_t n;
        int stage = 0;
        Vec3 v{};
    };
    std::vector<Frame> stack;
    stack.push_back({n});
    Vec3 ret{};
    std::size_t leaves = 0;
    while (!stack.empty()) {
        Frame& f = stack.back();
        // f.n is reused for the pending right-child size once stage > 0, so
        // only a fresh frame of size 1 is a leaf
        if (f.n == 1 && f.stage == 0) {
            if (++leaves > leaf_cap)
                throw std::runtime_error("wild sampler exceeded leaf cap");
            ret = draw_mu0(rng);
            stack.pop_back();
            continue;
        }
        switch (f.stage) {
            case 0: {
                // uniform split index j in {1, ..., n−1}
                std::size_t j = 1 + rng.below(f.n - 1);
                f.stage = 1;
                std::size_t rest = f.n - j;
                f.n = rest;  // right child size, left pushed now
                stack.push_back({j});
                break;
            }
            case 1: {
                f.v = ret;
                f.stage = 2;
                stack.push_back({f.n});
                break;
            }
            case 2: {
                Vec3 w = ret;
                double phi = angles.sample_phi(rng);
                double theta = rng.uniform(0.0, 2.0 * M_PI);
                ret = post_collision(f.v, w, theta, phi).first;
                stack.pop_back();
                break;
            }
        }
    }
    return ret;
}

}  // namespace

Vec3 sample_wild(const VelocitySampler& draw_mu0, const AngleSampler& angles,
                 double t, Rng& rng, const WildConfig& cfg) {
    if (t < 0.0) throw std::invalid_argument("negative time");
    std::size_t nu = sample_nu(t, rng);
    if (nu > cfg.leaf_cap)
        throw std::runtime_error("wild sampler exceeded leaf cap");
    return eval_qn(nu, draw_mu0, angles, rng, cfg.leaf_cap);
}

namespace {

template <typename T, typename Psi>
T h_psi_impl(const Psi& psi, const Vec3& v, const Vec3& w,
             const AngleSampler& angles, int n_theta, int n_x) {
    Vec3 d = w - v;
    double dn = d.norm();
    if (dn == 0.0) return psi(v);
    CollisionFrame f = orthobasis(d / dn);
    auto xs = angles.beta_nodes(n_x);
    T acc{};
    for (int i = 0; i < n_theta; ++i) {
        double th = 2.0 * M_PI * (i + 0.5) / n_theta;
        Vec3 e = std::cos(th) * f.a + std::sin(th) * f.b;
        for (double x : xs) {
            double s = std::sqrt(std::max(0.0, 1.0 - x * x));
            for (double sign : {1.0, -1.0}) {
                Vec3 omega = sign * x * f.u + s * e;
                double proj = d.dot(omega);
                acc += psi(v + proj * omega);
            }
        }
    }
    return acc / double(2 * n_theta * n_x);
}

}  // namespace

double h_psi(const std::function<double(const Vec3&)>& psi, const Vec3& v,
             const Vec3& w, const AngleSampler& angles, int n_theta,
             int n_x) {
    return h_psi_impl<double>(psi, v, w, angles, n_theta, n_x);
}

std::complex<double> h_psi_complex(
    const std::function<std::complex<double>(const Vec3&)>& psi, const Vec3& v,
    const Vec3& w, const AngleSampler& angles, int n_theta, int n_x) {
    return h_psi_impl<std::complex<double>>(psi, v, w, angles, n_theta, n_x);
}

}  // namespace boltz
