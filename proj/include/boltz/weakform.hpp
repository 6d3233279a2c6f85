#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "boltz/ensemble.hpp"
#include "boltz/kernel.hpp"
#include "boltz/vec.hpp"

namespace boltz {

// Twice differentiable test function with certified sup bounds on the value,
// gradient and Hessian (operator norm bounded by the Frobenius bound used
// here).
struct TestFunction {
    std::function<double(const Vec3&)> value;
    std::function<Vec3(const Vec3&)> gradient;
    std::function<Mat3(const Vec3&)> hessian;
    double sup_value = 0.0;
    double sup_gradient = 0.0;
    double sup_hessian = 0.0;

    static TestFunction cosine(const Vec3& xi0);  // cos(xi0 . v)
    static TestFunction sine(const Vec3& xi0);    // sin(xi0 . v)
    // exp(1 - 1/(1 - |v-c|^2/R^2)) inside the ball, 0 outside
    static TestFunction bump(const Vec3& center, double radius);
};

// Squared first and plain second derivative norms of the post-collision
// curve x -> v*(x) at |w - v| = d:
//   first_sq = d^2 [ (1-2x^2)^2/(1-x^2) + 4x^2 ]
//   second   = d   [ (-3x+2x^3)^2/(1-x^2)^3 + 4 ]^{1/2}
std::pair<double, double> derivative_norms(double d, double x);

struct SupCheck {
    double max_first = 0.0;   // max over grid of (1-s) * first bracket
    double max_second = 0.0;  // max over grid of second / per-s envelope
    bool pass_first = false;  // against 14
    bool pass_second = false; // against 2*sqrt(13)/sqrt(1-s) + 2
};

SupCheck villani_sup_check(const std::vector<double>& s_grid,
                           const std::vector<double>& xi_grid);

// Taylor-remainder collision integrand,
//   A_psi(v,w,xi) = 1/(8 pi) int_0^{2pi} int_0^1 1{v != w} (1-s) [
//       grad psi(v*(s xi)) . v*''(s xi) + grad psi(w*(s xi)) . w*''(s xi)
//     + v*'^T Hess psi(v*) v*' + w*'^T Hess psi(w*) w*' ] ds dtheta.
// The s integral runs through s = 1 - u^2 so the (1-s)^{1/2} endpoint
// structure of the integrand becomes polynomial.
double a_psi(const TestFunction& psi, const Vec3& v, const Vec3& w, double xi,
             int n_theta = 32, int n_s = 32);

// |A_psi| <= K_psi (1 + |v-w|^2) with K_psi from the certified bounds.
double k_psi(const TestFunction& psi);

// int_{-1}^{1} A_psi(v,w,xi) xi^2 b(xi) dxi by Gauss quadrature (bounded
// effective kernels only).
double a_psi_xi_integral(const TestFunction& psi, const Vec3& v, const Vec3& w,
                         const Kernel& kernel, int n_xi = 96, int n_theta = 32,
                         int n_s = 32);

// (1/2) int_{S^2} [psi(v*) + psi(w*) - psi(v) - psi(w)] b dS^2 for a
// normalized kernel; equals the xi integral above (Taylor identity).
double collision_average(const TestFunction& psi, const Vec3& v, const Vec3& w,
                         const AngleSampler& angles, int n_theta = 16,
                         int n_x = 64);

struct ResidualRow {
    double t = 0.0;
    double residual = 0.0;
    double uncertainty = 0.0;  // MC + time-step estimate, combined
};

struct WeakformConfig {
    std::size_t pair_budget = 20'000;  // sampled (v,w) pairs per snapshot
    int n_theta = 16;
    int n_x = 64;
    std::uint64_t seed = 0;
};

// residual(t) = int psi d mu_t - int psi d mu_0
//             - int_0^t E_{mu_tau x mu_tau}[collision_average] d tau,
// time integral by the trapezoid rule over the snapshots, pair expectation
// by subsampled U-statistics. Requires a normalized kernel and t=0 first.
std::vector<ResidualRow> weak_residual(
    const std::vector<std::pair<double, Ensemble>>& trajectory,
    const TestFunction& psi, const AngleSampler& angles,
    const WeakformConfig& cfg = {});

}  // namespace boltz
