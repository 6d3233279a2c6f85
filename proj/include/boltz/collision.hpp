#pragma once

#include <complex>
#include <functional>
#include <utility>

#include "boltz/kernel.hpp"
#include "boltz/rng.hpp"
#include "boltz/vec.hpp"

namespace boltz {

struct CollisionFrame {
    Vec3 u, a, b;  // {a, b, u} orthonormal, right-handed (a × b = u)
};

// Deterministic completion: pick the coordinate axis least aligned with u,
// orthogonalize, close right-handed.
CollisionFrame orthobasis(const Vec3& u);

// ω-representation: ω = cosθ sinφ a(u) + sinθ sinφ b(u) + cosφ u,
// v* = v + [(w−v)·ω]ω, w* = w − [(w−v)·ω]ω. v = w is the identity.
std::pair<Vec3, Vec3> post_collision(const Vec3& v, const Vec3& w,
                                     double theta, double phi);

using VelocitySampler = std::function<Vec3(Rng&)>;

// One draw from the gain operator Q[ζ, η].
Vec3 sample_q(const VelocitySampler& draw_zeta, const VelocitySampler& draw_eta,
              const AngleSampler& angles, Rng& rng);

struct WildConfig {
    std::size_t leaf_cap = 1'000'000;  // guards pathological seeds
};

// One draw from the Wild sum at time t: ν geometric, Q_ν by uniform splits.
Vec3 sample_wild(const VelocitySampler& draw_mu0, const AngleSampler& angles,
                 double t, Rng& rng, const WildConfig& cfg = {});

// P[ν = n] = e^{−t}(1 − e^{−t})^{n−1}
std::size_t sample_nu(double t, Rng& rng);

// H_ψ(v, w) = ∫_{S²} ψ(v*) b(u·ω) du_{S²} by product quadrature over
// (θ uniform, x = cosφ ~ β); ψ(v) exactly at v = w.
double h_psi(const std::function<double(const Vec3&)>& psi, const Vec3& v,
             const Vec3& w, const AngleSampler& angles, int n_theta = 64,
             int n_x = 128);
std::complex<double> h_psi_complex(
    const std::function<std::complex<double>(const Vec3&)>& psi, const Vec3& v,
    const Vec3& w, const AngleSampler& angles, int n_theta = 64,
    int n_x = 128);

}  // namespace boltz
