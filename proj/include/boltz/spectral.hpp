#pragma once

#include <functional>
#include <vector>

#include "boltz/kernel.hpp"

namespace boltz {

// Fritsch-Carlson monotone cubic interpolant. Monotone data stay monotone
// between nodes, so |phi| never overshoots 1.
struct Pchip {
    std::vector<double> x, y, d;

    static Pchip fit(std::vector<double> xs, std::vector<double> ys);
    double operator()(double t) const;  // clamped to [x.front(), x.back()]
};

// Radial characteristic function of an isotropic measure, real by symmetry,
// sampled on a uniform grid r_0 = 0 < ... < r_K = rmax.
struct RadialCharFn {
    std::vector<double> r;
    std::vector<double> phi;

    double rmax() const { return r.back(); }
    double operator()(double rr) const;  // monotone-cubic interpolation

    // Call after mutating phi in place.
    void rebuild();

  private:
    Pchip interp_;
};

RadialCharFn init_radial(const std::function<double(double)>& phi0,
                         double rmax = 8.0, int cells = 256);

// d(phi)/dt per grid node under the Fourier-side collision operator for a
// normalized integrable kernel:
//   rhs(r) = E_{x~beta}[ phi(r sqrt(1-x^2)) phi(r|x|) ] - phi(r).
std::vector<double> bobylev_rhs(const RadialCharFn& phi,
                                const AngleSampler& angles, int nq = 128);

struct SpectralSnapshot {
    double t = 0.0;
    RadialCharFn phi;
};

// Classic 4th-order explicit stepping; snapshots at the requested times.
// Throws std::runtime_error when |phi| escapes 1 + 1e-6 or the curvature of
// phi at 0 (the second moment, up to sign) drifts by more than 1% (step too
// large or inconsistent input).
std::vector<SpectralSnapshot> evolve(const RadialCharFn& phi0,
                                     const AngleSampler& angles,
                                     const std::vector<double>& out_times,
                                     double dt = 0.01, int nq = 128);

}  // namespace boltz
