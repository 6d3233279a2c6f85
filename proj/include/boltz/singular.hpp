#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "boltz/datum.hpp"
#include "boltz/ensemble.hpp"
#include "boltz/kernel.hpp"
#include "boltz/vec.hpp"

namespace boltz {

// 24 directions (icosahedral vertices + canonical axes) times radii
// {0.25, 0.5, 1, 2}.
std::vector<Vec3> default_probe_grid();

enum class ArkerydMethod { Wild, Spectral };

struct ArkerydEntry {
    int level = 0;
    double Bn = 0.0;
    double t = 0.0;  // physical time; internal solver time is Bn * t
    Vec3 xi;
    std::complex<double> phi;
    double se = 0.0;
};

struct ArkerydReport {
    std::vector<int> levels;
    std::vector<double> times;
    std::vector<Vec3> probes;
    std::vector<ArkerydEntry> values;  // level-major, then time, then probe
    // sup over (t, xi) of |phi_n - phi_m| for consecutive levels (n, m),
    // with the worst-case combined SE alongside
    struct Discrepancy {
        int level_lo = 0, level_hi = 0;
        double sup = 0.0;
        double se = 0.0;
    };
    std::vector<Discrepancy> discrepancies;

    const ArkerydEntry& at(std::size_t level_idx, std::size_t time_idx,
                           std::size_t probe_idx) const;
};

// Solve with kernel (b ^ n)/B_n at internal times B_n * t per level and
// record the characteristic function on the probe grid. The spectral method
// requires an isotropic datum; the particle method works for any datum but
// its cost grows like exp(B_n * t).
ArkerydReport arkeryd_run(const Kernel& kernel, const InitialDatum& mu0,
                          const std::vector<int>& levels,
                          const std::vector<double>& t_grid,
                          const std::vector<Vec3>& probes,
                          std::size_t samples, std::uint64_t seed,
                          ArkerydMethod method);

struct CertRow {
    int level = 0;
    double t1 = 0.0, t2 = 0.0;
    Vec3 xi1, xi2;
    double lhs = 0.0, rhs = 0.0, slack = 0.0;  // slack = lhs - rhs - 8 SE
};

struct CertSummary {
    std::size_t checked_space = 0, failed_space = 0;
    std::size_t checked_time = 0, failed_time = 0;
    double worst_space = -1e300;  // max slack over space rows
    double worst_time = -1e300;
    std::vector<CertRow> failures;
    bool all_pass() const { return failed_space == 0 && failed_time == 0; }
};

// Space certificate: |phi(xi2) - phi(xi1)| <= sqrt(m2) |xi2 - xi1| + 8 SE.
// Time certificate:  |phi(xi, t2) - phi(xi, t1)|
//                      <= (3/2) Bbar m2 |xi|^2 |t2 - t1| + 8 SE,
// Bbar the x^2-moment of the untruncated kernel (it dominates every level).
CertSummary lipschitz_certificates(const ArkerydReport& report, double m2,
                                   double Bbar);

// Characteristic function with the centering phase pulled out; the spherical
// bound is stated for zero-mean measures and the phase replacement costs no
// generality.
struct CharSource {
    std::function<std::complex<double>(const Vec3&)> hat;  // centered
    double m2 = 0.0;  // centered second moment
};

CharSource char_source(const InitialDatum& datum);
CharSource char_source(const Ensemble& ensemble);

// lhs = |int_{S^2} [chi_hat(xi_+) chi_hat(xi_-) - chi_hat(xi)] b dS^2|,
// rhs = (3/2) Bbar |xi|^2 m2; xi_+ = xi - (xi.w)w, xi_- = (xi.w)w.
// Normalized integrable kernels only.
std::pair<double, double> morimoto_bound(const CharSource& chi,
                                         const AngleSampler& angles,
                                         const Vec3& xi, int n_theta = 64,
                                         int n_x = 256);

// Counterexample integral: same integrand with the absolute value inside,
// gamma(x) = |x|^{-alpha} kernel restricted to |cos angle| >= eps, chi the
// fixed anisotropic Gaussian (v22 = v33 = 1, v23 = 1/2). Diverges as
// eps -> 0 for alpha >= 2. xi must not be an eigenvector of the covariance
// (the grazing term is linear in sigma xi - (xi . sigma xi) xi / |xi|^2 and
// cancels on eigenvectors), hence the skew default.
double morimoto_divergence(double alpha, double eps,
                           const Vec3& xi = {0.0, 1.0, 0.0}, int n_theta = 64,
                           int n_x = 400);

}  // namespace boltz
