#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "boltz/rng.hpp"

namespace boltz {

enum class KernelFamily { Constant, PowerLaw, Tabulated };

// Angular collision kernel b on [-1, 1], even, nonnegative; only x >= 0 is
// represented. The effective kernel is min(b_raw, trunc_level) / norm, so a
// single object covers raw, truncated and normalized variants.
class Kernel {
  public:
    static Kernel constant(double value = 1.0);
    // b(x) = |x|^{-alpha}, 0 < alpha < 3 (very weak cutoff boundary).
    static Kernel power_law(double alpha);
    // Piecewise-linear table on [0, 1]; nodes sorted, first x = 0, last x = 1.
    static Kernel tabulated(std::vector<std::pair<double, double>> nodes);

    KernelFamily family() const { return family_; }
    double alpha() const { return alpha_; }
    int trunc_level() const { return trunc_level_; }
    double norm() const { return norm_; }

    // True iff the effective kernel is not integrable on [0,1].
    bool is_singular() const;

    // Effective kernel value at x in (0, 1]; may be +inf at 0.
    double b(double x) const;

    // ∫₀¹ x^p · b_eff(x) dx  (+inf when divergent). Closed form for
    // Constant/PowerLaw, adaptive quadrature for Tabulated.
    double moment(double p) const;
    double integral() const { return moment(0.0); }

    // ∫₀ˣ b_eff, x in [0,1]; requires integrable kernel.
    double partial_integral(double x) const;

    Kernel normalized() const;  // rejects singular kernels
    Kernel with_truncation(int level) const;

  private:
    Kernel() = default;
    double b_raw(double x) const;
    double raw_moment(double p, double upto) const;  // ∫₀^upto x^p min(b,n)

    KernelFamily family_ = KernelFamily::Constant;
    double value_ = 1.0;
    double alpha_ = 0.0;
    std::vector<std::pair<double, double>> nodes_;
    int trunc_level_ = 0;  // 0 = untruncated
    double norm_ = 1.0;
};

struct KernelSpec {
    KernelFamily family = KernelFamily::Constant;
    double value = 1.0;
    double alpha = 0.0;
    std::vector<std::pair<double, double>> nodes;
    bool normalize = false;
};

// Validates parameters and applies the requested normalization.
Kernel make_kernel(const KernelSpec& spec);

struct TruncatedKernel {
    Kernel base;         // untruncated kernel
    int level = 0;       // n
    double Bn = 0.0;     // ∫₀¹ (b ∧ n) dx
    Kernel normalized;   // (b ∧ n)/Bn, satisfies the unit normalization
};

// Signals std::domain_error below n0 (Bn = 0).
TruncatedKernel truncate(const Kernel& kernel, int n);

struct KernelMoments {
    double Bbar = 0.0;      // ∫₀¹ x² b dx, kernel as given
    double f1 = 0.0;        // (3/2)∫(sin⁴+cos⁴)dβ − 1/2
    double rate = 0.0;      // 1 − f1
    double lambda_b = 0.0;  // −(2/3)(1 − f1)
    double g2 = 0.0;        // 2∫ x²(1−x²) b̃ dx, b̃ the angular density
};

// For integrable kernels the angular density is b/∫b and the internal
// consistency rate = (3/2)·g2 is asserted; for singular kernels only the
// finite route g2 = 2∫x²(1−x²)b survives and f1 is derived from it.
KernelMoments kernel_moments(const Kernel& kernel);
KernelMoments kernel_moments(const TruncatedKernel& tk);

// Inverse-CDF sampler for the angular measure β(dφ) = ½ b(cosφ) sinφ dφ.
// Equivalently x = cosφ has density b(|x|)/(2∫₀¹b) on [-1,1]. Table-based:
// rejection collapses near the grazing singularity of truncated power laws.
class AngleSampler {
  public:
    explicit AngleSampler(const Kernel& kernel, int table_size = 4096);

    double sample_x(Rng& rng) const;    // cosφ in [-1, 1]
    double sample_phi(Rng& rng) const;  // φ in [0, π]

    // Quadrature nodes for E_{x~β}[f(|x|)]: |x| at CDF midpoints, equal
    // weights 1/nq. Read off the same table as the sampler.
    std::vector<double> beta_nodes(int nq) const;

    // Exact CDF of |x| on [0, 1].
    double cdf_abs(double x) const;

    const Kernel& kernel() const { return kernel_; }

  private:
    double invert(double u) const;  // F^{-1} on the table
    Kernel kernel_;
    double total_ = 0.0;
    std::vector<double> inv_;  // F^{-1}(i / N), i = 0..N
};

}  // namespace boltz
