#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "boltz/ensemble.hpp"
#include "boltz/rng.hpp"
#include "boltz/vec.hpp"

namespace boltz {

// Initial datum families: sampling plus closed-form observables used as
// Monte Carlo oracles.
class InitialDatum {
  public:
    static InitialDatum gaussian(const Vec3& mean, const Mat3& covariance);
    static InitialDatum gaussian_iso(double sigma2, const Vec3& mean = {});
    static InitialDatum sphere_uniform(double radius = 1.0,
                                       const Vec3& center = {});
    static InitialDatum two_point(const Vec3& a, const Vec3& b,
                                  double p_a = 0.5);
    static InitialDatum point(const Vec3& v);  // δ_v
    static InitialDatum mixture(std::vector<InitialDatum> parts,
                                std::vector<double> weights);
    static InitialDatum from_ensemble(Ensemble e);

    Vec3 sample(Rng& rng) const;

    Vec3 mean_vec() const;
    double m2() const;
    Mat3 cov_raw() const;  // ∫ v_i v_j

    bool has_char_fn() const;
    std::complex<double> char_fn(const Vec3& xi) const;

    // Rotationally invariant law? Needed by the radial Fourier oracle.
    bool isotropic() const;
    double radial_char_fn(double r) const;

    Ensemble draw_ensemble(std::size_t n, std::uint64_t seed,
                           std::uint64_t task_id = 0) const;

  private:
    enum class Family { Gaussian, Sphere, TwoPoint, Point, Mixture, File };
    InitialDatum() = default;

    Family family_ = Family::Point;
    Vec3 mean_{}, a_{}, b_{};
    Mat3 cov_{}, chol_{};
    double radius_ = 1.0, pa_ = 0.5;
    std::vector<InitialDatum> parts_;
    std::vector<double> part_w_;
    std::shared_ptr<const Ensemble> file_;
    std::vector<double> file_cum_;
};

}  // namespace boltz
