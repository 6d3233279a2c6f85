#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include "boltz/vec.hpp"

namespace boltz {

struct MomentSummary {
    Vec3 mean;
    double m2 = 0.0;          // ∫|v|²
    Mat3 cov_raw;             // ∫ v_i v_j
    double centered_energy = 0.0;  // ∫|v − mean|² = m2 − |mean|²
};

struct CharFnValue {
    std::complex<double> value;
    double se = 0.0;
};

// Weighted empirical probability measure on R³.
class Ensemble {
  public:
    Ensemble() = default;

    // Weights normalized to sum 1; missing weights mean uniform 1/N.
    static Ensemble from_points(std::vector<Vec3> points,
                                std::vector<double> weights = {},
                                std::string label = {});

    std::size_t size() const { return points_.size(); }
    const std::vector<Vec3>& points() const { return points_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::string& label() const { return label_; }

    MomentSummary moments() const;

    // Σ w_j e^{iξ·v_j} with the weighted standard error of the estimator.
    CharFnValue char_fn(const Vec3& xi) const;

    // Σ_{|v_j| >= R} w_j |v_j|²
    double tail_energy(double R) const;

    void write_csv(std::ostream& os) const;          // vx,vy,vz,w
    static Ensemble read_csv(std::istream& is, std::string label = {});
    void save_csv(const std::string& path) const;
    static Ensemble load_csv(const std::string& path);

  private:
    std::vector<Vec3> points_;
    std::vector<double> weights_;
    std::string label_;
};

}  // namespace boltz
