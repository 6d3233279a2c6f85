#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "boltz/datum.hpp"
#include "boltz/kernel.hpp"
#include "boltz/rng.hpp"
#include "boltz/vec.hpp"

namespace boltz {

// Index-based binary tree; germination appends two nodes to a chosen leaf.
struct McKeanTree {
    struct Node {
        int left = -1, right = -1;  // -1 = leaf
        int leaves = 1;
        int angle = -1;  // index into the angle arrays, internal nodes only
    };
    std::vector<Node> nodes;
    int root = 0;
    int leaf_count() const { return nodes.empty() ? 0 : nodes[root].leaves; }
};

struct TreeSample {
    double t = 0.0;
    int nu = 1;
    McKeanTree tree;
    std::vector<double> phi;    // ν−1 draws from β
    std::vector<double> theta;  // ν−1 uniform draws on (0, 2π)
    std::vector<Vec3> V;        // ν draws from μ₀ (leaf order)
};

struct WeightVector {
    std::vector<double> pi;    // Σ π² = 1
    std::vector<double> zeta;  // second-moment weights
};

Mat3 rotation_Ml(double phi, double theta);
Mat3 rotation_Mr(double phi, double theta);

// Deterministic section of SO(3) with B(u)·e₃ = u. Rodrigues rotation about
// e₃ × u; the antipode u = −e₃ maps to diag(1, −1, −1) by convention.
Mat3 section_B(const Vec3& u);

// Tree + angles only; velocities attach separately.
TreeSample sample_tree(double t, const AngleSampler& angles, Rng& rng);
void attach_velocities(TreeSample& sample, const InitialDatum& mu0, Rng& rng);

WeightVector pi_weights(const TreeSample& sample);
std::vector<Mat3> o_matrices(const TreeSample& sample);

// S(u) = Σ_j π_j ψ_j(u)·V_j with ψ_j(u) = B(u) O_j e₃.
double sample_S(const TreeSample& sample, const Vec3& u);

struct McKeanEstimate {
    std::complex<double> value;
    double se = 0.0;
};

// Monte Carlo estimator of the solution's characteristic function at ρu.
McKeanEstimate estimate_charfn(double t, double rho, const Vec3& u,
                               const InitialDatum& mu0,
                               const AngleSampler& angles, std::size_t m,
                               std::uint64_t seed);

struct ScalarEstimate {
    double value = 0.0;
    double se = 0.0;
};

// Monte Carlo mean of Σ_j π_j² ζ_j; expectation is e^{−(1−f₁(b)) t}.
ScalarEstimate second_moment_weight(double t, const AngleSampler& angles,
                                    std::size_t m, std::uint64_t seed);

}  // namespace boltz
