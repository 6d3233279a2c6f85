#include "boltz/mckean.hpp"

#include <cmath>
#include <stdexcept>

#include "boltz/accum.hpp"
#include "boltz/collision.hpp"

namespace boltz {

Mat3 rotation_Ml(double phi, double theta) {
    double cp = std::cos(phi), sp = std::sin(phi);
    double ct = std::cos(theta), st = std::sin(theta);
    Mat3 m;
    m.m = {-ct * cp, st,  ct * sp,
           -st * cp, -ct, st * sp,
           sp,       0.0, cp};
    return m;
}

Mat3 rotation_Mr(double phi, double theta) {
    double cp = std::cos(phi), sp = std::sin(phi);
    double ct = std::cos(theta), st = std::sin(theta);
    Mat3 m;
    m.m = {st,  ct * sp, -ct * cp,
           -ct, st * sp, -st * cp,
           0.0, cp,      sp};
    return m;
}

Mat3 section_B(const Vec3& u) {
    double n = u.norm();
    if (!(n > 0.0)) throw std::invalid_argument("section_B of zero vector");
    Vec3 uu = u / n;
    const Vec3 e3{0.0, 0.0, 1.0};
    Vec3 axis = e3.cross(uu);
    double s = axis.norm();
    double c = uu.z;
    if (s < 1e-14) {
        if (c > 0.0) return Mat3::identity();
        Mat3 m;  // rotation by π about e₁
        m.m = {1, 0, 0, 0, -1, 0, 0, 0, -1};
        return m;
    }
    Vec3 k = axis / s;
    Mat3 K;
    K.m = {0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0};
    Mat3 r = Mat3::identity();
    Mat3 K2 = K * K;
    for (int i = 0; i < 9; ++i) r.m[i] += s * K.m[i] + (1.0 - c) * K2.m[i];
    return r;
}

namespace {

void compute_leaf_counts(McKeanTree& tree) {
    // post-order over the index array; children always have larger indices
    for (int i = int(tree.nodes.size()) - 1; i >= 0; --i) {
        auto& nd = tree.nodes[i];
        if (nd.left >= 0)
            nd.leaves =
                tree.nodes[nd.left].leaves + tree.nodes[nd.right].leaves;
        else
            nd.leaves = 1;
    }
}

// Angle block convention: a node with n leaves owns n−1 angle slots
// [offset, offset+n−1); its own slot is the last one, the left subtree gets
// the first n_l−1, the right subtree the following n_r−1.
void assign_angle_indices(McKeanTree& tree) {
    struct Item {
        int node, offset;
    };
    std::vector<Item> stack{{tree.root, 0}};
    while (!stack.empty()) {
        auto [ni, off] = stack.back();
        stack.pop_back();
        auto& nd = tree.nodes[ni];
        if (nd.left < 0) continue;
        nd.angle = off + nd.leaves - 2;
        int nl = tree.nodes[nd.left].leaves;
        stack.push_back({nd.left, off});
        stack.push_back({nd.right, off + nl - 1});
    }
}

}  // namespace

TreeSample sample_tree(double t, const AngleSampler& angles, Rng& rng) {
    if (t < 0.0) throw std::invalid_argument("negative time");
    TreeSample s;
    s.t = t;
    s.nu = int(sample_nu(t, rng));
    s.tree.nodes.resize(1);
    std::vector<int> leaves{0};
    for (int k = 1; k < s.nu; ++k) {
        std::size_t pick = rng.below(leaves.size());
        int ni = leaves[pick];
        int l = int(s.tree.nodes.size());
        s.tree.nodes.push_back({});
        s.tree.nodes.push_back({});
        s.tree.nodes[ni].left = l;
        s.tree.nodes[ni].right = l + 1;
        leaves[pick] = l;
        leaves.push_back(l + 1);
    }
    compute_leaf_counts(s.tree);
    assign_angle_indices(s.tree);
    s.phi.resize(s.nu - 1);
    s.theta.resize(s.nu - 1);
    for (int i = 0; i < s.nu - 1; ++i) {
        s.phi[i] = angles.sample_phi(rng);
        s.theta[i] = rng.uniform(0.0, 2.0 * M_PI);
    }
    return s;
}

void attach_velocities(TreeSample& sample, const InitialDatum& mu0, Rng& rng) {
    sample.V.resize(sample.nu);
    for (int j = 0; j < sample.nu; ++j) sample.V[j] = mu0.sample(rng);
}

namespace {

// One DFS computing the leaf-path products; fills any subset of outputs.
void traverse(const TreeSample& s, std::vector<double>* pi,
              std::vector<double>* zeta, std::vector<Mat3>* O) {
    struct Item {
        int node;
        double pi, zeta;
        Mat3 o;
    };
    if (pi) pi->clear();
    if (zeta) zeta->clear();
    if (O) O->clear();
    std::vector<Item> stack{{s.tree.root, 1.0, 1.0, Mat3::identity()}};
    while (!stack.empty()) {
        Item it = stack.back();
        stack.pop_back();
        const auto& nd = s.tree.nodes[it.node];
        if (nd.left < 0) {
            if (pi) pi->push_back(it.pi);
            if (zeta) zeta->push_back(it.zeta);
            if (O) O->push_back(it.o);
            continue;
        }
        double c = std::cos(s.phi[nd.angle]);
        double sn = std::sin(s.phi[nd.angle]);
        Item l{nd.left, it.pi * c, it.zeta * (1.5 * c * c - 0.5), it.o};
        Item r{nd.right, it.pi * sn, it.zeta * (1.5 * sn * sn - 0.5), it.o};
        if (O) {
            l.o = it.o * rotation_Ml(s.phi[nd.angle], s.theta[nd.angle]);
            r.o = it.o * rotation_Mr(s.phi[nd.angle], s.theta[nd.angle]);
        }
        // push right first so leaves pop out left-to-right
        stack.push_back(r);
        stack.push_back(l);
    }
}

}  // namespace

WeightVector pi_weights(const TreeSample& sample) {
    if (int(sample.phi.size()) != sample.nu - 1)
        throw std::invalid_argument("angles missing");
    WeightVector w;
    traverse(sample, &w.pi, &w.zeta, nullptr);
    Accum s2;
    for (double p : w.pi) s2.add(p * p);
    if (std::abs(s2.value() - 1.0) > 1e-12 * std::max(1.0, double(sample.nu)))
        throw std::runtime_error("π weight normalization lost");
    return w;
}

std::vector<Mat3> o_matrices(const TreeSample& sample) {
    if (int(sample.phi.size()) != sample.nu - 1)
        throw std::invalid_argument("angles missing");
    std::vector<Mat3> o;
    traverse(sample, nullptr, nullptr, &o);
    return o;
}

double sample_S(const TreeSample& sample, const Vec3& u) {
    if (int(sample.V.size()) != sample.nu)
        throw std::invalid_argument("velocities missing");
    std::vector<double> pi;
    std::vector<Mat3> o;
    traverse(sample, &pi, nullptr, &o);
    Mat3 bu = section_B(u);
    Accum s;
    for (int j = 0; j < sample.nu; ++j) {
        Vec3 psi = bu * o[j].col(2);
        s.add(pi[j] * psi.dot(sample.V[j]));
    }
    return s.value();
}

McKeanEstimate estimate_charfn(double t, double rho, const Vec3& u,
                               const InitialDatum& mu0,
                               const AngleSampler& angles, std::size_t m,
                               std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("need at least one sample");
    MeanSeC acc;
    for (std::size_t i = 0; i < m; ++i) {
        Rng rng = Rng::derived(seed, /*task=*/0x6d636b31u, i);
        TreeSample ts = sample_tree(t, angles, rng);
        attach_velocities(ts, mu0, rng);
        double s = sample_S(ts, u);
        acc.add({std::cos(rho * s), std::sin(rho * s)});
    }
    return {acc.mean(), acc.se()};
}

ScalarEstimate second_moment_weight(double t, const AngleSampler& angles,
                                    std::size_t m, std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("need at least one sample");
    MeanSe acc;
    for (std::size_t i = 0; i < m; ++i) {
        Rng rng = Rng::derived(seed, /*task=*/0x6d636b32u, i);
        TreeSample ts = sample_tree(t, angles, rng);
        WeightVector w = pi_weights(ts);
        Accum s;
        for (int j = 0; j < ts.nu; ++j) s.add(w.pi[j] * w.pi[j] * w.zeta[j]);
        acc.add(s.value());
    }
    return {acc.mean(), acc.se()};
}

}  // namespace boltz
