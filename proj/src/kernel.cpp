#include "boltz/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "boltz/quad.hpp"

namespace boltz {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Kernel Kernel::constant(double value) {
    if (!(value > 0.0) || !std::isfinite(value))
        throw std::invalid_argument("constant kernel value must be positive");
    Kernel k;
    k.family_ = KernelFamily::Constant;
    k.value_ = value;
    return k;
}

Kernel Kernel::power_law(double alpha) {
    if (!(alpha > 0.0) || !(alpha < 3.0))
        throw std::invalid_argument(
            "power-law exponent must satisfy 0 < alpha < 3 (very weak "
            "cutoff requires ∫x²b < ∞)");
    Kernel k;
    k.family_ = KernelFamily::PowerLaw;
    k.alpha_ = alpha;
    return k;
}

Kernel Kernel::tabulated(std::vector<std::pair<double, double>> nodes) {
    if (nodes.size() < 2)
        throw std::invalid_argument("tabulated kernel needs >= 2 nodes");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!(nodes[i].second >= 0.0) || !std::isfinite(nodes[i].second))
            throw std::invalid_argument("tabulated kernel values must be >= 0");
        if (i > 0 && !(nodes[i].first > nodes[i - 1].first))
            throw std::invalid_argument("tabulated nodes must be sorted in x");
    }
    if (nodes.front().first != 0.0 || nodes.back().first != 1.0)
        throw std::invalid_argument("tabulated nodes must span [0, 1]");
    Kernel k;
    k.family_ = KernelFamily::Tabulated;
    k.nodes_ = std::move(nodes);
    return k;
}

bool Kernel::is_singular() const {
    if (trunc_level_ > 0) return false;
    switch (family_) {
        case KernelFamily::Constant: return false;
        case KernelFamily::PowerLaw: return alpha_ >= 1.0;
        case KernelFamily::Tabulated: return false;
    }
    return false;
}

double Kernel::b_raw(double x) const {
    switch (family_) {
        case KernelFamily::Constant: return value_;
        case KernelFamily::PowerLaw:
            return x > 0.0 ? std::pow(x, -alpha_) : kInf;
        case KernelFamily::Tabulated: {
            auto it = std::upper_bound(
                nodes_.begin(), nodes_.end(), x,
                [](double v, const auto& n) { return v < n.first; });
            if (it == nodes_.begin()) return nodes_.front().second;
            if (it == nodes_.end()) return nodes_.back().second;
            auto lo = *(it - 1), hi = *it;
            double t = (x - lo.first) / (hi.first - lo.first);
            return lo.second + t * (hi.second - lo.second);
        }
    }
    return 0.0;
}

double Kernel::b(double x) const {
    double v = b_raw(x);
    if (trunc_level_ > 0) v = std::min(v, double(trunc_level_));
    return v / norm_;
}

double Kernel::raw_moment(double p, double upto) const {
    const double n = trunc_level_ > 0 ? double(trunc_level_) : kInf;
    switch (family_) {
        case KernelFamily::Constant: {
            double c = std::min(value_, n);
            return c * std::pow(upto, p + 1.0) / (p + 1.0);
        }
        case KernelFamily::PowerLaw: {
            // min(x^{-a}, n) switches at x_n = n^{-1/a}
            double xn = std::isfinite(n) ? std::pow(n, -1.0 / alpha_) : 0.0;
            double lo = std::min(upto, xn);
            double res = std::isfinite(n)
                             ? n * std::pow(lo, p + 1.0) / (p + 1.0)
                             : 0.0;
            if (upto > xn) {
                double e = p + 1.0 - alpha_;
                if (e > 0.0)
                    res += (std::pow(upto, e) - std::pow(xn, e)) / e;
                else if (e == 0.0)
                    res += xn > 0.0 ? std::log(upto / xn) : kInf;
                else
                    res += xn > 0.0
                               ? (std::pow(upto, e) - std::pow(xn, e)) / e
                               : kInf;
            }
            return res;
        }
        case KernelFamily::Tabulated: {
            auto f = [&](double x) {
                return std::pow(x, p) * std::min(b_raw(x), n);
            };
            return adaptive_simpson(f, 0.0, upto, 1e-13).value;
        }
    }
    return 0.0;
}

double Kernel::moment(double p) const { return raw_moment(p, 1.0) / norm_; }

double Kernel::partial_integral(double x) const {
    if (is_singular())
        throw std::domain_error("partial_integral needs an integrable kernel");
    return raw_moment(0.0, std::clamp(x, 0.0, 1.0)) / norm_;
}

Kernel Kernel::normalized() const {
    if (is_singular())
        throw std::domain_error("cannot normalize a singular kernel");
    double total = moment(0.0);
    if (!(total > 0.0))
        throw std::domain_error("kernel vanishes a.e., nothing to normalize");
    Kernel k = *this;
    k.norm_ *= total;
    return k;
}

Kernel Kernel::with_truncation(int level) const {
    if (level < 1) throw std::invalid_argument("truncation level must be >= 1");
    Kernel k = *this;
    k.trunc_level_ = level;
    k.norm_ = 1.0;
    return k;
}

Kernel make_kernel(const KernelSpec& spec) {
    Kernel k = [&] {
        switch (spec.family) {
            case KernelFamily::Constant: return Kernel::constant(spec.value);
            case KernelFamily::PowerLaw: return Kernel::power_law(spec.alpha);
            case KernelFamily::Tabulated: return Kernel::tabulated(spec.nodes);
        }
        throw std::invalid_argument("unknown kernel family");
    }();
    if (spec.normalize) k = k.normalized();
    return k;
}

TruncatedKernel truncate(const Kernel& kernel, int n) {
    Kernel cut = kernel.with_truncation(n);
    double Bn = cut.integral();
    if (!(Bn > 0.0))
        throw std::domain_error("truncation level below n0: B_n = 0");
    return TruncatedKernel{kernel, n, Bn, cut.normalized()};
}

KernelMoments kernel_moments(const Kernel& kernel) {
    KernelMoments m;
    m.Bbar = kernel.moment(2.0);
    if (!std::isfinite(m.Bbar))
        throw std::domain_error("kernel violates the very weak cutoff");
    if (!kernel.is_singular()) {
        double B = kernel.integral();
        // ∫(sin⁴φ + cos⁴φ)β(dφ) = ∫₀¹ [(1-x²)² + x⁴] b(x)/B dx
        double ms = kernel.moment(0.0) - 2.0 * kernel.moment(2.0) +
                    2.0 * kernel.moment(4.0);
        m.f1 = 1.5 * ms / B - 0.5;
        m.rate = 1.0 - m.f1;
        m.g2 = 2.0 * (kernel.moment(2.0) - kernel.moment(4.0)) / B;
        double alt = 1.5 * m.g2;
        if (std::abs(alt - m.rate) > 1e-10 * std::max(1.0, std::abs(m.rate)))
            throw std::runtime_error(
                "kernel moment cross-check failed: 1 - f1 != (3/2) g2");
    } else {
        m.g2 = 2.0 * (kernel.moment(2.0) - kernel.moment(4.0));
        m.rate = 1.5 * m.g2;
        m.f1 = 1.0 - m.rate;
    }
    m.lambda_b = -(2.0 / 3.0) * m.rate;
    return m;
}

KernelMoments kernel_moments(const TruncatedKernel& tk) {
    return kernel_moments(tk.normalized);
}

AngleSampler::AngleSampler(const Kernel& kernel, int table_size)
    : kernel_(kernel) {
    if (kernel_.is_singular())
        throw std::domain_error("angle sampler needs an integrable kernel");
    total_ = kernel_.integral();
    if (!(total_ > 0.0)) throw std::domain_error("kernel vanishes a.e.");
    inv_.resize(table_size + 1);
    inv_[0] = 0.0;
    inv_[table_size] = 1.0;
    for (int i = 1; i < table_size; ++i) {
        double u = double(i) / table_size;
        // bisection on the exact partial integral
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            (kernel_.partial_integral(mid) / total_ < u ? lo : hi) = mid;
        }
        inv_[i] = 0.5 * (lo + hi);
    }
}

double AngleSampler::invert(double u) const {
    double pos = u * double(inv_.size() - 1);
    auto i = std::size_t(pos);
    if (i >= inv_.size() - 1) return inv_.back();
    double frac = pos - double(i);
    return inv_[i] + frac * (inv_[i + 1] - inv_[i]);
}

double AngleSampler::sample_x(Rng& rng) const {
    double ax = invert(rng.uniform());
    return rng.uniform() < 0.5 ? -ax : ax;
}

double AngleSampler::sample_phi(Rng& rng) const {
    return std::acos(std::clamp(sample_x(rng), -1.0, 1.0));
}

std::vector<double> AngleSampler::beta_nodes(int nq) const {
    std::vector<double> xs(nq);
    for (int i = 0; i < nq; ++i) xs[i] = invert((i + 0.5) / nq);
    return xs;
}

double AngleSampler::cdf_abs(double x) const {
    return kernel_.partial_integral(x) / total_;
}

}  // namespace boltz
