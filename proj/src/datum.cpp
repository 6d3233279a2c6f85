#include "boltz/datum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace boltz {

namespace {

Mat3 cholesky3(const Mat3& a) {
    Mat3 L{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            if (i == j) {
                if (s < -1e-12)
                    throw std::invalid_argument("covariance not PSD");
                L(i, i) = std::sqrt(std::max(0.0, s));
            } else {
                L(i, j) = L(j, j) > 0.0 ? s / L(j, j) : 0.0;
            }
        }
    }
    return L;
}

}  // namespace

InitialDatum InitialDatum::gaussian(const Vec3& mean, const Mat3& covariance) {
    InitialDatum d;
    d.family_ = Family::Gaussian;
    d.mean_ = mean;
    d.cov_ = covariance;
    d.chol_ = cholesky3(covariance);
    return d;
}

InitialDatum InitialDatum::gaussian_iso(double sigma2, const Vec3& mean) {
    Mat3 c{};
    c(0, 0) = c(1, 1) = c(2, 2) = sigma2;
    return gaussian(mean, c);
}

InitialDatum InitialDatum::sphere_uniform(double radius, const Vec3& center) {
    InitialDatum d;
    d.family_ = Family::Sphere;
    d.radius_ = radius;
    d.mean_ = center;
    return d;
}

InitialDatum InitialDatum::two_point(const Vec3& a, const Vec3& b, double p_a) {
    if (!(p_a >= 0.0 && p_a <= 1.0))
        throw std::invalid_argument("two_point probability out of range");
    InitialDatum d;
    d.family_ = Family::TwoPoint;
    d.a_ = a;
    d.b_ = b;
    d.pa_ = p_a;
    return d;
}

InitialDatum InitialDatum::point(const Vec3& v) {
    InitialDatum d;
    d.family_ = Family::Point;
    d.a_ = v;
    return d;
}

InitialDatum InitialDatum::mixture(std::vector<InitialDatum> parts,
                                   std::vector<double> weights) {
    if (parts.empty() || parts.size() != weights.size())
        throw std::invalid_argument("bad mixture spec");
    double tot = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("mixture weight < 0");
        tot += w;
    }
    if (!(tot > 0.0)) throw std::invalid_argument("mixture weights all zero");
    for (double& w : weights) w /= tot;
    InitialDatum d;
    d.family_ = Family::Mixture;
    d.parts_ = std::move(parts);
    d.part_w_ = std::move(weights);
    return d;
}

InitialDatum InitialDatum::from_ensemble(Ensemble e) {
    InitialDatum d;
    d.family_ = Family::File;
    d.file_ = std::make_shared<Ensemble>(std::move(e));
    d.file_cum_.reserve(d.file_->size());
    double c = 0.0;
    for (double w : d.file_->weights()) {
        c += w;
        d.file_cum_.push_back(c);
    }
    return d;
}

Vec3 InitialDatum::sample(Rng& rng) const {
    switch (family_) {
        case Family::Gaussian:
            return mean_ + chol_ * rng.normal3();
        case Family::Sphere:
            return mean_ + radius_ * rng.unit_vector();
        case Family::TwoPoint:
            return rng.uniform() < pa_ ? a_ : b_;
        case Family::Point:
            return a_;
        case Family::Mixture: {
            double u = rng.uniform();
            double c = 0.0;
            for (std::size_t i = 0; i < parts_.size(); ++i) {
                c += part_w_[i];
                if (u < c || i + 1 == parts_.size())
                    return parts_[i].sample(rng);
            }
            return parts_.back().sample(rng);
        }
        case Family::File: {
            double u = rng.uniform();
            auto it =
                std::lower_bound(file_cum_.begin(), file_cum_.end(), u);
            std::size_t i = std::min<std::size_t>(
                it - file_cum_.begin(), file_->size() - 1);
            return file_->points()[i];
        }
    }
    return {};
}

Vec3 InitialDatum::mean_vec() const {
    switch (family_) {
        case Family::Gaussian:
        case Family::Sphere:
            return mean_;
        case Family::TwoPoint:
            return pa_ * a_ + (1.0 - pa_) * b_;
        case Family::Point:
            return a_;
        case Family::Mixture: {
            Vec3 m{};
            for (std::size_t i = 0; i < parts_.size(); ++i)
                m += part_w_[i] * parts_[i].mean_vec();
            return m;
        }
        case Family::File:
            return file_->moments().mean;
    }
    return {};
}

Mat3 InitialDatum::cov_raw() const {
    Mat3 r{};
    switch (family_) {
        case Family::Gaussian: {
            Vec3 m = mean_;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) r(i, j) = cov_(i, j) + m[i] * m[j];
            return r;
        }
        case Family::Sphere: {
            for (int i = 0; i < 3; ++i)
                r(i, i) = radius_ * radius_ / 3.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) r(i, j) += mean_[i] * mean_[j];
            return r;
        }
        case Family::TwoPoint: {
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    r(i, j) = pa_ * a_[i] * a_[j] +
                              (1.0 - pa_) * b_[i] * b_[j];
            return r;
        }
        case Family::Point: {
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) r(i, j) = a_[i] * a_[j];
            return r;
        }
        case Family::Mixture: {
            for (std::size_t k = 0; k < parts_.size(); ++k) {
                Mat3 p = parts_[k].cov_raw();
                for (int i = 0; i < 9; ++i) r.m[i] += part_w_[k] * p.m[i];
            }
            return r;
        }
        case Family::File:
            return file_->moments().cov_raw;
    }
    return r;
}

double InitialDatum::m2() const {
    Mat3 c = cov_raw();
    return c(0, 0) + c(1, 1) + c(2, 2);
}

bool InitialDatum::has_char_fn() const {
    switch (family_) {
        case Family::Mixture:
            return std::all_of(parts_.begin(), parts_.end(),
                               [](const auto& p) { return p.has_char_fn(); });
        default:
            return true;
    }
}

std::complex<double> InitialDatum::char_fn(const Vec3& xi) const {
    using namespace std::complex_literals;
    switch (family_) {
        case Family::Gaussian: {
            double q = 0.0;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) q += xi[i] * cov_(i, j) * xi[j];
            return std::exp(1i * xi.dot(mean_) - 0.5 * q);
        }
        case Family::Sphere: {
            double rr = radius_ * xi.norm();
            double sinc = rr > 1e-8 ? std::sin(rr) / rr
                                    : 1.0 - rr * rr / 6.0;
            return std::exp(1i * xi.dot(mean_)) * sinc;
        }
        case Family::TwoPoint:
            return pa_ * std::exp(1i * xi.dot(a_)) +
                   (1.0 - pa_) * std::exp(1i * xi.dot(b_));
        case Family::Point:
            return std::exp(1i * xi.dot(a_));
        case Family::Mixture: {
            std::complex<double> s = 0.0;
            for (std::size_t i = 0; i < parts_.size(); ++i)
                s += part_w_[i] * parts_[i].char_fn(xi);
            return s;
        }
        case Family::File:
            return file_->char_fn(xi).value;
    }
    return 0.0;
}

bool InitialDatum::isotropic() const {
    switch (family_) {
        case Family::Gaussian:
            return mean_.norm() == 0.0 &&
                   std::abs(cov_(0, 0) - cov_(1, 1)) < 1e-14 &&
                   std::abs(cov_(0, 0) - cov_(2, 2)) < 1e-14 &&
                   std::abs(cov_(0, 1)) + std::abs(cov_(0, 2)) +
                           std::abs(cov_(1, 2)) < 1e-14;
        case Family::Sphere:
            return mean_.norm() == 0.0;
        case Family::Point:
            return a_.norm() == 0.0;
        case Family::Mixture:
            return std::all_of(parts_.begin(), parts_.end(),
                               [](const auto& p) { return p.isotropic(); });
        default:
            return false;
    }
}

double InitialDatum::radial_char_fn(double r) const {
    if (!isotropic())
        throw std::domain_error("radial char fn needs an isotropic datum");
    return char_fn({r, 0.0, 0.0}).real();
}

Ensemble InitialDatum::draw_ensemble(std::size_t n, std::uint64_t seed,
                                     std::uint64_t task_id) const {
    std::vector<Vec3> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng rng = Rng::derived(seed, task_id, i);
        pts[i] = sample(rng);
    }
    return Ensemble::from_points(std::move(pts), {}, "datum-sample");
}

}  // namespace boltz
