#include "boltz/ensemble.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "boltz/accum.hpp"

namespace boltz {

Ensemble Ensemble::from_points(std::vector<Vec3> points,
                               std::vector<double> weights,
                               std::string label) {
    if (points.empty()) throw std::invalid_argument("empty ensemble");
    for (const auto& p : points)
        if (!p.finite())
            throw std::invalid_argument("non-finite velocity coordinate");
    if (weights.empty()) {
        weights.assign(points.size(), 1.0 / double(points.size()));
    } else {
        if (weights.size() != points.size())
            throw std::invalid_argument("weights/points size mismatch");
        Accum total;
        for (double w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w))
                throw std::invalid_argument("weights must be nonnegative");
            total.add(w);
        }
        double t = total.value();
        if (!(t > 0.0)) throw std::invalid_argument("all weights are zero");
        for (double& w : weights) w /= t;
    }
    Ensemble e;
    e.points_ = std::move(points);
    e.weights_ = std::move(weights);
    e.label_ = std::move(label);
    return e;
}

MomentSummary Ensemble::moments() const {
    Accum mx, my, mz;
    Accum c[3][3];
    for (std::size_t k = 0; k < points_.size(); ++k) {
        const Vec3& v = points_[k];
        const double w = weights_[k];
        mx.add(w * v.x);
        my.add(w * v.y);
        mz.add(w * v.z);
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) c[i][j].add(w * v[i] * v[j]);
    }
    MomentSummary s;
    s.mean = {mx.value(), my.value(), mz.value()};
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            s.cov_raw(i, j) = c[i][j].value();
            s.cov_raw(j, i) = s.cov_raw(i, j);
        }
    s.m2 = s.cov_raw(0, 0) + s.cov_raw(1, 1) + s.cov_raw(2, 2);
    s.centered_energy = s.m2 - s.mean.norm2();
    return s;
}

CharFnValue Ensemble::char_fn(const Vec3& xi) const {
    AccumC mean;
    for (std::size_t k = 0; k < points_.size(); ++k) {
        double ph = xi.dot(points_[k]);
        mean.add(weights_[k] * std::complex<double>(std::cos(ph), std::sin(ph)));
    }
    CharFnValue out;
    out.value = mean.value();
    // Var(Σ w_j Z_j) estimated by Σ w_j² |Z_j − Z̄|², per component.
    Accum vr, vi;
    for (std::size_t k = 0; k < points_.size(); ++k) {
        double ph = xi.dot(points_[k]);
        double dr = std::cos(ph) - out.value.real();
        double di = std::sin(ph) - out.value.imag();
        vr.add(weights_[k] * weights_[k] * dr * dr);
        vi.add(weights_[k] * weights_[k] * di * di);
    }
    out.se = std::sqrt(std::max(0.0, vr.value()) + std::max(0.0, vi.value()));
    return out;
}

double Ensemble::tail_energy(double R) const {
    const double r2 = R * R;
    Accum s;
    for (std::size_t k = 0; k < points_.size(); ++k) {
        double e = points_[k].norm2();
        if (e >= r2) s.add(weights_[k] * e);
    }
    return s.value();
}

void Ensemble::write_csv(std::ostream& os) const {
    os << "vx,vy,vz,w\n" << std::setprecision(17);
    for (std::size_t k = 0; k < points_.size(); ++k) {
        const Vec3& v = points_[k];
        os << v.x << ',' << v.y << ',' << v.z << ',' << weights_[k] << '\n';
    }
}

Ensemble Ensemble::read_csv(std::istream& is, std::string label) {
    std::vector<Vec3> pts;
    std::vector<double> ws;
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        Vec3 v;
        double w;
        char comma;
        if (!(ls >> v.x >> comma >> v.y >> comma >> v.z >> comma >> w))
            throw std::runtime_error("malformed ensemble CSV line: " + line);
        pts.push_back(v);
        ws.push_back(w);
    }
    return from_points(std::move(pts), std::move(ws), std::move(label));
}

void Ensemble::save_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    write_csv(os);
}

Ensemble Ensemble::load_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_csv(is, path);
}

}  // namespace boltz
