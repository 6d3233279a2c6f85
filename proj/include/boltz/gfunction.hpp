#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "boltz/ensemble.hpp"

namespace boltz {

// Superlinear gauge G built from the energy distribution gamma (the law of
// |v|^2 under the initial datum). G(x) = integral of a dyadic step density g:
// slope 1 on [0,1), slope A_n on [2^n, 2^(n+1)). Finiteness of
// integral G d(gamma) is what certifies uniform integrability of second
// moments along the flow.
class GFunction {
  public:
    struct Trace {
        std::vector<long long> r;      // r_1, r_2, ... (strictly increasing)
        std::vector<long long> B;      // 1-indexed (entry 0 unused); B_n =
                                       // #{j : r_j <= n}
        std::vector<long long> Bstar;  // 1-indexed companion, B*_1 = B_1
        std::vector<double> h;         // h(0..N), node values
        double sup_ratio = 0.0;        // sup A_{n+1}/A_n over the trace
        // The written construction tacitly assumes B* strictly increases;
        // stalls in B (skipped integers in r) break that. Reported, not
        // silently corrected; the evaluators use the leftmost preimage of h.
        bool bstar_strictly_increasing = true;
    };

    const std::vector<double>& A() const { return A_; }
    double lambda1() const { return lambda1_; }
    double lambda2() const { return lambda2_; }
    double lambda3() const { return lambda3_; }
    double int_G_dgamma() const { return int_G_dgamma_; }
    const Trace& trace() const { return trace_; }

    double g(double x) const;       // step density, off-grid values
    double G(double x) const;       // piecewise-linear primitive, closed form
    double G_star(double x) const { return G(x * x); }
    // q(x) = x^{-3} \int_0^x G(y^2) dy, q(0) = 1/3; non-decreasing, -> inf.
    double q(double x) const;

  private:
    friend GFunction build_G(std::vector<std::pair<double, double>>, int);
    std::vector<double> A_;
    std::vector<double> Gdyadic_;  // G(2^k), k = 0..levels
    double lambda1_ = 0.0, lambda2_ = 0.0, lambda3_ = 0.0;
    double int_G_dgamma_ = 0.0;
    Trace trace_;
};

// gamma as weighted atoms (|v|^2 value, probability weight). max_level is the
// number of dyadic cells with constructed slopes; beyond 2^max_level the last
// slope extends constantly.
GFunction build_G(std::vector<std::pair<double, double>> energy_samples,
                  int max_level = 48);
GFunction build_G(const Ensemble& mu0, int max_level = 48);

struct GConstants {
    int m = 0;
    double C1 = 0.0;
    double C = 0.0;  // 3 lambda3^2 C1
};

// m2 is the second moment of the underlying velocity measure.
GConstants constants(const GFunction& G, double m2);

struct UIRow {
    double t = 0.0;
    double value = 0.0;  // integral of |v|^2 q(|v|) against the ensemble
    double se = 0.0;
    double bound = 0.0;  // C
    bool pass = false;
};

struct TailRow {
    double R = 0.0;
    double sup_tail = 0.0;  // sup over t of tail energy at radius R
    double se = 0.0;        // SE at the argmax time
    double bound = 0.0;     // C / q(R)
    bool pass = false;
};

std::vector<UIRow> check_uniform_integrability(
    const std::vector<std::pair<double, Ensemble>>& trajectory,
    const GFunction& G, double C);

std::vector<TailRow> check_tail_bound(
    const std::vector<std::pair<double, Ensemble>>& trajectory,
    const GFunction& G, double C, const std::vector<double>& radii);

}  // namespace boltz
