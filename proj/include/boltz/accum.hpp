#pragma once

#include <cmath>
#include <complex>

namespace boltz {

// Neumaier compensated accumulator. Conservation checks at N ~ 1e6 need the
// extra bits; plain summation loses them.
struct Accum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    double value() const { return sum + comp; }
};

struct AccumC {
    Accum re, im;
    void add(std::complex<double> z) {
        re.add(z.real());
        im.add(z.imag());
    }
    std::complex<double> value() const { return {re.value(), im.value()}; }
};

// Running mean / standard error of a scalar Monte Carlo estimator.
struct MeanSe {
    Accum s1, s2;
    std::size_t n = 0;
    void add(double x) {
        s1.add(x);
        s2.add(x * x);
        ++n;
    }
    double mean() const { return s1.value() / double(n); }
    double se() const {
        if (n < 2) return 0.0;
        double m = mean();
        double var = std::max(0.0, s2.value() / double(n) - m * m);
        return std::sqrt(var / double(n));
    }
};

struct MeanSeC {
    MeanSe re, im;
    void add(std::complex<double> z) {
        re.add(z.real());
        im.add(z.imag());
    }
    std::complex<double> mean() const { return {re.mean(), im.mean()}; }
    // Component SEs combined in quadrature.
    double se() const { return std::hypot(re.se(), im.se()); }
};

}  // namespace boltz
