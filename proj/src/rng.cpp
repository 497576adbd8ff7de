#include "causebound/rng.hpp"

#include <cmath>

namespace causebound {

double normal01(SplitMix64& g) {
    // 1 - U keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform01(g);
    const double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

double gamma_draw(SplitMix64& g, double alpha) {
    if (alpha < 1.0) {
        const double u = 1.0 - uniform01(g); // (0, 1]
        return gamma_draw(g, alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x;
        double v;
        do {
            x = normal01(g);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01(g);
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) {
            return d * v;
        }
        if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

double beta_draw(SplitMix64& g, double alpha, double beta) {
    const double x = gamma_draw(g, alpha);
    const double y = gamma_draw(g, beta);
    const double sum = x + y;
    if (sum == 0.0) {
        // Both gammas underflowed; fall back on the mean.
        return alpha / (alpha + beta);
    }
    return x / sum;
}

} // namespace causebound
