#ifndef SUBGROUP_SPECIAL_HPP
#define SUBGROUP_SPECIAL_HPP

#include <cmath>
#include <limits>

namespace subgroup::special {

namespace detail {

// Continued fraction for I_x(a, b), modified Lentz evaluation.
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr int max_iter = 10000;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) {
            break;
        }
    }
    return h;
}

}

/// Regularized incomplete beta function I_x(a, b) for a, b > 0 and x in [0, 1].
inline double incomplete_beta(double a, double b, double x) {
    if (!(a > 0) || !(b > 0) || !(x >= 0) || !(x <= 1)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * detail::beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// P(F > f) for an F(d1, d2) variate.
inline double f_upper_tail(double f, double d1, double d2) {
    if (!(f > 0)) {
        return 1.0;
    }
    // P(F > f) = I_{d2 / (d2 + d1 f)}(d2 / 2, d1 / 2); evaluated on the complementary side when
    // that argument is close to 1 to keep the small tail accurate.
    const double x = d2 / (d2 + d1 * f);
    if (x > 0.5) {
        return 1.0 - incomplete_beta(d1 / 2.0, d2 / 2.0, d1 * f / (d2 + d1 * f));
    }
    return incomplete_beta(d2 / 2.0, d1 / 2.0, x);
}

/// Two-sided standard normal tail probability P(|Z| > |z|).
inline double normal_two_sided(double z) {
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

}

#endif
