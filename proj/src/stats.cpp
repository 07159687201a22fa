#include "cfgen/stats.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "cfgen/dataset.hpp"

namespace cfgen {

namespace {

// erf(x) = 2/sqrt(pi) * sum_{n>=0} (-1)^n x^(2n+1) / (n! (2n+1)), for small x.
double erf_series(double x) {
    const double x2 = x * x;
    double term = x;
    double sum = x;
    for (int n = 1; n < 200; ++n) {
        term *= -x2 / static_cast<double>(n);
        const double contrib = term / static_cast<double>(2 * n + 1);
        sum += contrib;
        if (std::abs(contrib) < 1e-18 * std::abs(sum)) break;
    }
    return sum * 2.0 / std::sqrt(std::numbers::pi);
}

// erfc(x) for x > 0 via the continued fraction
// erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...))))
// evaluated with the modified Lentz algorithm.
double erfc_cont_fraction(double x) {
    constexpr double tiny = 1e-300;
    double c = 1.0 / tiny;
    double d = 1.0 / x;  // leading denominator b0 = x
    double h = d;
    for (int i = 1; i < 300; ++i) {
        const double a = static_cast<double>(i) / 2.0;  // partial numerators n/2
        d = x + a * d;
        if (std::abs(d) < tiny) d = tiny;
        c = x + a / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return std::exp(-x * x) / std::sqrt(std::numbers::pi) * h;
}

}  // namespace

double erf_approx(double x) {
    const double ax = std::abs(x);
    if (ax < 2.5) return erf_series(x);
    const double tail = erfc_cont_fraction(ax);
    return x > 0 ? 1.0 - tail : tail - 1.0;
}

double normal_cdf(double z) {
    return 0.5 * (1.0 + erf_approx(z / std::numbers::sqrt2));
}

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;

    // Continued fraction for the incomplete beta (modified Lentz).
    auto beta_cf = [](double aa, double bb, double xx) {
        constexpr double tiny = 1e-300;
        const double qab = aa + bb;
        const double qap = aa + 1.0;
        const double qam = aa - 1.0;
        double c = 1.0;
        double d = 1.0 - qab * xx / qap;
        if (std::abs(d) < tiny) d = tiny;
        d = 1.0 / d;
        double h = d;
        for (int m = 1; m <= 300; ++m) {
            const double m2 = 2.0 * m;
            double num = m * (bb - m) * xx / ((qam + m2) * (aa + m2));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            h *= d * c;
            num = -(aa + m) * (qab + m) * xx / ((aa + m2) * (qap + m2));
            d = 1.0 + num * d;
            if (std::abs(d) < tiny) d = tiny;
            c = 1.0 + num / c;
            if (std::abs(c) < tiny) c = tiny;
            d = 1.0 / d;
            const double delta = d * c;
            h *= delta;
            if (std::abs(delta - 1.0) < 1e-15) break;
        }
        return h;
    };

    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    if (df <= 0.0) throw RuntimeError("degrees of freedom must be positive");
    const double x = df / (df + t * t);
    const double tail = 0.5 * incomplete_beta(df / 2.0, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double z_test_proportions(long successes1, long n1, long successes2, long n2) {
    if (n1 < 1 || n2 < 1) throw RuntimeError("z-test needs at least one trial per group");
    const double p1 = static_cast<double>(successes1) / static_cast<double>(n1);
    const double p2 = static_cast<double>(successes2) / static_cast<double>(n2);
    const double pooled = static_cast<double>(successes1 + successes2) / static_cast<double>(n1 + n2);
    const double var = pooled * (1.0 - pooled) * (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2));
    if (var <= 0.0) return 1.0;  // both 0 or both 1
    const double z = (p1 - p2) / std::sqrt(var);
    return 2.0 * (1.0 - normal_cdf(std::abs(z)));
}

WelchResult welch_t_test(std::span<const double> sample1, std::span<const double> sample2) {
    WelchResult out;
    const std::size_t n1 = sample1.size();
    const std::size_t n2 = sample2.size();
    if (n1 < 2 || n2 < 2) {
        out.degenerate = true;
        return out;
    }
    auto mean_var = [](std::span<const double> s) {
        double mean = 0.0;
        for (double v : s) mean += v;
        mean /= static_cast<double>(s.size());
        double ss = 0.0;
        for (double v : s) ss += (v - mean) * (v - mean);
        return std::pair<double, double>(mean, ss / static_cast<double>(s.size() - 1));
    };
    const auto [m1, v1] = mean_var(sample1);
    const auto [m2, v2] = mean_var(sample2);
    const double se1 = v1 / static_cast<double>(n1);
    const double se2 = v2 / static_cast<double>(n2);
    if (se1 + se2 <= 0.0) {
        out.degenerate = true;  // both samples constant
        return out;
    }
    out.t = (m1 - m2) / std::sqrt(se1 + se2);
    out.df = (se1 + se2) * (se1 + se2) /
             (se1 * se1 / static_cast<double>(n1 - 1) + se2 * se2 / static_cast<double>(n2 - 1));
    out.p_value = 2.0 * (1.0 - student_t_cdf(std::abs(out.t), out.df));
    return out;
}

}  // namespace cfgen
