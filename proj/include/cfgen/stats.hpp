#pragma once

#include <optional>
#include <span>

namespace cfgen {

// Error function via its Maclaurin series for |x| <= 2.5 and the Lentz
// continued fraction for erfc beyond; absolute error well under 1e-12
// across the real line.
double erf_approx(double x);

double normal_cdf(double z);

// Regularized incomplete beta I_x(a, b) by the standard continued fraction
// with the symmetry transform for x > (a+1)/(a+b+2).
double incomplete_beta(double a, double b, double x);

// Student-t CDF with (possibly fractional)
// degrees of freedom, via the incomplete beta function.
double student_t_cdf(double t, double df);

// Two-sided pooled two-proportion z-test. Degenerate pools (both
// proportions 0 or both 1) give p = 1.
double z_test_proportions(long successes1, long n1, long successes2, long n2);

struct WelchResult {
    std::optional<double> p_value;  // absent when both samples are constant
    double t = 0.0;
    double df = 0.0;
    bool degenerate = false;
};

// Two-sided Welch t-test with Welch-Satterthwaite degrees of freedom.
WelchResult welch_t_test(std::span<const double> sample1, std::span<const double> sample2);

}  // namespace cfgen
