#pragma once

#include <cstddef>

namespace cogkit::stats {

/// log of the complete beta function B(a, b).
double log_beta(double a, double b);

/// Regularized incomplete beta function I_x(a, b), x in [0, 1], a, b > 0.
/// Continued-fraction evaluation (modified Lentz), relative tolerance 1e-10.
double regularized_incomplete_beta(double x, double a, double b);

/// CDF of Student's t distribution with df degrees of freedom.
double student_t_cdf(double t, double df);

/// P(|T| > |t|) for Student's t with df degrees of freedom.
double student_t_two_tailed(double t, double df);

struct WelchResult {
    double t;
    double df;
    double p;  // two-tailed
};

/// Welch's unequal-variance t-test from summary statistics. Variances are
/// sample variances (n-1 denominator). Two identical groups give t = 0, p = 1.
WelchResult welch_t_test(double mean1, double var1, std::size_t n1, double mean2,
                         double var2, std::size_t n2);

/// Sample mean and variance (n-1 denominator; variance 0 when n < 2).
struct Moments {
    double mean;
    double var;
    std::size_t n;
};
Moments sample_moments(const double* values, std::size_t n);

}  // namespace cogkit::stats
