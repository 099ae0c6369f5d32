#include "cogkit/stats.hpp"

#include <cmath>
#include <limits>

#include "cogkit/error.hpp"

namespace cogkit::stats {

namespace {

constexpr double kCfTol = 1e-10;
constexpr int kCfMaxIter = 500;

// Continued fraction for the incomplete beta function, modified Lentz scheme.
double incbeta_cf(double x, double a, double b) {
    const double tiny = 1e-300;
    double c = 1.0;
    double d = 1.0 - (a + b) * x / (a + 1.0);
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kCfMaxIter; ++m) {
        const double dm = static_cast<double>(m);
        // even step
        double num = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
        d = 1.0 + num * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        // odd step
        num = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
        d = 1.0 + num * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + num / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double mult = d * c;
        h *= mult;
        if (std::fabs(mult - 1.0) < kCfTol) return h;
    }
    throw NumericalError("incomplete beta continued fraction did not converge");
}

}  // namespace

double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

double regularized_incomplete_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw InvalidArgument("regularized_incomplete_beta: a, b must be positive");
    if (!(x >= 0.0 && x <= 1.0))
        throw InvalidArgument("regularized_incomplete_beta: x must lie in [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
    // Use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a) where the fraction converges fast.
    if (x < (a + 1.0) / (a + b + 2.0)) return front * incbeta_cf(x, a, b) / a;
    return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(b, a)) *
                     incbeta_cf(1.0 - x, b, a) / b;
}

double student_t_two_tailed(double t, double df) {
    if (!(df > 0.0)) throw InvalidArgument("student_t_two_tailed: df must be positive");
    if (t == 0.0) return 1.0;
    if (std::isinf(t)) return 0.0;
    return regularized_incomplete_beta(df / (df + t * t), 0.5 * df, 0.5);
}

double student_t_cdf(double t, double df) {
    if (!(df > 0.0)) throw InvalidArgument("student_t_cdf: df must be positive");
    if (t == 0.0) return 0.5;
    const double half_tail = 0.5 * student_t_two_tailed(t, df);
    return t > 0.0 ? 1.0 - half_tail : half_tail;
}

WelchResult welch_t_test(double mean1, double var1, std::size_t n1, double mean2,
                         double var2, std::size_t n2) {
    if (n1 < 2 || n2 < 2)
        throw InsufficientData("welch_t_test: each group needs at least 2 samples");
    if (var1 < 0.0 || var2 < 0.0)
        throw InvalidArgument("welch_t_test: variances must be nonnegative");

    const double se1 = var1 / static_cast<double>(n1);
    const double se2 = var2 / static_cast<double>(n2);
    const double se = se1 + se2;
    const double diff = mean1 - mean2;

    WelchResult r{};
    if (se == 0.0) {
        // Degenerate samples: equal means are indistinguishable, unequal are certain.
        r.t = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
        r.df = static_cast<double>(n1 + n2 - 2);
        r.p = diff == 0.0 ? 1.0 : 0.0;
        return r;
    }
    r.t = diff / std::sqrt(se);
    // Welch-Satterthwaite degrees of freedom.
    r.df = se * se /
           (se1 * se1 / static_cast<double>(n1 - 1) + se2 * se2 / static_cast<double>(n2 - 1));
    r.p = student_t_two_tailed(r.t, r.df);
    return r;
}

Moments sample_moments(const double* values, std::size_t n) {
    Moments m{0.0, 0.0, n};
    if (n == 0) return m;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += values[i];
    m.mean = sum / static_cast<double>(n);
    if (n >= 2) {
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = values[i] - m.mean;
            ss += d * d;
        }
        m.var = ss / static_cast<double>(n - 1);
    }
    return m;
}

}  // namespace cogkit::stats
