#include "cogkit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cogkit/error.hpp"

namespace cogkit::linalg {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw InvalidArgument("matmul: dimension mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a.at(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                c.at(i, j) += aik * b.at(k, j);
            }
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t.at(j, i) = a.at(i, j);
    return t;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double max_abs_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    return m;
}

void unit_normalize_rows(Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto r = m.row(i);
        const double n = norm2(r);
        if (n > 0.0)
            for (double& x : r) x /= n;
    }
}

void center_columns(Matrix& m) {
    if (m.rows() == 0) return;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) mean += m.at(i, j);
        mean /= static_cast<double>(m.rows());
        for (std::size_t i = 0; i < m.rows(); ++i) m.at(i, j) -= mean;
    }
}

namespace {

// Column helpers on row-major storage.
double col_dot(const Matrix& a, std::size_t p, std::size_t q) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += a.at(i, p) * a.at(i, q);
    return s;
}

void rotate_cols(Matrix& a, std::size_t p, std::size_t q, double c, double s) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double ap = a.at(i, p);
        const double aq = a.at(i, q);
        a.at(i, p) = c * ap - s * aq;
        a.at(i, q) = s * ap + c * aq;
    }
}

}  // namespace

Svd jacobi_svd(const Matrix& a, double tol, int max_sweeps) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (m == 0 || n == 0) throw InvalidArgument("jacobi_svd: empty matrix");
    if (m < n) throw InvalidArgument("jacobi_svd: requires rows >= cols");

    Matrix w = a;  // columns get orthogonalized in place
    Matrix v = Matrix::identity(n);

    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double app = col_dot(w, p, p);
                const double aqq = col_dot(w, q, q);
                const double apq = col_dot(w, p, q);
                if (std::fabs(apq) <= tol * std::sqrt(app * aqq) || apq == 0.0) continue;
                converged = false;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                rotate_cols(w, p, q, c, s);
                rotate_cols(v, p, q, c, s);
            }
        }
    }
    if (!converged) throw NumericalError("jacobi_svd: no convergence within sweep limit");

    Svd out;
    out.sigma.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += w.at(i, j) * w.at(i, j);
        out.sigma[j] = std::sqrt(s);
    }

    // Sort singular values descending, permuting columns of w and v alike.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return out.sigma[x] > out.sigma[y]; });

    Matrix u(m, n);
    Matrix vs(n, n);
    std::vector<double> sig(n);
    for (std::size_t jj = 0; jj < n; ++jj) {
        const std::size_t j = order[jj];
        sig[jj] = out.sigma[j];
        for (std::size_t i = 0; i < m; ++i) u.at(i, jj) = w.at(i, j);
        for (std::size_t i = 0; i < n; ++i) vs.at(i, jj) = v.at(i, j);
    }
    out.sigma = std::move(sig);
    out.v = std::move(vs);

    // Normalize u columns; complete near-null columns to an orthonormal basis
    // so that u stays column-orthonormal even for rank-deficient input.
    const double tiny = (out.sigma.empty() ? 0.0 : out.sigma[0]) * 1e-14;
    for (std::size_t j = 0; j < n; ++j) {
        if (out.sigma[j] > tiny && out.sigma[j] > 0.0) {
            for (std::size_t i = 0; i < m; ++i) u.at(i, j) /= out.sigma[j];
        } else {
            // Gram-Schmidt a unit basis vector against the existing columns.
            for (std::size_t e = 0; e < m; ++e) {
                std::vector<double> cand(m, 0.0);
                cand[e] = 1.0;
                for (std::size_t jj = 0; jj < j; ++jj) {
                    double proj = 0.0;
                    for (std::size_t i = 0; i < m; ++i) proj += cand[i] * u.at(i, jj);
                    for (std::size_t i = 0; i < m; ++i) cand[i] -= proj * u.at(i, jj);
                }
                double nn = norm2(cand);
                if (nn > 0.5) {
                    for (std::size_t i = 0; i < m; ++i) u.at(i, j) = cand[i] / nn;
                    break;
                }
            }
        }
    }
    out.u = std::move(u);
    return out;
}

}  // namespace cogkit::linalg
