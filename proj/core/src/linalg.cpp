#include "grownet/linalg.hpp"

#include <cmath>
#include <string>

#include "grownet/error.hpp"

namespace grownet {

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) {
        throw Error("dot: length mismatch (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void normalize(Vec& v) {
    const double n = norm2(v);
    if (n == 0.0) throw Error("normalize: zero vector");
    for (double& x : v) x /= n;
}

SymMatrix::SymMatrix(std::size_t dim) : dim_(dim), tri_(dim * (dim + 1) / 2, 0.0) {
    if (dim < 1) throw Error("SymMatrix: dim must be >= 1");
}

double SymMatrix::frobenius_norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double x = (*this)(i, j);
            s += 2.0 * x * x;
        }
        const double d = (*this)(i, i);
        s += d * d;
    }
    return std::sqrt(s);
}

Vec matvec(const SymMatrix& m, const Vec& v) {
    if (v.size() != m.dim()) {
        throw Error("matvec: vector length " + std::to_string(v.size()) +
                    " does not match matrix dim " + std::to_string(m.dim()));
    }
    Vec out(m.dim(), 0.0);
    for (std::size_t i = 0; i < m.dim(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.dim(); ++j) s += m(i, j) * v[j];
        out[i] = s;
    }
    return out;
}

namespace {

void check_finite(const SymMatrix& m) {
    for (std::size_t i = 0; i < m.dim(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            if (!std::isfinite(m(i, j))) {
                throw Error("sym_eig_min: entry (" + std::to_string(i) + "," +
                            std::to_string(j) + ") is not finite");
            }
        }
    }
}

double off_diagonal_norm(const std::vector<double>& a, std::size_t d) {
    double s = 0.0;
    for (std::size_t p = 0; p < d; ++p)
        for (std::size_t q = p + 1; q < d; ++q) s += a[p * d + q] * a[p * d + q];
    return std::sqrt(2.0 * s);
}

} // namespace

EigenPair sym_eig_min(const SymMatrix& m, double tol) {
    if (tol <= 0.0) throw Error("sym_eig_min: tol must be positive");
    check_finite(m);

    const std::size_t d = m.dim();
    std::vector<double> a(d * d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) a[i * d + j] = m(i, j);

    std::vector<double> v(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;

    const double frob = m.frobenius_norm();
    const double target = tol * frob;

    constexpr int kMaxSweeps = 100;
    int sweep = 0;
    for (; sweep < kMaxSweeps; ++sweep) {
        if (off_diagonal_norm(a, d) <= target) break;
        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a[p * d + q];
                if (apq == 0.0) continue;
                const double app = a[p * d + p];
                const double aqq = a[q * d + q];
                const double theta = (aqq - app) / (2.0 * apq);
                double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (std::size_t k = 0; k < d; ++k) {
                    const double akp = a[k * d + p];
                    const double akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double apk = a[p * d + k];
                    const double aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double vkp = v[k * d + p];
                    const double vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    if (sweep == kMaxSweeps && off_diagonal_norm(a, d) > target) {
        throw Error("sym_eig_min: Jacobi did not converge in 100 sweeps");
    }

    std::size_t min_idx = 0;
    for (std::size_t i = 1; i < d; ++i)
        if (a[i * d + i] < a[min_idx * d + min_idx]) min_idx = i;

    EigenPair pair;
    pair.value = a[min_idx * d + min_idx];
    pair.vector.resize(d);
    for (std::size_t k = 0; k < d; ++k) pair.vector[k] = v[k * d + min_idx];
    normalize(pair.vector);
    for (std::size_t k = 0; k < d; ++k) {
        if (pair.vector[k] != 0.0) {
            if (pair.vector[k] < 0.0)
                for (double& x : pair.vector) x = -x;
            break;
        }
    }
    return pair;
}

} // namespace grownet
