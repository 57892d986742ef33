#ifndef GROWNET_LINALG_HPP
#define GROWNET_LINALG_HPP

#include <cstddef>
#include <vector>

namespace grownet {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);
/// Scales v to unit Euclidean norm in place. Errors on the zero vector.
void normalize(Vec& v);

/// Dense symmetric matrix. Only the lower triangle is stored, so symmetry
/// holds bit-exactly by construction.
class SymMatrix {
public:
    explicit SymMatrix(std::size_t dim);

    std::size_t dim() const { return dim_; }

    double operator()(std::size_t i, std::size_t j) const {
        return tri_[pack(i, j)];
    }
    void set(std::size_t i, std::size_t j, double value) { tri_[pack(i, j)] = value; }
    void add(std::size_t i, std::size_t j, double value) { tri_[pack(i, j)] += value; }

    double frobenius_norm() const;

    const std::vector<double>& packed() const { return tri_; }

private:
    static std::size_t pack_index(std::size_t i, std::size_t j) {
        return i * (i + 1) / 2 + j;
    }
    std::size_t pack(std::size_t i, std::size_t j) const {
        return i >= j ? pack_index(i, j) : pack_index(j, i);
    }

    std::size_t dim_;
    std::vector<double> tri_;
};

struct EigenPair {
    double value = 0.0;
    Vec vector;
};

Vec matvec(const SymMatrix& m, const Vec& v);

/// Smallest eigenvalue and a unit eigenvector of a symmetric matrix, by
/// cyclic Jacobi rotations. The returned vector has its first nonzero
/// component positive. Residual satisfies |Mv - lambda*v| <= tol * |M|_F.
EigenPair sym_eig_min(const SymMatrix& m, double tol = 1e-10);

} // namespace grownet

#endif
