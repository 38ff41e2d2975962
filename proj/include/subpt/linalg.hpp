#pragma once

#include <cstddef>
#include <vector>

#include "subpt/common.hpp"

namespace subpt::linalg {

// Row-major dense matrix of doubles. Entries must be finite.
class DenseMatrix {
public:
    DenseMatrix() : rows_(0), cols_(0) {}
    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<double> row(std::size_t r) const;
    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

// Full spectrum of a symmetric matrix. Eigenvalues sorted descending; row k of
// eigenvectors is the unit eigenvector for eigenvalue k, sign-canonicalized so
// the first component with |x| > 1e-12 is positive.
struct EigResult {
    std::vector<double> eigenvalues;
    DenseMatrix eigenvectors;
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Symmetrizes input
// defensively; asymmetry beyond 1e-9 is an error.
EigResult eig_sym(const DenseMatrix& a);

// Modified Gram-Schmidt on the rows. Throws RankDeficient when a row's
// residual after removing prior components has norm < 1e-10.
DenseMatrix orthonormalize(const DenseMatrix& rows);

void canonicalize_sign(std::vector<double>& v);

}  // namespace subpt::linalg
