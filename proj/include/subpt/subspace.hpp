#pragma once

#include <string>
#include <utility>
#include <vector>

#include "subpt/common.hpp"
#include "subpt/trajectory.hpp"

namespace subpt::sub {

// PCA subspace fitted over a checkpoint window. Basis rows are the top-r
// eigenvectors of the centered sample covariance, descending eigenvalue
// order, canonical sign.
struct Subspace {
    std::vector<std::vector<double>> basis;  // r rows of length param_dim
    std::vector<double> eigenvalues;         // r values, descending, clamped >= 0
    std::vector<double> variance_ratios;     // r values, each lambda_k / total
    std::vector<double> mean;                // centering vector, length param_dim
    std::pair<std::size_t, std::size_t> window{0, 0};

    std::size_t rank() const { return basis.size(); }
    std::size_t ambient_dim() const { return mean.size(); }
};

// Fits PCA over checkpoints {v_t1,...,v_t2} (epoch indices; the trajectory's
// row 0 holds the initialization and is never part of a window). Centering a
// window of m rows leaves rank <= m-1, hence the bound r <= t2-t1.
Subspace pca_fit(const traj::Trajectory& trajectory,
                 std::pair<std::size_t, std::size_t> window, std::size_t r);

// U^T U g: the orthogonal projection of g onto span(basis). The mean is not
// used; gradients are displacement-like.
std::vector<double> project(const Subspace& sub, const std::vector<double>& g);

// Signed inner product between the two leading eigenvectors.
double leading_alignment(const Subspace& a, const Subspace& b);

// Text format "SUBPT-SUB 1 <r> <param_dim>", window line, mean row, r basis
// rows, eigenvalue line, variance-ratio line.
void save(const Subspace& sub, const std::string& path);
Subspace load(const std::string& path);

}  // namespace subpt::sub
