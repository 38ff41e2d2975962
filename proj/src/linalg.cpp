#include "subpt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace subpt::linalg {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
        throw Error("DimensionMismatch", "data length != rows*cols");
    if (!all_finite(data_)) throw Error("NonFinite", "matrix entries must be finite");
}

std::vector<double> DenseMatrix::row(std::size_t r) const {
    return std::vector<double>(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                               data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
}

void canonicalize_sign(std::vector<double>& v) {
    for (double x : v) {
        if (std::fabs(x) > 1e-12) {
            if (x < 0.0)
                for (double& y : v) y = -y;
            return;
        }
    }
}

EigResult eig_sym(const DenseMatrix& a) {
    const std::size_t n = a.rows();
    if (n == 0) throw Error("NonSquare", "empty matrix");
    if (a.cols() != n) throw Error("NonSquare", "matrix must be square");
    if (!all_finite(a.data())) throw Error("NonFinite", "matrix entries must be finite");

    double max_asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            max_asym = std::max(max_asym, std::fabs(a(i, j) - a(j, i)));
    if (max_asym > 1e-9) throw Error("NotSymmetric", "asymmetry beyond 1e-9");

    // Work on the symmetrized copy; V accumulates rotations, columns are eigenvectors.
    std::vector<double> m(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m[i * n + j] = 0.5 * (a(i, j) + a(j, i));
    std::vector<double> vecs(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) vecs[i * n + i] = 1.0;

    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += m[i * n + j] * m[i * n + j];
        if (off < 1e-30 * static_cast<double>(n * n)) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m[p * n + q];
                if (std::fabs(apq) < 1e-300) continue;
                const double app = m[p * n + p];
                const double aqq = m[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m[k * n + p];
                    const double mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m[p * n + k];
                    const double mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = vecs[k * n + p];
                    const double vkq = vecs[k * n + q];
                    vecs[k * n + p] = c * vkp - s * vkq;
                    vecs[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = m[i * n + i];
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return diag[i] > diag[j]; });

    EigResult out;
    out.eigenvalues.resize(n);
    out.eigenvectors = DenseMatrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = diag[order[k]];
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = vecs[i * n + order[k]];
        canonicalize_sign(v);
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(k, i) = v[i];
    }
    return out;
}

DenseMatrix orthonormalize(const DenseMatrix& rows) {
    const std::size_t r = rows.rows();
    const std::size_t c = rows.cols();
    if (r == 0) throw Error("RankDeficient", "no rows to orthonormalize");
    if (r > c) throw Error("RankDeficient", "more rows than ambient dimension");

    DenseMatrix out = rows;
    for (std::size_t i = 0; i < r; ++i) {
        // Two MGS passes against earlier rows for stability.
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < i; ++j) {
                double d = 0.0;
                for (std::size_t k = 0; k < c; ++k) d += out(i, k) * out(j, k);
                for (std::size_t k = 0; k < c; ++k) out(i, k) -= d * out(j, k);
            }
        }
        double nrm = 0.0;
        for (std::size_t k = 0; k < c; ++k) nrm += out(i, k) * out(i, k);
        nrm = std::sqrt(nrm);
        if (nrm < 1e-10) throw Error("RankDeficient", "row residual below 1e-10");
        for (std::size_t k = 0; k < c; ++k) out(i, k) /= nrm;
    }
    return out;
}

}  // namespace subpt::linalg
