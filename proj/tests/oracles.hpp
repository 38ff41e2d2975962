#pragma once

// Independent reference implementations used only by tests. These must stay
// decoupled from the library's own eigensolver / PCA / projection paths.

#include <cmath>
#include <random>
#include <vector>

#include "subpt/linalg.hpp"

namespace oracle {

using subpt::linalg::DenseMatrix;

// Power iteration with deflation: top-k eigenpairs of a symmetric PSD-ish
// matrix. Independent of the library's Jacobi solver.
inline void power_eig(DenseMatrix a, std::size_t k, std::vector<double>& values,
                      std::vector<std::vector<double>>& vectors) {
    const std::size_t n = a.rows();
    values.clear();
    vectors.clear();
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t e = 0; e < k; ++e) {
        std::vector<double> v(n);
        for (double& x : v) x = gauss(rng);
        double lambda = 0.0;
        for (int it = 0; it < 20000; ++it) {
            std::vector<double> w(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) w[i] += a(i, j) * v[j];
            double nrm = 0.0;
            for (double x : w) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm < 1e-200) break;
            for (double& x : w) x /= nrm;
            double diff = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                diff = std::max(diff, std::fabs(std::fabs(w[i]) - std::fabs(v[i])));
            v = w;
            if (diff < 1e-14 && it > 10) break;
        }
        std::vector<double> av(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) av[i] += a(i, j) * v[j];
        lambda = 0.0;
        for (std::size_t i = 0; i < n; ++i) lambda += v[i] * av[i];
        values.push_back(lambda);
        vectors.push_back(v);
        // Deflate: a <- a - lambda v v^T.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a(i, j) -= lambda * v[i] * v[j];
    }
}

// Dense covariance PCA: builds the full dim x dim covariance of the given
// rows (divided by m-1) and extracts the top-k spectrum by power iteration.
inline void covariance_pca(const std::vector<std::vector<double>>& rows, std::size_t k,
                           std::vector<double>& values,
                           std::vector<std::vector<double>>& vectors) {
    const std::size_t m = rows.size();
    const std::size_t dim = rows[0].size();
    std::vector<double> mean(dim, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j < dim; ++j) mean[j] += r[j];
    for (double& x : mean) x /= static_cast<double>(m);

    DenseMatrix cov(dim, dim);
    for (const auto& r : rows)
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                cov(i, j) += (r[i] - mean[i]) * (r[j] - mean[j]) /
                             static_cast<double>(m - 1);
    power_eig(cov, k, values, vectors);
}

// Classical Gram-Schmidt QR on rows, the reference for orthonormalize.
inline std::vector<std::vector<double>> gram_schmidt(
    const std::vector<std::vector<double>>& rows) {
    std::vector<std::vector<double>> out;
    for (auto v : rows) {
        for (const auto& u : out) {
            double d = 0.0;
            for (std::size_t k = 0; k < v.size(); ++k) d += v[k] * u[k];
            for (std::size_t k = 0; k < v.size(); ++k) v[k] -= d * u[k];
        }
        double nrm = 0.0;
        for (double x : v) nrm += x * x;
        nrm = std::sqrt(nrm);
        for (double& x : v) x /= nrm;
        out.push_back(v);
    }
    return out;
}

// Central finite differences of a scalar function of a flat parameter vector.
template <typename F>
std::vector<double> finite_diff(F&& f, std::vector<double> x, double h = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double orig = x[i];
        x[i] = orig + h;
        const double fp = f(x);
        x[i] = orig - h;
        const double fm = f(x);
        x[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline double max_rel_err(const std::vector<double>& got, const std::vector<double>& want) {
    double scale = 0.0;
    for (double x : want) scale = std::max(scale, std::fabs(x));
    scale = std::max(scale, 1e-8);
    double err = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i)
        err = std::max(err, std::fabs(got[i] - want[i]) / scale);
    return err;
}

}  // namespace oracle
