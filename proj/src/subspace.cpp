#include "subpt/subspace.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "subpt/linalg.hpp"
#include "subpt/textio.hpp"

namespace subpt::sub {

Subspace pca_fit(const traj::Trajectory& trajectory,
                 std::pair<std::size_t, std::size_t> window, std::size_t r) {
    const auto [t1, t2] = window;
    const std::size_t last_epoch = trajectory.epochs();
    if (t1 < 1 || t1 > t2 || t2 > last_epoch)
        throw Error("WindowOutOfRange", "window must satisfy 1 <= t1 <= t2 <= epochs");
    if (r < 1 || r > t2 - t1)
        throw Error("RankTooLarge", "centered window rank bound is r <= t2 - t1");

    const std::size_t m = t2 - t1 + 1;
    const std::size_t dim = trajectory.param_dim;

    std::vector<double> mean(dim, 0.0);
    for (std::size_t t = t1; t <= t2; ++t)
        for (std::size_t j = 0; j < dim; ++j) mean[j] += trajectory.rows[t][j];
    for (double& x : mean) x /= static_cast<double>(m);

    // Centered window, m x dim.
    std::vector<std::vector<double>> x(m);
    for (std::size_t i = 0; i < m; ++i) {
        x[i].resize(dim);
        for (std::size_t j = 0; j < dim; ++j) x[i][j] = trajectory.rows[t1 + i][j] - mean[j];
    }

    // Gram trick: eigendecompose (X X^T)/(m-1) instead of the dim x dim covariance.
    linalg::DenseMatrix gram(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            const double v = dot(x[i], x[j]) / static_cast<double>(m - 1);
            gram(i, j) = v;
            gram(j, i) = v;
        }

    linalg::EigResult eig = linalg::eig_sym(gram);
    double total = 0.0;
    std::vector<double> clamped(m);
    for (std::size_t k = 0; k < m; ++k) {
        clamped[k] = eig.eigenvalues[k] > 0.0 ? eig.eigenvalues[k] : 0.0;
        total += clamped[k];
    }
    if (total < 1e-20)
        throw Error("InsufficientVariance", "window has (near-)identical checkpoints");

    Subspace out;
    out.mean = std::move(mean);
    out.window = window;
    out.basis.resize(r);
    out.eigenvalues.resize(r);
    out.variance_ratios.resize(r);
    for (std::size_t k = 0; k < r; ++k) {
        out.eigenvalues[k] = clamped[k];
        out.variance_ratios[k] = clamped[k] / total;
        // Map the Gram eigenvector back: u_k ∝ X^T y_k.
        std::vector<double> u(dim, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            const double c = eig.eigenvectors(k, i);
            for (std::size_t j = 0; j < dim; ++j) u[j] += c * x[i][j];
        }
        const double nrm = norm2(u);
        if (nrm < 1e-14)
            throw Error("InsufficientVariance",
                        "requested rank exceeds numerical rank of window");
        for (double& v : u) v /= nrm;
        linalg::canonicalize_sign(u);
        out.basis[k] = std::move(u);
    }
    return out;
}

std::vector<double> project(const Subspace& sub, const std::vector<double>& g) {
    if (g.size() != sub.ambient_dim())
        throw Error("DimensionMismatch", "vector length != subspace ambient dim");
    std::vector<double> out(g.size(), 0.0);
    for (const auto& u : sub.basis) {
        const double c = dot(u, g);
        for (std::size_t j = 0; j < g.size(); ++j) out[j] += c * u[j];
    }
    return out;
}

double leading_alignment(const Subspace& a, const Subspace& b) {
    if (a.ambient_dim() != b.ambient_dim())
        throw Error("DimensionMismatch", "subspaces live in different ambient dims");
    if (a.rank() == 0 || b.rank() == 0)
        throw Error("DimensionMismatch", "empty subspace");
    return dot(a.basis[0], b.basis[0]);
}

void save(const Subspace& sub, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("IoFailure", "cannot open for writing: " + path);
    out << "SUBPT-SUB 1 " << sub.rank() << ' ' << sub.ambient_dim() << '\n';
    out << sub.window.first << ' ' << sub.window.second << '\n';
    out << textio::fmt_row(sub.mean) << '\n';
    for (const auto& row : sub.basis) out << textio::fmt_row(row) << '\n';
    out << textio::fmt_row(sub.eigenvalues) << '\n';
    out << textio::fmt_row(sub.variance_ratios) << '\n';
    if (!out) throw Error("IoFailure", "write failed: " + path);
}

Subspace load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("IoFailure", "cannot open for reading: " + path);

    std::string header;
    if (!std::getline(in, header)) throw Error("BadFormat", "missing header");
    std::istringstream hs(header);
    std::string magic;
    int version = 0;
    std::size_t r = 0, dim = 0;
    if (!(hs >> magic >> version >> r >> dim) || magic != "SUBPT-SUB")
        throw Error("BadFormat", "bad subspace header: " + header);
    if (version != 1) throw Error("BadFormat", "unsupported subspace version");

    Subspace s;
    std::string line;
    if (!std::getline(in, line)) throw Error("BadFormat", "missing window line");
    std::istringstream ws(line);
    if (!(ws >> s.window.first >> s.window.second))
        throw Error("BadFormat", "bad window line");
    if (!std::getline(in, line)) throw Error("BadFormat", "missing mean row");
    s.mean = textio::parse_row(line, dim, "mean row");
    for (std::size_t k = 0; k < r; ++k) {
        if (!std::getline(in, line)) throw Error("BadFormat", "truncated basis");
        s.basis.push_back(textio::parse_row(line, dim, "basis row"));
    }
    if (!std::getline(in, line)) throw Error("BadFormat", "missing eigenvalue line");
    s.eigenvalues = textio::parse_row(line, r, "eigenvalues");
    if (!std::getline(in, line)) throw Error("BadFormat", "missing variance-ratio line");
    s.variance_ratios = textio::parse_row(line, r, "variance ratios");
    return s;
}

}  // namespace subpt::sub
