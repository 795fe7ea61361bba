#ifndef DEGCRAFT_GAUSSDIST_HPP
#define DEGCRAFT_GAUSSDIST_HPP

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "degcraft/errors.hpp"
#include "degcraft/featext.hpp"

namespace degcraft {

struct GaussianStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    int n = 0;

    int dim() const { return static_cast<int>(mean.size()); }
};

// mu = column means, Sigma = unbiased sample covariance (divisor n-1),
// symmetrized, plus ridge * (tr(Sigma)/c) * I. The ridge keeps the n < c
// regime (e.g. n=100 samples of c=64 features) well conditioned.
inline GaussianStats fit_gaussian(const FeatureMatrix& fm, double ridge = 1e-6) {
    if (fm.rows < 2)
        throw validation_error("fit_gaussian: need at least 2 samples");
    for (double v : fm.values)
        if (!std::isfinite(v))
            throw validation_error("fit_gaussian: non-finite feature value");
    const int n = fm.rows;
    const int c = fm.cols;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        x(fm.values.data(), n, c);
    GaussianStats stats;
    stats.n = n;
    stats.mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - stats.mean.transpose();
    stats.cov = centered.transpose() * centered / static_cast<double>(n - 1);
    stats.cov = 0.5 * (stats.cov + stats.cov.transpose());
    stats.cov += ridge * (stats.cov.trace() / c) *
                 Eigen::MatrixXd::Identity(c, c);
    return stats;
}

// Symmetric PSD square root by eigendecomposition; negative numerical
// eigenvalues are clamped to zero.
inline Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols())
        throw validation_error("sqrtm_psd: matrix must be square");
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    if (!sym.allFinite())
        throw validation_error("sqrtm_psd: non-finite input");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success)
        throw validation_error("sqrtm_psd: eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        ev[i] = ev[i] > 0.0 ? std::sqrt(ev[i]) : 0.0;
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// Squared Frechet (2-Wasserstein) distance between Gaussians:
//   |mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2).
// Tiny negative results from rounding are clamped to zero.
inline double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
    if (a.dim() != b.dim())
        throw validation_error("frechet_distance: dimension mismatch (" +
                               std::to_string(a.dim()) + " vs " +
                               std::to_string(b.dim()) + ")");
    const Eigen::MatrixXd root_a = sqrtm_psd(a.cov);
    Eigen::MatrixXd inner = root_a * b.cov * root_a;
    inner = 0.5 * (inner + inner.transpose());
    const Eigen::MatrixXd cross = sqrtm_psd(inner);
    const double d = (a.mean - b.mean).squaredNorm() + a.cov.trace() +
                     b.cov.trace() - 2.0 * cross.trace();
    if (d < 0.0 && d >= -1e-6) return 0.0;
    return d;
}

} // namespace degcraft

#endif
