#pragma once

// Contrast inference for the Gaussian linear model y ~ N(X beta, xi^2 I).
//
// Contrasts a live on the unit sphere. With u = Xl^{-1/2} beta_hat / (tau xi)
// and v = Xl^{-1/2} beta (Xl the limit matrix), every sphere quantity used
// here reduces to the geometry of u and v, so no direction grid is needed.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "scope/dist.hpp"
#include "scope/error.hpp"
#include "scope/parallel.hpp"

namespace scope::scheffe {

struct LinearModelSpec {
    Eigen::VectorXd beta;
    double xi = 1.0;
    Eigen::MatrixXd limit_matrix;
    double tau = 1.0;

    std::size_t K() const { return static_cast<std::size_t>(beta.size()); }

    void validate() const {
        if (beta.size() == 0) throw ParameterError("LinearModelSpec: empty beta");
        if (limit_matrix.rows() != beta.size() || limit_matrix.cols() != beta.size())
            throw DomainMismatch("LinearModelSpec: limit matrix must be K x K");
        if (!(xi > 0.0) || !(tau > 0.0)) throw ParameterError("LinearModelSpec: xi and tau must be positive");
        if (!limit_matrix.isApprox(limit_matrix.transpose(), 1e-12))
            throw ParameterError("LinearModelSpec: limit matrix must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(limit_matrix);
        if (es.eigenvalues().minCoeff() <= 0.0)
            throw ParameterError("LinearModelSpec: limit matrix must be positive definite");
    }
};

struct OlsFit {
    Eigen::VectorXd beta_hat;
    double s2 = 0.0;
    std::size_t df_resid = 0;
};

/// Least squares via column-pivoted Householder QR; s^2 = RSS / (N - rank).
inline OlsFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw DomainMismatch("ols_fit: X and y disagree in length");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    const auto rank = qr.rank();
    if (rank < X.cols()) throw SingularDesign("ols_fit: design matrix is rank deficient");
    if (X.rows() <= rank) throw SingularDesign("ols_fit: no residual degrees of freedom");
    OlsFit fit;
    fit.beta_hat = qr.solve(y);
    fit.df_resid = static_cast<std::size_t>(X.rows() - rank);
    fit.s2 = (y - X * fit.beta_hat).squaredNorm() / static_cast<double>(fit.df_resid);
    return fit;
}

/// Symmetric inverse square root of a positive definite matrix.
inline Eigen::MatrixXd inverse_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
        throw ParameterError("inverse_sqrt: matrix must be positive definite");
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

/// max over {|x| = 1, a'x = l} of sign * x'w. With `absolute` the first term
/// is |l a'w| / |a|^2.
inline double slice_max(const Eigen::VectorXd& w, const Eigen::VectorXd& a, double l, int sign = +1,
                        bool absolute = false) {
    if (w.size() != a.size()) throw DomainMismatch("slice_max: w and a differ in dimension");
    const double a2 = a.squaredNorm();
    if (!(a2 > 0.0)) throw ParameterError("slice_max: a must be nonzero");
    const double ratio = l * l / a2;
    if (ratio > 1.0 + 1e-12) throw InfeasibleSlice("slice_max: |l| exceeds |a|, slice is empty");
    const double aw = a.dot(w);
    const Eigen::VectorXd perp = w - (aw / a2) * a;
    const double along = absolute ? std::abs(l * aw) / a2 : sign * l * aw / a2;
    return along + std::sqrt(std::max(0.0, 1.0 - ratio)) * perp.norm();
}

/// chi^2(q^2, K - 1 + [beta = 0]).
inline double scheffe_zero_cdf(double q, std::size_t K, bool beta_is_zero) {
    if (!(q >= 0.0)) throw ParameterError("scheffe_zero_cdf: q must be nonnegative");
    const std::size_t k = K - 1 + (beta_is_zero ? 1 : 0);
    if (k == 0) return 1.0;
    return dist::chisq_cdf(q * q, static_cast<double>(k));
}

struct Detection {
    bool detected = false;
    double statistic = 0.0;           // |Xl^{-1/2} beta_hat| / (tau xi)
    Eigen::VectorXd direction;        // maximizing contrast, Xl^{-1} beta_hat normalized
    Eigen::VectorXd whitened_direction; // Xl^{-1/2} beta_hat normalized
};

/// Some contrast lies in L-hat or U-hat at level q iff |Xl^{-1/2} beta_hat| > tau xi q.
inline Detection detect_nonzero_contrasts(const Eigen::VectorXd& beta_hat, const Eigen::MatrixXd& limit_matrix,
                                          double tau, double xi, double q) {
    if (!(q >= 0.0)) throw ParameterError("detect_nonzero_contrasts: q must be nonnegative");
    const Eigen::MatrixXd isq = inverse_sqrt(limit_matrix);
    const Eigen::VectorXd u = isq * beta_hat / (tau * xi);
    Detection d;
    d.statistic = u.norm();
    d.detected = d.statistic > q;
    if (d.statistic > 0.0) {
        d.whitened_direction = u / d.statistic;
        Eigen::VectorXd dir = limit_matrix.ldlt().solve(beta_hat);
        d.direction = dir / dir.norm();
    } else {
        d.whitened_direction = Eigen::VectorXd::Zero(beta_hat.size());
        d.direction = d.whitened_direction;
    }
    return d;
}

/// Estimated-variance version: sqrt(beta_hat' X'X beta_hat) / s > q.
inline Detection detect_nonzero_contrasts(const OlsFit& fit, const Eigen::MatrixXd& XtX, double q) {
    if (!(fit.s2 > 0.0)) throw ParameterError("detect_nonzero_contrasts: s^2 must be positive");
    return detect_nonzero_contrasts(fit.beta_hat, XtX.inverse(), 1.0, std::sqrt(fit.s2), q);
}

struct Interval {
    double lo;
    double hi;
};

/// a' beta_hat -+ s sqrt(F_{1-alpha; K+1, N-K-1} a'(X'X)^{-1}a (K+1)).
inline Interval scheffe_band(const Eigen::VectorXd& a, const OlsFit& fit, const Eigen::MatrixXd& XtX, double alpha,
                             std::size_t K, std::size_t N) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("scheffe_band: alpha must lie in (0,1)");
    if (N <= K + 1) throw ParameterError("scheffe_band: need N > K + 1");
    const double d1 = static_cast<double>(K + 1), d2 = static_cast<double>(N - K - 1);
    const double fq = dist::f_quantile(1.0 - alpha, d1, d2);
    const double center = a.dot(fit.beta_hat);
    const double var = a.dot(XtX.ldlt().solve(a));
    const double half = std::sqrt(fit.s2) * std::sqrt(fq * var * d1);
    return {center - half, center + half};
}

/// The SCoPE event over ({0},{0}) on the sphere holds iff
/// max{b'u : |b| = 1, b'v <= 0} <= q.
inline bool sphere_scope_event(const Eigen::VectorXd& u, const Eigen::VectorXd& v, double q) {
    const double vn = v.norm();
    double worst;
    if (vn == 0.0 || u.dot(v) <= 0.0) {
        worst = u.norm();
    } else {
        const Eigen::VectorXd vhat = v / vn;
        worst = (u - u.dot(vhat) * vhat).norm();
    }
    return worst <= q;
}

inline bool scheffe_scope_event(const Eigen::VectorXd& beta_hat, const LinearModelSpec& spec, double q) {
    const Eigen::MatrixXd isq = inverse_sqrt(spec.limit_matrix);
    return sphere_scope_event(isq * beta_hat / (spec.tau * spec.xi), isq * spec.beta, q);
}

/// Same event evaluated only at the given unit contrasts (rows of
/// `directions`); a finite grid can only miss failures.
inline bool scheffe_scope_event_grid(const Eigen::VectorXd& beta_hat, const LinearModelSpec& spec, double q,
                                     const Eigen::MatrixXd& directions) {
    for (Eigen::Index r = 0; r < directions.rows(); ++r) {
        const Eigen::VectorXd a = directions.row(r).transpose();
        const double mu_hat = a.dot(beta_hat), mu = a.dot(spec.beta);
        const double half = spec.tau * q * spec.xi * std::sqrt(a.dot(spec.limit_matrix * a));
        if (mu_hat < -half && !(mu < 0.0)) return false;
        if (mu_hat > half && !(mu > 0.0)) return false;
    }
    return true;
}

/// n uniform points on the unit sphere in R^K, one per row.
inline Eigen::MatrixXd sample_sphere(dist::Rng& rng, std::size_t K, std::size_t n) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(K));
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        double norm;
        do {
            for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) = rng.normal();
            norm = out.row(i).norm();
        } while (norm == 0.0);
        out.row(i) /= norm;
    }
    return out;
}

/// n uniform points on the slice {|x| = 1, a'x = l}.
inline Eigen::MatrixXd sample_slice(dist::Rng& rng, const Eigen::VectorXd& a, double l, std::size_t n) {
    const auto K = a.size();
    const double a2 = a.squaredNorm();
    if (l * l > a2) throw InfeasibleSlice("sample_slice: |l| exceeds |a|");
    const Eigen::VectorXd center = (l / a2) * a;
    const double radius = std::sqrt(std::max(0.0, 1.0 - l * l / a2));
    const Eigen::VectorXd ahat = a / std::sqrt(a2);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(n), K);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        Eigen::VectorXd z(K);
        double norm;
        do {
            for (Eigen::Index j = 0; j < K; ++j) z(j) = rng.normal();
            z -= z.dot(ahat) * ahat;
            norm = z.norm();
        } while (norm < 1e-6 * std::sqrt(static_cast<double>(K)));
        z /= norm;
        z -= z.dot(ahat) * ahat; // second pass removes the round-off left along a
        z.normalize();
        out.row(i) = (center + radius * z).transpose();
    }
    return out;
}

enum class ExtractMode { single_level, interval };

struct McProbability {
    double p;
    double se;
};

/// Limit law of the SCoPE event over {-Delta},{Delta} (single_level) or all
/// l in [-Delta, Delta] (interval) for limit matrix I.
inline McProbability extract_limit_cdf(double q, std::size_t K, double Delta, double beta_norm, std::size_t reps,
                                       std::uint64_t seed, ExtractMode mode) {
    if (!(Delta >= 0.0)) throw ParameterError("extract_limit_cdf: Delta must be nonnegative");
    if (!(beta_norm > 0.0)) throw ParameterError("extract_limit_cdf: |beta| must be positive");
    if (K < 1) throw ParameterError("extract_limit_cdf: K must be positive");
    if (Delta > beta_norm) {
        if (mode == ExtractMode::single_level) return {1.0, 0.0};
        return {q <= 0.0 ? 0.0 : dist::chisq_cdf(q * q, static_cast<double>(K)), 0.0};
    }
    if (reps == 0) throw ParameterError("extract_limit_cdf: reps must be positive");
    const double lam = Delta / beta_norm;
    const double rest = std::sqrt(std::max(0.0, 1.0 - lam * lam));
    std::vector<char> hit(reps);
    parallel_for(reps, [&](std::size_t r) {
        dist::Rng rng(dist::derive_seed(seed, r));
        // Coordinates aligned with beta: z = beta'eps/|beta|, perp = |P_E eps|.
        const double z = rng.normal();
        double perp2 = 0.0;
        for (std::size_t k = 1; k < K; ++k) {
            const double e = rng.normal();
            perp2 += e * e;
        }
        const double perp = std::sqrt(perp2);
        double stat;
        if (mode == ExtractMode::single_level) {
            stat = lam * z + rest * perp;
        } else {
            const double norm = std::sqrt(z * z + perp2);
            stat = lam * norm < std::abs(z) ? lam * std::abs(z) + rest * perp : norm;
        }
        hit[r] = stat <= q ? 1 : 0;
    });
    double count = 0.0;
    for (char h : hit) count += h;
    const double p = count / static_cast<double>(reps);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(reps))};
}

struct CoverageResult {
    double empirical;
    double theoretical;
    std::size_t reps;
};

/// Simulates y = X beta + xi eps with a fixed N x K random design, limit matrix
/// N (X'X)^{-1}, tau = N^{-1/2}, and reports how often the sphere SCoPE event
/// over ({0},{0}) holds at q = sqrt(chi^2_{1-alpha, K-1}).
inline CoverageResult scheffe_coverage_check(const Eigen::VectorXd& beta, double xi, std::size_t N, double alpha,
                                             std::size_t reps, std::uint64_t seed) {
    const auto K = static_cast<std::size_t>(beta.size());
    if (K < 2) throw ParameterError("scheffe_coverage_check: need K >= 2");
    dist::Rng design_rng(dist::derive_seed(seed, 0));
    Eigen::MatrixXd X(static_cast<Eigen::Index>(N), beta.size());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = design_rng.normal();
    const Eigen::MatrixXd XtX = X.transpose() * X;
    LinearModelSpec spec;
    spec.beta = beta;
    spec.xi = xi;
    spec.tau = 1.0 / std::sqrt(static_cast<double>(N));
    spec.limit_matrix = static_cast<double>(N) * XtX.inverse();
    spec.limit_matrix = 0.5 * (spec.limit_matrix + spec.limit_matrix.transpose()).eval();
    const double q = std::sqrt(dist::chisq_quantile(1.0 - alpha, static_cast<double>(K - 1)));
    const bool zero = beta.isZero(0.0);
    const Eigen::VectorXd mean = X * beta;
    std::vector<char> ok(reps);
    parallel_for(reps, [&](std::size_t r) {
        dist::Rng rng(dist::derive_seed(dist::derive_seed(seed, 1), r));
        Eigen::VectorXd y(static_cast<Eigen::Index>(N));
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = mean(i) + xi * rng.normal();
        const auto fit = ols_fit(X, y);
        ok[r] = scheffe_scope_event(fit.beta_hat, spec, q) ? 1 : 0;
    });
    double count = 0.0;
    for (char c : ok) count += c;
    return {count / static_cast<double>(reps), scheffe_zero_cdf(q, K, zero), reps};
}

} // namespace scope::scheffe
