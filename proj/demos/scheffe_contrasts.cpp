// Detecting nonzero contrasts of a linear model with the sphere criterion.

#include <cmath>
#include <iostream>

#include "scope/scope.hpp"

using namespace scope;

int main() {
    const std::size_t N = 500, K = 4;
    dist::Rng rng(3);
    Eigen::MatrixXd X(N, K);
    Eigen::VectorXd beta(K);
    beta << 0.0, 0.3, 0.0, -0.2;
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t k = 0; k < K; ++k) X(i, k) = rng.normal();
    Eigen::VectorXd y = X * beta;
    for (std::size_t i = 0; i < N; ++i) y(i) += rng.normal();

    const auto fit = scheffe::ols_fit(X, y);
    const double q = std::sqrt(dist::chisq_quantile(0.9, double(K - 1)));
    const auto d = scheffe::detect_nonzero_contrasts(fit, X.transpose() * X, q);
    std::cout << "statistic " << d.statistic << " vs q " << q << (d.detected ? ": detected" : ": none") << '\n';
    std::cout << "direction " << d.direction.transpose() << '\n';
    std::cout << "failure prob at beta = 0: " << 1.0 - scheffe::scheffe_zero_cdf(q, K, true) << '\n';
}
