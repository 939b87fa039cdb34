// SCoPE sets over the zero threshold for a Model B sample, with the
// quantile calibrated on the thickened plug-in preimage.

#include <cmath>
#include <iostream>

#include "scope/scope.hpp"

using namespace scope;

int main() {
    const std::size_t N = 200;
    const Field mu = sim::model_mu('B');
    const std::size_t J = mu.size();
    dist::Rng rng(11);

    Eigen::MatrixXd y(N, J);
    for (std::size_t n = 0; n < N; ++n)
        for (std::size_t j = 0; j < J; ++j) y(n, j) = mu[j] + rng.normal();

    const auto cs = column_stats(y);
    const Field mu_hat(cs.mean), sigma(cs.sd);
    const double tau = 1.0 / std::sqrt(double(N));
    const double df = double(N) - 1;
    const Field zero = Field::constant(J, 0.0);

    const double k = resolve_k(KPolicy::log_over_kappa(3.0), N, J, df);
    const IndexSet pre = plugin_preimage(mu_hat, {zero}, sigma, tau, k, Side::both);
    const auto q = tstat_iid_quantile(pre, pre, 0.1, df);

    const ScopeBands bands(q.q, tau, sigma);
    const auto part = partition3(mu_hat, zero, zero, bands);
    std::cout << "k_N = " << k << ", |preimage| = " << pre.size() << ", q = " << q.q << '\n';
    std::cout << "below 0: " << part.lower.size() << ", above 0: " << part.upper.size()
              << ", undecided: " << part.middle.size() << '\n';
    std::cout << "inclusions hold: " << std::boolalpha
              << scope_event(mu_hat, mu, bands, ThresholdFamily::single(zero)) << '\n';
}
