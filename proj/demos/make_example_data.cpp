// Writes an N x J sample from Model B (y_n ~ N(mu_B, I)) as CSV.
//   make_example_data [N] [seed] > model_b.csv

#include <cstdlib>
#include <iostream>

#include "scope/scope.hpp"

int main(int argc, char** argv) {
    const std::size_t N = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 100;
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 2024;
    const auto mu = scope::sim::model_mu('B');
    scope::dist::Rng rng(seed);
    for (std::size_t j = 0; j < mu.size(); ++j) std::cout << (j ? "," : "") << "s" << j;
    std::cout << '\n';
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t j = 0; j < mu.size(); ++j)
            std::cout << (j ? "," : "") << scope::csv::format_number(mu[j] + rng.normal(), 10);
        std::cout << '\n';
    }
}
