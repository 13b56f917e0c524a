// Spectral radius of a random 4x4 symmetric matrix and the running-maximum
// diagnostic for a short ensemble.

#include <cstdio>
#include <numeric>

#include "gauss_extrema.hpp"

using namespace gauss_extrema;

int main() {
  constexpr std::size_t side = 4;
  const auto gamma = GaussianMeasure::standard(packed_size(side));
  auto stream = derive_stream(3, 0);
  const SymMatrix a = sample_sym_gaussian(side, gamma, stream);
  const Spectrum s = symm_eigen(a);
  std::printf("eigenvalues:");
  for (double v : s.eigenvalues) std::printf(" %.5f", v);
  std::printf("\nradius %.6f, trace %.6f, eigen sum %.6f\n", s.radius(), a.trace(),
              std::accumulate(s.eigenvalues.begin(), s.eigenvalues.end(), 0.0));

  const double big_gamma = dual_sigma(gamma, NormSpec::operator_sym(side));
  std::printf("Gamma(operator norm) = %.6f\n", big_gamma);
  const std::vector<std::uint64_t> cps = {10, 100, 1000};
  std::vector<double> radii;
  for (std::uint64_t k = 0; k < cps.back(); ++k)
    radii.push_back(spectral_radius(sample_sym_gaussian(side, gamma, stream)) / big_gamma);
  for (const auto& c : partial_maxima(radii, cps).checkpoints)
    std::printf("n=%-5llu max r/Gamma = %.4f  centered = %+.4f\n", static_cast<unsigned long long>(c.n), c.max_value,
                c.centered);
}
