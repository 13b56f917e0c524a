// Running maxima of iid N(0, Sigma) vectors under the l2 norm, printed next
// to sqrt(2 L n).

#include <cstdio>

#include "gauss_extrema.hpp"

using namespace gauss_extrema;

int main() {
  const GaussianMeasure m(Matrix::from_rows({{1.0, 0.5}, {0.5, 1.0}}), "equicorrelated");
  const auto q = NormSpec::l2(2);
  const auto w = extremal_witness(m, q);
  std::printf("Gamma = %.6f (primal sweep %.6f)\n", w.gamma, primal_gamma(m, q, 100000));

  const std::vector<std::uint64_t> cps = {10, 100, 1000, 10000, 100000};
  auto stream = derive_stream(42, 0);
  const auto run = iid_maxima(m, q, w.gamma, w.f0, cps, stream);
  std::printf("%8s %10s %10s %10s\n", "n", "M_n", "sqrt2Ln", "signed");
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const auto& c = run.norm.checkpoints[i];
    std::printf("%8llu %10.4f %10.4f %10.4f\n", static_cast<unsigned long long>(c.n), c.max_value,
                sqrt_2l(static_cast<double>(c.n)), run.signed_max.checkpoints[i].max_value);
  }
}
