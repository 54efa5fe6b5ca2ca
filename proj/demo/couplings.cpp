// Walks through the library: a verdict, the coupling behind it, a check of
// the constant sum, a non-mixability certificate and the RA oracle.

#include "jmix/couplings.hpp"
#include "jmix/io.hpp"
#include "jmix/mixability.hpp"
#include "jmix/oracle.hpp"

#include <iostream>

int main() {
  using namespace jmix;

  // Student-t marginals with scales (2, 1.5, 1) satisfy 4.5 >= 2 * 2.
  const std::vector<double> mu{1.0, 2.0, 3.0};
  const std::vector<double> sigma{2.0, 1.5, 1.0};
  const auto t3 = CharacteristicGenerator::student_t(3.0);
  const auto verdict = jm_verdict_elliptical(sigma, mu, t3);
  std::cout << "verdict: " << verdict_to_json(verdict).dump() << "\n";

  const auto batch = sample_jm_elliptical(mu, sigma, t3, 10'000, 7);
  std::cout << "first draw:";
  for (Eigen::Index j = 0; j < batch.cols(); ++j) std::cout << ' ' << batch.draws(0, j);
  std::cout << "  (sum " << batch.draws.row(0).sum() << ")\n";

  const auto rep = verify_constant_sum(batch, *verdict.joint_center, 1e-8);
  std::cout << "constant sum: " << constant_sum_report_to_json(rep).dump() << "\n";

  // Three copies of the bimodal density 3x^2/2 on [-1, 1] cannot be mixed.
  const auto bimodal = family::bimodal_power(1.0, 1);
  const std::vector<UnivariateFamily> three(3, bimodal);
  const auto no = not_jm_bounded_symmetric(three, 1.0);
  std::cout << "bimodal: " << verdict_to_json(no).dump() << "\n";

  // The rearrangement algorithm agrees: its best spread stays far from zero,
  // while three uniforms rearrange to a nearly constant sum.
  const auto ra_bimodal = ra_minimize(discretize(three, 99));
  const auto ra_uniform = ra_minimize(discretize(std::vector<UnivariateFamily>(3, family::uniform(-1.0, 1.0)), 99));
  std::cout << "RA stddev bimodal " << ra_bimodal.row_sum_stddev << ", uniform " << ra_uniform.row_sum_stddev
            << "\n";
  return 0;
}
