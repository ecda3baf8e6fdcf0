#include "rpc/rng.hpp"

#include <cmath>

namespace rpc {

double RandomStream::gaussian() {
  // Box-Muller; u1 is kept away from 0 so the log is finite.
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Eigen::VectorXd RandomStream::unit_vector(int dim) {
  Eigen::VectorXd v(dim);
  double norm = 0.0;
  // Redraw in the (measure-zero) case of a zero vector.
  do {
    for (int i = 0; i < dim; ++i) v[i] = gaussian();
    norm = v.norm();
  } while (norm < 1e-300);
  return v / norm;
}

}  // namespace rpc
