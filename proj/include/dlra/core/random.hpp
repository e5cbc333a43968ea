#pragma once

#include <cmath>
#include <random>

#include "dlra/core/common.hpp"

namespace dlra {

// Gaussian sampling on top of mt19937_64 with a hand-rolled Box-Muller
// transform. std::normal_distribution output is implementation-defined;
// this keeps seeded runs reproducible across standard libraries.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : engine_(seed) {}

  // uniform in (0, 1]
  double uniform() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  template <typename Scalar>
  Scalar sample() {
    if constexpr (is_complex_v<Scalar>) {
      const double re = normal();
      const double im = normal();
      return Scalar(re * M_SQRT1_2, im * M_SQRT1_2);
    } else {
      return static_cast<Scalar>(normal());
    }
  }

  template <typename Scalar>
  DenseMatrix<Scalar> matrix(Index rows, Index cols) {
    DenseMatrix<Scalar> m(rows, cols);
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) m(i, j) = sample<Scalar>();
    return m;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace dlra
