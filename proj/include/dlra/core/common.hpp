#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>

namespace dlra {

using Index = Eigen::Index;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};
template <typename T>
inline constexpr bool is_complex_v = is_complex<T>::value;

template <typename Scalar>
using real_of_t = typename Eigen::NumTraits<Scalar>::Real;

enum class ScalarField { real_field, complex_field };

template <typename Scalar>
constexpr ScalarField scalar_field() {
  return is_complex_v<Scalar> ? ScalarField::complex_field : ScalarField::real_field;
}

/// Invalid arguments or violated preconditions.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Runtime numerical failure (non-finite values, solver breakdown, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// API misuse detectable at run time (e.g. stale caches).
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

#define DLRA_REQUIRE(cond, msg)            \
  do {                                     \
    if (!(cond)) {                         \
      throw ::dlra::InvalidInput(msg);     \
    }                                      \
  } while (0)

#define DLRA_CHECK_NUMERIC(cond, msg)      \
  do {                                     \
    if (!(cond)) {                         \
      throw ::dlra::NumericalError(msg);   \
    }                                      \
  } while (0)

// FNV-1a over raw bytes; used to key projected-factor caches by their bases.
inline std::uint64_t fnv1a(const void* data, std::size_t nbytes,
                           std::uint64_t h = 1469598103934665603ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < nbytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

template <typename Scalar>
std::uint64_t fingerprint(const DenseMatrix<Scalar>& m) {
  const Index dims[2] = {m.rows(), m.cols()};
  std::uint64_t h = fnv1a(dims, sizeof(dims));
  return fnv1a(m.data(), sizeof(Scalar) * static_cast<std::size_t>(m.size()), h);
}

}  // namespace dlra
