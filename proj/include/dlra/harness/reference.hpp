#pragma once

#include <cstring>
#include <filesystem>
#include <fstream>

#include "dlra/harness/csv.hpp"
#include "dlra/ode/matrix_ode.hpp"
#include "dlra/ode/solvers.hpp"

namespace dlra {

namespace detail {

inline constexpr char kReferenceMagic[8] = {'D', 'L', 'R', 'A',
                                            'R', 'E', 'F', '1'};

struct ReferenceHeader {
  char magic[8];
  std::int64_t rows;
  std::int64_t cols;
  std::int32_t complex_flag;
  std::int32_t pad = 0;
  double final_time;
  double rtol;
  double atol;
};

}  // namespace detail

/// Dense reference integration of dY/dt = F(t, Y) over [t0, t0 + T] with the
/// adaptive solver, cached on disk keyed by a caller-supplied string (plus
/// shape/time/tolerances). `from_cache`, when given, reports a cache hit.
template <typename Scalar>
DenseMatrix<Scalar> reference_solution(const MatrixOde<Scalar>& rhs,
                                       const DenseMatrix<Scalar>& a0,
                                       double t0, double final_time,
                                       double rtol, double atol,
                                       const std::string& cache_dir,
                                       const std::string& cache_key,
                                       bool* from_cache = nullptr) {
  namespace fs = std::filesystem;
  if (from_cache) *from_cache = false;

  const std::string salted = cache_key + "|" + format_double(final_time) +
                             "|" + format_double(rtol) + "|" +
                             format_double(atol);
  const std::uint64_t hash = fnv1a(salted.data(), salted.size());
  char name[32];
  std::snprintf(name, sizeof(name), "ref_%016llx.bin",
                static_cast<unsigned long long>(hash));
  const fs::path file = fs::path(cache_dir) / name;

  const auto count = static_cast<std::size_t>(a0.size());
  if (!cache_dir.empty() && fs::exists(file)) {
    std::ifstream in(file, std::ios::binary);
    detail::ReferenceHeader header{};
    in.read(reinterpret_cast<char*>(&header), sizeof(header));
    if (in && std::memcmp(header.magic, detail::kReferenceMagic, 8) == 0 &&
        header.rows == a0.rows() && header.cols == a0.cols() &&
        header.complex_flag == (is_complex_v<Scalar> ? 1 : 0) &&
        header.final_time == final_time && header.rtol == rtol &&
        header.atol == atol) {
      DenseMatrix<Scalar> cached(a0.rows(), a0.cols());
      in.read(reinterpret_cast<char*>(cached.data()),
              static_cast<std::streamsize>(sizeof(Scalar) * count));
      if (in) {
        if (from_cache) *from_cache = true;
        return cached;
      }
    }
  }

  SolverConfig cfg = SolverConfig::adaptive(rtol, atol);
  cfg.max_steps = 10000000;
  auto f = [&rhs](double t, const DenseMatrix<Scalar>& y) {
    return rhs.eval_full(t, y);
  };
  DenseMatrix<Scalar> result =
      integrate(f, a0, t0, t0 + final_time, cfg);

  if (!cache_dir.empty()) {
    fs::create_directories(cache_dir);
    std::ofstream out(file, std::ios::binary);
    detail::ReferenceHeader header{};
    std::memcpy(header.magic, detail::kReferenceMagic, 8);
    header.rows = a0.rows();
    header.cols = a0.cols();
    header.complex_flag = is_complex_v<Scalar> ? 1 : 0;
    header.final_time = final_time;
    header.rtol = rtol;
    header.atol = atol;
    out.write(reinterpret_cast<const char*>(&header), sizeof(header));
    out.write(reinterpret_cast<const char*>(result.data()),
              static_cast<std::streamsize>(sizeof(Scalar) * count));
  }
  return result;
}

}  // namespace dlra
