#pragma once

#include <Eigen/Sparse>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dlra/ode/matrix_ode.hpp"

namespace dlra {

/// Projections of the constant sparse factors onto a fixed basis pair,
/// immutable after construction and keyed by basis fingerprints.
template <typename Scalar>
struct ProjectedFactors {
  std::uint64_t u_fingerprint = 0;
  std::uint64_t v_fingerprint = 0;
  std::vector<DenseMatrix<Scalar>> left;   // U^H C_l U
  std::vector<DenseMatrix<Scalar>> right;  // V^H D_l V
  DenseMatrix<Scalar> source;              // U^H G0 V
};

/// Structured right-hand side F(t, Y) = sum_l coeff_l(t) C_l Y D_l + G0 with
/// sparse row-compressed factors and a low-rank constant source
/// G0 = sum_k a_k b_k^H. Projected evaluations contract against the small
/// projected factors instead of forming dense m x n intermediates.
/// Multiply-accumulate counts are tracked for cost-model validation.
template <typename Scalar>
class SumFactorRhs final : public MatrixOde<Scalar> {
 public:
  using Mat = DenseMatrix<Scalar>;
  using Vec = DenseVector<Scalar>;
  using Sparse = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;
  using Coeff = std::function<Scalar(double)>;
  using typename MatrixOde<Scalar>::RhsFn;

  struct Term {
    Sparse left;
    Sparse right;
    Coeff coeff;           // empty: constant 1
    std::string coeff_id;  // label for serialization/diagnostics
  };

  SumFactorRhs(Index rows, Index cols) : rows_(rows), cols_(cols) {
    DLRA_REQUIRE(rows >= 1 && cols >= 1, "sum_factor: bad dimensions");
  }

  // the MAC counter is carried over by value
  SumFactorRhs(const SumFactorRhs& other)
      : rows_(other.rows_),
        cols_(other.cols_),
        terms_(other.terms_),
        sources_(other.sources_),
        macs_(other.mac_count()) {}
  SumFactorRhs(SumFactorRhs&& other) noexcept
      : rows_(other.rows_),
        cols_(other.cols_),
        terms_(std::move(other.terms_)),
        sources_(std::move(other.sources_)),
        macs_(other.mac_count()) {}
  SumFactorRhs& operator=(const SumFactorRhs& other) {
    rows_ = other.rows_;
    cols_ = other.cols_;
    terms_ = other.terms_;
    sources_ = other.sources_;
    macs_.store(other.mac_count(), std::memory_order_relaxed);
    return *this;
  }
  SumFactorRhs& operator=(SumFactorRhs&& other) noexcept {
    rows_ = other.rows_;
    cols_ = other.cols_;
    terms_ = std::move(other.terms_);
    sources_ = std::move(other.sources_);
    macs_.store(other.mac_count(), std::memory_order_relaxed);
    return *this;
  }

  void add_term(Sparse left, Sparse right, Coeff coeff = {},
                std::string coeff_id = {}) {
    DLRA_REQUIRE(left.rows() == rows_ && left.cols() == rows_,
                 "sum_factor: left factor must be rows x rows");
    DLRA_REQUIRE(right.rows() == cols_ && right.cols() == cols_,
                 "sum_factor: right factor must be cols x cols");
    left.makeCompressed();
    right.makeCompressed();
    terms_.push_back(
        Term{std::move(left), std::move(right), std::move(coeff),
             std::move(coeff_id)});
  }

  /// Adds the rank-one constant source a b^H.
  void add_source(Vec a, Vec b) {
    DLRA_REQUIRE(a.size() == rows_ && b.size() == cols_,
                 "sum_factor: source shape mismatch");
    sources_.emplace_back(std::move(a), std::move(b));
  }

  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  std::size_t term_count() const { return terms_.size(); }
  const Term& term(std::size_t l) const { return terms_[l]; }
  bool time_dependent() const {
    for (const auto& t : terms_)
      if (t.coeff) return true;
    return false;
  }

  // measured sparsity (entries per row, averaged)
  double left_entries_per_row(std::size_t l) const {
    return static_cast<double>(terms_[l].left.nonZeros()) /
           static_cast<double>(rows_);
  }
  double right_entries_per_row(std::size_t l) const {
    return static_cast<double>(terms_[l].right.nonZeros()) /
           static_cast<double>(cols_);
  }

  std::uint64_t mac_count() const {
    return macs_.load(std::memory_order_relaxed);
  }
  void reset_mac_count() { macs_.store(0, std::memory_order_relaxed); }

  Mat eval_full(double t, const Mat& y) const override {
    DLRA_REQUIRE(y.rows() == rows_ && y.cols() == cols_,
                 "eval_full: shape mismatch");
    Mat out = Mat::Zero(rows_, cols_);
    for (const auto& term : terms_) {
      Mat cy = term.left * y;
      count(static_cast<std::uint64_t>(term.left.nonZeros()) *
            static_cast<std::uint64_t>(cols_));
      Mat cyd = cy * term.right;
      count(static_cast<std::uint64_t>(term.right.nonZeros()) *
            static_cast<std::uint64_t>(rows_));
      out.noalias() += coeff_at(term, t) * cyd;
    }
    for (const auto& [a, b] : sources_) {
      out.noalias() += a * b.adjoint();
      count(static_cast<std::uint64_t>(rows_) *
            static_cast<std::uint64_t>(cols_));
    }
    DLRA_CHECK_NUMERIC(out.allFinite(), "eval_full: non-finite result");
    return out;
  }

  Mat eval_K(double t, const Mat& k, const Mat& v_basis) const override {
    DLRA_REQUIRE(k.rows() == rows_ && v_basis.rows() == cols_ &&
                     k.cols() == v_basis.cols(),
                 "eval_K: shape mismatch");
    const Index w = v_basis.cols();
    Mat out = Mat::Zero(rows_, w);
    for (const auto& term : terms_) {
      Mat dv = project_right(term.right, v_basis);
      Mat kd = k * dv;
      count(static_cast<std::uint64_t>(rows_) * static_cast<std::uint64_t>(w) *
            static_cast<std::uint64_t>(w));
      Mat ckd = term.left * kd;
      count(static_cast<std::uint64_t>(term.left.nonZeros()) *
            static_cast<std::uint64_t>(w));
      out.noalias() += coeff_at(term, t) * ckd;
    }
    out.noalias() += source_times_v(v_basis);
    return out;
  }

  Mat eval_L(double t, const Mat& l, const Mat& u_basis) const override {
    DLRA_REQUIRE(l.rows() == cols_ && u_basis.rows() == rows_ &&
                     l.cols() == u_basis.cols(),
                 "eval_L: shape mismatch");
    const Index w = u_basis.cols();
    Mat out = Mat::Zero(cols_, w);
    for (const auto& term : terms_) {
      Mat cu = project_left(term.left, u_basis);
      Mat lc = l * cu.adjoint();
      count(static_cast<std::uint64_t>(cols_) * static_cast<std::uint64_t>(w) *
            static_cast<std::uint64_t>(w));
      Mat dlc = term.right.adjoint() * lc;
      count(static_cast<std::uint64_t>(term.right.nonZeros()) *
            static_cast<std::uint64_t>(w));
      out.noalias() += conj_coeff(coeff_at(term, t)) * dlc;
    }
    out.noalias() += source_adjoint_times_u(u_basis);
    return out;
  }

  Mat eval_S(double t, const Mat& s, const Mat& u_basis,
             const Mat& v_basis) const override {
    DLRA_REQUIRE(u_basis.rows() == rows_ && v_basis.rows() == cols_ &&
                     s.rows() == u_basis.cols() && s.cols() == v_basis.cols(),
                 "eval_S: shape mismatch");
    Mat out = Mat::Zero(s.rows(), s.cols());
    for (const auto& term : terms_) {
      Mat cu = project_left(term.left, u_basis);
      Mat dv = project_right(term.right, v_basis);
      out.noalias() += coeff_at(term, t) * contract_small(cu, s, dv);
    }
    out.noalias() += projected_source(u_basis, v_basis);
    return out;
  }

  Mat eval_bilinear(double t, const Mat& yu, const Mat& ys, const Mat& yv,
                    const Mat& p_left, const Mat& p_right) const override {
    Mat out = Mat::Zero(p_left.cols(), p_right.cols());
    for (const auto& term : terms_) {
      Mat cu = term.left * yu;
      count(static_cast<std::uint64_t>(term.left.nonZeros()) *
            static_cast<std::uint64_t>(yu.cols()));
      Mat pcu = p_left.adjoint() * cu;
      count(static_cast<std::uint64_t>(p_left.cols()) *
            static_cast<std::uint64_t>(rows_) *
            static_cast<std::uint64_t>(yu.cols()));
      Mat dp = term.right * p_right;
      count(static_cast<std::uint64_t>(term.right.nonZeros()) *
            static_cast<std::uint64_t>(p_right.cols()));
      Mat vdp = yv.adjoint() * dp;
      count(static_cast<std::uint64_t>(yv.cols()) *
            static_cast<std::uint64_t>(cols_) *
            static_cast<std::uint64_t>(p_right.cols()));
      out.noalias() += coeff_at(term, t) * contract_small(pcu, ys, vdp);
    }
    for (const auto& [a, b] : sources_) {
      Mat pa = p_left.adjoint() * a;
      Mat bp = b.adjoint() * p_right;
      out.noalias() += pa * bp;
      count(static_cast<std::uint64_t>(rows_ * p_left.cols() +
                                       cols_ * p_right.cols() +
                                       p_left.cols() * p_right.cols()));
    }
    return out;
  }

  /// Projects all constant factors onto the given basis pair. Refuses when
  /// any term declares a time-dependent coefficient.
  ProjectedFactors<Scalar> precompute_projected_factors(
      const Mat& u_basis, const Mat& v_basis) const {
    DLRA_REQUIRE(!time_dependent(),
                 "precompute_projected_factors: time-dependent factors "
                 "cannot be cached");
    ProjectedFactors<Scalar> cache;
    cache.u_fingerprint = fingerprint(u_basis);
    cache.v_fingerprint = fingerprint(v_basis);
    cache.left.reserve(terms_.size());
    cache.right.reserve(terms_.size());
    for (const auto& term : terms_) {
      cache.left.push_back(project_left(term.left, u_basis));
      cache.right.push_back(project_right(term.right, v_basis));
    }
    cache.source = projected_source(u_basis, v_basis);
    return cache;
  }

  /// Galerkin evaluation reusing a projected-factor cache. The bases must be
  /// the ones the cache was built from; anything else is a stale-cache
  /// contract violation.
  Mat eval_s_cached(double t, const Mat& s, const Mat& u_basis,
                    const Mat& v_basis,
                    const ProjectedFactors<Scalar>& cache) const {
    (void)t;
    if (fingerprint(u_basis) != cache.u_fingerprint ||
        fingerprint(v_basis) != cache.v_fingerprint) {
      throw ContractViolation(
          "eval_s_cached: basis fingerprint mismatch (stale cache)");
    }
    return eval_s_from_cache(s, cache);
  }

  // Substep closures with per-step projected factors baked in. Scalar
  // coefficients are applied per evaluation, so these stay valid for
  // time-dependent coefficients as well.
  RhsFn k_step_rhs(Mat v_basis) const override {
    std::vector<Mat> right;
    right.reserve(terms_.size());
    for (const auto& term : terms_)
      right.push_back(project_right(term.right, v_basis));
    Mat src = source_times_v(v_basis);
    return [this, right = std::move(right), src = std::move(src)](
               double t, const Mat& k) {
      Mat out = src.size() > 0 ? src : Mat::Zero(rows_, k.cols());
      for (std::size_t l = 0; l < terms_.size(); ++l) {
        Mat kd = k * right[l];
        count(static_cast<std::uint64_t>(k.rows() * k.cols() * k.cols()));
        Mat ckd = terms_[l].left * kd;
        count(static_cast<std::uint64_t>(terms_[l].left.nonZeros()) *
              static_cast<std::uint64_t>(k.cols()));
        out.noalias() += coeff_at(terms_[l], t) * ckd;
      }
      return out;
    };
  }

  RhsFn l_step_rhs(Mat u_basis) const override {
    std::vector<Mat> left;
    left.reserve(terms_.size());
    for (const auto& term : terms_)
      left.push_back(project_left(term.left, u_basis));
    Mat src = source_adjoint_times_u(u_basis);
    return [this, left = std::move(left), src = std::move(src)](
               double t, const Mat& l) {
      Mat out = src.size() > 0 ? src : Mat::Zero(cols_, l.cols());
      for (std::size_t idx = 0; idx < terms_.size(); ++idx) {
        Mat lc = l * left[idx].adjoint();
        count(static_cast<std::uint64_t>(l.rows() * l.cols() * l.cols()));
        Mat dlc = terms_[idx].right.adjoint() * lc;
        count(static_cast<std::uint64_t>(terms_[idx].right.nonZeros()) *
              static_cast<std::uint64_t>(l.cols()));
        out.noalias() += conj_coeff(coeff_at(terms_[idx], t)) * dlc;
      }
      return out;
    };
  }

  RhsFn s_step_rhs(Mat u_basis, Mat v_basis) const override {
    ProjectedFactors<Scalar> cache;
    for (const auto& term : terms_) {
      cache.left.push_back(project_left(term.left, u_basis));
      cache.right.push_back(project_right(term.right, v_basis));
    }
    cache.source = projected_source(u_basis, v_basis);
    return [this, cache = std::move(cache)](double t, const Mat& s) {
      Mat out = Mat::Zero(s.rows(), s.cols());
      for (std::size_t l = 0; l < cache.left.size(); ++l) {
        out.noalias() +=
            coeff_at(terms_[l], t) * contract_small(cache.left[l], s,
                                                    cache.right[l]);
      }
      if (cache.source.size() > 0) out.noalias() += cache.source;
      return out;
    };
  }

 private:
  static Scalar conj_coeff(Scalar c) {
    if constexpr (is_complex_v<Scalar>) return std::conj(c);
    else return c;
  }

  static Scalar coeff_at(const Term& term, double t) {
    return term.coeff ? term.coeff(t) : Scalar(1);
  }

  void count(std::uint64_t n) const {
    macs_.fetch_add(n, std::memory_order_relaxed);
  }

  Mat project_left(const Sparse& c, const Mat& u_basis) const {
    Mat cu = c * u_basis;
    count(static_cast<std::uint64_t>(c.nonZeros()) *
          static_cast<std::uint64_t>(u_basis.cols()));
    Mat out = u_basis.adjoint() * cu;
    count(static_cast<std::uint64_t>(u_basis.cols()) *
          static_cast<std::uint64_t>(u_basis.rows()) *
          static_cast<std::uint64_t>(u_basis.cols()));
    return out;
  }

  Mat project_right(const Sparse& d, const Mat& v_basis) const {
    Mat dv = d * v_basis;
    count(static_cast<std::uint64_t>(d.nonZeros()) *
          static_cast<std::uint64_t>(v_basis.cols()));
    Mat out = v_basis.adjoint() * dv;
    count(static_cast<std::uint64_t>(v_basis.cols()) *
          static_cast<std::uint64_t>(v_basis.rows()) *
          static_cast<std::uint64_t>(v_basis.cols()));
    return out;
  }

  Mat contract_small(const Mat& a, const Mat& s, const Mat& b) const {
    Mat as = a * s;
    count(static_cast<std::uint64_t>(a.rows() * a.cols() * s.cols()));
    Mat asb = as * b;
    count(static_cast<std::uint64_t>(as.rows() * as.cols() * b.cols()));
    return asb;
  }

  Mat source_times_v(const Mat& v_basis) const {
    Mat out = Mat::Zero(rows_, v_basis.cols());
    for (const auto& [a, b] : sources_) {
      Mat bv = b.adjoint() * v_basis;  // 1 x w
      out.noalias() += a * bv;
      count(static_cast<std::uint64_t>((cols_ + rows_) * v_basis.cols()));
    }
    return out;
  }

  Mat source_adjoint_times_u(const Mat& u_basis) const {
    Mat out = Mat::Zero(cols_, u_basis.cols());
    for (const auto& [a, b] : sources_) {
      Mat au = a.adjoint() * u_basis;  // 1 x w
      out.noalias() += b * au;
      count(static_cast<std::uint64_t>((rows_ + cols_) * u_basis.cols()));
    }
    return out;
  }

  Mat projected_source(const Mat& u_basis, const Mat& v_basis) const {
    Mat out = Mat::Zero(u_basis.cols(), v_basis.cols());
    for (const auto& [a, b] : sources_) {
      Mat ua = u_basis.adjoint() * a;
      Mat vb = v_basis.adjoint() * b;
      out.noalias() += ua * vb.adjoint();
      count(static_cast<std::uint64_t>(rows_ * u_basis.cols() +
                                       cols_ * v_basis.cols() +
                                       u_basis.cols() * v_basis.cols()));
    }
    return out;
  }

  Mat eval_s_from_cache(const Mat& s,
                        const ProjectedFactors<Scalar>& cache) const {
    Mat out = Mat::Zero(s.rows(), s.cols());
    for (std::size_t l = 0; l < cache.left.size(); ++l)
      out.noalias() += contract_small(cache.left[l], s, cache.right[l]);
    if (cache.source.size() > 0) out.noalias() += cache.source;
    return out;
  }

  Index rows_;
  Index cols_;
  std::vector<Term> terms_;
  std::vector<std::pair<Vec, Vec>> sources_;
  mutable std::atomic<std::uint64_t> macs_{0};
};

template <typename Scalar>
typename SumFactorRhs<Scalar>::Sparse sparse_identity(Index n) {
  typename SumFactorRhs<Scalar>::Sparse id(n, n);
  id.setIdentity();
  return id;
}

template <typename Scalar>
typename SumFactorRhs<Scalar>::Sparse sparse_diagonal(
    const DenseVector<Scalar>& d) {
  using Triplet = Eigen::Triplet<Scalar>;
  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(d.size()));
  for (Index i = 0; i < d.size(); ++i)
    if (d(i) != Scalar(0)) trips.emplace_back(i, i, d(i));
  typename SumFactorRhs<Scalar>::Sparse m(d.size(), d.size());
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

namespace detail {

template <typename Scalar>
Eigen::SparseMatrix<Scalar, Eigen::RowMajor> read_coordinate_file(
    const std::filesystem::path& path, Index rows, Index cols) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open factor file: " + path.string());
  std::vector<Eigen::Triplet<Scalar>> trips;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream iss(line);
    Index i = 0, j = 0;
    Scalar value{};
    if (!(iss >> i >> j >> value)) continue;  // blank/comment line
    if (i < 0 || i >= rows || j < 0 || j >= cols)
      throw InvalidInput("factor file index out of range: " + path.string());
    trips.emplace_back(i, j, value);
  }
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

template <typename Scalar>
DenseVector<Scalar> read_vector_file(const std::filesystem::path& path,
                                     Index expected) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open vector file: " + path.string());
  std::vector<Scalar> values;
  Scalar v{};
  while (in >> v) values.push_back(v);
  if (static_cast<Index>(values.size()) != expected)
    throw InvalidInput("vector file has wrong length: " + path.string());
  DenseVector<Scalar> out(expected);
  for (Index i = 0; i < expected; ++i)
    out(i) = values[static_cast<std::size_t>(i)];
  return out;
}

}  // namespace detail

/// Loads a structured RHS from a key-value definition file:
///   rows = <m>
///   cols = <n>
///   term = <left.coo> <right.coo> [coefficient-id]
///   source = <a.vec> <b.vec>
/// Factor files hold "row col value" triplets (0-based); vector files one
/// value per line. Relative paths resolve against the definition file.
/// Coefficient identifiers are looked up in `coeffs`.
template <typename Scalar = double>
SumFactorRhs<Scalar> load_sum_factor_rhs(
    const std::string& definition_path,
    const std::map<std::string, typename SumFactorRhs<Scalar>::Coeff>&
        coeffs = {}) {
  namespace fs = std::filesystem;
  std::ifstream in(definition_path);
  if (!in)
    throw InvalidInput("cannot open problem definition: " + definition_path);
  const fs::path base = fs::path(definition_path).parent_path();

  Index rows = 0, cols = 0;
  struct TermSpec {
    std::string left, right, coeff_id;
  };
  std::vector<TermSpec> term_specs;
  std::vector<std::pair<std::string, std::string>> source_specs;

  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::istringstream key_in(line.substr(0, eq));
    std::string key;
    key_in >> key;
    std::istringstream value_in(line.substr(eq + 1));
    if (key == "rows") {
      value_in >> rows;
    } else if (key == "cols") {
      value_in >> cols;
    } else if (key == "term") {
      TermSpec spec;
      if (!(value_in >> spec.left >> spec.right))
        throw InvalidInput("term line needs two factor files");
      value_in >> spec.coeff_id;
      term_specs.push_back(spec);
    } else if (key == "source") {
      std::string a, b;
      if (!(value_in >> a >> b))
        throw InvalidInput("source line needs two vector files");
      source_specs.emplace_back(a, b);
    } else {
      throw InvalidInput("unknown problem definition key: " + key);
    }
  }
  DLRA_REQUIRE(rows >= 1 && cols >= 1,
               "problem definition must set rows and cols");

  SumFactorRhs<Scalar> rhs(rows, cols);
  for (const auto& spec : term_specs) {
    auto left = detail::read_coordinate_file<Scalar>(base / spec.left, rows,
                                                     rows);
    auto right = detail::read_coordinate_file<Scalar>(base / spec.right, cols,
                                                      cols);
    typename SumFactorRhs<Scalar>::Coeff coeff;
    if (!spec.coeff_id.empty()) {
      const auto it = coeffs.find(spec.coeff_id);
      if (it == coeffs.end())
        throw InvalidInput("unknown coefficient id: " + spec.coeff_id);
      coeff = it->second;
    }
    rhs.add_term(std::move(left), std::move(right), std::move(coeff),
                 spec.coeff_id);
  }
  for (const auto& [a_file, b_file] : source_specs) {
    rhs.add_source(detail::read_vector_file<Scalar>(base / a_file, rows),
                   detail::read_vector_file<Scalar>(base / b_file, cols));
  }
  return rhs;
}

}  // namespace dlra
