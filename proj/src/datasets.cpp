#include "ipalm/datasets.hpp"

#include <zlib.h>

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <vector>

namespace ipalm {

LabeledDataset parse_libsvm(std::istream& in, Index n_features_override) {
  std::vector<Real> labels;
  std::vector<SparseMatrix::Triplet> entries;
  Index max_col = 0;
  Index row = 0;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // strip comments and blank lines
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    Real label;
    if (!(ls >> label)) {
      if (ls.eof()) continue;  // blank line
      throw std::invalid_argument("libsvm parse error at line " +
                                  std::to_string(line_no) + ": bad label");
    }
    labels.push_back(label);
    std::string tok;
    Index prev_idx = 0;
    while (ls >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw std::invalid_argument("libsvm parse error at line " +
                                    std::to_string(line_no) +
                                    ": missing ':' in '" + tok + "'");
      Index idx = 0;
      Real val = 0;
      try {
        idx = static_cast<Index>(std::stoll(tok.substr(0, colon)));
        val = std::stod(tok.substr(colon + 1));
      } catch (const std::exception&) {
        throw std::invalid_argument("libsvm parse error at line " +
                                    std::to_string(line_no) + ": bad token '" +
                                    tok + "'");
      }
      if (idx <= 0)
        throw std::invalid_argument("libsvm parse error at line " +
                                    std::to_string(line_no) +
                                    ": indices are 1-based");
      if (idx <= prev_idx)
        throw std::invalid_argument("libsvm parse error at line " +
                                    std::to_string(line_no) +
                                    ": indices must be strictly increasing");
      if (!std::isfinite(val))
        throw std::invalid_argument("libsvm parse error at line " +
                                    std::to_string(line_no) +
                                    ": non-finite value");
      prev_idx = idx;
      max_col = std::max(max_col, idx);
      entries.push_back({row, idx - 1, val});
    }
    ++row;
  }
  Index n_cols = n_features_override > 0 ? n_features_override : max_col;
  if (n_features_override > 0 && max_col > n_features_override)
    throw std::invalid_argument("libsvm: feature index exceeds override");
  LabeledDataset out;
  out.X = SparseMatrix::from_triplets(row, n_cols, std::move(entries));
  out.labels = labels.empty() ? Vector()
                              : Vector(Eigen::Map<Vector>(
                                    labels.data(), static_cast<Index>(labels.size())));
  return out;
}

namespace {

bool has_gzip_magic(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  unsigned char m[2] = {0, 0};
  f.read(reinterpret_cast<char*>(m), 2);
  return f.gcount() == 2 && m[0] == 0x1f && m[1] == 0x8b;
}

std::string gunzip_file(const std::string& path) {
  gzFile gz = gzopen(path.c_str(), "rb");
  require(gz != nullptr, "cannot open gzip file: " + path);
  std::string out;
  char buf[1 << 16];
  int n;
  while ((n = gzread(gz, buf, sizeof(buf))) > 0) out.append(buf, n);
  bool ok = n == 0;
  gzclose(gz);
  require(ok, "gzip decompression failed: " + path);
  return out;
}

}  // namespace

LabeledDataset load_libsvm(const std::string& path, Index n_features_override) {
  if (has_gzip_magic(path)) {
    std::istringstream s(gunzip_file(path));
    return parse_libsvm(s, n_features_override);
  }
  std::ifstream f(path);
  require(f.is_open(), "cannot open file: " + path);
  return parse_libsvm(f, n_features_override);
}

void serialize_libsvm(const LabeledDataset& data, std::ostream& out) {
  char buf[64];
  for (Index r = 0; r < data.X.rows(); ++r) {
    std::snprintf(buf, sizeof(buf), "%.17g", data.labels[r]);
    out << buf;
    for (Index p = data.X.row_offsets()[r]; p < data.X.row_offsets()[r + 1]; ++p) {
      std::snprintf(buf, sizeof(buf), " %lld:%.17g",
                    static_cast<long long>(data.X.col_indices()[p] + 1),
                    data.X.values()[p]);
      out << buf;
    }
    out << "\n";
  }
}

SparseMatrix normalize_rows(const SparseMatrix& X) {
  std::vector<Index> offsets = X.row_offsets();
  std::vector<Index> cols = X.col_indices();
  std::vector<Real> vals = X.values();
  for (Index r = 0; r < X.rows(); ++r) {
    Real norm = std::sqrt(X.row_squared_norm(r));
    if (norm == 0) continue;
    for (Index p = offsets[r]; p < offsets[r + 1]; ++p) vals[p] /= norm;
  }
  return SparseMatrix(X.rows(), X.cols(), std::move(offsets), std::move(cols),
                      std::move(vals));
}

BenchmarkKind BenchmarkKind::lad(Real lambda) {
  BenchmarkKind k;
  k.family = Family::LAD;
  k.lambda = lambda;
  return k;
}
BenchmarkKind BenchmarkKind::basis_pursuit() {
  BenchmarkKind k;
  k.family = Family::BasisPursuit;
  return k;
}
BenchmarkKind BenchmarkKind::fused_lasso(Real lambda_r, Real lambda_1mr) {
  BenchmarkKind k;
  k.family = Family::FusedLasso;
  k.lambda_r = lambda_r;
  k.lambda_1mr = lambda_1mr;
  return k;
}
BenchmarkKind BenchmarkKind::soft_margin_svm(Real lambda) {
  BenchmarkKind k;
  k.family = Family::SoftMarginSVM;
  k.lambda = lambda;
  return k;
}

SparseMatrix difference_matrix(Index n) {
  require(n >= 2, "difference_matrix: n must be >= 2");
  std::vector<SparseMatrix::Triplet> entries;
  entries.reserve(2 * (n - 1));
  for (Index i = 0; i + 1 < n; ++i) {
    entries.push_back({i, i, 1.0});
    entries.push_back({i, i + 1, -1.0});
  }
  return SparseMatrix::from_triplets(n - 1, n, std::move(entries));
}

CompositeProblem build_problem(const BenchmarkKind& kind,
                               const LabeledDataset& data) {
  require(data.X.rows() > 0 && data.X.cols() > 0,
          "build_problem: empty dataset");
  require(kind.lambda > 0 && kind.lambda_r > 0 && kind.lambda_1mr > 0,
          "build_problem: regularization weights must be positive");
  const Index m = data.X.rows();
  const Index n = data.X.cols();

  switch (kind.family) {
    case BenchmarkKind::Family::LAD: {
      // ||Ax - b||_1 + lambda ||x||_1
      std::vector<RowBlock> blocks;
      blocks.push_back(
          RowBlock::nonsmooth(data.X, SimpleFunction::abs_sum(1.0), data.labels));
      return CompositeProblem(
          n, std::move(blocks),
          SimpleFunction::weighted_l1(Vector::Constant(n, kind.lambda)), 0.0);
    }
    case BenchmarkKind::Family::BasisPursuit: {
      // min ||x||_1 s.t. Ax = b
      std::vector<RowBlock> blocks;
      blocks.push_back(
          RowBlock::constraint(data.X, SimpleSet::point(data.labels)));
      return CompositeProblem(n, std::move(blocks),
                              SimpleFunction::weighted_l1(Vector::Ones(n)), 0.0);
    }
    case BenchmarkKind::Family::FusedLasso: {
      // 0.5||Ax-b||^2 + lambda_r ||x||_1 + lambda_1mr sum |x_i - x_{i+1}|
      require(n >= 2, "fused lasso needs n >= 2");
      std::vector<RowBlock> blocks;
      blocks.push_back(RowBlock::smooth_half_squared(data.X, data.labels));
      blocks.push_back(RowBlock::nonsmooth(
          difference_matrix(n), SimpleFunction::abs_sum(kind.lambda_1mr)));
      return CompositeProblem(
          n, std::move(blocks),
          SimpleFunction::weighted_l1(Vector::Constant(n, kind.lambda_r)), 0.0);
    }
    case BenchmarkKind::Family::SoftMarginSVM: {
      // variable (x; omega), hinge rows b_i * (a_i; -1), no penalty on omega
      std::vector<SparseMatrix::Triplet> entries;
      for (Index r = 0; r < m; ++r) {
        Real b = data.labels[r];
        require(b == 1.0 || b == -1.0, "svm labels must be +1/-1");
        for (Index p = data.X.row_offsets()[r]; p < data.X.row_offsets()[r + 1];
             ++p)
          entries.push_back({r, data.X.col_indices()[p], b * data.X.values()[p]});
        entries.push_back({r, n, -b});
      }
      SparseMatrix B = SparseMatrix::from_triplets(m, n + 1, std::move(entries));
      std::vector<RowBlock> blocks;
      blocks.push_back(RowBlock::nonsmooth(
          std::move(B),
          SimpleFunction::hinge_sum(1.0 / static_cast<Real>(m), 1.0, m)));
      Vector w = Vector::Constant(n + 1, kind.lambda);
      w[n] = 0.0;
      return CompositeProblem(n + 1, std::move(blocks),
                              SimpleFunction::weighted_l1(std::move(w)), 0.0);
    }
  }
  throw std::logic_error("build_problem: unknown family");
}

SyntheticInstance synthetic_equality_qp(Index n, Index n_constraints,
                                        std::uint64_t seed) {
  require(n >= 1 && n_constraints >= 1 && n_constraints <= n,
          "synthetic_equality_qp: bad dimensions");
  Rng rng(seed);
  Eigen::MatrixXd G(n_constraints, n);
  for (Index i = 0; i < n_constraints; ++i)
    for (Index j = 0; j < n; ++j) G(i, j) = rng.normal();
  Vector b(n_constraints);
  for (Index i = 0; i < n_constraints; ++i) b[i] = rng.normal();

  // KKT: x* = G^T (G G^T)^{-1} b, lambda* = -(G G^T)^{-1} b
  Eigen::MatrixXd GGt = G * G.transpose();
  Vector mult = GGt.ldlt().solve(b);
  Vector x_star = G.transpose() * mult;
  Vector lam_star = -mult;

  std::vector<RowBlock> blocks;
  blocks.push_back(
      RowBlock::constraint(SparseMatrix::from_dense(G), SimpleSet::point(b)));
  CompositeProblem prob(n, std::move(blocks),
                        SimpleFunction::half_squared_l2(1.0, Vector()), 1.0);

  OptimumCertificate cert;
  cert.x_star = x_star;
  cert.lam_star = DualPoint{Vector(), lam_star};
  cert.F_star = 0.5 * x_star.squaredNorm();
  return {std::move(prob), cert};
}

SyntheticInstance synthetic_planted_basis_pursuit(Index m, Index n, Index sparsity,
                                                  std::uint64_t seed) {
  require(sparsity >= 1 && sparsity <= m && m <= n,
          "planted basis pursuit: need sparsity <= m <= n");
  Rng rng(seed);
  Eigen::MatrixXd A(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) A(i, j) = rng.normal() / std::sqrt(Real(m));

  // support, signs and magnitudes of the plant
  std::vector<Index> perm(n);
  for (Index i = 0; i < n; ++i) perm[i] = i;
  for (Index i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
  Vector x_star = Vector::Zero(n);
  Vector signs(sparsity);
  for (Index k = 0; k < sparsity; ++k) {
    Real s = rng.uniform() < 0.5 ? -1.0 : 1.0;
    signs[k] = s;
    x_star[perm[k]] = s * (0.5 + rng.uniform());
  }

  // least-norm y with A_S^T y = sign(x*_S)
  Eigen::MatrixXd AS(m, sparsity);
  for (Index k = 0; k < sparsity; ++k) AS.col(k) = A.col(perm[k]);
  Eigen::MatrixXd gram = AS.transpose() * AS;
  Vector y = AS * gram.ldlt().solve(signs);

  // force strict dual feasibility off the support: |a_j^T y| <= 0.9
  Real ynorm2 = y.squaredNorm();
  require(ynorm2 > 0, "planted basis pursuit: degenerate certificate");
  for (Index j = sparsity; j < n; ++j) {
    Index col = perm[j];
    Real corr = A.col(col).dot(y);
    if (std::abs(corr) > 0.9) {
      Real target = 0.9 * (corr > 0 ? 1.0 : -1.0);
      A.col(col) += ((target - corr) / ynorm2) * y;
    }
  }

  // verify the certificate before handing the instance out
  for (Index k = 0; k < sparsity; ++k)
    require(std::abs(AS.col(k).dot(y) - signs[k]) < 1e-8,
            "planted basis pursuit: sign equation failed");
  for (Index j = sparsity; j < n; ++j)
    require(std::abs(A.col(perm[j]).dot(y)) < 1.0 - 1e-9,
            "planted basis pursuit: strict feasibility failed");

  Vector b = A * x_star;
  std::vector<RowBlock> blocks;
  blocks.push_back(
      RowBlock::constraint(SparseMatrix::from_dense(A), SimpleSet::point(b)));
  CompositeProblem prob(n, std::move(blocks),
                        SimpleFunction::weighted_l1(Vector::Ones(n)), 0.0);

  OptimumCertificate cert;
  cert.x_star = x_star;
  cert.F_star = x_star.lpNorm<1>();
  return {std::move(prob), cert};
}

namespace {

// exhaustive enumeration of kink intersections for tiny LAD instances:
// a minimizer of the piecewise-linear objective sits where n hyperplanes
// from {a_i^T x = b_i} union {x_j = 0} meet
Real lad_enumeration_optimum(const Eigen::MatrixXd& A, const Vector& b,
                             Real lambda) {
  const Index m = A.rows();
  const Index n = A.cols();
  auto objective = [&](const Vector& x) {
    return (A * x - b).lpNorm<1>() + lambda * x.lpNorm<1>();
  };
  Real best = objective(Vector::Zero(n));
  const Index total = m + n;
  std::vector<Index> pick(n);
  // iterate over all size-n subsets of the m+n kink hyperplanes
  for (Index i = 0; i < n; ++i) pick[i] = i;
  while (true) {
    Eigen::MatrixXd M(n, n);
    Vector rhs(n);
    for (Index k = 0; k < n; ++k) {
      if (pick[k] < m) {
        M.row(k) = A.row(pick[k]);
        rhs[k] = b[pick[k]];
      } else {
        M.row(k).setZero();
        M(k, pick[k] - m) = 1.0;
        rhs[k] = 0.0;
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
    if (lu.isInvertible()) {
      Vector x = lu.solve(rhs);
      best = std::min(best, objective(x));
    }
    // next combination
    Index k = n;
    while (k > 0) {
      --k;
      if (pick[k] + (n - k) < total) {
        ++pick[k];
        for (Index j = k + 1; j < n; ++j) pick[j] = pick[j - 1] + 1;
        break;
      }
      if (k == 0) return best;
    }
  }
}

}  // namespace

SyntheticInstance synthetic_lad(Index n, Index m, Real lambda, std::uint64_t seed) {
  require(n >= 1 && n <= 6, "synthetic_lad: enumeration oracle needs n <= 6");
  require(m >= n, "synthetic_lad: need m >= n");
  Rng rng(seed);
  Eigen::MatrixXd A(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) A(i, j) = rng.normal();
  Vector x0(n);
  for (Index j = 0; j < n; ++j) x0[j] = rng.normal();
  Vector b = A * x0;
  for (Index i = 0; i < m; ++i)
    if (rng.uniform() < 0.4) b[i] += rng.normal();

  std::vector<RowBlock> blocks;
  blocks.push_back(
      RowBlock::nonsmooth(SparseMatrix::from_dense(A), SimpleFunction::abs_sum(1.0), b));
  CompositeProblem prob(n, std::move(blocks),
                        SimpleFunction::weighted_l1(Vector::Constant(n, lambda)),
                        0.0);
  OptimumCertificate cert;
  cert.F_star = lad_enumeration_optimum(A, b, lambda);
  return {std::move(prob), cert};
}

SyntheticInstance synthetic_fused_lasso(Index n, Index m, Real mu_g,
                                        std::uint64_t seed) {
  require(n >= 2 && m >= 1, "synthetic_fused_lasso: bad dimensions");
  Rng rng(seed);
  Eigen::MatrixXd A(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) A(i, j) = rng.normal() / std::sqrt(Real(n));
  // piecewise-constant ground truth plus noise
  Vector x0 = Vector::Zero(n);
  Real level = 0.0;
  for (Index j = 0; j < n; ++j) {
    if (j % (n / 4 + 1) == 0) level = 2.0 * rng.uniform() - 1.0;
    x0[j] = level;
  }
  Vector b = A * x0;
  for (Index i = 0; i < m; ++i) b[i] += 0.05 * rng.normal();

  std::vector<RowBlock> blocks;
  blocks.push_back(RowBlock::smooth_half_squared(SparseMatrix::from_dense(A), b));
  blocks.push_back(RowBlock::nonsmooth(difference_matrix(n),
                                       SimpleFunction::abs_sum(0.01)));
  SimpleFunction g = mu_g > 0
                         ? SimpleFunction::half_squared_l2(mu_g, Vector::Zero(n))
                         : SimpleFunction::weighted_l1(Vector::Constant(n, 0.01));
  CompositeProblem prob(n, std::move(blocks), std::move(g), std::max(mu_g, 0.0));
  return {std::move(prob), std::nullopt};
}

}  // namespace ipalm
