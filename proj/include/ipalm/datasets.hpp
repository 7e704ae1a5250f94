#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "ipalm/problem.hpp"

namespace ipalm {

struct LabeledDataset {
  SparseMatrix X;  // m_samples x n_features
  Vector labels;   // length m_samples
};

// libsvm text: per line "label idx:val idx:val ...", 1-based strictly
// increasing indices. Feature count is the maximum index seen unless
// overridden. Malformed input reports the offending line number.
LabeledDataset parse_libsvm(std::istream& in, Index n_features_override = -1);
LabeledDataset load_libsvm(const std::string& path, Index n_features_override = -1);
void serialize_libsvm(const LabeledDataset& data, std::ostream& out);

// Scale every nonzero row to unit Euclidean norm; zero rows pass through.
SparseMatrix normalize_rows(const SparseMatrix& X);

struct BenchmarkKind {
  enum class Family { LAD, BasisPursuit, FusedLasso, SoftMarginSVM };
  Family family = Family::LAD;
  Real lambda = 0.01;       // LAD / SVM regularization
  Real lambda_r = 0.01;     // fused lasso l1 weight
  Real lambda_1mr = 0.01;   // fused lasso total-variation weight

  static BenchmarkKind lad(Real lambda = 0.01);
  static BenchmarkKind basis_pursuit();
  static BenchmarkKind fused_lasso(Real lambda_r = 0.01, Real lambda_1mr = 0.01);
  static BenchmarkKind soft_margin_svm(Real lambda = 0.01);
};

CompositeProblem build_problem(const BenchmarkKind& kind, const LabeledDataset& data);

// (n-1) x n forward-difference matrix, (Dx)_i = x_i - x_{i+1}
SparseMatrix difference_matrix(Index n);

// Desk-scale synthetic instances; when the optimum is certifiable the
// certificate is returned alongside.
struct OptimumCertificate {
  std::optional<Vector> x_star;
  std::optional<DualPoint> lam_star;
  Real F_star = 0.0;
};

struct SyntheticInstance {
  CompositeProblem problem;
  std::optional<OptimumCertificate> certificate;
};

// min 0.5||x||^2 s.t. Gx = b, with closed-form (x*, lambda*)
SyntheticInstance synthetic_equality_qp(Index n, Index n_constraints,
                                        std::uint64_t seed);

// basis pursuit with a planted sparse solution and a verified dual
// certificate making the plant provably optimal
SyntheticInstance synthetic_planted_basis_pursuit(Index m, Index n, Index sparsity,
                                                  std::uint64_t seed);

// tiny LAD instance whose optimum comes from exhaustive enumeration of kink
// intersections (n <= 6)
SyntheticInstance synthetic_lad(Index n, Index m, Real lambda, std::uint64_t seed);

// fused-lasso flavored instance; mu_g > 0 swaps the l1 penalty on x for a
// strongly convex quadratic
SyntheticInstance synthetic_fused_lasso(Index n, Index m, Real mu_g,
                                        std::uint64_t seed);

}  // namespace ipalm
