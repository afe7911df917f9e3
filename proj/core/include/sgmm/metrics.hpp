#pragma once

#include <Eigen/Dense>

#include <vector>

#include "sgmm/linalg.hpp"
#include "sgmm/mixture.hpp"

namespace sgmm {

struct Misrate {
  double rate = 0.0;
  int mismatches = 0;
  /// perm[a] is the estimated label matched to true label a.
  std::vector<int> perm;
};

/// min over permutations pi of #{i : hat_i != pi(star_i)} / n, solved as an
/// assignment problem on the k x k confusion matrix. Among optimal
/// permutations the lexicographically smallest is returned. Labels need not be
/// balanced; throws InputError for labels outside [0, k) or a length mismatch.
Misrate misrate(const Labels& hat, const Labels& star, int k);

struct L1Error {
  double error = 0.0;  // sum |Yhat_ij - Y*_ij|
  double ratio = 0.0;  // error / ||Y*||_1
};

L1Error l1_error(const SymMatrix& y_hat, const SymMatrix& y_star);

struct CenterError {
  /// min over bijections pi of max_a ||muhat_a - mu_pi(a)||.
  double perm_matched = 0.0;
  /// max_a min_b ||muhat_a - mu_b||; may map two estimates to one center.
  double nearest = 0.0;
};

/// Both arguments k x d, one center per row.
CenterError center_error(const Eigen::MatrixXd& mu_hat, const Eigen::MatrixXd& mu);

}  // namespace sgmm
