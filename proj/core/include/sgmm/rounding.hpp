#pragma once

#include <optional>
#include <vector>

#include "sgmm/linalg.hpp"
#include "sgmm/mixture.hpp"

namespace sgmm {

/// Disjoint index sets covering [0, n), each of size at most n/k, in the order
/// they were extracted.
struct BallCover {
  std::vector<std::vector<int>> sets;
};

/// Greedy l1-ball cover of the rows of Y. Each round takes, among the points
/// not yet covered, the u whose ball
///   B(u) = { w uncovered : ||Y_u. - Y_w.||_1 <= radius }
/// is largest (ties to the lowest u), trims it to the n/k members nearest to
/// Y_u. (ties to the lowest index) and removes it. Distances use full rows.
/// radius defaults to n / (4k). Requires k >= 1 dividing n.
BallCover extract_balls(const SymMatrix& y, int k, std::optional<double> radius = {});

/// Keeps the k largest sets (ties to the earlier set) as clusters 0..k-1 in
/// cover order, then hands the remaining points, in increasing index, to the
/// deficient clusters in order of increasing size (ties to the lower label),
/// filling each to n/k before moving on. Throws InputError if the cover is not
/// a partition of [0, n) into sets of size <= n/k.
Labels equalize(const BallCover& cover, int n, int k);

/// equalize(extract_balls(y, k, radius), n, k).
Labels cluster(const SymMatrix& y, int k, std::optional<double> radius = {});

}  // namespace sgmm
