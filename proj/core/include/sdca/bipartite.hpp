#pragma once

#include <span>
#include <utility>
#include <vector>

namespace sdca {

// Euclidean projection of (b, bbar) onto the bipartite simplex
//
//   B(r) = { (x, y) : <1, x> = <1, y> <= r,  x >= 0, y >= 0 },
//
// the feasible set of the multilabel SVM dual update. Variable-fixing
// scheme, no sorting:
//   1. project each block onto its equality simplex of radius r; if the two
//      thresholds satisfy t' + s' >= 0 the budget is active and these
//      projections are optimal;
//   2. otherwise pick the threshold t equalizing the unclamped block masses
//      over the active index sets;
//   3. accumulate each block's clamping deficit (the mass lost to negative
//      coordinates);
//   4. equal deficits certify optimality, p = max(0, b - t),
//      pbar = max(0, bbar + t);
//   5. otherwise permanently drop the violating coordinates on the side
//      with the larger deficit and repeat.
std::pair<std::vector<double>, std::vector<double>> project_bipartite(
    std::span<const double> b, std::span<const double> bbar, double r);

}  // namespace sdca
