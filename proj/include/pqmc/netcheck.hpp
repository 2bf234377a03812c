#pragma once
#include "pqmc/sobol.hpp"

namespace pqmc {

// Elementary-interval counting. An axis-aligned dyadic box with resolution
// vector k (side 2^{-k_j}, |k| = sum k_j) must contain exactly 2^{m-|k|} of
// the 2^m points for every |k| <= m - t for the set to be a (t,m,d)-net.
// Checking all |k| = m - t suffices: coarser boxes are unions of those.
bool is_net(const PointSet& ps, int t, int m, int d);

// Smallest t in [0, m] for which is_net passes; m itself always passes.
int smallest_net_t(const PointSet& ps);

}  // namespace pqmc
