#pragma once

#include <vector>

#include "qsgp/common.hpp"

namespace qsgp {

struct RngKey {
  std::uint64_t seed = 0;
  std::uint64_t iteration = 0;
};

// One quadruple-stochastic draw: three index vectors over the m basis
// functions (i, j, r), one over the n data rows (l), and an optional
// standard-normal scalar. A batch is a pure function of its key.
struct IndexBatch {
  std::vector<Index> i_tilde;
  std::vector<Index> j_tilde;
  std::vector<Index> r_tilde;
  std::vector<Index> l_tilde;
  double z = 0.0;
  bool has_z = false;
  RngKey key;
  bool enumerated = false;

  Index m_tilde() const { return static_cast<Index>(i_tilde.size()); }
  Index n_tilde() const { return static_cast<Index>(l_tilde.size()); }
};

// Indices are sampled uniformly and independently with replacement.
// enumerate_full requires m_tilde == m and n_tilde == n and returns
// 0..m-1 / 0..n-1 in order (zero-variance mode used for exactness checks).
IndexBatch sample_batch(RngKey key, Index n, Index m, Index m_tilde,
                        Index n_tilde, bool need_z = false,
                        bool enumerate_full = false);

// Distinct values of i_tilde and j_tilde, sorted ascending.
std::vector<Index> touched_union(const IndexBatch& batch);

}  // namespace qsgp
