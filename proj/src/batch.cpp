#include "qsgp/batch.hpp"

#include <algorithm>
#include <numeric>

namespace qsgp {

IndexBatch sample_batch(RngKey key, Index n, Index m, Index m_tilde,
                        Index n_tilde, bool need_z, bool enumerate_full) {
  require(m >= 1 && n >= 1, "sample_batch: n and m must be >= 1");
  require(m_tilde >= 1 && m_tilde <= m, "sample_batch: need 1 <= m_tilde <= m");
  require(n_tilde >= 1 && n_tilde <= n, "sample_batch: need 1 <= n_tilde <= n");

  IndexBatch batch;
  batch.key = key;
  CounterRng rng(rng_key(key.seed, kStreamBatch, key.iteration));

  if (enumerate_full) {
    require(m_tilde == m && n_tilde == n,
            "sample_batch: enumeration needs m_tilde == m and n_tilde == n");
    batch.enumerated = true;
    batch.i_tilde.resize(m);
    std::iota(batch.i_tilde.begin(), batch.i_tilde.end(), Index{0});
    batch.j_tilde = batch.i_tilde;
    batch.r_tilde = batch.i_tilde;
    batch.l_tilde.resize(n);
    std::iota(batch.l_tilde.begin(), batch.l_tilde.end(), Index{0});
  } else {
    auto draw = [&rng](std::vector<Index>& out, Index count, Index bound) {
      out.resize(count);
      for (Index t = 0; t < count; ++t) out[t] = rng.next_below(bound);
    };
    draw(batch.i_tilde, m_tilde, m);
    draw(batch.j_tilde, m_tilde, m);
    draw(batch.r_tilde, m_tilde, m);
    draw(batch.l_tilde, n_tilde, n);
  }
  if (need_z) {
    batch.z = rng.next_normal();
    batch.has_z = true;
  }
  return batch;
}

std::vector<Index> touched_union(const IndexBatch& batch) {
  std::vector<Index> out;
  out.reserve(batch.i_tilde.size() + batch.j_tilde.size());
  out.insert(out.end(), batch.i_tilde.begin(), batch.i_tilde.end());
  out.insert(out.end(), batch.j_tilde.begin(), batch.j_tilde.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace qsgp
