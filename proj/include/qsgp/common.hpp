#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace qsgp {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

using IndexSpan = std::span<const Index>;

// Requested operation is not defined for the given expansion/likelihood kind.
struct UnsupportedOperation : std::logic_error {
  using std::logic_error::logic_error;
};

// A stateful object was used out of sync with its owner (version mismatch,
// non-positive Cholesky diagonal, ...).
struct InvalidState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure (Cholesky breakdown, singular system).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// CSV/file parse failure; row/col are 1-based, 0 when unknown.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, Index row_ = 0, Index col_ = 0)
      : std::runtime_error(msg), row(row_), col(col_) {}
  Index row;
  Index col;
};

inline void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// ---------------------------------------------------------------------------
// Counter-based deterministic RNG.
//
// Every draw is a pure function of (key, counter), so any single column,
// matrix entry or batch can be regenerated in isolation without replaying a
// stream. The mixer is the splitmix64 finalizer.
// ---------------------------------------------------------------------------

constexpr std::uint64_t kRngGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

inline std::uint64_t scramble(std::uint64_t x) { return mix64(x + kRngGolden); }

// Distinct stream tags keep independent uses of the same seed decorrelated.
enum RngStream : std::uint64_t {
  kStreamOmega = 1,    // random Fourier frequencies
  kStreamBatch = 2,    // per-iteration index batches
  kStreamSupport = 3,  // control-variate support rows
  kStreamData = 4,     // synthetic dataset generation
  kStreamInit = 5,     // initialization-time row subsampling
};

inline std::uint64_t rng_key(std::uint64_t seed, std::uint64_t s0,
                             std::uint64_t s1 = 0, std::uint64_t s2 = 0) {
  std::uint64_t h = scramble(seed ^ scramble(s0));
  h = scramble(h ^ scramble(s1));
  h = scramble(h ^ scramble(s2));
  return h;
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return scramble(key_ ^ scramble(counter_++)); }

  // [0, 1)
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // (0, 1]
  double next_unit_open() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Box-Muller; consumes two words per draw.
  double next_normal() {
    const double u1 = next_unit_open();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  // Uniform over {0, ..., n-1} via 128-bit multiply; bias is O(n / 2^64).
  Index next_below(Index n) {
    const auto r = static_cast<unsigned __int128>(next_u64()) *
                   static_cast<unsigned __int128>(n);
    return static_cast<Index>(r >> 64);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Gathers v at the given indices.
inline VectorXd gather(const VectorXd& v, IndexSpan idx) {
  VectorXd out(static_cast<Index>(idx.size()));
  for (Index b = 0; b < out.size(); ++b) out[b] = v[idx[b]];
  return out;
}

// (row, col) slot key for sparse factor gradients.
inline std::uint64_t pack_rc(Index row, Index col) {
  return (static_cast<std::uint64_t>(row) << 32) |
         static_cast<std::uint64_t>(col);
}

inline std::pair<Index, Index> unpack_rc(std::uint64_t key) {
  return {static_cast<Index>(key >> 32),
          static_cast<Index>(key & 0xFFFFFFFFull)};
}

}  // namespace qsgp
