// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

namespace penflow {

/// Philox4x32-10 counter-based block function.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter counter, Key key);
};

/// Deterministic random stream identified by (seed, stream index).
///
/// Distinct stream indices address disjoint counter ranges, so the draws of
/// stream i never depend on how many draws other streams have made. Monte
/// Carlo paths use their path index as the stream index.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream);

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();

  /// Standard Gaussian variate via the inverse CDF.
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t next_u64();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  Philox4x32::Counter buffer_{};
  int buffered_words_ = 0;
};

}  // namespace penflow
