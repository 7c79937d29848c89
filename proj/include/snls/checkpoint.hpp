#pragma once

// Binary checkpoints. Layout, all little-endian:
//   "NLSE"  u32 version
//   i32 d   i32 n   f64 L   f64 t   i32 scheme   f64 lambda   f64 sigma   i32 alpha
//   n^d x (f64 re, f64 im)   row-major physical samples
//   u32 word count, then that many u64 RNG state words

#include <cstdint>
#include <string>

#include "snls/dynamics.hpp"

namespace snls {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  State state;
  Scheme scheme = Scheme::lie;
  double lambda = 0.0;
  double sigma = 0.0;
  int alpha = -1;
};

void save_checkpoint(const State& state, const SimParams& params, const std::string& path);

/// Throws CheckpointError on a bad magic, unknown version or truncated file.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace snls
