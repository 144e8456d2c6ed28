#pragma once

#include <string>

#include "couette_ks/grid.hpp"

namespace couette {

/// Binary checkpoint, little-endian:
///   "CKS1" | Nx, Ny (int32) | Lx, Ly, t, s, A (float64) |
///   n coefficients, then omega coefficients, each as interleaved (re, im)
///   float64 in row-major (kx, ky) storage order (see grid.hpp).
struct Checkpoint {
  double t = 0.0;
  double shear = 0.0;
  double A = 1.0;
  SpectralField n;
  SpectralField omega;
};

void write_checkpoint(const std::string& path, const Checkpoint& ck);
/// Throws std::runtime_error on I/O failure, bad magic or truncated data.
Checkpoint read_checkpoint(const std::string& path);

}  // namespace couette
