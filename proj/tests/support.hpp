#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "couette_ks/grid.hpp"

namespace test_support {

inline constexpr double kPi = 3.141592653589793;

inline couette::RealField random_field(const couette::Grid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  couette::RealField f(g);
  for (double& v : f.values) v = u(rng);
  return f;
}

inline double max_abs_diff(const couette::RealField& a, const couette::RealField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    m = std::max(m, std::abs(a.values[k] - b.values[k]));
  }
  return m;
}

inline double max_abs_diff(const couette::SpectralField& a, const couette::SpectralField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.coef().size(); ++k) {
    m = std::max(m, std::abs(a.coef()[k] - b.coef()[k]));
  }
  return m;
}

/// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("couette_ks_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace test_support
