// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_TESTS_TEST_UTIL_H_
#define CROSSVIEW_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "crossview/feature_volume.h"
#include "crossview/raster.h"

namespace crossview::testing {

// Fresh, empty scratch directory under the system temp dir.
inline std::filesystem::path ScratchDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("crossview_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::vector<uint8_t> ReadBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

template <typename T = float>
BasicVolume<T> RandomVolume(std::mt19937_64& rng, int w, int h, int c,
                            double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  BasicVolume<T> v(w, h, c);
  for (auto& x : v.values()) x = static_cast<T>(dist(rng));
  return v;
}

inline Raster RandomRaster(std::mt19937_64& rng, int w, int h,
                           RasterRole role) {
  Raster r(w, h, role);
  std::uniform_int_distribution<int> dist(0, 255);
  for (auto& p : r.pixels()) p = static_cast<uint8_t>(dist(rng));
  return r;
}

}  // namespace crossview::testing

#endif  // CROSSVIEW_TESTS_TEST_UTIL_H_
