// SPDX-License-Identifier: Apache-2.0

#ifndef CROSSVIEW_PNG_IO_H_
#define CROSSVIEW_PNG_IO_H_

#include <filesystem>

#include "crossview/raster.h"

namespace crossview {

// 8-bit PNG, RGB for 3-channel rasters and grayscale for 1-channel ones.
// Output bytes depend only on the pixels (no timestamps or text chunks).
void WritePng(const Raster& raster, const std::filesystem::path& path);

// Reads any 8-bit PNG and converts it to the channel count of `role`.
Raster ReadPng(const std::filesystem::path& path, RasterRole role);

}  // namespace crossview

#endif  // CROSSVIEW_PNG_IO_H_
