// SPDX-License-Identifier: Apache-2.0

#include "crossview/png_io.h"

#include <png.h>

#include <cstring>
#include <vector>

#include "crossview/error.h"

namespace crossview {

void WritePng(const Raster& raster, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(raster.width());
  image.height = static_cast<png_uint_32>(raster.height());
  image.format = raster.channels() == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0,
                               raster.pixels().data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIo, "cannot write " + path.string() + ": " +
                                    message);
  }
}

Raster ReadPng(const std::filesystem::path& path, RasterRole role) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    const std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIo, "cannot read " + path.string() + ": " +
                                    message);
  }
  image.format =
      RoleChannels(role) == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  std::vector<uint8_t> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIo, "cannot decode " + path.string() + ": " +
                                    message);
  }
  return Raster(static_cast<int>(image.width), static_cast<int>(image.height),
                role, std::move(pixels));
}

}  // namespace crossview
