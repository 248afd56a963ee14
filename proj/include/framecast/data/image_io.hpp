// Copyright 2026 The framecast Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <png.h>

#include "framecast/errors.hpp"
#include "framecast/frame.hpp"

namespace framecast {

/// round(255 * x), the on-disk intensity of a [0,1] pixel.
inline std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

inline Frame frame_from_bytes(int height, int width, const std::vector<std::uint8_t>& bytes) {
  std::vector<float> px(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) px[i] = static_cast<float>(bytes[i]) / 255.0f;
  return Frame(height, width, std::move(px));
}

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IngestError("cannot open '" + path.string() + "'");
  return f;
}

}  // namespace detail

/// Writes an 8-bit grayscale PNG.
inline void write_png(const std::filesystem::path& path, const Frame& frame) {
  auto file = detail::open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IngestError("libpng initialisation failed");
  }
  std::vector<std::uint8_t> row(static_cast<std::size_t>(frame.width()));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IngestError("failed writing PNG '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, frame.width(), frame.height(), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < frame.height(); ++r) {
    for (int c = 0; c < frame.width(); ++c) row[c] = to_byte(frame(r, c));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

/// Reads any PNG and converts it to 8-bit grayscale.
inline Frame read_png(const std::filesystem::path& path) {
  auto file = detail::open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IngestError("libpng initialisation failed");
  }
  std::vector<std::uint8_t> bytes;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IngestError("failed reading PNG '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  const int color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA || color == PNG_COLOR_TYPE_PALETTE)
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  png_read_update_info(png, info);
  if (png_get_channels(png, info) != 1) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IngestError("unsupported PNG layout in '" + path.string() + "'");
  }
  bytes.resize(static_cast<std::size_t>(width) * height);
  rows.resize(height);
  for (int r = 0; r < height; ++r) rows[r] = bytes.data() + static_cast<std::size_t>(r) * width;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return frame_from_bytes(height, width, bytes);
}

/// Binary (P5) 8-bit PGM.
inline void write_pgm(const std::filesystem::path& path, const Frame& frame) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot open '" + path.string() + "'");
  out << "P5\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  for (float v : frame.pixels()) out.put(static_cast<char>(to_byte(v)));
}

inline Frame read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path.string() + "'");
  auto token = [&in]() {
    std::string t;
    while (in >> t) {
      if (t[0] != '#') return t;
      std::string rest;
      std::getline(in, rest);
    }
    return std::string();
  };
  if (token() != "P5") throw IngestError("'" + path.string() + "' is not a binary PGM");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(token());
    height = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw IngestError("malformed PGM header in '" + path.string() + "'");
  }
  if (maxval != 255 || width <= 0 || height <= 0) throw IngestError("only 8-bit PGM is supported");
  in.get();
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw IngestError("truncated PGM '" + path.string() + "'");
  return frame_from_bytes(height, width, bytes);
}

/// Dispatches on the file extension (.png or .pgm).
inline Frame read_image(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".pgm") return read_pgm(path);
  return read_png(path);
}

inline void write_image(const std::filesystem::path& path, const Frame& frame) {
  if (path.extension() == ".pgm") {
    write_pgm(path, frame);
  } else {
    write_png(path, frame);
  }
}

}  // namespace framecast
