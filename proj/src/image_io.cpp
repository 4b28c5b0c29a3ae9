// Copyright 2026 the rdc authors
// SPDX-License-Identifier: Apache-2.0

#include "rdc/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#if defined(RDC_HAVE_PNG)
#include <png.h>
#endif

namespace rdc {

namespace {

bool has_suffix(const std::string& s, const std::string& suf) {
  if (s.size() < suf.size()) return false;
  std::string tail = s.substr(s.size() - suf.size());
  std::transform(tail.begin(), tail.end(), tail.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return tail == suf;
}

TensorF from_rgb8(const std::vector<uint8_t>& rgb, int h, int w) {
  TensorF img({3, h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(c, y, x) = rgb[static_cast<size_t>(y * w + x) * 3 + c] / 255.0f;
  return img;
}

std::vector<uint8_t> to_rgb8(const TensorF& img) {
  check(img.rank() == 3 && img.dim(0) == 3, ErrorKind::kShape,
        "image must be (3,H,W)");
  const int h = img.dim(1), w = img.dim(2);
  std::vector<uint8_t> rgb(static_cast<size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(img.at(c, y, x), 0.0f, 1.0f);
        rgb[static_cast<size_t>(y * w + x) * 3 + c] =
            static_cast<uint8_t>(std::lround(v * 255.0f));
      }
  return rgb;
}

int ppm_token(std::istream& in) {
  // Skips whitespace and '#' comments.
  int c = in.get();
  while (c == '#' || std::isspace(c)) {
    if (c == '#')
      while (c != '\n' && c != EOF) c = in.get();
    c = in.get();
  }
  int v = 0;
  bool any = false;
  while (std::isdigit(c)) {
    v = v * 10 + (c - '0');
    any = true;
    c = in.get();
  }
  check(any, ErrorKind::kIo, "malformed PPM header");
  return v;
}

TensorF load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check(in.good(), ErrorKind::kIo, "cannot open " + path);
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  check(m0 == 'P' && m1 == '6', ErrorKind::kIo, "only binary PPM (P6) supported");
  const int w = ppm_token(in);
  const int h = ppm_token(in);
  const int maxval = ppm_token(in);
  check(maxval == 255, ErrorKind::kIo, "only 8-bit PPM supported");
  std::vector<uint8_t> rgb(static_cast<size_t>(h) * w * 3);
  in.read(reinterpret_cast<char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
  check(in.gcount() == static_cast<std::streamsize>(rgb.size()), ErrorKind::kIo,
        "truncated PPM payload in " + path);
  return from_rgb8(rgb, h, w);
}

void save_ppm(const std::string& path, const TensorF& img) {
  std::ofstream out(path, std::ios::binary);
  check(out.good(), ErrorKind::kIo, "cannot write " + path);
  const auto rgb = to_rgb8(img);
  out << "P6\n" << img.dim(2) << " " << img.dim(1) << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()),
            static_cast<std::streamsize>(rgb.size()));
}

#if defined(RDC_HAVE_PNG)

TensorF load_png(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "rb");
  check(fp != nullptr, ErrorKind::kIo, "cannot open " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    fail(ErrorKind::kIo, "libpng failed reading " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  std::vector<uint8_t> rgb(static_cast<size_t>(h) * w * 3);
  std::vector<png_bytep> rows(static_cast<size_t>(h));
  for (int y = 0; y < h; ++y) rows[static_cast<size_t>(y)] = rgb.data() + static_cast<size_t>(y) * w * 3;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);
  std::fclose(fp);
  return from_rgb8(rgb, h, w);
}

void save_png(const std::string& path, const TensorF& img) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  check(fp != nullptr, ErrorKind::kIo, "cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    fail(ErrorKind::kIo, "libpng failed writing " + path);
  }
  png_init_io(png, fp);
  const int h = img.dim(1), w = img.dim(2);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h),
               8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const auto rgb = to_rgb8(img);
  for (int y = 0; y < h; ++y)
    png_write_row(png, const_cast<png_bytep>(rgb.data() + static_cast<size_t>(y) * w * 3));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

#endif  // RDC_HAVE_PNG

}  // namespace

TensorF load_image(const std::string& path) {
  if (has_suffix(path, ".ppm")) return load_ppm(path);
#if defined(RDC_HAVE_PNG)
  if (has_suffix(path, ".png")) return load_png(path);
#endif
  fail(ErrorKind::kIo, "unsupported image format: " + path);
}

void save_image(const std::string& path, const TensorF& img) {
  if (has_suffix(path, ".ppm")) return save_ppm(path, img);
#if defined(RDC_HAVE_PNG)
  if (has_suffix(path, ".png")) return save_png(path, img);
#endif
  fail(ErrorKind::kIo, "unsupported image format: " + path);
}

TensorF quantize_8bit(const TensorF& img) {
  TensorF out(img.shape());
  for (Eigen::Index i = 0; i < img.numel(); ++i) {
    const float v = std::clamp(img[i], 0.0f, 1.0f);
    out[i] = static_cast<float>(std::lround(v * 255.0f)) / 255.0f;
  }
  return out;
}

}  // namespace rdc
