#pragma once

#include <jpeglib.h>
#include <png.h>

#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "docpretext/image.hpp"

namespace docpretext {

namespace detail {

struct Raster {
  int height = 0;
  int width = 0;
  std::vector<float> lum;  // 0..255 scale
};

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
};

inline void jpeg_error_trampoline(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  std::longjmp(mgr->jump, 1);
}

inline Raster decode_jpeg(std::FILE* fp, const std::string& path) {
  jpeg_decompress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_trampoline;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DecodeError("corrupt JPEG: " + path);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, fp);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  Raster r;
  r.height = static_cast<int>(cinfo.output_height);
  r.width = static_cast<int>(cinfo.output_width);
  int ch = cinfo.output_components;
  r.lum.resize(static_cast<std::size_t>(r.height) * r.width);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(r.width) * ch);
  while (cinfo.output_scanline < cinfo.output_height) {
    int y = static_cast<int>(cinfo.output_scanline);
    JSAMPROW rp = row.data();
    jpeg_read_scanlines(&cinfo, &rp, 1);
    for (int x = 0; x < r.width; ++x) {
      float v = ch == 1 ? static_cast<float>(row[x])
                        : luminance601(row[3 * x], row[3 * x + 1],
                                       row[3 * x + 2]);
      r.lum[static_cast<std::size_t>(y) * r.width + x] = v;
    }
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return r;
}

inline Raster decode_png(std::FILE* fp, const std::string& path) {
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DecodeError("corrupt PNG: " + path);
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_byte color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY &&
      png_get_bit_depth(png, info) < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  Raster r;
  r.height = static_cast<int>(png_get_image_height(png, info));
  r.width = static_cast<int>(png_get_image_width(png, info));
  int ch = static_cast<int>(png_get_channels(png, info));
  r.lum.resize(static_cast<std::size_t>(r.height) * r.width);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(r.width) * ch);
  for (int y = 0; y < r.height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < r.width; ++x) {
      float v = ch >= 3 ? luminance601(row[ch * x], row[ch * x + 1],
                                       row[ch * x + 2])
                        : static_cast<float>(row[ch * x]);
      r.lum[static_cast<std::size_t>(y) * r.width + x] = v;
    }
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return r;
}

inline Raster decode_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  auto next_token = [&in, &path]() {
    std::string tok;
    while (true) {
      int c = in.get();
      if (c == EOF) throw DecodeError("truncated PGM: " + path);
      if (c == '#') {
        while (c != EOF && c != '\n') c = in.get();
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
  };
  std::string magic = next_token();
  if (magic != "P2" && magic != "P5")
    throw DecodeError("not a PGM (bad magic): " + path);
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token());
    h = std::stoi(next_token());
    maxval = std::stoi(next_token());
  } catch (const std::exception&) {
    throw DecodeError("bad PGM header: " + path);
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    throw DecodeError("bad PGM header: " + path);
  Raster r;
  r.height = h;
  r.width = w;
  r.lum.resize(static_cast<std::size_t>(h) * w);
  float scale = 255.0f / static_cast<float>(maxval);
  if (magic == "P2") {
    for (std::size_t i = 0; i < r.lum.size(); ++i) {
      int v = 0;
      try {
        v = std::stoi(next_token());
      } catch (const std::exception&) {
        throw DecodeError("bad PGM sample: " + path);
      }
      r.lum[i] = static_cast<float>(v) * scale;
    }
  } else {
    int bytes = maxval < 256 ? 1 : 2;
    std::vector<std::uint8_t> buf(r.lum.size() * bytes);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size()))
      throw DecodeError("truncated PGM: " + path);
    for (std::size_t i = 0; i < r.lum.size(); ++i) {
      int v = bytes == 1 ? buf[i] : (buf[2 * i] << 8) | buf[2 * i + 1];
      r.lum[i] = static_cast<float>(v) * scale;
    }
  }
  return r;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

// Decodes PNG / JPEG / PGM (sniffed by magic bytes) to luminance 0..255.
inline Raster load_luminance(const std::string& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + path);
  unsigned char magic[8] = {0};
  std::size_t got = std::fread(magic, 1, 8, fp.get());
  std::rewind(fp.get());
  if (got >= 8 && png_sig_cmp(magic, 0, 8) == 0) return decode_png(fp.get(), path);
  if (got >= 2 && magic[0] == 0xFF && magic[1] == 0xD8)
    return decode_jpeg(fp.get(), path);
  if (got >= 2 && magic[0] == 'P' && (magic[1] == '2' || magic[1] == '5')) {
    fp.reset();
    return decode_pgm(path);
  }
  throw DecodeError("unrecognized image format: " + path);
}

}  // namespace detail

// Decode, convert to luminance, bilinear-resize to (target_h, target_w),
// then map to [-0.5, 0.5] by v/255 - 0.5.
inline GrayImage load_grayscale(const std::string& path, int target_h,
                                int target_w) {
  if (target_h <= 0 || target_w <= 0)
    throw DomainError("load_grayscale: target dims must be positive");
  detail::Raster r = detail::load_luminance(path);
  std::vector<float> resized =
      detail::resize_bilinear(r.lum, r.height, r.width, target_h, target_w);
  GrayImage img(target_h, target_w);
  for (std::size_t i = 0; i < resized.size(); ++i)
    img.data[i] = resized[i] / 255.0f - 0.5f;
  return img;
}

inline std::uint8_t denormalize_pixel(float v) {
  long b = std::lround((static_cast<double>(v) + 0.5) * 255.0);
  if (b < 0) b = 0;
  if (b > 255) b = 255;
  return static_cast<std::uint8_t>(b);
}

inline void save_png_gray(const GrayImage& img, const std::string& path) {
  std::unique_ptr<std::FILE, detail::FileCloser> fp(
      std::fopen(path.c_str(), "wb"));
  if (!fp) throw IoError("cannot write " + path);
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("libpng init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width));
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) row[x] = denormalize_pixel(img.at(y, x));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace docpretext
