#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "docpretext/common.hpp"

namespace docpretext {

// Single-channel raster with values in [-0.5, 0.5], row-major.
struct GrayImage {
  int height = 0;
  int width = 0;
  std::vector<float> data;

  GrayImage() = default;
  GrayImage(int h, int w, float fill = 0.0f)
      : height(h), width(w),
        data(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill) {
    if (h <= 0 || w <= 0) throw DomainError("GrayImage: dims must be positive");
  }

  float& at(int y, int x) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  float at(int y, int x) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::size_t size() const { return data.size(); }

  bool operator==(const GrayImage& o) const {
    return height == o.height && width == o.width && data == o.data;
  }
};

struct Rect {
  int x = 0;  // offset from left
  int y = 0;  // offset from top
  int w = 0;
  int h = 0;
};

inline float normalize_pixel(int v) {
  if (v < 0 || v > 255)
    throw DomainError("normalize_pixel: value " + std::to_string(v) +
                      " outside 0..255");
  return static_cast<float>(v) / 255.0f - 0.5f;
}

inline std::vector<float> normalize_pixels(std::span<const int> raw) {
  std::vector<float> out;
  out.reserve(raw.size());
  for (int v : raw) out.push_back(normalize_pixel(v));
  return out;
}

// Counter-clockwise quarter turns; k interpreted mod 4.
inline GrayImage rotate90(const GrayImage& img, int k) {
  int r = ((k % 4) + 4) % 4;
  if (r == 0) return img;
  GrayImage out;
  if (r == 2) {
    out = GrayImage(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out.at(y, x) = img.at(img.height - 1 - y, img.width - 1 - x);
    return out;
  }
  out = GrayImage(img.width, img.height);
  if (r == 1) {
    // out(i,j) = in(j, W-1-i)
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x)
        out.at(y, x) = img.at(x, img.width - 1 - y);
  } else {  // r == 3
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x)
        out.at(y, x) = img.at(img.height - 1 - x, y);
  }
  return out;
}

enum class FlipAxis { horizontal, vertical };

inline GrayImage flip(const GrayImage& img, FlipAxis axis) {
  GrayImage out(img.height, img.width);
  if (axis == FlipAxis::horizontal) {
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out.at(y, x) = img.at(y, img.width - 1 - x);
  } else {
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out.at(y, x) = img.at(img.height - 1 - y, x);
  }
  return out;
}

inline GrayImage crop(const GrayImage& img, const Rect& r) {
  if (r.w <= 0 || r.h <= 0 || r.x < 0 || r.y < 0 || r.x + r.w > img.width ||
      r.y + r.h > img.height)
    throw BoundsError("crop: rect outside image bounds");
  GrayImage out(r.h, r.w);
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x) out.at(y, x) = img.at(r.y + y, r.x + x);
  return out;
}

namespace detail {

// Bilinear resize with corner-aligned sampling on a raw float raster.
// Written so that a constant input stays exactly constant.
inline std::vector<float> resize_bilinear(const std::vector<float>& src, int h,
                                          int w, int th, int tw) {
  if (th <= 0 || tw <= 0)
    throw DomainError("resize_bilinear: target dims must be positive");
  std::vector<float> dst(static_cast<std::size_t>(th) * tw);
  double sy = th > 1 ? static_cast<double>(h - 1) / (th - 1) : 0.0;
  double sx = tw > 1 ? static_cast<double>(w - 1) / (tw - 1) : 0.0;
  for (int i = 0; i < th; ++i) {
    double fy = i * sy;
    int y0 = static_cast<int>(fy);
    if (y0 > h - 2) y0 = h >= 2 ? h - 2 : 0;
    int y1 = h >= 2 ? y0 + 1 : y0;
    double dy = fy - y0;
    for (int j = 0; j < tw; ++j) {
      double fx = j * sx;
      int x0 = static_cast<int>(fx);
      if (x0 > w - 2) x0 = w >= 2 ? w - 2 : 0;
      int x1 = w >= 2 ? x0 + 1 : x0;
      double dx = fx - x0;
      double v00 = src[static_cast<std::size_t>(y0) * w + x0];
      double v01 = src[static_cast<std::size_t>(y0) * w + x1];
      double v10 = src[static_cast<std::size_t>(y1) * w + x0];
      double v11 = src[static_cast<std::size_t>(y1) * w + x1];
      double v = v00 + dx * (v01 - v00) + dy * (v10 - v00) +
                 dx * dy * (v00 + v11 - v01 - v10);
      dst[static_cast<std::size_t>(i) * tw + j] = static_cast<float>(v);
    }
  }
  return dst;
}

// Rec. 601 luma from 8-bit RGB, kept on the 0..255 scale.
inline float luminance601(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return 0.299f * r + 0.587f * g + 0.114f * b;
}

}  // namespace detail

}  // namespace docpretext
