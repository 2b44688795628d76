#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "atagan/tensor.hpp"

namespace atagan {

/// Maps [0,1] to 0..255 with round-half-even; values outside [0,1] are
/// clamped and NaN throws std::invalid_argument.
std::uint8_t quantize(double v);

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, interleaved RGB
};

/// Binary P5 / P6 with maxval 255. Readers accept '#' comments in the header
/// and throw FormatError on anything else that is malformed; I/O failures
/// throw std::runtime_error.
void write_pgm(const std::filesystem::path& path, const GrayImage& img);
void write_ppm(const std::filesystem::path& path, const RgbImage& img);
GrayImage read_pgm(const std::filesystem::path& path);
RgbImage read_ppm(const std::filesystem::path& path);

/// Image tensors are [H,W] or [1,H,W].
GrayImage to_gray(const Tensor& image);
Tensor from_gray(const GrayImage& img);  // [1,H,W], values k/255
void write_pgm(const std::filesystem::path& path, const Tensor& image);
Tensor read_pgm_tensor(const std::filesystem::path& path);

inline constexpr double kOverlayAlpha = 0.6;

/// Red-on-gray attention overlay. For gray value g and attention a (both in
/// [0,1], same shape):
///   R = (1 - alpha*a)*g + alpha*a
///   G = B = (1 - alpha*a)*g
/// then each channel is quantized.
RgbImage overlay(const Tensor& image, const Tensor& attention, double alpha = kOverlayAlpha);

/// Tiles [N,1,H,W] images into a grid with `cols` columns and a `pad` pixel
/// border of value `pad_value`.
GrayImage tile(const Tensor& images, std::size_t cols, std::size_t pad = 2,
               std::uint8_t pad_value = 255);

}  // namespace atagan
