#ifndef TOWBOT_PERCEPTION_HPP_
#define TOWBOT_PERCEPTION_HPP_

#include <array>
#include <cstdint>
#include <vector>

#include "towbot/geometry.hpp"
#include "towbot/image.hpp"

namespace towbot {

// Lane-extraction pipeline: BEV warp, K-means color quantization,
// HSV conversion, hue binarization, contour extraction.

// 3x3 projective matrix, normalized so the bottom-right entry is 1.
class Homography {
 public:
  Homography();  // identity
  explicit Homography(const std::array<double, 9>& m);

  // Maps the unit correspondence src[i] -> dst[i] (4-point DLT).
  static Homography from_corners(const std::array<Vec2, 4>& src,
                                 const std::array<Vec2, 4>& dst);

  Vec2 apply(const Vec2& p) const;
  Homography inverse() const;
  double at(int r, int c) const { return m_[3 * r + c]; }

 private:
  std::array<double, 9> m_;
};

struct ColorModel {
  int k{3};             // quantization cluster count, >= 2
  double hue_min{0.0};  // degrees; range may wrap across 0
  double hue_max{360.0};
  double sat_min{0.25};
  double val_min{0.20};
};

// Fill color for BEV pixels that sample outside the source image; excluded
// from clustering and never matched by binarize_hue.
inline constexpr Rgb kBevSentinel{255, 0, 255};

RgbImage warp_to_bev(const RgbImage& img, const Homography& h, int out_w, int out_h);

struct QuantizeResult {
  RgbImage image;
  std::vector<Rgb> palette;
  bool degenerate{false};  // fewer distinct colors than k; image returned unchanged
};

QuantizeResult quantize_colors(const RgbImage& img, int k, std::uint32_t seed);

HsvImage rgb_to_hsv(const RgbImage& img);
Hsv rgb_to_hsv(Rgb c);
Rgb hsv_to_rgb(const Hsv& c);

bool hue_in_range(double h, const ColorModel& m);
BinaryMask binarize_hue(const HsvImage& img, const ColorModel& m);

struct PixelCoord {
  int x{0}, y{0};
  bool operator==(const PixelCoord&) const = default;
};

using Contour = std::vector<PixelCoord>;

// Outer contour of every 8-connected foreground component with at least
// min_area pixels, traced by Moore border following.
std::vector<Contour> extract_contours(const BinaryMask& mask, int min_area = 64);

// Keeps only 8-connected components of at least min_area pixels.
BinaryMask filter_small_components(const BinaryMask& mask, int min_area);

}  // namespace towbot

#endif  // TOWBOT_PERCEPTION_HPP_
