#ifndef TOWBOT_IMAGE_HPP_
#define TOWBOT_IMAGE_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace towbot {

struct Rgb {
  std::uint8_t r{0}, g{0}, b{0};
  bool operator==(const Rgb&) const = default;
};

struct Hsv {
  double h{0.0};  // degrees [0, 360)
  double s{0.0};  // [0, 1]
  double v{0.0};  // [0, 1]
};

namespace detail {
inline void check_dims(int w, int h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("image dimensions must be positive");
}
}  // namespace detail

class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {}) : w_(w), h_(h) {
    detail::check_dims(w, h);
    px_.assign(static_cast<std::size_t>(w) * h, fill);
  }

  int width() const { return w_; }
  int height() const { return h_; }
  Rgb& at(int x, int y) { return px_[static_cast<std::size_t>(y) * w_ + x]; }
  const Rgb& at(int x, int y) const { return px_[static_cast<std::size_t>(y) * w_ + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < w_ && y >= 0 && y < h_; }
  const std::vector<Rgb>& pixels() const { return px_; }
  std::vector<Rgb>& pixels() { return px_; }

  bool operator==(const RgbImage&) const = default;

 private:
  int w_{0}, h_{0};
  std::vector<Rgb> px_;
};

class HsvImage {
 public:
  HsvImage() = default;
  HsvImage(int w, int h) : w_(w), h_(h) {
    detail::check_dims(w, h);
    px_.assign(static_cast<std::size_t>(w) * h, Hsv{});
  }

  int width() const { return w_; }
  int height() const { return h_; }
  Hsv& at(int x, int y) { return px_[static_cast<std::size_t>(y) * w_ + x]; }
  const Hsv& at(int x, int y) const { return px_[static_cast<std::size_t>(y) * w_ + x]; }

 private:
  int w_{0}, h_{0};
  std::vector<Hsv> px_;
};

class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int w, int h, bool fill = false) : w_(w), h_(h) {
    detail::check_dims(w, h);
    px_.assign(static_cast<std::size_t>(w) * h, fill ? 1 : 0);
  }

  int width() const { return w_; }
  int height() const { return h_; }
  bool get(int x, int y) const { return px_[static_cast<std::size_t>(y) * w_ + x] != 0; }
  void set(int x, int y, bool v) { px_[static_cast<std::size_t>(y) * w_ + x] = v ? 1 : 0; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < w_ && y >= 0 && y < h_; }
  std::size_t count() const;

  bool operator==(const BinaryMask&) const = default;

 private:
  int w_{0}, h_{0};
  std::vector<std::uint8_t> px_;
};

// Binary PPM (P6): "P6\n<w> <h>\n255\n" followed by RGB triples.
void write_ppm(const RgbImage& img, const std::string& path);
RgbImage read_ppm(const std::string& path);

// Masks serialize as black/white P6 images.
void write_ppm(const BinaryMask& mask, const std::string& path);

}  // namespace towbot

#endif  // TOWBOT_IMAGE_HPP_
