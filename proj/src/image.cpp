#include "towbot/image.hpp"

#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace towbot {

std::size_t BinaryMask::count() const {
  return std::accumulate(px_.begin(), px_.end(), std::size_t{0});
}

void write_ppm(const RgbImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels().data()),
            static_cast<std::streamsize>(img.pixels().size() * sizeof(Rgb)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

RgbImage read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || maxval != 255) throw std::runtime_error("unsupported PPM: " + path);
  in.get();  // single whitespace after maxval
  RgbImage img(w, h);
  in.read(reinterpret_cast<char*>(img.pixels().data()),
          static_cast<std::streamsize>(img.pixels().size() * sizeof(Rgb)));
  if (!in) throw std::runtime_error("truncated PPM: " + path);
  return img;
}

void write_ppm(const BinaryMask& mask, const std::string& path) {
  RgbImage img(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.get(x, y)) img.at(x, y) = {255, 255, 255};
  write_ppm(img, path);
}

}  // namespace towbot
