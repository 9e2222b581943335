#include "towbot/perception.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace towbot {

namespace {

// Solves A x = b for an n x n system by Gaussian elimination with partial
// pivoting. Throws on a (near-)singular system.
void solve_linear(std::vector<double>& a, std::vector<double>& b, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    if (std::abs(a[pivot * n + col]) < 1e-12)
      throw std::invalid_argument("singular system");
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
    b[r] = s / a[r * n + r];
  }
}

double sq_dist(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const double dr = a[0] - b[0], dg = a[1] - b[1], db = a[2] - b[2];
  return dr * dr + dg * dg + db * db;
}

std::uint32_t pack(Rgb c) {
  return (std::uint32_t(c.r) << 16) | (std::uint32_t(c.g) << 8) | c.b;
}

}  // namespace

Homography::Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

Homography::Homography(const std::array<double, 9>& m) : m_(m) {
  if (m_[8] == 0.0) throw std::invalid_argument("homography: h33 must be nonzero");
  if (m_[8] != 1.0)
    for (double& v : m_) v /= m_[8];
}

Homography Homography::from_corners(const std::array<Vec2, 4>& src,
                                    const std::array<Vec2, 4>& dst) {
  // 8 unknowns h11..h32 with h33 = 1.
  std::vector<double> a(64, 0.0), b(8, 0.0);
  for (int i = 0; i < 4; ++i) {
    const double x = src[i].x, y = src[i].y, u = dst[i].x, v = dst[i].y;
    double* r0 = &a[(2 * i) * 8];
    double* r1 = &a[(2 * i + 1) * 8];
    r0[0] = x; r0[1] = y; r0[2] = 1; r0[6] = -u * x; r0[7] = -u * y;
    r1[3] = x; r1[4] = y; r1[5] = 1; r1[6] = -v * x; r1[7] = -v * y;
    b[2 * i] = u;
    b[2 * i + 1] = v;
  }
  solve_linear(a, b, 8);
  return Homography({b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7], 1.0});
}

Vec2 Homography::apply(const Vec2& p) const {
  const double w = m_[6] * p.x + m_[7] * p.y + m_[8];
  if (std::abs(w) < 1e-15) throw std::domain_error("homography: point at infinity");
  return {(m_[0] * p.x + m_[1] * p.y + m_[2]) / w,
          (m_[3] * p.x + m_[4] * p.y + m_[5]) / w};
}

Homography Homography::inverse() const {
  const double det =
      m_[0] * (m_[4] * m_[8] - m_[5] * m_[7]) -
      m_[1] * (m_[3] * m_[8] - m_[5] * m_[6]) +
      m_[2] * (m_[3] * m_[7] - m_[4] * m_[6]);
  if (std::abs(det) < 1e-12) throw std::invalid_argument("singular homography");
  std::array<double, 9> adj{
      m_[4] * m_[8] - m_[5] * m_[7], m_[2] * m_[7] - m_[1] * m_[8], m_[1] * m_[5] - m_[2] * m_[4],
      m_[5] * m_[6] - m_[3] * m_[8], m_[0] * m_[8] - m_[2] * m_[6], m_[2] * m_[3] - m_[0] * m_[5],
      m_[3] * m_[7] - m_[4] * m_[6], m_[1] * m_[6] - m_[0] * m_[7], m_[0] * m_[4] - m_[1] * m_[3]};
  for (double& v : adj) v /= det;
  return Homography(adj);
}

RgbImage warp_to_bev(const RgbImage& img, const Homography& h, int out_w, int out_h) {
  const Homography hinv = h.inverse();
  RgbImage out(out_w, out_h, kBevSentinel);
  const int w = img.width(), hh = img.height();
  for (int v = 0; v < out_h; ++v) {
    for (int u = 0; u < out_w; ++u) {
      const Vec2 p = hinv.apply({double(u), double(v)});
      if (p.x < 0.0 || p.y < 0.0 || p.x > w - 1 || p.y > hh - 1) continue;
      const int x0 = std::min(int(p.x), w - 2 >= 0 ? w - 2 : 0);
      const int y0 = std::min(int(p.y), hh - 2 >= 0 ? hh - 2 : 0);
      const double fx = p.x - x0, fy = p.y - y0;
      const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, hh - 1);
      const Rgb c00 = img.at(x0, y0), c10 = img.at(x1, y0);
      const Rgb c01 = img.at(x0, y1), c11 = img.at(x1, y1);
      auto lerp2 = [&](auto get) {
        const double top = get(c00) * (1 - fx) + get(c10) * fx;
        const double bot = get(c01) * (1 - fx) + get(c11) * fx;
        return top * (1 - fy) + bot * fy;
      };
      out.at(u, v) = {
          std::uint8_t(std::lround(lerp2([](Rgb c) { return double(c.r); }))),
          std::uint8_t(std::lround(lerp2([](Rgb c) { return double(c.g); }))),
          std::uint8_t(std::lround(lerp2([](Rgb c) { return double(c.b); })))};
    }
  }
  return out;
}

QuantizeResult quantize_colors(const RgbImage& img, int k, std::uint32_t seed) {
  if (k < 2) throw std::invalid_argument("quantize_colors: k must be >= 2");

  std::vector<std::size_t> live;  // indices of non-sentinel pixels
  live.reserve(img.pixels().size());
  std::unordered_set<std::uint32_t> distinct;
  for (std::size_t i = 0; i < img.pixels().size(); ++i) {
    const Rgb c = img.pixels()[i];
    if (c == kBevSentinel) continue;
    live.push_back(i);
    if (int(distinct.size()) < k) distinct.insert(pack(c));
  }
  if (int(distinct.size()) < k) return {img, {}, true};

  // Farthest-point seeding from a random first pixel.
  std::mt19937 rng(seed);
  std::vector<std::array<double, 3>> centroids;
  {
    const Rgb c0 = img.pixels()[live[std::uniform_int_distribution<std::size_t>(
        0, live.size() - 1)(rng)]];
    centroids.push_back({double(c0.r), double(c0.g), double(c0.b)});
  }
  std::vector<double> min_d(live.size(), 0.0);
  while (int(centroids.size()) < k) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < live.size(); ++i) {
      const Rgb c = img.pixels()[live[i]];
      const std::array<double, 3> p{double(c.r), double(c.g), double(c.b)};
      double d = sq_dist(p, centroids[0]);
      for (std::size_t j = 1; j < centroids.size(); ++j)
        d = std::min(d, sq_dist(p, centroids[j]));
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    const Rgb c = img.pixels()[live[best]];
    centroids.push_back({double(c.r), double(c.g), double(c.b)});
  }

  // Lloyd iteration; fixed accumulation order keeps this bit-deterministic.
  std::vector<int> assign(live.size(), 0);
  for (int iter = 0; iter < 50; ++iter) {
    std::vector<std::array<double, 3>> sums(k, {0, 0, 0});
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < live.size(); ++i) {
      const Rgb c = img.pixels()[live[i]];
      const std::array<double, 3> p{double(c.r), double(c.g), double(c.b)};
      int best = 0;
      double best_d = sq_dist(p, centroids[0]);
      for (int j = 1; j < k; ++j) {
        const double d = sq_dist(p, centroids[j]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      assign[i] = best;
      sums[best][0] += p[0];
      sums[best][1] += p[1];
      sums[best][2] += p[2];
      ++counts[best];
    }
    double move = 0.0;
    for (int j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;  // keep a starved centroid in place
      const std::array<double, 3> next{sums[j][0] / counts[j],
                                       sums[j][1] / counts[j],
                                       sums[j][2] / counts[j]};
      move = std::max(move, std::sqrt(sq_dist(next, centroids[j])));
      centroids[j] = next;
    }
    if (move < 0.5) break;
  }

  QuantizeResult res{img, {}, false};
  res.palette.reserve(k);
  for (const auto& c : centroids)
    res.palette.push_back({std::uint8_t(std::lround(c[0])),
                           std::uint8_t(std::lround(c[1])),
                           std::uint8_t(std::lround(c[2]))});
  for (std::size_t i = 0; i < live.size(); ++i)
    res.image.pixels()[live[i]] = res.palette[assign[i]];
  return res;
}

Hsv rgb_to_hsv(Rgb c) {
  const double r = c.r / 255.0, g = c.g / 255.0, b = c.b / 255.0;
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx > 0.0 ? delta / mx : 0.0;
  if (delta > 0.0) {
    if (mx == r)
      out.h = 60.0 * std::fmod((g - b) / delta + 6.0, 6.0);
    else if (mx == g)
      out.h = 60.0 * ((b - r) / delta + 2.0);
    else
      out.h = 60.0 * ((r - g) / delta + 4.0);
    if (out.h >= 360.0) out.h -= 360.0;
  }
  return out;
}

Rgb hsv_to_rgb(const Hsv& c) {
  const double h = std::fmod(std::fmod(c.h, 360.0) + 360.0, 360.0) / 60.0;
  const int i = int(h) % 6;
  const double f = h - int(h);
  const double p = c.v * (1.0 - c.s);
  const double q = c.v * (1.0 - c.s * f);
  const double t = c.v * (1.0 - c.s * (1.0 - f));
  double r = 0, g = 0, b = 0;
  switch (i) {
    case 0: r = c.v; g = t; b = p; break;
    case 1: r = q; g = c.v; b = p; break;
    case 2: r = p; g = c.v; b = t; break;
    case 3: r = p; g = q; b = c.v; break;
    case 4: r = t; g = p; b = c.v; break;
    default: r = c.v; g = p; b = q; break;
  }
  auto to8 = [](double v) { return std::uint8_t(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
  return {to8(r), to8(g), to8(b)};
}

HsvImage rgb_to_hsv(const RgbImage& img) {
  HsvImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.at(x, y) = rgb_to_hsv(img.at(x, y));
  return out;
}

bool hue_in_range(double h, const ColorModel& m) {
  if (m.hue_min <= m.hue_max) return h >= m.hue_min && h <= m.hue_max;
  return h >= m.hue_min || h <= m.hue_max;  // wrap-around across 0
}

BinaryMask binarize_hue(const HsvImage& img, const ColorModel& m) {
  BinaryMask out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const Hsv& p = img.at(x, y);
      out.set(x, y, p.s >= m.sat_min && p.v >= m.val_min && hue_in_range(p.h, m));
    }
  return out;
}

namespace {

// 8-connected component labeling; returns label image (-1 background) and
// per-label areas.
std::pair<std::vector<int>, std::vector<int>> label_components(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  std::vector<int> labels(static_cast<std::size_t>(w) * h, -1);
  std::vector<int> areas;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!mask.get(x, y) || labels[y * w + x] >= 0) continue;
      const int id = int(areas.size());
      areas.push_back(0);
      std::queue<PixelCoord> q;
      q.push({x, y});
      labels[y * w + x] = id;
      while (!q.empty()) {
        const PixelCoord p = q.front();
        q.pop();
        ++areas[id];
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = p.x + dx, ny = p.y + dy;
            if (!mask.in_bounds(nx, ny) || !mask.get(nx, ny)) continue;
            if (labels[ny * w + nx] >= 0) continue;
            labels[ny * w + nx] = id;
            q.push({nx, ny});
          }
      }
    }
  return {std::move(labels), std::move(areas)};
}

// Moore neighborhood in clockwise order starting East.
constexpr int kMooreDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kMooreDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

Contour trace_boundary(const BinaryMask& mask, const std::vector<int>& labels,
                       int label, PixelCoord start) {
  const int w = mask.width();
  auto is_fg = [&](int x, int y) {
    return mask.in_bounds(x, y) && labels[y * w + x] == label;
  };
  Contour contour{start};
  // The West neighbor of the row-major-first pixel of a component is
  // background, so the clockwise sweep starts from West. Jacob's criterion:
  // stop when the trace is back at the start pixel and about to repeat the
  // very first move.
  int back_dir = 4;
  PixelCoord cur = start;
  int first_move = -1;
  std::size_t guard = 4 * labels.size() + 8;
  while (guard-- > 0) {
    int dir = (back_dir + 1) % 8;
    int found = -1;
    for (int i = 0; i < 8; ++i, dir = (dir + 1) % 8) {
      if (is_fg(cur.x + kMooreDx[dir], cur.y + kMooreDy[dir])) {
        found = dir;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    if (cur == start) {
      if (found == first_move) break;
      if (first_move < 0) first_move = found;
    }
    cur = {cur.x + kMooreDx[found], cur.y + kMooreDy[found]};
    back_dir = (found + 4) % 8;
    contour.push_back(cur);
  }
  if (contour.size() > 1 && contour.back() == start) contour.pop_back();
  return contour;
}

}  // namespace

std::vector<Contour> extract_contours(const BinaryMask& mask, int min_area) {
  auto [labels, areas] = label_components(mask);
  const int w = mask.width(), h = mask.height();
  std::vector<Contour> out;
  std::vector<char> seen(areas.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int id = labels[y * w + x];
      if (id < 0 || seen[id]) continue;
      seen[id] = 1;
      if (areas[id] < min_area) continue;
      out.push_back(trace_boundary(mask, labels, id, {x, y}));
    }
  return out;
}

BinaryMask filter_small_components(const BinaryMask& mask, int min_area) {
  auto [labels, areas] = label_components(mask);
  const int w = mask.width(), h = mask.height();
  BinaryMask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int id = labels[y * w + x];
      out.set(x, y, id >= 0 && areas[id] >= min_area);
    }
  return out;
}

}  // namespace towbot
