// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trunkfuse {

RasterGrid make_grid(const std::optional<ImageSize>& image,
                     std::span<const Point> extent_points, int raster_size) {
  RasterGrid g;
  if (image) {
    g.width = image->width;
    g.height = image->height;
    return g;
  }
  g.width = g.height = raster_size;
  if (extent_points.empty()) return g;
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  for (const Point& p : extent_points) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  const double span = std::max(max_x - min_x, max_y - min_y);
  g.scale = span > 0.0 ? raster_size / span : 1.0;
  g.origin_x = min_x;
  g.origin_y = min_y;
  return g;
}

Mask rasterize(std::span<const Point> ring, const RasterGrid& grid) {
  Mask m;
  if (ring.size() < 3) return m;
  std::vector<Point> pts;
  pts.reserve(ring.size());
  double min_y = std::numeric_limits<double>::infinity();
  double max_y = -min_y;
  double min_x = min_y;
  double max_x = -min_y;
  for (const Point& p : ring) {
    const Point q{(p.x - grid.origin_x) * grid.scale, (p.y - grid.origin_y) * grid.scale};
    pts.push_back(q);
    min_x = std::min(min_x, q.x);
    max_x = std::max(max_x, q.x);
    min_y = std::min(min_y, q.y);
    max_y = std::max(max_y, q.y);
  }
  // Pixel j is sampled at j + 0.5; keep rows/columns whose centers can hit.
  const int j0 = std::max(0, static_cast<int>(std::ceil(min_y - 0.5)));
  const int j1 = std::min(grid.height - 1, static_cast<int>(std::floor(max_y - 0.5)));
  const int i0 = std::max(0, static_cast<int>(std::ceil(min_x - 0.5)));
  const int i1 = std::min(grid.width - 1, static_cast<int>(std::floor(max_x - 0.5)));
  if (j1 < j0 || i1 < i0) return m;
  m.x0 = i0;
  m.y0 = j0;
  m.width = i1 - i0 + 1;
  m.height = j1 - j0 + 1;
  m.bits.assign(static_cast<std::size_t>(m.width) * m.height, 0);

  std::vector<double> xs;
  const std::size_t n = pts.size();
  for (int j = j0; j <= j1; ++j) {
    const double y = j + 0.5;
    xs.clear();
    for (std::size_t k = 0; k < n; ++k) {
      const Point a = pts[k];
      const Point b = pts[(k + 1) % n];
      if ((a.y <= y) != (b.y <= y)) {
        xs.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    std::uint8_t* row = m.bits.data() + static_cast<std::size_t>(j - j0) * m.width;
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Centers i + 0.5 in [xa, xb).
      const int a = std::max(i0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      const int b = std::min(i1, static_cast<int>(std::ceil(xs[k + 1] - 0.5)) - 1);
      for (int i = a; i <= b; ++i) row[i - i0] = 1;
    }
  }
  for (std::uint8_t v : m.bits) m.area += v;
  return m;
}

std::int64_t intersection_count(const Mask& a, const Mask& b) {
  const int x0 = std::max(a.x0, b.x0);
  const int y0 = std::max(a.y0, b.y0);
  const int x1 = std::min(a.x0 + a.width, b.x0 + b.width);
  const int y1 = std::min(a.y0 + a.height, b.y0 + b.height);
  std::int64_t count = 0;
  for (int y = y0; y < y1; ++y) {
    const std::uint8_t* ra = a.bits.data() + static_cast<std::size_t>(y - a.y0) * a.width;
    const std::uint8_t* rb = b.bits.data() + static_cast<std::size_t>(y - b.y0) * b.width;
    for (int x = x0; x < x1; ++x) count += ra[x - a.x0] & rb[x - b.x0];
  }
  return count;
}

double mask_iou(const Mask& a, const Mask& b) {
  const std::int64_t inter = intersection_count(a, b);
  const std::int64_t uni = a.area + b.area - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

}  // namespace trunkfuse
