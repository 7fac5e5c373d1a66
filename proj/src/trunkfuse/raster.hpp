// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// Polygon rasterization on a shared pixel grid. A pixel belongs to a polygon
// when its center lies inside (even-odd rule, half-open on the right).

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trunkfuse/geometry.hpp"
#include "trunkfuse/model.hpp"

namespace trunkfuse {

// World point p maps to grid coordinate (p - origin) * scale; pixel (i, j)
// covers [i, i+1) x [j, j+1) in grid coordinates.
struct RasterGrid {
  int width = 0;
  int height = 0;
  double scale = 1.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
};

inline constexpr int kDefaultRasterSize = 1024;

// Image grid when the size is known, otherwise a raster_size x raster_size
// grid scaled so that `extent_points` fit.
RasterGrid make_grid(const std::optional<ImageSize>& image,
                     std::span<const Point> extent_points,
                     int raster_size = kDefaultRasterSize);

// Binary mask stored over its bounding window of the grid.
struct Mask {
  int x0 = 0;
  int y0 = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;
  std::int64_t area = 0;

  bool at(int x, int y) const {
    return x >= x0 && y >= y0 && x < x0 + width && y < y0 + height &&
           bits[static_cast<std::size_t>(y - y0) * width + (x - x0)] != 0;
  }
};

Mask rasterize(std::span<const Point> ring, const RasterGrid& grid);
std::int64_t intersection_count(const Mask& a, const Mask& b);
// Plain mask IoU; 0 when both masks are empty.
double mask_iou(const Mask& a, const Mask& b);

}  // namespace trunkfuse
