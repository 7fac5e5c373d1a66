// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// Debug overlays: component masks, boxes and axes drawn into binary PPM
// images, one per frame.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "trunkfuse/model.hpp"
#include "trunkfuse/raster.hpp"

namespace trunkfuse {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
};

class Canvas {
 public:
  explicit Canvas(const RasterGrid& grid);

  void fill(std::span<const Point> ring, Rgb color, double alpha = 0.5);
  void line(Point a, Point b, Rgb color);
  void box(const OrientedBox& box, Rgb color);
  void dot(Point p, Rgb color, int radius = 2);
  void write_ppm(const std::filesystem::path& path) const;

  int width() const { return grid_.width; }
  int height() const { return grid_.height; }
  const std::vector<std::uint8_t>& pixels() const { return rgb_; }

 private:
  Point to_pixel(Point p) const;
  void blend(int x, int y, Rgb c, double alpha);

  RasterGrid grid_;
  std::vector<std::uint8_t> rgb_;
};

Rgb class_color(ComponentClass cls);

// Tracked trunks pass their id to vary the envelope color.
void draw_trunk(Canvas& canvas, const UnifiedTrunk& trunk,
                std::optional<std::int64_t> track_id = std::nullopt);

// Canvas sized to the image when known, else to the drawn content.
RasterGrid overlay_grid(const std::optional<ImageSize>& image,
                        std::span<const UnifiedTrunk> trunks, int raster_size);

void write_overlay(const std::filesystem::path& dir, std::int64_t frame_id,
                   std::span<const UnifiedTrunk> trunks,
                   std::span<const std::int64_t> track_ids,
                   const std::optional<ImageSize>& image, int raster_size);

}  // namespace trunkfuse
