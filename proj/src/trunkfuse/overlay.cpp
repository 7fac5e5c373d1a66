// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "trunkfuse/error.hpp"
#include "trunkfuse/metrics.hpp"

namespace trunkfuse {

Canvas::Canvas(const RasterGrid& grid)
    : grid_(grid), rgb_(static_cast<std::size_t>(grid.width) * grid.height * 3, 24) {}

Point Canvas::to_pixel(Point p) const {
  return {(p.x - grid_.origin_x) * grid_.scale, (p.y - grid_.origin_y) * grid_.scale};
}

void Canvas::blend(int x, int y, Rgb c, double alpha) {
  if (x < 0 || y < 0 || x >= grid_.width || y >= grid_.height) return;
  auto* px = &rgb_[(static_cast<std::size_t>(y) * grid_.width + x) * 3];
  const std::uint8_t src[3] = {c.r, c.g, c.b};
  for (int k = 0; k < 3; ++k) {
    px[k] = static_cast<std::uint8_t>(std::lround((1.0 - alpha) * px[k] + alpha * src[k]));
  }
}

void Canvas::fill(std::span<const Point> ring, Rgb color, double alpha) {
  const Mask m = rasterize(ring, grid_);
  for (int y = 0; y < m.height; ++y) {
    for (int x = 0; x < m.width; ++x) {
      if (m.bits[static_cast<std::size_t>(y) * m.width + x]) {
        blend(m.x0 + x, m.y0 + y, color, alpha);
      }
    }
  }
}

void Canvas::line(Point a, Point b, Rgb color) {
  const Point pa = to_pixel(a);
  const Point pb = to_pixel(b);
  const double len = std::max(std::abs(pb.x - pa.x), std::abs(pb.y - pa.y));
  const int steps = std::max(1, static_cast<int>(std::ceil(len)));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    blend(static_cast<int>(std::floor(pa.x + t * (pb.x - pa.x))),
          static_cast<int>(std::floor(pa.y + t * (pb.y - pa.y))), color, 1.0);
  }
}

void Canvas::box(const OrientedBox& b, Rgb color) {
  const auto c = b.corners();
  for (std::size_t i = 0; i < 4; ++i) line(c[i], c[(i + 1) % 4], color);
}

void Canvas::dot(Point p, Rgb color, int radius) {
  const Point q = to_pixel(p);
  const int cx = static_cast<int>(std::floor(q.x));
  const int cy = static_cast<int>(std::floor(q.y));
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) blend(cx + dx, cy + dy, color, 1.0);
    }
  }
}

void Canvas::write_ppm(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, path.string() + ": cannot write");
  out << "P6\n" << grid_.width << ' ' << grid_.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb_.data()), static_cast<std::streamsize>(rgb_.size()));
  if (!out) throw Error(ErrorCode::kIoError, path.string() + ": write failed");
}

Rgb class_color(ComponentClass cls) {
  switch (cls) {
    case ComponentClass::kSide: return {60, 160, 230};
    case ComponentClass::kCut: return {240, 170, 40};
    case ComponentClass::kBound: return {200, 60, 200};
    case ComponentClass::kTrunk: return {90, 200, 90};
  }
  return {255, 255, 255};
}

void draw_trunk(Canvas& canvas, const UnifiedTrunk& trunk, std::optional<std::int64_t> track_id) {
  for (ComponentClass cls : kComponentClasses) {
    const auto& c = trunk.component(cls);
    if (!c) continue;
    const std::vector<Point> poly = component_polygon(*c);
    canvas.fill(poly, class_color(cls));
    canvas.box(c->obb, class_color(cls));
  }
  Rgb env{255, 255, 255};
  if (track_id) {
    const auto h = static_cast<std::uint64_t>(*track_id) * 0x9E3779B97F4A7C15ULL;
    env = {static_cast<std::uint8_t>(128 + (h >> 57)), static_cast<std::uint8_t>(128 + ((h >> 49) & 127)),
           static_cast<std::uint8_t>(128 + ((h >> 41) & 127))};
  }
  canvas.box(trunk.envelope, env);
  canvas.line(trunk.endpoints[0], trunk.endpoints[1], {255, 40, 40});
  canvas.dot(trunk.endpoints[0], {255, 40, 40});
  canvas.dot(trunk.endpoints[1], {255, 40, 40});
  if (trunk.cut_center) canvas.dot(*trunk.cut_center, {255, 255, 0}, 3);
}

RasterGrid overlay_grid(const std::optional<ImageSize>& image,
                        std::span<const UnifiedTrunk> trunks, int raster_size) {
  std::vector<Point> pts;
  if (!image) {
    for (const auto& t : trunks) {
      append_points(t, pts);
      const auto c = t.envelope.corners();
      pts.insert(pts.end(), c.begin(), c.end());
    }
  }
  return make_grid(image, pts, raster_size);
}

void write_overlay(const std::filesystem::path& dir, std::int64_t frame_id,
                   std::span<const UnifiedTrunk> trunks, std::span<const std::int64_t> track_ids,
                   const std::optional<ImageSize>& image, int raster_size) {
  std::filesystem::create_directories(dir);
  Canvas canvas(overlay_grid(image, trunks, raster_size));
  for (std::size_t i = 0; i < trunks.size(); ++i) {
    std::optional<std::int64_t> id;
    if (i < track_ids.size()) id = track_ids[i];
    draw_trunk(canvas, trunks[i], id);
  }
  char name[48];
  std::snprintf(name, sizeof name, "frame_%06lld.ppm", static_cast<long long>(frame_id));
  canvas.write_ppm(dir / name);
}

}  // namespace trunkfuse
