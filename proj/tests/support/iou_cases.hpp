// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// Multi-component instances on a 32 x 32 image with their component-wise
// IoU counted pixel by pixel.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "support/oracles.hpp"
#include "trunkfuse/model.hpp"

namespace trunkfuse::testing {

struct IouCase {
  GroundTruthInstance gt;
  UnifiedTrunk pred;
  std::int64_t intersection = 0;  // summed over labels
  std::int64_t union_ = 0;
};

inline std::vector<Point> rect(double x0, double y0, double x1, double y1) {
  return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

inline std::int64_t count_pixels(const std::vector<Point>* a, const std::vector<Point>* b,
                                 bool both) {
  std::int64_t n = 0;
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      const bool in_a = a && pixel_in_polygon(*a, x + 0.5, y + 0.5);
      const bool in_b = b && pixel_in_polygon(*b, x + 0.5, y + 0.5);
      if (both ? (in_a && in_b) : (in_a || in_b)) ++n;
    }
  }
  return n;
}

inline void add_component(IouCase& c, ComponentClass cls, const std::vector<Point>* g,
                          const std::vector<Point>* p) {
  if (g) c.gt.components.emplace(cls, Contour(*g));
  if (p) {
    ComponentInstance inst{cls, min_area_obb(*p), Contour(*p), 1.0, std::nullopt, std::nullopt};
    c.pred.component(cls) = inst;
  }
  c.intersection += count_pixels(g, p, true);
  c.union_ += count_pixels(g, p, false);
}

// Side overlaps 50 of 150 pixels, cut identical on 20 pixels: 70 / 170.
inline IouCase seventy_over_one_seventy() {
  IouCase c;
  const auto gs = rect(0, 0, 10, 10);
  const auto ps = rect(5, 0, 15, 10);
  const auto cut = rect(20, 20, 24, 25);
  add_component(c, ComponentClass::kSide, &gs, &ps);
  add_component(c, ComponentClass::kCut, &cut, &cut);
  return c;
}

// Random rectangles and triangles per class; some classes present on one
// side only.
inline IouCase random_case(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> coord(0, 28);
  std::uniform_int_distribution<int> extent(2, 12);
  std::uniform_int_distribution<int> presence(0, 3);
  auto shape = [&](bool triangle) {
    const int x = coord(gen);
    const int y = coord(gen);
    const int w = extent(gen);
    const int h = extent(gen);
    if (triangle) {
      // The quarter-pixel offset keeps pixel centers off the slanted edge.
      return std::vector<Point>{{double(x), double(y)}, {double(x + w), double(y)},
                                {double(x), y + h + 0.25}};
    }
    return rect(x, y, x + w, y + h);
  };
  IouCase c;
  bool any = false;
  for (ComponentClass cls : kComponentClasses) {
    const int p = presence(gen);  // 0 none, 1 gt only, 2 pred only, 3 both
    if (p == 0 && !(cls == ComponentClass::kBound && !any)) continue;
    const auto g = shape(gen() % 2 == 0);
    const auto q = shape(gen() % 2 == 0);
    add_component(c, cls, p == 2 ? nullptr : &g, p == 1 ? nullptr : &q);
    any = true;
  }
  return c;
}

}  // namespace trunkfuse::testing
