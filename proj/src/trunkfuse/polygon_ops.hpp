// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

// General polygon booleans for annotation export, backed by Boost.Geometry.
// Rings are counter-clockwise vertex lists without a closing duplicate.

#pragma once

#include <span>
#include <vector>

#include "trunkfuse/geometry.hpp"

namespace trunkfuse {

using Ring = std::vector<Point>;

struct PolygonSet {
  std::vector<Ring> outers;
  std::size_t hole_count = 0;
};

PolygonSet polygon_union(std::span<const Ring> rings);
PolygonSet polygon_difference(const Ring& a, const Ring& b);
PolygonSet polygon_intersection(const Ring& a, const Ring& b);
double polygon_intersection_area(const Ring& a, const Ring& b);

// Index of the outer ring with the largest area; outers must be non-empty.
std::size_t largest_ring(const PolygonSet& set);

}  // namespace trunkfuse
