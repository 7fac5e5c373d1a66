// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/polygon_ops.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

namespace trunkfuse {

namespace {

namespace bg = boost::geometry;
using BPoint = bg::model::d2::point_xy<double>;
// Counter-clockwise, closed.
using BPolygon = bg::model::polygon<BPoint, false, true>;
using BMulti = bg::model::multi_polygon<BPolygon>;

BPolygon to_boost(const Ring& ring) {
  BPolygon poly;
  for (const Point& p : ring) bg::append(poly.outer(), BPoint(p.x, p.y));
  bg::correct(poly);
  return poly;
}

PolygonSet from_boost(const BMulti& multi) {
  PolygonSet out;
  for (const auto& poly : multi) {
    Ring ring;
    const auto& outer = poly.outer();
    for (std::size_t i = 0; i + 1 < outer.size(); ++i) {
      ring.push_back({outer[i].x(), outer[i].y()});
    }
    if (ring.size() >= 3) out.outers.push_back(std::move(ring));
    out.hole_count += poly.inners().size();
  }
  return out;
}

}  // namespace

PolygonSet polygon_union(std::span<const Ring> rings) {
  BMulti acc;
  for (const Ring& r : rings) {
    BMulti next;
    bg::union_(acc, to_boost(r), next);
    acc = std::move(next);
  }
  return from_boost(acc);
}

PolygonSet polygon_difference(const Ring& a, const Ring& b) {
  BMulti out;
  bg::difference(to_boost(a), to_boost(b), out);
  return from_boost(out);
}

PolygonSet polygon_intersection(const Ring& a, const Ring& b) {
  BMulti out;
  bg::intersection(to_boost(a), to_boost(b), out);
  return from_boost(out);
}

double polygon_intersection_area(const Ring& a, const Ring& b) {
  BMulti out;
  bg::intersection(to_boost(a), to_boost(b), out);
  return bg::area(out);
}

std::size_t largest_ring(const PolygonSet& set) {
  std::size_t best = 0;
  double best_area = -1.0;
  for (std::size_t i = 0; i < set.outers.size(); ++i) {
    const double a = std::abs(signed_area(set.outers[i]));
    if (a > best_area) {
      best_area = a;
      best = i;
    }
  }
  return best;
}

}  // namespace trunkfuse
