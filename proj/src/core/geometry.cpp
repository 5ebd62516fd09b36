#include "supbench/core/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace supbench::geom {

double signed_area(const Ring& ring) {
  if (ring.size() < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto& a = ring[i];
    const auto& b = ring[(i + 1) % ring.size()];
    acc += a.x * b.y - b.x * a.y;
  }
  return 0.5 * acc;
}

BoxD bounding_box(const Ring& ring) {
  BoxD box;
  if (ring.empty()) return box;
  box.x1 = box.x2 = ring[0].x;
  box.y1 = box.y2 = ring[0].y;
  for (const auto& p : ring) {
    box.x1 = std::min(box.x1, p.x);
    box.y1 = std::min(box.y1, p.y);
    box.x2 = std::max(box.x2, p.x);
    box.y2 = std::max(box.y2, p.y);
  }
  return box;
}

namespace {

enum class Edge { Left, Right, Top, Bottom };

bool inside(const PointD& p, Edge e, const BoxD& b) {
  switch (e) {
    case Edge::Left: return p.x >= b.x1;
    case Edge::Right: return p.x <= b.x2;
    case Edge::Top: return p.y >= b.y1;
    case Edge::Bottom: return p.y <= b.y2;
  }
  return false;
}

PointD intersect(const PointD& a, const PointD& b, Edge e, const BoxD& box) {
  // Intersection of segment ab with an axis-aligned clip line.
  if (e == Edge::Left || e == Edge::Right) {
    const double x = (e == Edge::Left) ? box.x1 : box.x2;
    const double t = (x - a.x) / (b.x - a.x);
    return {x, a.y + t * (b.y - a.y)};
  }
  const double y = (e == Edge::Top) ? box.y1 : box.y2;
  const double t = (y - a.y) / (b.y - a.y);
  return {a.x + t * (b.x - a.x), y};
}

Ring clip_edge(const Ring& input, Edge e, const BoxD& box) {
  Ring out;
  out.reserve(input.size() + 2);
  for (std::size_t i = 0; i < input.size(); ++i) {
    const PointD& cur = input[i];
    const PointD& prev = input[(i + input.size() - 1) % input.size()];
    const bool cur_in = inside(cur, e, box);
    const bool prev_in = inside(prev, e, box);
    if (cur_in) {
      if (!prev_in) out.push_back(intersect(prev, cur, e, box));
      out.push_back(cur);
    } else if (prev_in) {
      out.push_back(intersect(prev, cur, e, box));
    }
  }
  return out;
}

}  // namespace

Ring clip_to_box(const Ring& ring, const BoxD& box) {
  if (ring.size() < 3) return {};
  Ring out = clip_edge(ring, Edge::Left, box);
  if (out.empty()) return {};
  out = clip_edge(out, Edge::Right, box);
  if (out.empty()) return {};
  out = clip_edge(out, Edge::Top, box);
  if (out.empty()) return {};
  out = clip_edge(out, Edge::Bottom, box);
  if (out.size() < 3) return {};
  // Polygons merely touching the box collapse to a zero-area sliver along
  // the clip line; exact zero because clip intersections on axis-aligned
  // lines carry exact coordinates.
  if (signed_area(out) == 0.0) return {};
  return out;
}

GridMask make_grid_mask(int width, int height) {
  GridMask m;
  m.width = width;
  m.height = height;
  m.values.assign(static_cast<std::size_t>(width) * height, 0);
  return m;
}

std::size_t GridMask::count() const {
  return static_cast<std::size_t>(
      std::accumulate(values.begin(), values.end(), std::size_t{0}));
}

namespace {

// Clipping a polygon re-derives its sloped edges from rounded cut vertices,
// so span endpoints computed for a clipped piece differ from the whole
// polygon's by a few ulps. Pixel ownership is decided against endpoint-0.5
// shifted by this epsilon so that those ulps never flip a pixel; legitimate
// crossings sit either exactly on or far (>> eps) from pixel centers for
// coordinates at annotation scale.
constexpr double kRasterEps = 1e-9;

int first_center_at_or_after(double x) {
  return static_cast<int>(std::ceil(x - 0.5 - kRasterEps));
}

// Crossings of polygon edges with the horizontal line y = cy.
// Edges cover scanlines half-open in y: [ymin, ymax).
void scanline_crossings(const Ring& ring, double cy, std::vector<double>& xs) {
  xs.clear();
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const PointD& a = ring[i];
    const PointD& b = ring[(i + 1) % n];
    if (a.y == b.y) continue;
    const PointD& lo = (a.y < b.y) ? a : b;
    const PointD& hi = (a.y < b.y) ? b : a;
    if (cy < lo.y || cy >= hi.y) continue;
    const double t = (cy - lo.y) / (hi.y - lo.y);
    xs.push_back(lo.x + t * (hi.x - lo.x));
  }
  std::sort(xs.begin(), xs.end());
}

template <typename FillFn>
void scan_polygon(const Ring& ring, int width, int height, FillFn&& fill) {
  if (ring.size() < 3 || width <= 0 || height <= 0) return;
  const BoxD bb = bounding_box(ring);
  const int y_begin = std::max(0, static_cast<int>(std::floor(bb.y1 - 0.5)));
  const int y_end = std::min(height - 1, static_cast<int>(std::ceil(bb.y2)));
  std::vector<double> xs;
  for (int py = y_begin; py <= y_end; ++py) {
    const double cy = py + 0.5;
    scanline_crossings(ring, cy, xs);
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Pixel centers in [enter, exit), half-open.
      const int px_begin = std::max(0, first_center_at_or_after(xs[k]));
      const int px_end =
          std::min(width - 1, first_center_at_or_after(xs[k + 1]) - 1);
      for (int px = px_begin; px <= px_end; ++px) fill(px, py);
    }
  }
}

}  // namespace

void fill_polygon(const Ring& ring, GridMask& mask) {
  scan_polygon(ring, mask.width, mask.height,
               [&mask](int x, int y) { mask.set(x, y, true); });
}

std::size_t rasterized_area(const Ring& ring, int width, int height) {
  std::size_t n = 0;
  scan_polygon(ring, width, height, [&n](int, int) { ++n; });
  return n;
}

void fill_box(const BoxD& box, GridMask& mask) {
  const int px_begin = std::max(0, first_center_at_or_after(box.x1));
  const int px_end =
      std::min(mask.width - 1, first_center_at_or_after(box.x2) - 1);
  const int py_begin = std::max(0, first_center_at_or_after(box.y1));
  const int py_end =
      std::min(mask.height - 1, first_center_at_or_after(box.y2) - 1);
  for (int py = py_begin; py <= py_end; ++py)
    for (int px = px_begin; px <= px_end; ++px) mask.set(px, py, true);
}

double box_iou(const BoxD& a, const BoxD& b) {
  const double ix1 = std::max(a.x1, b.x1);
  const double iy1 = std::max(a.y1, b.y1);
  const double ix2 = std::min(a.x2, b.x2);
  const double iy2 = std::min(a.y2, b.y2);
  const double iw = std::max(0.0, ix2 - ix1);
  const double ih = std::max(0.0, iy2 - iy1);
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

}  // namespace supbench::geom
