#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tractparc/errors.hpp"
#include "tractparc/geometry.hpp"

namespace tractparc {

// Streamline category under a cutting plane.
enum class CutStatus { Unaffected, Cut, Removed, Unknown };

inline const char* to_string(CutStatus s) {
  switch (s) {
    case CutStatus::Unaffected: return "unaffected";
    case CutStatus::Cut: return "cut";
    case CutStatus::Removed: return "removed";
    default: return "unknown";
  }
}

inline CutStatus cut_status_from_string(const std::string& s) {
  if (s == "unaffected") return CutStatus::Unaffected;
  if (s == "cut") return CutStatus::Cut;
  if (s == "removed") return CutStatus::Removed;
  if (s == "unknown") return CutStatus::Unknown;
  throw ParseError("unknown cut_status value: \"" + s + "\"");
}

// One fiber trajectory: an ordered 3D polyline in millimeters (RAS world
// space), with an optional tract label and its category under cutting.
struct Streamline {
  std::vector<Vec3> points;
  std::optional<int> label;
  CutStatus cut_status = CutStatus::Unknown;
  std::optional<int> source_index;

  int n_points() const { return static_cast<int>(points.size()); }
};

struct Tractogram {
  std::vector<Streamline> streamlines;
  std::string subject_id;
  std::string space_tag = "ras";
  std::vector<std::string> class_names;

  std::size_t size() const { return streamlines.size(); }
  bool empty() const { return streamlines.empty(); }
};

inline void validate_polyline(std::span<const Vec3> pts) {
  if (pts.size() < 2)
    throw InvalidStreamline("streamline needs at least 2 points, got " +
                            std::to_string(pts.size()));
  for (const Vec3& p : pts)
    if (!is_finite(p)) throw InvalidStreamline("streamline contains a non-finite coordinate");
}

inline double polyline_length(std::span<const Vec3> pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += distance(pts[i - 1], pts[i]);
  return len;
}

// Places n points at equal arc-length intervals along the input polyline.
// Endpoints are copied exactly; degenerate (zero total length) inputs are
// rejected because the arc-length parameterization is undefined for them.
inline std::vector<Vec3> resample_polyline(std::span<const Vec3> pts, int n) {
  validate_polyline(pts);
  if (n < 2) throw InvalidStreamline("resample target must be >= 2 points");

  std::vector<double> cum(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i)
    cum[i] = cum[i - 1] + distance(pts[i - 1], pts[i]);
  const double total = cum.back();
  if (total <= 0.0) throw InvalidStreamline("zero-length streamline cannot be resampled");

  std::vector<Vec3> out(static_cast<std::size_t>(n));
  out.front() = pts.front();
  out.back() = pts.back();
  std::size_t seg = 0;
  for (int i = 1; i + 1 < n; ++i) {
    const double target = total * static_cast<double>(i) / static_cast<double>(n - 1);
    while (seg + 2 < pts.size() && cum[seg + 1] < target) ++seg;
    const double seg_len = cum[seg + 1] - cum[seg];
    const double t = seg_len > 0.0 ? (target - cum[seg]) / seg_len : 0.0;
    out[static_cast<std::size_t>(i)] = lerp(pts[seg], pts[seg + 1], t);
  }
  return out;
}

inline Streamline resample_streamline(const Streamline& s, int n) {
  Streamline out = s;
  out.points = resample_polyline(s.points, n);
  return out;
}

// Minimum average direct-flip distance: the standard orientation-invariant
// metric between equal-length streamlines.
inline double mdf_distance(std::span<const Vec3> a, std::span<const Vec3> b) {
  if (a.size() != b.size())
    throw ShapeMismatch("mdf_distance needs equal point counts, got " +
                        std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  if (a.empty()) throw ShapeMismatch("mdf_distance on empty streamlines");
  const std::size_t n = a.size();
  double fwd = 0.0, rev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fwd += distance(a[i], b[i]);
    rev += distance(a[i], b[n - 1 - i]);
  }
  return std::min(fwd, rev) / static_cast<double>(n);
}

inline double mdf_distance(const Streamline& a, const Streamline& b) {
  return mdf_distance(std::span<const Vec3>(a.points), std::span<const Vec3>(b.points));
}

inline Aabb bounding_box(const Tractogram& t) {
  Aabb box;
  for (const auto& s : t.streamlines)
    for (const auto& p : s.points) box.expand(p);
  return box;
}

// Midpoint of the axis-aligned bounding box of all points. Defined on the
// bbox rather than the point centroid so that nonuniform streamline density
// cannot move the FOV-cut band.
inline Vec3 brain_center(const Tractogram& t) {
  if (t.empty()) throw EmptyTractogram("brain_center of an empty tractogram");
  const Aabb box = bounding_box(t);
  if (box.empty()) throw EmptyTractogram("brain_center: tractogram has no points");
  return box.center();
}

}  // namespace tractparc
