#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tractparc/errors.hpp"
#include "tractparc/geometry.hpp"
#include "tractparc/parallel.hpp"
#include "tractparc/rng.hpp"
#include "tractparc/streamline.hpp"

namespace tractparc {

// Inferior field-of-view cutoff is simulated by an oriented plane below the
// brain center; everything on the negative side of the plane is outside the
// simulated FOV. Planes are constrained to 30-50 mm below the center with at
// most 30 degrees of tilt against the horizontal plane.

struct CutPlane {
  Vec3 anchor;            // on the plane: brain center + (0, 0, z_offset)
  Vec3 normal;            // unit, oriented superior (positive z)
  double z_offset = 0.0;  // mm below the brain center, in [-50, -30]
  double tilt_deg = 0.0;  // angle to the horizontal plane, in [0, 30]
  double azimuth_deg = 0.0;
  std::string space_tag;  // empty means "unchecked"
};

inline double signed_distance(const CutPlane& p, const Vec3& point) {
  return dot(point - p.anchor, p.normal);
}

inline CutPlane make_cut_plane(const Vec3& center, double z_offset, double tilt_deg,
                               double azimuth_deg, std::string space_tag = {}) {
  CutPlane p;
  p.z_offset = z_offset;
  p.tilt_deg = tilt_deg;
  p.azimuth_deg = azimuth_deg;
  p.normal = rotation_z(deg_to_rad(azimuth_deg)) *
             (rotation_y(deg_to_rad(tilt_deg)) * Vec3{0.0, 0.0, 1.0});
  p.anchor = center + Vec3{0.0, 0.0, z_offset};
  p.space_tag = std::move(space_tag);
  return p;
}

// z_offset ~ U[-50, -30], tilt ~ U[0, 30], azimuth ~ U[0, 360); the draw
// order is part of the determinism contract.
inline CutPlane sample_cut_plane(Rng& rng, const Vec3& center, std::string space_tag = {}) {
  const double z_offset = rng.uniform(-50.0, -30.0);
  const double tilt = rng.uniform(0.0, 30.0);
  const double azimuth = rng.uniform(0.0, 360.0);
  return make_cut_plane(center, z_offset, tilt, azimuth, std::move(space_tag));
}

struct CutCounts {
  std::int64_t unaffected = 0;
  std::int64_t cut = 0;
  std::int64_t removed = 0;

  std::int64_t total() const { return unaffected + cut + removed; }
};

struct CutResult {
  Tractogram tractogram;  // survivors in original order, labels preserved
  CutCounts counts;
  CutPlane plane;
};

namespace detail {

// Clips one polyline to the half-space s >= 0 and returns the longest
// contiguous surviving run by arc length. Crossing edges contribute their
// interpolated intersection point so the surviving arc length is exact.
inline std::vector<Vec3> longest_surviving_run(const std::vector<Vec3>& pts,
                                               const std::vector<double>& s) {
  std::vector<Vec3> best, current;
  double best_len = -1.0, current_len = 0.0;

  auto flush = [&] {
    if (current.size() >= 2 && current_len > best_len) {
      best = current;
      best_len = current_len;
    }
    current.clear();
    current_len = 0.0;
  };
  auto push = [&](const Vec3& p) {
    if (!current.empty()) current_len += distance(current.back(), p);
    current.push_back(p);
  };

  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (s[i] >= 0.0) {
      if (current.empty() && i > 0 && s[i - 1] < 0.0) {
        const double t = s[i - 1] / (s[i - 1] - s[i]);
        if (t > 0.0 && t < 1.0) push(lerp(pts[i - 1], pts[i], t));
      }
      push(pts[i]);
      if (i + 1 < pts.size() && s[i + 1] < 0.0) {
        const double t = s[i] / (s[i] - s[i + 1]);
        if (t > 0.0 && t < 1.0) push(lerp(pts[i], pts[i + 1], t));
        flush();
      }
    }
  }
  flush();
  return best;
}

}  // namespace detail

// Categorizes every streamline against the plane: all points on or above it
// -> Unaffected (geometry untouched); all strictly below -> Removed; mixed ->
// Cut, clipped to the surviving half-space. Runs that keep fewer than
// min_surviving_points original-or-intersection points count as Removed.
// With resample_output, surviving cut streamlines are resampled back to their
// original point count.
inline CutResult apply_cut(const Tractogram& t, const CutPlane& plane,
                           int min_surviving_points = 2, bool resample_output = true) {
  if (!plane.space_tag.empty() && plane.space_tag != t.space_tag)
    throw SpaceMismatch("plane space \"" + plane.space_tag + "\" vs tractogram space \"" +
                        t.space_tag + "\"");
  CutResult out;
  out.plane = plane;
  out.tractogram.subject_id = t.subject_id;
  out.tractogram.space_tag = t.space_tag;
  out.tractogram.class_names = t.class_names;
  out.tractogram.streamlines.reserve(t.size());

  std::vector<double> s;
  for (std::size_t idx = 0; idx < t.size(); ++idx) {
    const Streamline& sl = t.streamlines[idx];
    s.resize(sl.points.size());
    bool any_above = false, any_below = false;
    for (std::size_t i = 0; i < sl.points.size(); ++i) {
      s[i] = signed_distance(plane, sl.points[i]);
      (s[i] >= 0.0 ? any_above : any_below) = true;
    }
    if (!any_below) {
      Streamline keep = sl;
      keep.cut_status = CutStatus::Unaffected;
      keep.source_index = static_cast<int>(idx);
      out.tractogram.streamlines.push_back(std::move(keep));
      ++out.counts.unaffected;
      continue;
    }
    if (!any_above) {
      ++out.counts.removed;
      continue;
    }
    std::vector<Vec3> run = detail::longest_surviving_run(sl.points, s);
    if (static_cast<int>(run.size()) < std::max(2, min_surviving_points) ||
        polyline_length(run) <= 0.0) {
      ++out.counts.removed;
      continue;
    }
    Streamline keep;
    keep.points = resample_output ? resample_polyline(run, sl.n_points()) : std::move(run);
    keep.label = sl.label;
    keep.cut_status = CutStatus::Cut;
    keep.source_index = static_cast<int>(idx);
    out.tractogram.streamlines.push_back(std::move(keep));
    ++out.counts.cut;
  }
  return out;
}

struct PlaneReport {
  int plane_index = 0;
  double z_offset = 0.0, tilt_deg = 0.0, azimuth_deg = 0.0;
  CutCounts counts;
};

struct SubjectAugmentation {
  std::string subject_id;
  std::vector<PlaneReport> planes;
};

struct AugmentationReport {
  std::uint64_t seed = 0;
  int planes_per_subject = 0;
  std::vector<SubjectAugmentation> subjects;
  std::int64_t input_streamlines = 0;
  CutCounts aggregate;  // over cut versions only

  double cut_fraction() const {
    const std::int64_t n = aggregate.total();
    return n > 0 ? static_cast<double>(aggregate.cut) / static_cast<double>(n) : 0.0;
  }
};

struct AugmentedTractogram {
  Tractogram tractogram;
  std::string subject_id;
  bool is_cut = false;
  int plane_index = -1;  // -1 for the original
};

struct AugmentationResult {
  std::vector<AugmentedTractogram> tractograms;  // subject-major: original, cut0, cut1, ...
  AugmentationReport report;
};

// FOV-cut augmentation over a labeled cohort: each subject contributes its
// original tractogram plus planes_per_subject synthetically cut versions.
// Plane k of subject i uses the rng substream (seed, "fovcut", i, k), so
// parallel and serial execution produce identical output.
inline AugmentationResult augment_training_set(const std::vector<Tractogram>& subjects,
                                               int planes_per_subject, std::uint64_t seed,
                                               int jobs = 1) {
  for (const auto& t : subjects)
    for (const auto& sl : t.streamlines)
      if (!sl.label)
        throw MissingLabel("augment_training_set requires every streamline labeled (subject \"" +
                           t.subject_id + "\")");

  AugmentationResult out;
  out.report.seed = seed;
  out.report.planes_per_subject = planes_per_subject;
  out.report.subjects.resize(subjects.size());
  const int per_subject = 1 + planes_per_subject;
  out.tractograms.resize(subjects.size() * static_cast<std::size_t>(per_subject));

  parallel_for(static_cast<std::int64_t>(subjects.size()) * per_subject, jobs,
               [&](std::int64_t task) {
                 const std::size_t si = static_cast<std::size_t>(task / per_subject);
                 const int version = static_cast<int>(task % per_subject);
                 const Tractogram& subject = subjects[si];
                 AugmentedTractogram& slot = out.tractograms[si * per_subject + version];
                 slot.subject_id = subject.subject_id;
                 if (version == 0) {
                   slot.tractogram = subject;
                   slot.is_cut = false;
                   slot.plane_index = -1;
                   return;
                 }
                 const int plane_index = version - 1;
                 Rng rng = Rng::substream(seed, "fovcut", si,
                                          static_cast<std::uint64_t>(plane_index));
                 const CutPlane plane =
                     sample_cut_plane(rng, brain_center(subject), subject.space_tag);
                 CutResult cut = apply_cut(subject, plane);
                 slot.tractogram = std::move(cut.tractogram);
                 slot.is_cut = true;
                 slot.plane_index = plane_index;
               });

  for (std::size_t si = 0; si < subjects.size(); ++si) {
    auto& rep = out.report.subjects[si];
    rep.subject_id = subjects[si].subject_id;
    out.report.input_streamlines += static_cast<std::int64_t>(subjects[si].size());
    for (int k = 0; k < planes_per_subject; ++k) {
      const AugmentedTractogram& cut = out.tractograms[si * per_subject + 1 + k];
      PlaneReport pr;
      pr.plane_index = k;
      // Recover plane parameters and counts from the cut version.
      Rng rng = Rng::substream(seed, "fovcut", si, static_cast<std::uint64_t>(k));
      const CutPlane plane = sample_cut_plane(rng, brain_center(subjects[si]));
      pr.z_offset = plane.z_offset;
      pr.tilt_deg = plane.tilt_deg;
      pr.azimuth_deg = plane.azimuth_deg;
      for (const auto& sl : cut.tractogram.streamlines) {
        if (sl.cut_status == CutStatus::Cut) ++pr.counts.cut;
        else ++pr.counts.unaffected;
      }
      pr.counts.removed = static_cast<std::int64_t>(subjects[si].size()) - pr.counts.total();
      out.report.aggregate.unaffected += pr.counts.unaffected;
      out.report.aggregate.cut += pr.counts.cut;
      out.report.aggregate.removed += pr.counts.removed;
      rep.planes.push_back(pr);
    }
  }
  return out;
}

}  // namespace tractparc
