#include "tractparc/fovcut.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "tractparc/jsonl_io.hpp"
#include "tractparc/rng.hpp"

using namespace tractparc;

namespace {

Tractogram one_streamline(std::vector<Vec3> pts, int label = 0) {
  Tractogram t;
  t.subject_id = "t";
  Streamline s;
  s.points = std::move(pts);
  s.label = label;
  t.streamlines.push_back(std::move(s));
  return t;
}

std::vector<Vec3> vertical_line(double z0, double z1, int n, double x = 0, double y = 0) {
  std::vector<Vec3> pts;
  for (int i = 0; i < n; ++i)
    pts.push_back({x, y, z0 + (z1 - z0) * i / (n - 1)});
  return pts;
}

// Independent dense-clipping oracle: resample the polyline with 10^4 points,
// evaluate signed distances there, and measure the longest surviving run with
// sign-interpolated crossings.
double dense_clip_surviving_length(const std::vector<Vec3>& pts, const CutPlane& plane,
                                   int dense_n = 10000) {
  const std::vector<Vec3> dense = resample_polyline(pts, dense_n);
  std::vector<double> s(dense.size());
  for (std::size_t i = 0; i < dense.size(); ++i) s[i] = signed_distance(plane, dense[i]);

  double best = 0.0, current = 0.0;
  Vec3 prev;
  bool in_run = false;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (s[i] >= 0.0) {
      Vec3 entry = dense[i];
      if (!in_run && i > 0 && s[i - 1] < 0.0) {
        const double t = s[i - 1] / (s[i - 1] - s[i]);
        entry = lerp(dense[i - 1], dense[i], t);
        current += distance(entry, dense[i]);
        prev = dense[i];
        in_run = true;
        continue;
      }
      if (in_run) current += distance(prev, dense[i]);
      prev = dense[i];
      in_run = true;
      if (i + 1 < dense.size() && s[i + 1] < 0.0) {
        const double t = s[i] / (s[i] - s[i + 1]);
        current += distance(dense[i], lerp(dense[i], dense[i + 1], t));
        best = std::max(best, current);
        current = 0.0;
        in_run = false;
      }
    }
  }
  best = std::max(best, current);
  return best;
}

}  // namespace

TEST(CutPlaneSampler, TiltZeroGivesVerticalNormal) {
  const CutPlane p = make_cut_plane({0, 0, 0}, -40.0, 0.0, 123.0);
  EXPECT_NEAR(p.normal.x, 0.0, 1e-12);
  EXPECT_NEAR(p.normal.y, 0.0, 1e-12);
  EXPECT_NEAR(p.normal.z, 1.0, 1e-12);
  EXPECT_NEAR(p.anchor.z, -40.0, 1e-12);
}

TEST(CutPlaneSampler, InvariantsHoldOnEveryDraw) {
  Rng rng(31);
  for (int i = 0; i < 5000; ++i) {
    const CutPlane p = sample_cut_plane(rng, {1, 2, 3});
    EXPECT_GE(p.z_offset, -50.0);
    EXPECT_LE(p.z_offset, -30.0);
    EXPECT_GE(p.tilt_deg, 0.0);
    EXPECT_LE(p.tilt_deg, 30.0);
    EXPECT_GE(p.azimuth_deg, 0.0);
    EXPECT_LT(p.azimuth_deg, 360.0);
    EXPECT_NEAR(norm(p.normal), 1.0, 1e-9);
    EXPECT_NEAR(p.normal.z, std::cos(deg_to_rad(p.tilt_deg)), 1e-9);
    EXPECT_GT(p.normal.z, 0.0);
    EXPECT_NEAR(p.anchor.x, 1.0, 1e-12);
    EXPECT_NEAR(p.anchor.y, 2.0, 1e-12);
    EXPECT_NEAR(p.anchor.z, 3.0 + p.z_offset, 1e-12);
  }
}

TEST(CutPlaneSampler, UniformMoments) {
  Rng rng(77);
  double z_sum = 0.0, tilt_sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const CutPlane p = sample_cut_plane(rng, {0, 0, 0});
    z_sum += p.z_offset;
    tilt_sum += p.tilt_deg;
  }
  EXPECT_NEAR(z_sum / n, -40.0, 0.2);
  EXPECT_NEAR(tilt_sum / n, 15.0, 0.2);
}

TEST(ApplyCut, AllAboveIsUnaffectedWithIdenticalGeometry) {
  const Tractogram t = one_streamline(vertical_line(0.0, 10.0, 15));
  const CutPlane p = make_cut_plane({0, 0, 0}, -40.0, 0.0, 0.0);
  const CutResult r = apply_cut(t, p);
  EXPECT_EQ(r.counts.unaffected, 1);
  EXPECT_EQ(r.counts.cut, 0);
  EXPECT_EQ(r.counts.removed, 0);
  ASSERT_EQ(r.tractogram.size(), 1u);
  EXPECT_EQ(r.tractogram.streamlines[0].cut_status, CutStatus::Unaffected);
  for (std::size_t i = 0; i < 15; ++i)
    EXPECT_EQ(r.tractogram.streamlines[0].points[i], t.streamlines[0].points[i]);
}

TEST(ApplyCut, AllBelowIsRemoved) {
  const Tractogram t = one_streamline(vertical_line(-60.0, -45.0, 15));
  const CutPlane p = make_cut_plane({0, 0, 0}, -40.0, 0.0, 0.0);
  const CutResult r = apply_cut(t, p);
  EXPECT_EQ(r.counts.removed, 1);
  EXPECT_TRUE(r.tractogram.empty());
}

TEST(ApplyCut, VerticalLineTruncatedAtPlane) {
  const Tractogram t = one_streamline(vertical_line(-60.0, 0.0, 15), 4);
  const CutPlane p = make_cut_plane({0, 0, 0}, -40.0, 0.0, 0.0);
  const CutResult r = apply_cut(t, p);
  EXPECT_EQ(r.counts.cut, 1);
  ASSERT_EQ(r.tractogram.size(), 1u);
  const Streamline& s = r.tractogram.streamlines[0];
  EXPECT_EQ(s.cut_status, CutStatus::Cut);
  EXPECT_EQ(s.label, 4);
  ASSERT_EQ(s.points.size(), 15u);
  EXPECT_NEAR(s.points.front().z, -40.0, 1e-9);
  EXPECT_NEAR(s.points.back().z, 0.0, 1e-9);
  // Surviving extent z in [-40, 0]: 40 mm, frozen from the dense oracle.
  EXPECT_NEAR(polyline_length(s.points), 40.0, 1e-6);
  EXPECT_NEAR(dense_clip_surviving_length(t.streamlines[0].points, p), 40.0, 1e-3);
}

TEST(ApplyCut, InterpolatedCrossingPreservesArcLength) {
  const Tractogram t = one_streamline({{0, 0, -45.5}, {0, 0, -38.7}, {3, 0, -36.1}}, 1);
  const CutPlane p = make_cut_plane({0, 0, 0}, -40.0, 0.0, 0.0);
  const CutResult raw = apply_cut(t, p, 2, /*resample_output=*/false);
  ASSERT_EQ(raw.counts.cut, 1);
  // The quantile-resampling oracle cuts corners by O(spacing), hence the
  // looser tolerance than the per-edge oracle in the acceptance suite.
  const double oracle = dense_clip_surviving_length(t.streamlines[0].points, p, 100000);
  EXPECT_NEAR(polyline_length(raw.tractogram.streamlines[0].points), oracle, 1e-4);
}

TEST(ApplyCut, MultiCrossingKeepsLongestRun) {
  // W-shaped line dips below the plane twice; the middle bump and the two
  // outer arms survive as runs, the longest must win.
  std::vector<Vec3> pts;
  for (int i = 0; i <= 200; ++i) {
    const double x = -20.0 + 0.2 * i;
    const double z = -40.0 + 8.0 * std::cos(x * 0.5) + 2.0;  // oscillates around the plane
    pts.push_back({x, 0.0, z});
  }
  const Tractogram t = one_streamline(pts, 2);
  const CutPlane p = make_cut_plane({0, 0, 0}, -40.0, 0.0, 0.0);
  const CutResult raw = apply_cut(t, p, 2, false);
  ASSERT_EQ(raw.counts.cut, 1);
  EXPECT_NEAR(polyline_length(raw.tractogram.streamlines[0].points),
              dense_clip_surviving_length(pts, p, 200000), 1e-3);
}

TEST(ApplyCut, MinSurvivingPointsDropsShortRuns) {
  // Only the interpolated entry/exit plus one vertex survive: 3 points.
  const Tractogram t = one_streamline({{0, 0, -50}, {0, 0, -39.9}, {0, 0, -50.1}}, 0);
  const CutPlane p = make_cut_plane({0, 0, 0}, -40.0, 0.0, 0.0);
  EXPECT_EQ(apply_cut(t, p, 3).counts.cut, 1);
  EXPECT_EQ(apply_cut(t, p, 4).counts.removed, 1);
}

TEST(ApplyCut, SpaceMismatchDetected) {
  Tractogram t = one_streamline(vertical_line(0, 10, 5));
  t.space_tag = "ras";
  CutPlane p = make_cut_plane({0, 0, 0}, -40.0, 0.0, 0.0, "voxel");
  EXPECT_THROW(apply_cut(t, p), SpaceMismatch);
  p.space_tag.clear();  // unchecked
  EXPECT_NO_THROW(apply_cut(t, p));
}

TEST(ApplyCut, PartitionAndLabelInvariants) {
  Rng rng(11);
  Tractogram t;
  t.subject_id = "r";
  std::vector<int> label_multiset;
  for (int s = 0; s < 300; ++s) {
    Streamline sl;
    const double zc = rng.uniform(-70, 10);
    for (int i = 0; i < 12; ++i)
      sl.points.push_back({rng.uniform(-30, 30), rng.uniform(-30, 30),
                           zc + rng.uniform(-18, 18)});
    sl.label = static_cast<int>(rng.uniform_int(5));
    label_multiset.push_back(*sl.label);
    t.streamlines.push_back(std::move(sl));
  }
  for (int trial = 0; trial < 30; ++trial) {
    Rng prng(1000 + trial);
    const CutPlane p = sample_cut_plane(prng, {0, 0, -10});
    const CutResult r = apply_cut(t, p);
    EXPECT_EQ(r.counts.total(), 300);
    EXPECT_EQ(static_cast<std::int64_t>(r.tractogram.size()),
              r.counts.unaffected + r.counts.cut);

    // No surviving point below the plane beyond tolerance.
    for (const auto& s : r.tractogram.streamlines)
      for (const auto& pt : s.points) EXPECT_GE(signed_distance(p, pt), -1e-9);

    // Labels of survivors = input multiset minus removed labels.
    std::vector<int> out_labels, in_minus_removed;
    for (const auto& s : r.tractogram.streamlines) out_labels.push_back(*s.label);
    std::vector<bool> survived(t.size(), false);
    for (const auto& s : r.tractogram.streamlines)
      survived[static_cast<std::size_t>(*s.source_index)] = true;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (survived[i]) in_minus_removed.push_back(*t.streamlines[i].label);
    std::sort(out_labels.begin(), out_labels.end());
    std::sort(in_minus_removed.begin(), in_minus_removed.end());
    EXPECT_EQ(out_labels, in_minus_removed);
  }
}

TEST(ApplyCut, LoweringThePlaneIsMonotone) {
  Rng rng(21);
  Tractogram t;
  t.subject_id = "m";
  for (int s = 0; s < 200; ++s) {
    Streamline sl;
    const double zc = rng.uniform(-60, 0);
    for (int i = 0; i < 10; ++i)
      sl.points.push_back({rng.uniform(-20, 20), rng.uniform(-20, 20), zc + 1.5 * i});
    sl.label = 0;
    t.streamlines.push_back(std::move(sl));
  }
  std::int64_t prev_unaffected = -1, prev_removed = 1 << 30;
  for (double z = -30.0; z >= -50.0; z -= 2.5) {
    const CutResult r = apply_cut(t, make_cut_plane({0, 0, 0}, z, 0.0, 0.0));
    EXPECT_GE(r.counts.unaffected, prev_unaffected);
    EXPECT_LE(r.counts.removed, prev_removed);
    prev_unaffected = r.counts.unaffected;
    prev_removed = r.counts.removed;
  }
}

TEST(Augment, CountsAndDeterminism) {
  Rng rng(5);
  std::vector<Tractogram> subjects;
  for (int s = 0; s < 3; ++s) {
    Tractogram t;
    t.subject_id = "s" + std::to_string(s);
    for (int i = 0; i < 50; ++i) {
      Streamline sl;
      const double zc = rng.uniform(-60, 20);
      for (int k = 0; k < 8; ++k)
        sl.points.push_back({rng.uniform(-40, 40), rng.uniform(-40, 40), zc + 3.0 * k});
      sl.label = i % 4;
      t.streamlines.push_back(std::move(sl));
    }
    subjects.push_back(std::move(t));
  }

  const AugmentationResult a = augment_training_set(subjects, 4, 99, 1);
  EXPECT_EQ(a.tractograms.size(), 3u * 5u);
  EXPECT_EQ(a.report.planes_per_subject, 4);
  EXPECT_EQ(a.report.input_streamlines, 150);
  for (const auto& sub : a.report.subjects)
    for (const auto& pr : sub.planes)
      EXPECT_EQ(pr.counts.total(), 50);

  // Byte-identical output for the same seed, and --jobs must not matter.
  const AugmentationResult b = augment_training_set(subjects, 4, 99, 3);
  ASSERT_EQ(a.tractograms.size(), b.tractograms.size());
  for (std::size_t i = 0; i < a.tractograms.size(); ++i) {
    std::ostringstream sa, sb;
    write_jsonl(sa, a.tractograms[i].tractogram);
    write_jsonl(sb, b.tractograms[i].tractogram);
    EXPECT_EQ(sa.str(), sb.str());
  }

  // A different seed produces different planes.
  const AugmentationResult c = augment_training_set(subjects, 4, 100, 1);
  EXPECT_NE(a.report.subjects[0].planes[0].z_offset, c.report.subjects[0].planes[0].z_offset);
}

TEST(Augment, ZeroPlanesIsIdentity) {
  Tractogram t = one_streamline(vertical_line(-20, 20, 8), 1);
  const AugmentationResult a = augment_training_set({t}, 0, 1, 1);
  ASSERT_EQ(a.tractograms.size(), 1u);
  EXPECT_FALSE(a.tractograms[0].is_cut);
  EXPECT_EQ(a.tractograms[0].tractogram.size(), 1u);
  EXPECT_EQ(a.report.aggregate.total(), 0);
}

TEST(Augment, UnlabeledStreamlineRejected) {
  Tractogram t = one_streamline(vertical_line(-20, 20, 8));
  t.streamlines[0].label.reset();
  EXPECT_THROW(augment_training_set({t}, 2, 1, 1), MissingLabel);
}
