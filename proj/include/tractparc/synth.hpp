#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "tractparc/errors.hpp"
#include "tractparc/geometry.hpp"
#include "tractparc/rng.hpp"
#include "tractparc/streamline.hpp"

namespace tractparc {

// Deterministic synthetic labeled cohorts. Bundles are noisy copies of a
// parametric centerline; class 0 is reserved for an "other" category of
// random polylines. Inferior-flagged bundles are placed so they intersect
// the FOV-cut band below the brain center, everything else stays far enough
// above it that no sampled cutting plane can touch it (including the tilt
// reach of a 30-degree plane at the bundle's lateral extent).

enum class BundleFamily { Straight, Arc, Helix, Polyline, Random };

struct BundleSpec {
  int class_id = 0;
  std::string name;
  BundleFamily family = BundleFamily::Straight;
  int count = 1;
  double sigma = 0.0;     // RMS perpendicular offset of a streamline, mm
  double trim_max = 0.0;  // max fraction trimmed from each end
  bool inferior = false;

  // straight
  Vec3 p0, p1;
  // arc: center + in-plane orthonormal basis
  Vec3 center, e1{0, 1, 0}, e2{0, 0, 1};
  double radius = 0.0, theta_start_deg = 0.0, theta_end_deg = 0.0;
  // helix around a vertical axis
  double axis_x = 0.0, axis_y = 0.0, z_start = 0.0, z_end = 0.0, turns = 1.0, phase_deg = 0.0;
  // polyline: explicit control points, parameterized by arc length
  std::vector<Vec3> control_points;
  // random polylines
  Vec3 box_min, box_max;
  int waypoints = 4;
  double step_mm = 15.0;
};

struct JitterSpec {
  double rotation_deg = 5.0;
  double translation_mm = 2.0;
};

struct CohortSpec {
  std::string name = "cohort";
  int n_points = 15;
  int subjects = 10;
  std::array<double, 3> split_proportions{0.7, 0.1, 0.2};  // train/val/test
  JitterSpec jitter;
  std::uint64_t seed = 0;
  Vec3 bbox_min{-70, -70, -90}, bbox_max{70, 70, 90};  // declared envelope
  std::vector<BundleSpec> bundles;

  int num_classes() const { return static_cast<int>(bundles.size()); }

  std::vector<std::string> class_names() const {
    std::vector<std::string> names(bundles.size());
    for (const auto& b : bundles) names[static_cast<std::size_t>(b.class_id)] = b.name;
    return names;
  }

  void validate() const {
    if (n_points < 2) throw InvalidSpec("n_points must be >= 2");
    if (subjects < 1) throw InvalidSpec("subjects must be >= 1");
    double sum = 0.0;
    for (double p : split_proportions) {
      if (p < 0.0) throw InvalidSpec("split_proportions must be >= 0");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidSpec("split_proportions must sum to 1");
    if (bundles.empty()) throw InvalidSpec("bundles must not be empty");
    std::vector<bool> seen(bundles.size(), false);
    bool any_inferior = false;
    for (const auto& b : bundles) {
      if (b.class_id < 0 || b.class_id >= num_classes())
        throw InvalidSpec("bundle class_id " + std::to_string(b.class_id) +
                          " must lie in [0, " + std::to_string(num_classes()) + ")");
      if (seen[static_cast<std::size_t>(b.class_id)])
        throw InvalidSpec("duplicate class_id " + std::to_string(b.class_id));
      seen[static_cast<std::size_t>(b.class_id)] = true;
      if (b.count < 1) throw InvalidSpec("bundle \"" + b.name + "\": count must be >= 1");
      if (b.sigma < 0.0) throw InvalidSpec("bundle \"" + b.name + "\": sigma must be >= 0");
      if (b.trim_max < 0.0 || b.trim_max > 0.4)
        throw InvalidSpec("bundle \"" + b.name + "\": trim_max must lie in [0, 0.4]");
      if (b.family == BundleFamily::Polyline && b.control_points.size() < 2)
        throw InvalidSpec("bundle \"" + b.name + "\": polyline needs >= 2 control points");
      any_inferior = any_inferior || b.inferior;
    }
    if (!any_inferior) throw InvalidSpec("at least one bundle must be inferior-flagged");
  }
};

namespace detail {

constexpr int kCenterlineSamples = 64;

inline Vec3 centerline_point(const BundleSpec& b, double t) {
  switch (b.family) {
    case BundleFamily::Straight:
      return lerp(b.p0, b.p1, t);
    case BundleFamily::Arc: {
      const double theta =
          deg_to_rad(b.theta_start_deg + t * (b.theta_end_deg - b.theta_start_deg));
      return b.center + b.e1 * (b.radius * std::cos(theta)) + b.e2 * (b.radius * std::sin(theta));
    }
    case BundleFamily::Helix: {
      const double angle = deg_to_rad(b.phase_deg) + t * b.turns * 2.0 * kPi;
      return {b.axis_x + b.radius * std::cos(angle), b.axis_y + b.radius * std::sin(angle),
              b.z_start + t * (b.z_end - b.z_start)};
    }
    case BundleFamily::Polyline: {
      const auto& cp = b.control_points;
      double total = 0.0;
      for (std::size_t i = 1; i < cp.size(); ++i) total += distance(cp[i - 1], cp[i]);
      double target = t * total;
      for (std::size_t i = 1; i < cp.size(); ++i) {
        const double seg = distance(cp[i - 1], cp[i]);
        if (target <= seg || i + 1 == cp.size())
          return lerp(cp[i - 1], cp[i], seg > 0.0 ? std::min(1.0, target / seg) : 0.0);
        target -= seg;
      }
      return cp.back();
    }
    default:
      throw InvalidSpec("centerline_point on a random-family bundle");
  }
}

// Orthonormal frame perpendicular to the bundle's gross direction, used to
// apply a constant radial offset per streamline.
inline void perpendicular_frame(const BundleSpec& b, Vec3& u, Vec3& v) {
  Vec3 d = centerline_point(b, 1.0) - centerline_point(b, 0.0);
  const double len = norm(d);
  if (len < 1e-9) d = Vec3{0, 0, 1};
  else d = d / len;
  const Vec3 ref = std::abs(d.z) > 0.9 ? Vec3{1, 0, 0} : Vec3{0, 0, 1};
  u = cross(d, ref);
  u = u / norm(u);
  v = cross(d, u);
}

inline Vec3 clamp_to_box(Vec3 p, const Vec3& lo, const Vec3& hi) {
  p.x = std::min(std::max(p.x, lo.x), hi.x);
  p.y = std::min(std::max(p.y, lo.y), hi.y);
  p.z = std::min(std::max(p.z, lo.z), hi.z);
  return p;
}

inline std::vector<Vec3> random_polyline(const BundleSpec& b, Rng& rng) {
  std::vector<Vec3> pts;
  Vec3 p{rng.uniform(b.box_min.x, b.box_max.x), rng.uniform(b.box_min.y, b.box_max.y),
         rng.uniform(b.box_min.z, b.box_max.z)};
  pts.push_back(p);
  for (int w = 0; w < std::max(1, b.waypoints); ++w) {
    const Vec3 q = clamp_to_box(p + rng.unit_vector() * b.step_mm, b.box_min, b.box_max);
    if (distance(q, p) > 1e-6) pts.push_back(q);
    p = q;
  }
  if (pts.size() < 2) pts.push_back(p + Vec3{0, 0, 1.0});
  return pts;
}

}  // namespace detail

// One labeled subject tractogram. Deterministic in (spec.seed, subject_index):
// every bundle draws from its own substream and the per-subject rigid jitter
// from another, so cohorts regenerate identically in any order.
inline Tractogram generate_subject(const CohortSpec& spec, int subject_index) {
  spec.validate();
  Tractogram t;
  {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "sub%03d", subject_index);
    t.subject_id = buf;
  }
  t.space_tag = "ras";
  t.class_names = spec.class_names();

  Rng jitter_rng =
      Rng::substream(spec.seed, "jitter", static_cast<std::uint64_t>(subject_index));
  const Vec3 axis = jitter_rng.unit_vector();
  const double angle = deg_to_rad(jitter_rng.uniform(0.0, spec.jitter.rotation_deg));
  const Mat3 rot = rotation_axis_angle(axis, angle);
  const Vec3 shift{jitter_rng.uniform(-spec.jitter.translation_mm, spec.jitter.translation_mm),
                   jitter_rng.uniform(-spec.jitter.translation_mm, spec.jitter.translation_mm),
                   jitter_rng.uniform(-spec.jitter.translation_mm, spec.jitter.translation_mm)};

  for (const auto& b : spec.bundles) {
    Rng rng = Rng::substream(spec.seed, "bundle", static_cast<std::uint64_t>(subject_index),
                             static_cast<std::uint64_t>(b.class_id));
    Vec3 u, v;
    if (b.family != BundleFamily::Random) detail::perpendicular_frame(b, u, v);

    for (int i = 0; i < b.count; ++i) {
      std::vector<Vec3> raw;
      if (b.family == BundleFamily::Random) {
        raw = detail::random_polyline(b, rng);
      } else {
        const double t0 = b.trim_max > 0.0 ? rng.uniform(0.0, b.trim_max) : 0.0;
        const double t1 = b.trim_max > 0.0 ? rng.uniform(0.0, b.trim_max) : 0.0;
        // Constant radial offset with RMS sigma: two perpendicular components
        // each N(0, sigma^2 / 2).
        const double comp = b.sigma / std::sqrt(2.0);
        const Vec3 offset = b.sigma > 0.0
                                ? u * rng.normal(0.0, comp) + v * rng.normal(0.0, comp)
                                : Vec3{};
        raw.reserve(detail::kCenterlineSamples);
        for (int k = 0; k < detail::kCenterlineSamples; ++k) {
          const double s = t0 + (1.0 - t0 - t1) * static_cast<double>(k) /
                                    (detail::kCenterlineSamples - 1);
          raw.push_back(detail::centerline_point(b, s) + offset);
        }
      }
      for (auto& p : raw) p = rot * p + shift;
      Streamline sl;
      sl.points = resample_polyline(raw, spec.n_points);
      sl.label = b.class_id;
      sl.source_index = static_cast<int>(t.streamlines.size());
      t.streamlines.push_back(std::move(sl));
    }
  }
  return t;
}

struct SubjectAssignment {
  std::string subject_id;
  int subject_index = 0;
  std::string split;  // "train" | "val" | "test"
};

struct Cohort {
  std::vector<Tractogram> train, val, test;
  std::vector<SubjectAssignment> manifest;
  std::vector<std::string> class_names;
};

// Largest-remainder split sizes; a nonzero proportion that would receive zero
// subjects is an error.
inline std::array<int, 3> split_sizes(int subjects, const std::array<double, 3>& props) {
  std::array<int, 3> sizes{};
  std::array<double, 3> rema{};
  int assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = props[static_cast<std::size_t>(i)] * subjects;
    sizes[static_cast<std::size_t>(i)] = static_cast<int>(std::floor(exact));
    rema[static_cast<std::size_t>(i)] = exact - sizes[static_cast<std::size_t>(i)];
    assigned += sizes[static_cast<std::size_t>(i)];
  }
  while (assigned < subjects) {
    int best = -1;
    for (int i = 0; i < 3; ++i)
      if (best < 0 || rema[static_cast<std::size_t>(i)] > rema[static_cast<std::size_t>(best)])
        best = i;
    sizes[static_cast<std::size_t>(best)] += 1;
    rema[static_cast<std::size_t>(best)] = -1.0;
    ++assigned;
  }
  for (int i = 0; i < 3; ++i)
    if (props[static_cast<std::size_t>(i)] > 0.0 && sizes[static_cast<std::size_t>(i)] == 0)
      throw InvalidSpec("split proportions infeasible for " + std::to_string(subjects) +
                        " subjects");
  return sizes;
}

inline Cohort generate_cohort(const CohortSpec& spec) {
  spec.validate();
  const auto sizes = split_sizes(spec.subjects, spec.split_proportions);
  Cohort cohort;
  cohort.class_names = spec.class_names();
  for (int s = 0; s < spec.subjects; ++s) {
    Tractogram t = generate_subject(spec, s);
    SubjectAssignment a;
    a.subject_id = t.subject_id;
    a.subject_index = s;
    if (s < sizes[0]) {
      a.split = "train";
      cohort.train.push_back(std::move(t));
    } else if (s < sizes[0] + sizes[1]) {
      a.split = "val";
      cohort.val.push_back(std::move(t));
    } else {
      a.split = "test";
      cohort.test.push_back(std::move(t));
    }
    cohort.manifest.push_back(a);
  }
  return cohort;
}

// ---------------------------------------------------------------------------
// JSON spec (strict: unknown keys are rejected by name)

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::vector<std::string>& allowed,
                       const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed) ok = ok || it.key() == k;
    if (!ok) throw InvalidSpec(where + ": unknown key \"" + it.key() + "\"");
  }
}

template <typename T>
T get_field(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw InvalidSpec(where + ": missing key \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidSpec(where + ": key \"" + key + "\" has the wrong type");
  }
}

template <typename T>
T get_field_or(const nlohmann::json& j, const std::string& key, const std::string& where,
               T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidSpec(where + ": key \"" + key + "\" has the wrong type");
  }
}

inline Vec3 get_vec3(const nlohmann::json& j, const std::string& key, const std::string& where) {
  const auto v = get_field<std::vector<double>>(j, key, where);
  if (v.size() != 3) throw InvalidSpec(where + ": key \"" + key + "\" must hold 3 numbers");
  return {v[0], v[1], v[2]};
}

}  // namespace detail

inline BundleFamily bundle_family_from_string(const std::string& s, const std::string& where) {
  if (s == "straight") return BundleFamily::Straight;
  if (s == "arc") return BundleFamily::Arc;
  if (s == "helix") return BundleFamily::Helix;
  if (s == "polyline") return BundleFamily::Polyline;
  if (s == "random") return BundleFamily::Random;
  throw InvalidSpec(where + ": unknown family \"" + s + "\"");
}

inline const char* to_string(BundleFamily f) {
  switch (f) {
    case BundleFamily::Straight: return "straight";
    case BundleFamily::Arc: return "arc";
    case BundleFamily::Helix: return "helix";
    case BundleFamily::Polyline: return "polyline";
    default: return "random";
  }
}

inline CohortSpec cohort_spec_from_json(const nlohmann::json& j) {
  using detail::get_field;
  using detail::get_field_or;
  using detail::get_vec3;
  detail::check_keys(j,
                     {"name", "n_points", "subjects", "split_proportions", "jitter", "seed",
                      "bbox_min", "bbox_max", "bundles"},
                     "cohort spec");
  CohortSpec spec;
  spec.name = get_field_or<std::string>(j, "name", "cohort spec", "cohort");
  spec.n_points = get_field<int>(j, "n_points", "cohort spec");
  spec.subjects = get_field<int>(j, "subjects", "cohort spec");
  const auto props = get_field<std::vector<double>>(j, "split_proportions", "cohort spec");
  if (props.size() != 3)
    throw InvalidSpec("cohort spec: \"split_proportions\" must hold train/val/test");
  spec.split_proportions = {props[0], props[1], props[2]};
  if (j.contains("jitter")) {
    const auto& jj = j.at("jitter");
    detail::check_keys(jj, {"rotation_deg", "translation_mm"}, "jitter");
    spec.jitter.rotation_deg = get_field<double>(jj, "rotation_deg", "jitter");
    spec.jitter.translation_mm = get_field<double>(jj, "translation_mm", "jitter");
  }
  spec.seed = get_field<std::uint64_t>(j, "seed", "cohort spec");
  if (j.contains("bbox_min")) spec.bbox_min = get_vec3(j, "bbox_min", "cohort spec");
  if (j.contains("bbox_max")) spec.bbox_max = get_vec3(j, "bbox_max", "cohort spec");

  if (!j.contains("bundles") || !j.at("bundles").is_array())
    throw InvalidSpec("cohort spec: missing \"bundles\" array");
  int bi = 0;
  for (const auto& bj : j.at("bundles")) {
    const std::string where = "bundles[" + std::to_string(bi++) + "]";
    detail::check_keys(bj,
                       {"class_id", "name", "family", "count", "sigma", "trim_max", "inferior",
                        "p0", "p1", "center", "e1", "e2", "radius", "theta_start_deg",
                        "theta_end_deg", "axis_xy", "z_start", "z_end", "turns", "phase_deg",
                        "control_points", "box_min", "box_max", "waypoints", "step_mm"},
                       where);
    BundleSpec b;
    b.class_id = get_field<int>(bj, "class_id", where);
    b.name = get_field<std::string>(bj, "name", where);
    b.family = bundle_family_from_string(get_field<std::string>(bj, "family", where), where);
    b.count = get_field<int>(bj, "count", where);
    b.sigma = get_field_or<double>(bj, "sigma", where, 0.0);
    b.trim_max = get_field_or<double>(bj, "trim_max", where, 0.0);
    b.inferior = get_field_or<bool>(bj, "inferior", where, false);
    switch (b.family) {
      case BundleFamily::Straight:
        b.p0 = get_vec3(bj, "p0", where);
        b.p1 = get_vec3(bj, "p1", where);
        break;
      case BundleFamily::Arc:
        b.center = get_vec3(bj, "center", where);
        b.e1 = get_vec3(bj, "e1", where);
        b.e2 = get_vec3(bj, "e2", where);
        b.radius = get_field<double>(bj, "radius", where);
        b.theta_start_deg = get_field<double>(bj, "theta_start_deg", where);
        b.theta_end_deg = get_field<double>(bj, "theta_end_deg", where);
        break;
      case BundleFamily::Helix: {
        const auto axy = get_field<std::vector<double>>(bj, "axis_xy", where);
        if (axy.size() != 2) throw InvalidSpec(where + ": \"axis_xy\" must hold 2 numbers");
        b.axis_x = axy[0];
        b.axis_y = axy[1];
        b.radius = get_field<double>(bj, "radius", where);
        b.z_start = get_field<double>(bj, "z_start", where);
        b.z_end = get_field<double>(bj, "z_end", where);
        b.turns = get_field<double>(bj, "turns", where);
        b.phase_deg = get_field_or<double>(bj, "phase_deg", where, 0.0);
        break;
      }
      case BundleFamily::Polyline: {
        if (!bj.contains("control_points") || !bj.at("control_points").is_array())
          throw InvalidSpec(where + ": missing \"control_points\" array");
        for (const auto& pj : bj.at("control_points")) {
          const auto v = pj.get<std::vector<double>>();
          if (v.size() != 3) throw InvalidSpec(where + ": control point must hold 3 numbers");
          b.control_points.push_back({v[0], v[1], v[2]});
        }
        break;
      }
      case BundleFamily::Random:
        b.box_min = get_vec3(bj, "box_min", where);
        b.box_max = get_vec3(bj, "box_max", where);
        b.waypoints = get_field<int>(bj, "waypoints", where);
        b.step_mm = get_field<double>(bj, "step_mm", where);
        break;
    }
    spec.bundles.push_back(std::move(b));
  }
  spec.validate();
  return spec;
}

inline nlohmann::json cohort_spec_to_json(const CohortSpec& spec) {
  nlohmann::json j{
      {"name", spec.name},
      {"n_points", spec.n_points},
      {"subjects", spec.subjects},
      {"split_proportions", spec.split_proportions},
      {"jitter",
       {{"rotation_deg", spec.jitter.rotation_deg},
        {"translation_mm", spec.jitter.translation_mm}}},
      {"seed", spec.seed},
      {"bbox_min", {spec.bbox_min.x, spec.bbox_min.y, spec.bbox_min.z}},
      {"bbox_max", {spec.bbox_max.x, spec.bbox_max.y, spec.bbox_max.z}},
  };
  auto& arr = j["bundles"] = nlohmann::json::array();
  for (const auto& b : spec.bundles) {
    nlohmann::json bj{{"class_id", b.class_id}, {"name", b.name},
                      {"family", to_string(b.family)}, {"count", b.count},
                      {"sigma", b.sigma}, {"trim_max", b.trim_max},
                      {"inferior", b.inferior}};
    switch (b.family) {
      case BundleFamily::Straight:
        bj["p0"] = {b.p0.x, b.p0.y, b.p0.z};
        bj["p1"] = {b.p1.x, b.p1.y, b.p1.z};
        break;
      case BundleFamily::Arc:
        bj["center"] = {b.center.x, b.center.y, b.center.z};
        bj["e1"] = {b.e1.x, b.e1.y, b.e1.z};
        bj["e2"] = {b.e2.x, b.e2.y, b.e2.z};
        bj["radius"] = b.radius;
        bj["theta_start_deg"] = b.theta_start_deg;
        bj["theta_end_deg"] = b.theta_end_deg;
        break;
      case BundleFamily::Helix:
        bj["axis_xy"] = {b.axis_x, b.axis_y};
        bj["radius"] = b.radius;
        bj["z_start"] = b.z_start;
        bj["z_end"] = b.z_end;
        bj["turns"] = b.turns;
        bj["phase_deg"] = b.phase_deg;
        break;
      case BundleFamily::Polyline: {
        auto& cps = bj["control_points"] = nlohmann::json::array();
        for (const auto& p : b.control_points) cps.push_back({p.x, p.y, p.z});
        break;
      }
      case BundleFamily::Random:
        bj["box_min"] = {b.box_min.x, b.box_min.y, b.box_min.z};
        bj["box_max"] = {b.box_max.x, b.box_max.y, b.box_max.z};
        bj["waypoints"] = b.waypoints;
        bj["step_mm"] = b.step_mm;
        break;
    }
    arr.push_back(std::move(bj));
  }
  return j;
}

// The default desk-scale cohort: 8 classes (3 inferior-flagged), 2000
// streamlines per subject, 10 subjects split 7/1/2. Inferior bundles span
// down to z = -78 so every sampled plane truncates them; everything else
// stays above the reach of the steepest plane.
inline CohortSpec default_cohort_spec(std::uint64_t seed = 1) {
  CohortSpec spec;
  spec.name = "default-cohort";
  spec.n_points = 15;
  spec.subjects = 10;
  spec.split_proportions = {0.7, 0.1, 0.2};
  spec.jitter.rotation_deg = 5.0;
  spec.jitter.translation_mm = 2.0;
  spec.seed = seed;
  spec.bbox_min = Vec3{-70, -70, -90};
  spec.bbox_max = Vec3{70, 70, 90};

  auto bundle = [](int id, std::string name, BundleFamily fam, int count, double sigma,
                   bool inferior) {
    BundleSpec b;
    b.class_id = id;
    b.name = std::move(name);
    b.family = fam;
    b.count = count;
    b.sigma = sigma;
    b.trim_max = 0.05;
    b.inferior = inferior;
    return b;
  };

  BundleSpec other = bundle(0, "other", BundleFamily::Random, 200, 0.0, false);
  other.trim_max = 0.0;
  other.box_min = Vec3{-45, -45, 22};
  other.box_max = Vec3{45, 45, 70};
  other.waypoints = 4;
  other.step_mm = 18.0;
  spec.bundles.push_back(other);

  BundleSpec arch_l = bundle(1, "arch_left", BundleFamily::Arc, 300, 1.2, false);
  arch_l.center = Vec3{-25, 0, 30};
  arch_l.radius = 30.0;
  arch_l.theta_start_deg = 0.0;
  arch_l.theta_end_deg = 180.0;
  spec.bundles.push_back(arch_l);

  BundleSpec arch_r = arch_l;
  arch_r.class_id = 2;
  arch_r.name = "arch_right";
  arch_r.center = Vec3{25, 0, 30};
  spec.bundles.push_back(arch_r);

  BundleSpec band = bundle(3, "band_lr", BundleFamily::Straight, 300, 1.2, false);
  band.p0 = Vec3{-55, 10, 40};
  band.p1 = Vec3{55, 10, 40};
  spec.bundles.push_back(band);

  BundleSpec spiral = bundle(4, "spiral_mid", BundleFamily::Helix, 300, 1.2, false);
  spiral.axis_x = 0.0;
  spiral.axis_y = -30.0;
  spiral.radius = 12.0;
  spiral.z_start = 28.0;
  spiral.z_end = 70.0;
  spiral.turns = 1.5;
  spec.bundles.push_back(spiral);

  // The three inferior bundles share a narrow trunk corridor above the cut
  // band (centers ~7 mm apart) and fan out into distinct hooks below it.
  // Full streamlines are trivially separable by their hooks; truncated ones
  // keep only the subtle trunk offsets, which is what makes the augmentation
  // experiment informative.
  BundleSpec inf_a = bundle(5, "inf_hook_px", BundleFamily::Polyline, 200, 1.2, true);
  inf_a.control_points = {{30, 4, -76}, {14, 0, -62}, {14, 0, -30}, {12, 0, -5}};
  spec.bundles.push_back(inf_a);

  BundleSpec inf_b = bundle(6, "inf_hook_py", BundleFamily::Polyline, 200, 1.2, true);
  inf_b.control_points = {{-18, 20, -76}, {8, 3.5, -62}, {8, 3.5, -30}, {9, 2, -5}};
  spec.bundles.push_back(inf_b);

  BundleSpec inf_c = bundle(7, "inf_hook_ny", BundleFamily::Polyline, 200, 1.2, true);
  inf_c.control_points = {{-5, -28, -76}, {8, -3.5, -62}, {8, -3.5, -30}, {9, -2, -5}};
  spec.bundles.push_back(inf_c);

  return spec;
}

}  // namespace tractparc
