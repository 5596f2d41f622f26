#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tractparc/errors.hpp"
#include "tractparc/streamline.hpp"

namespace tractparc {

// Parcellation scoring: streamline-level accuracy and macro-F1, tract
// identification rate (TIR) and atlas-to-tract distance (ATD).

struct ClassCounts {
  std::int64_t tp = 0, fp = 0, fn = 0;
};

struct ClassScore {
  int class_id = 0;
  std::string name;
  std::int64_t support = 0;  // true instances
  std::int64_t predicted = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

inline double accuracy(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size())
    throw ShapeMismatch("accuracy: " + std::to_string(pred.size()) + " predictions vs " +
                        std::to_string(truth.size()) + " labels");
  if (pred.empty()) throw EmptyInput("accuracy of empty vectors");
  std::int64_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == truth[i]) ++hit;
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

inline std::vector<ClassCounts> confusion_counts(std::span<const int> pred,
                                                 std::span<const int> truth, int num_classes) {
  if (pred.size() != truth.size()) throw ShapeMismatch("confusion_counts: size mismatch");
  std::vector<ClassCounts> counts(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const int p = pred[i], t = truth[i];
    if (p < 0 || p >= num_classes || t < 0 || t >= num_classes)
      throw LabelOutOfRange("class id outside [0, " + std::to_string(num_classes) + ")");
    if (p == t) {
      ++counts[static_cast<std::size_t>(p)].tp;
    } else {
      ++counts[static_cast<std::size_t>(p)].fp;
      ++counts[static_cast<std::size_t>(t)].fn;
    }
  }
  return counts;
}

// Unweighted mean F1 over the scoped classes. Classes with no true and no
// predicted instances are excluded from the mean; F1 is 0 when P + R = 0.
inline double macro_f1(std::span<const int> pred, std::span<const int> truth,
                       std::span<const int> class_scope, int num_classes) {
  if (pred.empty()) throw EmptyInput("macro_f1 of empty vectors");
  const auto counts = confusion_counts(pred, truth, num_classes);
  double sum = 0.0;
  int used = 0;
  for (int c : class_scope) {
    if (c < 0 || c >= num_classes)
      throw LabelOutOfRange("scoped class " + std::to_string(c) + " out of range");
    const auto& k = counts[static_cast<std::size_t>(c)];
    if (k.tp + k.fp + k.fn == 0) continue;  // absent from both pred and truth
    const double p = k.tp + k.fp > 0 ? static_cast<double>(k.tp) / (k.tp + k.fp) : 0.0;
    const double r = k.tp + k.fn > 0 ? static_cast<double>(k.tp) / (k.tp + k.fn) : 0.0;
    sum += (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    ++used;
  }
  if (used == 0) throw EmptyInput("macro_f1: no scoped class present in pred or truth");
  return sum / used;
}

// Fraction of expected tracts with at least min_streamlines predicted
// streamlines (threshold inclusive).
inline double tir(const std::vector<std::int64_t>& predicted_count_per_class,
                  std::span<const int> expected_tracts, std::int64_t min_streamlines = 20) {
  if (expected_tracts.empty()) throw EmptyInput("tir with empty expected tract list");
  std::int64_t identified = 0;
  for (int c : expected_tracts) {
    if (c < 0 || c >= static_cast<int>(predicted_count_per_class.size()))
      throw LabelOutOfRange("expected tract " + std::to_string(c) + " out of range");
    if (predicted_count_per_class[static_cast<std::size_t>(c)] >= min_streamlines) ++identified;
  }
  return static_cast<double>(identified) / static_cast<double>(expected_tracts.size());
}

// Mean distance from every point of the predicted tract to its nearest point
// in the atlas tract's point set (one-directional by design: identified
// geometry is scored against the reference).
inline double mean_nearest_point_distance(std::span<const Vec3> predicted,
                                          std::span<const Vec3> atlas) {
  if (predicted.empty()) throw EmptyInput("atd: empty predicted point set");
  if (atlas.empty()) throw EmptyInput("atd: empty atlas point set");
  double sum = 0.0;
  for (const Vec3& p : predicted) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& a : atlas) best = std::min(best, distance(p, a));
    sum += best;
  }
  return sum / static_cast<double>(predicted.size());
}

struct AtdResult {
  // Per scored class: distance in mm, or nullopt when the tract was not
  // identified (absent tracts are reported as missing, never as zero).
  std::vector<std::pair<int, std::optional<double>>> per_tract;
  std::optional<double> mean_mm;
};

inline AtdResult atd(const std::vector<std::vector<Vec3>>& predicted_points_per_class,
                     const std::vector<std::vector<Vec3>>& atlas_points_per_class,
                     std::span<const int> tract_scope,
                     const std::vector<std::int64_t>& predicted_count_per_class,
                     std::int64_t min_streamlines = 20) {
  AtdResult out;
  double sum = 0.0;
  int used = 0;
  for (int c : tract_scope) {
    if (c < 0 || c >= static_cast<int>(atlas_points_per_class.size()))
      throw LabelOutOfRange("atd scoped class " + std::to_string(c) + " out of range");
    if (atlas_points_per_class[static_cast<std::size_t>(c)].empty())
      throw EmptyInput("atlas provides no streamlines for class " + std::to_string(c));
    const bool identified =
        predicted_count_per_class[static_cast<std::size_t>(c)] >= min_streamlines &&
        !predicted_points_per_class[static_cast<std::size_t>(c)].empty();
    if (!identified) {
      out.per_tract.emplace_back(c, std::nullopt);
      continue;
    }
    const double d = mean_nearest_point_distance(predicted_points_per_class[static_cast<std::size_t>(c)],
                                                 atlas_points_per_class[static_cast<std::size_t>(c)]);
    out.per_tract.emplace_back(c, d);
    sum += d;
    ++used;
  }
  if (used > 0) out.mean_mm = sum / used;
  return out;
}

// ---------------------------------------------------------------------------
// Grouped evaluation: all / cut / unaffected, mirroring how synthetically cut
// tractograms are scored.

struct GroupMetrics {
  std::string group;
  std::int64_t n = 0;
  std::optional<double> accuracy;
  std::optional<double> macro_f1;
  std::vector<ClassCounts> counts;
};

struct EvalReport {
  std::string method = "model";
  int num_classes = 0;
  std::vector<std::string> class_names;
  std::vector<int> f1_scope;
  GroupMetrics all, cut, unaffected;
  std::vector<ClassScore> per_class;  // over the "all" group

  // Filled by callers that evaluate whole cohorts with an atlas.
  std::optional<double> tir_mean;
  std::vector<std::pair<std::string, double>> tir_per_subject;
  std::optional<double> atd_mean_mm;
  std::vector<std::pair<int, std::optional<double>>> atd_per_tract;
  std::int64_t min_streamlines = 20;
};

namespace detail {

inline GroupMetrics score_group(const std::string& name, std::span<const int> pred,
                                std::span<const int> truth, std::span<const int> scope,
                                int num_classes) {
  GroupMetrics g;
  g.group = name;
  g.n = static_cast<std::int64_t>(pred.size());
  if (pred.empty()) return g;  // empty group: flagged by n == 0, metrics absent
  g.accuracy = accuracy(pred, truth);
  g.counts = confusion_counts(pred, truth, num_classes);
  try {
    g.macro_f1 = macro_f1(pred, truth, scope, num_classes);
  } catch (const EmptyInput&) {
    g.macro_f1.reset();
  }
  return g;
}

}  // namespace detail

// Default macro-F1 scope: every class except "other" (class 0).
inline std::vector<int> default_f1_scope(int num_classes) {
  std::vector<int> scope;
  for (int c = 1; c < num_classes; ++c) scope.push_back(c);
  return scope;
}

inline EvalReport evaluate_split(std::span<const int> pred, std::span<const int> truth,
                                 std::span<const CutStatus> status, int num_classes,
                                 std::span<const int> f1_scope) {
  if (pred.size() != truth.size() || pred.size() != status.size())
    throw ShapeMismatch("evaluate_split: pred/truth/status sizes differ");
  if (pred.empty()) throw EmptyInput("evaluate_split of empty vectors");

  EvalReport rep;
  rep.num_classes = num_classes;
  rep.f1_scope.assign(f1_scope.begin(), f1_scope.end());

  std::vector<int> cut_pred, cut_truth, un_pred, un_truth;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (status[i] == CutStatus::Cut) {
      cut_pred.push_back(pred[i]);
      cut_truth.push_back(truth[i]);
    } else if (status[i] == CutStatus::Unaffected) {
      un_pred.push_back(pred[i]);
      un_truth.push_back(truth[i]);
    }
  }
  rep.all = detail::score_group("all", pred, truth, f1_scope, num_classes);
  rep.cut = detail::score_group("cut", cut_pred, cut_truth, f1_scope, num_classes);
  rep.unaffected = detail::score_group("unaffected", un_pred, un_truth, f1_scope, num_classes);

  for (int c = 0; c < num_classes; ++c) {
    const auto& k = rep.all.counts[static_cast<std::size_t>(c)];
    ClassScore s;
    s.class_id = c;
    s.support = k.tp + k.fn;
    s.predicted = k.tp + k.fp;
    s.precision = s.predicted > 0 ? static_cast<double>(k.tp) / s.predicted : 0.0;
    s.recall = s.support > 0 ? static_cast<double>(k.tp) / s.support : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    rep.per_class.push_back(s);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline nlohmann::json group_to_json(const GroupMetrics& g) {
  nlohmann::json j{{"group", g.group}, {"n", g.n}, {"empty", g.n == 0}};
  j["accuracy"] = g.accuracy ? nlohmann::json(*g.accuracy) : nlohmann::json();
  j["macro_f1"] = g.macro_f1 ? nlohmann::json(*g.macro_f1) : nlohmann::json();
  return j;
}

}  // namespace detail

inline nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json j;
  j["method"] = r.method;
  j["num_classes"] = r.num_classes;
  j["class_names"] = r.class_names;
  j["f1_scope"] = r.f1_scope;
  j["groups"] = {{"all", detail::group_to_json(r.all)},
                 {"cut", detail::group_to_json(r.cut)},
                 {"unaffected", detail::group_to_json(r.unaffected)}};
  auto& pc = j["per_class"] = nlohmann::json::array();
  for (const auto& s : r.per_class)
    pc.push_back({{"class_id", s.class_id},
                  {"name", s.name},
                  {"support", s.support},
                  {"predicted", s.predicted},
                  {"precision", s.precision},
                  {"recall", s.recall},
                  {"f1", s.f1}});
  if (r.tir_mean) {
    auto& t = j["tir"];
    t["mean"] = *r.tir_mean;
    t["min_streamlines"] = r.min_streamlines;
    t["per_subject"] = nlohmann::json::array();
    for (const auto& [subj, rate] : r.tir_per_subject)
      t["per_subject"].push_back({{"subject", subj}, {"rate", rate}});
  }
  if (!r.atd_per_tract.empty()) {
    auto& a = j["atd"];
    a["mean_mm"] = r.atd_mean_mm ? nlohmann::json(*r.atd_mean_mm) : nlohmann::json();
    a["per_tract"] = nlohmann::json::array();
    for (const auto& [cls, mm] : r.atd_per_tract)
      a["per_tract"].push_back(
          {{"class_id", cls}, {"mm", mm ? nlohmann::json(*mm) : nlohmann::json()}});
  }
  return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.method = j.at("method").get<std::string>();
  r.num_classes = j.at("num_classes").get<int>();
  r.class_names = j.at("class_names").get<std::vector<std::string>>();
  r.f1_scope = j.at("f1_scope").get<std::vector<int>>();
  auto load_group = [&](const char* key, GroupMetrics& g) {
    const auto& gj = j.at("groups").at(key);
    g.group = gj.at("group").get<std::string>();
    g.n = gj.at("n").get<std::int64_t>();
    if (!gj.at("accuracy").is_null()) g.accuracy = gj.at("accuracy").get<double>();
    if (!gj.at("macro_f1").is_null()) g.macro_f1 = gj.at("macro_f1").get<double>();
  };
  load_group("all", r.all);
  load_group("cut", r.cut);
  load_group("unaffected", r.unaffected);
  for (const auto& pj : j.at("per_class")) {
    ClassScore s;
    s.class_id = pj.at("class_id").get<int>();
    s.name = pj.at("name").get<std::string>();
    s.support = pj.at("support").get<std::int64_t>();
    s.predicted = pj.at("predicted").get<std::int64_t>();
    s.precision = pj.at("precision").get<double>();
    s.recall = pj.at("recall").get<double>();
    s.f1 = pj.at("f1").get<double>();
    r.per_class.push_back(s);
  }
  if (j.contains("tir")) {
    r.tir_mean = j["tir"].at("mean").get<double>();
    r.min_streamlines = j["tir"].at("min_streamlines").get<std::int64_t>();
    for (const auto& sj : j["tir"].at("per_subject"))
      r.tir_per_subject.emplace_back(sj.at("subject").get<std::string>(),
                                     sj.at("rate").get<double>());
  }
  if (j.contains("atd")) {
    if (!j["atd"].at("mean_mm").is_null()) r.atd_mean_mm = j["atd"]["mean_mm"].get<double>();
    for (const auto& aj : j["atd"].at("per_tract")) {
      std::optional<double> mm;
      if (!aj.at("mm").is_null()) mm = aj["mm"].get<double>();
      r.atd_per_tract.emplace_back(aj.at("class_id").get<int>(), mm);
    }
  }
  return r;
}

// Group-level CSV. Header and column order are a documented contract:
// method,group,n_streamlines,accuracy,macro_f1,tir,atd_mm
inline std::string report_to_csv(const EvalReport& r) {
  std::string csv = "method,group,n_streamlines,accuracy,macro_f1,tir,atd_mm\n";
  auto fmt = [](const std::optional<double>& v) {
    if (!v) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return std::string(buf);
  };
  for (const GroupMetrics* g : {&r.all, &r.cut, &r.unaffected}) {
    csv += r.method + "," + g->group + "," + std::to_string(g->n) + "," + fmt(g->accuracy) +
           "," + fmt(g->macro_f1) + ",";
    if (g->group == "all") {
      csv += fmt(r.tir_mean) + "," + fmt(r.atd_mean_mm);
    } else {
      csv += ",";
    }
    csv += "\n";
  }
  return csv;
}

}  // namespace tractparc
