#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tractparc/errors.hpp"
#include "tractparc/fovcut.hpp"
#include "tractparc/jsonl_io.hpp"
#include "tractparc/streamline.hpp"

namespace tractparc {

// Directory-level conventions shared by the CLI and the test suites:
//   <subject>.jsonl                 raw generated tractogram
//   <subject>.orig.jsonl            original copy inside an augmented set
//   <subject>.cut<K>.jsonl          K-th synthetically cut version
//   classes.json                    class-name list, index = class id
//   augment_report.json             augmentation summary

namespace fs = std::filesystem;

inline std::vector<fs::path> list_jsonl_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

inline void write_classes_json(const fs::path& dir, const std::vector<std::string>& names) {
  std::ofstream os(dir / "classes.json", std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + (dir / "classes.json").string());
  os << nlohmann::json(names).dump(2) << "\n";
}

inline std::optional<std::vector<std::string>> read_classes_json(const fs::path& dir) {
  const fs::path p = dir / "classes.json";
  if (!fs::exists(p)) return std::nullopt;
  std::ifstream is(p, std::ios::binary);
  nlohmann::json j;
  try {
    is >> j;
    return j.get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

inline nlohmann::json augment_report_to_json(const AugmentationReport& r) {
  nlohmann::json j{{"seed", r.seed},
                   {"planes_per_subject", r.planes_per_subject},
                   {"input_streamlines", r.input_streamlines},
                   {"aggregate",
                    {{"unaffected", r.aggregate.unaffected},
                     {"cut", r.aggregate.cut},
                     {"removed", r.aggregate.removed},
                     {"cut_fraction", r.cut_fraction()}}}};
  auto& subjects = j["subjects"] = nlohmann::json::array();
  for (const auto& s : r.subjects) {
    nlohmann::json sj{{"subject", s.subject_id}};
    auto& planes = sj["planes"] = nlohmann::json::array();
    for (const auto& p : s.planes)
      planes.push_back({{"plane_index", p.plane_index},
                        {"z_offset", p.z_offset},
                        {"tilt_deg", p.tilt_deg},
                        {"azimuth_deg", p.azimuth_deg},
                        {"unaffected", p.counts.unaffected},
                        {"cut", p.counts.cut},
                        {"removed", p.counts.removed}});
    subjects.push_back(std::move(sj));
  }
  return j;
}

// Stem of a subject file inside an augmented directory ("sub000.cut3" ->
// "sub000"); returns the plane index or -1 for originals/raw files.
inline std::pair<std::string, int> parse_augmented_stem(const fs::path& file) {
  std::string stem = file.stem().string();  // drops .jsonl
  const auto dotpos = stem.find_last_of('.');
  if (dotpos == std::string::npos) return {stem, -1};
  const std::string tag = stem.substr(dotpos + 1);
  if (tag == "orig") return {stem.substr(0, dotpos), -1};
  if (tag.rfind("cut", 0) == 0) {
    try {
      return {stem.substr(0, dotpos), std::stoi(tag.substr(3))};
    } catch (...) {
      return {stem, -1};
    }
  }
  return {stem, -1};
}

// Writes an augmentation result as a directory of jsonl files plus the
// report; files keep the subject-major layout of the result.
inline void write_augmented_dir(const fs::path& out_dir, const AugmentationResult& result,
                                const std::vector<std::string>& class_names) {
  fs::create_directories(out_dir);
  for (const auto& at : result.tractograms) {
    const std::string name = at.is_cut
                                 ? at.subject_id + ".cut" + std::to_string(at.plane_index) + ".jsonl"
                                 : at.subject_id + ".orig.jsonl";
    write_jsonl_file((out_dir / name).string(), at.tractogram);
  }
  if (!class_names.empty()) write_classes_json(out_dir, class_names);
  std::ofstream os(out_dir / "augment_report.json", std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + (out_dir / "augment_report.json").string());
  os << augment_report_to_json(result.report).dump(2) << "\n";
}

struct LoadedTractograms {
  std::vector<Tractogram> tractograms;
  std::vector<bool> is_original;  // raw files and .orig files count as original
  std::vector<std::string> files;
  std::optional<std::vector<std::string>> class_names;
};

// Loads every jsonl file of a directory in sorted order. With originals_only,
// cut versions of an augmented set are skipped (the no-augmentation ablation).
inline LoadedTractograms load_tractogram_dir(const fs::path& dir, bool originals_only = false,
                                             std::optional<int> num_classes = {}) {
  LoadedTractograms out;
  out.class_names = read_classes_json(dir);
  for (const auto& file : list_jsonl_files(dir)) {
    const auto [subject, plane] = parse_augmented_stem(file);
    const bool original = plane < 0;
    if (originals_only && !original) continue;
    Tractogram t = read_jsonl_file(file.string(), num_classes);
    if (out.class_names) t.class_names = *out.class_names;
    out.tractograms.push_back(std::move(t));
    out.is_original.push_back(original);
    out.files.push_back(file.filename().string());
  }
  return out;
}

}  // namespace tractparc
