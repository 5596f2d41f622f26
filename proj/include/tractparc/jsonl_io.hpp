#pragma once

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "tractparc/errors.hpp"
#include "tractparc/streamline.hpp"

namespace tractparc {

// Labeled-streamline interchange format: UTF-8, one JSON object per line with
// keys "points" (flat list of 3k floats, mm, RAS), "label" (int or null),
// "cut_status" (string or null) and "subject". Floats are written with up to
// 17 significant digits so a round-trip reproduces every double exactly.

namespace detail {

inline void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace detail

inline void write_jsonl(std::ostream& os, const Tractogram& t) {
  std::string line;
  for (const auto& s : t.streamlines) {
    line.clear();
    line += "{\"points\":[";
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      if (i) line += ',';
      detail::append_double(line, s.points[i].x);
      line += ',';
      detail::append_double(line, s.points[i].y);
      line += ',';
      detail::append_double(line, s.points[i].z);
    }
    line += "],\"label\":";
    line += s.label ? std::to_string(*s.label) : "null";
    line += ",\"cut_status\":";
    if (s.cut_status == CutStatus::Unknown) {
      line += "null";
    } else {
      line += '"';
      line += to_string(s.cut_status);
      line += '"';
    }
    line += ",\"subject\":";
    line += nlohmann::json(t.subject_id).dump();
    line += "}\n";
    os << line;
  }
}

inline void write_jsonl_file(const std::string& path, const Tractogram& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path);
  write_jsonl(os, t);
  if (!os) throw Error("write failed: " + path);
}

// Reads one tractogram. When num_classes is given, labels are range-checked
// against it. Malformed lines report their 1-based line number.
inline Tractogram read_jsonl(std::istream& is, std::optional<int> num_classes = {}) {
  Tractogram t;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "jsonl line " + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("points") || !j.contains("subject"))
      throw ParseError(where + ": record must be an object with \"points\" and \"subject\"");
    const auto& pts = j["points"];
    if (!pts.is_array() || pts.size() % 3 != 0 || pts.size() < 6)
      throw ParseError(where + ": \"points\" must hold 3k floats with k >= 2, got " +
                       std::to_string(pts.size()) + " values");
    Streamline s;
    s.points.reserve(pts.size() / 3);
    for (std::size_t i = 0; i < pts.size(); i += 3) {
      if (!pts[i].is_number() || !pts[i + 1].is_number() || !pts[i + 2].is_number())
        throw ParseError(where + ": non-numeric coordinate");
      const Vec3 p{pts[i].get<double>(), pts[i + 1].get<double>(), pts[i + 2].get<double>()};
      if (!is_finite(p)) throw ParseError(where + ": non-finite coordinate");
      s.points.push_back(p);
    }
    if (j.contains("label") && !j["label"].is_null()) {
      if (!j["label"].is_number_integer())
        throw ParseError(where + ": \"label\" must be an integer or null");
      const int label = j["label"].get<int>();
      if (label < 0) throw ParseError(where + ": negative label");
      if (num_classes && label >= *num_classes)
        throw LabelOutOfRange(where + ": label " + std::to_string(label) +
                              " >= num_classes " + std::to_string(*num_classes));
      s.label = label;
    }
    if (j.contains("cut_status") && !j["cut_status"].is_null()) {
      if (!j["cut_status"].is_string())
        throw ParseError(where + ": \"cut_status\" must be a string or null");
      try {
        s.cut_status = cut_status_from_string(j["cut_status"].get<std::string>());
      } catch (const ParseError& e) {
        throw ParseError(where + ": " + e.what());
      }
    }
    const std::string subject = j["subject"].get<std::string>();
    if (t.streamlines.empty()) {
      t.subject_id = subject;
    } else if (subject != t.subject_id) {
      throw ParseError(where + ": mixed subjects in one file (\"" + t.subject_id +
                       "\" vs \"" + subject + "\")");
    }
    s.source_index = static_cast<int>(t.streamlines.size());
    t.streamlines.push_back(std::move(s));
  }
  t.space_tag = "ras";
  return t;
}

inline Tractogram read_jsonl_file(const std::string& path, std::optional<int> num_classes = {}) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open: " + path);
  try {
    return read_jsonl(is, num_classes);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const LabelOutOfRange& e) {
    throw LabelOutOfRange(path + ": " + e.what());
  }
}

}  // namespace tractparc
