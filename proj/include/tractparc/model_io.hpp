#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tractparc/errors.hpp"
#include "tractparc/network.hpp"

namespace tractparc {

// Model files come in pairs: <base>.json holds the config, class names and a
// section manifest; <base>.bin is the flat little-endian float64 parameter
// blob. Doubles round-trip exactly.

struct ModelFile {
  ModelConfig config;
  ModelParams params;
  std::vector<std::string> class_names;
};

namespace detail {

inline nlohmann::json config_to_json(const ModelConfig& c) {
  return nlohmann::json{
      {"n_points", c.n_points},
      {"k_local", c.k_local},
      {"k_global", c.k_global},
      {"repr_dim", c.repr_dim},
      {"head_widths", c.head_widths},
      {"num_classes", c.num_classes},
      {"learning_rate", c.learning_rate},
      {"batch_size", c.batch_size},
      {"epochs", c.epochs},
      {"seed", c.seed},
      {"norm_center", {c.norm.center.x, c.norm.center.y, c.norm.center.z}},
      {"norm_scale", c.norm.scale},
  };
}

inline ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.n_points = j.at("n_points").get<int>();
  c.k_local = j.at("k_local").get<int>();
  c.k_global = j.at("k_global").get<int>();
  c.repr_dim = j.at("repr_dim").get<int>();
  c.head_widths = j.at("head_widths").get<std::vector<int>>();
  c.num_classes = j.at("num_classes").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto& ctr = j.at("norm_center");
  c.norm.center = Vec3{ctr.at(0).get<double>(), ctr.at(1).get<double>(), ctr.at(2).get<double>()};
  c.norm.scale = j.at("norm_scale").get<double>();
  return c;
}

}  // namespace detail

inline void save_model(const std::string& base_path, const ModelConfig& config,
                       const ModelParams& params, const std::vector<std::string>& class_names) {
  nlohmann::json manifest;
  manifest["format"] = "streamline-classifier.v1";
  manifest["config"] = detail::config_to_json(config);
  manifest["class_names"] = class_names;
  manifest["blob"] = base_path.substr(base_path.find_last_of('/') + 1) + ".bin";

  std::vector<double> blob;
  nlohmann::json sections = nlohmann::json::array();
  std::int64_t offset = 0;
  for (std::size_t li = 0; li < params.layers.size(); ++li) {
    const auto& l = params.layers[li];
    const std::string name = li == 0 ? "repr" :
                             (li + 1 == params.layers.size() ? "output"
                                                             : "head" + std::to_string(li - 1));
    sections.push_back({{"name", name + ".W"},
                        {"shape", {l.out_dim, l.in_dim}},
                        {"offset", offset}});
    blob.insert(blob.end(), l.W.begin(), l.W.end());
    offset += static_cast<std::int64_t>(l.W.size());
    sections.push_back({{"name", name + ".b"}, {"shape", {l.out_dim}}, {"offset", offset}});
    blob.insert(blob.end(), l.b.begin(), l.b.end());
    offset += static_cast<std::int64_t>(l.b.size());
  }
  manifest["sections"] = sections;
  manifest["blob_count"] = offset;

  std::ofstream js(base_path + ".json", std::ios::binary);
  if (!js) throw Error("cannot open for writing: " + base_path + ".json");
  js << manifest.dump(2) << "\n";
  std::ofstream bs(base_path + ".bin", std::ios::binary);
  if (!bs) throw Error("cannot open for writing: " + base_path + ".bin");
  bs.write(reinterpret_cast<const char*>(blob.data()),
           static_cast<std::streamsize>(blob.size() * sizeof(double)));
  if (!bs) throw Error("write failed: " + base_path + ".bin");
}

inline ModelFile load_model(const std::string& json_path) {
  std::ifstream js(json_path, std::ios::binary);
  if (!js) throw Error("cannot open: " + json_path);
  nlohmann::json manifest;
  try {
    js >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(json_path + ": " + e.what());
  }
  ModelFile out;
  try {
    out.config = detail::config_from_json(manifest.at("config"));
    out.class_names = manifest.at("class_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(json_path + ": " + e.what());
  }
  out.config.validate();

  const std::string dir = json_path.find('/') == std::string::npos
                              ? std::string()
                              : json_path.substr(0, json_path.find_last_of('/') + 1);
  const std::string bin_path = dir + manifest.at("blob").get<std::string>();
  std::ifstream bs(bin_path, std::ios::binary);
  if (!bs) throw Error("cannot open: " + bin_path);
  std::vector<double> blob;
  {
    bs.seekg(0, std::ios::end);
    const std::streamoff bytes = bs.tellg();
    bs.seekg(0);
    if (bytes < 0 || bytes % 8 != 0) throw CorruptRecord(bin_path + ": blob size not a multiple of 8");
    blob.resize(static_cast<std::size_t>(bytes) / 8);
    bs.read(reinterpret_cast<char*>(blob.data()), bytes);
    if (!bs) throw TruncatedFile(bin_path + ": short read");
  }
  const std::int64_t declared = manifest.at("blob_count").get<std::int64_t>();
  if (declared != static_cast<std::int64_t>(blob.size()))
    throw CorruptRecord(bin_path + ": blob holds " + std::to_string(blob.size()) +
                        " values, manifest declares " + std::to_string(declared));

  out.params = make_zero_params(out.config);
  std::size_t pos = 0;
  for (auto& l : out.params.layers) {
    if (pos + l.W.size() + l.b.size() > blob.size())
      throw CorruptRecord(bin_path + ": blob smaller than the declared sections");
    std::copy(blob.begin() + static_cast<std::ptrdiff_t>(pos),
              blob.begin() + static_cast<std::ptrdiff_t>(pos + l.W.size()), l.W.begin());
    pos += l.W.size();
    std::copy(blob.begin() + static_cast<std::ptrdiff_t>(pos),
              blob.begin() + static_cast<std::ptrdiff_t>(pos + l.b.size()), l.b.begin());
    pos += l.b.size();
  }
  if (pos != blob.size())
    throw CorruptRecord(bin_path + ": blob larger than the declared sections");
  return out;
}

}  // namespace tractparc
