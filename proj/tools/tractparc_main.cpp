// Command-line pipeline: generate synthetic cohorts, apply FOV-cut
// augmentation, train the streamline classifier, classify tractograms and
// score parcellations. Exit codes: 0 success, 1 runtime failure, 2
// usage/config error. Logs go to stderr; artifacts go to files only.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tractparc/context.hpp"
#include "tractparc/errors.hpp"
#include "tractparc/fovcut.hpp"
#include "tractparc/jsonl_io.hpp"
#include "tractparc/metrics.hpp"
#include "tractparc/model_io.hpp"
#include "tractparc/network.hpp"
#include "tractparc/pipeline.hpp"
#include "tractparc/rng.hpp"
#include "tractparc/streamline.hpp"
#include "tractparc/synth.hpp"
#include "tractparc/train.hpp"
#include "tractparc/trk_io.hpp"

namespace fs = std::filesystem;
using namespace tractparc;

namespace {

nlohmann::json load_json_file(const std::string& path, const char* what) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidSpec(std::string(what) + ": cannot open " + path);
  try {
    nlohmann::json j;
    is >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string(what) + " " + path + ": " + e.what());
  }
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path.string());
  os << j.dump(2) << "\n";
}

void require_dir(const std::string& path, const char* what) {
  if (!fs::is_directory(path))
    throw InvalidSpec(std::string(what) + " directory does not exist: " + path);
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::string token;
  for (char c : csv + ",") {
    if (c == ',') {
      if (!token.empty()) out.push_back(std::stoi(token));
      token.clear();
    } else {
      token += c;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string spec_path, out_dir;
  std::optional<std::uint64_t> seed;
};

int cmd_gen(const GenArgs& args) {
  CohortSpec spec = args.spec_path.empty()
                        ? default_cohort_spec(args.seed.value_or(1))
                        : cohort_spec_from_json(load_json_file(args.spec_path, "cohort spec"));
  if (args.seed) spec.seed = *args.seed;
  spec.validate();

  const Cohort cohort = generate_cohort(spec);
  const fs::path out(args.out_dir);
  fs::create_directories(out);
  write_json_file(out / "cohort_spec.resolved.json", cohort_spec_to_json(spec));

  nlohmann::json manifest{{"name", spec.name},
                          {"seed", spec.seed},
                          {"class_names", cohort.class_names},
                          {"subjects", nlohmann::json::array()}};
  auto write_split = [&](const char* split, const std::vector<Tractogram>& ts) {
    fs::create_directories(out / split);
    write_classes_json(out / split, cohort.class_names);
    for (const auto& t : ts)
      write_jsonl_file((out / split / (t.subject_id + ".jsonl")).string(), t);
  };
  write_split("train", cohort.train);
  write_split("val", cohort.val);
  write_split("test", cohort.test);
  for (const auto& a : cohort.manifest)
    manifest["subjects"].push_back({{"subject", a.subject_id},
                                    {"split", a.split},
                                    {"file", a.split + "/" + a.subject_id + ".jsonl"}});
  write_json_file(out / "manifest.json", manifest);
  std::cerr << "gen: wrote " << cohort.manifest.size() << " subjects to " << args.out_dir
            << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct AugmentArgs {
  std::string in_dir, out_dir;
  int planes = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
};

int cmd_augment(const AugmentArgs& args) {
  require_dir(args.in_dir, "input");
  LoadedTractograms in = load_tractogram_dir(args.in_dir);
  if (in.tractograms.empty()) throw InvalidSpec("no .jsonl tractograms in " + args.in_dir);
  const AugmentationResult result =
      augment_training_set(in.tractograms, args.planes, args.seed, args.jobs);
  write_augmented_dir(args.out_dir, result,
                      in.class_names.value_or(std::vector<std::string>{}));
  write_json_file(fs::path(args.out_dir) / "augment_config.resolved.json",
                  {{"in", args.in_dir},
                   {"out", args.out_dir},
                   {"planes", args.planes},
                   {"seed", args.seed}});
  std::cerr << "augment: " << in.tractograms.size() << " subjects x " << args.planes
            << " planes, cut fraction " << result.report.cut_fraction() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string train_dir, val_dir, out_dir, config_path;
  bool no_fovca = false;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::optional<int> epochs, batch, k_local, k_global, repr_dim, num_classes, n_points;
  std::optional<double> lr;
  std::optional<std::string> head;
};

ModelConfig resolve_train_config(const TrainArgs& args, int classes_from_data) {
  ModelConfig cfg;
  bool classes_set = false;
  if (!args.config_path.empty()) {
    const nlohmann::json j = load_json_file(args.config_path, "model config");
    const std::vector<std::string> allowed{
        "n_points", "k_local",   "k_global",    "repr_dim",   "head_widths", "num_classes",
        "learning_rate", "batch_size", "epochs", "seed"};
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool ok = false;
      for (const auto& k : allowed) ok = ok || k == it.key();
      if (!ok) throw InvalidSpec("model config: unknown key \"" + it.key() + "\"");
    }
    if (j.contains("n_points")) cfg.n_points = j["n_points"].get<int>();
    if (j.contains("k_local")) cfg.k_local = j["k_local"].get<int>();
    if (j.contains("k_global")) cfg.k_global = j["k_global"].get<int>();
    if (j.contains("repr_dim")) cfg.repr_dim = j["repr_dim"].get<int>();
    if (j.contains("head_widths")) cfg.head_widths = j["head_widths"].get<std::vector<int>>();
    if (j.contains("num_classes")) {
      cfg.num_classes = j["num_classes"].get<int>();
      classes_set = true;
    }
    if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("batch_size")) cfg.batch_size = j["batch_size"].get<int>();
    if (j.contains("epochs")) cfg.epochs = j["epochs"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (args.num_classes) {
    cfg.num_classes = *args.num_classes;
    classes_set = true;
  }
  if (!classes_set && classes_from_data >= 2) cfg.num_classes = classes_from_data;
  if (args.n_points) cfg.n_points = *args.n_points;
  if (args.epochs) cfg.epochs = *args.epochs;
  if (args.batch) cfg.batch_size = *args.batch;
  if (args.k_local) cfg.k_local = *args.k_local;
  if (args.k_global) cfg.k_global = *args.k_global;
  if (args.repr_dim) cfg.repr_dim = *args.repr_dim;
  if (args.lr) cfg.learning_rate = *args.lr;
  if (args.head) cfg.head_widths = parse_int_list(*args.head);
  if (args.seed) cfg.seed = *args.seed;
  return cfg;
}

nlohmann::json epoch_log_json(const EpochRecord& r) {
  nlohmann::json j{{"epoch", r.epoch},
                   {"train_loss", r.train_loss},
                   {"train_accuracy", r.train_accuracy}};
  j["val_accuracy"] = r.val_accuracy ? nlohmann::json(*r.val_accuracy) : nlohmann::json();
  return j;
}

int cmd_train(const TrainArgs& args) {
  require_dir(args.train_dir, "train");
  require_dir(args.val_dir, "val");

  LoadedTractograms train_in = load_tractogram_dir(args.train_dir, args.no_fovca);
  LoadedTractograms val_in = load_tractogram_dir(args.val_dir);
  if (train_in.tractograms.empty()) throw InvalidSpec("no training tractograms found");

  int classes_from_data = 0;
  if (train_in.class_names) {
    classes_from_data = static_cast<int>(train_in.class_names->size());
  } else {
    for (const auto& t : train_in.tractograms)
      for (const auto& s : t.streamlines)
        if (s.label) classes_from_data = std::max(classes_from_data, *s.label + 1);
  }
  ModelConfig cfg = resolve_train_config(args, classes_from_data);

  // Inputs may carry more points than the model consumes.
  auto conform = [&](std::vector<Tractogram>& ts) {
    for (auto& t : ts)
      for (auto& s : t.streamlines)
        if (s.n_points() != cfg.n_points) s = resample_streamline(s, cfg.n_points);
  };
  conform(train_in.tractograms);
  conform(val_in.tractograms);

  cfg.norm = compute_normalization(train_in.tractograms);

  const ContextDataset train_ds =
      assemble_dataset(train_in.tractograms, cfg.n_points, cfg.k_local, cfg.k_global,
                       derive_seed(cfg.seed, {fnv1a64("train-data")}), cfg.norm, args.jobs);
  const ContextDataset val_ds =
      assemble_dataset(val_in.tractograms, cfg.n_points, cfg.k_local, cfg.k_global,
                       derive_seed(cfg.seed, {fnv1a64("val-data")}), cfg.norm, args.jobs);

  const TrainResult result = train_model(cfg, train_ds, val_ds.samples.empty() ? nullptr : &val_ds,
                                         args.jobs);

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  const std::vector<std::string> class_names =
      train_in.class_names.value_or(std::vector<std::string>{});
  save_model((out / "model").string(), cfg, result.best, class_names);
  save_model((out / "model_final").string(), cfg, result.final_, class_names);
  {
    std::ofstream os(out / "trainlog.jsonl", std::ios::binary);
    for (const auto& r : result.log) os << epoch_log_json(r).dump() << "\n";
  }
  nlohmann::json resolved{{"train", args.train_dir},
                          {"val", args.val_dir},
                          {"out", args.out_dir},
                          {"no_fovca", args.no_fovca},
                          {"config", detail::config_to_json(cfg)},
                          {"class_names", class_names},
                          {"best_epoch", result.best_epoch}};
  write_json_file(out / "resolved_config.json", resolved);
  std::cerr << "train: " << train_ds.samples.size() << " samples, best epoch "
            << result.best_epoch << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct ClassifyArgs {
  std::string model_path, in_path, out_dir;
  std::uint64_t seed = 0;
  int jobs = 1;
};

int cmd_classify(const ClassifyArgs& args) {
  const ModelFile model = load_model(args.model_path);
  std::vector<fs::path> inputs;
  if (fs::is_directory(args.in_path)) {
    inputs = list_jsonl_files(args.in_path);
  } else if (fs::exists(args.in_path)) {
    inputs.push_back(args.in_path);
  } else {
    throw InvalidSpec("input does not exist: " + args.in_path);
  }
  if (inputs.empty()) throw InvalidSpec("no input tractograms in " + args.in_path);

  const fs::path out(args.out_dir);
  fs::create_directories(out / "parcels");

  for (std::size_t ii = 0; ii < inputs.size(); ++ii) {
    Tractogram t = read_jsonl_file(inputs[ii].string());
    if (t.empty()) throw EmptyTractogram("empty tractogram: " + inputs[ii].string());
    for (auto& s : t.streamlines)
      if (s.n_points() != model.config.n_points) s = resample_streamline(s, model.config.n_points);

    const ContextDataset ds = assemble_dataset(
        {t}, model.config.n_points, model.config.k_local, model.config.k_global,
        derive_seed(args.seed, {fnv1a64("classify"), ii}), model.config.norm, args.jobs);
    const std::vector<int> preds = predict_dataset(model.params, ds, args.jobs);

    Tractogram labeled = t;
    for (std::size_t i = 0; i < labeled.size(); ++i) labeled.streamlines[i].label = preds[i];
    const std::string stem = inputs[ii].stem().string();
    write_jsonl_file((out / (stem + ".pred.jsonl")).string(), labeled);

    for (int c = 0; c < model.config.num_classes; ++c) {
      Tractogram parcel;
      parcel.subject_id = t.subject_id;
      parcel.space_tag = t.space_tag;
      for (std::size_t i = 0; i < labeled.size(); ++i)
        if (preds[i] == c) parcel.streamlines.push_back(labeled.streamlines[i]);
      const std::string cname = c < static_cast<int>(model.class_names.size())
                                    ? model.class_names[static_cast<std::size_t>(c)]
                                    : "class_" + std::to_string(c);
      write_jsonl_file((out / "parcels" / (stem + "." + cname + ".jsonl")).string(), parcel);
    }
  }
  write_json_file(out / "classify_config.resolved.json",
                  {{"model", args.model_path}, {"in", args.in_path}, {"seed", args.seed}});
  std::cerr << "classify: " << inputs.size() << " tractogram(s)\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string pred_path, truth_path, out_dir, atlas_path, tracts_csv, method = "model";
  std::int64_t min_streamlines = 20;
};

int cmd_eval(const EvalArgs& args) {
  auto collect = [](const std::string& path) {
    std::vector<fs::path> files;
    if (fs::is_directory(path)) {
      files = list_jsonl_files(path);
    } else if (fs::exists(path)) {
      files.push_back(path);
    } else {
      throw InvalidSpec("path does not exist: " + path);
    }
    return files;
  };
  const auto pred_files = collect(args.pred_path);
  const auto truth_files = collect(args.truth_path);
  if (pred_files.size() != truth_files.size())
    throw InvalidSpec("pred and truth hold different file counts (" +
                      std::to_string(pred_files.size()) + " vs " +
                      std::to_string(truth_files.size()) + ")");
  if (pred_files.empty()) throw InvalidSpec("nothing to evaluate");

  struct SubjectEval {
    std::string subject;
    std::vector<int> pred, truth;
    std::vector<CutStatus> status;
  };
  std::vector<SubjectEval> subjects;
  int num_classes = 0;
  for (std::size_t i = 0; i < pred_files.size(); ++i) {
    const Tractogram pt = read_jsonl_file(pred_files[i].string());
    const Tractogram tt = read_jsonl_file(truth_files[i].string());
    if (pt.size() != tt.size())
      throw ShapeMismatch(pred_files[i].string() + ": " + std::to_string(pt.size()) +
                          " streamlines vs truth " + std::to_string(tt.size()));
    SubjectEval se;
    se.subject = tt.subject_id;
    for (std::size_t k = 0; k < pt.size(); ++k) {
      if (!pt.streamlines[k].label) throw MissingLabel("prediction without a label");
      if (!tt.streamlines[k].label) throw MissingLabel("truth without a label");
      se.pred.push_back(*pt.streamlines[k].label);
      se.truth.push_back(*tt.streamlines[k].label);
      se.status.push_back(tt.streamlines[k].cut_status);
      num_classes = std::max({num_classes, se.pred.back() + 1, se.truth.back() + 1});
    }
    subjects.push_back(std::move(se));
  }

  std::optional<Tractogram> atlas;
  if (!args.atlas_path.empty()) {
    atlas = read_jsonl_file(args.atlas_path);
    for (const auto& s : atlas->streamlines) {
      if (!s.label) throw MissingLabel("atlas streamline without a label");
      num_classes = std::max(num_classes, *s.label + 1);
    }
  }

  std::vector<int> scope = args.tracts_csv.empty() ? default_f1_scope(num_classes)
                                                   : parse_int_list(args.tracts_csv);

  std::vector<int> pooled_pred, pooled_truth;
  std::vector<CutStatus> pooled_status;
  for (const auto& se : subjects) {
    pooled_pred.insert(pooled_pred.end(), se.pred.begin(), se.pred.end());
    pooled_truth.insert(pooled_truth.end(), se.truth.begin(), se.truth.end());
    pooled_status.insert(pooled_status.end(), se.status.begin(), se.status.end());
  }
  EvalReport report = evaluate_split(pooled_pred, pooled_truth, pooled_status, num_classes, scope);
  report.method = args.method;
  report.min_streamlines = args.min_streamlines;

  // TIR always (it only needs predictions); ATD when an atlas is given.
  {
    double tir_sum = 0.0;
    std::vector<std::vector<Vec3>> atlas_points(static_cast<std::size_t>(num_classes));
    if (atlas)
      for (const auto& s : atlas->streamlines)
        atlas_points[static_cast<std::size_t>(*s.label)].insert(
            atlas_points[static_cast<std::size_t>(*s.label)].end(), s.points.begin(),
            s.points.end());

    std::vector<double> atd_sum_per_tract(static_cast<std::size_t>(num_classes), 0.0);
    std::vector<int> atd_n_per_tract(static_cast<std::size_t>(num_classes), 0);
    double atd_subject_mean_sum = 0.0;
    int atd_subjects = 0;

    for (std::size_t si = 0; si < subjects.size(); ++si) {
      const auto& se = subjects[si];
      std::vector<std::int64_t> counts(static_cast<std::size_t>(num_classes), 0);
      std::vector<std::vector<Vec3>> pred_points(static_cast<std::size_t>(num_classes));
      const Tractogram pt = read_jsonl_file(pred_files[si].string());
      for (std::size_t k = 0; k < se.pred.size(); ++k) {
        ++counts[static_cast<std::size_t>(se.pred[k])];
        if (atlas)
          pred_points[static_cast<std::size_t>(se.pred[k])].insert(
              pred_points[static_cast<std::size_t>(se.pred[k])].end(),
              pt.streamlines[k].points.begin(), pt.streamlines[k].points.end());
      }
      const double rate = tir(counts, scope, args.min_streamlines);
      report.tir_per_subject.emplace_back(se.subject, rate);
      tir_sum += rate;

      if (atlas) {
        const AtdResult ar = atd(pred_points, atlas_points, scope, counts, args.min_streamlines);
        for (const auto& [cls, mm] : ar.per_tract)
          if (mm) {
            atd_sum_per_tract[static_cast<std::size_t>(cls)] += *mm;
            atd_n_per_tract[static_cast<std::size_t>(cls)] += 1;
          }
        if (ar.mean_mm) {
          atd_subject_mean_sum += *ar.mean_mm;
          ++atd_subjects;
        }
      }
    }
    report.tir_mean = tir_sum / static_cast<double>(subjects.size());
    if (atlas) {
      for (int c : scope) {
        std::optional<double> mm;
        if (atd_n_per_tract[static_cast<std::size_t>(c)] > 0)
          mm = atd_sum_per_tract[static_cast<std::size_t>(c)] /
               atd_n_per_tract[static_cast<std::size_t>(c)];
        report.atd_per_tract.emplace_back(c, mm);
      }
      if (atd_subjects > 0) report.atd_mean_mm = atd_subject_mean_sum / atd_subjects;
    }
  }

  const fs::path out(args.out_dir);
  fs::create_directories(out);
  write_json_file(out / "report.json", report_to_json(report));
  {
    std::ofstream os(out / "table.csv", std::ios::binary);
    os << report_to_csv(report);
  }
  write_json_file(out / "eval_config.resolved.json",
                  {{"pred", args.pred_path},
                   {"truth", args.truth_path},
                   {"atlas", args.atlas_path},
                   {"tracts", args.tracts_csv},
                   {"min_streamlines", args.min_streamlines},
                   {"method", args.method}});
  std::cerr << "eval: " << subjects.size() << " subject(s)";
  if (report.all.accuracy) std::cerr << ", accuracy " << *report.all.accuracy;
  std::cerr << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_convert(const std::string& in_path, const std::string& out_path) {
  const std::string in_ext = fs::path(in_path).extension().string();
  const std::string out_ext = fs::path(out_path).extension().string();
  if (!fs::exists(in_path)) throw InvalidSpec("input does not exist: " + in_path);
  Tractogram t;
  if (in_ext == ".trk") {
    t = read_trk_file(in_path).tractogram;
    t.subject_id = fs::path(in_path).stem().string();
  } else if (in_ext == ".jsonl") {
    t = read_jsonl_file(in_path);
  } else {
    throw InvalidSpec("unsupported input extension: " + in_ext);
  }
  if (out_ext == ".trk") {
    write_trk_file(out_path, make_default_trk_header(), t);
  } else if (out_ext == ".jsonl") {
    write_jsonl_file(out_path, t);
  } else {
    throw InvalidSpec("unsupported output extension: " + out_ext);
  }
  std::cerr << "convert: " << t.size() << " streamlines\n";
  return 0;
}

int cmd_info(const std::string& in_path) {
  if (!fs::exists(in_path)) throw InvalidSpec("input does not exist: " + in_path);
  if (fs::path(in_path).extension() == ".jsonl") {
    const Tractogram t = read_jsonl_file(in_path);
    std::cout << "format: jsonl\nsubject: " << t.subject_id
              << "\nstreamlines: " << t.size() << "\n";
    if (!t.empty()) {
      const Aabb box = bounding_box(t);
      std::cout << "bbox_mm: [" << box.lo.x << ", " << box.lo.y << ", " << box.lo.z << "] .. ["
                << box.hi.x << ", " << box.hi.y << ", " << box.hi.z << "]\n";
    }
    return 0;
  }
  const TrkReadResult r = read_trk_file(in_path);
  const TrkHeader& h = r.header;
  std::cout << "format: trk\nversion: " << h.version << "\nhdr_size: " << h.hdr_size
            << "\ndim: [" << h.dim[0] << ", " << h.dim[1] << ", " << h.dim[2] << "]"
            << "\nvoxel_size: [" << h.voxel_size[0] << ", " << h.voxel_size[1] << ", "
            << h.voxel_size[2] << "]"
            << "\nn_scalars: " << h.n_scalars << "\nn_properties: " << h.n_properties
            << "\nn_count: " << h.n_count << "\nparsed_streamlines: " << r.tractogram.size()
            << "\nscalar_values_discarded: " << r.scalar_values_discarded
            << "\nproperty_values_discarded: " << r.property_values_discarded << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tractography parcellation toolkit"};
  app.require_subcommand(1);

  GenArgs gen_args;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen", "generate a synthetic labeled cohort");
  gen->add_option("--spec", gen_args.spec_path, "cohort spec JSON (omit for the default cohort)");
  gen->add_option("--out", gen_args.out_dir, "output directory")->required();
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "override the spec seed");

  AugmentArgs aug_args;
  auto* aug = app.add_subcommand("augment", "apply FOV-cut augmentation to a cohort directory");
  aug->add_option("--in", aug_args.in_dir, "input directory of labeled jsonl")->required();
  aug->add_option("--out", aug_args.out_dir, "output directory")->required();
  aug->add_option("--planes", aug_args.planes, "cutting planes per subject")
      ->default_val(10)
      ->check(CLI::NonNegativeNumber);
  aug->add_option("--seed", aug_args.seed, "master seed")->default_val(0);
  aug->add_option("--jobs", aug_args.jobs, "worker threads")->default_val(1);

  TrainArgs train_args;
  std::uint64_t train_seed = 0;
  int t_epochs = 0, t_batch = 0, t_klocal = 0, t_kglobal = 0, t_repr = 0, t_classes = 0,
      t_npoints = 0;
  double t_lr = 0.0;
  std::string t_head;
  auto* train = app.add_subcommand("train", "train the streamline classifier");
  train->add_option("--train", train_args.train_dir, "training directory")->required();
  train->add_option("--val", train_args.val_dir, "validation directory")->required();
  train->add_option("--out", train_args.out_dir, "output directory")->required();
  train->add_option("--config", train_args.config_path, "model config JSON");
  train->add_flag("--no-fovca", train_args.no_fovca,
                  "train on the uncut tractograms only (ablation arm)");
  auto* train_seed_opt = train->add_option("--seed", train_seed, "training seed");
  train->add_option("--jobs", train_args.jobs, "worker threads")->default_val(1);
  auto* o_epochs = train->add_option("--epochs", t_epochs);
  auto* o_batch = train->add_option("--batch", t_batch);
  auto* o_klocal = train->add_option("--k-local", t_klocal);
  auto* o_kglobal = train->add_option("--k-global", t_kglobal);
  auto* o_repr = train->add_option("--repr-dim", t_repr);
  auto* o_classes = train->add_option("--num-classes", t_classes);
  auto* o_npoints = train->add_option("--n-points", t_npoints);
  auto* o_lr = train->add_option("--lr", t_lr);
  auto* o_head = train->add_option("--head", t_head, "comma-separated head widths");

  ClassifyArgs cls_args;
  auto* cls = app.add_subcommand("classify", "classify tractogram streamlines");
  cls->add_option("--model", cls_args.model_path, "model.json path")->required();
  cls->add_option("--in", cls_args.in_path, "tractogram file or directory")->required();
  cls->add_option("--out", cls_args.out_dir, "output directory")->required();
  cls->add_option("--seed", cls_args.seed, "global-context seed")->default_val(0);
  cls->add_option("--jobs", cls_args.jobs, "worker threads")->default_val(1);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "score predictions against truth");
  eval->add_option("--pred", eval_args.pred_path, "prediction file or directory")->required();
  eval->add_option("--truth", eval_args.truth_path, "truth file or directory")->required();
  eval->add_option("--out", eval_args.out_dir, "output directory")->required();
  eval->add_option("--atlas", eval_args.atlas_path, "labeled atlas jsonl for ATD");
  eval->add_option("--tracts", eval_args.tracts_csv, "comma-separated tract class ids");
  eval->add_option("--min-streamlines", eval_args.min_streamlines,
                   "TIR identification threshold")
      ->default_val(20);
  eval->add_option("--method", eval_args.method, "method name for reports")->default_val("model");

  std::string conv_in, conv_out;
  auto* conv = app.add_subcommand("convert", "convert between trk and jsonl");
  conv->add_option("--in", conv_in, "input file")->required();
  conv->add_option("--out", conv_out, "output file")->required();

  std::string info_in;
  auto* info = app.add_subcommand("info", "print header fields and stats");
  info->add_option("--in", info_in, "input file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (*gen) {
      if (*gen_seed_opt) gen_args.seed = gen_seed;
      return cmd_gen(gen_args);
    }
    if (*aug) return cmd_augment(aug_args);
    if (*train) {
      if (*train_seed_opt) train_args.seed = train_seed;
      if (*o_epochs) train_args.epochs = t_epochs;
      if (*o_batch) train_args.batch = t_batch;
      if (*o_klocal) train_args.k_local = t_klocal;
      if (*o_kglobal) train_args.k_global = t_kglobal;
      if (*o_repr) train_args.repr_dim = t_repr;
      if (*o_classes) train_args.num_classes = t_classes;
      if (*o_npoints) train_args.n_points = t_npoints;
      if (*o_lr) train_args.lr = t_lr;
      if (*o_head) train_args.head = t_head;
      return cmd_train(train_args);
    }
    if (*cls) return cmd_classify(cls_args);
    if (*eval) return cmd_eval(eval_args);
    if (*conv) return cmd_convert(conv_in, conv_out);
    if (*info) {
      try {
        return cmd_info(info_in);
      } catch (const NotATrkFile& e) {
        std::cerr << "error (NotATrkFile): " << e.what() << "\n";
        return 2;
      }
    }
  } catch (const InvalidSpec& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
