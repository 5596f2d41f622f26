#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tractparc/errors.hpp"
#include "tractparc/parallel.hpp"
#include "tractparc/rng.hpp"
#include "tractparc/streamline.hpp"

namespace tractparc {

// Local-global context: every streamline is paired with its k nearest
// neighbors under MDF distance plus a random whole-brain sample, and the
// pairs are flattened into the rows the shared network layer consumes.

struct Normalization {
  Vec3 center{0.0, 0.0, 0.0};
  double scale = 1.0;  // half the bounding-box diagonal of the training set
};

inline Normalization compute_normalization(const std::vector<Tractogram>& ts) {
  Aabb box;
  for (const auto& t : ts)
    for (const auto& s : t.streamlines)
      for (const auto& p : s.points) box.expand(p);
  if (box.empty()) throw EmptyTractogram("compute_normalization: no points");
  Normalization n;
  n.center = box.center();
  n.scale = box.half_diagonal();
  if (n.scale <= 0.0) n.scale = 1.0;
  return n;
}

// Exact nearest-neighbor index under mdf_distance. Desk-scale tractograms
// make brute force affordable; queries prune candidates by abandoning a
// distance accumulation once it exceeds the current kth-best bound, which
// never changes the exact result.
class NeighborIndex {
 public:
  NeighborIndex(std::vector<double> coords, int count, int n_points)
      : coords_(std::move(coords)), count_(count), n_points_(n_points) {}

  int size() const { return count_; }
  int n_points() const { return n_points_; }
  const double* streamline(int id) const { return coords_.data() + static_cast<std::size_t>(id) * n_points_ * 3; }

  // k smallest by (distance, id), query excluded. k may exceed size()-1; the
  // caller handles padding.
  std::vector<int> knn(int query, int k) const {
    if (query < 0 || query >= count_)
      throw IndexOutOfRange("knn query id " + std::to_string(query) + " out of range");
    if (k <= 0 || count_ <= 1) return {};
    using Entry = std::pair<double, int>;
    std::vector<Entry> heap;  // max-heap: worst candidate on top
    heap.reserve(static_cast<std::size_t>(k) + 1);
    const double* q = streamline(query);
    for (int other = 0; other < count_; ++other) {
      if (other == query) continue;
      const bool full = static_cast<int>(heap.size()) == k;
      const double bound = full ? heap.front().first : -1.0;
      const double d = mdf_bounded(q, streamline(other), full ? bound : -1.0);
      if (d < 0.0) continue;  // pruned: strictly worse than the kth best
      const Entry e{d, other};
      if (!full) {
        heap.push_back(e);
        std::push_heap(heap.begin(), heap.end());
      } else if (e < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = e;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    std::sort_heap(heap.begin(), heap.end());
    std::vector<int> out;
    out.reserve(heap.size());
    for (const auto& e : heap) out.push_back(e.second);
    return out;
  }

 private:
  // MDF between two packed streamlines; returns -1 when the distance is
  // provably > bound (pass bound < 0 to disable pruning). Summation order is
  // fixed, so pruned and unpruned paths agree bit-for-bit on kept values.
  double mdf_bounded(const double* a, const double* b, double bound) const {
    const int n = n_points_;
    const double limit = bound >= 0.0 ? bound * n : -1.0;
    double fwd = 0.0, rev = 0.0;
    for (int i = 0; i < n; ++i) {
      const double* pa = a + 3 * i;
      const double* pb = b + 3 * i;
      const double* pr = b + 3 * (n - 1 - i);
      const double dx = pa[0] - pb[0], dy = pa[1] - pb[1], dz = pa[2] - pb[2];
      const double rx = pa[0] - pr[0], ry = pa[1] - pr[1], rz = pa[2] - pr[2];
      fwd += std::sqrt(dx * dx + dy * dy + dz * dz);
      rev += std::sqrt(rx * rx + ry * ry + rz * rz);
      if (limit >= 0.0 && fwd > limit && rev > limit) return -1.0;
    }
    return std::min(fwd, rev) / n;
  }

  std::vector<double> coords_;  // count x n_points x 3
  int count_ = 0;
  int n_points_ = 0;
};

// Packs tractogram coordinates (optionally normalized) into a flat buffer.
inline std::vector<double> pack_coords(const Tractogram& t, int n_points,
                                       const Normalization& norm = {}) {
  std::vector<double> coords(t.size() * static_cast<std::size_t>(n_points) * 3);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& pts = t.streamlines[i].points;
    if (static_cast<int>(pts.size()) != n_points)
      throw ShapeMismatch("streamline " + std::to_string(i) + " has " +
                          std::to_string(pts.size()) + " points, expected " +
                          std::to_string(n_points));
    double* dst = coords.data() + i * static_cast<std::size_t>(n_points) * 3;
    for (int j = 0; j < n_points; ++j) {
      dst[3 * j + 0] = (pts[static_cast<std::size_t>(j)].x - norm.center.x) / norm.scale;
      dst[3 * j + 1] = (pts[static_cast<std::size_t>(j)].y - norm.center.y) / norm.scale;
      dst[3 * j + 2] = (pts[static_cast<std::size_t>(j)].z - norm.center.z) / norm.scale;
    }
  }
  return coords;
}

inline NeighborIndex build_index(const Tractogram& t, const Normalization& norm = {}) {
  if (t.empty()) throw EmptyTractogram("build_index on an empty tractogram");
  const int n_points = t.streamlines.front().n_points();
  return NeighborIndex(pack_coords(t, n_points, norm), static_cast<int>(t.size()), n_points);
}

// The k_local MDF-nearest streamlines, self excluded, ties broken by lower
// id. When fewer than k_local others exist the ids repeat cyclically.
inline std::vector<int> local_context(const NeighborIndex& index, int query, int k_local) {
  if (query < 0 || query >= index.size())
    throw IndexOutOfRange("local_context query id " + std::to_string(query) + " out of range");
  if (k_local <= 0) return {};
  std::vector<int> ranked = index.knn(query, k_local);
  if (ranked.empty()) return std::vector<int>(static_cast<std::size_t>(k_local), query);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k_local));
  for (int i = 0; i < k_local; ++i) out.push_back(ranked[static_cast<std::size_t>(i) % ranked.size()]);
  return out;
}

// k_global ids drawn uniformly with replacement.
inline std::vector<int> global_context(Rng& rng, std::size_t tractogram_size, int k_global) {
  if (tractogram_size == 0) throw EmptyTractogram("global_context on an empty tractogram");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(std::max(0, k_global)));
  for (int i = 0; i < k_global; ++i)
    out.push_back(static_cast<int>(rng.uniform_int(tractogram_size)));
  return out;
}

// Network input for one streamline: m = 1 + k_local + k_global rows of
// [anchor | context streamline], both halves flattened xyz coordinates.
// Row 0 pairs the anchor with itself.
struct ContextInput {
  int rows = 0;
  int width = 0;  // 2 * n_points * 3
  std::vector<double> data;

  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * width; }
};

inline ContextInput assemble_input(int anchor, std::span<const int> locals,
                                   std::span<const int> globals, const Tractogram& t,
                                   const Normalization& norm = {}) {
  if (t.empty()) throw EmptyTractogram("assemble_input on an empty tractogram");
  const int n_points = t.streamlines.front().n_points();
  const std::vector<double> coords = pack_coords(t, n_points, norm);

  const int half = n_points * 3;
  ContextInput in;
  in.rows = 1 + static_cast<int>(locals.size()) + static_cast<int>(globals.size());
  in.width = 2 * half;
  in.data.resize(static_cast<std::size_t>(in.rows) * in.width);

  auto check = [&](int id) {
    if (id < 0 || id >= static_cast<int>(t.size()))
      throw IndexOutOfRange("context id " + std::to_string(id) + " out of range");
    return coords.data() + static_cast<std::size_t>(id) * half;
  };
  const double* a = check(anchor);
  double* dst = in.data.data();
  auto emit = [&](const double* ctx) {
    std::copy(a, a + half, dst);
    std::copy(ctx, ctx + half, dst + half);
    dst += in.width;
  };
  emit(a);
  for (int id : locals) emit(check(id));
  for (int id : globals) emit(check(id));
  return in;
}

// ---------------------------------------------------------------------------
// Assembled dataset: per-sample context ids over a pool of packed tractogram
// coordinates. Rows are materialized on demand during training instead of
// stored, which keeps the memory footprint at ids + coordinates.

struct ContextSample {
  std::int32_t tract = 0;   // index into the coordinate pool
  std::int32_t anchor = 0;  // streamline id within its tractogram
  std::int32_t label = -1;  // -1 when unlabeled
  CutStatus status = CutStatus::Unknown;
  std::vector<std::int32_t> context;  // locals in rank order, then globals
};

struct ContextDataset {
  int n_points = 0, k_local = 0, k_global = 0;
  Normalization norm;
  std::vector<std::vector<double>> tract_coords;  // pool, normalized
  std::vector<ContextSample> samples;

  int half_width() const { return n_points * 3; }
  int row_width() const { return 2 * n_points * 3; }
  int context_rows() const { return 1 + k_local + k_global; }

  const double* streamline(int tract, int id) const {
    return tract_coords[static_cast<std::size_t>(tract)].data() +
           static_cast<std::size_t>(id) * half_width();
  }
  const double* anchor_coords(const ContextSample& s) const {
    return streamline(s.tract, s.anchor);
  }

  // Materializes one sample as a ContextInput row matrix.
  ContextInput materialize(std::size_t sample_idx) const {
    const ContextSample& s = samples[sample_idx];
    ContextInput in;
    in.rows = context_rows();
    in.width = row_width();
    in.data.resize(static_cast<std::size_t>(in.rows) * in.width);
    const double* a = anchor_coords(s);
    const int half = half_width();
    double* dst = in.data.data();
    std::copy(a, a + half, dst);
    std::copy(a, a + half, dst + half);
    dst += in.width;
    for (std::int32_t id : s.context) {
      const double* c = streamline(s.tract, id);
      std::copy(a, a + half, dst);
      std::copy(c, c + half, dst + half);
      dst += in.width;
    }
    return in;
  }
};

// Builds the dataset for a list of tractograms. Local neighbors come from an
// exact MDF index over each tractogram (context is always computed against
// the same, possibly cut, tractogram the streamline belongs to); global ids
// use the substream (seed, "global", tract_index, streamline_id).
inline ContextDataset assemble_dataset(const std::vector<Tractogram>& tractograms, int n_points,
                                       int k_local, int k_global, std::uint64_t seed,
                                       const Normalization& norm, int jobs = 1) {
  ContextDataset ds;
  ds.n_points = n_points;
  ds.k_local = k_local;
  ds.k_global = k_global;
  ds.norm = norm;
  ds.tract_coords.resize(tractograms.size());

  std::vector<std::size_t> offsets(tractograms.size() + 1, 0);
  for (std::size_t ti = 0; ti < tractograms.size(); ++ti)
    offsets[ti + 1] = offsets[ti] + tractograms[ti].size();
  ds.samples.resize(offsets.back());

  for (std::size_t ti = 0; ti < tractograms.size(); ++ti) {
    const Tractogram& t = tractograms[ti];
    if (t.empty()) throw EmptyTractogram("assemble_dataset: empty tractogram in list");
    ds.tract_coords[ti] = pack_coords(t, n_points, norm);
    NeighborIndex index(ds.tract_coords[ti], static_cast<int>(t.size()), n_points);

    parallel_for(static_cast<std::int64_t>(t.size()), jobs, [&](std::int64_t qi) {
      const int q = static_cast<int>(qi);
      ContextSample& s = ds.samples[offsets[ti] + static_cast<std::size_t>(q)];
      s.tract = static_cast<std::int32_t>(ti);
      s.anchor = q;
      const Streamline& sl = t.streamlines[static_cast<std::size_t>(q)];
      s.label = sl.label ? *sl.label : -1;
      s.status = sl.cut_status;
      s.context.reserve(static_cast<std::size_t>(k_local + k_global));
      for (int id : local_context(index, q, k_local)) s.context.push_back(id);
      Rng rng = Rng::substream(seed, "global", ti, static_cast<std::uint64_t>(q));
      for (int id : global_context(rng, t.size(), k_global)) s.context.push_back(id);
    });
  }
  return ds;
}

// Optional cache for assembled batches: flat float32 rows plus a JSON sidecar
// with the shape, normalization constants and seed.
inline void write_batch_cache(const std::string& base_path, const ContextDataset& ds,
                              std::uint64_t seed) {
  const std::string bin_path = base_path + ".bin";
  std::ofstream os(bin_path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + bin_path);
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const ContextInput in = ds.materialize(i);
    std::vector<float> row(in.data.size());
    for (std::size_t j = 0; j < in.data.size(); ++j) row[j] = static_cast<float>(in.data[j]);
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!os) throw Error("write failed: " + bin_path);

  nlohmann::json sidecar{
      {"samples", ds.samples.size()},
      {"rows_per_sample", ds.context_rows()},
      {"row_width", ds.row_width()},
      {"dtype", "float32"},
      {"center", {ds.norm.center.x, ds.norm.center.y, ds.norm.center.z}},
      {"scale", ds.norm.scale},
      {"seed", seed},
  };
  std::ofstream js(base_path + ".json", std::ios::binary);
  if (!js) throw Error("cannot open for writing: " + base_path + ".json");
  js << sidecar.dump(2) << "\n";
}

}  // namespace tractparc
