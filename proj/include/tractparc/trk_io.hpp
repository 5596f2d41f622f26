#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "tractparc/errors.hpp"
#include "tractparc/geometry.hpp"
#include "tractparc/streamline.hpp"

namespace tractparc {

// TrackVis .trk, version 2: little-endian, 1000-byte header, then repeated
// records of [int32 k, k x (3 + n_scalars) float32, n_properties float32].
// Points in the body are "voxmm" = voxel index * voxel_size (corner
// convention, no half-voxel shift); world coordinates are vox_to_ras applied
// to the voxel index. That convention is fixed here and round-trip tested;
// the format itself is silent about it.

#pragma pack(push, 1)
struct TrkHeader {
  char id_string[6];                       // "TRACK\0"
  std::int16_t dim[3];
  float voxel_size[3];
  float origin[3];
  std::int16_t n_scalars;
  char scalar_name[10][20];
  std::int16_t n_properties;
  char property_name[10][20];
  float vox_to_ras[4][4];                  // row-major
  char reserved[444];
  char voxel_order[4];
  char pad2[4];
  float image_orientation_patient[6];
  char pad1[2];
  unsigned char invert_x, invert_y, invert_z;
  unsigned char swap_xy, swap_yz, swap_zx;
  std::int32_t n_count;                    // 0 means "unknown count"
  std::int32_t version;
  std::int32_t hdr_size;                   // must be 1000
};
#pragma pack(pop)

static_assert(sizeof(TrkHeader) == 1000, "trk header layout must be exactly 1000 bytes");

inline TrkHeader make_default_trk_header() {
  TrkHeader h;
  std::memset(&h, 0, sizeof(h));
  std::memcpy(h.id_string, "TRACK", 6);
  h.dim[0] = h.dim[1] = h.dim[2] = 256;
  h.voxel_size[0] = h.voxel_size[1] = h.voxel_size[2] = 1.0f;
  for (int i = 0; i < 4; ++i) h.vox_to_ras[i][i] = 1.0f;
  std::memcpy(h.voxel_order, "RAS\0", 4);
  h.version = 2;
  h.hdr_size = 1000;
  return h;
}

struct TrkReadResult {
  TrkHeader header;
  Tractogram tractogram;
  std::int64_t scalar_values_discarded = 0;
  std::int64_t property_values_discarded = 0;
};

namespace detail {

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t remaining() const { return bytes_.size() - pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

  template <typename T>
  T read() {
    if (remaining() < sizeof(T)) throw TruncatedFile("trk stream ends mid-value");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  void skip(std::size_t n) {
    if (remaining() < n) throw TruncatedFile("trk stream ends mid-record");
    pos_ += n;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline Mat4 vox_to_ras_matrix(const TrkHeader& h) {
  Mat4 m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m.m[4 * i + j] = static_cast<double>(h.vox_to_ras[i][j]);
  return m;
}

}  // namespace detail

inline TrkReadResult read_trk(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(TrkHeader))
    throw TruncatedFile("trk stream shorter than the 1000-byte header (" +
                        std::to_string(bytes.size()) + " bytes)");
  TrkReadResult out;
  std::memcpy(&out.header, bytes.data(), sizeof(TrkHeader));
  const TrkHeader& h = out.header;

  if (std::memcmp(h.id_string, "TRACK", 5) != 0)
    throw NotATrkFile("bad magic: expected \"TRACK\"");
  if (h.hdr_size != 1000)
    throw UnsupportedTrk("hdr_size " + std::to_string(h.hdr_size) + ", expected 1000");
  if (h.version != 1 && h.version != 2)
    throw UnsupportedTrk("trk version " + std::to_string(h.version) + " not supported");
  if (h.version == 1)
    throw UnsupportedTrk("trk version 1 has no vox_to_ras; coordinate frame unrecoverable");
  if (h.n_scalars < 0 || h.n_scalars > 10)
    throw CorruptRecord("n_scalars " + std::to_string(h.n_scalars) + " out of range [0, 10]");
  if (h.n_properties < 0 || h.n_properties > 10)
    throw CorruptRecord("n_properties " + std::to_string(h.n_properties) + " out of range [0, 10]");
  if (h.n_count < 0) throw CorruptRecord("negative n_count");
  for (int i = 0; i < 3; ++i)
    if (!(h.voxel_size[i] > 0.0f))
      throw BadTransform("voxel_size must be positive to map voxmm to voxel indices");

  const Mat4 vox_to_ras = detail::vox_to_ras_matrix(h);
  {
    Mat4 unused;
    if (!vox_to_ras.inverse(unused))
      throw BadTransform("vox_to_ras is singular; cannot interpret coordinates");
  }

  detail::ByteReader r(bytes.subspan(sizeof(TrkHeader)));
  Tractogram& t = out.tractogram;
  t.space_tag = "ras";
  const bool counted = h.n_count > 0;
  while (counted ? t.streamlines.size() < static_cast<std::size_t>(h.n_count) : !r.at_end()) {
    const std::int32_t k = r.read<std::int32_t>();
    if (k <= 0) throw CorruptRecord("record declares " + std::to_string(k) + " points");
    const std::size_t floats_per_point = 3 + static_cast<std::size_t>(h.n_scalars);
    const std::size_t need =
        static_cast<std::size_t>(k) * floats_per_point * 4 +
        static_cast<std::size_t>(h.n_properties) * 4;
    if (r.remaining() < need)
      throw TruncatedFile("record needs " + std::to_string(need) + " bytes, " +
                          std::to_string(r.remaining()) + " remain");
    Streamline s;
    s.points.reserve(static_cast<std::size_t>(k));
    for (std::int32_t i = 0; i < k; ++i) {
      float p[3];
      p[0] = r.read<float>();
      p[1] = r.read<float>();
      p[2] = r.read<float>();
      r.skip(static_cast<std::size_t>(h.n_scalars) * 4);
      out.scalar_values_discarded += h.n_scalars;
      const Vec3 voxel{static_cast<double>(p[0]) / h.voxel_size[0],
                       static_cast<double>(p[1]) / h.voxel_size[1],
                       static_cast<double>(p[2]) / h.voxel_size[2]};
      const Vec3 ras = vox_to_ras.apply_point(voxel);
      if (!is_finite(ras))
        throw CorruptRecord("non-finite coordinate in streamline " +
                            std::to_string(t.streamlines.size()));
      s.points.push_back(ras);
    }
    r.skip(static_cast<std::size_t>(h.n_properties) * 4);
    out.property_values_discarded += h.n_properties;
    s.source_index = static_cast<int>(t.streamlines.size());
    t.streamlines.push_back(std::move(s));
  }
  // Trailing bytes after the declared record count are tolerated.
  return out;
}

inline TrkReadResult read_trk_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                  std::istreambuf_iterator<char>());
  return read_trk(bytes);
}

// Serializes a tractogram in RAS space against the template's transform.
// n_count, version and hdr_size are always filled in by the writer.
inline std::vector<std::uint8_t> write_trk(const TrkHeader& header_template,
                                           const Tractogram& t) {
  TrkHeader h = header_template;
  std::memcpy(h.id_string, "TRACK", 6);
  h.version = 2;
  h.hdr_size = 1000;
  h.n_scalars = 0;
  h.n_properties = 0;
  h.n_count = static_cast<std::int32_t>(t.size());

  for (int i = 0; i < 3; ++i)
    if (!(h.voxel_size[i] > 0.0f)) throw BadTransform("template voxel_size must be positive");
  Mat4 ras_to_vox;
  if (!detail::vox_to_ras_matrix(h).inverse(ras_to_vox))
    throw BadTransform("template vox_to_ras is singular");

  std::vector<std::uint8_t> bytes(sizeof(TrkHeader));
  std::memcpy(bytes.data(), &h, sizeof(TrkHeader));
  auto push_f32 = [&bytes](float v) {
    std::uint8_t raw[4];
    std::memcpy(raw, &v, 4);
    bytes.insert(bytes.end(), raw, raw + 4);
  };
  auto push_i32 = [&bytes](std::int32_t v) {
    std::uint8_t raw[4];
    std::memcpy(raw, &v, 4);
    bytes.insert(bytes.end(), raw, raw + 4);
  };

  for (const auto& s : t.streamlines) {
    validate_polyline(s.points);
    push_i32(static_cast<std::int32_t>(s.points.size()));
    for (const auto& p : s.points) {
      const Vec3 voxel = ras_to_vox.apply_point(p);
      push_f32(static_cast<float>(voxel.x * h.voxel_size[0]));
      push_f32(static_cast<float>(voxel.y * h.voxel_size[1]));
      push_f32(static_cast<float>(voxel.z * h.voxel_size[2]));
    }
  }
  return bytes;
}

inline void write_trk_file(const std::string& path, const TrkHeader& header_template,
                           const Tractogram& t) {
  const auto bytes = write_trk(header_template, t);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path);
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("write failed: " + path);
}

}  // namespace tractparc
