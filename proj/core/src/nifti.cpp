// Copyright 2026 The corotk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "corotk/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <memory>
#include <string>

#include "corotk/error.hpp"

namespace corotk {
namespace {

#pragma pack(push, 1)
struct Nifti1Header {
  std::int32_t sizeof_hdr;
  char data_type[10];
  char db_name[18];
  std::int32_t extents;
  std::int16_t session_error;
  char regular;
  char dim_info;
  std::int16_t dim[8];
  float intent_p1;
  float intent_p2;
  float intent_p3;
  std::int16_t intent_code;
  std::int16_t datatype;
  std::int16_t bitpix;
  std::int16_t slice_start;
  float pixdim[8];
  float vox_offset;
  float scl_slope;
  float scl_inter;
  std::int16_t slice_end;
  char slice_code;
  char xyzt_units;
  float cal_max;
  float cal_min;
  float slice_duration;
  float toffset;
  std::int32_t glmax;
  std::int32_t glmin;
  char descrip[80];
  char aux_file[24];
  std::int16_t qform_code;
  std::int16_t sform_code;
  float quatern_b;
  float quatern_c;
  float quatern_d;
  float qoffset_x;
  float qoffset_y;
  float qoffset_z;
  float srow_x[4];
  float srow_y[4];
  float srow_z[4];
  char intent_name[16];
  char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(Nifti1Header) == 348);

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtFloat32 = 16;
constexpr std::int16_t kIntentLabel = 1002;
constexpr std::int16_t kXformScanner = 1;
constexpr char kUnitsMm = 2;

struct GzCloser {
  void operator()(gzFile f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<gzFile_s, GzCloser>;

template <typename T>
T byteswap_value(T v) {
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
  std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

template <typename T, std::size_t N>
void byteswap_array(T (&arr)[N]) {
  for (auto& v : arr) v = byteswap_value(v);
}

void byteswap_header(Nifti1Header& h) {
  h.sizeof_hdr = byteswap_value(h.sizeof_hdr);
  h.extents = byteswap_value(h.extents);
  h.session_error = byteswap_value(h.session_error);
  byteswap_array(h.dim);
  h.intent_p1 = byteswap_value(h.intent_p1);
  h.intent_p2 = byteswap_value(h.intent_p2);
  h.intent_p3 = byteswap_value(h.intent_p3);
  h.intent_code = byteswap_value(h.intent_code);
  h.datatype = byteswap_value(h.datatype);
  h.bitpix = byteswap_value(h.bitpix);
  h.slice_start = byteswap_value(h.slice_start);
  byteswap_array(h.pixdim);
  h.vox_offset = byteswap_value(h.vox_offset);
  h.scl_slope = byteswap_value(h.scl_slope);
  h.scl_inter = byteswap_value(h.scl_inter);
  h.slice_end = byteswap_value(h.slice_end);
  h.cal_max = byteswap_value(h.cal_max);
  h.cal_min = byteswap_value(h.cal_min);
  h.slice_duration = byteswap_value(h.slice_duration);
  h.toffset = byteswap_value(h.toffset);
  h.glmax = byteswap_value(h.glmax);
  h.glmin = byteswap_value(h.glmin);
  h.qform_code = byteswap_value(h.qform_code);
  h.sform_code = byteswap_value(h.sform_code);
  h.quatern_b = byteswap_value(h.quatern_b);
  h.quatern_c = byteswap_value(h.quatern_c);
  h.quatern_d = byteswap_value(h.quatern_d);
  h.qoffset_x = byteswap_value(h.qoffset_x);
  h.qoffset_y = byteswap_value(h.qoffset_y);
  h.qoffset_z = byteswap_value(h.qoffset_z);
  byteswap_array(h.srow_x);
  byteswap_array(h.srow_y);
  byteswap_array(h.srow_z);
}

std::size_t bytes_per_voxel(std::int16_t datatype) {
  switch (datatype) {
    case kDtUint8: return 1;
    case kDtInt16: return 2;
    case kDtFloat32: return 4;
    default: return 0;
  }
}

bool ends_with_gz(const std::filesystem::path& p) {
  const std::string s = p.string();
  return s.size() >= 3 && s.compare(s.size() - 3, 3, ".gz") == 0;
}

// Reads exactly `n` bytes; returns how many were read. Throws on stream errors.
std::size_t read_bytes(gzFile f, void* dst, std::size_t n) {
  std::size_t total = 0;
  auto* out = static_cast<unsigned char*>(dst);
  while (total < n) {
    const auto chunk = static_cast<unsigned>(std::min<std::size_t>(n - total, 1u << 30));
    const int got = gzread(f, out + total, chunk);
    if (got < 0) {
      int errnum = 0;
      throw Error(ErrorCode::io, std::string("read failed: ") + gzerror(f, &errnum));
    }
    if (got == 0) break;
    total += static_cast<std::size_t>(got);
  }
  return total;
}

// Header floats are widened through their shortest decimal form, so a double
// such as 0.35 written as float reads back as 0.35.
double widen(float f) {
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, f).ptr;
  double d = f;
  std::from_chars(buf, end, d);
  return d;
}

Grid grid_from_header(const Nifti1Header& h) {
  Grid g;
  for (int a = 0; a < 3; ++a) {
    g.dims[a] = a < h.dim[0] ? h.dim[a + 1] : 1;
    if (g.dims[a] <= 0) g.dims[a] = 1;
    const double s = std::abs(widen(h.pixdim[a + 1]));
    g.spacing[a] = s > 0.0 ? s : 1.0;
  }
  if (h.qform_code > 0) {
    const double b = h.quatern_b, c = h.quatern_c, d = h.quatern_d;
    const double a2 = 1.0 - (b * b + c * c + d * d);
    double a = 0.0;
    Quat q;
    if (a2 < 1e-7) {
      // 180 degree rotation; renormalize (b, c, d).
      const double n = std::sqrt(b * b + c * c + d * d);
      q = {0.0, b / n, c / n, d / n};
    } else {
      a = std::sqrt(a2);
      q = {a, b, c, d};
    }
    Mat3 r = q.to_matrix();
    const double qfac = h.pixdim[0] < 0.0f ? -1.0 : 1.0;
    for (int row = 0; row < 3; ++row) r(row, 2) *= qfac;
    g.direction = r;
    g.origin = {widen(h.qoffset_x), widen(h.qoffset_y), widen(h.qoffset_z)};
  } else if (h.sform_code > 0) {
    const float* rows[3] = {h.srow_x, h.srow_y, h.srow_z};
    Mat3 r;
    for (int col = 0; col < 3; ++col) {
      Vec3 c{rows[0][col], rows[1][col], rows[2][col]};
      const double len = norm(c);
      if (len == 0.0) throw Error(ErrorCode::format, "sform column has zero length");
      g.spacing[col] = len;
      c = c / len;
      for (int row = 0; row < 3; ++row) r(row, col) = c[row];
    }
    // sform may carry shear; keep the nearest orthonormal frame.
    if (orthonormality_error(r) > 1e-4)
      throw Error(ErrorCode::unsupported, "sform with shear is not supported");
    g.direction = r;
    g.origin = {widen(rows[0][3]), widen(rows[1][3]), widen(rows[2][3])};
  }
  return g;
}

}  // namespace

Volume read_volume(const std::filesystem::path& path, KindHint hint) {
  GzHandle file(gzopen(path.string().c_str(), "rb"));
  if (!file) throw Error(ErrorCode::io, "cannot open " + path.string());

  Nifti1Header h{};
  if (read_bytes(file.get(), &h, sizeof h) != sizeof h)
    throw Error(ErrorCode::truncated, "header shorter than 348 bytes in " + path.string());

  bool swapped = false;
  if (h.sizeof_hdr != 348) {
    if (byteswap_value(h.sizeof_hdr) != 348)
      throw Error(ErrorCode::format, "sizeof_hdr is not 348 in " + path.string());
    swapped = true;
    byteswap_header(h);
  }
  const bool single = std::memcmp(h.magic, "n+1\0", 4) == 0;
  const bool pair = std::memcmp(h.magic, "ni1\0", 4) == 0;
  if (!single && !pair) throw Error(ErrorCode::format, "bad magic in " + path.string());
  if (pair) throw Error(ErrorCode::unsupported, "detached .hdr/.img pairs are not supported");

  const std::size_t bpv = bytes_per_voxel(h.datatype);
  if (bpv == 0)
    throw Error(ErrorCode::unsupported, "datatype " + std::to_string(h.datatype));
  if (h.dim[0] < 1 || h.dim[0] > 7) throw Error(ErrorCode::format, "dim[0] out of range");
  for (int a = 4; a <= h.dim[0]; ++a)
    if (h.dim[a] > 1) throw Error(ErrorCode::unsupported, "volumes with more than 3 dimensions");

  const Grid grid = grid_from_header(h);
  const std::size_t count = grid.voxel_count();

  const auto offset = static_cast<std::size_t>(h.vox_offset);
  if (offset < sizeof h) throw Error(ErrorCode::format, "vox_offset inside header");
  std::vector<unsigned char> skip(offset - sizeof h);
  if (read_bytes(file.get(), skip.data(), skip.size()) != skip.size())
    throw Error(ErrorCode::truncated, "file ends before vox_offset");

  std::vector<unsigned char> raw(count * bpv);
  const std::size_t got = read_bytes(file.get(), raw.data(), raw.size());
  if (got != raw.size())
    throw Error(ErrorCode::truncated, "payload has " + std::to_string(got) + " bytes, header needs " +
                                          std::to_string(raw.size()));

  const bool scaled = h.scl_slope != 0.0f && !(h.scl_slope == 1.0f && h.scl_inter == 0.0f);
  std::vector<float> data(count);
  for (std::size_t n = 0; n < count; ++n) {
    float v = 0.0f;
    const unsigned char* src = raw.data() + n * bpv;
    switch (h.datatype) {
      case kDtUint8: v = static_cast<float>(src[0]); break;
      case kDtInt16: {
        std::int16_t s;
        std::memcpy(&s, src, 2);
        if (swapped) s = byteswap_value(s);
        v = static_cast<float>(s);
        break;
      }
      case kDtFloat32: {
        std::memcpy(&v, src, 4);
        if (swapped) v = byteswap_value(v);
        break;
      }
    }
    if (scaled) v = v * h.scl_slope + h.scl_inter;
    data[n] = v;
  }

  VoxelKind kind = VoxelKind::intensity;
  if (hint == KindHint::label) {
    kind = VoxelKind::label;
  } else if (hint == KindHint::automatic) {
    if (h.intent_code == kIntentLabel || (h.datatype == kDtUint8 && !scaled)) kind = VoxelKind::label;
  }
  DataType dtype = h.datatype == kDtUint8 ? DataType::uint8
                   : h.datatype == kDtInt16 ? DataType::int16
                                            : DataType::float32;
  if (scaled) dtype = DataType::float32;
  return Volume(grid, kind, std::move(data), dtype);
}

void write_volume(const Volume& volume, const std::filesystem::path& path) {
  const Grid& g = volume.grid();
  Nifti1Header h{};
  h.sizeof_hdr = 348;
  h.regular = 'r';
  h.dim[0] = 3;
  for (int a = 0; a < 3; ++a) {
    if (g.dims[a] > 32767) throw Error(ErrorCode::input, "dimension exceeds NIfTI-1 limit");
    h.dim[a + 1] = static_cast<std::int16_t>(g.dims[a]);
    h.pixdim[a + 1] = static_cast<float>(g.spacing[a]);
  }
  for (int a = 4; a < 8; ++a) {
    h.dim[a] = 1;
    h.pixdim[a] = 1.0f;
  }

  DataType dtype = volume.dtype();
  if (volume.kind() == VoxelKind::intensity && dtype == DataType::uint8) dtype = DataType::int16;
  switch (dtype) {
    case DataType::uint8: h.datatype = kDtUint8; h.bitpix = 8; break;
    case DataType::int16: h.datatype = kDtInt16; h.bitpix = 16; break;
    case DataType::float32: h.datatype = kDtFloat32; h.bitpix = 32; break;
  }
  h.intent_code = volume.kind() == VoxelKind::label ? kIntentLabel : 0;
  h.vox_offset = 352.0f;
  h.scl_slope = 1.0f;
  h.scl_inter = 0.0f;
  h.xyzt_units = kUnitsMm;
  std::strncpy(h.descrip, "corotk", sizeof h.descrip);

  // qform carries a proper rotation; a reflection goes into qfac.
  Mat3 r = g.direction;
  double qfac = 1.0;
  if (determinant(r) < 0.0) {
    qfac = -1.0;
    for (int row = 0; row < 3; ++row) r(row, 2) = -r(row, 2);
  }
  Quat q = Quat::from_matrix(r);
  h.pixdim[0] = static_cast<float>(qfac);
  h.qform_code = kXformScanner;
  h.quatern_b = static_cast<float>(q.x);
  h.quatern_c = static_cast<float>(q.y);
  h.quatern_d = static_cast<float>(q.z);
  h.qoffset_x = static_cast<float>(g.origin.x);
  h.qoffset_y = static_cast<float>(g.origin.y);
  h.qoffset_z = static_cast<float>(g.origin.z);
  h.sform_code = kXformScanner;
  float* rows[3] = {h.srow_x, h.srow_y, h.srow_z};
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 3; ++col)
      rows[row][col] = static_cast<float>(g.direction(row, col) * g.spacing[col]);
    rows[row][3] = static_cast<float>(g.origin[row]);
  }
  std::memcpy(h.magic, "n+1\0", 4);

  const std::size_t bpv = bytes_per_voxel(h.datatype);
  std::vector<unsigned char> payload(volume.size() * bpv);
  for (std::size_t n = 0; n < volume.size(); ++n) {
    const float v = volume[n];
    unsigned char* dst = payload.data() + n * bpv;
    switch (dtype) {
      case DataType::uint8:
        if (v < 0.0f || v > 255.0f || v != std::floor(v))
          throw Error(ErrorCode::input, "value does not fit uint8");
        dst[0] = static_cast<unsigned char>(v);
        break;
      case DataType::int16: {
        if (v < -32768.0f || v > 32767.0f || v != std::floor(v))
          throw Error(ErrorCode::input, "value does not fit int16");
        const auto s = static_cast<std::int16_t>(v);
        std::memcpy(dst, &s, 2);
        break;
      }
      case DataType::float32: std::memcpy(dst, &v, 4); break;
    }
  }

  const char* mode = ends_with_gz(path) ? "wb6" : "wbT";
  GzHandle file(gzopen(path.string().c_str(), mode));
  if (!file) throw Error(ErrorCode::io, "cannot open " + path.string() + " for writing");
  const char extension[4] = {0, 0, 0, 0};
  auto put = [&](const void* src, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(src);
    while (n > 0) {
      const auto chunk = static_cast<unsigned>(std::min<std::size_t>(n, 1u << 30));
      if (gzwrite(file.get(), p, chunk) != static_cast<int>(chunk))
        throw Error(ErrorCode::io, "write failed for " + path.string());
      p += chunk;
      n -= chunk;
    }
  };
  put(&h, sizeof h);
  put(extension, sizeof extension);
  put(payload.data(), payload.size());
  if (gzclose(file.release()) != Z_OK) throw Error(ErrorCode::io, "close failed for " + path.string());
}

}  // namespace corotk
