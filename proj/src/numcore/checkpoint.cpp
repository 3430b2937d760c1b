#include "embedkit/numcore/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "embedkit/common/errors.hpp"
#include "embedkit/common/jsonl.hpp"

namespace embedkit::numcore {

namespace {

constexpr char kMagic[4] = {'E', 'K', 'T', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& buf, T v) {
  // Values are serialized little-endian; this targets little-endian hosts.
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}

template <typename T>
T get(const std::string& buf, std::size_t& pos, const std::string& path) {
  if (pos + sizeof(T) > buf.size()) fail_io("truncated tensor file: " + path);
  T v;
  std::memcpy(&v, buf.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

void save_tensor_file(const std::filesystem::path& path, const TensorMap& tensors,
                      Dtype dtype) {
  std::string manifest;
  std::string payload;
  for (const auto& [name, t] : tensors) {
    if (shape_numel(t.shape) != t.values.size()) {
      fail_data("tensor '" + name + "' shape/data mismatch");
    }
    put<std::uint32_t>(manifest, std::uint32_t(name.size()));
    manifest += name;
    put<std::uint32_t>(manifest, std::uint32_t(t.shape.size()));
    for (std::size_t d : t.shape) put<std::uint64_t>(manifest, d);
    put<std::uint64_t>(manifest, payload.size());
    std::size_t nbytes =
        t.values.size() * (dtype == Dtype::f32 ? sizeof(float) : sizeof(double));
    put<std::uint64_t>(manifest, nbytes);
    if (dtype == Dtype::f32) {
      for (double v : t.values) put<float>(payload, float(v));
    } else {
      for (double v : t.values) put<double>(payload, v);
    }
  }

  std::string buf;
  buf.append(kMagic, 4);
  put<std::uint32_t>(buf, kVersion);
  put<std::uint32_t>(buf, std::uint32_t(dtype));
  put<std::uint64_t>(buf, tensors.size());
  buf += manifest;
  buf += payload;
  atomic_write_file(path, buf);
}

namespace {

struct Header {
  Dtype dtype;
  std::uint64_t count;
  std::size_t pos;
  std::string buf;
};

Header read_header(const std::filesystem::path& path) {
  Header h;
  h.buf = read_file(path);
  if (h.buf.size() < 16 || std::memcmp(h.buf.data(), kMagic, 4) != 0) {
    fail_io("not a tensor file (bad magic): " + path.string());
  }
  h.pos = 4;
  auto version = get<std::uint32_t>(h.buf, h.pos, path.string());
  if (version != kVersion) {
    fail_io("unsupported tensor file version " + std::to_string(version) + ": " +
            path.string());
  }
  auto dt = get<std::uint32_t>(h.buf, h.pos, path.string());
  if (dt > 1) fail_io("unknown tensor file dtype: " + path.string());
  h.dtype = Dtype(dt);
  h.count = get<std::uint64_t>(h.buf, h.pos, path.string());
  return h;
}

}  // namespace

Dtype tensor_file_dtype(const std::filesystem::path& path) {
  return read_header(path).dtype;
}

TensorMap load_tensor_file(const std::filesystem::path& path) {
  Header h = read_header(path);
  const std::string& buf = h.buf;
  std::size_t pos = h.pos;
  const std::string p = path.string();

  struct Entry {
    std::string name;
    Shape shape;
    std::uint64_t offset;
    std::uint64_t nbytes;
  };
  std::vector<Entry> entries;
  entries.reserve(h.count);
  for (std::uint64_t i = 0; i < h.count; ++i) {
    Entry e;
    auto name_len = get<std::uint32_t>(buf, pos, p);
    if (pos + name_len > buf.size()) fail_io("truncated tensor file: " + p);
    e.name.assign(buf.data() + pos, name_len);
    pos += name_len;
    auto ndim = get<std::uint32_t>(buf, pos, p);
    for (std::uint32_t d = 0; d < ndim; ++d) {
      e.shape.push_back(get<std::uint64_t>(buf, pos, p));
    }
    e.offset = get<std::uint64_t>(buf, pos, p);
    e.nbytes = get<std::uint64_t>(buf, pos, p);
    entries.push_back(std::move(e));
  }

  const std::size_t payload_start = pos;
  const std::size_t elem = h.dtype == Dtype::f32 ? sizeof(float) : sizeof(double);
  TensorMap out;
  for (auto& e : entries) {
    std::size_t n = shape_numel(e.shape);
    if (e.nbytes != n * elem) fail_io("tensor '" + e.name + "' size mismatch: " + p);
    std::size_t start = payload_start + e.offset;
    if (start + e.nbytes > buf.size()) fail_io("truncated tensor payload: " + p);
    NamedTensorData t;
    t.shape = std::move(e.shape);
    t.values.resize(n);
    if (h.dtype == Dtype::f32) {
      for (std::size_t i = 0; i < n; ++i) {
        float v;
        std::memcpy(&v, buf.data() + start + i * elem, elem);
        t.values[i] = double(v);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        std::memcpy(&t.values[i], buf.data() + start + i * elem, elem);
      }
    }
    out.emplace(std::move(e.name), std::move(t));
  }
  return out;
}

void save_params(const std::filesystem::path& path, const ParamSet& params,
                 Dtype dtype) {
  TensorMap m;
  for (const auto& [name, t] : params.items()) {
    m[name] = {t.shape(), std::vector<double>(t.data().begin(), t.data().end())};
  }
  save_tensor_file(path, m, dtype);
}

void load_params(const std::filesystem::path& path, ParamSet& params) {
  TensorMap m = load_tensor_file(path);
  for (auto& [name, t] : params.items()) {
    auto it = m.find(name);
    if (it == m.end()) fail_data("checkpoint missing tensor: " + name);
    if (it->second.shape != t.shape()) {
      fail_data("checkpoint shape mismatch for '" + name + "': file " +
                shape_str(it->second.shape) + " vs model " + shape_str(t.shape()));
    }
    auto dst = t.mutable_data();
    std::copy(it->second.values.begin(), it->second.values.end(), dst.begin());
    m.erase(it);
  }
  if (!m.empty()) {
    fail_data("checkpoint contains unknown tensor: " + m.begin()->first);
  }
}

}  // namespace embedkit::numcore
