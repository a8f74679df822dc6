#include "s2r/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace s2r {

namespace {

constexpr char kMagic[8] = {'S', '2', 'R', 'C', 'K', 'P', 'T', '\n'};
constexpr uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void Checkpoint::put(const std::string& name, const torch::Tensor& t) {
  arrays[name] = t.detach().to(torch::kCPU, torch::kFloat32).contiguous().clone();
}

bool Checkpoint::has_prefix(const std::string& prefix) const {
  auto it = arrays.lower_bound(prefix);
  return it != arrays.end() && it->first.rfind(prefix, 0) == 0;
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  const std::string meta = metadata.dump();
  write_pod(out, (uint64_t)meta.size());
  out.write(meta.data(), (std::streamsize)meta.size());
  write_pod(out, (uint64_t)arrays.size());
  for (const auto& [name, tensor] : arrays) {
    write_pod(out, (uint32_t)name.size());
    out.write(name.data(), (std::streamsize)name.size());
    write_pod(out, (uint32_t)tensor.dim());
    for (int64_t i = 0; i < tensor.dim(); ++i) write_pod(out, (uint64_t)tensor.size(i));
    const uint64_t n = (uint64_t)tensor.numel();
    write_pod(out, n);
    out.write(reinterpret_cast<const char*>(tensor.data_ptr<float>()), (std::streamsize)(n * sizeof(float)));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  if (read_pod<uint32_t>(in) != kVersion) throw std::runtime_error("checkpoint: unsupported version");
  Checkpoint ckpt;
  const uint64_t meta_len = read_pod<uint64_t>(in);
  std::string meta(meta_len, '\0');
  in.read(meta.data(), (std::streamsize)meta_len);
  ckpt.metadata = nlohmann::json::parse(meta);
  const uint64_t n_entries = read_pod<uint64_t>(in);
  for (uint64_t e = 0; e < n_entries; ++e) {
    const uint32_t name_len = read_pod<uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const uint32_t ndim = read_pod<uint32_t>(in);
    std::vector<int64_t> dims(ndim);
    for (uint32_t i = 0; i < ndim; ++i) dims[i] = (int64_t)read_pod<uint64_t>(in);
    const uint64_t n = read_pod<uint64_t>(in);
    auto t = torch::empty(dims, torch::kFloat32);
    in.read(reinterpret_cast<char*>(t.data_ptr<float>()), (std::streamsize)(n * sizeof(float)));
    if (!in) throw std::runtime_error("checkpoint: truncated array data");
    ckpt.arrays[name] = t;
  }
  return ckpt;
}

uint64_t hash_arrays(const Checkpoint& ckpt, const std::string& prefix) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, size_t n) {
    const auto* p = static_cast<const uint8_t*>(data);
    for (size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [name, tensor] : ckpt.arrays) {
    if (name.rfind(prefix, 0) != 0) continue;
    mix(name.data(), name.size());
    for (int64_t i = 0; i < tensor.dim(); ++i) {
      int64_t d = tensor.size(i);
      mix(&d, sizeof(d));
    }
    mix(tensor.data_ptr<float>(), (size_t)tensor.numel() * sizeof(float));
  }
  return h;
}

}  // namespace s2r
