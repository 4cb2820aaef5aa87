#include "lanegcn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>

namespace lanegcn {

namespace {

constexpr char kMagic[8] = {'L', 'G', 'C', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw CheckpointError("truncated checkpoint: " + path);
  return value;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParameterStore& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint64_t>(params.count()));
  for (const auto& [name, tensor] : params.entries()) {
    write_pod(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod(out, static_cast<std::uint32_t>(tensor.shape().size()));
    for (long d : tensor.shape()) {
      write_pod(out, static_cast<std::int64_t>(d));
    }
    out.write(reinterpret_cast<const char*>(tensor.data()),
              static_cast<std::streamsize>(tensor.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path);
}

void load_checkpoint(const std::string& path, ParameterStore& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("not a checkpoint file: " + path);
  }
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version));
  }
  const auto count = read_pod<std::uint64_t>(in, path);
  if (count != params.count()) {
    throw CheckpointError("checkpoint holds " + std::to_string(count) +
                          " parameters, model expects " +
                          std::to_string(params.count()));
  }
  std::set<std::string> seen;
  for (std::uint64_t e = 0; e < count; ++e) {
    const auto name_len = read_pod<std::uint32_t>(in, path);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw CheckpointError("truncated checkpoint: " + path);
    if (!seen.insert(name).second) {
      throw CheckpointError("duplicate parameter '" + name + "' in " + path);
    }
    if (!params.has(name)) {
      throw CheckpointError("checkpoint parameter '" + name +
                            "' unknown to the model");
    }
    Tensor& target = params.get(name);
    const auto rank = read_pod<std::uint32_t>(in, path);
    Shape shape(rank);
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape[d] = static_cast<long>(read_pod<std::int64_t>(in, path));
    }
    if (shape != target.shape()) {
      throw CheckpointError("parameter '" + name + "' has shape " +
                            shape_str(shape) + " in checkpoint, expected " +
                            shape_str(target.shape()));
    }
    in.read(reinterpret_cast<char*>(target.mutable_data()),
            static_cast<std::streamsize>(target.size() * sizeof(double)));
    if (!in) throw CheckpointError("truncated checkpoint: " + path);
  }
}

}  // namespace lanegcn
