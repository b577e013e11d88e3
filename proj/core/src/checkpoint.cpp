#include "trimodal/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "trimodal/errors.hpp"

namespace trimodal {

namespace {

constexpr char kMagic[4] = {'T', 'M', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("truncated checkpoint");
  return v;
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("truncated checkpoint");
  return v;
}

std::string read_string(std::istream& in) {
  const std::uint32_t size = read_u32(in);
  std::string s(size, '\0');
  in.read(s.data(), size);
  if (!in) throw IoError("truncated checkpoint");
  return s;
}

}  // namespace

const CheckpointBlock* Checkpoint::find(const std::string& name) const {
  for (const CheckpointBlock& block : params) {
    if (block.name == name) return &block;
  }
  return nullptr;
}

void save_checkpoint(const std::filesystem::path& path, const std::string& kind,
                     const std::map<std::string, std::string>& config,
                     const std::vector<Parameter*>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof kMagic);
  write_u32(out, kVersion);
  write_string(out, kind);
  write_u32(out, static_cast<std::uint32_t>(config.size()));
  for (const auto& [key, value] : config) {
    write_string(out, key);
    write_string(out, value);
  }
  write_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* param : params) {
    write_string(out, param->name);
    const auto& shape = param->tensor.shape();
    write_u32(out, static_cast<std::uint32_t>(shape.size()));
    for (std::size_t d : shape) write_u64(out, d);
    out.put(param->frozen ? 1 : 0);
    const auto values = param->tensor.values();
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  char magic[4];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw UnsupportedFormatError(path.string() + " is not a checkpoint file");
  }
  const std::uint32_t version = read_u32(in);
  if (version != kVersion) {
    throw UnsupportedFormatError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint checkpoint;
  checkpoint.kind = read_string(in);
  const std::uint32_t config_count = read_u32(in);
  for (std::uint32_t i = 0; i < config_count; ++i) {
    std::string key = read_string(in);
    checkpoint.config[key] = read_string(in);
  }
  const std::uint32_t param_count = read_u32(in);
  checkpoint.params.reserve(param_count);
  for (std::uint32_t i = 0; i < param_count; ++i) {
    CheckpointBlock block;
    block.name = read_string(in);
    const std::uint32_t ndim = read_u32(in);
    std::size_t total = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      block.shape.push_back(static_cast<std::size_t>(read_u64(in)));
      total *= block.shape.back();
    }
    const int frozen = in.get();
    if (frozen < 0) throw IoError("truncated checkpoint");
    block.frozen = frozen != 0;
    block.values.resize(total);
    in.read(reinterpret_cast<char*>(block.values.data()),
            static_cast<std::streamsize>(total * sizeof(double)));
    if (!in) throw IoError("truncated checkpoint");
    checkpoint.params.push_back(std::move(block));
  }
  return checkpoint;
}

void load_parameters(const Checkpoint& checkpoint, const std::vector<Parameter*>& params) {
  for (Parameter* param : params) {
    const CheckpointBlock* block = checkpoint.find(param->name);
    if (block == nullptr) {
      throw ValidationError("checkpoint has no parameter named " + param->name);
    }
    if (block->shape != param->tensor.shape()) {
      throw DimensionError("checkpoint parameter " + param->name + " has mismatched shape");
    }
    auto values = param->tensor.values();
    std::copy(block->values.begin(), block->values.end(), values.begin());
  }
}

}  // namespace trimodal
