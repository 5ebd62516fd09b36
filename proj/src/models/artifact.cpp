#include "supbench/models/artifact.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "supbench/core/errors.hpp"

namespace supbench::models {

namespace {

constexpr char kMagic[4] = {'S', 'B', 'M', 'A'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_i32(std::ostream& os, std::int32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_u8(std::ostream& os, std::uint8_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_str(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::int32_t get_i32(std::istream& is) {
  std::int32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
double get_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::uint8_t get_u8(std::istream& is) {
  std::uint8_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::string get_str(std::istream& is) {
  const std::uint32_t n = get_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}

}  // namespace

void write_artifact(const std::filesystem::path& path,
                    const ArtifactHeader& header,
                    const std::vector<nn::ParamRef>& state,
                    const std::map<std::string, double>& scalars) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw ExecutionError("cannot open model artifact for writing: " +
                         path.string());
  }
  os.write(kMagic, sizeof kMagic);
  put_u32(os, kVersion);
  put_u8(os, static_cast<std::uint8_t>(header.method));
  put_u8(os, static_cast<std::uint8_t>(header.architecture));
  put_str(os, header.git_describe);

  const TrainConfig& c = header.config;
  put_i32(os, c.epochs);
  put_i32(os, c.batch_size);
  put_u8(os, static_cast<std::uint8_t>(c.optimizer));
  put_f64(os, c.learning_rate);
  put_f64(os, c.positive_class_weight);
  put_f64(os, c.reconstruction_weight);
  put_i32(os, c.latent_dims);
  put_f64(os, c.data_fraction);
  put_u64(os, c.rng_seed);

  put_u32(os, static_cast<std::uint32_t>(scalars.size()));
  for (const auto& [name, value] : scalars) {
    put_str(os, name);
    put_f64(os, value);
  }

  put_u32(os, static_cast<std::uint32_t>(state.size()));
  for (const auto& ref : state) {
    put_str(os, ref.name);
    const nn::Tensor& t = *ref.value;
    put_u32(os, static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) put_i32(os, d);
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  }
  if (!os) {
    throw ExecutionError("failed while writing model artifact: " +
                         path.string());
  }
}

LoadedArtifact read_artifact(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw ExecutionError("cannot open model artifact: " + path.string());
  }
  char magic[4] = {};
  is.read(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ExecutionError("not a model artifact (bad magic): " + path.string());
  }
  const std::uint32_t version = get_u32(is);
  if (version != kVersion) {
    throw ExecutionError("unsupported model artifact version " +
                         std::to_string(version) + ": " + path.string());
  }

  LoadedArtifact art;
  art.header.method = static_cast<Method>(get_u8(is));
  art.header.architecture = static_cast<nn::BackboneArch>(get_u8(is));
  art.header.git_describe = get_str(is);

  TrainConfig& c = art.header.config;
  c.epochs = get_i32(is);
  c.batch_size = get_i32(is);
  c.optimizer = static_cast<nn::OptimizerKind>(get_u8(is));
  c.learning_rate = get_f64(is);
  c.positive_class_weight = get_f64(is);
  c.reconstruction_weight = get_f64(is);
  c.latent_dims = get_i32(is);
  c.data_fraction = get_f64(is);
  c.rng_seed = get_u64(is);

  const std::uint32_t n_scalars = get_u32(is);
  for (std::uint32_t i = 0; i < n_scalars; ++i) {
    const std::string name = get_str(is);
    art.scalars[name] = get_f64(is);
  }

  const std::uint32_t n_tensors = get_u32(is);
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    const std::string name = get_str(is);
    const std::uint32_t rank = get_u32(is);
    std::vector<int> shape(rank);
    for (auto& d : shape) d = get_i32(is);
    nn::Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    art.tensors.emplace(name, std::move(t));
  }
  if (!is) {
    throw ExecutionError("truncated model artifact: " + path.string());
  }
  return art;
}

void load_state(const LoadedArtifact& artifact,
                const std::vector<nn::ParamRef>& state) {
  std::size_t consumed = 0;
  for (const auto& ref : state) {
    const auto it = artifact.tensors.find(ref.name);
    if (it == artifact.tensors.end()) {
      throw ExecutionError("model artifact is missing tensor '" + ref.name +
                           "'");
    }
    if (it->second.shape != ref.value->shape) {
      throw ExecutionError("model artifact tensor '" + ref.name +
                           "' has shape " + it->second.shape_str() +
                           " but the model expects " +
                           ref.value->shape_str());
    }
    ref.value->data = it->second.data;
    ++consumed;
  }
  if (consumed != artifact.tensors.size()) {
    throw ExecutionError(
        "model artifact carries " + std::to_string(artifact.tensors.size()) +
        " tensors but the model consumes " + std::to_string(consumed));
  }
}

}  // namespace supbench::models
