#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "supbench/models/config.hpp"
#include "supbench/nn/layers.hpp"
#include "supbench/nn/tensor.hpp"

namespace supbench::models {

struct ArtifactHeader {
  Method method = Method::Classifier;
  nn::BackboneArch architecture = nn::BackboneArch::Reduced;
  TrainConfig config;
  std::string git_describe;  // build stamp of the writer
};

// Binary model artifact: header, named scalars, named tensors.
void write_artifact(const std::filesystem::path& path,
                    const ArtifactHeader& header,
                    const std::vector<nn::ParamRef>& state,
                    const std::map<std::string, double>& scalars);

struct LoadedArtifact {
  ArtifactHeader header;
  std::map<std::string, nn::Tensor> tensors;
  std::map<std::string, double> scalars;
};

LoadedArtifact read_artifact(const std::filesystem::path& path);

// Copies artifact tensors into live state refs; a missing, extra, or
// shape-mismatched tensor is a hard error.
void load_state(const LoadedArtifact& artifact,
                const std::vector<nn::ParamRef>& state);

}  // namespace supbench::models
