#pragma once

#include <filesystem>
#include <memory>

#include "trimodal/checkpoint.hpp"
#include "trimodal/embeddings.hpp"
#include "trimodal/model.hpp"

namespace trimodal {

void save_model(const std::filesystem::path& path, TraitModel& model);

// Rebuilds a model from its checkpoint (kind + config + parameters). Models
// containing a text channel need the embedding table; the table's dimension
// must match the checkpoint's text.embed_dim.
std::unique_ptr<TraitModel> load_model(const std::filesystem::path& path,
                                       std::shared_ptr<const EmbeddingTable> table = nullptr);

}  // namespace trimodal
