#include "trimodal/model_io.hpp"

#include "trimodal/errors.hpp"
#include "trimodal/fusion.hpp"

namespace trimodal {

namespace {

std::shared_ptr<const EmbeddingTable> require_table(
    const std::shared_ptr<const EmbeddingTable>& table, const Checkpoint& checkpoint) {
  auto it = checkpoint.config.find("text.embed_dim");
  if (it == checkpoint.config.end()) {
    throw ValidationError("checkpoint missing config key text.embed_dim");
  }
  const std::size_t dim = std::stoull(it->second);
  if (!table) {
    throw ParameterError("loading this model needs an embedding table (dim " +
                         std::to_string(dim) + ")");
  }
  if (table->dim() != dim) {
    throw ParameterError("embedding table dim " + std::to_string(table->dim()) +
                         " does not match checkpoint text.embed_dim " + std::to_string(dim));
  }
  return table;
}

}  // namespace

void save_model(const std::filesystem::path& path, TraitModel& model) {
  save_checkpoint(path, model.kind(), model.config_map(), model.parameters());
}

std::unique_ptr<TraitModel> load_model(const std::filesystem::path& path,
                                       std::shared_ptr<const EmbeddingTable> table) {
  const Checkpoint checkpoint = load_checkpoint(path);
  if (checkpoint.kind == "audio") {
    auto model = std::make_unique<AudioChannel>(
        AudioChannel::config_from_map(checkpoint.config, "audio."), 0);
    load_parameters(checkpoint, model->parameters());
    return model;
  }
  if (checkpoint.kind == "text") {
    auto model = std::make_unique<TextChannel>(
        TextChannel::config_from_map(checkpoint.config, "text."),
        require_table(table, checkpoint), 0);
    load_parameters(checkpoint, model->parameters());
    return model;
  }
  if (checkpoint.kind == "video") {
    auto model = std::make_unique<VideoChannel>(
        VideoChannel::config_from_map(checkpoint.config, "video."), 0);
    load_parameters(checkpoint, model->parameters());
    return model;
  }
  if (checkpoint.kind == "nnlb" || checkpoint.kind == "nnfb") {
    AudioChannel audio(AudioChannel::config_from_map(checkpoint.config, "audio."), 0);
    TextChannel text(TextChannel::config_from_map(checkpoint.config, "text."),
                     require_table(table, checkpoint), 0);
    VideoChannel video(VideoChannel::config_from_map(checkpoint.config, "video."), 0);
    auto it = checkpoint.config.find("fused.hidden_dim");
    if (it == checkpoint.config.end()) {
      throw ValidationError("checkpoint missing config key fused.hidden_dim");
    }
    const FusionMode mode = checkpoint.kind == "nnlb" ? FusionMode::kLimitedBackprop
                                                      : FusionMode::kFullBackprop;
    auto model = std::make_unique<FusedNetwork>(audio, text, video, mode,
                                                std::stoull(it->second), 0);
    load_parameters(checkpoint, model->parameters());
    return model;
  }
  throw UnsupportedFormatError("unknown model kind '" + checkpoint.kind + "' in " +
                               path.string());
}

}  // namespace trimodal
