#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "trimodal/clip.hpp"
#include "trimodal/embeddings.hpp"
#include "trimodal/model.hpp"

namespace trimodal {

struct TextChannelConfig {
  std::vector<std::size_t> window_widths = {3, 4, 5};
  std::size_t filters_per_width = 128;
  double dropout_p = 0.5;
  std::size_t penultimate_dim = 64;

  std::size_t pooled_dim() const { return window_widths.size() * filters_per_width; }
  std::size_t max_width() const;
  void validate() const;
};

// Sentence split on . ! ?, lowercased, non-alphanumerics stripped except
// intra-word apostrophes, whitespace collapsed; empty sentences dropped.
Transcript normalize_text(const std::string& raw);

// Row t holds the embedding of token t (or the OOV vector).  [n x dim]
Tensor embed_sentence(const std::vector<std::string>& tokens, const EmbeddingTable& table);

// Word-window CNN over sentence embeddings: parallel conv windows (widths
// 3/4/5 by default) with ReLU and max-over-time pooling, sentence encodings
// averaged per clip, dropout, then FC -> penultimate and FC -> sigmoid traits.
class TextChannel final : public TraitModel {
 public:
  TextChannel(TextChannelConfig config, std::shared_ptr<const EmbeddingTable> table,
              std::uint64_t init_seed);

  ChannelOutput forward_channel(const Transcript& transcript, bool training, Rng& rng);
  // Encoding of one sentence given its [n x dim] embedding matrix (treated as
  // constant data; embeddings are frozen).
  Tensor sentence_forward(const Tensor& matrix);

  std::string kind() const override { return "text"; }
  Tensor forward(const ClipData& clip, bool training, Rng& rng) override;
  std::vector<Parameter*> parameters() override;
  std::map<std::string, std::string> config_map() const override;

  const TextChannelConfig& config() const { return config_; }
  const EmbeddingTable& table() const { return *table_; }

  TextChannel clone() const;
  void freeze_all();

  static TextChannelConfig config_from_map(const std::map<std::string, std::string>& map,
                                           const std::string& prefix);

 private:
  Tensor encode_matrix(const std::vector<double>& columns, std::size_t n_words);

  TextChannelConfig config_;
  std::shared_ptr<const EmbeddingTable> table_;
  struct ConvWindow {
    std::size_t width;
    Parameter kernels;
    Parameter bias;
  };
  std::vector<ConvWindow> windows_;
  Parameter fc_weights_, fc_bias_;
  Parameter head_weights_, head_bias_;
};

}  // namespace trimodal
