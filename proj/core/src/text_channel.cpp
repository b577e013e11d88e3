#include "trimodal/text_channel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "trimodal/errors.hpp"
#include "trimodal/ops.hpp"

namespace trimodal {

namespace {

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Parameter clone_parameter(const Parameter& p) {
  return Parameter(p.name, p.tensor.detach(), p.frozen);
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

std::size_t TextChannelConfig::max_width() const {
  std::size_t m = 0;
  for (std::size_t w : window_widths) m = std::max(m, w);
  return m;
}

void TextChannelConfig::validate() const {
  if (window_widths.empty()) throw ParameterError("text config: needs at least one window width");
  std::set<std::size_t> seen;
  for (std::size_t w : window_widths) {
    if (w == 0) throw ParameterError("text config: window widths must be positive");
    if (!seen.insert(w).second) throw ParameterError("text config: window widths must be distinct");
  }
  if (filters_per_width == 0 || penultimate_dim == 0) {
    throw ParameterError("text config: sizes must be positive");
  }
  if (dropout_p < 0.0 || dropout_p >= 1.0) {
    throw ParameterError("text config: dropout_p must lie in [0, 1)");
  }
}

Transcript normalize_text(const std::string& raw) {
  Transcript transcript;
  std::vector<std::string> sentence;
  std::string token;

  auto flush_token = [&] {
    if (!token.empty()) {
      sentence.push_back(std::move(token));
      token.clear();
    }
  };
  auto flush_sentence = [&] {
    flush_token();
    if (!sentence.empty()) {
      transcript.sentences.push_back(std::move(sentence));
      sentence.clear();
    }
  };

  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (c == '.' || c == '!' || c == '?') {
      flush_sentence();
    } else if (is_word_char(c)) {
      token.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (c == '\'' && i > 0 && i + 1 < raw.size() && is_word_char(raw[i - 1]) &&
               is_word_char(raw[i + 1])) {
      token.push_back(c);  // intra-word apostrophe ("don't")
    } else {
      flush_token();
    }
  }
  flush_sentence();

  if (transcript.sentences.empty()) {
    throw ValidationError("empty transcript: input has no words");
  }
  return transcript;
}

Tensor embed_sentence(const std::vector<std::string>& tokens, const EmbeddingTable& table) {
  if (tokens.empty()) throw ParameterError("embed_sentence: needs at least one token");
  const std::size_t dim = table.dim();
  std::vector<double> values(tokens.size() * dim);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const std::vector<double> vec = table.lookup(tokens[t]);
    std::copy(vec.begin(), vec.end(), values.begin() + t * dim);
  }
  return Tensor({tokens.size(), dim}, std::move(values));
}

TextChannel::TextChannel(TextChannelConfig config, std::shared_ptr<const EmbeddingTable> table,
                         std::uint64_t init_seed)
    : config_(std::move(config)), table_(std::move(table)) {
  config_.validate();
  if (!table_) throw ParameterError("text channel: embedding table required");
  Rng rng(init_seed);
  const std::size_t dim = table_->dim();
  const std::size_t f = config_.filters_per_width;
  for (std::size_t w : config_.window_widths) {
    const double limit = glorot_limit(dim * w, f * w);
    const std::string base = "text.conv_w" + std::to_string(w);
    windows_.push_back(ConvWindow{
        w,
        Parameter(base + ".kernels", Tensor::uniform({f, dim, w}, -limit, limit, rng)),
        Parameter(base + ".bias", Tensor({f})),
    });
  }
  {
    const double limit = glorot_limit(config_.pooled_dim(), config_.penultimate_dim);
    fc_weights_ = Parameter(
        "text.fc.weights",
        Tensor::uniform({config_.penultimate_dim, config_.pooled_dim()}, -limit, limit, rng));
    fc_bias_ = Parameter("text.fc.bias", Tensor({config_.penultimate_dim}));
  }
  {
    const double limit = glorot_limit(config_.penultimate_dim, kTraitCount);
    head_weights_ = Parameter(
        "text.head.weights",
        Tensor::uniform({kTraitCount, config_.penultimate_dim}, -limit, limit, rng));
    head_bias_ = Parameter("text.head.bias", Tensor({kTraitCount}));
  }
}

// columns holds the sentence as [dim x n_words] row-major.
Tensor TextChannel::encode_matrix(const std::vector<double>& columns, std::size_t n_words) {
  Tensor input({table_->dim(), n_words}, columns);
  std::vector<Tensor> pools;
  pools.reserve(windows_.size());
  for (ConvWindow& window : windows_) {
    Tensor conv = relu(conv1d(input, window.kernels.tensor, window.bias.tensor, 1));
    pools.push_back(max_over_time(conv));
  }
  return concat(pools);
}

Tensor TextChannel::sentence_forward(const Tensor& matrix) {
  if (!matrix.defined() || matrix.rank() != 2) {
    throw DimensionError("sentence_forward: matrix must be [n x dim]");
  }
  const std::size_t n = matrix.dim(0);
  const std::size_t dim = matrix.dim(1);
  if (dim != table_->dim()) {
    throw DimensionError("sentence_forward: matrix dim does not match embedding table");
  }
  const std::size_t padded = std::max(n, config_.max_width());
  std::vector<double> columns(dim * padded, 0.0);
  const auto values = matrix.values();
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t d = 0; d < dim; ++d) {
      columns[d * padded + t] = values[t * dim + d];
    }
  }
  return encode_matrix(columns, padded);
}

ChannelOutput TextChannel::forward_channel(const Transcript& transcript, bool training, Rng& rng) {
  if (transcript.sentences.empty()) {
    throw ValidationError("empty transcript: nothing to encode");
  }
  const std::size_t dim = table_->dim();
  std::vector<Tensor> encodings;
  encodings.reserve(transcript.sentences.size());
  for (const std::vector<std::string>& tokens : transcript.sentences) {
    if (tokens.empty()) throw ValidationError("empty sentence in transcript");
    const std::size_t padded = std::max(tokens.size(), config_.max_width());
    std::vector<double> columns(dim * padded, 0.0);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      const std::vector<double> vec = table_->lookup(tokens[t]);
      for (std::size_t d = 0; d < dim; ++d) columns[d * padded + t] = vec[d];
    }
    encodings.push_back(encode_matrix(columns, padded));
  }
  Tensor clip_encoding = average(encodings);
  Tensor dropped = dropout(clip_encoding, config_.dropout_p, training, rng);
  Tensor penultimate = relu(fully_connected(dropped, fc_weights_.tensor, fc_bias_.tensor));
  Tensor traits = sigmoid(fully_connected(penultimate, head_weights_.tensor, head_bias_.tensor));
  return {penultimate, traits};
}

Tensor TextChannel::forward(const ClipData& clip, bool training, Rng& rng) {
  return forward_channel(clip.transcript, training, rng).traits;
}

std::vector<Parameter*> TextChannel::parameters() {
  std::vector<Parameter*> out;
  for (ConvWindow& window : windows_) {
    out.push_back(&window.kernels);
    out.push_back(&window.bias);
  }
  out.push_back(&fc_weights_);
  out.push_back(&fc_bias_);
  out.push_back(&head_weights_);
  out.push_back(&head_bias_);
  return out;
}

TextChannel TextChannel::clone() const {
  TextChannel copy(config_, table_, 0);
  copy.windows_.clear();
  for (const ConvWindow& window : windows_) {
    copy.windows_.push_back(ConvWindow{window.width, clone_parameter(window.kernels),
                                       clone_parameter(window.bias)});
  }
  copy.fc_weights_ = clone_parameter(fc_weights_);
  copy.fc_bias_ = clone_parameter(fc_bias_);
  copy.head_weights_ = clone_parameter(head_weights_);
  copy.head_bias_ = clone_parameter(head_bias_);
  return copy;
}

void TextChannel::freeze_all() {
  for (Parameter* p : parameters()) p->set_frozen(true);
}

std::map<std::string, std::string> TextChannel::config_map() const {
  std::string widths;
  for (std::size_t w : config_.window_widths) {
    if (!widths.empty()) widths += ",";
    widths += std::to_string(w);
  }
  return {
      {"text.window_widths", widths},
      {"text.filters_per_width", std::to_string(config_.filters_per_width)},
      {"text.dropout_p", std::to_string(config_.dropout_p)},
      {"text.penultimate_dim", std::to_string(config_.penultimate_dim)},
      {"text.embed_dim", std::to_string(table_->dim())},
  };
}

TextChannelConfig TextChannel::config_from_map(const std::map<std::string, std::string>& map,
                                               const std::string& prefix) {
  TextChannelConfig config;
  auto find = [&](const std::string& key) -> const std::string& {
    auto it = map.find(prefix + key);
    if (it == map.end()) throw ValidationError("checkpoint missing config key " + prefix + key);
    return it->second;
  };
  config.window_widths.clear();
  std::string widths = find("window_widths");
  std::size_t pos = 0;
  while (pos < widths.size()) {
    std::size_t comma = widths.find(',', pos);
    if (comma == std::string::npos) comma = widths.size();
    config.window_widths.push_back(std::stoull(widths.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  config.filters_per_width = std::stoull(find("filters_per_width"));
  config.dropout_p = std::stod(find("dropout_p"));
  config.penultimate_dim = std::stoull(find("penultimate_dim"));
  return config;
}

}  // namespace trimodal
