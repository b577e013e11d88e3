#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace trimodal {

// Read-only word-embedding table. Embeddings are never fine-tuned; unknown
// tokens map to a shared all-zero out-of-vocabulary vector. The hashed
// variant derives every vector deterministically from the token itself so
// test and synthetic runs need no embedding file.
class EmbeddingTable {
 public:
  // Text format: header "<vocab_size> <dim>", then one line per token with
  // dim space-separated floats. Duplicate tokens: last one wins (warning on
  // stderr).
  static EmbeddingTable load(const std::filesystem::path& path);

  static EmbeddingTable hashed(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  bool hashed_mode() const { return hashed_; }
  bool contains(const std::string& token) const;

  std::vector<double> lookup(const std::string& token) const;
  const std::vector<double>& oov_vector() const { return oov_; }

 private:
  std::size_t dim_ = 0;
  bool hashed_ = false;
  std::unordered_map<std::string, std::vector<double>> vocab_;
  std::vector<double> oov_;
};

}  // namespace trimodal
