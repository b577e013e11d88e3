#include "trimodal/embeddings.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "trimodal/errors.hpp"
#include "trimodal/rng.hpp"

namespace trimodal {

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ParseError("embedding file is empty", 1);
  std::istringstream header(line);
  std::size_t declared = 0, dim = 0;
  if (!(header >> declared >> dim) || dim == 0) {
    throw ParseError("embedding header must be '<vocab_size> <dim>'", 1);
  }

  EmbeddingTable table;
  table.dim_ = dim;
  table.oov_.assign(dim, 0.0);
  table.vocab_.reserve(declared);
  for (std::size_t i = 0; i < declared; ++i) {
    const std::size_t line_no = i + 2;
    if (!std::getline(in, line)) {
      throw ParseError("embedding file ends early: expected " + std::to_string(declared) +
                           " entries",
                       line_no);
    }
    std::istringstream row(line);
    std::string token;
    if (!(row >> token)) throw ParseError("missing token", line_no);
    std::vector<double> vec(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      if (!(row >> vec[d])) {
        throw ParseError("token '" + token + "' has fewer than " + std::to_string(dim) +
                             " values",
                         line_no);
      }
    }
    double extra;
    if (row >> extra) {
      throw ParseError("token '" + token + "' has more than " + std::to_string(dim) + " values",
                       line_no);
    }
    if (table.vocab_.count(token)) {
      std::cerr << "warning: duplicate embedding for '" << token << "', keeping the last one\n";
    }
    table.vocab_[token] = std::move(vec);
  }
  return table;
}

EmbeddingTable EmbeddingTable::hashed(std::size_t dim) {
  if (dim == 0) throw ParameterError("hashed embeddings: dim must be positive");
  EmbeddingTable table;
  table.dim_ = dim;
  table.hashed_ = true;
  table.oov_.assign(dim, 0.0);
  return table;
}

bool EmbeddingTable::contains(const std::string& token) const {
  return hashed_ || vocab_.count(token) > 0;
}

std::vector<double> EmbeddingTable::lookup(const std::string& token) const {
  if (hashed_) {
    Rng rng(fnv1a64(token));
    std::vector<double> vec(dim_);
    for (double& v : vec) v = rng.uniform(-0.5, 0.5);
    return vec;
  }
  auto it = vocab_.find(token);
  if (it == vocab_.end()) return oov_;
  return it->second;
}

}  // namespace trimodal
