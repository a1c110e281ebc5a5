#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "morphpipe/nn.h"

namespace morphpipe {

// Identifies the feature hash below; stored in model manifests so that a
// bundle built with a different hash refuses to load.
inline constexpr std::string_view kHashId = "fnv1a64-fmix64";

// 64-bit FNV-1a over (table tag byte, feature bytes), finalized with the
// murmur3 fmix64 mixer.
std::uint64_t feature_hash(std::uint8_t table, std::string_view feature);

// Uppercase -> 'X', lowercase -> 'x', digit -> 'd', anything else verbatim;
// runs of one output symbol are cut at four.
std::string shape_of(std::string_view text);

struct FeatureConfig {
  std::size_t prefix_len = 1;
  std::size_t suffix_len = 3;
};

enum class HashTable : std::uint8_t { kNorm = 0, kPrefix = 1, kSuffix = 2, kShape = 3 };
inline constexpr std::size_t kHashTables = 4;

// Feature strings in table order: lowercase form, prefix, suffix, shape.
std::array<std::string, kHashTables> token_features(std::string_view text,
                                                    const FeatureConfig& config);

// Pretrained word vectors read from the textual "count dim" format.
class StaticVectors {
 public:
  explicit StaticVectors(std::size_t dim = 300, bool case_fallback = true)
      : dim_(dim), case_fallback_(case_fallback) {}

  // Throws ParseError on a malformed header or row.
  static StaticVectors parse(std::string_view text, bool case_fallback = true);
  static StaticVectors read_file(const std::filesystem::path& path,
                                 bool case_fallback = true);

  // Replaces an existing entry.
  void add(std::string word, std::span<const float> values);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }
  bool case_fallback() const { return case_fallback_; }

  // Exact entry, or an empty span.
  std::span<const float> find(std::string_view word) const;

  // Vector of the lowercased text (falling back to the text as written when
  // case_fallback is set); zeros for unknown words.
  void lookup(std::string_view text, Eigen::Ref<Vector> out) const;

  // Order-independent digest of the table contents.
  std::uint64_t fingerprint() const;

 private:
  std::size_t dim_;
  bool case_fallback_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> data_;
};

struct EmbedDims {
  std::size_t static_dim = 300;
  std::size_t hash_dim = 64;
  std::size_t norm_rows = 4096;
  std::size_t affix_rows = 1024;
  FeatureConfig features;

  std::size_t output_dim() const { return static_dim + kHashTables * hash_dim; }
  std::size_t rows(HashTable table) const {
    return table == HashTable::kNorm ? norm_rows : affix_rows;
  }
};

// Static vectors concatenated with four hashed, learned feature tables.
// Each table is stored as a (hash_dim x rows) parameter, one column per row.
class TokenEmbedder {
 public:
  struct Cache {
    Eigen::Matrix<Eigen::Index, Eigen::Dynamic, Eigen::Dynamic> rows;  // 4 x n
  };

  TokenEmbedder(const EmbedDims& dims,
                std::shared_ptr<const StaticVectors> vectors,
                const std::string& name_prefix);

  void init(Rng& rng);

  // Embeds each text as one column of a (output_dim x n) matrix.
  Matrix forward(std::span<const std::string_view> texts, Cache* cache) const;
  // Scatters the gradient into the rows used by the cached forward pass.
  void backward(const Cache& cache, const Matrix& dout);

  const EmbedDims& dims() const { return dims_; }
  std::size_t output_dim() const { return dims_.output_dim(); }
  const StaticVectors* vectors() const { return vectors_.get(); }
  void set_vectors(std::shared_ptr<const StaticVectors> vectors);

  Param& table(HashTable t) { return tables_[static_cast<std::size_t>(t)]; }
  const Param& table(HashTable t) const {
    return tables_[static_cast<std::size_t>(t)];
  }
  ParamList params();

 private:
  EmbedDims dims_;
  std::shared_ptr<const StaticVectors> vectors_;
  std::array<Param, kHashTables> tables_;
};

}  // namespace morphpipe
