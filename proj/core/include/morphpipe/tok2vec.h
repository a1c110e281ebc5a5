#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphpipe/doc.h"
#include "morphpipe/embedding.h"
#include "morphpipe/encoder.h"

namespace morphpipe {

struct ModelDims {
  EmbedDims embed;
  std::size_t width = 128;
  std::size_t pieces = 3;
  std::size_t depth = 4;
  std::size_t parser_hidden = 128;
  std::size_t parser_pieces = 2;
  std::size_t ner_tag_dim = 16;

  EncoderDims encoder() const {
    return {embed.output_dim(), width, pieces, depth};
  }
};

// Embed + encode: token texts in, one width-sized column per token out.
class Tok2Vec {
 public:
  struct Cache {
    TokenEmbedder::Cache embed;
    ConvEncoder::Cache encode;
  };

  Tok2Vec(const ModelDims& dims, std::shared_ptr<const StaticVectors> vectors,
          const std::string& name_prefix);

  void init(Rng& rng);

  Matrix forward(std::span<const std::string_view> texts, Cache* cache,
                 Rng* rng = nullptr, double dropout = 0.0) const;
  void backward(const Cache& cache, const Matrix& dout);

  TokenEmbedder& embedder() { return embedder_; }
  const TokenEmbedder& embedder() const { return embedder_; }
  ConvEncoder& encoder() { return encoder_; }
  const ConvEncoder& encoder() const { return encoder_; }
  ParamList params();

 private:
  TokenEmbedder embedder_;
  ConvEncoder encoder_;
};

// Views of the token texts of doc.tokens[begin, end).
std::vector<std::string_view> token_texts(const AnnotatedDoc& doc,
                                          std::size_t begin, std::size_t end);
std::vector<std::string_view> token_texts(const AnnotatedDoc& doc);

}  // namespace morphpipe
