#include "morphpipe/tok2vec.h"

namespace morphpipe {

Tok2Vec::Tok2Vec(const ModelDims& dims,
                 std::shared_ptr<const StaticVectors> vectors,
                 const std::string& name_prefix)
    : embedder_(dims.embed, std::move(vectors), name_prefix + "embed."),
      encoder_(dims.encoder(), name_prefix + "encode.") {}

void Tok2Vec::init(Rng& rng) {
  embedder_.init(rng);
  encoder_.init(rng);
}

Matrix Tok2Vec::forward(std::span<const std::string_view> texts, Cache* cache,
                        Rng* rng, double dropout) const {
  const Matrix embedded = embedder_.forward(texts, cache ? &cache->embed : nullptr);
  return encoder_.forward(embedded, cache ? &cache->encode : nullptr, rng,
                          dropout);
}

void Tok2Vec::backward(const Cache& cache, const Matrix& dout) {
  embedder_.backward(cache.embed, encoder_.backward(cache.encode, dout));
}

ParamList Tok2Vec::params() {
  ParamList out = embedder_.params();
  for (Param* p : encoder_.params()) out.push_back(p);
  return out;
}

std::vector<std::string_view> token_texts(const AnnotatedDoc& doc,
                                          std::size_t begin, std::size_t end) {
  std::vector<std::string_view> out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) out.push_back(doc.tokens[i].text);
  return out;
}

std::vector<std::string_view> token_texts(const AnnotatedDoc& doc) {
  return token_texts(doc, 0, doc.tokens.size());
}

}  // namespace morphpipe
