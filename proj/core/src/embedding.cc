#include "morphpipe/embedding.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "morphpipe/errors.h"
#include "morphpipe/utf8.h"

namespace morphpipe {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

std::uint64_t fmix64(std::uint64_t k) {
  k ^= k >> 33;
  k *= 0xff51afd7ed558ccdULL;
  k ^= k >> 33;
  k *= 0xc4ceb9fe1a85ec53ULL;
  k ^= k >> 33;
  return k;
}

std::uint64_t fnv_bytes(std::uint64_t h, const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= kFnvPrime;
  }
  return h;
}

char shape_symbol(char32_t cp) {
  if (utf8::is_upper(cp)) return 'X';
  if (utf8::is_lower(cp)) return 'x';
  if (utf8::is_digit(cp)) return 'd';
  return 0;
}

}  // namespace

std::uint64_t feature_hash(std::uint8_t table, std::string_view feature) {
  std::uint64_t h = kFnvOffset;
  h = fnv_bytes(h, &table, 1);
  h = fnv_bytes(h, feature.data(), feature.size());
  return fmix64(h);
}

std::string shape_of(std::string_view text) {
  std::string out;
  std::u32string last;
  std::size_t run = 0;
  for (std::size_t pos = 0; pos < text.size();) {
    const utf8::CodePoint cp = utf8::decode_at(text, pos);
    const char symbol = shape_symbol(cp.value);
    std::u32string current = symbol ? std::u32string(1, symbol)
                                    : std::u32string(1, cp.value);
    run = current == last ? run + 1 : 1;
    last = current;
    if (run <= 4) {
      if (symbol) {
        out.push_back(symbol);
      } else {
        out.append(text.substr(pos, cp.length));
      }
    }
    pos += cp.length;
  }
  return out;
}

std::array<std::string, kHashTables> token_features(
    std::string_view text, const FeatureConfig& config) {
  std::string lower = utf8::to_lower(text);
  return {lower, utf8::prefix(text, config.prefix_len),
          utf8::suffix(text, config.suffix_len), shape_of(text)};
}

StaticVectors StaticVectors::parse(std::string_view text, bool case_fallback) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  auto next_line = [&]() -> std::string_view {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };
  auto parse_size = [&](std::string_view s) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
      throw ParseError("expected an integer, got '" + std::string(s) + "'",
                       line_no);
    }
    return v;
  };

  const std::string_view header = next_line();
  const std::size_t space = header.find(' ');
  if (space == std::string_view::npos) {
    throw ParseError("header must be 'count dim'", line_no);
  }
  const std::size_t count = parse_size(header.substr(0, space));
  const std::size_t dim = parse_size(header.substr(space + 1));
  StaticVectors vectors(dim, case_fallback);
  vectors.index_.reserve(count);
  vectors.data_.reserve(count * dim);
  std::vector<float> row(dim);
  while (start < text.size()) {
    std::string_view line = next_line();
    while (!line.empty() && line.back() == ' ') line.remove_suffix(1);
    if (line.empty()) continue;
    const std::size_t sep = line.find(' ');
    if (sep == std::string_view::npos || sep == 0) {
      throw ParseError("row needs a token and " + std::to_string(dim) +
                           " values",
                       line_no);
    }
    const char* p = line.data() + sep;
    const char* end = line.data() + line.size();
    for (std::size_t k = 0; k < dim; ++k) {
      while (p < end && *p == ' ') ++p;
      auto [ptr, ec] = std::from_chars(p, end, row[k]);
      if (ec != std::errc()) {
        throw ParseError("bad value in column " + std::to_string(k + 2),
                         line_no);
      }
      p = ptr;
    }
    while (p < end && *p == ' ') ++p;
    if (p != end) throw ParseError("too many values", line_no);
    vectors.add(std::string(line.substr(0, sep)), row);
  }
  if (vectors.size() != count) {
    throw ParseError("header announces " + std::to_string(count) +
                         " vectors, found " + std::to_string(vectors.size()),
                     0);
  }
  return vectors;
}

StaticVectors StaticVectors::read_file(const std::filesystem::path& path,
                                       bool case_fallback) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path.string(), "cannot open vectors file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse(buffer.str(), case_fallback);
  } catch (const ParseError& e) {
    throw LoadError(path.string(), e.what());
  }
}

void StaticVectors::add(std::string word, std::span<const float> values) {
  if (values.size() != dim_) {
    throw ContractViolation("vector width differs from the table width");
  }
  auto [it, inserted] = index_.try_emplace(std::move(word), size());
  if (inserted) {
    data_.insert(data_.end(), values.begin(), values.end());
  } else {
    std::copy(values.begin(), values.end(), data_.begin() + it->second * dim_);
  }
}

std::span<const float> StaticVectors::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return {};
  return {data_.data() + it->second * dim_, dim_};
}

void StaticVectors::lookup(std::string_view text, Eigen::Ref<Vector> out) const {
  std::span<const float> row = find(utf8::to_lower(text));
  if (row.empty() && case_fallback_) row = find(text);
  if (row.empty()) {
    out.setZero();
    return;
  }
  for (std::size_t k = 0; k < dim_; ++k) out[static_cast<Eigen::Index>(k)] = row[k];
}

std::uint64_t StaticVectors::fingerprint() const {
  std::uint64_t combined = fmix64(dim_ ^ (size() << 20));
  for (const auto& [word, row] : index_) {
    std::uint64_t h = fnv_bytes(kFnvOffset, word.data(), word.size());
    h = fnv_bytes(h, data_.data() + row * dim_, dim_ * sizeof(float));
    combined += fmix64(h);  // commutative, so map order does not matter
  }
  return combined;
}

TokenEmbedder::TokenEmbedder(const EmbedDims& dims,
                             std::shared_ptr<const StaticVectors> vectors,
                             const std::string& name_prefix)
    : dims_(dims) {
  static constexpr std::array<const char*, kHashTables> kNames = {
      "norm", "prefix", "suffix", "shape"};
  for (std::size_t t = 0; t < kHashTables; ++t) {
    tables_[t] = Param(name_prefix + kNames[t],
                       static_cast<Eigen::Index>(dims_.hash_dim),
                       static_cast<Eigen::Index>(dims_.rows(static_cast<HashTable>(t))));
  }
  set_vectors(std::move(vectors));
}

void TokenEmbedder::set_vectors(std::shared_ptr<const StaticVectors> vectors) {
  const std::size_t have = vectors ? vectors->dim() : 0;
  if (have != dims_.static_dim) {
    throw ContractViolation("static vectors have width " +
                            std::to_string(have) + ", model expects " +
                            std::to_string(dims_.static_dim));
  }
  vectors_ = std::move(vectors);
}

void TokenEmbedder::init(Rng& rng) {
  for (Param& t : tables_) t.init_uniform(rng, 0.1);
}

Matrix TokenEmbedder::forward(std::span<const std::string_view> texts,
                              Cache* cache) const {
  const auto n = static_cast<Eigen::Index>(texts.size());
  const auto sd = static_cast<Eigen::Index>(dims_.static_dim);
  const auto hd = static_cast<Eigen::Index>(dims_.hash_dim);
  Matrix out(static_cast<Eigen::Index>(output_dim()), n);
  if (cache) cache->rows.resize(kHashTables, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string_view text = texts[static_cast<std::size_t>(i)];
    if (sd > 0) vectors_->lookup(text, out.col(i).head(sd));
    const auto features = token_features(text, dims_.features);
    for (std::size_t t = 0; t < kHashTables; ++t) {
      const auto rows = static_cast<std::uint64_t>(tables_[t].value.cols());
      const auto row = static_cast<Eigen::Index>(
          feature_hash(static_cast<std::uint8_t>(t), features[t]) % rows);
      out.col(i).segment(sd + static_cast<Eigen::Index>(t) * hd, hd) =
          tables_[t].value.col(row);
      if (cache) cache->rows(static_cast<Eigen::Index>(t), i) = row;
    }
  }
  return out;
}

void TokenEmbedder::backward(const Cache& cache, const Matrix& dout) {
  const auto sd = static_cast<Eigen::Index>(dims_.static_dim);
  const auto hd = static_cast<Eigen::Index>(dims_.hash_dim);
  for (Eigen::Index i = 0; i < dout.cols(); ++i) {
    for (std::size_t t = 0; t < kHashTables; ++t) {
      tables_[t].grad.col(cache.rows(static_cast<Eigen::Index>(t), i)) +=
          dout.col(i).segment(sd + static_cast<Eigen::Index>(t) * hd, hd);
    }
  }
}

ParamList TokenEmbedder::params() {
  ParamList out;
  for (Param& t : tables_) out.push_back(&t);
  return out;
}

}  // namespace morphpipe
