#include "morphpipe/bundle.h"

#include <bit>
#include <charconv>
#include <cstring>
#include <set>
#include <fstream>
#include <sstream>

#include "morphpipe/embedding.h"
#include "morphpipe/errors.h"

namespace morphpipe {

namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little,
              "blob I/O assumes a little-endian host");

void write_file(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path.string(), "cannot open");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::string join_lines(const std::vector<std::string>& labels) {
  std::string out;
  for (const std::string& l : labels) out += l + '\n';
  return out;
}

LabelSet read_labels(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<std::string> labels;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    labels.push_back(text.substr(pos, end - pos));
    pos = end + 1;
  }
  LabelSet set(labels);
  if (set.size() != labels.size()) {
    throw LoadError(path.string(), "labels are not sorted and unique");
  }
  return set;
}

const std::string& require(const std::map<std::string, std::string>& m,
                           const std::string& key, const std::string& file) {
  const auto it = m.find(key);
  if (it == m.end()) throw LoadError(file, "missing key '" + key + "'");
  return it->second;
}

template <typename T>
T number(const std::map<std::string, std::string>& m, const std::string& key,
         const std::string& file) {
  const std::string& v = require(m, key, file);
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw LoadError(file, "bad value for '" + key + "'");
  }
  return out;
}

void save_params(const ParamList& params, const fs::path& dir) {
  for (const Param* p : params) write_file(dir / (p->name + ".bin"), encode_blob(*p));
}

void load_params(const ParamList& params, const fs::path& dir) {
  for (Param* p : params) {
    const fs::path path = dir / (p->name + ".bin");
    decode_blob(read_file(path), *p, path.string());
  }
}

}  // namespace

std::string encode_blob(const Param& param) {
  std::string out = "MPBLOB1 " + param.name + " 2 " +
                    std::to_string(param.value.rows()) + " " +
                    std::to_string(param.value.cols()) + "\n";
  const std::size_t header = out.size();
  out.resize(header + sizeof(float) * static_cast<std::size_t>(param.value.size()));
  char* data = out.data() + header;
  for (Eigen::Index r = 0; r < param.value.rows(); ++r) {
    for (Eigen::Index c = 0; c < param.value.cols(); ++c) {
      const float v = static_cast<float>(param.value(r, c));
      std::memcpy(data, &v, sizeof v);
      data += sizeof v;
    }
  }
  return out;
}

void decode_blob(std::string_view bytes, Param& param, const std::string& file) {
  const std::size_t newline = bytes.find('\n');
  if (newline == std::string_view::npos) throw LoadError(file, "missing blob header");
  std::istringstream header{std::string(bytes.substr(0, newline))};
  std::string magic;
  std::string name;
  std::size_t rank = 0;
  header >> magic >> name >> rank;
  if (!header || magic != "MPBLOB1") throw LoadError(file, "bad blob magic");
  if (name != param.name) {
    throw LoadError(file, "blob holds '" + name + "', expected '" + param.name + "'");
  }
  std::vector<long> dims(rank);
  for (long& d : dims) header >> d;
  std::string rest;
  if (!header || rank != 2 || (header >> rest)) {
    throw LoadError(file, "bad blob dimensions");
  }
  if (dims[0] != param.value.rows() || dims[1] != param.value.cols()) {
    throw LoadError(file, "dimension mismatch: blob " + std::to_string(dims[0]) +
                              "x" + std::to_string(dims[1]) + ", model " +
                              std::to_string(param.value.rows()) + "x" +
                              std::to_string(param.value.cols()));
  }
  const std::size_t expected =
      sizeof(float) * static_cast<std::size_t>(param.value.size());
  if (bytes.size() - newline - 1 != expected) {
    throw LoadError(file, "blob has " + std::to_string(bytes.size() - newline - 1) +
                              " data bytes, expected " + std::to_string(expected));
  }
  const char* data = bytes.data() + newline + 1;
  for (Eigen::Index r = 0; r < param.value.rows(); ++r) {
    for (Eigen::Index c = 0; c < param.value.cols(); ++c) {
      float v = 0.0F;
      std::memcpy(&v, data, sizeof v);
      data += sizeof v;
      param.value(r, c) = v;
    }
  }
  param.grad.setZero(param.value.rows(), param.value.cols());
}

std::map<std::string, std::string> parse_manifest(std::string_view text,
                                                  const std::string& file) {
  std::map<std::string, std::string> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::size_t sep = line.find(" = ");
    if (sep == std::string_view::npos) {
      throw LoadError(file, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    out[std::string(line.substr(0, sep))] = std::string(line.substr(sep + 3));
  }
  return out;
}

void save_bundle(const Pipeline& p, const fs::path& dir) {
  if (!p.tagger) throw ContractViolation("pipeline has no trained tagger");
  fs::create_directories(dir / "labels");
  fs::create_directories(dir / "params");
  const ModelDims& d = p.tagger->dims();
  std::string m;
  auto put = [&](const std::string& key, const std::string& value) {
    m += key + " = " + value + "\n";
  };
  put("magic", std::string(kBundleMagic));
  put("format_version", std::to_string(kBundleFormatVersion));
  put("hash_id", std::string(kHashId));
  std::string components;
  for (const std::string& c : p.components()) {
    components += (components.empty() ? "" : " ") + c;
  }
  put("components", components);
  put("seed", std::to_string(p.config.training.seed));
  put("dims.static", std::to_string(d.embed.static_dim));
  put("dims.hash", std::to_string(d.embed.hash_dim));
  put("dims.norm_rows", std::to_string(d.embed.norm_rows));
  put("dims.affix_rows", std::to_string(d.embed.affix_rows));
  put("dims.prefix_len", std::to_string(d.embed.features.prefix_len));
  put("dims.suffix_len", std::to_string(d.embed.features.suffix_len));
  put("dims.width", std::to_string(d.width));
  put("dims.pieces", std::to_string(d.pieces));
  put("dims.depth", std::to_string(d.depth));
  put("dims.parser_hidden", std::to_string(d.parser_hidden));
  put("dims.parser_pieces", std::to_string(d.parser_pieces));
  put("dims.ner_tag_dim", std::to_string(d.ner_tag_dim));
  const StaticVectors& v = *p.vectors;
  put("vectors.path", p.vectors_path.string());
  put("vectors.count", std::to_string(v.size()));
  put("vectors.dim", std::to_string(v.dim()));
  put("vectors.case_fallback", v.case_fallback() ? "true" : "false");
  put("vectors.fingerprint", std::to_string(v.fingerprint()));
  if (p.lemmatizer) {
    put("lemmatizer.key_on_feats", p.lemmatizer->options().key_on_feats ? "true" : "false");
  }
  // Training configuration as it was given.
  const std::string config = p.config.str();
  std::size_t pos = 0;
  while (pos < config.size()) {
    const std::size_t end = config.find('\n', pos);
    m += "config." + config.substr(pos, end - pos + 1);
    pos = end + 1;
  }
  write_file(dir / "manifest", m);
  write_file(dir / "tokenizer.rules", p.rules.str());

  const TagInventories& inv = p.tagger->inventories();
  write_file(dir / "labels" / "upos.txt", join_lines(inv.upos.labels()));
  write_file(dir / "labels" / "feats.txt", join_lines(inv.feats.labels()));
  if (p.tagger->has_parser()) {
    write_file(dir / "labels" / "deprel.txt", join_lines(inv.deprels.labels()));
  }
  save_params(p.tagger->params(), dir / "params");
  if (p.lemmatizer) write_file(dir / "lemma.rules", p.lemmatizer->dump());
  if (p.ner) {
    write_file(dir / "labels" / "ner.txt", join_lines(p.ner->classes().labels()));
    save_params(p.ner->params(), dir / "params");
  }
}

Pipeline load_bundle(const fs::path& dir, const LoadOptions& options) {
  const std::string manifest_file = (dir / "manifest").string();
  const auto m = parse_manifest(read_file(dir / "manifest"), manifest_file);
  if (require(m, "magic", manifest_file) != kBundleMagic) {
    throw LoadError(manifest_file, "not a model bundle (bad magic)");
  }
  if (number<int>(m, "format_version", manifest_file) != kBundleFormatVersion) {
    throw LoadError(manifest_file, "unsupported format version " +
                                       require(m, "format_version", manifest_file));
  }
  if (require(m, "hash_id", manifest_file) != kHashId) {
    throw LoadError(manifest_file, "feature hash '" + require(m, "hash_id", manifest_file) +
                                       "' differs from this build's '" +
                                       std::string(kHashId) + "'");
  }
  std::set<std::string> components;
  {
    std::istringstream in(require(m, "components", manifest_file));
    std::string c;
    while (in >> c) components.insert(c);
  }

  Pipeline p;
  std::string config_text;
  for (const auto& [key, value] : m) {
    if (key.starts_with("config.")) config_text += key.substr(7) + " = " + value + "\n";
  }
  try {
    p.config = PipelineConfig::parse(config_text);
  } catch (const ConfigError& e) {
    throw LoadError(manifest_file, e.what());
  }

  ModelDims d;
  d.embed.static_dim = number<std::size_t>(m, "dims.static", manifest_file);
  d.embed.hash_dim = number<std::size_t>(m, "dims.hash", manifest_file);
  d.embed.norm_rows = number<std::size_t>(m, "dims.norm_rows", manifest_file);
  d.embed.affix_rows = number<std::size_t>(m, "dims.affix_rows", manifest_file);
  d.embed.features.prefix_len = number<std::size_t>(m, "dims.prefix_len", manifest_file);
  d.embed.features.suffix_len = number<std::size_t>(m, "dims.suffix_len", manifest_file);
  d.width = number<std::size_t>(m, "dims.width", manifest_file);
  d.pieces = number<std::size_t>(m, "dims.pieces", manifest_file);
  d.depth = number<std::size_t>(m, "dims.depth", manifest_file);
  d.parser_hidden = number<std::size_t>(m, "dims.parser_hidden", manifest_file);
  d.parser_pieces = number<std::size_t>(m, "dims.parser_pieces", manifest_file);
  d.ner_tag_dim = number<std::size_t>(m, "dims.ner_tag_dim", manifest_file);

  const auto count = number<std::size_t>(m, "vectors.count", manifest_file);
  const auto dim = number<std::size_t>(m, "vectors.dim", manifest_file);
  const bool fallback = require(m, "vectors.case_fallback", manifest_file) == "true";
  const auto fingerprint = number<std::uint64_t>(m, "vectors.fingerprint", manifest_file);
  p.vectors_path = require(m, "vectors.path", manifest_file);
  if (options.vectors) {
    p.vectors = options.vectors;
  } else if (!p.vectors_path.empty()) {
    p.vectors = std::make_shared<const StaticVectors>(
        StaticVectors::read_file(p.vectors_path, fallback));
  } else {
    p.vectors = std::make_shared<const StaticVectors>(dim, fallback);
  }
  if (p.vectors->size() != count || p.vectors->dim() != dim ||
      p.vectors->fingerprint() != fingerprint) {
    throw LoadError(p.vectors_path.empty() ? manifest_file : p.vectors_path.string(),
                    "static vectors do not match the ones the model was trained with");
  }
  if (dim != d.embed.static_dim) {
    throw LoadError(manifest_file, "vectors.dim differs from dims.static");
  }

  try {
    p.rules = TokenizerRules::parse(read_file(dir / "tokenizer.rules"));
  } catch (const ParseError& e) {
    throw LoadError((dir / "tokenizer.rules").string(), e.what());
  }

  TagInventories inv;
  inv.upos = read_labels(dir / "labels" / "upos.txt");
  inv.feats = read_labels(dir / "labels" / "feats.txt");
  if (components.contains("parser")) {
    inv.deprels = read_labels(dir / "labels" / "deprel.txt");
  }
  p.tagger = std::make_unique<MultitaskModel>(d, std::move(inv), p.vectors);
  load_params(p.tagger->params(), dir / "params");

  if (components.contains("lemmatizer")) {
    LemmatizerOptions lo;
    lo.key_on_feats = require(m, "lemmatizer.key_on_feats", manifest_file) == "true";
    const fs::path path = dir / "lemma.rules";
    try {
      p.lemmatizer = Lemmatizer::parse_dump(read_file(path), lo);
    } catch (const ParseError& e) {
      throw LoadError(path.string(), e.what());
    }
  }
  if (components.contains("ner")) {
    p.ner = std::make_unique<NerModel>(d, read_labels(dir / "labels" / "ner.txt"),
                                       p.vectors);
    load_params(p.ner->params(), dir / "params");
  }
  return p;
}

}  // namespace morphpipe
