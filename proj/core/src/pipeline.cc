#include "morphpipe/pipeline.h"

#include <sys/resource.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>

#include "morphpipe/conllu.h"
#include "morphpipe/errors.h"
#include "morphpipe/multitask.h"
#include "morphpipe/parser.h"
#include "morphpipe/tagger.h"

namespace morphpipe {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("bad value for " + std::string(key) + ": '" +
                      std::string(value) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad boolean for " + std::string(key) + ": '" +
                    std::string(value) + "'");
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<AnnotatedDoc> read_ner_docs(const std::vector<std::filesystem::path>& paths) {
  std::vector<AnnotatedDoc> out;
  for (const auto& path : paths) {
    for (AnnotatedDoc& doc : ner_docs(read_ner_file(path))) out.push_back(std::move(doc));
  }
  return out;
}

}  // namespace

PipelineConfig PipelineConfig::parse(std::string_view text,
                                     const std::filesystem::path& base_dir) {
  PipelineConfig c;
  auto path_of = [&](std::string_view v) {
    std::filesystem::path p{std::string(v)};
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return p;
  };
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view v = trim(line.substr(eq + 1));
    if (key == "train") c.train = path_of(v);
    else if (key == "dev") c.dev = path_of(v);
    else if (key == "test") c.test = path_of(v);
    else if (key == "pretrain") c.pretrain = path_of(v);
    else if (key == "vectors") c.vectors = path_of(v);
    else if (key == "rules") c.rules = path_of(v);
    else if (key == "model") c.model_dir = path_of(v);
    else if (key == "ner_train") {
      std::istringstream items{std::string(v)};
      std::string item;
      while (items >> item) c.ner_train.push_back(path_of(item));
    }
    else if (key == "ner_dev") c.ner_dev = path_of(v);
    else if (key == "parser") c.parser = parse_bool(key, v);
    else if (key == "lemmatizer") c.lemmatizer = parse_bool(key, v);
    else if (key == "lemma_key_on_feats") c.lemma.key_on_feats = parse_bool(key, v);
    else if (key == "vectors_case_fallback") c.vectors_case_fallback = parse_bool(key, v);
    else if (key == "seed") c.training.seed = parse_number<std::uint64_t>(key, v);
    else if (key == "epochs") c.training.epochs = parse_number<std::size_t>(key, v);
    else if (key == "pretrain_epochs") c.pretrain_epochs = parse_number<std::size_t>(key, v);
    else if (key == "ner_epochs") c.ner_epochs = parse_number<std::size_t>(key, v);
    else if (key == "batch_size") c.training.batch_size = parse_number<std::size_t>(key, v);
    else if (key == "learning_rate") c.training.learning_rate = parse_number<double>(key, v);
    else if (key == "beta1") c.training.beta1 = parse_number<double>(key, v);
    else if (key == "beta2") c.training.beta2 = parse_number<double>(key, v);
    else if (key == "adam_eps") c.training.adam_eps = parse_number<double>(key, v);
    else if (key == "clip_norm") c.training.clip_norm = parse_number<double>(key, v);
    else if (key == "dropout") c.training.dropout = parse_number<double>(key, v);
    else if (key == "sentences_per_example") c.training.sentences_per_example = parse_number<std::size_t>(key, v);
    else if (key == "static_dim") c.dims.embed.static_dim = parse_number<std::size_t>(key, v);
    else if (key == "hash_dim") c.dims.embed.hash_dim = parse_number<std::size_t>(key, v);
    else if (key == "norm_rows") c.dims.embed.norm_rows = parse_number<std::size_t>(key, v);
    else if (key == "affix_rows") c.dims.embed.affix_rows = parse_number<std::size_t>(key, v);
    else if (key == "prefix_len") c.dims.embed.features.prefix_len = parse_number<std::size_t>(key, v);
    else if (key == "suffix_len") c.dims.embed.features.suffix_len = parse_number<std::size_t>(key, v);
    else if (key == "width") c.dims.width = parse_number<std::size_t>(key, v);
    else if (key == "pieces") c.dims.pieces = parse_number<std::size_t>(key, v);
    else if (key == "depth") c.dims.depth = parse_number<std::size_t>(key, v);
    else if (key == "parser_hidden") c.dims.parser_hidden = parse_number<std::size_t>(key, v);
    else if (key == "parser_pieces") c.dims.parser_pieces = parse_number<std::size_t>(key, v);
    else if (key == "ner_tag_dim") c.dims.ner_tag_dim = parse_number<std::size_t>(key, v);
    else throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" +
                           std::string(key) + "'");
  }
  if (c.dims.width == 0 || c.dims.pieces == 0 || c.dims.parser_pieces == 0 ||
      c.dims.parser_hidden == 0 || c.dims.embed.hash_dim == 0 ||
      c.dims.embed.norm_rows == 0 || c.dims.embed.affix_rows == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (c.training.batch_size == 0 || c.training.sentences_per_example == 0) {
    throw ConfigError("batch_size and sentences_per_example must be positive");
  }
  return c;
}

PipelineConfig PipelineConfig::read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.parent_path());
}

std::string PipelineConfig::str() const {
  std::string out;
  auto put = [&](std::string_view key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  auto put_path = [&](std::string_view key, const std::filesystem::path& p) {
    if (!p.empty()) put(key, p.string());
  };
  put_path("train", train);
  put_path("dev", dev);
  put_path("test", test);
  put_path("pretrain", pretrain);
  put_path("vectors", vectors);
  put_path("rules", rules);
  put_path("model", model_dir);
  if (!ner_train.empty()) {
    std::string joined;
    for (const auto& p : ner_train) joined += (joined.empty() ? "" : " ") + p.string();
    put("ner_train", joined);
  }
  put_path("ner_dev", ner_dev);
  put("parser", parser ? "true" : "false");
  put("lemmatizer", lemmatizer ? "true" : "false");
  put("lemma_key_on_feats", lemma.key_on_feats ? "true" : "false");
  put("vectors_case_fallback", vectors_case_fallback ? "true" : "false");
  put("seed", std::to_string(training.seed));
  put("epochs", std::to_string(training.epochs));
  put("pretrain_epochs", std::to_string(pretrain_epochs));
  put("ner_epochs", std::to_string(ner_epochs));
  put("batch_size", std::to_string(training.batch_size));
  put("learning_rate", format_double(training.learning_rate));
  put("beta1", format_double(training.beta1));
  put("beta2", format_double(training.beta2));
  put("adam_eps", format_double(training.adam_eps));
  put("clip_norm", format_double(training.clip_norm));
  put("dropout", format_double(training.dropout));
  put("sentences_per_example", std::to_string(training.sentences_per_example));
  put("static_dim", std::to_string(dims.embed.static_dim));
  put("hash_dim", std::to_string(dims.embed.hash_dim));
  put("norm_rows", std::to_string(dims.embed.norm_rows));
  put("affix_rows", std::to_string(dims.embed.affix_rows));
  put("prefix_len", std::to_string(dims.embed.features.prefix_len));
  put("suffix_len", std::to_string(dims.embed.features.suffix_len));
  put("width", std::to_string(dims.width));
  put("pieces", std::to_string(dims.pieces));
  put("depth", std::to_string(dims.depth));
  put("parser_hidden", std::to_string(dims.parser_hidden));
  put("parser_pieces", std::to_string(dims.parser_pieces));
  put("ner_tag_dim", std::to_string(dims.ner_tag_dim));
  return out;
}

void PipelineConfig::validate() const {
  if (train.empty()) throw ConfigError("no training corpus configured (train)");
  auto check = [](std::string_view key, const std::filesystem::path& p) {
    if (!p.empty() && !std::filesystem::exists(p)) {
      throw ConfigError(std::string(key) + ": no such file " + p.string());
    }
  };
  check("train", train);
  check("dev", dev);
  check("test", test);
  check("pretrain", pretrain);
  check("vectors", vectors);
  check("rules", rules);
  for (const auto& p : ner_train) check("ner_train", p);
  check("ner_dev", ner_dev);
}

void Pipeline::annotate(AnnotatedDoc& doc) const {
  if (doc.empty()) return;
  if (tagger) {
    const auto texts = token_texts(doc);
    const Matrix encoded = tagger->tok2vec().forward(texts, nullptr);
    tag_encoded(doc, *tagger, encoded);
    if (tagger->has_parser()) parse_encoded(doc, *tagger, encoded);
  }
  if (lemmatizer) lemmatizer->lemmatize(doc);
  if (ner) recognize(doc, *ner);
}

AnnotatedDoc Pipeline::annotate_text(std::string_view text) const {
  AnnotatedDoc doc = tokenize(text, rules);
  annotate(doc);
  return doc;
}

std::vector<std::string> Pipeline::components() const {
  std::vector<std::string> out{"tokenizer"};
  if (tagger) out.push_back("tagger");
  if (tagger && tagger->has_parser()) out.push_back("parser");
  if (lemmatizer) out.push_back("lemmatizer");
  if (ner) out.push_back("ner");
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path.string(), "cannot open");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::vector<AnnotatedDoc> read_conllu_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return read_conllu(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

std::vector<NerSentence> read_ner_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return read_ner_tsv(text);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

Pipeline train_pipeline(const PipelineConfig& config, std::ostream* log) {
  config.validate();
  const std::vector<AnnotatedDoc> train = read_conllu_file(config.train);
  const std::vector<AnnotatedDoc> dev =
      config.dev.empty() ? std::vector<AnnotatedDoc>{} : read_conllu_file(config.dev);
  const std::vector<AnnotatedDoc> pretrain =
      config.pretrain.empty() ? std::vector<AnnotatedDoc>{}
                              : read_conllu_file(config.pretrain);
  const std::vector<AnnotatedDoc> ner_train = read_ner_docs(config.ner_train);
  const std::vector<AnnotatedDoc> ner_dev =
      config.ner_dev.empty() ? std::vector<AnnotatedDoc>{}
                             : read_ner_docs({config.ner_dev});
  std::shared_ptr<const StaticVectors> vectors;
  if (!config.vectors.empty()) {
    vectors = std::make_shared<const StaticVectors>(
        StaticVectors::read_file(config.vectors, config.vectors_case_fallback));
  }
  Pipeline out = train_pipeline(config, train, dev, pretrain, ner_train, ner_dev,
                                std::move(vectors), log);
  return out;
}

Pipeline train_pipeline(const PipelineConfig& config,
                        const std::vector<AnnotatedDoc>& train,
                        const std::vector<AnnotatedDoc>& dev,
                        const std::vector<AnnotatedDoc>& pretrain,
                        const std::vector<AnnotatedDoc>& ner_train,
                        const std::vector<AnnotatedDoc>& ner_dev,
                        std::shared_ptr<const StaticVectors> vectors,
                        std::ostream* log) {
  if (train.empty()) throw ConfigError("training corpus is empty");
  Pipeline p;
  p.config = config;
  p.rules = config.rules.empty() ? default_rules()
                                 : TokenizerRules::parse(read_text_file(config.rules));
  if (!vectors) {
    vectors = std::make_shared<const StaticVectors>(config.dims.embed.static_dim);
  }
  if (vectors->dim() != config.dims.embed.static_dim) {
    throw ConfigError("static_dim " + std::to_string(config.dims.embed.static_dim) +
                      " differs from the vector width " +
                      std::to_string(vectors->dim()));
  }
  p.vectors = vectors;
  p.vectors_path = config.vectors;

  if (!pretrain.empty()) {
    if (log) *log << "step 1: tagger and sentence heads on the pretrain corpus\n";
    TrainConfig step1 = config.training;
    step1.epochs = config.pretrain_epochs;
    TaggerTraining t = train_tagger(pretrain, dev, config.dims, vectors, step1, log,
                                    train);
    p.tagger = std::move(t.model);
    if (log) *log << "step 2: all heads on the gold corpus\n";
    if (config.parser) {
      Rng rng(config.training.seed + 1);
      p.tagger->add_parser(TagInventories::collect(train, true).deprels, rng);
    }
    train_multitask(*p.tagger, train, dev, config.training, log);
  } else {
    TagInventories inv = TagInventories::collect(train, config.parser);
    p.tagger = std::make_unique<MultitaskModel>(config.dims, std::move(inv), vectors);
    Rng rng(config.training.seed);
    p.tagger->init(rng);
    train_multitask(*p.tagger, train, dev, config.training, log);
  }

  if (config.lemmatizer) {
    p.lemmatizer = Lemmatizer::learn(Lemmatizer::collect_items(train), config.lemma);
    if (log) *log << "lemmatizer: " << p.lemmatizer->node_count() << " trie nodes\n";
  }
  if (!ner_train.empty()) {
    TrainConfig ner_config = config.training;
    ner_config.epochs = config.ner_epochs;
    NerTraining n = train_ner(ner_train, ner_dev, config.dims, vectors, ner_config, log);
    p.ner = std::move(n.model);
  }
  return p;
}

std::size_t peak_rss_bytes() {
  rusage usage{};
  if (getrusage(RUSAGE_SELF, &usage) != 0) return 0;
  return static_cast<std::size_t>(usage.ru_maxrss) * 1024;  // KiB on Linux
}

BenchmarkResult benchmark(const Pipeline& pipeline,
                          const std::vector<std::string>& texts,
                          std::size_t runs) {
  BenchmarkResult result;
  for (const std::string& text : texts) {
    result.tokens += pipeline.annotate_text(text).size();
  }
  using Clock = std::chrono::steady_clock;
  for (std::size_t r = 0; r < runs; ++r) {
    const auto start = Clock::now();
    for (const std::string& text : texts) pipeline.annotate_text(text);
    result.seconds.push_back(
        std::chrono::duration<double>(Clock::now() - start).count());
  }
  if (!result.seconds.empty()) {
    std::vector<double> sorted = result.seconds;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median =
        n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    if (median > 0.0) {
      result.tokens_per_second = static_cast<double>(result.tokens) / median;
    }
  }
  result.peak_rss_bytes = peak_rss_bytes();
  return result;
}

}  // namespace morphpipe
