// morphpipe command line: tokenize, train, annotate, evaluate, benchmark.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "morphpipe/bundle.h"
#include "morphpipe/conllu.h"
#include "morphpipe/entity_tags.h"
#include "morphpipe/errors.h"
#include "morphpipe/evaluator.h"
#include "morphpipe/pipeline.h"
#include "morphpipe/tokenizer.h"

namespace mp = morphpipe;

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    std::ostringstream text;
    text << std::cin.rdbuf();
    return text.str();
  }
  return mp::read_text_file(path);
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw mp::Error("cannot write " + path);
}

std::string tokens_text(const mp::AnnotatedDoc& doc) {
  std::string out;
  for (const mp::Token& t : doc.tokens) out += t.text + '\n';
  return out;
}

std::string tokens_tsv(const mp::AnnotatedDoc& doc) {
  std::string out;
  for (const mp::Token& t : doc.tokens) {
    out += t.text + '\t' + std::to_string(t.char_start) + '\t' +
           std::to_string(t.char_end) + '\n';
  }
  return out;
}

// Runs `work(i)` for i in [0, n) on `jobs` threads.
template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F work) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(jobs);
  for (unsigned j = 0; j < jobs; ++j) {
    threads.emplace_back([&, j] {
      try {
        for (std::size_t i = j; i < n; i += jobs) work(i);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hungarian text processing pipeline: tokenizer, tagger, parser, "
               "lemmatizer and entity recognizer"};
  app.require_subcommand(1);

  std::string input;
  std::string output;
  std::string model_dir;
  std::string config_path;
  std::string format = "text";
  std::string rules_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  unsigned jobs = 1;
  std::size_t runs = 5;
  std::string gold_path;
  std::string system_path;
  std::string ner_output;

  auto* tok = app.add_subcommand("tokenize", "Split raw text into tokens");
  tok->add_option("--input", input, "Input text file (default stdin)");
  tok->add_option("--output", output, "Output file (default stdout)");
  tok->add_option("--format", format, "text, conllu or tsv")
      ->check(CLI::IsMember({"text", "conllu", "tsv"}));
  tok->add_option("--rules", rules_path, "Tokenizer rule file");

  auto* train = app.add_subcommand("train", "Train a pipeline and save a bundle");
  train->add_option("--config", config_path, "Pipeline config file")->required();
  train->add_option("--model", model_dir, "Output bundle directory");
  train->add_option("--seed", seed, "Random seed")->each([&](const std::string&) {
    seed_given = true;
  });

  auto* annotate = app.add_subcommand("annotate", "Annotate text or CoNLL-U");
  annotate->add_option("--model", model_dir, "Bundle directory")->required();
  annotate->add_option("--input", input, "Input file (default stdin)");
  annotate->add_option("--output", output, "CoNLL-U output (default stdout)");
  annotate->add_option("--format", format,
                       "Input format: text (raw), conllu (gold tokens) or tsv "
                       "(NER TSV, writes TSV)")
      ->check(CLI::IsMember({"text", "conllu", "tsv"}));
  annotate->add_option("--ner-output", ner_output, "Also write entities as NER TSV");
  annotate->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* evaluate = app.add_subcommand("evaluate", "Score system CoNLL-U against gold");
  evaluate->add_option("--gold", gold_path, "Gold CoNLL-U")->required();
  evaluate->add_option("--system", system_path, "System CoNLL-U")->required();
  evaluate->add_option("--format", format, "text (table) or tsv (metric lines)")
      ->check(CLI::IsMember({"text", "tsv"}));
  evaluate->add_option("--output", output, "Report file (default stdout)");

  auto* evaluate_ner = app.add_subcommand("evaluate-ner", "Span F1 of NER TSV files");
  evaluate_ner->add_option("--gold", gold_path, "Gold TSV")->required();
  evaluate_ner->add_option("--system", system_path, "System TSV")->required();
  evaluate_ner->add_option("--output", output, "Report file (default stdout)");

  auto* bench = app.add_subcommand("benchmark", "Throughput and peak memory");
  bench->add_option("--model", model_dir, "Bundle directory")->required();
  bench->add_option("--input", input, "Corpus (raw text, one document per paragraph, "
                                      "or CoNLL-U)")->required();
  bench->add_option("--format", format, "text or conllu")
      ->check(CLI::IsMember({"text", "conllu"}));
  bench->add_option("--runs", runs, "Timed passes")->check(CLI::PositiveNumber);

  auto* inspect = app.add_subcommand("inspect", "Describe a bundle");
  inspect->add_option("--model", model_dir, "Bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*tok) {
      const mp::TokenizerRules rules =
          rules_path.empty() ? mp::default_rules()
                             : mp::TokenizerRules::parse(mp::read_text_file(rules_path));
      const mp::AnnotatedDoc doc = mp::tokenize(read_input(input), rules);
      if (format == "conllu") {
        write_output(output, mp::write_conllu({doc}));
      } else if (format == "tsv") {
        write_output(output, tokens_tsv(doc));
      } else {
        write_output(output, tokens_text(doc));
      }
    } else if (*train) {
      mp::PipelineConfig config = mp::PipelineConfig::read_file(config_path);
      if (seed_given) config.training.seed = seed;
      if (!model_dir.empty()) config.model_dir = model_dir;
      if (config.model_dir.empty()) {
        std::cerr << "error: no output directory (--model or 'model' in the config)\n";
        return kUsageError;
      }
      const mp::Pipeline pipeline = mp::train_pipeline(config, &std::cerr);
      mp::save_bundle(pipeline, config.model_dir);
      std::cerr << "saved " << config.model_dir.string() << '\n';
    } else if (*annotate) {
      const mp::Pipeline pipeline = mp::load_bundle(model_dir);
      const std::string text = read_input(input);
      std::vector<mp::AnnotatedDoc> docs;
      if (format == "conllu") {
        for (const mp::AnnotatedDoc& doc : mp::read_conllu(text)) {
          docs.push_back(mp::tokens_only(doc));
        }
      } else if (format == "tsv") {
        for (const mp::AnnotatedDoc& doc : mp::ner_docs(mp::read_ner_tsv(text))) {
          docs.push_back(mp::tokens_only(doc));
        }
      } else if (!text.empty()) {
        docs.push_back(mp::tokenize(text, pipeline.rules));
      }
      parallel_for(docs.size(), jobs, [&](std::size_t i) { pipeline.annotate(docs[i]); });
      std::vector<mp::NerSentence> entities;
      for (const mp::AnnotatedDoc& doc : docs) {
        // TSV input keeps its own sentences.
        if (format == "tsv") {
          entities.push_back(mp::ner_sentence_from_doc(doc));
          continue;
        }
        for (const mp::SentenceRange& s : mp::sentence_ranges(doc)) {
          mp::AnnotatedDoc part;
          for (std::size_t i = s.begin; i < s.end; ++i) part.tokens.push_back(doc.tokens[i]);
          entities.push_back(mp::ner_sentence_from_doc(part));
        }
      }
      if (format == "tsv") {
        write_output(output, mp::write_ner_tsv(entities));
      } else {
        write_output(output, mp::write_conllu(docs));
      }
      if (!ner_output.empty()) write_output(ner_output, mp::write_ner_tsv(entities));
    } else if (*evaluate) {
      const mp::EvalReport report = mp::evaluate(mp::read_conllu_file(gold_path),
                                                 mp::read_conllu_file(system_path));
      write_output(output, format == "tsv" ? mp::format_lines(report)
                                           : mp::format_table(report));
    } else if (*evaluate_ner) {
      const mp::MetricScore s =
          mp::evaluate_ner(mp::read_ner_file(gold_path), mp::read_ner_file(system_path));
      char line[128];
      std::snprintf(line, sizeof line, "NER\t%.6f\t%.6f\t%.6f\n", s.precision(),
                    s.recall(), s.f1());
      write_output(output, line);
    } else if (*bench) {
      const mp::Pipeline pipeline = mp::load_bundle(model_dir);
      const std::string text = mp::read_text_file(input);
      std::vector<std::string> texts;
      if (format == "conllu") {
        for (const mp::AnnotatedDoc& doc : mp::read_conllu(text)) {
          texts.push_back(doc.detokenize());
        }
      } else {
        std::size_t pos = 0;
        while (pos < text.size()) {
          std::size_t end = text.find("\n\n", pos);
          if (end == std::string::npos) end = text.size();
          if (end > pos) texts.push_back(text.substr(pos, end - pos));
          pos = end + 2;
        }
      }
      const mp::BenchmarkResult r = mp::benchmark(pipeline, texts, runs);
      std::printf("tokens\t%zu\nruns\t%zu\ntokens_per_second\t%.1f\npeak_rss_mb\t%.1f\n",
                  r.tokens, r.seconds.size(), r.tokens_per_second,
                  static_cast<double>(r.peak_rss_bytes) / (1024.0 * 1024.0));
    } else if (*inspect) {
      const mp::Pipeline p = mp::load_bundle(model_dir);
      std::cout << "components:";
      for (const std::string& c : p.components()) std::cout << ' ' << c;
      std::cout << '\n';
      std::size_t count = 0;
      for (const mp::Param* param : p.tagger->params()) {
        count += static_cast<std::size_t>(param->value.size());
      }
      if (p.ner) {
        for (const mp::Param* param : p.ner->params()) {
          count += static_cast<std::size_t>(param->value.size());
        }
      }
      const mp::TagInventories& inv = p.tagger->inventories();
      std::cout << "parameters: " << count << '\n'
                << "upos labels: " << inv.upos.size() << '\n'
                << "feats bundles: " << inv.feats.size() << '\n'
                << "deprels: " << inv.deprels.size() << '\n'
                << "static vectors: " << p.vectors->size() << " x "
                << p.vectors->dim() << '\n'
                << "abbreviations: " << p.rules.abbreviation_count() << '\n';
      if (p.lemmatizer) std::cout << "lemma trie nodes: " << p.lemmatizer->node_count() << '\n';
      if (p.ner) std::cout << "entity classes: " << p.ner->classes().size() << '\n';
      std::cout << "config:\n" << p.config.str();
    }
  } catch (const mp::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const mp::ContractViolation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}
