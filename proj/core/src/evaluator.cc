#include "morphpipe/evaluator.h"

#include <algorithm>
#include <cstdio>
#include <map>

#include "morphpipe/conllu.h"
#include "morphpipe/errors.h"
#include "morphpipe/utf8.h"

namespace morphpipe {

namespace {

// [start, end) over the non-whitespace code points of the corpus.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  friend auto operator<=>(const CharSpan&, const CharSpan&) = default;
};

struct Flattened {
  std::u32string chars;
  std::vector<CharSpan> tokens;
  std::vector<CharSpan> sentences;
  std::vector<const Token*> refs;
  std::vector<std::size_t> doc_offset;  // global index of each doc's token 0
};

Flattened flatten(const std::vector<AnnotatedDoc>& docs) {
  Flattened out;
  for (const AnnotatedDoc& doc : docs) {
    out.doc_offset.push_back(out.tokens.size());
    const std::size_t doc_first = out.tokens.size();
    for (const Token& t : doc.tokens) {
      const std::size_t start = out.chars.size();
      for (char32_t c : utf8::decode(t.text)) {
        if (!utf8::is_space(c)) out.chars.push_back(c);
      }
      out.tokens.push_back({start, out.chars.size()});
      out.refs.push_back(&t);
    }
    for (const SentenceRange& s : sentence_ranges(doc)) {
      out.sentences.push_back({out.tokens[doc_first + s.begin].start,
                               out.tokens[doc_first + s.end - 1].end});
    }
  }
  return out;
}

// Global index of a token's head, -1 for ROOT, -2 when unset.
long global_head(const Token& t, std::size_t doc_first) {
  if (!t.head) return -2;
  if (t.head->is_root()) return -1;
  return static_cast<long>(doc_first + t.head->index());
}

std::size_t count_matches(const std::vector<CharSpan>& gold,
                          const std::vector<CharSpan>& system) {
  std::vector<CharSpan> a = gold;
  std::vector<CharSpan> b = system;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<CharSpan> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(common));
  return common.size();
}

Alignment align_flat(const Flattened& g, const Flattened& s) {
  if (g.chars != s.chars) {
    std::size_t at = 0;
    while (at < g.chars.size() && at < s.chars.size() && g.chars[at] == s.chars[at]) ++at;
    throw IncomparableInput(
        "gold and system texts differ at non-whitespace character " +
        std::to_string(at));
  }
  Alignment out;
  out.gold_tokens = g.tokens.size();
  out.system_tokens = s.tokens.size();
  out.gold_to_sys.assign(g.tokens.size(), -1);
  std::map<CharSpan, std::size_t> by_span;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    // Zero-width tokens (pure whitespace) cannot be aligned.
    if (s.tokens[i].start < s.tokens[i].end) by_span.emplace(s.tokens[i], i);
  }
  for (std::size_t i = 0; i < g.tokens.size(); ++i) {
    const auto it = by_span.find(g.tokens[i]);
    if (it == by_span.end()) continue;
    out.gold_to_sys[i] = static_cast<long>(it->second);
    ++out.matched;
  }
  return out;
}

std::size_t doc_first_of(const Flattened& f, std::size_t global) {
  const auto it = std::upper_bound(f.doc_offset.begin(), f.doc_offset.end(), global);
  return *(it - 1);
}

}  // namespace

double MetricScore::precision() const {
  return system == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(system);
}

double MetricScore::recall() const {
  return gold == 0 ? 0.0 : static_cast<double>(matched) / static_cast<double>(gold);
}

double MetricScore::f1() const {
  if (gold + system == 0) return 0.0;
  return 2.0 * static_cast<double>(matched) / static_cast<double>(gold + system);
}

std::vector<std::pair<std::string, MetricScore>> EvalReport::metrics() const {
  std::vector<std::pair<std::string, MetricScore>> out = {
      {"Tokens", tokens}, {"Sentences", sentences}, {"UPOS", upos},
      {"UFeats", ufeats}, {"Lemmas", lemmas},       {"UAS", uas},
      {"LAS", las}};
  if (ner) out.emplace_back("NER", *ner);
  return out;
}

Alignment align(const std::vector<AnnotatedDoc>& gold,
                const std::vector<AnnotatedDoc>& system) {
  return align_flat(flatten(gold), flatten(system));
}

EvalReport evaluate(const std::vector<AnnotatedDoc>& gold,
                    const std::vector<AnnotatedDoc>& system) {
  const Flattened g = flatten(gold);
  const Flattened s = flatten(system);
  const Alignment alignment = align_flat(g, s);
  EvalReport report;
  for (MetricScore* m : {&report.tokens, &report.upos, &report.ufeats,
                         &report.lemmas, &report.uas, &report.las}) {
    m->gold = g.tokens.size();
    m->system = s.tokens.size();
  }
  report.tokens.matched = alignment.matched;
  report.sentences = {g.sentences.size(), s.sentences.size(),
                      count_matches(g.sentences, s.sentences)};

  for (std::size_t i = 0; i < g.tokens.size(); ++i) {
    const long j = alignment.gold_to_sys[i];
    if (j < 0) continue;
    const Token& gt = *g.refs[i];
    const Token& st = *s.refs[static_cast<std::size_t>(j)];
    if (gt.upos == st.upos) ++report.upos.matched;
    const std::string gf = gt.feats_label();
    const std::string sf = st.feats_label();
    if (gf == sf) ++report.ufeats.matched;
    if (gt.lemma == st.lemma) ++report.lemmas.matched;

    const long gh = global_head(gt, doc_first_of(g, i));
    const long sh = global_head(st, doc_first_of(s, static_cast<std::size_t>(j)));
    bool head_ok = false;
    if (gh == -1) {
      head_ok = sh == -1;
    } else if (gh >= 0 && sh >= 0) {
      head_ok = alignment.gold_to_sys[static_cast<std::size_t>(gh)] == sh;
    }
    if (head_ok) {
      ++report.uas.matched;
      if (gt.deprel && gt.deprel == st.deprel) ++report.las.matched;
    }
  }
  return report;
}

MetricScore evaluate_ner(const std::vector<NerSentence>& gold,
                         const std::vector<NerSentence>& system) {
  if (gold.size() != system.size()) {
    throw IncomparableInput("gold has " + std::to_string(gold.size()) +
                            " sentences, system " + std::to_string(system.size()));
  }
  MetricScore out;
  for (std::size_t k = 0; k < gold.size(); ++k) {
    if (gold[k].tokens != system[k].tokens) {
      throw IncomparableInput("tokens of sentence " + std::to_string(k + 1) +
                              " differ");
    }
    out.gold += gold[k].spans.size();
    out.system += system[k].spans.size();
    for (const EntitySpan& span : system[k].spans) {
      if (std::find(gold[k].spans.begin(), gold[k].spans.end(), span) !=
          gold[k].spans.end()) {
        ++out.matched;
      }
    }
  }
  return out;
}

std::string format_table(const EvalReport& report) {
  std::string out =
      "Metric     | Precision |    Recall |  F1 Score |     Gold |   System |  Matched\n"
      "-----------+-----------+-----------+-----------+----------+----------+---------\n";
  char line[160];
  for (const auto& [name, m] : report.metrics()) {
    std::snprintf(line, sizeof line, "%-10s | %9.4f | %9.4f | %9.4f | %8zu | %8zu | %8zu\n",
                  name.c_str(), 100.0 * m.precision(), 100.0 * m.recall(),
                  100.0 * m.f1(), m.gold, m.system, m.matched);
    out += line;
  }
  return out;
}

std::string format_lines(const EvalReport& report) {
  std::string out;
  char line[128];
  for (const auto& [name, m] : report.metrics()) {
    std::snprintf(line, sizeof line, "%s\t%.6f\t%.6f\t%.6f\n", name.c_str(),
                  m.precision(), m.recall(), m.f1());
    out += line;
  }
  return out;
}

}  // namespace morphpipe
