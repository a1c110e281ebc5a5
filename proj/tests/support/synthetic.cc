#include "synthetic.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <optional>
#include <set>

#include "morphpipe/conllu.h"
#include "morphpipe/entity_tags.h"
#include "morphpipe/nn.h"
#include "morphpipe/utf8.h"

namespace morphpipe::testing {

namespace {

enum class Harmony { kBack, kFront, kRounded };

Harmony harmony_of(std::string_view word) {
  bool back = false;
  std::optional<char32_t> last;
  for (char32_t c : utf8::to_lower(utf8::decode(word))) {
    if (std::u32string_view(U"aáoóuú").find(c) != std::u32string_view::npos) back = true;
    if (std::u32string_view(U"aáoóuúeéiíöőüű").find(c) != std::u32string_view::npos) last = c;
  }
  if (back) return Harmony::kBack;
  if (last && std::u32string_view(U"öőüű").find(*last) != std::u32string_view::npos) {
    return Harmony::kRounded;
  }
  return Harmony::kFront;
}

bool ends_in_vowel(std::string_view word) {
  const std::u32string w = utf8::decode(word);
  return !w.empty() &&
         std::u32string_view(U"aáoóuúeéiíöőüű").find(w.back()) != std::u32string_view::npos;
}

bool ends_in_sonorant(std::string_view word) {
  return !word.empty() && std::string_view("lnrszjy").find(word.back()) != std::string_view::npos;
}

// Stem used before suffixes: final a/e lengthen.
std::string suffix_stem(std::string_view lemma) {
  std::u32string w = utf8::decode(lemma);
  if (!w.empty() && w.back() == U'a') w.back() = U'á';
  if (!w.empty() && w.back() == U'e') w.back() = U'é';
  return utf8::encode(w);
}

std::string pick(Harmony h, std::string_view back, std::string_view front) {
  return std::string(h == Harmony::kBack ? back : front);
}

struct Inflected {
  std::string text;
  std::string feats;
};

enum class Case { kNom, kAcc, kIne, kSup, kDat, kEla };

const char* case_name(Case c) {
  switch (c) {
    case Case::kNom: return "Nom";
    case Case::kAcc: return "Acc";
    case Case::kIne: return "Ine";
    case Case::kSup: return "Sup";
    case Case::kDat: return "Dat";
    case Case::kEla: return "Ela";
  }
  return "Nom";
}

std::string case_suffix(std::string_view stem_word, Case c, Harmony h, bool plural) {
  const bool vowel = ends_in_vowel(stem_word);
  switch (c) {
    case Case::kNom: return "";
    case Case::kAcc:
      if (plural) return pick(h, "at", "et");
      if (vowel || ends_in_sonorant(stem_word)) return "t";
      return pick(h, "ot", "et");
    case Case::kIne: return pick(h, "ban", "ben");
    case Case::kSup:
      if (vowel || plural) return plural ? pick(h, "on", "en") : "n";
      return h == Harmony::kBack ? "on" : h == Harmony::kRounded ? "ön" : "en";
    case Case::kDat: return pick(h, "nak", "nek");
    case Case::kEla: return pick(h, "ból", "ből");
  }
  return "";
}

Inflected inflect_noun(std::string_view lemma, Case c, bool plural) {
  const Harmony h = harmony_of(lemma);
  std::string base = ends_in_vowel(lemma) ? suffix_stem(lemma) : std::string(lemma);
  if (plural) base += ends_in_vowel(lemma) ? "k" : pick(h, "ok", "ek");
  std::string text = c == Case::kNom && !plural ? std::string(lemma)
                                                : base + case_suffix(base, c, h, plural);
  return {text, std::string("Case=") + case_name(c) + "|Number=" + (plural ? "Plur" : "Sing")};
}

struct Verb {
  const char* lemma;
  const char* pres_sg;
  const char* pres_pl;
  const char* past_sg;
  const char* def_sg;  // nullptr for intransitives
  const char* def_pl;
};

constexpr Verb kVerbs[] = {
    {"lát", "lát", "látnak", "látott", "látja", "látják"},
    {"olvas", "olvas", "olvasnak", "olvasott", "olvassa", "olvassák"},
    {"néz", "néz", "néznek", "nézett", "nézi", "nézik"},
    {"kér", "kér", "kérnek", "kért", "kéri", "kérik"},
    {"ír", "ír", "írnak", "írt", "írja", "írják"},
    {"vesz", "vesz", "vesznek", "vett", "veszi", "veszik"},
    {"keres", "keres", "keresnek", "keresett", "keresi", "keresik"},
    {"szeret", "szeret", "szeretnek", "szeretett", "szereti", "szeretik"},
    {"tanul", "tanul", "tanulnak", "tanult", "tanulja", "tanulják"},
    {"vár", "vár", "várnak", "várt", "várja", "várják"},
    {"hoz", "hoz", "hoznak", "hozott", "hozza", "hozzák"},
    {"fut", "fut", "futnak", "futott", nullptr, nullptr},
    {"dolgozik", "dolgozik", "dolgoznak", "dolgozott", nullptr, nullptr},
    {"alszik", "alszik", "alszanak", "aludt", nullptr, nullptr},
    {"ül", "ül", "ülnek", "ült", nullptr, nullptr},
    {"játszik", "játszik", "játszanak", "játszott", nullptr, nullptr},
};

constexpr const char* kNouns[] = {
    "alma",  "kutya", "iskola", "autó",  "kávé",   "asztal", "tanár",
    "város", "kert",  "ember",  "gyerek", "könyv", "kép",    "bolt",
    "újság", "szék",  "virág",  "barát", "film",   "ablak",  "szoba",
    "cipő",  "munka", "levél",  "óra",   "lány",   "fiú",    "ajtó"};

constexpr const char* kAdjectives[] = {"nagy", "kicsi", "piros", "szép", "új",
                                       "régi", "fontos", "jó", "hosszú", "magyar"};
constexpr const char* kAdverbs[] = {"ma", "tegnap", "gyorsan", "itt", "holnap", "mindig"};
constexpr const char* kSurnames[] = {"Kovács", "Szabó", "Tóth", "Horváth",
                                     "Kiss", "Varga", "Molnár", "Nagy"};
constexpr const char* kGivenNames[] = {"János", "Anna", "Péter", "Katalin",
                                       "Gábor", "Éva", "Zoltán", "Mária"};

struct City {
  const char* name;
  Case locative;
};
constexpr City kCities[] = {{"Budapest", Case::kSup}, {"Szeged", Case::kSup},
                            {"Debrecen", Case::kIne}, {"Pécs", Case::kSup},
                            {"Győr", Case::kIne},     {"Miskolc", Case::kSup},
                            {"Eger", Case::kIne},     {"Sopron", Case::kIne}};

struct Org {
  std::vector<const char*> words;
  const char* acc_last;
};
const Org kOrgs[] = {{{"MOL"}, "MOL-t"},
                     {{"OTP"}, "OTP-t"},
                     {{"Magyar", "Telekom"}, "Telekomot"},
                     {{"Richter", "Gedeon"}, "Gedeont"}};

struct GenToken {
  std::string text;
  std::string upos;
  std::string feats;
  std::string lemma;
  int head = -1;  // index within the sentence, -1 = ROOT
  std::string deprel;
  bool space_after = true;
};

// A contiguous phrase; heads are phrase-relative, -1 marks the phrase head.
struct Phrase {
  std::vector<GenToken> tokens;
  std::vector<EntitySpan> entities;  // phrase-relative
  bool definite = false;
  bool plural = false;
  std::string deprel;
};

class SentenceBuilder {
 public:
  explicit SentenceBuilder(Rng& rng) : rng_(rng) {}

  bool chance(double p) { return rng_.uniform() < p; }
  template <typename T, std::size_t N>
  const T& choose(const T (&items)[N]) {
    return items[rng_.below(N)];
  }

  Phrase noun_phrase(Case c, bool allow_plural, bool allow_numeral) {
    Phrase p;
    const std::string lemma = choose(kNouns);
    const bool numeral = allow_numeral && c != Case::kNom && chance(0.15);
    const bool plural = !numeral && allow_plural && chance(0.25);
    p.plural = plural;
    int det = -1;
    if (!numeral && chance(0.65)) {
      const bool def = chance(0.6);
      p.definite = def;
      det = 0;
      p.tokens.push_back({def ? "a" : "egy", "DET", def ? "Definite=Def|PronType=Art"
                                                        : "Definite=Ind|PronType=Art",
                          def ? "a" : "egy", 0, "det"});
    }
    if (numeral) {
      std::string n = chance(0.5) ? std::to_string(2 + rng_.below(30))
                                  : std::string(chance(0.5) ? "két" : "három");
      const std::string lemma_n = n == "két" ? "kettő" : n;
      p.tokens.push_back({n, "NUM", "Case=Nom|NumType=Card|Number=Sing", lemma_n, 0,
                          "nummod"});
    }
    if (chance(0.4)) {
      if (chance(0.2)) {
        p.tokens.push_back({"nagyon", "ADV", "_", "nagyon", 0, "advmod"});
      }
      const std::size_t adj = p.tokens.size();
      p.tokens.push_back({choose(kAdjectives), "ADJ", "Case=Nom|Degree=Pos|Number=Sing",
                          "", 0, "amod"});
      p.tokens[adj].lemma = p.tokens[adj].text;
      if (adj > 0 && p.tokens[adj - 1].upos == "ADV") p.tokens[adj - 1].head = static_cast<int>(adj) + 100;
    }
    const Inflected form = inflect_noun(lemma, c, plural);
    p.tokens.push_back({form.text, "NOUN", form.feats, lemma, -1, ""});
    // "az" before a vowel.
    if (det == 0 && p.definite && p.tokens.size() > 1 && ends_in_vowel(utf8::prefix(p.tokens[1].text, 1))) {
      p.tokens[0].text = "az";
    }
    const int head = static_cast<int>(p.tokens.size()) - 1;
    for (int i = 0; i < head; ++i) {
      GenToken& t = p.tokens[static_cast<std::size_t>(i)];
      // advmod of the adjective was marked with an offset of 100.
      t.head = t.head >= 100 ? t.head - 100 : head;
    }
    return p;
  }

  Phrase person(Case c) {
    Phrase p;
    p.definite = true;
    const bool title = chance(0.15);
    if (title) p.tokens.push_back({"dr.", "NOUN", "Case=Nom|Number=Sing", "dr.", 0, "nmod:att"});
    const std::string surname = choose(kSurnames);
    const std::string given = choose(kGivenNames);
    const int first = static_cast<int>(p.tokens.size());
    const Inflected last = inflect_noun(given, c, false);
    p.tokens.push_back({surname, "PROPN", "Case=Nom|Number=Sing", surname, -1, ""});
    p.tokens.push_back({last.text, "PROPN", last.feats, given, first, "flat:name"});
    if (title) p.tokens[0].head = first;
    p.entities.push_back({static_cast<std::size_t>(first), p.tokens.size(), "PER"});
    return p;
  }

  Phrase organization(bool accusative) {
    Phrase p;
    p.definite = true;
    const Org& org = choose(kOrgs);
    for (std::size_t i = 0; i < org.words.size(); ++i) {
      const bool last = i + 1 == org.words.size();
      std::string text = last && accusative ? org.acc_last : org.words[i];
      std::string feats = std::string("Case=") + (last && accusative ? "Acc" : "Nom") +
                          "|Number=Sing";
      p.tokens.push_back({text, "PROPN", feats, org.words[i], i == 0 ? -1 : 0,
                          i == 0 ? "" : "flat:name"});
    }
    p.entities.push_back({0, p.tokens.size(), "ORG"});
    return p;
  }

  Phrase location() {
    Phrase p;
    if (chance(0.5)) {
      const City& city = choose(kCities);
      const Inflected form = inflect_noun(city.name, city.locative, false);
      p.tokens.push_back({form.text, "PROPN", form.feats, city.name, -1, ""});
      p.entities.push_back({0, 1, "LOC"});
    } else {
      p = noun_phrase(chance(0.5) ? Case::kIne : Case::kSup, true, false);
    }
    p.deprel = "obl";
    return p;
  }

  Phrase subject(bool* plural) {
    Phrase p;
    const double r = rng_.uniform();
    if (r < 0.2) {
      const int which = static_cast<int>(rng_.below(3));
      static const char* texts[] = {"ő", "ez", "ők"};
      static const char* feats[] = {"Case=Nom|Number=Sing|Person=3|PronType=Prs",
                                    "Case=Nom|Number=Sing|Person=3|PronType=Dem",
                                    "Case=Nom|Number=Plur|Person=3|PronType=Prs"};
      static const char* lemmas[] = {"ő", "ez", "ő"};
      p.tokens.push_back({texts[which], "PRON", feats[which], lemmas[which], -1, ""});
      p.plural = which == 2;
    } else if (r < 0.45) {
      p = person(Case::kNom);
    } else if (r < 0.55) {
      p = organization(false);
    } else {
      p = noun_phrase(Case::kNom, true, false);
    }
    p.deprel = "nsubj";
    *plural = p.plural;
    return p;
  }

  Phrase object() {
    Phrase p;
    const double r = rng_.uniform();
    if (r < 0.15) {
      p = person(Case::kAcc);
    } else if (r < 0.25) {
      p = organization(true);
    } else {
      p = noun_phrase(Case::kAcc, true, true);
      if (chance(0.15)) {
        // Coordinated object: first conjunct heads the rest.
        Phrase second = noun_phrase(Case::kAcc, false, false);
        const int offset = static_cast<int>(p.tokens.size()) + 1;
        int first_head = 0;
        for (std::size_t i = 0; i < p.tokens.size(); ++i) {
          if (p.tokens[i].head == -1) first_head = static_cast<int>(i);
        }
        p.tokens.push_back({"és", "CCONJ", "_", "és", 0, "cc"});
        int second_head = 0;
        for (std::size_t i = 0; i < second.tokens.size(); ++i) {
          if (second.tokens[i].head == -1) second_head = static_cast<int>(i);
        }
        p.tokens.back().head = offset + second_head;
        for (GenToken t : second.tokens) {
          if (t.head == -1) {
            t.head = first_head;
            t.deprel = "conj";
          } else {
            t.head += offset;
          }
          p.tokens.push_back(t);
        }
      }
    }
    p.deprel = "obj";
    return p;
  }

  Phrase time_phrase() {
    Phrase p;
    if (chance(0.5)) {
      const int year = 1950 + static_cast<int>(rng_.below(75));
      const int last = year % 10;
      const bool back = last == 3 || last == 6 || last == 8;
      p.tokens.push_back({std::to_string(year) + (back ? "-ban" : "-ben"), "NUM",
                          "Case=Ine|NumType=Card|Number=Sing", std::to_string(year), -1, ""});
      p.deprel = "obl";
    } else {
      const std::string adv = choose(kAdverbs);
      p.tokens.push_back({adv, "ADV", "_", adv, -1, ""});
      p.deprel = "advmod";
    }
    return p;
  }

  // One clause: constituents around a finite verb, in random order.
  std::vector<GenToken> clause(std::vector<EntitySpan>& entities, std::size_t base,
                               int* verb_index) {
    bool plural = false;
    std::vector<Phrase> parts;
    parts.push_back(subject(&plural));
    const Verb& verb = choose(kVerbs);
    const bool transitive = verb.def_sg != nullptr && chance(0.8);
    bool definite = false;
    if (transitive) {
      parts.push_back(object());
      definite = parts.back().definite;
    }
    if (chance(0.45)) parts.push_back(location());
    if (chance(0.35)) parts.push_back(time_phrase());
    if (chance(0.2)) {
      Phrase dat = noun_phrase(Case::kDat, false, false);
      dat.deprel = "obl";
      parts.push_back(dat);
    }

    const bool past = !definite && !plural && chance(0.3);
    std::string form;
    std::string feats;
    if (past) {
      form = verb.past_sg;
      feats = "Definite=Ind|Mood=Ind|Number=Sing|Person=3|Tense=Past|VerbForm=Fin|Voice=Act";
    } else {
      form = definite ? (plural ? verb.def_pl : verb.def_sg) : (plural ? verb.pres_pl : verb.pres_sg);
      feats = std::string("Definite=") + (definite ? "Def" : "Ind") +
              "|Mood=Ind|Number=" + (plural ? "Plur" : "Sing") +
              "|Person=3|Tense=Pres|VerbForm=Fin|Voice=Act";
    }
    Phrase v;
    v.tokens.push_back({form, "VERB", feats, verb.lemma, -1, ""});

    // Subject-first orders dominate; the verb lands anywhere.
    std::vector<std::size_t> order(parts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (chance(0.5)) rng_.shuffle(order);
    const std::size_t verb_slot = rng_.below(parts.size() + 1);

    std::vector<GenToken> out;
    std::vector<std::pair<std::size_t, int>> attach;  // token -> phrase head
    for (std::size_t slot = 0; slot <= parts.size(); ++slot) {
      if (slot == verb_slot) {
        *verb_index = static_cast<int>(out.size());
        out.push_back(v.tokens[0]);
      }
      if (slot == parts.size()) break;
      const Phrase& p = parts[order[slot]];
      const int offset = static_cast<int>(out.size());
      for (const EntitySpan& e : p.entities) {
        entities.push_back({base + static_cast<std::size_t>(offset) + e.start,
                            base + static_cast<std::size_t>(offset) + e.end, e.label});
      }
      for (GenToken t : p.tokens) {
        if (t.head == -1) {
          t.deprel = p.deprel;
          t.head = -2;  // verb, resolved below
        } else {
          t.head += offset;
        }
        out.push_back(t);
      }
    }
    for (GenToken& t : out) {
      if (t.head == -2) t.head = *verb_index;
    }
    return out;
  }

  std::vector<GenToken> sentence(std::vector<EntitySpan>& entities) {
    int verb = 0;
    std::vector<GenToken> out = clause(entities, 0, &verb);
    out[static_cast<std::size_t>(verb)].head = -1;
    out[static_cast<std::size_t>(verb)].deprel = "root";
    if (chance(0.2)) {
      out.back().space_after = false;
      const int comma = static_cast<int>(out.size());
      out.push_back({",", "PUNCT", "_", ",", 0, "punct"});
      const bool de = chance(0.5);
      out.push_back({de ? "de" : "és", "CCONJ", "_", de ? "de" : "és", 0, "cc"});
      const std::size_t base = out.size();
      int verb2 = 0;
      std::vector<GenToken> second = clause(entities, base, &verb2);
      const int v2 = static_cast<int>(base) + verb2;
      out[static_cast<std::size_t>(comma)].head = v2;
      out[static_cast<std::size_t>(comma) + 1].head = v2;
      for (GenToken t : second) {
        t.head += static_cast<int>(base);
        out.push_back(t);
      }
      out[static_cast<std::size_t>(v2)].head = verb;
      out[static_cast<std::size_t>(v2)].deprel = "conj";
    }
    out.back().space_after = false;
    const double r = rng_.uniform();
    const char* end = r < 0.85 ? "." : r < 0.93 ? "!" : "?";
    out.push_back({end, "PUNCT", "_", end, verb, "punct"});
    // Sentence-initial capital; lemmas keep their dictionary case.
    std::u32string first = utf8::decode(out[0].text);
    first[0] = utf8::to_upper(first[0]);
    out[0].text = utf8::encode(first);
    return out;
  }

 private:
  Rng& rng_;
};

}  // namespace

std::vector<AnnotatedDoc> generate_corpus(const CorpusOptions& options) {
  Rng rng(options.seed);
  SentenceBuilder builder(rng);
  std::vector<AnnotatedDoc> docs;
  for (std::size_t d = 0; d < options.docs; ++d) {
    AnnotatedDoc doc;
    for (std::size_t s = 0; s < options.sentences_per_doc; ++s) {
      std::vector<EntitySpan> spans;
      const std::vector<GenToken> sent = builder.sentence(spans);
      const std::size_t base = doc.tokens.size();
      const auto tags = spans_to_bilou(spans, sent.size());
      const bool last_sentence = s + 1 == options.sentences_per_doc;
      for (std::size_t i = 0; i < sent.size(); ++i) {
        const GenToken& g = sent[i];
        std::string ws = g.space_after ? " " : "";
        if (i + 1 == sent.size()) {
          ws = last_sentence ? "\n" : (builder.chance(0.1) ? "\n" : " ");
        }
        Token& t = doc.append_token(g.text, ws);
        t.sent_start = i == 0 ? SentStart::kYes : SentStart::kNo;
        t.upos = g.upos;
        t.feats = MorphFeats::parse(g.feats);
        t.lemma = g.lemma;
        t.head = g.head < 0 ? Attachment::root()
                            : Attachment::to(base + static_cast<std::size_t>(g.head));
        t.deprel = g.deprel;
        t.ent = tags[i].str();
      }
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<AnnotatedDoc> split_sentences(const std::vector<AnnotatedDoc>& docs) {
  std::vector<AnnotatedDoc> out;
  for (const AnnotatedDoc& doc : docs) {
    for (const SentenceRange& r : sentence_ranges(doc)) {
      AnnotatedDoc s;
      for (std::size_t i = r.begin; i < r.end; ++i) {
        const Token& src = doc.tokens[i];
        Token& t = s.append_token(src.text, i + 1 == r.end ? "" : src.trailing_ws);
        const std::size_t index = t.index;
        const std::size_t start = t.char_start;
        const std::size_t end = t.char_end;
        const std::string ws = t.trailing_ws;
        t = src;
        t.index = index;
        t.char_start = start;
        t.char_end = end;
        t.trailing_ws = ws;
        if (src.head && !src.head->is_root()) t.head = Attachment::to(src.head->index() - r.begin);
      }
      s.tokens[0].sent_start = SentStart::kYes;
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::size_t count_tokens(const std::vector<AnnotatedDoc>& docs) {
  std::size_t n = 0;
  for (const AnnotatedDoc& d : docs) n += d.size();
  return n;
}

std::size_t count_sentences(const std::vector<AnnotatedDoc>& docs) {
  std::size_t n = 0;
  for (const AnnotatedDoc& d : docs) n += sentence_ranges(d).size();
  return n;
}

std::vector<VectorRow> synthetic_vector_rows(const std::vector<AnnotatedDoc>& docs,
                                            std::size_t dim, std::uint64_t seed,
                                            std::size_t extra_words) {
  Rng rng(seed);
  auto random_vector = [&](double scale) {
    std::vector<double> v(dim);
    for (double& x : v) x = scale * rng.normal();
    return v;
  };
  std::map<std::string, std::vector<double>> lemma_dirs;
  std::map<std::string, std::vector<double>> upos_dirs;
  std::map<std::string, std::vector<float>> words;
  for (const AnnotatedDoc& doc : docs) {
    for (const Token& t : doc.tokens) {
      const std::string form = utf8::to_lower(t.text);
      if (words.contains(form)) continue;
      const std::string lemma = t.lemma ? utf8::to_lower(*t.lemma) : form;
      const std::string upos = t.upos ? *t.upos : "X";
      if (!lemma_dirs.contains(lemma)) lemma_dirs[lemma] = random_vector(0.3);
      if (!upos_dirs.contains(upos)) upos_dirs[upos] = random_vector(0.3);
      const auto noise = random_vector(0.05);
      std::vector<float> v(dim);
      for (std::size_t k = 0; k < dim; ++k) {
        v[k] = static_cast<float>(lemma_dirs[lemma][k] + upos_dirs[upos][k] + noise[k]);
      }
      words[form] = std::move(v);
    }
  }
  std::vector<VectorRow> out(words.begin(), words.end());
  std::vector<float> v(dim);
  for (std::size_t i = 0; i < extra_words; ++i) {
    for (float& x : v) x = static_cast<float>(0.3 * rng.normal());
    out.emplace_back("filler" + std::to_string(i), v);
  }
  return out;
}

std::shared_ptr<StaticVectors> synthetic_vectors(const std::vector<AnnotatedDoc>& docs,
                                                 std::size_t dim, std::uint64_t seed,
                                                 std::size_t extra_words) {
  auto out = std::make_shared<StaticVectors>(dim);
  for (const auto& [word, v] : synthetic_vector_rows(docs, dim, seed, extra_words)) {
    out->add(word, v);
  }
  return out;
}

std::string vectors_text(const std::vector<VectorRow>& rows, std::size_t dim) {
  std::string out = std::to_string(rows.size()) + " " + std::to_string(dim) + "\n";
  char buffer[32];
  for (const auto& [word, v] : rows) {
    out += word;
    for (float x : v) {
      const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, x);
      out += ' ';
      out.append(buffer, end);
    }
    out += '\n';
  }
  return out;
}

bool corrupt_field(AnnotatedDoc& d, const AnnotatedDoc& gold, std::size_t i, Rng& rng,
                   bool allow_merge) {
  Token& t = d.tokens[i];
  const Token& g = gold.tokens[i];
  switch (rng.below(6)) {
    case 0: t.upos = *g.upos + "X"; return true;
    case 1: {
      MorphFeats f = *g.feats;
      f.set("Corrupt", "Yes");
      t.feats = f;
      return true;
    }
    case 2: t.lemma = *g.lemma + "x"; return true;
    case 3: t.deprel = *g.deprel + ":x"; return true;
    case 4: {
      const std::size_t h = rng.below(d.size() + 1);
      const Attachment a = h == d.size() ? Attachment::root() : Attachment::to(h);
      if (a == *g.head || (!a.is_root() && a.index() == i)) return false;
      t.head = a;
      return true;
    }
    default:
      if (i == 0 || t.sent_start != g.sent_start) return false;
      if (g.is_sent_start() && !allow_merge) return false;
      t.sent_start = g.is_sent_start() ? SentStart::kNo : SentStart::kYes;
      return true;
  }
}

AnnotatedDoc strip_annotations(const AnnotatedDoc& doc) {
  AnnotatedDoc out;
  out.source_text = doc.source_text;
  out.leading_ws = doc.leading_ws;
  for (const Token& src : doc.tokens) {
    Token t;
    t.index = src.index;
    t.text = src.text;
    t.trailing_ws = src.trailing_ws;
    t.char_start = src.char_start;
    t.char_end = src.char_end;
    t.sent_start = src.index == 0 ? SentStart::kYes : SentStart::kUnset;
    out.tokens.push_back(std::move(t));
  }
  return out;
}

}  // namespace morphpipe::testing
