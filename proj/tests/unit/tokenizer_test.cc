#include "doctest.h"

#include "morphpipe/errors.h"
#include "morphpipe/nn.h"
#include "morphpipe/tokenizer.h"
#include "morphpipe/utf8.h"
#include "synthetic.h"

using namespace morphpipe;

namespace {

std::vector<std::string> texts(const AnnotatedDoc& doc) {
  std::vector<std::string> out;
  for (const Token& t : doc.tokens) out.push_back(t.text);
  return out;
}

std::vector<std::string> tok(std::string_view text) {
  return texts(tokenize(text, default_rules()));
}

using Words = std::vector<std::string>;

}  // namespace

TEST_CASE("documented splits") {
  CHECK(tok("").empty());
  CHECK(tok("   \n").empty());
  CHECK(tok("(alma)") == Words{"(", "alma", ")"});
  CHECK(tok("Dr. Kovács 2021-ben.") == Words{"Dr.", "Kovács", "2021-ben", "."});
  CHECK(tok("Ez jó.") == Words{"Ez", "jó", "."});
  CHECK(tok("stb.)") == Words{"stb.", ")"});
  CHECK(tok("12%") == Words{"12", "%"});
}

TEST_CASE("further splits") {
  CHECK(tok("„Igen”, mondta.") == Words{"„", "Igen", "”", ",", "mondta", "."});
  CHECK(tok("Mi?!") == Words{"Mi", "?", "!"});
  CHECK(tok("kb. 3 km-re") == Words{"kb.", "3", "km-re"});
  CHECK(tok("2021. május 3.") == Words{"2021.", "május", "3."});
  CHECK(tok("vége...") == Words{"vége", "..."});
  CHECK(tok("észak-déli") == Words{"észak-déli"});
  CHECK(tok("a/b") == Words{"a/b"});
  CHECK(tok("Pl. ez") == Words{"Pl.", "ez"});
  CHECK(tok("PL. ez") == Words{"PL", ".", "ez"});
}

TEST_CASE("rule file parsing") {
  const TokenizerRules rules = TokenizerRules::parse(
      "# comment\n[prefix]\n(\n[suffix]\nclass ).\n[abbrev]\nu.\n\\d.\n[exception]\n"
      "vmi.\tvmi .\n");
  CHECK(rules.prefixes.size() == 1);
  CHECK(rules.suffixes.size() == 1);
  CHECK(rules.abbreviation_count() == 2);
  CHECK(rules.is_abbreviation("U."));
  CHECK(rules.is_abbreviation("123."));
  CHECK_FALSE(rules.is_abbreviation("12a."));
  CHECK(texts(tokenize("(vmi.)", rules)) == Words{"(", "vmi", ".", ")"});
  CHECK(TokenizerRules::parse(rules.str()).str() == rules.str());

  CHECK_THROWS_AS(TokenizerRules::parse("x\n"), ParseError);
  CHECK_THROWS_AS(TokenizerRules::parse("[abbrev]\nfoo\n"), ParseError);
  CHECK_THROWS_AS(TokenizerRules::parse("[exception]\nab\ta c\n"), ParseError);
  CHECK_THROWS_AS(TokenizerRules::parse("[exception]\nab\n"), ParseError);
}

TEST_CASE("shipped rules") {
  const TokenizerRules& rules = default_rules();
  CHECK(rules.abbreviation_count() >= 200);
  for (const char* a : {"dr.", "kb.", "pl.", "stb."}) CHECK(rules.is_abbreviation(a));
  for (const std::string& a : rules.abbreviation_entries()) CHECK(a.back() == '.');
  for (const auto& [chunk, pieces] : rules.exceptions) {
    std::string joined;
    for (const std::string& p : pieces) joined += p;
    CHECK(joined == chunk);
  }
  CHECK(TokenizerRules::parse(rules.str()).str() == rules.str());
}

TEST_CASE("detokenization identity, no empty tokens and idempotence on random text") {
  const std::u32string alphabet =
      U"aábcdeéfghiíjklmnoóöőpqrstuúüűvwxyzAÁEÉKLMNOÖ0123456789"
      U".,;:!?()[]{}\"'„”«»-–—/%…*§ \n\t  αβγЖж漢字😀";
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    std::u32string text;
    const std::size_t len = rng.below(40);
    for (std::size_t i = 0; i < len; ++i) text += alphabet[rng.below(alphabet.size())];
    const std::string utf = utf8::encode(text);
    const AnnotatedDoc doc = tokenize(utf, default_rules());
    CHECK(doc.detokenize() == utf);
    CHECK(check_invariants(doc).empty());
    for (const Token& t : doc.tokens) CHECK_FALSE(t.text.empty());

    std::string joined;
    for (const Token& t : doc.tokens) {
      if (!joined.empty()) joined += ' ';
      joined += t.text;
    }
    CHECK(texts(tokenize(joined, default_rules())) == texts(doc));
  }
}

TEST_CASE("invalid UTF-8 still round-trips") {
  const std::string bad = "ab\xff\xfe c\xc3";
  const AnnotatedDoc doc = tokenize(bad, default_rules());
  CHECK(doc.detokenize() == bad);
  CHECK(doc.size() == 2);
}

TEST_CASE("synthetic corpus text tokenizes to its gold tokens") {
  testing::CorpusOptions options;
  options.seed = 3;
  options.docs = 20;
  for (const AnnotatedDoc& gold : testing::generate_corpus(options)) {
    const AnnotatedDoc doc = tokenize(gold.detokenize(), default_rules());
    CHECK(texts(doc) == texts(gold));
  }
}
