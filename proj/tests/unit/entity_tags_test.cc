#include "doctest.h"

#include <functional>

#include "morphpipe/entity_tags.h"
#include "morphpipe/errors.h"

using namespace morphpipe;

namespace {

std::vector<EntityTag> tags(std::initializer_list<const char*> items) {
  std::vector<EntityTag> out;
  for (const char* s : items) out.push_back(*EntityTag::parse(s));
  return out;
}

// All tag strings over two classes.
std::vector<EntityTag> alphabet() {
  std::vector<EntityTag> out{EntityTag::outside()};
  for (const char* label : {"PER", "LOC"}) {
    for (const char* p : {"B-", "I-", "L-", "U-"}) {
      out.push_back(*EntityTag::parse(std::string(p) + label));
    }
  }
  return out;
}

void for_each_sequence(const std::vector<EntityTag>& symbols, std::size_t length,
                       const std::function<void(const std::vector<EntityTag>&)>& fn) {
  std::vector<EntityTag> seq(length);
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == length) {
      fn(seq);
      return;
    }
    for (const EntityTag& t : symbols) {
      seq[i] = t;
      rec(i + 1);
    }
  };
  rec(0);
}

}  // namespace

TEST_CASE("tag parsing") {
  CHECK(EntityTag::parse("O") == EntityTag::outside());
  CHECK(EntityTag::parse("E-PER")->str() == "L-PER");
  CHECK(EntityTag::parse("S-PER")->str() == "U-PER");
  CHECK_FALSE(EntityTag::parse("X-PER").has_value());
  CHECK_FALSE(EntityTag::parse("B-").has_value());
  CHECK_FALSE(EntityTag::parse("").has_value());
}

TEST_CASE("IOB2 and BILOU decoding examples") {
  CHECK(bilou_to_spans(tags({"B-PER", "O"})) == std::vector<EntitySpan>{{0, 1, "PER"}});
  CHECK(bilou_to_spans(tags({"B-LOC", "I-LOC"})) == std::vector<EntitySpan>{{0, 2, "LOC"}});
  CHECK(bilou_to_spans(tags({"I-PER"})) == std::vector<EntitySpan>{{0, 1, "PER"}});
  CHECK(bilou_to_spans(tags({"O", "I-PER", "I-LOC"})) ==
        std::vector<EntitySpan>{{1, 2, "PER"}, {2, 3, "LOC"}});
  CHECK(bilou_to_spans(tags({"B-PER", "I-PER", "L-PER", "U-LOC"})) ==
        std::vector<EntitySpan>{{0, 3, "PER"}, {3, 4, "LOC"}});
}

TEST_CASE("encode then decode is the identity on every valid sequence up to length 4") {
  const auto symbols = alphabet();
  std::size_t valid = 0;
  for (std::size_t n = 0; n <= 4; ++n) {
    for_each_sequence(symbols, n, [&](const std::vector<EntityTag>& seq) {
      if (!is_valid_bilou(seq)) return;
      ++valid;
      const auto spans = bilou_to_spans(seq);
      CHECK(spans_to_bilou(spans, n) == seq);
    });
  }
  // Each valid string starts with O, a U of either class, or a span of
  // length >= 2 of either class.
  std::vector<std::size_t> count(5, 0);
  count[0] = 1;
  for (std::size_t n = 1; n <= 4; ++n) {
    count[n] = 3 * count[n - 1];
    for (std::size_t len = 2; len <= n; ++len) count[n] += 2 * count[n - len];
  }
  CHECK(valid == count[0] + count[1] + count[2] + count[3] + count[4]);
}

TEST_CASE("span encoding round trip over random span sets") {
  for (std::size_t n = 1; n <= 6; ++n) {
    // Every way to cut n tokens into O tokens and spans of one class.
    for (std::size_t mask = 0; mask < (1u << (2 * n)); ++mask) {
      std::vector<EntitySpan> spans;
      std::size_t i = 0;
      bool ok = true;
      std::size_t bits = mask;
      while (i < n) {
        const std::size_t code = bits & 3;
        bits >>= 2;
        if (code == 0) {
          ++i;
          continue;
        }
        const std::size_t len = code;
        if (i + len > n) {
          ok = false;
          break;
        }
        spans.push_back({i, i + len, len == 2 ? "LOC" : "PER"});
        i += len;
      }
      if (!ok) continue;
      const auto encoded = spans_to_bilou(spans, n);
      CHECK(is_valid_bilou(encoded));
      CHECK(bilou_to_spans(encoded) == spans);
    }
  }
}

TEST_CASE("repair decoder is total over all 5^4 single-class sequences") {
  const std::vector<EntityTag> symbols = tags({"O", "B-PER", "I-PER", "L-PER", "U-PER"});
  std::size_t seen = 0;
  for_each_sequence(symbols, 4, [&](const std::vector<EntityTag>& seq) {
    ++seen;
    const auto spans = bilou_to_spans(seq);
    std::size_t last_end = 0;
    for (const EntitySpan& s : spans) {
      CHECK(s.start < s.end);
      CHECK(s.start >= last_end);
      CHECK(s.end <= 4);
      last_end = s.end;
    }
    // Decoding the re-encoding is a fixed point.
    CHECK(bilou_to_spans(spans_to_bilou(spans, 4)) == spans);
  });
  CHECK(seen == 625);
}

TEST_CASE("transition grammar") {
  const EntityTag b = *EntityTag::parse("B-PER");
  const EntityTag i = *EntityTag::parse("I-PER");
  const EntityTag l = *EntityTag::parse("L-PER");
  const EntityTag u = *EntityTag::parse("U-PER");
  const EntityTag il = *EntityTag::parse("I-LOC");
  const EntityTag o = EntityTag::outside();
  CHECK(bilou_transition_allowed(std::nullopt, b));
  CHECK_FALSE(bilou_transition_allowed(std::nullopt, i));
  CHECK(bilou_transition_allowed(b, i));
  CHECK(bilou_transition_allowed(i, l));
  CHECK_FALSE(bilou_transition_allowed(b, il));
  CHECK_FALSE(bilou_transition_allowed(b, o));
  CHECK(bilou_transition_allowed(l, u));
  CHECK(bilou_transition_allowed(o, b));
  CHECK_FALSE(is_valid_bilou({b}));
  CHECK(is_valid_bilou({b, l}));
}

TEST_CASE("NER TSV reading and writing") {
  const auto sents = read_ner_tsv("János\tB-PER\nBudapesten\tO\n\nNew\tB-LOC\nYork\tI-LOC\n");
  REQUIRE(sents.size() == 2);
  CHECK(sents[0].spans == std::vector<EntitySpan>{{0, 1, "PER"}});
  CHECK(sents[1].spans == std::vector<EntitySpan>{{0, 2, "LOC"}});
  const std::string written = write_ner_tsv(sents);
  CHECK(written.find("János\tU-PER") != std::string::npos);
  CHECK(written.find("York\tL-LOC") != std::string::npos);
  CHECK(read_ner_tsv(written) == sents);
  CHECK(read_ner_tsv("").empty());
  try {
    read_ner_tsv("a\tO\nb\tQ-PER\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(read_ner_tsv("a b c\n"), ParseError);
}

TEST_CASE("NER sentences convert to documents and back") {
  NerSentence s{{"Kovács", "János", "Szegeden", "dolgozik", "."}, {{0, 2, "PER"}, {2, 3, "LOC"}}};
  const AnnotatedDoc doc = doc_from_ner_sentence(s);
  CHECK(doc.tokens[0].ent == "B-PER");
  CHECK(doc.tokens[2].ent == "U-LOC");
  CHECK(doc.tokens[3].ent == "O");
  CHECK(ner_sentence_from_doc(doc) == s);
}
