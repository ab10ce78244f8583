#include <regex>

#include "doctest.h"
#include "helpers.hpp"
#include "kidex/error.hpp"
#include "kidex/generator.hpp"

using namespace kidex;

namespace {

std::map<std::string, std::string> tree(const testing::fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : testing::fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[testing::fs::relative(e.path(), root).string()] = testing::slurp(e.path());
  }
  return out;
}

}  // namespace

TEST_CASE("one clean document") {
  const auto docs = gen::generate_corpus({1, 42, 0.0});
  REQUIRE(docs.size() == 1);
  const auto& d = docs[0];
  CHECK(d.text.doc_id == "kid_00001");
  CHECK(d.tables.size() == 3);
  for (const auto& t : d.tables) CHECK(t.extracted);
  bool isin = false;
  for (const auto& f : d.fields) {
    if (f.field == "ISIN") {
      isin = true;
      CHECK(std::regex_match(f.value, std::regex("[A-Za-z][A-Za-z][0-9]{10}")));
    }
  }
  CHECK(isin);
  for (const auto& n : d.noise) {
    CHECK(n.dropped_anchor_cells == 0);
    CHECK(n.confused_chars == 0);
    CHECK_FALSE(n.expected_missing);
  }
  for (const auto& page : d.masks) {
    for (const auto& det : page.detections) {
      CHECK(det.bbox.valid());
      CHECK(det.bbox.right <= page.page_width);
      CHECK(det.bbox.bottom <= page.page_height);
    }
  }
}

TEST_CASE("content does not depend on the noise level") {
  const auto clean = gen::generate_document(5, 7, 0.0);
  const auto noisy = gen::generate_document(5, 7, 0.6);
  CHECK(clean.text.pages == noisy.text.pages);
  CHECK(clean.fields == noisy.fields);
  CHECK(clean.tables == noisy.tables);
  CHECK(clean.masks.size() == noisy.masks.size());
}

TEST_CASE("noise lowers anchor confidence and confuses digits") {
  std::size_t dropped = 0, confused = 0;
  for (const auto& d : gen::generate_corpus({30, 1, 1.0})) {
    for (const auto& n : d.noise) {
      dropped += n.dropped_anchor_cells;
      confused += n.confused_chars;
      CHECK(n.expected_missing == (n.anchor_cells > 0 && n.dropped_anchor_cells == n.anchor_cells));
    }
  }
  CHECK(dropped > 0);
  CHECK(confused > 0);
}

TEST_CASE("invalid options") {
  CHECK_THROWS_AS(gen::generate_corpus({0, 1, 0.0}), Error);
  CHECK_THROWS_AS(gen::generate_corpus({1, 1, 1.5}), Error);
  CHECK_THROWS_AS(gen::generate_corpus({1, 1, -0.1}), Error);
}

TEST_CASE("same options give identical trees") {
  testing::TempDir a("gen_a"), b("gen_b");
  gen::gen_corpus({6, 42, 0.3}, a.str());
  gen::gen_corpus({6, 42, 0.3}, b.str());
  const auto ta = tree(a.path());
  CHECK(ta == tree(b.path()));
  CHECK(ta.count("docs/kid_00001.json"));
  CHECK(ta.count("gold/fields.jsonl"));
  CHECK(ta.count("gold/tables.jsonl"));
  CHECK(ta.count("gold/noise.jsonl"));
  CHECK(ta.count("masks/kid_00001_p2.json"));

  testing::TempDir c("gen_c");
  gen::gen_corpus({6, 43, 0.3}, c.str());
  CHECK(tree(c.path()) != ta);
}

TEST_CASE("unwritable destination") {
  testing::TempDir dir("gen_file");
  testing::write_text(dir.path() / "blocker", "x");
  CHECK_THROWS_AS(gen::gen_corpus({1, 1, 0.0}, dir.str("blocker")), IoError);
}
