#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "cmall/search.hpp"

using namespace cmall;

namespace {

const CalculusVariant CM = CalculusVariant::CMALL;
const CalculusVariant NV = CalculusVariant::NaiveLazyMLL;

SearchOutcome run(CalculusVariant v, const std::string& text, int depth = 12) {
  SearchLimits lim;
  lim.max_depth = depth;
  return prove(v, parse_multisequent(text), lim);
}

void expect_proved(CalculusVariant v, const std::string& text, int depth = 12) {
  CAPTURE(text);
  SearchOutcome oc = run(v, text, depth);
  REQUIRE(oc.kind == OutcomeKind::Proved);
  REQUIRE(oc.proof.has_value());
  ProofStats st = check_proof(v, *oc.proof);
  CHECK(st.cut_count == 0);
  CHECK(isomorphic(oc.proof->conclusion, parse_multisequent(text)));
}

void expect_refuted(CalculusVariant v, const std::string& text, int depth = 12) {
  CAPTURE(text);
  SearchOutcome oc = run(v, text, depth);
  CHECK(oc.kind == OutcomeKind::Refuted);
  CHECK(oc.exhausted);
}

}  // namespace

TEST_CASE("basic provables") {
  expect_proved(CM, "{a, a~}");
  expect_proved(CM, "{1}");
  expect_proved(CM, "{a~ % (a * 1)}");
  expect_proved(CM, "{top, a}");
  expect_proved(CM, "{a~ % b~, a $ b}");
  expect_proved(CM, "{u: a~, v: a % bot}");
  expect_proved(CM, "{1, bot $ bot}");
}

TEST_CASE("basic refutations") {
  expect_refuted(CM, "{a}");
  expect_refuted(CM, "{a, b~}");
  expect_refuted(CM, "{1, bot * bot}");
  expect_refuted(CM, "{a * a~}");
}

TEST_CASE("additives") {
  expect_proved(CM, "{a~ & b~, a + b}");
  expect_proved(CM, "{(a & b)~, a & b}");
  expect_proved(CM, "{a~ + b~, a + b}");  // pick matching sides
  expect_refuted(CM, "{a~ & b~, a & b}", 8);
}

TEST_CASE("modalities") {
  expect_proved(CM, "{a~, a^s $ a^s}");
  expect_proved(CM, "{x: a~^u, y: a^s}");
}

TEST_CASE("naive variant counterexample") {
  // The composed multisequent is unprovable in the naive calculus...
  expect_refuted(NV, "{u: a~, v: a % bot} {u, w: 1 % 1}", 10);
  // ...although both cut hypotheses are provable.
  expect_proved(NV, "{u: a~, v: a % bot}");
  expect_proved(NV, "{u: a~ $ 1, v: a % bot} {u, w: 1 % 1}", 10);
}

TEST_CASE("separability: split-first agrees with direct search") {
  std::vector<std::pair<std::string, std::string>> parts = {
      {"{a, a~}", "{b, b~}"},
      {"{1}", "{c, c~}"},
      {"{a}", "{b, b~}"},        // left part fails
      {"{1, bot $ bot}", "{d~ % d}"},
  };
  for (auto& [l, rtext] : parts) {
    CAPTURE(l);
    CAPTURE(rtext);
    SearchOutcome ol = run(CM, l);
    SearchOutcome orr = run(CM, rtext);
    // Disjoint union: relabel is unnecessary since parse gives fresh ids per call.
    SearchOutcome both = run(CM, l + " " + rtext);
    bool expect = ol.kind == OutcomeKind::Proved && orr.kind == OutcomeKind::Proved;
    CHECK((both.kind == OutcomeKind::Proved) == expect);
  }
}

TEST_CASE("determinism") {
  for (int i = 0; i < 2; ++i) {
    SearchOutcome a = run(CM, "{a~ % b~, a $ b}");
    SearchOutcome b = run(CM, "{a~ % b~, a $ b}");
    REQUIRE(a.proof.has_value());
    REQUIRE(b.proof.has_value());
    CHECK(serialize_proof(*a.proof) == serialize_proof(*b.proof));
  }
}

TEST_CASE("limits yield Unknown, not Refuted") {
  SearchLimits lim;
  lim.max_depth = 1;
  SearchOutcome oc = prove(CM, parse_multisequent("{a~ % b~, a $ b}"), lim);
  CHECK(oc.kind == OutcomeKind::Unknown);
  CHECK_FALSE(oc.exhausted);
  SearchLimits tiny;
  tiny.max_visited = 2;
  SearchOutcome oc2 = prove(CM, parse_multisequent("{a~ % b~, a $ b}"), tiny);
  CHECK(oc2.kind == OutcomeKind::Unknown);
}

TEST_CASE("corpus files") {
  namespace fs = std::filesystem;
  auto tmp = fs::temp_directory_path() / "cmall_corpus_test";
  fs::create_directories(tmp);
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(tmp / name);
    out << body;
    return (tmp / name).string();
  };
  std::vector<std::string> files = {
      write("good.mseq", "#expect proved\n{a, a~}\n"),
      write("bad.mseq", "#expect refuted\n{a}\n"),
      write("naive.mseq", "#expect refuted\n#variant naive\n{u: a~, v: a % bot} {u, w: 1 % 1}\n"),
      write("mismatch.mseq", "#expect refuted\n{1}\n"),
      write("parse_error.mseq", "#expect proved\n{a,,}\n"),
  };
  CorpusReport rep = prove_corpus(CM, files, {});
  REQUIRE(rep.entries.size() == 5);
  CHECK(rep.entries[0].ok);
  CHECK(rep.entries[1].ok);
  CHECK(rep.entries[2].ok);
  CHECK_FALSE(rep.entries[3].ok);
  CHECK_FALSE(rep.entries[4].ok);
  CHECK_FALSE(rep.entries[4].error.empty());
  CHECK_FALSE(rep.all_ok());
  CHECK(rep.render().find("MISMATCH") != std::string::npos);

  CorpusReport empty = prove_corpus(CM, {}, {});
  CHECK(empty.all_ok());
  CHECK(empty.entries.empty());
}
