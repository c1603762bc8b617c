#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cmall/proof.hpp"

using namespace cmall;

namespace {

const CalculusVariant CM = CalculusVariant::CMALL;

ProofTree mk(CalculusVariant v, RuleInstance inst, std::vector<ProofTree> kids) {
  std::vector<Multisequent> premises;
  for (const auto& k : kids) premises.push_back(k.conclusion);
  ForwardResult fr = apply_forward(v, inst, premises);
  return ProofTree{std::move(fr.conclusion), std::move(inst), std::move(kids)};
}

Formula F(const std::string& s) { return parse_formula(s); }

/// The seven-rule derivation of {a~ % b~, a $ b}:
/// two axioms, separation, two derelictions, cpar, par.
ProofTree tensor_to_cpar_proof() {
  ProofTree ax1 = mk(CM, {AxiomInst{F("a"), 0, 1, 0}}, {});
  ProofTree ax2 = mk(CM, {AxiomInst{F("b"), 2, 3, 1}}, {});
  ProofTree sep = mk(CM, {SeparateInst{}}, {ax1, ax2});
  ProofTree d1 = mk(CM, {DerelictInst{1, 1}}, {sep});   // a~ into the b-sequent
  ProofTree d2 = mk(CM, {DerelictInst{3, 0}}, {d1});    // b~ into the a-sequent
  ProofTree cp = mk(CM, {CParInst{0, 2, 4}}, {d2});
  return mk(CM, {ParInst{1, 3, 5}}, {cp});
}

}  // namespace

TEST_CASE("single axiom node") {
  ProofTree ax = mk(CM, {AxiomInst{F("a"), 0, 1, 0}}, {});
  ProofStats st = check_proof(CM, ax);
  CHECK(st.height == 1);
  CHECK(st.cut_count == 0);
  CHECK(st.nodes == 1);
}

TEST_CASE("the tensor-to-cpar derivation checks") {
  ProofTree p = tensor_to_cpar_proof();
  CHECK(isomorphic(p.conclusion, parse_multisequent("{a~ % b~, a $ b}")));
  ProofStats st = check_proof(CM, p);
  CHECK(st.nodes == 7);
  CHECK(st.cut_count == 0);
  CHECK(st.histogram[Rule::Derelict] == 2);
  CHECK(st.histogram[Rule::Axiom] == 2);
  // Logical-height measure: each branch carries its axiom, the cpar and the
  // par; the structural steps are free.
  CHECK(st.height == 3);
}

TEST_CASE("dropping the dereliction steps breaks the cpar node") {
  ProofTree ax1 = mk(CM, {AxiomInst{F("a"), 0, 1, 0}}, {});
  ProofTree ax2 = mk(CM, {AxiomInst{F("b"), 2, 3, 1}}, {});
  ProofTree sep = mk(CM, {SeparateInst{}}, {ax1, ax2});
  // cpar now pairs {a~, a} with {b~, b}: contexts differ.
  ProofTree broken{parse_multisequent("{x: a~, y: b~, a $ b}"), {CParInst{0, 2, 4}}, {sep}};
  CHECK_THROWS_AS(check_proof(CM, broken), CheckError);
}

TEST_CASE("stored conclusions may be renamed copies") {
  ProofTree p = tensor_to_cpar_proof();
  p.conclusion = parse_multisequent("{q: a $ b, p: a~ % b~}");
  CHECK(check_proof(CM, p).nodes == 7);
}

TEST_CASE("wrong stored conclusion is rejected with a diff") {
  ProofTree p = tensor_to_cpar_proof();
  p.conclusion = parse_multisequent("{a~ % b~, a $ a}");
  try {
    check_proof(CM, p);
    FAIL("expected CheckError");
  } catch (const CheckError& e) {
    CHECK(std::string(e.what()).find("par") != std::string::npos);
    CHECK(std::string(e.what()).find("claims") != std::string::npos);
  }
}

TEST_CASE("serialization round-trips") {
  ProofTree p = tensor_to_cpar_proof();
  std::string text = serialize_proof(p);
  ProofTree q = deserialize_proof(text);
  CHECK(serialize_proof(q) == text);
  ProofStats st = check_proof(CM, q);
  CHECK(st.nodes == 7);
  CHECK(st.height == 3);
}

TEST_CASE("deserialize small literal") {
  ProofTree t = deserialize_proof(
      "(ax (inst (a \"a\") (pos 0) (neg 1) (seq 0)) "
      "(ms (occ 0 \"a\") (occ 1 \"a~\") (seq 0 0 1)))");
  CHECK(t.children.empty());
  CHECK(check_proof(CM, t).height == 1);
}

TEST_CASE("deserialize accepts what the checker then rejects") {
  // Claimed conclusion does not match the axiom rule.
  ProofTree t = deserialize_proof(
      "(ax (inst (a \"a\") (pos 0) (neg 1) (seq 0)) "
      "(ms (occ 0 \"a\") (occ 1 \"b\") (seq 0 0 1)))");
  CHECK_THROWS_AS(check_proof(CM, t), CheckError);
}

TEST_CASE("malformed proof text") {
  CHECK_THROWS_AS(deserialize_proof("(ax (inst"), ParseError);
  CHECK_THROWS_AS(deserialize_proof("(nosuchrule (inst) (ms))"), ParseError);
  CHECK_THROWS_AS(deserialize_proof(""), ParseError);
}

TEST_CASE("cut counting and a cut proof") {
  // cut of {a, a~} against {a, a~} over dual occurrences.
  ProofTree ax1 = mk(CM, {AxiomInst{F("a"), 0, 1, 0}}, {});
  ProofTree ax2 = mk(CM, {AxiomInst{F("a"), 10, 11, 5}}, {});
  ProofTree cut = mk(CM, {CutInst{0, 11}}, {ax1, ax2});
  CHECK(isomorphic(cut.conclusion, parse_multisequent("{a, a~}")));
  ProofStats st = check_proof(CM, cut);
  CHECK(st.cut_count == 1);
  CHECK(st.nodes == 3);
}

TEST_CASE("node_at addresses children") {
  ProofTree p = tensor_to_cpar_proof();
  CHECK(node_at(p, {}).rule.rule() == Rule::Par);
  CHECK(node_at(p, {0}).rule.rule() == Rule::CPar);
  CHECK(node_at(p, {0, 0, 0, 0}).rule.rule() == Rule::Separate);
  CHECK(node_at(p, {0, 0, 0, 0, 1}).rule.rule() == Rule::Axiom);
  CHECK_THROWS_AS(node_at(p, {5}), std::out_of_range);
}
