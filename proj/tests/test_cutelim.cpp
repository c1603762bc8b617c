#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cmall/cutelim.hpp"
#include "cmall/search.hpp"

using namespace cmall;

namespace {

const CalculusVariant CM = CalculusVariant::CMALL;

ProofTree mk(RuleInstance inst, std::vector<ProofTree> kids) {
  std::vector<Multisequent> premises;
  for (const auto& k : kids) premises.push_back(k.conclusion);
  ForwardResult fr = apply_forward(CM, inst, premises);
  return ProofTree{std::move(fr.conclusion), std::move(inst), std::move(kids)};
}

Formula F(const std::string& s) { return parse_formula(s); }

/// Goal {base: f~, base+1: f} in one sequent.
Multisequent identity_goal(const Formula& f, OccId base, SeqId seq) {
  Multisequent m;
  m.occs.insert_or_assign(base, negate(f));
  m.occs.insert_or_assign(base + 1, f);
  m.seqs[seq] = {base, base + 1};
  return m;
}

ProofTree proved(const Multisequent& goal, int depth = 14) {
  SearchLimits lim;
  lim.max_depth = depth;
  SearchOutcome oc = prove(CM, goal, lim);
  REQUIRE(oc.kind == OutcomeKind::Proved);
  return *oc.proof;
}

void check_cut_free_same(const ProofTree& before, const ProofTree& after) {
  ProofStats st = check_proof(CM, after);
  CHECK(st.cut_count == 0);
  CHECK(canonicalize(after.conclusion) == canonicalize(before.conclusion));
}

}  // namespace

TEST_CASE("axiom cuts vanish") {
  ProofTree ax1 = mk({AxiomInst{F("a"), 0, 1, 0}}, {});
  ProofTree ax2 = mk({AxiomInst{F("a"), 10, 11, 5}}, {});
  ProofTree cut = mk({CutInst{0, 11}}, {ax1, ax2});
  CHECK(classify_principal(CM, cut, {}) == ReductionKind::Axiom);
  ProofTree red = reduce_principal(CM, cut, {});
  check_cut_free_same(cut, red);
  CHECK(red.rule.rule() == Rule::Axiom);
}

TEST_CASE("one against bot collapses to the bot premise") {
  ProofTree ax = mk({AxiomInst{F("a"), 0, 1, 0}}, {});
  ProofTree bot = mk({BotInst{2, {0}}}, {ax});
  ProofTree one = mk({OneInst{10, 5}}, {});
  ProofTree cut = mk({CutInst{2, 10}}, {bot, one});
  CHECK(classify_principal(CM, cut, {}) == ReductionKind::OneBot);
  ProofTree red = reduce_principal(CM, cut, {});
  check_cut_free_same(cut, red);
  CHECK(red.rule.rule() == Rule::Axiom);
}

TEST_CASE("a tensor/par cut becomes two smaller cuts") {
  // left: par over the axiom {c, c~}; right: tensor of two axioms.
  ProofTree axp = mk({AxiomInst{F("c~"), 0, 1, 0}}, {});           // {c~, c}
  ProofTree par = mk({ParInst{0, 1, 2}}, {axp});                   // {c~ % c}
  ProofTree axt1 = mk({AxiomInst{F("c~"), 10, 11, 5}}, {});        // {c~, c}
  ProofTree axt2 = mk({AxiomInst{F("c"), 12, 13, 6}}, {});         // {c, c~}
  ProofTree ten = mk({TensorInst{10, 12, 14}}, {axt1, axt2});      // {c~ * c, c, c~}
  ProofTree cut = mk({CutInst{2, 14}}, {par, ten});
  CHECK(classify_principal(CM, cut, {}) == ReductionKind::TensorPar);
  ProofTree red = reduce_principal(CM, cut, {});
  ProofStats st = check_proof(CM, red);
  CHECK(st.cut_count == 2);
  CHECK(canonicalize(red.conclusion) == canonicalize(cut.conclusion));
  check_cut_free_same(cut, eliminate_cuts(CM, cut));
}

TEST_CASE("a ctimes/cpar cut becomes two smaller cuts") {
  // cpar side: {a~, b~, a $ b} from two axioms with shared context.
  ProofTree ax1 = mk({AxiomInst{F("a"), 0, 1, 0}}, {});
  ProofTree ax2 = mk({AxiomInst{F("b"), 2, 3, 1}}, {});
  ProofTree sep = mk({SeparateInst{}}, {ax1, ax2});
  ProofTree d1 = mk({DerelictInst{1, 1}}, {sep});
  ProofTree d2 = mk({DerelictInst{3, 0}}, {d1});
  ProofTree cp = mk({CParInst{0, 2, 4}}, {d2});
  // ctimes side: {b~ @ a~} spread over {X, b}{X, a}.
  ProofTree bx = mk({AxiomInst{F("b~"), 10, 11, 5}}, {});
  ProofTree axx = mk({AxiomInst{F("a~"), 12, 13, 6}}, {});
  ProofTree ct = mk({CTimesInst{10, 12, 14}}, {bx, axx});
  ProofTree cut = mk({CutInst{4, 14}}, {cp, ct});
  CHECK(classify_principal(CM, cut, {}) == ReductionKind::CTimesCPar);
  ProofTree red = reduce_principal(CM, cut, {});
  CHECK(check_proof(CM, red).cut_count == 2);
  CHECK(canonicalize(red.conclusion) == canonicalize(cut.conclusion));
  check_cut_free_same(cut, eliminate_cuts(CM, cut));
}

TEST_CASE("a with/plus cut keeps the chosen side") {
  ProofTree wa = mk({AxiomInst{F("c"), 0, 1, 0}}, {});
  ProofTree wb = mk({AxiomInst{F("c"), 2, 3, 1}}, {});
  ProofTree with = mk({WithInst{1, 3, 4, {{3, 1}, {2, 0}}, {{1, 0}}}}, {wa, wb});
  ProofTree qx = mk({AxiomInst{F("c~"), 10, 11, 5}}, {});
  ProofTree plus = mk({PlusInst{11, true, F("c"), 12}}, {qx});
  ProofTree cut = mk({CutInst{4, 12}}, {with, plus});
  CHECK(classify_principal(CM, cut, {}) == ReductionKind::WithPlus);
  ProofTree red = reduce_principal(CM, cut, {});
  CHECK(check_proof(CM, red).cut_count == 1);
  CHECK(canonicalize(red.conclusion) == canonicalize(cut.conclusion));
  check_cut_free_same(cut, eliminate_cuts(CM, cut));
}

TEST_CASE("a shared/unshared cut is pushed under a fresh sharing inference") {
  ProofTree axs = mk({AxiomInst{F("c"), 0, 1, 0}}, {});          // {c, c~}
  ProofTree sh = mk({SharedSInst{{{0}}, {{0}}, {{{}}}}}, {axs});  // {c^s, c~}
  ProofTree axu = mk({AxiomInst{F("c~"), 10, 11, 5}}, {});       // {c~, c}
  ProofTree un = mk({UnsharedUInst{10}}, {axu});                 // {c~^u, c^s}
  ProofTree cut = mk({CutInst{0, 10}}, {sh, un});
  CHECK(classify_principal(CM, cut, {}) == ReductionKind::SharedUnshared);
  ProofTree red = reduce_principal(CM, cut, {});
  CHECK(red.rule.rule() == Rule::SharedS);
  CHECK(check_proof(CM, red).cut_count == 1);
  CHECK(canonicalize(red.conclusion) == canonicalize(cut.conclusion));
  check_cut_free_same(cut, eliminate_cuts(CM, cut));
}

TEST_CASE("commuting a cut past a bot inference") {
  ProofTree ax = mk({AxiomInst{F("a"), 0, 1, 0}}, {});
  ProofTree bot = mk({BotInst{2, {0}}}, {ax});                 // {bot, a, a~}
  ProofTree side = mk({AxiomInst{F("a~"), 10, 11, 5}}, {});    // {a~, a}
  ProofTree cut = mk({CutInst{0, 10}}, {bot, side});           // {bot, a~, a}
  int h_before = check_proof(CM, cut).height;
  ProofTree q = commute_cut(CM, cut, {});
  CHECK(q.rule.rule() == Rule::Bot);
  CHECK(q.children[0].rule.rule() == Rule::Cut);
  CHECK(canonicalize(q.conclusion) == canonicalize(cut.conclusion));
  check_proof(CM, q);
  CHECK(check_proof(CM, q.children[0]).height <= h_before);
}

TEST_CASE("commuting a principal cut is rejected") {
  ProofTree ax1 = mk({AxiomInst{F("a"), 0, 1, 0}}, {});
  ProofTree ax2 = mk({AxiomInst{F("a"), 10, 11, 5}}, {});
  ProofTree cut = mk({CutInst{0, 11}}, {ax1, ax2});
  CHECK_THROWS_AS(commute_cut(CM, cut, {}), TransformError);
}

TEST_CASE("commuted cut subtrees never grow, randomized") {
  std::mt19937 rng(7);
  std::vector<std::string> pool = {"a", "a~", "a*b", "a%b", "a&b", "a+b", "1"};
  for (int i = 0; i < 30; ++i) {
    Formula f = F(pool[rng() % pool.size()]);
    ProofTree w = proved(identity_goal(f, 0, 0));
    if (rng() % 2) {
      w = mk({BotInst{w.conclusion.fresh_occ(), {0}}}, {w});
    } else {
      w = mk({CloneInst{0, w.conclusion.fresh_seq()}}, {w});
    }
    ProofTree vside = proved(identity_goal(f, 20, 9));
    // cut the A~ occurrence of the left proof against the right proof's A.
    ProofTree cut = mk({CutInst{0, 21}}, {w, vside});
    int h_before = check_proof(CM, cut).height;
    ProofTree q = commute_cut(CM, cut, {});
    CHECK(canonicalize(q.conclusion) == canonicalize(cut.conclusion));
    check_proof(CM, q);
    for (const auto& c : q.children)
      if (c.rule.rule() == Rule::Cut) CHECK(check_proof(CM, c).height <= h_before);
  }
}

TEST_CASE("hoisting an already-last rule returns the proof unchanged") {
  ProofTree p = proved(parse_multisequent("{a~ % b~, a $ b}"));
  // Find the par occurrence of the conclusion.
  OccId par_occ = 0;
  for (const auto& [o, f] : p.conclusion.occs)
    if (f.is_bin(Conn::Par)) par_occ = o;
  ProofTree q = permute_async_down(CM, p, par_occ);
  ProofStats a = check_proof(CM, p), b = check_proof(CM, q);
  CHECK(a.height == b.height);
  CHECK(canonicalize(q.conclusion) == canonicalize(p.conclusion));
}

TEST_CASE("hoisting the cpar in the two-rule tail") {
  ProofTree p = proved(parse_multisequent("{a~ % b~, a $ b}"));
  OccId cpar_occ = 0;
  for (const auto& [o, f] : p.conclusion.occs)
    if (f.is_bin(Conn::CPar)) cpar_occ = o;
  ProofTree q = permute_async_down(CM, p, cpar_occ);
  CHECK(q.rule.rule() == Rule::CPar);
  CHECK(canonicalize(q.conclusion) == canonicalize(p.conclusion));
  CHECK(check_proof(CM, q).height == check_proof(CM, p).height);
}

TEST_CASE("hoisting a non-asynchronous occurrence is rejected") {
  ProofTree p = proved(parse_multisequent("{a, a~}"));
  for (const auto& [o, f] : p.conclusion.occs) CHECK_THROWS_AS(permute_async_down(CM, p, o), TransformError);
}

TEST_CASE("hoisting preserves height on randomized decorated proofs") {
  std::mt19937 rng(42);
  std::vector<std::string> parts = {"a", "b", "a~", "1", "bot", "a*b", "a&b"};
  std::vector<std::string> tops = {"%", "&", "$"};
  std::map<std::string, Rule> top_rule = {{"%", Rule::Par}, {"&", Rule::With}, {"$", Rule::CPar}};
  int done = 0;
  for (int i = 0; i < 200; ++i) {
    std::string x = parts[rng() % parts.size()];
    std::string y = parts[rng() % parts.size()];
    std::string top = tops[rng() % tops.size()];
    Formula f = F("(" + x + ") " + top + " (" + y + ")");
    ProofTree p = proved(identity_goal(f, 0, 0));
    int deco = static_cast<int>(rng() % 3);
    for (int d = 0; d < deco; ++d) {
      switch (rng() % 3) {
        case 0:
          p = mk({BotInst{p.conclusion.fresh_occ(),
                          {p.conclusion.seqs.begin()->first}}},
                 {p});
          break;
        case 1:
          p = mk({CloneInst{p.conclusion.seqs.begin()->first, p.conclusion.fresh_seq()}}, {p});
          break;
        case 2: {
          OccId base = p.conclusion.fresh_occ() + 3;
          SeqId sq = p.conclusion.fresh_seq() + 3;
          ProofTree side = mk({AxiomInst{F("e"), base, base + 1, sq}}, {});
          p = mk({SeparateInst{}}, {p, side});
          break;
        }
      }
    }
    ProofTree q = permute_async_down(CM, p, 1);
    CHECK(q.rule.rule() == top_rule[top]);
    CHECK(canonicalize(q.conclusion) == canonicalize(p.conclusion));
    ProofStats a = check_proof(CM, p), b = check_proof(CM, q);
    CHECK(a.height == b.height);
    ++done;
  }
  CHECK(done == 200);
}

TEST_CASE("hoisting past a dereliction of the asynchronous occurrence") {
  // The par occurrence gets derelicted into a second sequent before the
  // permutation; the rewrite needs one dereliction per copy afterwards.
  ProofTree p = proved(identity_goal(F("a % b~"), 0, 0));
  p = mk({CloneInst{0, 1}}, {p});
  // move the par occurrence out of the clone so the copy differs
  ProofTree q = permute_async_down(CM, p, 1);
  CHECK(q.rule.rule() == Rule::Par);
  CHECK(canonicalize(q.conclusion) == canonicalize(p.conclusion));
  CHECK(check_proof(CM, q).height == check_proof(CM, p).height);
}

TEST_CASE("cut proofs over twenty-odd formulas all eliminate") {
  std::vector<std::string> formulas = {
      "a",        "b",         "a~",       "1",         "bot",      "a*b",
      "a%b",      "a&b",       "a+b",      "a$b",       "a@b",      "a*b~",
      "a%b~",     "(a*b)%c",   "a*(b%c)",  "(a&b)+c",   "(a+b)&c",  "1*a",
      "bot%a",    "a*1",       "(a$b)*c",  "(a@b)%c",   "a&(b+c)",  "(a%b)&c",
  };
  REQUIRE(formulas.size() >= 20);
  for (const auto& s : formulas) {
    CAPTURE(s);
    Formula f = F(s);
    ProofTree left = proved(identity_goal(f, 0, 0));
    ProofTree right = proved(identity_goal(f, 10, 5));
    ProofTree cut = mk({CutInst{1, 10}}, {left, right});
    CHECK(check_proof(CM, cut).cut_count >= 1);
    ProofTree red = eliminate_cuts(CM, cut);
    check_cut_free_same(cut, red);
  }
}

TEST_CASE("cut against an axiom on a compound formula") {
  ProofTree p = proved(parse_multisequent("{a~ % b~, a $ b}"));
  OccId cpar_occ = 0;
  for (const auto& [o, f] : p.conclusion.occs)
    if (f.is_bin(Conn::CPar)) cpar_occ = o;
  ProofTree ax = mk({AxiomInst{F("a $ b"), 20, 21, 9}}, {});  // {a $ b, b~ @ a~}
  ProofTree cut = mk({CutInst{cpar_occ, 21}}, {p, ax});
  check_cut_free_same(cut, eliminate_cuts(CM, cut));
}

TEST_CASE("cut-free input passes through unchanged") {
  ProofTree p = proved(parse_multisequent("{a~ % b~, a $ b}"));
  CHECK(serialize_proof(eliminate_cuts(CM, p)) == serialize_proof(p));
}

TEST_CASE("step limit raises with the partial proof attached") {
  ProofTree ax1 = mk({AxiomInst{F("a"), 0, 1, 0}}, {});
  ProofTree ax2 = mk({AxiomInst{F("a"), 10, 11, 5}}, {});
  ProofTree cut = mk({CutInst{0, 11}}, {ax1, ax2});
  try {
    eliminate_cuts(CM, cut, 0);
    FAIL("expected CutEliminationError");
  } catch (const CutEliminationError& e) {
    CHECK(check_proof(CM, e.partial).cut_count == 1);
  }
}

TEST_CASE("splitting a separated proof") {
  ProofTree p1 = proved(parse_multisequent("{a, a~}"));
  ProofTree side = mk({AxiomInst{F("b"), 10, 11, 5}}, {});
  ProofTree sep = mk({SeparateInst{}}, {p1, side});
  auto parts = split_disjoint(CM, sep);
  REQUIRE(parts.size() == 2);
  for (const auto& part : parts) CHECK(check_proof(CM, part).cut_count == 0);
  std::set<std::string> got = {canonicalize(parts[0].conclusion).bytes,
                               canonicalize(parts[1].conclusion).bytes};
  std::set<std::string> want = {canonicalize(parse_multisequent("{a, a~}")).bytes,
                                canonicalize(parse_multisequent("{b, b~}")).bytes};
  CHECK(got == want);
}

TEST_CASE("a connected conclusion splits into itself") {
  ProofTree p = proved(parse_multisequent("{a~ % b~, a $ b}"));
  auto parts = split_disjoint(CM, p);
  REQUIRE(parts.size() == 1);
  CHECK(serialize_proof(parts[0]) == serialize_proof(p));
}

TEST_CASE("split then re-join round-trips through the checker") {
  ProofTree p1 = proved(identity_goal(F("a % b"), 0, 0));
  ProofTree p2 = proved(identity_goal(F("c & d"), 10, 5));
  ProofTree sep = mk({SeparateInst{}}, {p1, p2});
  // a bot shared into one component keeps the split nontrivial
  ProofTree dec = mk({BotInst{sep.conclusion.fresh_occ(), {0}}}, {sep});
  auto parts = split_disjoint(CM, dec);
  REQUIRE(parts.size() == 2);
  for (const auto& part : parts) check_proof(CM, part);
  ProofTree rejoined = mk({SeparateInst{}}, {parts[0], parts[1]});
  check_proof(CM, rejoined);
  CHECK(canonicalize(rejoined.conclusion) == canonicalize(dec.conclusion));
}
