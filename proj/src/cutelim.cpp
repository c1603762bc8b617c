#include "cmall/cutelim.hpp"

#include <algorithm>
#include <functional>

namespace cmall {

namespace {

[[noreturn]] void mismatch(const std::string& msg) { throw TransformError(msg); }

/// Replay of one node: the re-derived conclusion with provenance, plus the
/// bijection from the node's stored conclusion onto the replayed one.
struct Analysis {
  ForwardResult replay;
  Isomorphism iso;  // stored ids -> replay ids
};

Analysis analyze(CalculusVariant v, const ProofTree& t) {
  std::vector<Multisequent> premises;
  for (const auto& c : t.children) premises.push_back(c.conclusion);
  Analysis a;
  try {
    a.replay = apply_forward(v, t.rule, premises);
  } catch (const RuleError& e) {
    mismatch(std::string("invalid node: ") + e.what());
  }
  auto iso = find_isomorphism(t.conclusion, a.replay.conclusion);
  if (!iso) mismatch("stored conclusion does not match its rule");
  a.iso = std::move(*iso);
  return a;
}

/// The conclusion occurrence a rule builds from its principal material, when
/// there is one.  Axioms are handled separately (both occurrences qualify).
struct IntroOccV {
  std::optional<OccId> operator()(const OneInst& i) { return i.occ; }
  std::optional<OccId> operator()(const BotInst& i) { return i.fresh; }
  std::optional<OccId> operator()(const TopInst& i) { return i.top_occ; }
  std::optional<OccId> operator()(const ParInst& i) { return i.fresh; }
  std::optional<OccId> operator()(const CParInst& i) { return i.fresh; }
  std::optional<OccId> operator()(const PlusInst& i) { return i.fresh; }
  std::optional<OccId> operator()(const TensorInst& i) { return i.fresh; }
  std::optional<OccId> operator()(const CTimesInst& i) { return i.fresh; }
  std::optional<OccId> operator()(const WithInst& i) { return i.fresh; }
  template <class T>
  std::optional<OccId> operator()(const T&) {
    return std::nullopt;
  }
};

std::optional<OccId> intro_occ(const RuleInstance& inst) { return std::visit(IntroOccV{}, inst.v); }

ProofTree replace_at(const ProofTree& p, const ProofPath& at, ProofTree sub) {
  ProofTree out = p;
  node_at(out, at) = std::move(sub);
  return out;
}

/// Renames the root conclusion of `t` onto `target`, which must be
/// isomorphic.  Instances inside `t` keep referring to the children's stored
/// conclusions, so only the root changes.
void set_conclusion_checked(ProofTree& t, const Multisequent& target) {
  if (!find_isomorphism(t.conclusion, target))
    mismatch("rewrite changed the conclusion: built " + t.conclusion.render() + " instead of " +
             target.render());
  t.conclusion = target;
}

struct Shifted {
  ProofTree tree;
  OccId occ_off;
  SeqId seq_off;
};

/// Copy of `t` whose root conclusion lives on ids disjoint from `avoid` (and
/// from the original ids).  Children are untouched: the proof stays valid
/// because conclusions are compared up to isomorphism.
Shifted shift_disjoint(const ProofTree& t, const Multisequent& avoid) {
  OccId occ_off = 0;
  SeqId seq_off = 0;
  for (const auto& m : {std::cref(t.conclusion), std::cref(avoid)}) {
    if (!m.get().occs.empty()) occ_off = std::max(occ_off, m.get().occs.rbegin()->first + 1);
    if (!m.get().seqs.empty()) seq_off = std::max(seq_off, m.get().seqs.rbegin()->first + 1);
  }
  Multisequent m;
  for (const auto& [o, f] : t.conclusion.occs) m.occs.insert_or_assign(o + occ_off, f);
  for (const auto& [o, l] : t.conclusion.labels) m.labels[o + occ_off] = l;
  for (const auto& [s, members] : t.conclusion.seqs) {
    std::set<OccId> moved;
    for (OccId o : members) moved.insert(o + occ_off);
    m.seqs[s + seq_off] = std::move(moved);
  }
  return {ProofTree{std::move(m), t.rule, t.children}, occ_off, seq_off};
}

struct BuiltCut {
  ProofTree tree;
  ForwardResult fr;
};

BuiltCut make_cut(CalculusVariant v, ProofTree left, ProofTree right, OccId a, OccId b) {
  RuleInstance inst{CutInst{a, b}};
  ForwardResult fr;
  try {
    fr = apply_forward(v, inst, {left.conclusion, right.conclusion});
  } catch (const RuleError& e) {
    mismatch(std::string("cannot place the cut: ") + e.what());
  }
  ProofTree t{fr.conclusion, inst, {std::move(left), std::move(right)}};
  return {std::move(t), std::move(fr)};
}

/// Finds a backward application on `goal` accepted by `pred` whose premises
/// match the conclusions of `subs` up to isomorphism (in some order), and
/// grafts `subs` under it by renaming their root conclusions.
std::optional<ProofTree> derive_last(CalculusVariant v, const Multisequent& goal,
                                     const std::function<bool(const RuleApplication&)>& pred,
                                     const std::vector<ProofTree>& subs) {
  std::vector<std::string> sub_bytes;
  for (const auto& s : subs) sub_bytes.push_back(canonicalize(s.conclusion).bytes);
  for (const auto& app : enumerate_backward(v, goal)) {
    if (!pred(app) || app.premises.size() != subs.size()) continue;
    std::vector<int> pick(app.premises.size(), -1);
    std::vector<bool> used(subs.size(), false);
    bool ok = true;
    for (std::size_t k = 0; k < app.premises.size() && ok; ++k) {
      std::string bytes = canonicalize(app.premises[k]).bytes;
      ok = false;
      for (std::size_t j = 0; j < subs.size(); ++j)
        if (!used[j] && sub_bytes[j] == bytes) {
          used[j] = true;
          pick[k] = static_cast<int>(j);
          ok = true;
          break;
        }
    }
    if (!ok) continue;
    std::vector<ProofTree> kids;
    for (std::size_t k = 0; k < app.premises.size(); ++k) {
      ProofTree c = subs[static_cast<std::size_t>(pick[k])];
      c.conclusion = app.premises[k];
      kids.push_back(std::move(c));
    }
    return ProofTree{goal, app.instance, std::move(kids)};
  }
  return std::nullopt;
}

/// Like derive_last, but allows a short chain of applications of `rule` (a
/// dereliction may have to run once per copy of a split occurrence, say).
std::optional<ProofTree> derive_chain(CalculusVariant v, const Multisequent& goal, Rule rule,
                                      const std::vector<ProofTree>& subs, int depth) {
  if (auto direct = derive_last(
          v, goal, [&](const RuleApplication& b) { return b.instance.rule() == rule; }, subs))
    return direct;
  if (depth <= 0) return std::nullopt;
  for (const auto& app : enumerate_backward(v, goal)) {
    if (app.instance.rule() != rule || app.premises.size() != 1) continue;
    if (auto sub = derive_chain(v, app.premises[0], rule, subs, depth - 1))
      return ProofTree{goal, app.instance, {std::move(*sub)}};
  }
  return std::nullopt;
}

const CutInst& cut_inst_at(const ProofTree& t) {
  if (t.rule.rule() != Rule::Cut) mismatch("node is not a cut");
  return std::get<CutInst>(t.rule.v);
}

std::set<OccId> shared_delta_union(const SharedSInst& si) {
  std::set<OccId> all;
  for (const auto& col : si.delta) all.insert(col.begin(), col.end());
  return all;
}

/// True when the last rule of `child` introduces the occurrence `occ` of its
/// stored conclusion (so a cut on `occ` is in principal position there).
bool principal_on(CalculusVariant v, const ProofTree& child, OccId occ) {
  if (child.children.empty()) return true;  // axiom and one build everything
  Analysis a = analyze(v, child);
  OccId r = a.iso.occ.at(occ);
  if (auto io = intro_occ(child.rule); io && *io == r) return true;
  if (child.rule.rule() == Rule::SharedS)
    return shared_delta_union(std::get<SharedSInst>(child.rule.v)).count(r) != 0;
  if (child.rule.rule() == Rule::UnsharedU) return std::get<UnsharedUInst>(child.rule.v).a == r;
  auto it = a.replay.occ_origin.find(r);
  return it == a.replay.occ_origin.end() || it->second.empty();
}

// --- principal reductions -------------------------------------------------

ProofTree reduce_two_cuts(CalculusVariant v, const ProofTree& t, const ProofTree& par_side,
                          const ProofTree& times_side) {
  // par_side ends with a par/cpar on (pa, pb); times_side with the dual
  // tensor/ctimes whose premises hold the dual halves.  One cut becomes two.
  OccId pa, pb;
  if (par_side.rule.rule() == Rule::Par) {
    const auto& i = std::get<ParInst>(par_side.rule.v);
    pa = i.a;
    pb = i.b;
  } else {
    const auto& i = std::get<CParInst>(par_side.rule.v);
    pa = i.a;
    pb = i.b;
  }
  OccId ta, tb;
  if (times_side.rule.rule() == Rule::Tensor) {
    const auto& i = std::get<TensorInst>(times_side.rule.v);
    ta = i.a;
    tb = i.b;
  } else {
    const auto& i = std::get<CTimesInst>(times_side.rule.v);
    ta = i.a;
    tb = i.b;
  }
  const ProofTree& p1 = par_side.children[0];
  const ProofTree& p2 = times_side.children[0];  // holds ta
  const ProofTree& p3 = times_side.children[1];  // holds tb
  Formula fa = p1.conclusion.formula(pa);
  Formula dual_fa = dual_in(v, fa);
  const ProofTree* mate1;
  const ProofTree* mate2;
  OccId m1, m2;
  if (p3.conclusion.formula(tb) == dual_fa) {
    mate1 = &p3; m1 = tb;
    mate2 = &p2; m2 = ta;
  } else if (p2.conclusion.formula(ta) == dual_fa) {
    mate1 = &p2; m1 = ta;
    mate2 = &p3; m2 = tb;
  } else {
    mismatch("tensor premises do not carry the duals of the par halves");
  }
  Shifted s1 = shift_disjoint(*mate1, p1.conclusion);
  BuiltCut inner = make_cut(v, p1, std::move(s1.tree), pa, m1 + s1.occ_off);
  Shifted s2 = shift_disjoint(*mate2, inner.tree.conclusion);
  BuiltCut outer = make_cut(v, std::move(inner.tree), std::move(s2.tree), pb, m2 + s2.occ_off);
  set_conclusion_checked(outer.tree, t.conclusion);
  return std::move(outer.tree);
}

ProofTree reduce_with_plus(CalculusVariant v, const ProofTree& t, const ProofTree& with_side,
                           const ProofTree& plus_side) {
  const auto& wi = std::get<WithInst>(with_side.rule.v);
  const auto& qi = std::get<PlusInst>(plus_side.rule.v);
  const ProofTree& pq = plus_side.children[0];
  Formula fq = pq.conclusion.formula(qi.a);
  const ProofTree* chosen;
  OccId co;
  if (dual_in(v, with_side.children[0].conclusion.formula(wi.a)) == fq) {
    chosen = &with_side.children[0];
    co = wi.a;
  } else if (dual_in(v, with_side.children[1].conclusion.formula(wi.b)) == fq) {
    chosen = &with_side.children[1];
    co = wi.b;
  } else {
    mismatch("plus premise does not carry the dual of either with half");
  }
  Shifted sq = shift_disjoint(pq, chosen->conclusion);
  BuiltCut inner = make_cut(v, *chosen, std::move(sq.tree), co, qi.a + sq.occ_off);
  set_conclusion_checked(inner.tree, t.conclusion);
  return std::move(inner.tree);
}

ProofTree reduce_shared_unshared(CalculusVariant v, const ProofTree& t, const ProofTree& s_side,
                                 OccId s_cut_occ, const ProofTree& u_side) {
  SharedSInst si = std::get<SharedSInst>(s_side.rule.v);
  const auto& ui = std::get<UnsharedUInst>(u_side.rule.v);
  Analysis as = analyze(v, s_side);
  OccId oa = as.iso.occ.at(s_cut_occ);  // premise id of the shared cut formula
  std::size_t c0 = si.delta.size();
  for (std::size_t c = 0; c < si.delta.size(); ++c)
    if (si.delta[c].count(oa)) {
      if (c0 != si.delta.size()) mismatch("shared cut formula sits in two columns");
      c0 = c;
    }
  if (c0 == si.delta.size()) mismatch("cut formula is not part of the sharing inference");
  const ProofTree& ps = s_side.children[0];
  const ProofTree& pu = u_side.children[0];
  auto u_seqs = pu.conclusion.sequents_containing(ui.a);
  if (u_seqs.size() != 1) mismatch("unshared premise shares its principal occurrence");
  SeqId useq = u_seqs.front();

  Shifted su = shift_disjoint(pu, ps.conclusion);
  BuiltCut inner = make_cut(v, ps, std::move(su.tree), oa, ui.a + su.occ_off);

  // The merged column keeps the remaining shared occurrences plus the
  // unshared side's context; everything else is as before.
  SharedSInst ni = si;
  ni.delta[c0].erase(oa);
  for (OccId o : pu.conclusion.seqs.at(useq))
    if (o != ui.a) ni.delta[c0].insert(o + su.occ_off);
  for (std::size_t r = 0; r < si.grid.size(); ++r) {
    SeqId merged = 0;
    bool found = false;
    for (const auto& [s, origin] : inner.fr.seq_origin) {
      if (origin.size() == 2 && origin[0] == std::make_pair(std::size_t{0}, si.grid[r][c0]) &&
          origin[1] == std::make_pair(std::size_t{1}, SeqId{useq + su.seq_off})) {
        merged = s;
        found = true;
      }
    }
    if (!found) mismatch("cut did not merge a grid row as expected");
    ni.grid[r][c0] = merged;
  }
  RuleInstance inst{ni};
  ForwardResult fr;
  try {
    fr = apply_forward(v, inst, {inner.tree.conclusion});
  } catch (const RuleError& e) {
    mismatch(std::string("cannot rebuild the sharing inference: ") + e.what());
  }
  ProofTree node{fr.conclusion, inst, {std::move(inner.tree)}};
  set_conclusion_checked(node, t.conclusion);
  return node;
}

struct PrincipalCase {
  ReductionKind kind;
  const ProofTree* first;   // role depends on kind
  const ProofTree* second;
  OccId first_occ = 0;  // stored cut occurrence on `first`'s side
};

std::optional<PrincipalCase> principal_case(CalculusVariant v, const ProofTree& t) {
  const CutInst& ci = cut_inst_at(t);
  const ProofTree& l = t.children[0];
  const ProofTree& r = t.children[1];
  auto pick = [&](Rule a, Rule b) -> std::optional<std::pair<const ProofTree*, const ProofTree*>> {
    if (l.rule.rule() == a && r.rule.rule() == b) return std::make_pair(&l, &r);
    if (l.rule.rule() == b && r.rule.rule() == a) return std::make_pair(&r, &l);
    return std::nullopt;
  };
  if (l.rule.rule() == Rule::Axiom) return PrincipalCase{ReductionKind::Axiom, &l, &r};
  if (r.rule.rule() == Rule::Axiom) return PrincipalCase{ReductionKind::Axiom, &r, &l};
  if (auto p = pick(Rule::Bot, Rule::One)) return PrincipalCase{ReductionKind::OneBot, p->first, p->second};
  if (auto p = pick(Rule::Par, Rule::Tensor))
    return PrincipalCase{ReductionKind::TensorPar, p->first, p->second};
  if (auto p = pick(Rule::CPar, Rule::CTimes))
    return PrincipalCase{ReductionKind::CTimesCPar, p->first, p->second};
  for (Rule plus : {Rule::Plus1, Rule::Plus2})
    if (auto p = pick(Rule::With, plus))
      return PrincipalCase{ReductionKind::WithPlus, p->first, p->second};
  if (auto p = pick(Rule::SharedS, Rule::UnsharedU)) {
    PrincipalCase c{ReductionKind::SharedUnshared, p->first, p->second};
    c.first_occ = (p->first == &l) ? ci.a : ci.b;
    return c;
  }
  return std::nullopt;
}

// --- splitting ------------------------------------------------------------

Multisequent proj(const Multisequent& m, const std::set<SeqId>& keep) {
  Multisequent r;
  for (SeqId s : keep) {
    const auto& members = m.seqs.at(s);
    r.seqs[s] = members;
    for (OccId o : members) {
      r.occs.insert_or_assign(o, m.formula(o));
      if (auto it = m.labels.find(o); it != m.labels.end()) r.labels[o] = it->second;
    }
  }
  return r;
}

bool same_content(const Multisequent& a, const Multisequent& b) {
  if (a.seqs != b.seqs) return false;
  if (a.occs.size() != b.occs.size()) return false;
  for (const auto& [o, f] : a.occs) {
    auto it = b.occs.find(o);
    if (it == b.occs.end() || !(it->second == f)) return false;
  }
  return true;
}

std::vector<std::set<SeqId>> components(const Multisequent& m) {
  std::map<SeqId, SeqId> parent;
  std::function<SeqId(SeqId)> find = [&](SeqId s) {
    while (parent[s] != s) s = parent[s] = parent[parent[s]];
    return s;
  };
  for (const auto& [s, members] : m.seqs) parent[s] = s;
  std::map<OccId, SeqId> first_home;
  for (const auto& [s, members] : m.seqs)
    for (OccId o : members) {
      auto [it, fresh] = first_home.emplace(o, s);
      if (!fresh) parent[find(s)] = find(it->second);
    }
  std::map<SeqId, std::set<SeqId>> groups;
  for (const auto& [s, members] : m.seqs) groups[find(s)].insert(s);
  std::vector<std::set<SeqId>> out;
  for (auto& [root, group] : groups) out.push_back(std::move(group));
  return out;
}

ProofTree extract(CalculusVariant v, const ProofTree& t, const std::set<SeqId>& c_stored) {
  Multisequent target = proj(t.conclusion, c_stored);
  if (c_stored.size() == t.conclusion.seqs.size()) return t;
  if (t.children.empty()) mismatch("leaf conclusion cannot be split");
  Analysis a = analyze(v, t);
  std::set<SeqId> c_replay;
  for (SeqId s : c_stored) c_replay.insert(a.iso.seq.at(s));

  std::vector<std::set<SeqId>> per_child(t.children.size());
  bool single_child = true;
  bool single_pairs = true;
  std::size_t home = 0;
  bool home_set = false;
  for (SeqId s : c_replay) {
    const auto& origin = a.replay.seq_origin.at(s);
    if (origin.size() != 1) single_pairs = false;
    for (const auto& [j, s0] : origin) {
      per_child[j].insert(s0);
      if (!home_set) {
        home = j;
        home_set = true;
      } else if (home != j) {
        single_child = false;
      }
    }
    if (origin.empty()) single_pairs = false;  // created here: the rule acts in C
  }
  if (home_set && single_child && single_pairs &&
      same_content(proj(a.replay.conclusion, c_replay),
                   proj(t.children[home].conclusion, per_child[home]))) {
    ProofTree sub = extract(v, t.children[home], per_child[home]);
    sub.conclusion = std::move(target);
    return sub;
  }
  // The rule acts inside this component: keep it, project everything else.
  std::vector<ProofTree> kids;
  std::vector<Multisequent> premises;
  for (std::size_t j = 0; j < t.children.size(); ++j) {
    if (per_child[j].empty()) mismatch("component does not reach every premise of its rule");
    kids.push_back(extract(v, t.children[j], per_child[j]));
    premises.push_back(kids.back().conclusion);
  }
  try {
    ForwardResult fr = apply_forward(v, t.rule, premises);
    if (!find_isomorphism(fr.conclusion, target))
      mismatch("projected rule no longer derives the component");
  } catch (const RuleError& e) {
    mismatch(std::string("projected rule fails: ") + e.what());
  }
  return ProofTree{std::move(target), t.rule, std::move(kids)};
}

// --- async hoisting helpers ------------------------------------------------

OccId app_intro_occ(const RuleApplication& app) {
  auto io = intro_occ(app.instance);
  return io ? *io : static_cast<OccId>(-1);
}

ProofTree hoist(CalculusVariant v, const ProofTree& t, OccId occ);

/// Rebuilds `t`'s conclusion with the asynchronous rule last, given that
/// every child through which `occ` persists already ends with that rule.
ProofTree swap_async(CalculusVariant v, const ProofTree& t,
                     const std::vector<ProofTree>& hoisted,
                     const std::vector<std::optional<OccId>>& via, OccId occ, Rule async_rule) {
  std::size_t k = (async_rule == Rule::With) ? 2 : 1;
  std::vector<std::size_t> dup;  // children carrying a copy of occ
  for (std::size_t j = 0; j < hoisted.size(); ++j)
    if (via[j]) {
      if (hoisted[j].children.size() != k) mismatch("hoisted child has unexpected shape");
      dup.push_back(j);
    }
  if (dup.empty()) mismatch("occurrence does not persist through any premise");
  Rule inner_rule = t.rule.rule();
  for (const auto& app : enumerate_backward(v, t.conclusion)) {
    if (app.instance.rule() != async_rule || app_intro_occ(app) != occ) continue;
    if (app.premises.size() != k) continue;
    std::size_t combos = std::size_t{1} << dup.size();  // grandkid order per duplicated child
    for (std::size_t mask = 0; mask < (k == 2 ? combos : 1); ++mask) {
      std::vector<ProofTree> inners;
      bool ok = true;
      for (std::size_t m = 0; m < k && ok; ++m) {
        std::vector<ProofTree> subs;
        for (std::size_t j = 0; j < hoisted.size(); ++j) {
          if (!via[j]) {
            subs.push_back(t.children[j]);
            continue;
          }
          std::size_t pos = std::find(dup.begin(), dup.end(), j) - dup.begin();
          std::size_t pickidx = (k == 2 && (mask >> pos & 1)) ? 1 - m : m;
          subs.push_back(hoisted[j].children[pickidx]);
        }
        auto inner = derive_chain(v, app.premises[m], inner_rule, subs, 3);
        if (!inner) {
          ok = false;
          break;
        }
        inners.push_back(std::move(*inner));
      }
      if (ok) return ProofTree{t.conclusion, app.instance, std::move(inners)};
    }
  }
  mismatch("could not move the asynchronous rule below this inference");
}

ProofTree hoist(CalculusVariant v, const ProofTree& t, OccId occ) {
  Formula f = t.conclusion.formula(occ);
  Rule ar;
  if (f.is_bin(Conn::Par))
    ar = Rule::Par;
  else if (f.is_bin(Conn::With))
    ar = Rule::With;
  else if (f.is_bin(Conn::CPar))
    ar = Rule::CPar;
  else
    mismatch("occurrence is not asynchronous");
  if (t.children.empty()) mismatch("occurrence was not introduced by its connective's rule");
  Analysis a = analyze(v, t);
  OccId r = a.iso.occ.at(occ);
  if (auto io = intro_occ(t.rule); io && *io == r) {
    if (t.rule.rule() != ar) mismatch("occurrence was not introduced by its connective's rule");
    return t;
  }
  const auto& origin = a.replay.occ_origin.at(r);
  if (origin.empty()) mismatch("occurrence was not introduced by its connective's rule");
  std::vector<std::optional<OccId>> via(t.children.size());
  for (const auto& [j, o0] : origin) {
    if (via[j]) mismatch("cannot hoist past a rule that shares the occurrence");
    via[j] = o0;
  }
  std::vector<ProofTree> hoisted = t.children;
  for (std::size_t j = 0; j < hoisted.size(); ++j)
    if (via[j]) hoisted[j] = hoist(v, t.children[j], *via[j]);
  return swap_async(v, t, hoisted, via, occ, ar);
}

std::optional<ProofPath> innermost_cut(const ProofTree& t) {
  for (std::size_t i = 0; i < t.children.size(); ++i)
    if (auto sub = innermost_cut(t.children[i])) {
      sub->insert(sub->begin(), i);
      return sub;
    }
  if (t.rule.rule() == Rule::Cut) return ProofPath{};
  return std::nullopt;
}

ProofTree swap_cut(CalculusVariant v, const ProofTree& p, const ProofPath& at) {
  const ProofTree& t = node_at(p, at);
  const CutInst& ci = cut_inst_at(t);
  BuiltCut swapped = make_cut(v, t.children[1], t.children[0], ci.b, ci.a);
  set_conclusion_checked(swapped.tree, t.conclusion);
  return replace_at(p, at, std::move(swapped.tree));
}

}  // namespace

std::optional<ReductionKind> classify_principal(CalculusVariant v, const ProofTree& p,
                                                const ProofPath& at) {
  const ProofTree& t = node_at(p, at);
  if (t.rule.rule() != Rule::Cut) return std::nullopt;
  const CutInst& ci = cut_inst_at(t);
  auto c = principal_case(v, t);
  if (!c) return std::nullopt;
  if (c->kind != ReductionKind::Axiom &&
      !(principal_on(v, t.children[0], ci.a) && principal_on(v, t.children[1], ci.b)))
    return std::nullopt;
  return c->kind;
}

ProofTree reduce_principal(CalculusVariant v, const ProofTree& p, const ProofPath& at) {
  const ProofTree& t = node_at(p, at);
  const CutInst& ci = cut_inst_at(t);
  auto c = principal_case(v, t);
  if (!c) mismatch("cut premises do not end with dual principal rules");
  switch (c->kind) {
    case ReductionKind::Axiom: {
      ProofTree keep = *c->second;
      set_conclusion_checked(keep, t.conclusion);
      return replace_at(p, at, std::move(keep));
    }
    case ReductionKind::OneBot: {
      const ProofTree& bot = *c->first;
      OccId bocc = (c->first == &t.children[0]) ? ci.a : ci.b;
      if (!principal_on(v, bot, bocc)) mismatch("bot rule does not introduce the cut formula");
      ProofTree keep = bot.children[0];
      set_conclusion_checked(keep, t.conclusion);
      return replace_at(p, at, std::move(keep));
    }
    case ReductionKind::TensorPar:
    case ReductionKind::CTimesCPar: {
      OccId pocc = (c->first == &t.children[0]) ? ci.a : ci.b;
      OccId tocc = (c->first == &t.children[0]) ? ci.b : ci.a;
      if (!principal_on(v, *c->first, pocc) || !principal_on(v, *c->second, tocc))
        mismatch("cut formula is not principal on both sides");
      return replace_at(p, at, reduce_two_cuts(v, t, *c->first, *c->second));
    }
    case ReductionKind::WithPlus: {
      OccId wocc = (c->first == &t.children[0]) ? ci.a : ci.b;
      OccId qocc = (c->first == &t.children[0]) ? ci.b : ci.a;
      if (!principal_on(v, *c->first, wocc) || !principal_on(v, *c->second, qocc))
        mismatch("cut formula is not principal on both sides");
      return replace_at(p, at, reduce_with_plus(v, t, *c->first, *c->second));
    }
    case ReductionKind::SharedUnshared: {
      OccId uocc = (c->first == &t.children[0]) ? ci.b : ci.a;
      if (!principal_on(v, *c->second, uocc)) mismatch("unshared side is not principal");
      return replace_at(p, at, reduce_shared_unshared(v, t, *c->first, c->first_occ, *c->second));
    }
    default:
      mismatch("cut premises do not end with dual principal rules");
  }
}

ProofTree commute_cut(CalculusVariant v, const ProofTree& p, const ProofPath& at) {
  const ProofTree& t = node_at(p, at);
  const CutInst& ci = cut_inst_at(t);
  const ProofTree& w = t.children[0];
  const ProofTree& vside = t.children[1];
  if (w.children.empty()) mismatch("left premise is principal on the cut formula");
  Analysis aw = analyze(v, w);
  OccId r = aw.iso.occ.at(ci.a);
  if (principal_on(v, w, ci.a)) mismatch("left premise is principal on the cut formula");
  const auto& origin = aw.replay.occ_origin.at(r);
  std::vector<std::optional<OccId>> via(w.children.size());
  for (const auto& [j, o0] : origin) {
    if (via[j]) mismatch("cannot commute past a rule that shares the cut formula");
    via[j] = o0;
  }
  std::vector<ProofTree> required = w.children;
  for (std::size_t j = 0; j < required.size(); ++j) {
    if (!via[j]) continue;
    Shifted sv = shift_disjoint(vside, w.children[j].conclusion);
    BuiltCut inner = make_cut(v, w.children[j], std::move(sv.tree), *via[j], ci.b + sv.occ_off);
    required[j] = std::move(inner.tree);
  }
  Rule wr = w.rule.rule();
  auto res = derive_last(
      v, t.conclusion, [&](const RuleApplication& b) { return b.instance.rule() == wr; },
      required);
  if (!res) mismatch("could not rebuild the commuted inference");
  return replace_at(p, at, std::move(*res));
}

ProofTree permute_async_down(CalculusVariant v, const ProofTree& p, OccId occ) {
  if (!p.conclusion.occs.count(occ)) mismatch("no such occurrence in the conclusion");
  return hoist(v, p, occ);
}

ProofTree eliminate_cuts(CalculusVariant v, const ProofTree& p, long step_limit) {
  check_proof(v, p);
  ProofTree work = p;
  long steps = 0;
  for (;;) {
    auto path = innermost_cut(work);
    if (!path) break;
    if (++steps > step_limit)
      throw CutEliminationError("cut elimination exceeded its step limit", work);
    try {
      const ProofTree& t = node_at(work, *path);
      const CutInst& ci = cut_inst_at(t);
      bool lp = principal_on(v, t.children[0], ci.a);
      bool rp = principal_on(v, t.children[1], ci.b);
      if (t.children[0].rule.rule() == Rule::Axiom || t.children[1].rule.rule() == Rule::Axiom ||
          (lp && rp)) {
        work = reduce_principal(v, work, *path);
      } else if (!lp) {
        work = commute_cut(v, work, *path);
      } else {
        work = swap_cut(v, work, *path);
        work = commute_cut(v, work, *path);
      }
    } catch (const TransformError& e) {
      throw CutEliminationError(std::string("cut elimination stuck: ") + e.what(), work);
    }
  }
  return work;
}

std::vector<ProofTree> split_disjoint(CalculusVariant v, const ProofTree& p) {
  auto comps = components(p.conclusion);
  if (comps.size() <= 1) return {p};
  std::vector<ProofTree> out;
  for (const auto& c : comps) out.push_back(extract(v, p, c));
  return out;
}

}  // namespace cmall
