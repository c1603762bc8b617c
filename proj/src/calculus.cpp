#include "cmall/calculus.hpp"

#include <algorithm>
#include <functional>

namespace cmall {

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Axiom: return "ax";
    case Rule::One: return "one";
    case Rule::EmptyLeaf: return "empty";
    case Rule::Bot: return "bot";
    case Rule::Top: return "top";
    case Rule::Tensor: return "tensor";
    case Rule::Par: return "par";
    case Rule::CTimes: return "ctimes";
    case Rule::CPar: return "cpar";
    case Rule::Plus1: return "plus1";
    case Rule::Plus2: return "plus2";
    case Rule::With: return "with";
    case Rule::Clone: return "clone";
    case Rule::Derelict: return "derelict";
    case Rule::Separate: return "separate";
    case Rule::Cut: return "cut";
    case Rule::SharedS: return "shared";
    case Rule::UnsharedU: return "unshared";
  }
  return "?";
}

std::optional<Rule> rule_from_name(const std::string& name) {
  static const std::map<std::string, Rule> table = {
      {"ax", Rule::Axiom},       {"one", Rule::One},
      {"empty", Rule::EmptyLeaf}, {"bot", Rule::Bot},
      {"top", Rule::Top},        {"tensor", Rule::Tensor},
      {"par", Rule::Par},        {"ctimes", Rule::CTimes},
      {"cpar", Rule::CPar},      {"plus1", Rule::Plus1},
      {"plus2", Rule::Plus2},    {"with", Rule::With},
      {"clone", Rule::Clone},    {"derelict", Rule::Derelict},
      {"separate", Rule::Separate}, {"cut", Rule::Cut},
      {"shared", Rule::SharedS}, {"unshared", Rule::UnsharedU},
  };
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

bool rule_in_variant(CalculusVariant v, Rule r) {
  if (v == CalculusVariant::CMALL) return true;
  switch (r) {
    case Rule::Axiom:
    case Rule::One:
    case Rule::EmptyLeaf:
    case Rule::Bot:
    case Rule::Par:
    case Rule::CPar:
    case Rule::Clone:
    case Rule::Derelict:
    case Rule::Separate:
    case Rule::Cut:
      return true;
    default:
      return false;
  }
}

bool is_structural(Rule r) {
  return r == Rule::Clone || r == Rule::Derelict || r == Rule::Separate;
}

Rule RuleInstance::rule() const {
  struct V {
    Rule operator()(const AxiomInst&) { return Rule::Axiom; }
    Rule operator()(const OneInst&) { return Rule::One; }
    Rule operator()(const EmptyLeafInst&) { return Rule::EmptyLeaf; }
    Rule operator()(const BotInst&) { return Rule::Bot; }
    Rule operator()(const TopInst&) { return Rule::Top; }
    Rule operator()(const ParInst&) { return Rule::Par; }
    Rule operator()(const CParInst&) { return Rule::CPar; }
    Rule operator()(const PlusInst& p) { return p.left ? Rule::Plus1 : Rule::Plus2; }
    Rule operator()(const TensorInst&) { return Rule::Tensor; }
    Rule operator()(const CTimesInst&) { return Rule::CTimes; }
    Rule operator()(const WithInst&) { return Rule::With; }
    Rule operator()(const CloneInst&) { return Rule::Clone; }
    Rule operator()(const DerelictInst&) { return Rule::Derelict; }
    Rule operator()(const SeparateInst&) { return Rule::Separate; }
    Rule operator()(const CutInst&) { return Rule::Cut; }
    Rule operator()(const SharedSInst&) { return Rule::SharedS; }
    Rule operator()(const UnsharedUInst&) { return Rule::UnsharedU; }
  };
  return std::visit(V{}, v);
}

std::size_t RuleInstance::arity() const {
  switch (rule()) {
    case Rule::Axiom:
    case Rule::One:
    case Rule::EmptyLeaf:
      return 0;
    case Rule::Tensor:
    case Rule::CTimes:
    case Rule::With:
    case Rule::Separate:
    case Rule::Cut:
      return 2;
    default:
      return 1;
  }
}

namespace {

[[noreturn]] void bad(const std::string& msg) { throw RuleError(msg); }

void require(bool cond, const char* msg) {
  if (!cond) bad(msg);
}

void check_disjoint(const Multisequent& a, const Multisequent& b) {
  for (const auto& [o, f] : a.occs)
    if (b.occs.count(o)) bad("premises share an occurrence id");
  for (const auto& [s, m] : a.seqs)
    if (b.seqs.count(s)) bad("premises share a sequent id");
}

void identity_origins(const Multisequent& premise, std::size_t idx, ForwardResult& r) {
  for (const auto& [o, f] : premise.occs) r.occ_origin[o] = {{idx, o}};
  for (const auto& [s, m] : premise.seqs) r.seq_origin[s] = {{idx, s}};
}

struct Forward {
  CalculusVariant variant;
  const std::vector<Multisequent>& ps;
  ForwardResult out;

  const Multisequent& premise(std::size_t i) {
    if (i >= ps.size()) bad("missing premise");
    return ps[i];
  }

  ForwardResult operator()(const AxiomInst& i) {
    require(ps.empty(), "axiom takes no premises");
    Multisequent m;
    require(i.pos != i.neg, "axiom occurrences must differ");
    m.occs.insert_or_assign(i.pos, i.a);
    m.occs.insert_or_assign(i.neg, dual_in(variant, i.a));
    m.seqs[i.seq] = {i.pos, i.neg};
    out.conclusion = std::move(m);
    out.occ_origin[i.pos] = {};
    out.occ_origin[i.neg] = {};
    out.seq_origin[i.seq] = {};
    return std::move(out);
  }

  ForwardResult operator()(const OneInst& i) {
    require(ps.empty(), "one takes no premises");
    Multisequent m;
    m.occs.insert_or_assign(i.occ, Formula::constant(ConstKind::One));
    m.seqs[i.seq] = {i.occ};
    out.conclusion = std::move(m);
    out.occ_origin[i.occ] = {};
    out.seq_origin[i.seq] = {};
    return std::move(out);
  }

  ForwardResult operator()(const EmptyLeafInst&) {
    require(ps.empty(), "empty leaf takes no premises");
    out.conclusion = Multisequent{};
    return std::move(out);
  }

  ForwardResult operator()(const BotInst& i) {
    Multisequent m = premise(0);
    require(!i.targets.empty(), "bot needs at least one target sequent");
    require(!m.occs.count(i.fresh), "bot occurrence id not fresh");
    std::set<SeqId> seen;
    for (SeqId s : i.targets) {
      require(m.seqs.count(s), "bot target sequent missing");
      require(seen.insert(s).second, "duplicate bot target");
      m.seqs[s].insert(i.fresh);
    }
    m.occs.insert_or_assign(i.fresh, Formula::constant(ConstKind::Bot));
    identity_origins(premise(0), 0, out);
    out.occ_origin[i.fresh] = {};
    out.conclusion = std::move(m);
    return std::move(out);
  }

  ForwardResult operator()(const TopInst& i) {
    Multisequent m = premise(0);
    auto top_it = i.fresh.find(i.top_occ);
    require(top_it != i.fresh.end() && top_it->second.is_const(ConstKind::Top),
            "top occurrence must be fresh with formula top");
    for (const auto& [o, f] : i.fresh)
      require(!m.occs.count(o), "top fresh occurrence id collides with premise");
    require(!i.added_seqs.empty(), "top adds at least one sequent");
    std::set<OccId> used_fresh;
    for (const auto& members : i.added_seqs) {
      require(members.count(i.top_occ), "added sequent must contain the top occurrence");
      for (OccId o : members) {
        if (i.fresh.count(o))
          used_fresh.insert(o);
        else
          require(m.occs.count(o), "added sequent references unknown occurrence");
      }
    }
    for (const auto& [o, f] : i.fresh)
      require(used_fresh.count(o), "unused fresh occurrence in top instance");
    identity_origins(premise(0), 0, out);
    for (const auto& [o, f] : i.fresh) {
      m.occs.insert_or_assign(o, f);
      out.occ_origin[o] = {};
    }
    for (const auto& members : i.added_seqs) {
      SeqId sid = m.add_seq(members);
      out.seq_origin[sid] = {};
    }
    out.conclusion = std::move(m);
    return std::move(out);
  }

  // Shared helper for par-like occurrence rewrites acting on all sequents
  // containing the principal occurrence(s).
  ForwardResult operator()(const ParInst& i) {
    Multisequent m = premise(0);
    require(m.occs.count(i.a) && m.occs.count(i.b), "par principal occurrences missing");
    require(i.a != i.b, "par principal occurrences must differ");
    require(!m.occs.count(i.fresh), "par result occurrence id not fresh");
    auto sa = m.sequents_containing(i.a);
    auto sb = m.sequents_containing(i.b);
    require(sa == sb && !sa.empty(), "par: A and B must share exactly the same sequents");
    Formula f = Formula::bin(Conn::Par, m.formula(i.a), m.formula(i.b));
    identity_origins(premise(0), 0, out);
    for (SeqId s : sa) {
      m.seqs[s].erase(i.a);
      m.seqs[s].erase(i.b);
      m.seqs[s].insert(i.fresh);
    }
    m.occs.erase(i.a);
    m.occs.erase(i.b);
    m.occs.insert_or_assign(i.fresh, f);
    out.occ_origin.erase(i.a);
    out.occ_origin.erase(i.b);
    out.occ_origin[i.fresh] = {{0, i.a}, {0, i.b}};
    out.conclusion = std::move(m);
    return std::move(out);
  }

  ForwardResult operator()(const PlusInst& i) {
    Multisequent m = premise(0);
    require(m.occs.count(i.a), "plus principal occurrence missing");
    require(!m.occs.count(i.fresh), "plus result occurrence id not fresh");
    auto sa = m.sequents_containing(i.a);
    require(!sa.empty(), "plus: principal occurrence in no sequent");
    Formula f = i.left ? Formula::bin(Conn::Plus, m.formula(i.a), i.other)
                       : Formula::bin(Conn::Plus, i.other, m.formula(i.a));
    identity_origins(premise(0), 0, out);
    for (SeqId s : sa) {
      m.seqs[s].erase(i.a);
      m.seqs[s].insert(i.fresh);
    }
    m.occs.erase(i.a);
    m.occs.insert_or_assign(i.fresh, f);
    out.occ_origin.erase(i.a);
    out.occ_origin[i.fresh] = {{0, i.a}};
    out.conclusion = std::move(m);
    return std::move(out);
  }

  ForwardResult operator()(const CParInst& i) {
    Multisequent m = premise(0);
    require(m.occs.count(i.a) && m.occs.count(i.b), "cpar principal occurrences missing");
    require(!m.occs.count(i.fresh), "cpar result occurrence id not fresh");
    auto sa = m.sequents_containing(i.a);
    auto sb = m.sequents_containing(i.b);
    require(!sa.empty() && sa.size() == sb.size(), "cpar: unmatched sequent counts");
    for (SeqId s : sa)
      require(!m.seqs[s].count(i.b), "cpar: A and B share a sequent");
    // Pair each {G, A} with a {G, B} having the identical context occurrence set.
    auto context_key = [&](SeqId s, OccId drop) {
      std::string k;
      for (OccId o : m.seqs[s])
        if (o != drop) k += std::to_string(o) + ",";
      return k;
    };
    std::map<std::string, std::vector<SeqId>> bs;
    for (SeqId s : sb) bs[context_key(s, i.b)].push_back(s);
    std::vector<std::pair<SeqId, SeqId>> pairs;
    for (SeqId s : sa) {
      auto it = bs.find(context_key(s, i.a));
      require(it != bs.end() && !it->second.empty(), "cpar: no matching B-sequent");
      pairs.push_back({s, it->second.back()});
      it->second.pop_back();
    }
    Formula f = Formula::bin(Conn::CPar, m.formula(i.a), m.formula(i.b));
    identity_origins(premise(0), 0, out);
    for (auto [as, bseq] : pairs) {
      m.seqs[as].erase(i.a);
      m.seqs[as].insert(i.fresh);
      m.seqs.erase(bseq);
      out.seq_origin[as] = {{0, as}, {0, bseq}};
      out.seq_origin.erase(bseq);
    }
    m.occs.erase(i.a);
    m.occs.erase(i.b);
    m.occs.insert_or_assign(i.fresh, f);
    out.occ_origin.erase(i.a);
    out.occ_origin.erase(i.b);
    out.occ_origin[i.fresh] = {{0, i.a}, {0, i.b}};
    out.conclusion = std::move(m);
    return std::move(out);
  }

  // Product-style combination used by tensor and cut.
  ForwardResult product(OccId a, OccId b, std::optional<Formula> combined, OccId fresh) {
    const Multisequent& p0 = premise(0);
    const Multisequent& p1 = premise(1);
    check_disjoint(p0, p1);
    require(p0.occs.count(a), "left principal occurrence missing");
    require(p1.occs.count(b), "right principal occurrence missing");
    auto sa = p0.sequents_containing(a);
    auto sb = p1.sequents_containing(b);
    require(!sa.empty() && !sb.empty(), "principal occurrence in no sequent");
    Multisequent m;
    for (const auto& [o, f] : p0.occs)
      if (o != a) m.occs.insert_or_assign(o, f);
    for (const auto& [o, f] : p1.occs)
      if (o != b) m.occs.insert_or_assign(o, f);
    for (const auto& [l, o] : p0.labels) if (m.occs.count(l)) m.labels[l] = o;
    for (const auto& [l, o] : p1.labels) if (m.occs.count(l)) m.labels[l] = o;
    identity_origins(p0, 0, out);
    identity_origins(p1, 1, out);
    out.occ_origin.erase(a);
    out.occ_origin.erase(b);
    std::set<SeqId> principal0(sa.begin(), sa.end());
    std::set<SeqId> principal1(sb.begin(), sb.end());
    for (const auto& [s, members] : p0.seqs)
      if (!principal0.count(s)) m.seqs[s] = members;
    for (const auto& [s, members] : p1.seqs)
      if (!principal1.count(s)) m.seqs[s] = members;
    if (combined) {
      require(!p0.occs.count(fresh) && !p1.occs.count(fresh),
              "result occurrence id not fresh");
      m.occs.insert_or_assign(fresh, *combined);
      out.occ_origin[fresh] = {{0, a}, {1, b}};
    }
    SeqId next = 0;
    for (const auto& [s, members] : p0.seqs) next = std::max(next, s + 1);
    for (const auto& [s, members] : p1.seqs) next = std::max(next, s + 1);
    for (SeqId s : sa)
      for (SeqId t : sb) {
        std::set<OccId> members;
        for (OccId o : p0.seqs.at(s))
          if (o != a) members.insert(o);
        for (OccId o : p1.seqs.at(t))
          if (o != b) members.insert(o);
        if (combined) members.insert(fresh);
        SeqId sid = next++;
        m.seqs[sid] = std::move(members);
        out.seq_origin[sid] = {{0, s}, {1, t}};
      }
    for (SeqId s : sa) out.seq_origin.erase(s);
    for (SeqId t : sb) out.seq_origin.erase(t);
    out.conclusion = std::move(m);
    return std::move(out);
  }

  ForwardResult operator()(const TensorInst& i) {
    Formula f = Formula::bin(Conn::Tensor, premise(0).formula(i.a), premise(1).formula(i.b));
    return product(i.a, i.b, f, i.fresh);
  }

  ForwardResult operator()(const CutInst& i) {
    require(premise(1).formula(i.b) == dual_in(variant, premise(0).formula(i.a)),
            "cut formulas are not dual");
    return product(i.a, i.b, std::nullopt, 0);
  }

  ForwardResult operator()(const CTimesInst& i) {
    const Multisequent& p0 = premise(0);
    const Multisequent& p1 = premise(1);
    check_disjoint(p0, p1);
    require(p0.occs.count(i.a) && p1.occs.count(i.b), "ctimes principal occurrences missing");
    auto sa = p0.sequents_containing(i.a);
    auto sb = p1.sequents_containing(i.b);
    require(!sa.empty() && !sb.empty(), "ctimes principal occurrence in no sequent");
    require(!p0.occs.count(i.fresh) && !p1.occs.count(i.fresh),
            "ctimes result occurrence id not fresh");
    Formula f = Formula::bin(Conn::CTimes, p0.formula(i.a), p1.formula(i.b));
    Multisequent m;
    for (const auto& [o, ff] : p0.occs)
      if (o != i.a) m.occs.insert_or_assign(o, ff);
    for (const auto& [o, ff] : p1.occs)
      if (o != i.b) m.occs.insert_or_assign(o, ff);
    m.occs.insert_or_assign(i.fresh, f);
    for (const auto& [s, members] : p0.seqs) m.seqs[s] = members;
    for (const auto& [s, members] : p1.seqs) m.seqs[s] = members;
    for (SeqId s : sa) {
      m.seqs[s].erase(i.a);
      m.seqs[s].insert(i.fresh);
    }
    for (SeqId t : sb) {
      m.seqs[t].erase(i.b);
      m.seqs[t].insert(i.fresh);
    }
    identity_origins(p0, 0, out);
    identity_origins(p1, 1, out);
    out.occ_origin.erase(i.a);
    out.occ_origin.erase(i.b);
    out.occ_origin[i.fresh] = {{0, i.a}, {1, i.b}};
    out.conclusion = std::move(m);
    return std::move(out);
  }

  ForwardResult operator()(const WithInst& i) {
    const Multisequent& p0 = premise(0);
    const Multisequent& p1 = premise(1);
    check_disjoint(p0, p1);
    require(p0.occs.count(i.a) && p1.occs.count(i.b), "with principal occurrences missing");
    require(!p0.occs.count(i.fresh) && !p1.occs.count(i.fresh),
            "with result occurrence id not fresh");
    // occ_1to0 must be a formula-preserving bijection identifying the two
    // superscripted copies, pairing b with a.
    require(i.occ_1to0.size() == p1.occs.size() && p0.occs.size() == p1.occs.size(),
            "with: copies have different occurrence counts");
    std::set<OccId> image;
    for (const auto& [o1, o0] : i.occ_1to0) {
      require(p1.occs.count(o1) && p0.occs.count(o0), "with: bad occurrence map");
      require(image.insert(o0).second, "with: occurrence map not injective");
      if (o1 == i.b)
        require(o0 == i.a, "with: principal occurrences must correspond");
      else
        require(p1.formula(o1) == p0.formula(o0), "with: copies disagree on a formula");
    }
    require(i.seq_1to0.size() == p1.seqs.size() && p0.seqs.size() == p1.seqs.size(),
            "with: copies have different sequent counts");
    std::set<SeqId> simage;
    for (const auto& [s1, s0] : i.seq_1to0) {
      require(p1.seqs.count(s1) && p0.seqs.count(s0), "with: bad sequent map");
      require(simage.insert(s0).second, "with: sequent map not injective");
      std::set<OccId> mapped;
      for (OccId o : p1.seqs.at(s1)) mapped.insert(i.occ_1to0.at(o));
      require(mapped == p0.seqs.at(s0), "with: copies disagree on a sequent");
    }
    Formula f = Formula::bin(Conn::With, p0.formula(i.a), p1.formula(i.b));
    Multisequent m = p0;
    auto sa = m.sequents_containing(i.a);
    require(!sa.empty(), "with principal occurrence in no sequent");
    for (SeqId s : sa) {
      m.seqs[s].erase(i.a);
      m.seqs[s].insert(i.fresh);
    }
    m.occs.erase(i.a);
    m.occs.insert_or_assign(i.fresh, f);
    std::map<OccId, OccId> inv;  // premise-0 occ -> premise-1 occ
    for (const auto& [o1, o0] : i.occ_1to0) inv[o0] = o1;
    for (const auto& [o, ff] : m.occs)
      if (o != i.fresh) out.occ_origin[o] = {{0, o}, {1, inv.at(o)}};
    out.occ_origin[i.fresh] = {{0, i.a}, {1, i.b}};
    std::map<SeqId, SeqId> sinv;
    for (const auto& [s1, s0] : i.seq_1to0) sinv[s0] = s1;
    for (const auto& [s, members] : m.seqs)
      out.seq_origin[s] = {{0, s}, {1, sinv.at(s)}};
    out.conclusion = std::move(m);
    return std::move(out);
  }

  ForwardResult operator()(const CloneInst& i) {
    Multisequent m = premise(0);
    require(m.seqs.count(i.src), "clone source sequent missing");
    require(!m.seqs.count(i.copy), "clone target id not fresh");
    m.seqs[i.copy] = m.seqs.at(i.src);
    identity_origins(premise(0), 0, out);
    out.seq_origin[i.copy] = {{0, i.src}};
    out.conclusion = std::move(m);
    return std::move(out);
  }

  ForwardResult operator()(const DerelictInst& i) {
    Multisequent m = premise(0);
    require(m.occs.count(i.occ), "dereliction occurrence missing");
    require(m.seqs.count(i.target), "dereliction target sequent missing");
    require(!m.seqs.at(i.target).count(i.occ), "occurrence already in target sequent");
    require(!m.sequents_containing(i.occ).empty(),
            "dereliction needs the occurrence present elsewhere");
    m.seqs[i.target].insert(i.occ);
    identity_origins(premise(0), 0, out);
    out.conclusion = std::move(m);
    return std::move(out);
  }

  ForwardResult operator()(const SeparateInst&) {
    const Multisequent& p0 = premise(0);
    const Multisequent& p1 = premise(1);
    check_disjoint(p0, p1);
    require(!p0.seqs.empty() && !p1.seqs.empty(), "separation premises must be non-empty");
    Multisequent m = p0;
    for (const auto& [o, f] : p1.occs) m.occs.insert_or_assign(o, f);
    for (const auto& [s, members] : p1.seqs) m.seqs[s] = members;
    for (const auto& [o, l] : p1.labels) m.labels[o] = l;
    identity_origins(p0, 0, out);
    identity_origins(p1, 1, out);
    out.conclusion = std::move(m);
    return std::move(out);
  }

  ForwardResult operator()(const SharedSInst& i) {
    const Multisequent& p = premise(0);
    std::size_t rows = i.grid.size();
    require(rows >= 1, "shared: empty grid");
    std::size_t cols = i.grid[0].size();
    require(cols >= 1 && i.delta.size() == cols, "shared: bad grid shape");
    require(i.copy_map.size() == rows, "shared: bad copy map shape");
    std::set<SeqId> grid_seqs;
    for (std::size_t r = 0; r < rows; ++r) {
      require(i.grid[r].size() == cols, "shared: ragged grid");
      require(i.copy_map[r].size() == cols, "shared: ragged copy map");
      for (std::size_t c = 0; c < cols; ++c) {
        require(p.seqs.count(i.grid[r][c]), "shared: grid sequent missing");
        require(grid_seqs.insert(i.grid[r][c]).second, "shared: duplicate grid sequent");
      }
    }
    std::set<OccId> delta_all;
    for (std::size_t c = 0; c < cols; ++c)
      for (OccId o : i.delta[c]) {
        require(p.occs.count(o), "shared: delta occurrence missing");
        delta_all.insert(o);
      }
    // Column membership: every grid sequent (r,c) contains exactly delta[c]
    // of the delta occurrences.
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) {
        const auto& members = p.seqs.at(i.grid[r][c]);
        for (OccId o : i.delta[c]) require(members.count(o), "shared: delta not shared down column");
        for (OccId o : members)
          if (delta_all.count(o))
            require(i.delta[c].count(o), "shared: stray delta occurrence in grid sequent");
      }
    // Row contexts and their copies.
    std::vector<std::set<OccId>> gamma0(rows);
    std::set<OccId> gamma_all;
    for (std::size_t r = 0; r < rows; ++r) {
      for (OccId o : p.seqs.at(i.grid[r][0]))
        if (!i.delta[0].count(o)) gamma0[r].insert(o);
      for (std::size_t c = 1; c < cols; ++c) {
        const auto& cm = i.copy_map[r][c];
        require(cm.size() == gamma0[r].size(), "shared: copy map size mismatch");
        std::set<OccId> expect;
        for (const auto& [o0, oc] : cm) {
          require(gamma0[r].count(o0), "shared: copy map domain mismatch");
          require(p.occs.count(oc), "shared: copy occurrence missing");
          require(p.formula(o0) == p.formula(oc), "shared: copy formula mismatch");
          expect.insert(oc);
        }
        std::set<OccId> actual;
        for (OccId o : p.seqs.at(i.grid[r][c]))
          if (!i.delta[c].count(o)) actual.insert(o);
        require(actual == expect, "shared: column context is not the declared copy");
      }
      gamma_all.insert(gamma0[r].begin(), gamma0[r].end());
      for (std::size_t c = 1; c < cols; ++c)
        for (const auto& [o0, oc] : i.copy_map[r][c]) gamma_all.insert(oc);
    }
    require([&] {
      for (OccId o : gamma_all)
        if (delta_all.count(o)) return false;
      return true;
    }(), "shared: context and delta occurrences overlap");
    // Context and delta occurrences must stay inside the grid.
    for (const auto& [s, members] : p.seqs) {
      if (grid_seqs.count(s)) continue;
      for (OccId o : members)
        require(!gamma_all.count(o) && !delta_all.count(o),
                "shared: principal occurrence leaks outside the grid");
    }
    // Cross-row shared contexts must agree on their copies.
    for (std::size_t c = 1; c < cols; ++c) {
      std::map<OccId, OccId> seen;
      for (std::size_t r = 0; r < rows; ++r)
        for (const auto& [o0, oc] : i.copy_map[r][c]) {
          auto [it, inserted] = seen.emplace(o0, oc);
          require(inserted || it->second == oc, "shared: inconsistent copies of a shared context");
        }
    }

    Multisequent m = p;
    identity_origins(p, 0, out);
    // Remove copy occurrences; conclusion rows reuse the column-0 ids.
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 1; c < cols; ++c)
        for (const auto& [o0, oc] : i.copy_map[r][c]) {
          m.occs.erase(oc);
          m.labels.erase(oc);
          out.occ_origin.erase(oc);
        }
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        std::set<OccId> members = gamma0[r];
        members.insert(i.delta[c].begin(), i.delta[c].end());
        m.seqs[i.grid[r][c]] = std::move(members);
      }
      for (OccId o : gamma0[r]) {
        std::vector<std::pair<std::size_t, OccId>> origin = {{0, o}};
        for (std::size_t c = 1; c < cols; ++c) origin.push_back({0, i.copy_map[r][c].at(o)});
        out.occ_origin[o] = std::move(origin);
      }
    }
    for (OccId o : delta_all) m.occs.insert_or_assign(o, Formula::mod(ModKind::Shared, p.formula(o)));
    out.conclusion = std::move(m);
    return std::move(out);
  }

  ForwardResult operator()(const UnsharedUInst& i) {
    const Multisequent& p = premise(0);
    require(p.occs.count(i.a), "unshared: principal occurrence missing");
    auto sa = p.sequents_containing(i.a);
    require(!sa.empty(), "unshared: principal occurrence in no sequent");
    std::set<SeqId> principal(sa.begin(), sa.end());
    std::set<OccId> context;
    for (SeqId s : sa)
      for (OccId o : p.seqs.at(s))
        if (o != i.a) context.insert(o);
    for (const auto& [s, members] : p.seqs) {
      if (principal.count(s)) continue;
      for (OccId o : members)
        require(!context.count(o) && o != i.a,
                "unshared: principal material leaks outside principal sequents");
    }
    Multisequent m = p;
    m.occs.insert_or_assign(i.a, Formula::mod(ModKind::Unshared, p.formula(i.a)));
    for (OccId o : context) m.occs.insert_or_assign(o, Formula::mod(ModKind::Shared, p.formula(o)));
    identity_origins(p, 0, out);
    out.conclusion = std::move(m);
    return std::move(out);
  }
};

}  // namespace

ForwardResult apply_forward(CalculusVariant v, const RuleInstance& inst,
                            const std::vector<Multisequent>& premises) {
  if (!rule_in_variant(v, inst.rule()))
    bad(std::string("rule ") + rule_name(inst.rule()) + " not available in this variant");
  if (premises.size() != inst.arity()) bad("wrong number of premises");
  for (const auto& p : premises) p.validate();
  Forward fw{v, premises, {}};
  ForwardResult r = std::visit(fw, inst.v);
  return r;
}

}  // namespace cmall
