#include <algorithm>
#include <functional>
#include <numeric>

#include "cmall/calculus.hpp"

namespace cmall {

namespace {

Multisequent project(const Multisequent& g, const std::set<SeqId>& keep) {
  Multisequent m;
  for (SeqId s : keep) m.seqs[s] = g.seqs.at(s);
  for (const auto& [s, members] : m.seqs)
    for (OccId o : members) {
      m.occs.insert_or_assign(o, g.occs.at(o));
      auto it = g.labels.find(o);
      if (it != g.labels.end()) m.labels[o] = it->second;
    }
  return m;
}

/// Connected components of a set of sequents, connected via shared occurrences.
std::vector<std::set<SeqId>> components_of(const Multisequent& g,
                                           const std::vector<SeqId>& seqs) {
  std::map<SeqId, std::size_t> idx;
  for (std::size_t i = 0; i < seqs.size(); ++i) idx[seqs[i]] = i;
  std::vector<std::size_t> parent(seqs.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<OccId, std::size_t> first_seen;
  for (std::size_t i = 0; i < seqs.size(); ++i)
    for (OccId o : g.seqs.at(seqs[i])) {
      auto [it, inserted] = first_seen.emplace(o, i);
      if (!inserted) parent[find(i)] = find(it->second);
    }
  std::map<std::size_t, std::set<SeqId>> groups;
  for (std::size_t i = 0; i < seqs.size(); ++i) groups[find(i)].insert(seqs[i]);
  std::vector<std::set<SeqId>> out;
  for (auto& [r, grp] : groups) out.push_back(std::move(grp));
  return out;
}

std::set<OccId> occs_of(const Multisequent& g, const std::set<SeqId>& seqs) {
  std::set<OccId> out;
  for (SeqId s : seqs)
    for (OccId o : g.seqs.at(s)) out.insert(o);
  return out;
}

struct Enumerator {
  CalculusVariant v;
  const Multisequent& g;
  const BackwardOptions& opts;
  std::vector<RuleApplication> out;
  std::set<std::string> seen;

  bool on(Rule r) const { return rule_in_variant(v, r); }

  void push(RuleInstance inst, std::vector<Multisequent> premises) {
    std::string key = rule_name(inst.rule());
    for (const auto& p : premises) {
      key += '\x01';
      key += canonicalize(p).bytes;
    }
    if (!seen.insert(std::move(key)).second) return;
    out.push_back({std::move(inst), std::move(premises)});
  }

  void leaves() {
    if (g.empty()) {
      push({EmptyLeafInst{}}, {});
      return;
    }
    if (g.seqs.size() == 1) {
      const auto& members = g.seqs.begin()->second;
      SeqId sid = g.seqs.begin()->first;
      if (members.size() == 1 && g.occs.size() == 1) {
        OccId o = *members.begin();
        if (g.formula(o).is_const(ConstKind::One)) push({OneInst{o, sid}}, {});
      }
      if (members.size() == 2 && g.occs.size() == 2) {
        auto it = members.begin();
        OccId o1 = *it++, o2 = *it;
        try {
          if (dual_in(v, g.formula(o1)) == g.formula(o2))
            push({AxiomInst{g.formula(o1), o1, o2, sid}}, {});
        } catch (const std::logic_error&) {
        }
      }
    }
  }

  void bot_rule() {
    for (const auto& [o, f] : g.occs) {
      if (!f.is_const(ConstKind::Bot)) continue;
      auto targets = g.sequents_containing(o);
      Multisequent p = g;
      for (SeqId s : targets) p.seqs[s].erase(o);
      p.occs.erase(o);
      p.labels.erase(o);
      push({BotInst{o, targets}}, {std::move(p)});
    }
  }

  void top_rule() {
    for (const auto& [o, f] : g.occs) {
      if (!f.is_const(ConstKind::Top)) continue;
      auto removed = g.sequents_containing(o);
      std::set<SeqId> removed_set(removed.begin(), removed.end());
      TopInst inst;
      inst.top_occ = o;
      Multisequent p = g;
      for (const auto& [s, members] : g.seqs)
        if (removed_set.count(s)) inst.added_seqs.push_back(members);
      for (SeqId s : removed) p.seqs.erase(s);
      for (const auto& [oo, ff] : g.occs) {
        bool survives = false;
        for (const auto& [s, members] : p.seqs)
          if (members.count(oo)) {
            survives = true;
            break;
          }
        if (!survives) {
          inst.fresh.insert_or_assign(oo, ff);
          p.occs.erase(oo);
          p.labels.erase(oo);
        }
      }
      push({std::move(inst)}, {std::move(p)});
    }
  }

  void par_rule() {
    for (const auto& [x, f] : g.occs) {
      if (!f.is_bin(Conn::Par)) continue;
      OccId a = g.fresh_occ(), b = a + 1;
      Multisequent p = g;
      for (SeqId s : g.sequents_containing(x)) {
        p.seqs[s].erase(x);
        p.seqs[s].insert(a);
        p.seqs[s].insert(b);
      }
      p.occs.erase(x);
      p.labels.erase(x);
      p.occs.insert_or_assign(a, f.left());
      p.occs.insert_or_assign(b, f.right());
      push({ParInst{a, b, x}}, {std::move(p)});
    }
  }

  void plus_rules() {
    for (const auto& [x, f] : g.occs) {
      if (!f.is_bin(Conn::Plus)) continue;
      for (bool left : {true, false}) {
        OccId a = g.fresh_occ();
        Multisequent p = g;
        for (SeqId s : g.sequents_containing(x)) {
          p.seqs[s].erase(x);
          p.seqs[s].insert(a);
        }
        p.occs.erase(x);
        p.labels.erase(x);
        p.occs.insert_or_assign(a, left ? f.left() : f.right());
        push({PlusInst{a, left, left ? f.right() : f.left(), x}}, {std::move(p)});
      }
    }
  }

  void cpar_rule() {
    for (const auto& [x, f] : g.occs) {
      if (!f.is_bin(Conn::CPar)) continue;
      OccId a = g.fresh_occ(), b = a + 1;
      Multisequent p = g;
      SeqId next = g.fresh_seq();
      for (SeqId s : g.sequents_containing(x)) {
        std::set<OccId> twin = p.seqs.at(s);
        twin.erase(x);
        p.seqs[s] = twin;
        p.seqs[s].insert(a);
        twin.insert(b);
        p.seqs[next++] = std::move(twin);
      }
      p.occs.erase(x);
      p.labels.erase(x);
      p.occs.insert_or_assign(a, f.left());
      p.occs.insert_or_assign(b, f.right());
      push({CParInst{a, b, x}}, {std::move(p)});
    }
  }

  void with_rule() {
    for (const auto& [x, f] : g.occs) {
      if (!f.is_bin(Conn::With)) continue;
      OccId a = g.fresh_occ();
      Multisequent p0 = g;
      for (SeqId s : g.sequents_containing(x)) {
        p0.seqs[s].erase(x);
        p0.seqs[s].insert(a);
      }
      p0.occs.erase(x);
      p0.labels.erase(x);
      p0.occs.insert_or_assign(a, f.left());
      OccId occ_off = a + 1;
      SeqId seq_off = g.fresh_seq();
      OccId b = a + occ_off;
      Multisequent p1;
      WithInst inst;
      inst.a = a;
      inst.b = b;
      inst.fresh = x;
      for (const auto& [o, ff] : p0.occs) {
        p1.occs.insert_or_assign(o + occ_off, (o == a) ? f.right() : ff);
        inst.occ_1to0[o + occ_off] = o;
      }
      for (const auto& [s, members] : p0.seqs) {
        std::set<OccId> shifted;
        for (OccId o : members) shifted.insert(o + occ_off);
        p1.seqs[s + seq_off] = std::move(shifted);
        inst.seq_1to0[s + seq_off] = s;
      }
      push({std::move(inst)}, {std::move(p0), std::move(p1)});
    }
  }

  /// Assign the non-principal sequents of a split to the two premises.
  /// Components touching `side0` occurrences go left, `side1` right; a
  /// component touching both kills the split; untouched components are
  /// enumerated (capped).  Calls emit(side0 seqs, side1 seqs).
  template <class Emit>
  void assign_rest(const std::vector<SeqId>& rest, const std::set<OccId>& side0,
                   const std::set<OccId>& side1, Emit emit) {
    auto comps = components_of(g, rest);
    std::set<SeqId> fixed0, fixed1;
    std::vector<std::set<SeqId>> free;
    for (auto& comp : comps) {
      bool t0 = false, t1 = false;
      for (OccId o : occs_of(g, comp)) {
        if (side0.count(o)) t0 = true;
        if (side1.count(o)) t1 = true;
      }
      if (t0 && t1) return;
      if (t0)
        fixed0.insert(comp.begin(), comp.end());
      else if (t1)
        fixed1.insert(comp.begin(), comp.end());
      else
        free.push_back(std::move(comp));
    }
    std::size_t nfree = free.size();
    std::size_t limit = nfree <= static_cast<std::size_t>(opts.max_free_side_choices)
                            ? (std::size_t{1} << nfree)
                            : 1;
    for (std::size_t mask = 0; mask < limit; ++mask) {
      std::set<SeqId> s0 = fixed0, s1 = fixed1;
      for (std::size_t k = 0; k < nfree; ++k) {
        auto& dst = (mask >> k) & 1 ? s1 : s0;
        dst.insert(free[k].begin(), free[k].end());
      }
      emit(s0, s1);
    }
  }

  void tensor_rule() {
    for (const auto& [x, f] : g.occs) {
      if (!f.is_bin(Conn::Tensor)) continue;
      auto tv = g.sequents_containing(x);
      std::set<SeqId> tset(tv.begin(), tv.end());
      std::vector<OccId> ctx;
      {
        std::set<OccId> u;
        for (SeqId s : tv)
          for (OccId o : g.seqs.at(s))
            if (o != x) u.insert(o);
        ctx.assign(u.begin(), u.end());
      }
      if (ctx.size() > static_cast<std::size_t>(opts.max_tensor_context)) continue;
      std::vector<SeqId> rest;
      for (const auto& [s, members] : g.seqs)
        if (!tset.count(s)) rest.push_back(s);
      for (std::size_t mask = 0; mask < (std::size_t{1} << ctx.size()); ++mask) {
        std::set<OccId> G, D;
        for (std::size_t k = 0; k < ctx.size(); ++k)
          ((mask >> k) & 1 ? D : G).insert(ctx[k]);
        // The principal sequents must form the full rows x columns grid.
        std::set<std::set<OccId>> rows, cols;
        std::set<std::pair<std::set<OccId>, std::set<OccId>>> cells;
        for (SeqId s : tv) {
          std::set<OccId> rg, rd;
          for (OccId o : g.seqs.at(s)) {
            if (o == x) continue;
            (G.count(o) ? rg : rd).insert(o);
          }
          rows.insert(rg);
          cols.insert(rd);
          cells.insert({std::move(rg), std::move(rd)});
        }
        if (cells.size() != tv.size() || rows.size() * cols.size() != tv.size()) continue;
        assign_rest(rest, G, D, [&](const std::set<SeqId>& r0, const std::set<SeqId>& r1) {
          OccId a = g.fresh_occ(), b = a + 1;
          Multisequent p0 = project(g, r0);
          Multisequent p1 = project(g, r1);
          p0.occs.insert_or_assign(a, f.left());
          p1.occs.insert_or_assign(b, f.right());
          for (OccId o : G) p0.occs.insert_or_assign(o, g.occs.at(o));
          for (OccId o : D) p1.occs.insert_or_assign(o, g.occs.at(o));
          SeqId next = g.fresh_seq();
          for (const auto& row : rows) {
            std::set<OccId> members = row;
            members.insert(a);
            p0.seqs[next++] = std::move(members);
          }
          for (const auto& col : cols) {
            std::set<OccId> members = col;
            members.insert(b);
            p1.seqs[next++] = std::move(members);
          }
          push({TensorInst{a, b, x}}, {std::move(p0), std::move(p1)});
        });
      }
    }
  }

  void ctimes_rule() {
    for (const auto& [x, f] : g.occs) {
      if (!f.is_bin(Conn::CTimes)) continue;
      auto tv = g.sequents_containing(x);
      if (tv.size() > 20) continue;
      std::set<SeqId> tset(tv.begin(), tv.end());
      std::vector<SeqId> rest;
      for (const auto& [s, members] : g.seqs)
        if (!tset.count(s)) rest.push_back(s);
      // Proper bipartitions of the principal sequents with disjoint contexts.
      for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << tv.size()); ++mask) {
        std::set<SeqId> ta, tb;
        for (std::size_t k = 0; k < tv.size(); ++k)
          ((mask >> k) & 1 ? tb : ta).insert(tv[k]);
        std::set<OccId> ca = occs_of(g, ta), cb = occs_of(g, tb);
        ca.erase(x);
        cb.erase(x);
        bool overlap = false;
        for (OccId o : ca)
          if (cb.count(o)) {
            overlap = true;
            break;
          }
        if (overlap) continue;
        assign_rest(rest, ca, cb, [&](const std::set<SeqId>& r0, const std::set<SeqId>& r1) {
          OccId a = g.fresh_occ(), b = a + 1;
          std::set<SeqId> keep0 = r0, keep1 = r1;
          keep0.insert(ta.begin(), ta.end());
          keep1.insert(tb.begin(), tb.end());
          Multisequent p0 = project(g, keep0);
          Multisequent p1 = project(g, keep1);
          p0.occs.erase(x);
          p0.labels.erase(x);
          p1.occs.erase(x);
          p1.labels.erase(x);
          p0.occs.insert_or_assign(a, f.left());
          p1.occs.insert_or_assign(b, f.right());
          for (SeqId s : ta) {
            p0.seqs[s].erase(x);
            p0.seqs[s].insert(a);
          }
          for (SeqId s : tb) {
            p1.seqs[s].erase(x);
            p1.seqs[s].insert(b);
          }
          push({CTimesInst{a, b, x}}, {std::move(p0), std::move(p1)});
        });
      }
    }
  }

  void clone_rule() {
    for (auto it1 = g.seqs.begin(); it1 != g.seqs.end(); ++it1)
      for (auto it2 = std::next(it1); it2 != g.seqs.end(); ++it2) {
        if (it1->second != it2->second) continue;
        Multisequent p = g;
        p.seqs.erase(it2->first);
        push({CloneInst{it1->first, it2->first}}, {std::move(p)});
      }
  }

  void derelict_rule() {
    for (const auto& [o, f] : g.occs) {
      auto sv = g.sequents_containing(o);
      if (sv.size() < 2) continue;
      for (SeqId s : sv) {
        Multisequent p = g;
        p.seqs[s].erase(o);
        push({DerelictInst{o, s}}, {std::move(p)});
      }
    }
  }

  void separate_rule() {
    std::vector<SeqId> all;
    for (const auto& [s, members] : g.seqs) all.push_back(s);
    auto comps = components_of(g, all);
    std::size_t k = comps.size();
    if (k < 2) return;
    std::size_t limit = k <= static_cast<std::size_t>(opts.max_components)
                            ? (std::size_t{1} << (k - 1))
                            : 2;
    // Component 0 stays on the left; masks over the rest.
    for (std::size_t mask = 1; mask < limit; ++mask) {
      std::set<SeqId> s0 = comps[0], s1;
      for (std::size_t i = 1; i < k; ++i) {
        auto& dst = (mask >> (i - 1)) & 1 ? s1 : s0;
        dst.insert(comps[i].begin(), comps[i].end());
      }
      if (s1.empty()) continue;
      push({SeparateInst{}}, {project(g, s0), project(g, s1)});
    }
  }

  void shared_rule() {
    std::vector<OccId> shared;
    for (const auto& [o, f] : g.occs)
      if (f.is_mod(ModKind::Shared)) shared.push_back(o);
    if (shared.empty() ||
        shared.size() > static_cast<std::size_t>(opts.max_shared_subsets))
      return;
    for (std::size_t mask = 1; mask < (std::size_t{1} << shared.size()); ++mask) {
      std::set<OccId> dset;
      for (std::size_t k = 0; k < shared.size(); ++k)
        if ((mask >> k) & 1) dset.insert(shared[k]);
      try_shared_subset(dset);
    }
  }

  void try_shared_subset(const std::set<OccId>& dset) {
    std::set<SeqId> tset;
    for (OccId d : dset)
      for (SeqId s : g.sequents_containing(d)) tset.insert(s);
    if (tset.empty()) return;
    // Columns keyed by delta part, rows by context part.
    std::map<std::set<OccId>, std::size_t> col_of, row_of;
    std::vector<std::set<OccId>> col_delta, row_gamma;
    std::map<std::pair<std::size_t, std::size_t>, SeqId> cell;
    for (SeqId s : tset) {
      std::set<OccId> dpart, gpart;
      for (OccId o : g.seqs.at(s)) (dset.count(o) ? dpart : gpart).insert(o);
      auto [cit, cnew] = col_of.emplace(dpart, col_delta.size());
      if (cnew) col_delta.push_back(dpart);
      auto [rit, rnew] = row_of.emplace(gpart, row_gamma.size());
      if (rnew) row_gamma.push_back(gpart);
      if (!cell.emplace(std::make_pair(rit->second, cit->second), s).second) return;
    }
    std::size_t nrows = row_gamma.size(), ncols = col_delta.size();
    if (cell.size() != nrows * ncols || cell.size() != tset.size()) return;
    // Context occurrences must live entirely inside their rows of the grid.
    for (std::size_t r = 0; r < nrows; ++r)
      for (OccId o : row_gamma[r])
        for (SeqId s : g.sequents_containing(o))
          if (!tset.count(s)) return;
    SharedSInst inst;
    inst.delta = col_delta;
    inst.grid.assign(nrows, std::vector<SeqId>(ncols));
    inst.copy_map.assign(nrows, std::vector<std::map<OccId, OccId>>(ncols));
    for (const auto& [rc, s] : cell) inst.grid[rc.first][rc.second] = s;
    Multisequent p = g;
    for (OccId d : dset) p.occs.insert_or_assign(d, g.formula(d).body());
    OccId next = g.fresh_occ();
    std::map<std::pair<OccId, std::size_t>, OccId> copies;
    for (std::size_t c = 1; c < ncols; ++c)
      for (std::size_t r = 0; r < nrows; ++r)
        for (OccId o : row_gamma[r]) {
          auto [it, created] = copies.emplace(std::make_pair(o, c), next);
          if (created) {
            p.occs.insert_or_assign(it->second, g.occs.at(o));
            ++next;
          }
          inst.copy_map[r][c][o] = it->second;
        }
    for (std::size_t r = 0; r < nrows; ++r)
      for (std::size_t c = 1; c < ncols; ++c) {
        std::set<OccId> members = col_delta[c];
        for (OccId o : row_gamma[r]) members.insert(copies.at({o, c}));
        p.seqs[inst.grid[r][c]] = std::move(members);
      }
    push({std::move(inst)}, {std::move(p)});
  }

  void unshared_rule() {
    for (const auto& [u, f] : g.occs) {
      if (!f.is_mod(ModKind::Unshared)) continue;
      auto sv = g.sequents_containing(u);
      std::set<SeqId> sset(sv.begin(), sv.end());
      std::set<OccId> ctx;
      for (SeqId s : sv)
        for (OccId o : g.seqs.at(s))
          if (o != u) ctx.insert(o);
      bool ok = true;
      for (OccId c : ctx) {
        if (!g.formula(c).is_mod(ModKind::Shared)) {
          ok = false;
          break;
        }
        for (SeqId s : g.sequents_containing(c))
          if (!sset.count(s)) {
            ok = false;
            break;
          }
        if (!ok) break;
      }
      if (!ok) continue;
      Multisequent p = g;
      p.occs.insert_or_assign(u, f.body());
      for (OccId c : ctx) p.occs.insert_or_assign(c, g.formula(c).body());
      push({UnsharedUInst{u}}, {std::move(p)});
    }
  }

  std::vector<RuleApplication> run() {
    leaves();
    bot_rule();
    par_rule();
    cpar_rule();
    derelict_rule();
    clone_rule();
    separate_rule();
    if (on(Rule::Top)) top_rule();
    if (on(Rule::Plus1)) plus_rules();
    if (on(Rule::With)) with_rule();
    if (on(Rule::Tensor)) tensor_rule();
    if (on(Rule::CTimes)) ctimes_rule();
    if (on(Rule::SharedS)) shared_rule();
    if (on(Rule::UnsharedU)) unshared_rule();
    return std::move(out);
  }
};

}  // namespace

std::vector<RuleApplication> enumerate_backward(CalculusVariant v, const Multisequent& goal,
                                                const BackwardOptions& opts) {
  goal.validate();
  Enumerator e{v, goal, opts, {}, {}};
  return e.run();
}

}  // namespace cmall
