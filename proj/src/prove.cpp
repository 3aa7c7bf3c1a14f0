#include "cdt/prove.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "cdt/errors.hpp"
#include "cdt/par.hpp"

#ifdef CDT_HAVE_OPENMP
#include <omp.h>
#endif

namespace cdt {

namespace {

// Formula tree size: the number of inner (implication) nodes, matching
// the FT column of the property reports.
int64_t formula_tree_size(TermId t) { return term_inner_count(t); }

bool within_thresholds(TermId t, const EnumPolicy& pol) {
  if (pol.max_ft > 0 && formula_tree_size(t) > pol.max_ft) return false;
  if (pol.max_fh > 0 && term_height(t) > pol.max_fh) return false;
  if (pol.max_fv > 0 &&
      static_cast<int64_t>(term_vars(t).size()) > pol.max_fv)
    return false;
  return true;
}

// ------------------------------------------------------------ detacher
// One detachment step fused with measurement and canonical renaming.
// The major premise's theorem must be variable-disjoint from the minor
// copy (majors are canonically renamed, minor copies use fresh
// variables). The conclusion is never materialized when its tree size
// or height exceeds the build limits — instantiation cannot shrink
// either measure, so a conclusion over goal-sized limits can neither be
// retained nor subsume the goal. Scratch state is reused across calls;
// one instance per thread.
enum class CandStatus : uint8_t { Undefined, OverLimits, Built };

struct BuildLimits {
  int64_t ft = 0;  // 0 = unlimited
  int64_t fh = 0;
};

class Detacher {
 public:
  CandStatus run(TermId major, TermId minor_copy, const BuildLimits& lim,
                 TermId* out) {
    if (term_kind(major) == TermKind::Var) {
      // A fully general major premise concludes a fully general theorem.
      *out = mk_var(pool_var(RenamePool::Internal, 0));
      return CandStatus::Built;
    }
    if (term_kind(major) != TermKind::Fun || term_sym(major) != fn_i() ||
        term_nargs(major) != 2)
      return CandStatus::Undefined;
    reset();
    if (!decompose(term_arg(major, 0), minor_copy)) return CandStatus::Undefined;
    if (!acyclic()) return CandStatus::Undefined;
    TermId conclusion = term_arg(major, 1);
    Meas m = measure(conclusion);
    if ((lim.ft > 0 && m.inner > lim.ft) || (lim.fh > 0 && m.height > lim.fh))
      return CandStatus::OverLimits;
    *out = build(conclusion);
    return CandStatus::Built;
  }

 private:
  struct Meas {
    int64_t inner;
    int64_t height;
  };

  void reset() {
    bind_.clear();
    decomposed_.clear();
    cyc_state_.clear();
    meas_memo_.clear();
    canon_memo_.clear();
    canon_var_.clear();
    next_canon_ = 0;
  }

  TermId walk(TermId t) const {
    while (term_kind(t) == TermKind::Var) {
      auto it = bind_.find(term_var(t));
      if (it == bind_.end()) break;
      t = it->second;
    }
    return t;
  }

  // Triangular unification of a pair of terms; false on symbol clash.
  bool decompose(TermId a0, TermId b0) {
    work_.clear();
    work_.emplace_back(a0, b0);
    while (!work_.empty()) {
      auto [a, b] = work_.back();
      work_.pop_back();
      a = walk(a);
      b = walk(b);
      if (a == b) continue;
      if (term_kind(a) == TermKind::Var) {
        bind_.emplace(term_var(a), b);
        continue;
      }
      if (term_kind(b) == TermKind::Var) {
        bind_.emplace(term_var(b), a);
        continue;
      }
      if (term_kind(a) != term_kind(b) || term_sym(a) != term_sym(b) ||
          term_nargs(a) != term_nargs(b))
        return false;
      uint64_t key = pair_key(a, b);
      if (!decomposed_.insert(key).second) continue;
      for (int i = term_nargs(a) - 1; i >= 0; --i)
        work_.emplace_back(term_arg(a, i), term_arg(b, i));
    }
    return true;
  }

  static uint64_t pair_key(TermId a, TermId b) {
    if (b < a) std::swap(a, b);
    return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) |
           static_cast<uint32_t>(b);
  }

  // Occurs check over the whole triangular system: a unifier exists iff
  // no bound variable depends on itself.
  bool acyclic() {
    for (const auto& [v, img] : bind_) {
      (void)img;
      if (!visit(v)) return false;
    }
    return true;
  }

  bool visit(VarId v) {
    auto st = cyc_state_.find(v);
    if (st != cyc_state_.end()) return st->second == 2;
    auto b = bind_.find(v);
    if (b == bind_.end()) {
      cyc_state_[v] = 2;
      return true;
    }
    cyc_state_[v] = 1;
    for (VarId w : term_vars(b->second))
      if (bind_.count(w) && !visit(w)) return false;
    cyc_state_[v] = 2;
    return true;
  }

  // Tree size and height of the conclusion under the bindings, without
  // materializing it. Nodes resolve uniquely under one unifier, so a
  // per-call node memo is sound.
  Meas measure(TermId t) {
    t = walk(t);
    switch (term_kind(t)) {
      case TermKind::Var:
      case TermKind::Const:
        return {0, 0};
      case TermKind::Fun:
        break;
    }
    auto it = meas_memo_.find(t);
    if (it != meas_memo_.end()) return it->second;
    Meas m{1, 0};
    int64_t maxh = -1;
    for (int i = 0; i < term_nargs(t); ++i) {
      Meas c = measure(term_arg(t, i));
      m.inner += c.inner;
      if (c.height > maxh) maxh = c.height;
    }
    m.height = maxh + 1;
    meas_memo_.emplace(t, m);
    return m;
  }

  // Materialize the conclusion in canonical form directly: free
  // variables get pool names in first-occurrence order and only
  // canonical nodes are interned.
  TermId build(TermId t) {
    t = walk(t);
    switch (term_kind(t)) {
      case TermKind::Var: {
        VarId v = term_var(t);
        auto it = canon_var_.find(v);
        if (it != canon_var_.end()) return it->second;
        TermId r = mk_var(pool_var(RenamePool::Internal, next_canon_++));
        canon_var_.emplace(v, r);
        return r;
      }
      case TermKind::Const:
        return t;
      case TermKind::Fun:
        break;
    }
    auto it = canon_memo_.find(t);
    if (it != canon_memo_.end()) return it->second;
    std::vector<TermId> args;
    args.reserve(term_nargs(t));
    for (int i = 0; i < term_nargs(t); ++i) args.push_back(build(term_arg(t, i)));
    TermId r = mk_fun(term_sym(t), args);
    canon_memo_.emplace(t, r);
    return r;
  }

  std::unordered_map<VarId, TermId> bind_;
  std::vector<std::pair<TermId, TermId>> work_;
  std::unordered_set<uint64_t> decomposed_;
  std::unordered_map<VarId, uint8_t> cyc_state_;  // 1 in progress, 2 done
  std::unordered_map<TermId, Meas> meas_memo_;
  std::unordered_map<TermId, TermId> canon_memo_;
  std::unordered_map<VarId, TermId> canon_var_;
  size_t next_canon_ = 0;
};

// Immutable chain of (compound subterm, its theorem) pairs carried by
// each retained lemma, newest first. A lemma's chain shares its tail
// with the lemma it was built from, so growth is O(1) per lemma.
struct SubMgt {
  DTermId dterm;
  TermId mgt;
  std::shared_ptr<const SubMgt> next;
};
using SubChain = std::shared_ptr<const SubMgt>;

struct Retained {
  DTermId dterm;
  TermId mgt;
  int level;
  int64_t ft;
  int64_t fh;
  SubChain subs;  // all compound subterms incl. self (subterm policy only)
};

// A candidate structure is kept as its (major, minor) constituents with
// their theorems; the D-node itself is only materialized for retained
// lemmas and proof winners, so discarded candidates leave no trace in
// the structure store.
struct Cand {
  DTermId major;
  DTermId minor;
  TermId major_mgt;
  TermId minor_mgt;
  SubChain container_subs;  // chain of the lemma this candidate extends
};

// Level-by-level lemma engine shared by prove() and enumerate_lemmas().
class Engine {
 public:
  Engine(const AxiomAssignment& alpha, const EnumPolicy& pol,
         const BuildLimits& build_lim)
      : alpha_(alpha), pol_(pol), build_lim_(build_lim) {
    for (const auto& [p, formula] : alpha.bindings()) {
      (void)formula;
      axiom_prims_.push_back(p);
    }
    if (axiom_prims_.empty())
      throw MissingAxiomError("the axiom assignment binds no axioms");
  }

  // Seed level 0 with the axiom leaves.
  void seed() {
    level_rows_.emplace_back();
    LevelStats st;
    st.level = 0;
    for (PrimId p : axiom_prims_) {
      DTermId leaf = d_leaf(p);
      TermId m = alpha_.mgt_arg_strict(leaf);
      axiom_leaves_.emplace_back(leaf, m);
      ++st.generated;
      Pending pend;
      pend.major = leaf;
      pend.minor = kNoDTerm;
      admit(pend, m, &st);
    }
    commit_level(0, &st);
    stats_.push_back(st);
    trace(st);
  }

  // Generate, evaluate and retain one level; returns the level's
  // candidates and their theorems through the out-parameters so the
  // caller can run the goal test before retention takes effect.
  void run_level(int n, std::vector<Cand>* cands, std::vector<TermId>* mgts) {
    generate(n, cands);
    std::vector<CandStatus> status;
    evaluate(*cands, mgts, &status);
    LevelStats st;
    st.level = n;
    st.generated = static_cast<int64_t>(cands->size());
    level_rows_.emplace_back();
    for (size_t i = 0; i < cands->size(); ++i) {
      switch (status[i]) {
        case CandStatus::Undefined:
          ++st.discarded_undefined;
          continue;
        case CandStatus::OverLimits:
          ++st.discarded_threshold;
          continue;
        case CandStatus::Built:
          break;
      }
      const Cand& c = (*cands)[i];
      Pending pend;
      pend.major = c.major;
      pend.minor = c.minor;
      pend.container_subs = c.container_subs;
      admit(pend, (*mgts)[i], &st);
    }
    commit_level(n, &st);
    stats_.push_back(st);
    trace(st);
  }

  const std::vector<Retained>& retained() const { return retained_; }
  std::vector<LevelStats> take_stats() { return std::move(stats_); }
  bool level_empty(int n) const {
    return level_rows_[static_cast<size_t>(n)].empty();
  }

 private:
  static constexpr DTermId kNoDTerm = static_cast<DTermId>(-1);

  struct Pending {
    DTermId major = kNoDTerm;
    DTermId minor = kNoDTerm;  // kNoDTerm: a seeded axiom leaf
    TermId mgt = kNoTerm;
    int64_t ft = 0;
    int64_t fh = 0;
    SubChain container_subs;
  };

  // ----------------------------------------------------- generation
  void generate(int n, std::vector<Cand>* out) {
    out->clear();
    seen_pairs_.clear();
    switch (pol_.kind) {
      case EnumKind::Psp:
        gen_psp(n, out);
        break;
      case EnumKind::TSize:
        gen_binary(n, out, [n](const Retained& a, const Retained& b) {
          return t_size(a.dterm) + t_size(b.dterm) + 1 == n;
        });
        break;
      case EnumKind::Height:
        gen_binary(n, out, [n](const Retained& a, const Retained& b) {
          return std::max(d_height(a.dterm), d_height(b.dterm)) + 1 == n;
        });
        break;
      case EnumKind::CSize:
        gen_binary(n, out, [n](const Retained& a, const Retained& b) {
          if (a.level + b.level + 1 < n) return false;
          return c_size_of_set({a.dterm, b.dterm}) + 1 == n;
        });
        break;
      case EnumKind::Prime:
        gen_binary(n, out, [n](const Retained& a, const Retained& b) {
          if (a.level + b.level + 1 != n) return false;
          return c_size_of_set({a.dterm, b.dterm}) ==
                 c_size(a.dterm) + c_size(b.dterm);
        });
        break;
    }
  }

  void push(DTermId major, TermId major_mgt, DTermId minor, TermId minor_mgt,
            const SubChain& container_subs, std::vector<Cand>* out) {
    uint64_t key = (static_cast<uint64_t>(static_cast<uint32_t>(major)) << 32) |
                   static_cast<uint32_t>(minor);
    if (!seen_pairs_.insert(key).second) return;
    if (out->size() >= pol_.max_candidates)
      throw ResourceLimitError("more than " +
                               std::to_string(pol_.max_candidates) +
                               " candidate structures in one level");
    ensure_minor_copy(minor_mgt);
    out->push_back(Cand{major, minor, major_mgt, minor_mgt, container_subs});
  }

  // Pair each retained previous-level structure with its own subterms
  // and with every axiom leaf, in a fixed order.
  void gen_psp(int n, std::vector<Cand>* out) {
    for (size_t row : level_rows_[static_cast<size_t>(n) - 1]) {
      const Retained& r = retained_[row];
      for (const SubMgt* e = r.subs.get(); e; e = e->next.get())
        push(r.dterm, r.mgt, e->dterm, e->mgt, r.subs, out);
      if (r.subs)
        for (const SubMgt* e = r.subs->next.get(); e; e = e->next.get())
          push(e->dterm, e->mgt, r.dterm, r.mgt, r.subs, out);
      for (const auto& [leaf, leaf_mgt] : axiom_leaves_) {
        push(r.dterm, r.mgt, leaf, leaf_mgt, r.subs, out);
        push(leaf, leaf_mgt, r.dterm, r.mgt, r.subs, out);
      }
    }
  }

  template <class Pred>
  void gen_binary(int n, std::vector<Cand>* out, Pred level_is_n) {
    for (const Retained& a : retained_) {
      if (a.level >= n) break;  // retention order is level order
      for (const Retained& b : retained_) {
        if (b.level >= n) break;
        if (level_is_n(a, b))
          push(a.dterm, a.mgt, b.dterm, b.mgt, nullptr, out);
      }
    }
  }

  // ----------------------------------------------------- evaluation
  // The minor premise enters each detachment as a variable-disjoint
  // copy of its theorem; that copy is cached per distinct theorem.
  // Majors keep their canonical variables and are used in place.
  void ensure_minor_copy(TermId minor_mgt) {
    if (minor_copies_.count(minor_mgt)) return;
    minor_copies_.emplace(minor_mgt, rename_all_fresh(minor_mgt));
  }

  CandStatus detach_cand(Detacher& det, const Cand& c, TermId* out) const {
    return det.run(c.major_mgt, minor_copies_.at(c.minor_mgt), build_lim_,
                   out);
  }

  void evaluate(const std::vector<Cand>& cands, std::vector<TermId>* mgts,
                std::vector<CandStatus>* status) {
    mgts->assign(cands.size(), kNoTerm);
    status->assign(cands.size(), CandStatus::Undefined);
    int jobs = effective_jobs(pol_.jobs);
#ifdef CDT_HAVE_OPENMP
    if (jobs > 1 && cands.size() > 1) {
#pragma omp parallel num_threads(jobs)
      {
        Detacher det;
#pragma omp for schedule(dynamic, 256)
        for (int64_t i = 0; i < static_cast<int64_t>(cands.size()); ++i)
          (*status)[i] = detach_cand(det, cands[i], &(*mgts)[i]);
      }
      return;
    }
#else
    (void)jobs;
#endif
    Detacher det;
    for (size_t i = 0; i < cands.size(); ++i)
      (*status)[i] = detach_cand(det, cands[i], &(*mgts)[i]);
  }

  // ------------------------------------------------------ retention
  bool admit(Pending pend, TermId m, LevelStats* st) {
    if (m == kNoTerm) {
      ++st->discarded_undefined;
      return false;
    }
    if (!within_thresholds(m, pol_)) {
      ++st->discarded_threshold;
      return false;
    }
    if (seen_mgts_.count(m) || pending_mgts_.count(m)) {
      ++st->discarded_dedup;
      return false;
    }
    if (pol_.dedup == DedupMode::Subsumption && instance_of_retained(m)) {
      ++st->discarded_dedup;
      return false;
    }
    pend.mgt = m;
    pend.ft = formula_tree_size(m);
    pend.fh = term_height(m);
    pending_mgts_.insert(m);
    pending_.push_back(std::move(pend));
    return true;
  }

  bool instance_of_retained(TermId m) const {
    for (const Retained& r : retained_)
      if (subsumes(r.mgt, m)) return true;
    for (const Pending& p : pending_)
      if (subsumes(p.mgt, m)) return true;
    return false;
  }

  void commit_level(int n, LevelStats* st) {
    if (pending_.size() > pol_.cache_cap) {
      // Trim to capacity: drop largest-FT entries first (ties: larger
      // FH, then later arrival), keeping survivors in arrival order.
      std::vector<size_t> idx(pending_.size());
      std::iota(idx.begin(), idx.end(), size_t{0});
      std::sort(idx.begin(), idx.end(), [this](size_t x, size_t y) {
        const Pending& a = pending_[x];
        const Pending& b = pending_[y];
        if (a.ft != b.ft) return a.ft > b.ft;
        if (a.fh != b.fh) return a.fh > b.fh;
        return x > y;
      });
      size_t drop = pending_.size() - pol_.cache_cap;
      std::unordered_set<size_t> dropped(idx.begin(), idx.begin() + drop);
      std::vector<Pending> kept;
      kept.reserve(pol_.cache_cap);
      for (size_t i = 0; i < pending_.size(); ++i) {
        if (dropped.count(i))
          ++st->discarded_evicted;
        else
          kept.push_back(std::move(pending_[i]));
      }
      pending_ = std::move(kept);
    }
    st->kept = static_cast<int64_t>(pending_.size());
    for (Pending& p : pending_) {
      DTermId d = p.minor == kNoDTerm ? p.major : d_comp(p.major, p.minor);
      SubChain subs;
      if (pol_.kind == EnumKind::Psp && p.minor != kNoDTerm)
        subs = std::make_shared<const SubMgt>(SubMgt{d, p.mgt, p.container_subs});
      seen_mgts_.insert(p.mgt);
      level_rows_[static_cast<size_t>(n)].push_back(retained_.size());
      retained_.push_back(Retained{d, p.mgt, n, p.ft, p.fh, std::move(subs)});
    }
    pending_.clear();
    pending_mgts_.clear();
  }

  void trace(const LevelStats& st) const {
    if (!pol_.trace) return;
    std::fprintf(stderr,
                 "[prove] level %2d  gen=%lld kept=%lld undef=%lld thr=%lld "
                 "dup=%lld evict=%lld retained=%zu\n",
                 st.level, static_cast<long long>(st.generated),
                 static_cast<long long>(st.kept),
                 static_cast<long long>(st.discarded_undefined),
                 static_cast<long long>(st.discarded_threshold),
                 static_cast<long long>(st.discarded_dedup),
                 static_cast<long long>(st.discarded_evicted),
                 retained_.size());
  }

  const AxiomAssignment& alpha_;
  EnumPolicy pol_;
  std::vector<PrimId> axiom_prims_;
  std::vector<std::pair<DTermId, TermId>> axiom_leaves_;
  std::vector<Retained> retained_;            // all levels, retention order
  std::vector<std::vector<size_t>> level_rows_;  // rows of retained_ per level
  std::unordered_set<TermId> seen_mgts_;      // committed canonical theorems
  std::vector<Pending> pending_;              // current level, pre-trim
  std::unordered_set<TermId> pending_mgts_;
  std::unordered_set<uint64_t> seen_pairs_;   // per-level candidate dedup
  std::unordered_map<TermId, TermId> minor_copies_;  // theorem -> fresh copy
  BuildLimits build_lim_;
  std::vector<LevelStats> stats_;
};

// Relabel a compacted structure's bindings to consecutive numerals
// starting right after the axiom labels, keeping binding order.
CompactedDTerm relabel_sequential(const CompactedDTerm& delta,
                                  const std::vector<PrimId>& axiom_prims) {
  std::unordered_set<std::string> used;
  for (PrimId p : axiom_prims) used.insert(prim_name(p));
  int counter = 2;
  auto fresh = [&]() {
    while (used.count(std::to_string(counter))) ++counter;
    used.insert(std::to_string(counter));
    return prim(std::to_string(counter++));
  };
  std::unordered_map<PrimId, PrimId> map;
  for (const auto& [label, rhs] : delta.bindings) {
    (void)rhs;
    map.emplace(label, fresh());
  }
  auto rename = [&](PrimId p) {
    auto it = map.find(p);
    return it == map.end() ? p : it->second;
  };
  CompactedDTerm out;
  for (const auto& [label, rhs] : delta.bindings)
    out.bindings.emplace_back(
        rename(label), d_comp(d_leaf(rename(d_leaf_prim(d_major(rhs)))),
                              d_leaf(rename(d_leaf_prim(d_minor(rhs))))));
  for (const auto& [label, target] : delta.aliases)
    out.aliases.emplace_back(rename(label), rename(target));
  for (PrimId g : delta.goal_labels) out.goal_labels.push_back(rename(g));
  return out;
}

}  // namespace

CompactedDTerm extract_compacted(DTermId d, PrimId root_label) {
  return compact({{root_label, d}});
}

ProofResult prove(const Problem& problem, const EnumPolicy& policy) {
  if (!problem.goal)
    throw MalformedError("the problem carries no goal atom");
  TermId goal = *problem.goal;
  // Conclusions are materialized up to the larger of the retention
  // thresholds and the goal's own measures: instantiation never shrinks
  // tree size or height, so anything larger can neither be retained nor
  // subsume the goal.
  BuildLimits lim;
  if (policy.max_ft > 0)
    lim.ft = std::max(policy.max_ft, formula_tree_size(goal));
  if (policy.max_fh > 0)
    lim.fh = std::max(policy.max_fh, static_cast<int64_t>(term_height(goal)));
  Engine engine(problem.axioms, policy, lim);

  std::vector<PrimId> axiom_prims;
  for (const auto& [p, f] : problem.axioms.bindings()) {
    (void)f;
    axiom_prims.push_back(p);
  }

  auto finish = [&](DTermId winner, TermId winner_mgt,
                    std::vector<LevelStats> stats) {
    ProofResult res;
    res.delta = relabel_sequential(
        extract_compacted(winner, prim("goal")), axiom_prims);
    res.sizes = measure(winner);
    res.goal = Atom{winner_mgt};
    res.stats = std::move(stats);
    return res;
  };

  // Level 0: the goal may already be an axiom instance.
  engine.seed();
  for (const Retained& r : engine.retained())
    if (subsumes(r.mgt, goal))
      return finish(r.dterm, r.mgt, engine.take_stats());

  std::vector<Cand> cands;
  std::vector<TermId> mgts;
  for (int n = 1; n <= policy.max_level; ++n) {
    if (policy.kind == EnumKind::Psp && engine.level_empty(n - 1)) break;
    engine.run_level(n, &cands, &mgts);
    // Full-level goal scan: least tree size wins, earliest breaks ties.
    int64_t best = -1;
    TermId best_mgt = kNoTerm;
    int64_t best_t = 0;
    for (size_t i = 0; i < cands.size(); ++i) {
      if (mgts[i] == kNoTerm || !subsumes(mgts[i], goal)) continue;
      int64_t t = t_size(cands[i].major) + t_size(cands[i].minor) + 1;
      if (best == -1 || t < best_t) {
        best = static_cast<int64_t>(i);
        best_mgt = mgts[i];
        best_t = t;
      }
    }
    if (best != -1) {
      DTermId winner = d_comp(cands[static_cast<size_t>(best)].major,
                              cands[static_cast<size_t>(best)].minor);
      return finish(winner, best_mgt, engine.take_stats());
    }
  }
  throw SearchExhaustedError("no proof within " +
                             std::to_string(policy.max_level) + " levels");
}

std::vector<LemmaEntry> enumerate_lemmas(const AxiomAssignment& axioms,
                                         const EnumPolicy& policy) {
  BuildLimits lim{policy.max_ft, policy.max_fh};
  Engine engine(axioms, policy, lim);
  engine.seed();
  std::vector<Cand> cands;
  std::vector<TermId> mgts;
  for (int n = 1; n <= policy.max_level; ++n) {
    if (policy.kind == EnumKind::Psp && engine.level_empty(n - 1)) break;
    engine.run_level(n, &cands, &mgts);
  }
  std::vector<LemmaEntry> out;
  out.reserve(engine.retained().size());
  for (const Retained& r : engine.retained())
    out.push_back(LemmaEntry{r.dterm, r.mgt, r.level});
  return out;
}

}  // namespace cdt
