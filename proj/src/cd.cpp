#include "cdt/cd.hpp"

#include <map>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

namespace cdt {

// ------------------------------------------------------------------ shift

TermId shift(TermId s, const Position& p) {
  if (p.empty()) return s;
  std::unordered_map<TermId, TermId> memo;
  std::vector<std::pair<TermId, int>> stack;
  stack.emplace_back(s, 0);
  while (!stack.empty()) {
    auto [t, st] = stack.back();
    if (memo.count(t)) {
      stack.pop_back();
      continue;
    }
    TermKind k = term_kind(t);
    if (k == TermKind::Var) {
      VarId v = term_var(t);
      VarKind vk = var_kind(v);
      Position moved = p;
      if (vk == VarKind::PosY) {
        const Position& q = var_position(v);
        moved.insert(moved.end(), q.begin(), q.end());
        memo.emplace(t, mk_var(pos_var_y(moved)));
      } else if (vk == VarKind::PosX) {
        const Position& q = var_position(v);
        moved.insert(moved.end(), q.begin(), q.end());
        memo.emplace(t, mk_var(pos_var_x(moved, var_index(v))));
      } else {
        throw NonPositionalVariableError("variable " + var_name(v) + " cannot be shifted");
      }
      stack.pop_back();
      continue;
    }
    if (k == TermKind::Const) {
      memo.emplace(t, t);
      stack.pop_back();
      continue;
    }
    int n = term_nargs(t);
    if (st < n) {
      stack.back().second = st + 1;
      stack.emplace_back(term_arg(t, st), 0);
    } else {
      std::vector<TermId> args;
      args.reserve(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) args.push_back(memo.at(term_arg(t, i)));
      memo.emplace(t, mk_fun(term_sym(t), args));
      stack.pop_back();
    }
  }
  return memo.at(s);
}

// ---------------------------------------------------------- assignments

namespace {

// Rename the variables of t to x_eps^1, x_eps^2, ... in first-occurrence
// order (the normal form for axiom-assignment range terms).
TermId normalize_axiom_vars(TermId t) {
  std::vector<VarId> vars = term_vars(t);
  std::unordered_map<VarId, TermId> map;
  int index = 1;
  for (VarId v : vars) map.emplace(v, mk_var(pos_var_x(Position{}, index++)));
  Subst s(map);
  return s.apply(t);
}

}  // namespace

struct AxiomAssignment::State {
  std::vector<std::pair<PrimId, TermId>> bindings;
  std::unordered_map<PrimId, TermId> by_label;
  mutable std::mutex mu;
  mutable std::unordered_map<DTermId, TermId> memo;         // kNoTerm = undefined
  mutable std::unordered_map<DTermId, TermId> memo_strict;  // kNoTerm = undefined
};

AxiomAssignment::AxiomAssignment() : state_(std::make_shared<State>()) {}

AxiomAssignment::AxiomAssignment(const std::vector<std::pair<PrimId, TermId>>& bindings)
    : state_(std::make_shared<State>()) {
  for (const auto& [label, formula] : bindings) {
    if (label == prim_n())
      throw MalformedError("the reserved minor-premise marker 'n' cannot be an axiom label");
    if (state_->by_label.count(label))
      throw DuplicateLabelError("axiom label " + prim_name(label) + " is bound twice");
    TermId norm = normalize_axiom_vars(formula);
    state_->bindings.emplace_back(label, norm);
    state_->by_label.emplace(label, norm);
  }
}

bool AxiomAssignment::has(PrimId p) const { return state_->by_label.count(p) != 0; }

TermId AxiomAssignment::formula(PrimId p) const {
  auto it = state_->by_label.find(p);
  if (it == state_->by_label.end())
    throw MissingAxiomError("no axiom is assigned to primitive " + prim_name(p));
  return it->second;
}

const std::vector<std::pair<PrimId, TermId>>& AxiomAssignment::bindings() const {
  return state_->bindings;
}

bool any_minor_guard(TermId t) {
  if (term_kind(t) == TermKind::Var) return true;
  if (term_kind(t) == TermKind::Fun && term_sym(t) == fn_i()) {
    TermId head = term_arg(t, 0);
    return term_kind(head) == TermKind::Var && !contains_var(term_arg(t, 1), term_var(head));
  }
  return false;
}

// Conclusion of detaching fresh copies of the child MGT arguments:
// unify major' with i(minor', z) and return z under the unifier,
// canonically renamed; kNoTerm when not unifiable.
TermId detach_args(TermId major_arg, TermId minor_arg) {
  TermId major_fresh = rename_all_fresh(major_arg);
  TermId minor_fresh = rename_all_fresh(minor_arg);
  TermId z = mk_var(fresh_var());
  std::optional<Subst> s = unify_one(major_fresh, mk_i(minor_fresh, z));
  if (!s) return kNoTerm;
  return rename_canonical(s->apply(z), RenamePool::Internal);
}

TermId AxiomAssignment::mgt_impl(DTermId d, bool strict) const {
  const State& st = *state_;
  const AxiomAssignment& alpha = *this;
  auto& memo = strict ? st.memo_strict : st.memo;
  {
    std::lock_guard<std::mutex> lock(st.mu);
    auto it = memo.find(d);
    if (it != memo.end()) return it->second;
  }
  // Iterative post-order over distinct uncached nodes.
  std::vector<std::pair<DTermId, int>> stack;
  std::unordered_map<DTermId, TermId> local;
  auto value_of = [&](DTermId x) -> TermId {
    auto it = local.find(x);
    if (it != local.end()) return it->second;
    std::lock_guard<std::mutex> lock(st.mu);
    return memo.at(x);
  };
  auto known = [&](DTermId x) {
    if (local.count(x)) return true;
    std::lock_guard<std::mutex> lock(st.mu);
    return memo.count(x) != 0;
  };
  stack.emplace_back(d, 0);
  while (!stack.empty()) {
    auto [node, phase] = stack.back();
    if (known(node)) {
      stack.pop_back();
      continue;
    }
    if (d_is_leaf(node)) {
      PrimId p = d_leaf_prim(node);
      TermId r;
      if (p == prim_n())
        r = strict ? kNoTerm
                   : rename_canonical(mk_var(fresh_var()), RenamePool::Internal);
      else
        r = rename_canonical(alpha.formula(p), RenamePool::Internal);
      local.emplace(node, r);
      stack.pop_back();
      continue;
    }
    if (phase == 0) {
      stack.back().second = 1;
      stack.emplace_back(d_major(node), 0);
    } else if (phase == 1) {
      stack.back().second = 2;
      DTermId minor = d_minor(node);
      // In strict mode an "n" minor is not recursed into (it has no
      // strict value); the guard on the major decides instead.
      if (!(strict && d_is_leaf(minor) && d_leaf_prim(minor) == prim_n()))
        stack.emplace_back(minor, 0);
    } else {
      stack.pop_back();
      TermId major_arg = value_of(d_major(node));
      TermId r = kNoTerm;
      DTermId minor = d_minor(node);
      bool minor_is_n = d_is_leaf(minor) && d_leaf_prim(minor) == prim_n();
      if (major_arg != kNoTerm) {
        if (strict && minor_is_n) {
          if (any_minor_guard(major_arg))
            r = detach_args(major_arg, mk_var(fresh_var()));
        } else {
          TermId minor_arg = value_of(minor);
          if (minor_arg != kNoTerm) r = detach_args(major_arg, minor_arg);
        }
      }
      local.emplace(node, r);
    }
  }
  TermId result = local.at(d);
  std::lock_guard<std::mutex> lock(st.mu);
  for (const auto& [node, value] : local) memo.emplace(node, value);
  return result;
}

TermId AxiomAssignment::mgt_arg(DTermId d) const { return mgt_impl(d, false); }

TermId AxiomAssignment::mgt_arg_strict(DTermId d) const { return mgt_impl(d, true); }

// -------------------------------------------------------------- pairings

std::vector<std::pair<Position, TermPair>> pairings(DTermId d, const AxiomAssignment& alpha) {
  std::vector<std::pair<Position, TermPair>> out;
  for (const auto& [p, node] : d_positions(d)) {
    if (d_is_leaf(node)) {
      TermId rhs = d_leaf_prim(node) == prim_n() ? mk_var(fresh_var())
                                                 : shift(alpha.formula(d_leaf_prim(node)), p);
      out.emplace_back(p, TermPair{mk_var(pos_var_y(p)), rhs});
    } else {
      Position p1 = p, p2 = p;
      p1.push_back(1);
      p2.push_back(2);
      out.emplace_back(p, TermPair{mk_var(pos_var_y(p1)),
                                   mk_i(mk_var(pos_var_y(p2)), mk_var(pos_var_y(p)))});
    }
  }
  return out;
}

// ------------------------------------------------------------- MGT / IPT

Atom mgt(DTermId d, const AxiomAssignment& alpha) { return Atom{alpha.mgt_arg(d)}; }

IptTable::IptTable(DTermId d, const AxiomAssignment& alpha) : d_(d) {
  positions_ = d_positions(d);
  TermPairSet pairs;
  pairs.reserve(positions_.size());
  for (const auto& [p, pr] : pairings(d, alpha)) pairs.push_back(pr);
  std::optional<Subst> sigma = unify(pairs);
  args_.assign(positions_.size(), kNoTerm);
  if (!sigma) return;
  defined_ = true;
  for (size_t i = 0; i < positions_.size(); ++i)
    args_[i] = sigma->apply(mk_var(pos_var_y(positions_[i].first)));
}

TermId IptTable::ipt_arg(const Position& p) const {
  for (size_t i = 0; i < positions_.size(); ++i)
    if (positions_[i].first == p) return args_[i];
  throw PositionOutOfRangeError("no position " + position_to_string(p) + " in the tree");
}

Atom ipt(DTermId d, const Position& p, const AxiomAssignment& alpha) {
  IptTable table(d, alpha);
  return Atom{table.ipt_arg(p)};
}

// --------------------------------------------------- compacted-form MGTs

namespace {

// Labels of delta in an order where references point backwards;
// CyclicLabels on reference cycles among defined labels.
std::vector<PrimId> dependency_order(const CompactedDTerm& delta) {
  std::unordered_map<PrimId, DTermId> rhs;
  std::vector<PrimId> labels;
  for (const auto& [k, v] : delta.bindings) {
    rhs.emplace(k, v);
    labels.push_back(k);
  }
  for (const auto& [k, v] : delta.aliases) {
    rhs.emplace(k, d_leaf(v));
    labels.push_back(k);
  }
  std::vector<PrimId> order;
  std::unordered_map<PrimId, uint8_t> color;  // 1 grey, 2 black
  for (PrimId start : labels) {
    if (color[start] == 2) continue;
    std::vector<PrimId> stack{start};
    while (!stack.empty()) {
      PrimId cur = stack.back();
      if (color[cur] == 2) {
        stack.pop_back();
        continue;
      }
      bool ready = true;
      for (PrimId p : prims_of(rhs.at(cur))) {
        if (!rhs.count(p) || color[p] == 2) continue;
        if (color[p] == 1)
          throw CyclicLabelsError("label " + prim_name(p) + " participates in a reference cycle");
        ready = false;
        stack.push_back(p);
      }
      if (ready) {
        color[cur] = 2;
        order.push_back(cur);
        stack.pop_back();
      } else {
        color[cur] = 1;
      }
    }
  }
  return order;
}

}  // namespace

std::vector<std::pair<PrimId, Atom>> mgts_of_compacted(const CompactedDTerm& delta,
                                                       const AxiomAssignment& alpha,
                                                       MgtRoute route) {
  std::vector<std::pair<PrimId, Atom>> out;
  if (route == MgtRoute::Expand) {
    for (const auto& [k, v] : delta.bindings)
      out.emplace_back(k, Atom{alpha.mgt_arg(expand(delta, k))});
    for (const auto& [k, v] : delta.aliases)
      out.emplace_back(k, Atom{alpha.mgt_arg(expand(delta, k))});
    return out;
  }
  // Lemma-as-axiom route: process labels in dependency order, binding
  // each computed MGT argument as an axiom for later labels.
  std::unordered_map<PrimId, DTermId> rhs;
  for (const auto& [k, v] : delta.bindings) rhs.emplace(k, v);
  for (const auto& [k, v] : delta.aliases) rhs.emplace(k, d_leaf(v));
  std::unordered_map<PrimId, TermId> lemma;  // kNoTerm = undefined
  std::vector<std::pair<PrimId, TermId>> ext = alpha.bindings();
  for (PrimId k : dependency_order(delta)) {
    DTermId r = rhs.at(k);
    bool usable = true;
    for (PrimId p : prims_of(r))
      if (rhs.count(p) && lemma.at(p) == kNoTerm) usable = false;
    TermId m = kNoTerm;
    if (usable) {
      AxiomAssignment local(ext);
      m = local.mgt_arg(r);
    }
    lemma.emplace(k, m);
    if (m != kNoTerm) ext.emplace_back(k, m);
  }
  for (const auto& [k, v] : delta.bindings) out.emplace_back(k, Atom{lemma.at(k)});
  for (const auto& [k, v] : delta.aliases) out.emplace_back(k, Atom{lemma.at(k)});
  return out;
}

Atom mgt_of_compacted(const CompactedDTerm& delta, PrimId label, const AxiomAssignment& alpha,
                      MgtRoute route) {
  if (!delta.defines(label)) {
    if (alpha.has(label)) return mgt(d_leaf(label), alpha);
    throw UnknownLabelError("label " + prim_name(label) +
                            " is neither bound in the proof nor an axiom");
  }
  if (route == MgtRoute::Expand) return Atom{alpha.mgt_arg(expand(delta, label))};
  for (const auto& [k, atom] : mgts_of_compacted(delta, alpha, route))
    if (k == label) return atom;
  throw UnknownLabelError("label " + prim_name(label) + " is not bound");  // unreachable
}

// --------------------------------------------------------------- checking

CheckReport check_proof(const CompactedDTerm& delta, const Problem& problem) {
  CheckReport report;
  report.has_goal = problem.goal.has_value();
  std::vector<PrimId> roots = delta.goal_labels;
  if (roots.empty()) roots = delta.maximal_labels();
  const AxiomAssignment& alpha = problem.axioms;
  for (PrimId root : roots) {
    DTermId tree;
    if (delta.defines(root))
      tree = expand(delta, root);
    else if (alpha.has(root))
      tree = d_leaf(root);
    else
      throw UnknownLabelError("goal label " + prim_name(root) +
                              " is neither bound in the proof nor an axiom");
    // Validate every use of the minor-premise marker.
    if (d_is_leaf(tree) && d_leaf_prim(tree) == prim_n())
      throw InvalidNUseError("the bare marker 'n' is not a proof");
    for (DTermId x : subeq_compounds(tree)) {
      DTermId major = d_major(x), minor = d_minor(x);
      if (d_is_leaf(major) && d_leaf_prim(major) == prim_n())
        throw InvalidNUseError("'n' appears as a major premise");
      if (d_is_leaf(minor) && d_leaf_prim(minor) == prim_n()) {
        TermId g = alpha.mgt_arg(major);
        if (g != kNoTerm && !any_minor_guard(g))
          throw InvalidNUseError(
              "a major premise next to an 'n' marker does not accept an arbitrary minor premise");
      }
    }
    RootReport r;
    r.label = root;
    r.mgt_arg = alpha.mgt_arg(tree);
    if (problem.goal && r.mgt_arg != kNoTerm) r.proven = subsumes(r.mgt_arg, *problem.goal);
    report.roots.push_back(r);
  }
  return report;
}

}  // namespace cdt
