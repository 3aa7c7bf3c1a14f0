#include "cdt/reduce.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "cdt/errors.hpp"
#include "cdt/term.hpp"

namespace cdt {

const char* reduction_kind_name(ReductionKind k) {
  switch (k) {
    case ReductionKind::NSimp: return "n-simp";
    case ReductionKind::IS: return "IS";
    case ReductionKind::MS: return "MS";
    case ReductionKind::S: return "S";
    case ReductionKind::MC: return "MC";
    case ReductionKind::C: return "C";
  }
  return "?";
}

// ------------------------------------------------------------- n_simplify

namespace {

DTermId n_simplify_rec(DTermId d, const AxiomAssignment& alpha,
                       std::unordered_map<DTermId, DTermId>& memo) {
  if (d_is_leaf(d)) return d;
  auto it = memo.find(d);
  if (it != memo.end()) return it->second;
  DTermId major = d_major(d);
  TermId major_mgt = alpha.mgt_arg(major);
  if (major_mgt == kNoTerm)
    throw UndefinedMgtError("minor-premise marking needs the major premise's MGT");
  DTermId major_s = n_simplify_rec(major, alpha, memo);
  DTermId out;
  if (any_minor_guard(major_mgt)) {
    out = d_comp(major_s, d_leaf(prim_n()));
  } else {
    out = d_comp(major_s, n_simplify_rec(d_minor(d), alpha, memo));
  }
  memo.emplace(d, out);
  return out;
}

}  // namespace

DTermId n_simplify(DTermId d, const AxiomAssignment& alpha) {
  if (alpha.mgt_arg(d) == kNoTerm)
    throw UndefinedMgtError("cannot n-simplify a D-term that proves nothing");
  std::unordered_map<DTermId, DTermId> memo;
  return n_simplify_rec(d, alpha, memo);
}

// ---------------------------------------------------------- S-family search

namespace {

void require_s_kind(ReductionKind kind) {
  if (kind != ReductionKind::IS && kind != ReductionKind::MS &&
      kind != ReductionKind::S)
    throw Error("Malformed", "position-pair search expects kind IS, MS or S");
}

void require_c_kind(ReductionKind kind) {
  if (kind != ReductionKind::MC && kind != ReductionKind::C)
    throw Error("Malformed", "subterm-pair search expects kind MC or C");
}

}  // namespace

std::vector<std::pair<Position, Position>> find_s_family(
    DTermId d, const AxiomAssignment& alpha, ReductionKind kind) {
  require_s_kind(kind);
  IptTable table(d, alpha);
  if (!table.defined())
    throw UndefinedMgtError("reduction search needs a defined MGT");
  const auto& nodes = table.positions();
  size_t n = nodes.size();
  std::vector<TermId> in_context(n);
  for (size_t i = 0; i < n; ++i) in_context[i] = table.ipt_arg(nodes[i].first);

  DTermId n_leaf = d_leaf(prim_n());
  std::vector<std::pair<Position, Position>> out;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (!is_strict_prefix(nodes[i].first, nodes[j].first)) continue;
      if (nodes[j].second == n_leaf) continue;
      bool ok = false;
      switch (kind) {
        case ReductionKind::IS:
          ok = in_context[j] == in_context[i];
          break;
        case ReductionKind::MS:
          ok = subsumes(alpha.mgt_arg(nodes[j].second),
                        alpha.mgt_arg(nodes[i].second));
          break;
        default:  // S
          ok = subsumes(alpha.mgt_arg(nodes[j].second), in_context[i]);
          break;
      }
      if (ok) out.emplace_back(nodes[i].first, nodes[j].first);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const std::pair<Position, Position>& a,
               const std::pair<Position, Position>& b) {
              if (a.first.size() != b.first.size())
                return a.first.size() > b.first.size();
              if (a.first != b.first)
                return position_lex_less(a.first, b.first);
              return position_lex_less(a.second, b.second);
            });
  return out;
}

DTermId apply_s_reduction(DTermId d, const Position& p,
                          const Position& p_prime) {
  if (!is_strict_prefix(p, p_prime))
    throw PositionOutOfRangeError(
        "replacement source must lie strictly below the replaced position");
  DTermId source = d_subterm_at(d, p_prime);
  return d_replace_at(d, p, source);
}

// ---------------------------------------------------------- C-family search

std::vector<std::pair<DTermId, DTermId>> find_c_family(
    DTermId d, const AxiomAssignment& alpha, ReductionKind kind) {
  require_c_kind(kind);
  IptTable table(d, alpha);
  if (!table.defined())
    throw UndefinedMgtError("reduction search needs a defined MGT");
  const auto& nodes = table.positions();

  // In-context proof terms grouped by subterm, for the per-occurrence test.
  std::unordered_map<DTermId, std::vector<TermId>> occurrences;
  for (const auto& [p, node] : nodes)
    occurrences[node].push_back(table.ipt_arg(p));

  std::vector<std::pair<DTermId, DTermId>> out;
  for (DTermId e : subeq_compounds(d)) {
    TermId e_mgt = alpha.mgt_arg(e);
    for (DTermId e2 : c_smaller_set(e)) {
      if (!c_gt(e, e2)) continue;
      TermId e2_mgt = alpha.mgt_arg_strict(e2);
      if (e2_mgt == kNoTerm) continue;
      bool ok;
      if (kind == ReductionKind::MC) {
        ok = subsumes(e2_mgt, e_mgt);
      } else {
        ok = true;
        for (TermId ctx : occurrences.at(e)) {
          if (!subsumes(e2_mgt, ctx)) {
            ok = false;
            break;
          }
        }
      }
      if (ok) out.emplace_back(e, e2);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const std::pair<DTermId, DTermId>& a,
                      const std::pair<DTermId, DTermId>& b) {
                     int64_t ae = c_size(a.first), be = c_size(b.first);
                     if (ae != be) return ae > be;
                     return c_size(a.second) < c_size(b.second);
                   });
  return out;
}

DTermId apply_c_reduction(DTermId d, DTermId e, DTermId e_prime) {
  return d_replace_all(d, e, e_prime);
}

// ---------------------------------------------------------------- normalize

namespace {

bool lex_decreases(const SizeReport& before, const SizeReport& after) {
  if (after.c_size != before.c_size) return after.c_size < before.c_size;
  if (after.sc_size != before.sc_size) return after.sc_size < before.sc_size;
  return after.t_size < before.t_size;
}

}  // namespace

NormalizeResult normalize(DTermId d, const AxiomAssignment& alpha,
                          const std::vector<ReductionKind>& kinds,
                          const NormalizeOptions& opts) {
  std::unordered_set<int> wanted;
  for (ReductionKind k : kinds) wanted.insert(static_cast<int>(k));
  bool restore_n = opts.restore_n_markers ||
                   wanted.count(static_cast<int>(ReductionKind::NSimp)) > 0;
  static const ReductionKind kOrder[] = {ReductionKind::IS, ReductionKind::MS,
                                         ReductionKind::S, ReductionKind::MC,
                                         ReductionKind::C};

  NormalizeResult res;
  res.result = d;
  for (;;) {
    if (res.trace.size() > opts.max_steps)
      throw ResourceLimitError("normalization exceeded the step budget");
    SizeReport before = measure(res.result);
    bool applied = false;
    for (ReductionKind kind : kOrder) {
      if (!wanted.count(static_cast<int>(kind))) continue;
      if (kind == ReductionKind::MC || kind == ReductionKind::C) {
        for (const auto& [e, e2] : find_c_family(res.result, alpha, kind)) {
          DTermId cand = apply_c_reduction(res.result, e, e2);
          SizeReport after = measure(cand);
          if (!lex_decreases(before, after)) continue;
          ReductionStep step;
          step.kind = kind;
          step.e = e;
          step.e_prime = e2;
          step.before = before;
          step.after = after;
          res.trace.push_back(step);
          res.result = cand;
          applied = true;
          break;
        }
      } else {
        for (const auto& [p, p2] : find_s_family(res.result, alpha, kind)) {
          DTermId cand = apply_s_reduction(res.result, p, p2);
          SizeReport after = measure(cand);
          if (!lex_decreases(before, after)) continue;
          ReductionStep step;
          step.kind = kind;
          step.p = p;
          step.p_prime = p2;
          step.e = d_subterm_at(res.result, p);
          step.e_prime = d_subterm_at(res.result, p2);
          step.before = before;
          step.after = after;
          res.trace.push_back(step);
          res.result = cand;
          applied = true;
          break;
        }
      }
      if (applied) break;
    }
    if (!applied) break;
  }

  if (restore_n) {
    DTermId marked = n_simplify(res.result, alpha);
    if (marked != res.result) {
      ReductionStep step;
      step.kind = ReductionKind::NSimp;
      step.e = res.result;
      step.e_prime = marked;
      step.before = measure(res.result);
      step.after = measure(marked);
      res.trace.push_back(step);
      res.result = marked;
    }
  }
  return res;
}

}  // namespace cdt
