// Proof-shortening rewrites on D-terms.
//
// Three single-occurrence reductions replace the subtree at a position p
// by the subtree at a strictly deeper position p', each justified by a
// different comparison of what the two subtrees prove:
//   IS — the in-context proof terms at p and p' coincide literally;
//   MS — the standalone MGT at p' generalizes the standalone MGT at p;
//   S  — the standalone MGT at p' generalizes the in-context term at p.
// Two all-occurrence reductions replace every occurrence of a compound
// subterm e by a structurally smaller e' (e' built from pieces of e):
//   MC — the MGT of e' generalizes the MGT of e;
//   C  — the MGT of e' generalizes the in-context term at every
//        occurrence of e.
// n_simplify marks minor premises as irrelevant ("n") wherever the major
// premise proves a theorem whose antecedent cannot constrain the minor.
//
// normalize() drives the selected reductions to a fixpoint; every applied
// step strictly decreases the triple (c_size, sc_size, t_size) compared
// lexicographically, which bounds the trace length.
#ifndef CDT_REDUCE_HPP
#define CDT_REDUCE_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "cdt/cd.hpp"
#include "cdt/dterm.hpp"
#include "cdt/position.hpp"

namespace cdt {

enum class ReductionKind { NSimp, IS, MS, S, MC, C };

const char* reduction_kind_name(ReductionKind k);

// One applied rewrite. Position-based steps fill p/p_prime; subterm
// replacements fill e/e_prime. Both families record the replaced and
// replacement subtrees in e/e_prime for display.
struct ReductionStep {
  ReductionKind kind = ReductionKind::S;
  Position p;
  Position p_prime;
  DTermId e = kNoDTerm;
  DTermId e_prime = kNoDTerm;
  SizeReport before;
  SizeReport after;
};

// Replace minor premises by "n" wherever the major premise's MGT has the
// detachment-insensitive shape (a variable, or i(x, t) with variable
// x not occurring in t). Recurses into majors first; a replaced minor is
// dropped wholesale. Throws UndefinedMgt when d proves nothing.
DTermId n_simplify(DTermId d, const AxiomAssignment& alpha);

// All position pairs (p, p') with p a strict ancestor of p' where
// replacing d|_p by d|_{p'} is justified by `kind` (IS, MS or S).
// Pairs whose p' addresses a bare "n" leaf are never reported. Sorted
// deepest p first, then p, then p' in position-lexicographic order.
// Throws UndefinedMgt when d proves nothing.
std::vector<std::pair<Position, Position>> find_s_family(
    DTermId d, const AxiomAssignment& alpha, ReductionKind kind);

// d with the subtree at p replaced by the subtree at p'. Throws
// PositionOutOfRange unless p is a strict ancestor of p' and both
// address nodes of d.
DTermId apply_s_reduction(DTermId d, const Position& p,
                          const Position& p_prime);

// All pairs (e, e') with e a compound subterm of d, e' assembled from
// strict compound subterms and leaves of e (so e' never introduces new
// compounds), e strictly above e' in the compound-subterm-set order, and
// the replacement justified by `kind` (MC or C). Candidates e' whose own
// proof validity cannot be established standalone (an "n" leaf under a
// failing guard) are skipped. Sorted by c_size(e) descending, then
// c_size(e') ascending, stable over the enumeration order. Throws
// UndefinedMgt when d proves nothing.
std::vector<std::pair<DTermId, DTermId>> find_c_family(
    DTermId d, const AxiomAssignment& alpha, ReductionKind kind);

// d with every occurrence of e simultaneously replaced by e'.
DTermId apply_c_reduction(DTermId d, DTermId e, DTermId e_prime);

struct NormalizeOptions {
  // Upper bound on applied steps; exceeding it raises ResourceLimit.
  size_t max_steps = 10000;
  // Run n_simplify once after the fixpoint to restore "n" markings.
  bool restore_n_markers = false;
};

struct NormalizeResult {
  DTermId result = kNoDTerm;
  std::vector<ReductionStep> trace;
};

// Apply the selected reductions until none fires. Per round the kinds
// are tried in the fixed order IS, MS, S, MC, C (restricted to `kinds`);
// within a kind, candidates are tried in the find_* order; the first
// candidate that strictly decreases (c_size, sc_size, t_size)
// lexicographically is applied and the search restarts from scratch.
// Passing NSimp in `kinds` is equivalent to restore_n_markers.
NormalizeResult normalize(DTermId d, const AxiomAssignment& alpha,
                          const std::vector<ReductionKind>& kinds,
                          const NormalizeOptions& opts = {});

}  // namespace cdt

#endif  // CDT_REDUCE_HPP
