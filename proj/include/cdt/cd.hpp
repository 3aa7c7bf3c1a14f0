// Attaching formulas to proof structures: positional variables and
// shift substitutions, axiom assignments, the per-position pairing
// constraints, in-place theorems (IPT) and most general theorems (MGT),
// and proof checking against a ground goal.
//
// Throughout, an atom P(t) over the single implicit unary predicate is
// represented by its argument term t alone; an undefined MGT/IPT (the
// pairing constraints are not unifiable) is the distinguished kNoTerm
// result, not an error.
#ifndef CDT_CD_HPP
#define CDT_CD_HPP

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cdt/dterm.hpp"
#include "cdt/term.hpp"

namespace cdt {

// Move every positional variable of s from position q to p.q (y_q to
// y_{p.q}, x_q^i to x_{p.q}^i). Throws NonPositionalVariable if s
// contains a named or fresh variable.
TermId shift(TermId s, const Position& p);

// ---------------------------------------------------------- assignments
// A mapping from primitive labels to axiom formulas whose variables are
// all x_eps^i (normalized on construction from any variable naming, in
// first-occurrence order). "n" cannot be bound. Carries thread-safe
// memo tables for subtree MGTs.
class AxiomAssignment {
 public:
  AxiomAssignment();
  explicit AxiomAssignment(const std::vector<std::pair<PrimId, TermId>>& bindings);

  bool has(PrimId p) const;
  TermId formula(PrimId p) const;  // MissingAxiom
  const std::vector<std::pair<PrimId, TermId>>& bindings() const;

  // MGT argument of a proof structure, computed bottom-up with
  // memoization; results are canonically renamed (internal pool), and
  // kNoTerm reports an undefined MGT. An "n" leaf contributes a fresh
  // variable ("any minor premise"). Throws MissingAxiom for unbound
  // primitives. Safe to call concurrently.
  TermId mgt_arg(DTermId d) const;

  // As mgt_arg, but additionally undefined (kNoTerm) unless every "n"
  // leaf is well placed: "n" never stands alone or as a major premise,
  // and each node D(a, n) satisfies the any-minor guard on mgt_arg(a).
  TermId mgt_arg_strict(DTermId d) const;

 private:
  struct State;
  TermId mgt_impl(DTermId d, bool strict) const;
  std::shared_ptr<State> state_;
};

// The any-minor guard: t is a variable, or t = i(x, s) with x a variable
// not occurring in s. A major premise whose MGT argument satisfies this
// concludes s for *every* minor premise, so an "n" marker is sound.
bool any_minor_guard(TermId t);

// One detachment step on MGT arguments: the conclusion obtained from a
// major premise with MGT argument `major_arg` and a minor premise with
// MGT argument `minor_arg`, canonically renamed; kNoTerm when the two
// do not detach. Fresh copies are taken internally, so the arguments
// may share variables. mgt(D(a,b)) = detach_args(mgt(a), mgt(b)) holds
// whenever both child MGTs are defined.
TermId detach_args(TermId major_arg, TermId minor_arg);

// ---------------------------------------------------------------- atoms
struct Atom {
  TermId arg = kNoTerm;
  bool defined() const { return arg != kNoTerm; }
};

// -------------------------------------------------------------- pairings
// One constraint per position of the tree unfolding of d, in pre-order:
// a leaf position p pairs y_p with the leaf's axiom formula shifted to p
// ("n": a fresh variable); an inner position p pairs y_{p.1} with
// i(y_{p.2}, y_p). Throws MissingAxiom.
std::vector<std::pair<Position, TermPair>> pairings(DTermId d, const AxiomAssignment& alpha);

// ------------------------------------------------------------- MGT / IPT
// MGT via the bottom-up route (canonically renamed). Equivalent to
// y_eps under the unifier of pairings(d, alpha).
Atom mgt(DTermId d, const AxiomAssignment& alpha);

// IPTs of every position of d under one global unifier of the full
// pairing set; arguments share rigid variables (literal equality across
// positions is meaningful). Built once per tree.
class IptTable {
 public:
  IptTable(DTermId d, const AxiomAssignment& alpha);

  DTermId dterm() const { return d_; }
  // Global unification failed: every IPT (and the MGT) is undefined.
  bool defined() const { return defined_; }
  const std::vector<std::pair<Position, DTermId>>& positions() const { return positions_; }
  // IPT argument at p (kNoTerm when !defined()). PositionOutOfRange.
  TermId ipt_arg(const Position& p) const;

 private:
  DTermId d_;
  bool defined_ = false;
  std::vector<std::pair<Position, DTermId>> positions_;
  std::vector<TermId> args_;  // parallel to positions_
};

// IPT of a single position (the Def-23 global route).
Atom ipt(DTermId d, const Position& p, const AxiomAssignment& alpha);

// --------------------------------------------------- compacted-form MGTs
// Two routes to the MGT of a label of a compacted proof: expanding the
// label to its tree, or treating already-processed labels as additional
// axioms bound to their MGT arguments. The routes agree up to variants.
enum class MgtRoute { Expand, LemmaAsAxiom };
Atom mgt_of_compacted(const CompactedDTerm& delta, PrimId label, const AxiomAssignment& alpha,
                      MgtRoute route = MgtRoute::Expand);
// All labels at once (bindings and aliases, in definition order).
std::vector<std::pair<PrimId, Atom>> mgts_of_compacted(const CompactedDTerm& delta,
                                                       const AxiomAssignment& alpha,
                                                       MgtRoute route = MgtRoute::Expand);

// --------------------------------------------------------------- checking
struct Problem {
  AxiomAssignment axioms;
  std::optional<TermId> goal;  // ground atom argument
  std::string name;
};

struct RootReport {
  PrimId label = -1;
  TermId mgt_arg = kNoTerm;  // canonically renamed; kNoTerm = undefined
  bool proven = false;       // meaningful only when the problem has a goal
};

struct CheckReport {
  std::vector<RootReport> roots;
  bool has_goal = false;
  bool all_proven() const {
    if (!has_goal || roots.empty()) return false;
    for (const RootReport& r : roots)
      if (!r.proven) return false;
    return true;
  }
};

// Verify a compacted proof: for each goal-marked label (all maximal
// labels when none are marked), report the root MGT and, when the
// problem carries a goal, whether the goal atom is an instance of it.
// Every D(a, n) node of every checked tree must satisfy the any-minor
// guard (InvalidNUse otherwise).
CheckReport check_proof(const CompactedDTerm& delta, const Problem& problem);

}  // namespace cdt

#endif  // CDT_CD_HPP
