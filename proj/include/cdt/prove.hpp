// Structure-enumeration prover for condensed detachment: grow levels of
// candidate proof structures from retained lemmas, keep those whose most
// general theorems are defined and within formula-size thresholds, and
// stop when the goal atom becomes an instance of a candidate's theorem.
#ifndef CDT_PROVE_HPP
#define CDT_PROVE_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cd.hpp"
#include "dterm.hpp"
#include "term.hpp"

namespace cdt {

// ------------------------------------------------------------- policy
// How candidate structures are generated level by level. Level 0 is
// always the set of axiom leaves; level n > 0 contains structures whose
// level measure equals n:
//   Psp    - pair each retained level-(n-1) structure d with its own
//            subterms (D(d,d') for d' below-or-equal d, D(d',d) for d'
//            strictly below d) and with every axiom leaf on either side;
//            the level measure is the compacted size.
//   Prime  - D(a,b) over retained lemmas with disjoint compound sets
//            (so the result is prime), level = c_size(a)+c_size(b)+1.
//   TSize  - D(a,b) over retained lemmas, level = t_size(a)+t_size(b)+1.
//   Height - D(a,b) over retained lemmas, level = max(height)+1.
//   CSize  - D(a,b) over retained lemmas, level = |compounds(a) union
//            compounds(b)| + 1 (the compacted size of the result).
enum class EnumKind { Psp, Prime, TSize, Height, CSize };

// Which retained lemma makes a later candidate redundant:
//   Variant     - a candidate is dropped when its theorem is a variant
//                 of a retained lemma's theorem (canonical-form equality).
//   Subsumption - additionally dropped when its theorem is an instance
//                 of a retained lemma's theorem.
enum class DedupMode { Variant, Subsumption };

struct EnumPolicy {
  EnumKind kind = EnumKind::Psp;
  int max_level = 32;

  // Formula thresholds applied to a candidate's theorem; 0 = unlimited.
  // A candidate violating them is discarded (but still goal-tested).
  int64_t max_ft = 17;  // tree size (inner-node count) of the theorem
  int64_t max_fh = 7;   // height of the theorem
  int64_t max_fv = 0;   // distinct variables of the theorem

  DedupMode dedup = DedupMode::Variant;

  // Retained lemmas per level; beyond it the level is trimmed by
  // dropping the largest-FT entries first (ties: larger FH, then later
  // arrival). Evicted entries are forgotten entirely.
  size_t cache_cap = size_t{1} << 20;

  // Candidate structures per level; exceeding it raises ResourceLimit.
  size_t max_candidates = size_t{1} << 22;

  // Worker threads for theorem evaluation: 0 = library default,
  // 1 = serial, k > 1 = parallel. The result never depends on it.
  int jobs = 0;

  // Print one progress line per completed level to stderr.
  bool trace = false;
};

// ------------------------------------------------------------- results
struct LemmaEntry {
  DTermId dterm = -1;
  TermId mgt_arg = kNoTerm;  // canonically renamed
  int level = 0;
};

struct LevelStats {
  int level = 0;
  int64_t generated = 0;            // candidate structures formed
  int64_t kept = 0;                 // retained as lemmas
  int64_t discarded_undefined = 0;  // no most general theorem
  int64_t discarded_threshold = 0;  // theorem over ft/fh/fv limits
  int64_t discarded_dedup = 0;      // redundant against retained lemmas
  int64_t discarded_evicted = 0;    // trimmed by the level capacity
};

struct ProofResult {
  CompactedDTerm delta;   // compacted winning structure, goal-marked root
  SizeReport sizes;       // measures of the winning structure
  Atom goal;              // its most general theorem
  std::vector<LevelStats> stats;
};

// -------------------------------------------------------------- search
// Find a proof structure whose most general theorem has the problem's
// ground goal atom as an instance. Candidates are generated in a fixed
// deterministic order; each level is fully evaluated and goal-tested
// before any retention decision, and among a level's goal hits the
// winner is the one of least tree size (ties: generated first).
// Errors: Malformed (no goal in the problem), MissingAxiom,
// SearchExhausted (levels exhausted without a hit), ResourceLimit.
ProofResult prove(const Problem& problem, const EnumPolicy& policy = {});

// The same level-by-level search without a goal: run levels 0..max_level
// and return every retained lemma in retention order (axiom leaves
// first). Deterministic for a fixed policy.
std::vector<LemmaEntry> enumerate_lemmas(const AxiomAssignment& axioms,
                                         const EnumPolicy& policy = {});

// Compacted form of a found structure under a caller-chosen root label
// (expand/compact round-trips up to hash-consing identity).
CompactedDTerm extract_compacted(DTermId d, PrimId root_label);

}  // namespace cdt

#endif  // CDT_PROVE_HPP
