// Error taxonomy for the condensed-detachment toolkit.
//
// Recoverable "absence" outcomes (a most general theorem that does not
// exist, a non-unifiable pair) are represented as values, never thrown.
// Exceptions are reserved for contract violations on inputs: malformed
// text, dangling labels, out-of-range positions, exhausted budgets.
#ifndef CDT_ERRORS_HPP
#define CDT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cdt {

// Base of all toolkit exceptions. `code()` is a stable machine-readable
// tag; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Text that does not parse (Polish formulas, D-notation, corpus lines,
// clause files).
struct MalformedError : Error {
  explicit MalformedError(const std::string& m) : Error("Malformed", m) {}
};

// A position that does not address a node of the given term.
struct PositionOutOfRangeError : Error {
  explicit PositionOutOfRangeError(const std::string& m)
      : Error("PositionOutOfRange", m) {}
};

// Label lookups on compacted proofs.
struct UnknownLabelError : Error {
  explicit UnknownLabelError(const std::string& m) : Error("UnknownLabel", m) {}
};
struct UndefinedLabelError : Error {
  explicit UndefinedLabelError(const std::string& m)
      : Error("UndefinedLabel", m) {}
};
struct DuplicateLabelError : Error {
  explicit DuplicateLabelError(const std::string& m)
      : Error("DuplicateLabel", m) {}
};
struct CyclicLabelsError : Error {
  explicit CyclicLabelsError(const std::string& m) : Error("CyclicLabels", m) {}
};

// An axiom assignment that lacks a primitive appearing in the D-term.
struct MissingAxiomError : Error {
  explicit MissingAxiomError(const std::string& m) : Error("MissingAxiom", m) {}
};

// Shift applied to a term containing non-positional variables.
struct NonPositionalVariableError : Error {
  explicit NonPositionalVariableError(const std::string& m)
      : Error("NonPositionalVariable", m) {}
};

// Operations that require a defined most general theorem.
struct UndefinedMgtError : Error {
  explicit UndefinedMgtError(const std::string& m) : Error("UndefinedMgt", m) {}
};

// An n-leaf used as a minor premise where the major's most general
// theorem does not have the detachment-insensitive shape.
struct InvalidNUseError : Error {
  explicit InvalidNUseError(const std::string& m) : Error("InvalidNUse", m) {}
};

// c-smaller-set requested for a primitive D-term.
struct NotCompoundError : Error {
  explicit NotCompoundError(const std::string& m) : Error("NotCompound", m) {}
};

// Budget exhaustion (enumeration sizes, prover limits, counter overflow).
struct ResourceLimitError : Error {
  explicit ResourceLimitError(const std::string& m)
      : Error("ResourceLimit", m) {}
};

// The prover ran out of candidate levels without reaching the goal.
struct SearchExhaustedError : Error {
  explicit SearchExhaustedError(const std::string& m)
      : Error("SearchExhausted", m) {}
};

// Clause files: a clause that is neither a detachment rule, a unit axiom,
// nor a unit ground goal — or two detachment clauses.
struct UnrecognizedClauseShapeError : Error {
  explicit UnrecognizedClauseShapeError(const std::string& m)
      : Error("UnrecognizedClauseShape", m) {}
};
struct MultipleDetClausesError : Error {
  explicit MultipleDetClausesError(const std::string& m)
      : Error("MultipleDetClauses", m) {}
};

// Truth-table checks on formulas outside the implicational fragment.
struct NonImplicationalError : Error {
  explicit NonImplicationalError(const std::string& m)
      : Error("NonImplicational", m) {}
};

// Organicness queries on formulas that are not theorems.
struct NotATheoremError : Error {
  explicit NotATheoremError(const std::string& m) : Error("NotATheorem", m) {}
};

}  // namespace cdt

#endif  // CDT_ERRORS_HPP
