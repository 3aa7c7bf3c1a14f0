#include "cdt/analyze.hpp"

#include <algorithm>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "cdt/errors.hpp"
#include "cdt/formats.hpp"
#include "cdt/par.hpp"
#include "cdt/reduce.hpp"

namespace cdt {

namespace {

// ---------------------------------------------------------- truth tables

// Collect the distinct variables of an implicational formula in
// first-occurrence order; reject constants and foreign functors.
void collect_implicational_vars(TermId t, std::vector<VarId>* out) {
  switch (term_kind(t)) {
    case TermKind::Var: {
      VarId v = term_var(t);
      if (std::find(out->begin(), out->end(), v) == out->end()) out->push_back(v);
      return;
    }
    case TermKind::Const:
      throw NonImplicationalError("constant '" + constant_name(term_sym(t)) +
                                  "' in a truth-table check");
    case TermKind::Fun:
      if (term_sym(t) != fn_i())
        throw NonImplicationalError("functor '" + functor_name(term_sym(t)) +
                                    "' in a truth-table check");
      collect_implicational_vars(term_arg(t, 0), out);
      collect_implicational_vars(term_arg(t, 1), out);
      return;
  }
  throw NonImplicationalError("unrecognized term node");
}

bool eval_formula(TermId t, const std::unordered_map<VarId, bool>& env) {
  if (term_kind(t) == TermKind::Var) return env.at(term_var(t));
  bool a = eval_formula(term_arg(t, 0), env);
  bool b = eval_formula(term_arg(t, 1), env);
  return !a || b;
}

// Distinct subterms of f, excluding f itself.
std::vector<TermId> strict_subterms(TermId f) {
  std::vector<TermId> order;
  std::unordered_set<TermId> seen;
  std::vector<TermId> stack{f};
  while (!stack.empty()) {
    TermId t = stack.back();
    stack.pop_back();
    if (!seen.insert(t).second) continue;
    order.push_back(t);
    if (term_kind(t) == TermKind::Fun)
      for (int i = 0; i < term_nargs(t); ++i) stack.push_back(term_arg(t, i));
  }
  order.erase(std::remove(order.begin(), order.end(), f), order.end());
  return order;
}

// f is a tautology with no strict subterm that is one.
bool organic_theorem(TermId f) {
  for (TermId s : strict_subterms(f))
    if (term_kind(s) == TermKind::Fun && is_tautology(s)) return false;
  return true;
}

// --------------------------------------------------------- term measures

int64_t memo_term_size(TermId t, std::unordered_map<TermId, int64_t>* memo) {
  if (term_kind(t) != TermKind::Fun) return 0;
  auto it = memo->find(t);
  if (it != memo->end()) return it->second;
  int64_t n = 1;
  for (int i = 0; i < term_nargs(t); ++i) n += memo_term_size(term_arg(t, i), memo);
  (*memo)[t] = n;
  return n;
}

int64_t memo_term_height(TermId t, std::unordered_map<TermId, int64_t>* memo) {
  if (term_kind(t) != TermKind::Fun) return 0;
  auto it = memo->find(t);
  if (it != memo->end()) return it->second;
  int64_t h = 0;
  for (int i = 0; i < term_nargs(t); ++i)
    h = std::max(h, memo_term_height(term_arg(t, i), memo));
  ++h;
  (*memo)[t] = h;
  return h;
}

// --------------------------------------------------- minimal proof pools

struct MgtPools {
  // by_level[k]: distinct canonical theorem arguments reachable by some
  // marker-free D-term of measure k, in first-found order.
  std::vector<std::vector<TermId>> by_level;
  int64_t completed = -1;  // largest exhaustively enumerated level
};

std::vector<PrimId> axiom_prims(const AxiomAssignment& alpha) {
  std::vector<PrimId> prims;
  for (const auto& [p, f] : alpha.bindings())
    if (p != prim_n()) prims.push_back(p);
  return prims;
}

// All full binary trees with exactly k inner nodes over the given leaf
// alphabet. nullopt when the pool would exceed the candidate cap.
std::optional<std::vector<DTermId>> trees_of_size(
    int64_t k, const std::vector<PrimId>& prims, size_t cap,
    std::vector<std::vector<DTermId>>* memo) {
  if (k < static_cast<int64_t>(memo->size())) return (*memo)[k];
  while (static_cast<int64_t>(memo->size()) <= k) {
    int64_t n = static_cast<int64_t>(memo->size());
    std::vector<DTermId> level;
    if (n == 0) {
      for (PrimId p : prims) level.push_back(d_leaf(p));
    } else {
      for (int64_t i = 0; i + 1 <= n; ++i) {
        const std::vector<DTermId>& left = (*memo)[i];
        const std::vector<DTermId>& right = (*memo)[n - 1 - i];
        if (level.size() + left.size() * right.size() > cap) return std::nullopt;
        for (DTermId a : left)
          for (DTermId b : right) level.push_back(d_comp(a, b));
      }
    }
    memo->push_back(std::move(level));
  }
  return (*memo)[k];
}

MgtPools build_mgt_pools(ProofMeasure measure, int64_t budget,
                         const AxiomAssignment& alpha, size_t cap) {
  MgtPools pools;
  std::vector<PrimId> prims = axiom_prims(alpha);
  std::vector<std::vector<DTermId>> tree_memo;
  for (int64_t k = 0; k <= budget; ++k) {
    std::vector<DTermId> candidates;
    if (k == 0) {
      for (PrimId p : prims) candidates.push_back(d_leaf(p));
    } else if (measure == ProofMeasure::CSize) {
      candidates = csize_level(static_cast<int>(k), prims, /*jobs=*/0);
      if (candidates.size() > cap) break;
    } else {
      auto trees = trees_of_size(k, prims, cap, &tree_memo);
      if (!trees) break;
      candidates = std::move(*trees);
    }
    std::vector<TermId> mgts;
    std::unordered_set<TermId> seen;
    for (DTermId d : candidates) {
      TermId t = alpha.mgt_arg(d);
      if (t == kNoTerm) continue;
      if (seen.insert(t).second) mgts.push_back(t);
    }
    pools.by_level.push_back(std::move(mgts));
    pools.completed = k;
  }
  return pools;
}

SizeBound scan_mgt_pools(const MgtPools& pools, TermId goal_arg, int64_t known) {
  for (int64_t k = 0; k <= pools.completed; ++k)
    for (TermId t : pools.by_level[k])
      if (subsumes(t, goal_arg)) return SizeBound{k, k};
  return SizeBound{pools.completed + 1, known};
}

// ------------------------------------------------------ shared machinery

// The subject node of a label: its expansion when bound, the bare leaf
// for an axiom primitive.
DTermId label_subject(const CompactedDTerm& delta, const AxiomAssignment& alpha,
                      PrimId label) {
  if (delta.defines(label)) return expand(delta, label);
  if (alpha.has(label)) return d_leaf(label);
  throw UnknownLabelError("label '" + prim_name(label) +
                          "' is neither bound nor an axiom");
}

std::vector<PrimId> goal_roots(const CompactedDTerm& delta) {
  if (!delta.goal_labels.empty()) return delta.goal_labels;
  return delta.maximal_labels();
}

// IPT arguments of every occurrence of every node in the expanded goal
// trees, bucketed by node identity; deterministic order (roots in goal
// order, positions in table order).
std::unordered_map<DTermId, std::vector<TermId>> occurrence_args(
    const CompactedDTerm& delta, const AxiomAssignment& alpha) {
  std::unordered_map<DTermId, std::vector<TermId>> buckets;
  for (PrimId root : goal_roots(delta)) {
    DTermId tree = expand(delta, root);
    IptTable table(tree, alpha);
    if (!table.defined())
      throw UndefinedMgtError("goal tree '" + prim_name(root) +
                              "' proves nothing");
    for (const auto& [p, node] : table.positions())
      buckets[node].push_back(table.ipt_arg(p));
  }
  return buckets;
}

IptStats stats_from_args(const std::vector<TermId>& args,
                         std::unordered_map<TermId, int64_t>* size_memo,
                         std::unordered_map<TermId, int64_t>* height_memo) {
  IptStats st;
  st.occurrences = static_cast<int64_t>(args.size());
  if (args.empty()) return st;
  std::vector<int64_t> sizes, heights;
  sizes.reserve(args.size());
  heights.reserve(args.size());
  for (TermId a : args) {
    sizes.push_back(memo_term_size(a, size_memo));
    heights.push_back(memo_term_height(a, height_memo));
  }
  auto rounded_median = [](std::vector<int64_t>* v) {
    std::sort(v->begin(), v->end());
    size_t n = v->size();
    if (n % 2 == 1) return (*v)[n / 2];
    return ((*v)[n / 2 - 1] + (*v)[n / 2] + 1) / 2;
  };
  st.it_u = *std::max_element(sizes.begin(), sizes.end());
  st.ih_u = *std::max_element(heights.begin(), heights.end());
  st.it_m = rounded_median(&sizes);
  st.ih_m = rounded_median(&heights);
  return st;
}

// ------------------------------------------------------------ CSV output

bool needs_csv_quotes(const std::string& s) {
  return s.find_first_of(",\"\n") != std::string::npos;
}

std::string csv_cell(const std::string& s) {
  if (!needs_csv_quotes(s)) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

const char* bullet(bool b) { return b ? "•" : "-"; }

std::string organic_cell(OrganicStatus s) {
  switch (s) {
    case OrganicStatus::Organic: return "•";
    case OrganicStatus::WeaklyOrganic: return "(•)";
    case OrganicStatus::Neither: return "-";
    case OrganicStatus::Undetermined: return "?";
  }
  return "?";
}

}  // namespace

// --------------------------------------------------------------- oracle

bool is_tautology(TermId f) {
  std::vector<VarId> vars;
  collect_implicational_vars(f, &vars);
  if (vars.size() > 24)
    throw ResourceLimitError("truth-table check over " +
                             std::to_string(vars.size()) + " variables");
  std::unordered_map<VarId, bool> env;
  uint32_t combos = uint32_t{1} << vars.size();
  for (uint32_t mask = 0; mask < combos; ++mask) {
    for (size_t i = 0; i < vars.size(); ++i) env[vars[i]] = (mask >> i) & 1u;
    if (!eval_formula(f, env)) return false;
  }
  return true;
}

const char* organic_status_name(OrganicStatus s) {
  switch (s) {
    case OrganicStatus::Organic: return "organic";
    case OrganicStatus::WeaklyOrganic: return "weakly-organic";
    case OrganicStatus::Neither: return "neither";
    case OrganicStatus::Undetermined: return "undetermined";
  }
  return "undetermined";
}

OrganicStatus organic_status(TermId f) {
  if (!is_tautology(f))
    throw NotATheoremError("organicness asked of a non-tautology");
  if (organic_theorem(f)) return OrganicStatus::Organic;
  if (term_kind(f) == TermKind::Fun && term_kind(term_arg(f, 0)) == TermKind::Var) {
    TermId g = term_arg(f, 1);
    if (!contains_var(g, term_var(term_arg(f, 0))) && is_tautology(g) &&
        organic_theorem(g))
      return OrganicStatus::WeaklyOrganic;
  }
  return OrganicStatus::Neither;
}

// ------------------------------------------------------------------- DS

const char* ds_tag_name(DsTag t) {
  switch (t) {
    case DsTag::Equal: return "=";
    case DsTag::NMinor: return "n-minor";
    case DsTag::AxiomMajor: return "axiom-major";
    case DsTag::AxiomMinor: return "axiom-minor";
    case DsTag::SubMajor: return "◁";
    case DsTag::SubMinor: return "▷";
    case DsTag::CLess: return "<c";
    case DsTag::CGreater: return ">c";
    case DsTag::None: return "none";
  }
  return "none";
}

DsTag ds_relation(DTermId d) {
  if (d_is_leaf(d)) throw NotCompoundError("premise relation of a leaf");
  DTermId major = d_major(d), minor = d_minor(d);
  if (major == minor) return DsTag::Equal;
  if (d_is_leaf(minor) && d_leaf_prim(minor) == prim_n()) return DsTag::NMinor;
  if (d_is_leaf(major)) return DsTag::AxiomMajor;
  if (d_is_leaf(minor)) return DsTag::AxiomMinor;
  if (d_contains(minor, major)) return DsTag::SubMajor;
  if (d_contains(major, minor)) return DsTag::SubMinor;
  if (c_gt(major, minor)) return DsTag::CGreater;
  if (c_gt(minor, major)) return DsTag::CLess;
  return DsTag::None;
}

// ------------------------------------------------------------ SizeBound

std::string SizeBound::to_string() const {
  if (exact()) return std::to_string(lo);
  if (hi == kUnbounded) return "[" + std::to_string(lo) + ",inf)";
  return "[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
}

SizeBound min_proof_size(TermId goal_arg, const AxiomAssignment& alpha,
                         ProofMeasure measure, const MinProofOptions& opts) {
  int64_t budget =
      measure == ProofMeasure::CSize ? opts.csize_budget : opts.tsize_budget;
  MgtPools pools = build_mgt_pools(measure, budget, alpha, opts.max_candidates);
  return scan_mgt_pools(pools, goal_arg, opts.known_proof_size);
}

// --------------------------------------------------- per-label operations

IptStats ipt_stats(const CompactedDTerm& delta, const AxiomAssignment& alpha,
                   PrimId label) {
  DTermId subject = label_subject(delta, alpha, label);
  auto buckets = occurrence_args(delta, alpha);
  std::unordered_map<TermId, int64_t> size_memo, height_memo;
  auto it = buckets.find(subject);
  if (it == buckets.end()) return IptStats{};
  return stats_from_args(it->second, &size_memo, &height_memo);
}

Regularity regularity(const CompactedDTerm& delta, const AxiomAssignment& alpha,
                      PrimId label) {
  DTermId subject = label_subject(delta, alpha, label);
  Regularity r;
  r.rs = find_s_family(subject, alpha, ReductionKind::S).empty();
  r.rc = find_c_family(subject, alpha, ReductionKind::C).empty();
  return r;
}

// ----------------------------------------------------------- concordance

void Concordance::add(TermId formula, const std::string& mer,
                      const std::string& luk, const std::string& nn) {
  entries.emplace_back(rename_canonical(formula, RenamePool::Internal),
                       Entry{mer, luk, nn});
}

const Concordance::Entry* Concordance::find(TermId formula) const {
  TermId key = rename_canonical(formula, RenamePool::Internal);
  for (const auto& [k, e] : entries)
    if (k == key) return &e;
  return nullptr;
}

Concordance parse_concordance_text(const std::string& text) {
  Concordance c;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    size_t start = 0;
    while (true) {
      size_t tab = line.find('\t', start);
      cells.push_back(line.substr(start, tab == std::string::npos
                                             ? std::string::npos
                                             : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (!header_seen) {
      if (cells.empty() || cells[0] != "polish")
        throw MalformedError("concordance header must start with 'polish'");
      header_seen = true;
      continue;
    }
    cells.resize(4);
    c.add(parse_polish(cells[0]), cells[1], cells[2], cells[3]);
  }
  if (!header_seen) throw MalformedError("concordance file without header");
  return c;
}

Concordance load_concordance(const std::string& path) {
  return parse_concordance_text(read_text_file(path));
}

// ---------------------------------------------------------------- report

std::vector<PropertyRow> analyze(const CompactedDTerm& delta,
                                 const AxiomAssignment& alpha,
                                 const Concordance& concordance,
                                 const AnalyzeOptions& opts) {
  // Row subjects: axiom leaves first, then distinct compounds in
  // post-order of the bindings taken in definition order.
  std::vector<DTermId> subjects;
  for (const auto& [p, f] : alpha.bindings())
    if (p != prim_n()) subjects.push_back(d_leaf(p));
  size_t axiom_rows = subjects.size();
  {
    std::unordered_set<DTermId> seen;
    for (const auto& [label, rhs] : delta.bindings) {
      DTermId tree = expand(delta, label);
      std::vector<std::pair<DTermId, bool>> stack{{tree, false}};
      while (!stack.empty()) {
        auto [node, expanded] = stack.back();
        stack.pop_back();
        if (d_is_leaf(node) || seen.count(node)) continue;
        if (expanded) {
          seen.insert(node);
          subjects.push_back(node);
          continue;
        }
        stack.emplace_back(node, true);
        stack.emplace_back(d_minor(node), false);
        stack.emplace_back(d_major(node), false);
      }
    }
  }

  // Row index per subject node (1-based).
  std::unordered_map<DTermId, size_t> row_of;
  for (size_t i = 0; i < subjects.size(); ++i) row_of[subjects[i]] = i + 1;

  // In-edges of the minimal DAG, counted per parent slot.
  std::vector<int64_t> di(subjects.size() + 1, 0);
  for (size_t i = axiom_rows; i < subjects.size(); ++i) {
    for (DTermId child : {d_major(subjects[i]), d_minor(subjects[i])}) {
      if (d_is_leaf(child) && d_leaf_prim(child) == prim_n()) continue;
      ++di[row_of.at(child)];
    }
  }

  // Occurrences in the expanded goal trees.
  auto buckets = occurrence_args(delta, alpha);

  // Shared minimal-proof pools.
  MgtPools c_pools = build_mgt_pools(ProofMeasure::CSize, opts.min_proof.csize_budget,
                                     alpha, opts.min_proof.max_candidates);
  MgtPools t_pools = build_mgt_pools(ProofMeasure::TSize, opts.min_proof.tsize_budget,
                                     alpha, opts.min_proof.max_candidates);

  // Render a row's node with children named by row numbers.
  auto row_dterm = [&](size_t index) {
    DTermId node = subjects[index - 1];
    if (d_is_leaf(node)) return prim_name(d_leaf_prim(node));
    auto child_leaf = [&](DTermId c) {
      if (d_is_leaf(c) && d_leaf_prim(c) == prim_n()) return d_leaf(prim_n());
      return d_leaf(prim(std::to_string(row_of.at(c))));
    };
    return print_dnotation(
        d_comp(child_leaf(d_major(node)), child_leaf(d_minor(node))));
  };

  std::vector<PropertyRow> rows(subjects.size());
  int jobs = effective_jobs(opts.jobs);
  std::exception_ptr failure;

#ifdef CDT_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(jobs) if (jobs > 1)
#endif
  for (size_t i = 0; i < subjects.size(); ++i) {
    try {
      DTermId node = subjects[i];
      PropertyRow& row = rows[i];
      row.subject = node;
      row.label = std::to_string(i + 1);
      row.dterm = row_dterm(i + 1);
      row.compound = !d_is_leaf(node);

      row.theorem = alpha.mgt_arg(node);
      if (row.theorem == kNoTerm)
        throw UndefinedMgtError("subproof at row " + row.label +
                                " proves nothing");

      SizeReport sizes = measure(node);
      row.dc = sizes.c_size;
      row.dt = sizes.t_size;
      row.dh = sizes.height;
      row.dx = sizes.sc_size;
      row.di = di[i + 1];
      if (row.compound) row.ds = ds_relation(node);
      row.dp = is_prime(node);
      auto [kl, kr] = successive_heights(node);
      row.dk_l = kl;
      row.dk_r = kr;

      std::unordered_map<TermId, int64_t> size_memo, height_memo;
      row.fc = term_compound_count(row.theorem);
      row.ft = memo_term_size(row.theorem, &size_memo);
      row.fh = memo_term_height(row.theorem, &height_memo);
      row.fv = term_var_count(row.theorem);
      try {
        row.fo = organic_status(row.theorem);
      } catch (const Error&) {
        row.fo = OrganicStatus::Undetermined;
      }

      row.mc = scan_mgt_pools(c_pools, row.theorem, row.dc);
      row.mt = scan_mgt_pools(t_pools, row.theorem, row.dt);

      row.rs = find_s_family(node, alpha, ReductionKind::S).empty();
      row.rc = find_c_family(node, alpha, ReductionKind::C).empty();

      auto it = buckets.find(node);
      if (it != buckets.end()) {
        IptStats st = stats_from_args(it->second, &size_memo, &height_memo);
        row.dr = st.occurrences;
        row.it_u = st.it_u;
        row.it_m = st.it_m;
        row.ih_u = st.ih_u;
        row.ih_m = st.ih_m;
      }

      if (const Concordance::Entry* e = concordance.find(row.theorem)) {
        row.mer = e->mer;
        row.luk = e->luk;
        row.nn = e->nn;
      }
    } catch (...) {
#ifdef CDT_HAVE_OPENMP
#pragma omp critical(cdt_analyze_failure)
#endif
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return rows;
}

// ---------------------------------------------------------------- export

std::string rows_to_csv(const std::vector<PropertyRow>& rows) {
  std::string out =
      "label,dterm,MER,ŁUK,NN,DC,DT,DH,DX,DI,DR,DS,DP,DK_L,DK_R,FC,FT,FH,FV,"
      "FO,MC,MT,RS,RC,IT_U,IT_M,IH_U,IH_M\n";
  for (const PropertyRow& r : rows) {
    std::ostringstream line;
    line << csv_cell(r.label) << ',' << csv_cell(r.dterm) << ','
         << csv_cell(r.mer) << ',' << csv_cell(r.luk) << ',' << csv_cell(r.nn)
         << ',' << r.dc << ',' << r.dt << ',' << r.dh << ',' << r.dx << ','
         << r.di << ',' << r.dr << ',' << (r.compound ? ds_tag_name(r.ds) : "")
         << ',' << bullet(r.dp) << ',' << r.dk_l << ',' << r.dk_r << ','
         << r.fc << ',' << r.ft << ',' << r.fh << ',' << r.fv << ','
         << organic_cell(r.fo) << ',' << r.mc.to_string() << ','
         << r.mt.to_string() << ',' << bullet(r.rs) << ',' << bullet(r.rc)
         << ',' << r.it_u << ',' << r.it_m << ',' << r.ih_u << ',' << r.ih_m
         << '\n';
    out += line.str();
  }
  return out;
}

std::string rows_to_json(const std::vector<PropertyRow>& rows) {
  using ojson = nlohmann::ordered_json;
  ojson arr = ojson::array();
  for (const PropertyRow& r : rows) {
    ojson o;
    o["label"] = r.label;
    o["dterm"] = r.dterm;
    o["MER"] = r.mer;
    o["ŁUK"] = r.luk;
    o["NN"] = r.nn;
    o["DC"] = r.dc;
    o["DT"] = r.dt;
    o["DH"] = r.dh;
    o["DX"] = r.dx;
    o["DI"] = r.di;
    o["DR"] = r.dr;
    if (r.compound)
      o["DS"] = ds_tag_name(r.ds);
    else
      o["DS"] = nullptr;
    o["DP"] = r.dp;
    o["DK_L"] = r.dk_l;
    o["DK_R"] = r.dk_r;
    o["FC"] = r.fc;
    o["FT"] = r.ft;
    o["FH"] = r.fh;
    o["FV"] = r.fv;
    o["FO"] = organic_status_name(r.fo);
    if (r.mc.exact())
      o["MC"] = r.mc.lo;
    else
      o["MC"] = r.mc.to_string();
    if (r.mt.exact())
      o["MT"] = r.mt.lo;
    else
      o["MT"] = r.mt.to_string();
    o["RS"] = r.rs;
    o["RC"] = r.rc;
    o["IT_U"] = r.it_u;
    o["IT_M"] = r.it_m;
    o["IH_U"] = r.ih_u;
    o["IH_M"] = r.ih_m;
    arr.push_back(std::move(o));
  }
  return arr.dump(2) + "\n";
}

}  // namespace cdt
