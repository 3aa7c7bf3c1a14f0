#include "cdt/dterm.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <limits>
#include <map>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "cdt/detail/chunked.hpp"
#include "cdt/par.hpp"

namespace cdt {

namespace {

// ------------------------------------------------------- prim registry

struct PrimRegistry {
  std::mutex mu;
  std::vector<std::string> names;
  std::unordered_map<std::string, PrimId> ids;
};

PrimRegistry& preg() {
  static PrimRegistry r;
  return r;
}

// ------------------------------------------------------------- arena

struct DNode {
  PrimId prim = -1;  // >= 0: leaf
  DTermId major = kNoDTerm;
  DTermId minor = kNoDTerm;
  std::atomic<int64_t> tsize{-1};
  std::atomic<int32_t> height{-1};
  std::atomic<int64_t> csize{-1};
  std::atomic<uint8_t> has_n{0};  // 0 unknown, 1 no, 2 yes
};

constexpr int kShardBits = 4;
constexpr int kShards = 1 << kShardBits;

struct Shard {
  std::mutex mu;
  detail::ChunkedStore<DNode> nodes;
  std::unordered_multimap<uint64_t, DTermId> dedup;
};

struct Arena {
  Shard shards[kShards];
};

Arena& arena() {
  static Arena a;
  return a;
}

inline uint64_t mix(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

inline DNode& node_of(DTermId d) {
  return arena().shards[d & (kShards - 1)].nodes[static_cast<size_t>(d) >> kShardBits];
}

DTermId intern(PrimId p, DTermId major, DTermId minor) {
  uint64_t h = mix(mix(mix(0x452821e638d01377ULL, static_cast<uint64_t>(static_cast<uint32_t>(p))),
                       static_cast<uint64_t>(static_cast<uint32_t>(major))),
                   static_cast<uint64_t>(static_cast<uint32_t>(minor)));
  Shard& sh = arena().shards[h & (kShards - 1)];
  std::lock_guard<std::mutex> lock(sh.mu);
  auto range = sh.dedup.equal_range(h);
  for (auto it = range.first; it != range.second; ++it) {
    const DNode& n = sh.nodes[static_cast<size_t>(it->second) >> kShardBits];
    if (n.prim == p && n.major == major && n.minor == minor) return it->second;
  }
  size_t idx = sh.nodes.size();
  DNode& n = sh.nodes.prepare();
  n.prim = p;
  n.major = major;
  n.minor = minor;
  sh.nodes.publish();
  DTermId id = static_cast<DTermId>((idx << kShardBits) | (h & (kShards - 1)));
  sh.dedup.emplace(h, id);
  return id;
}

}  // namespace

PrimId prim(const std::string& name) {
  PrimRegistry& r = preg();
  std::lock_guard<std::mutex> lock(r.mu);
  auto it = r.ids.find(name);
  if (it != r.ids.end()) return it->second;
  PrimId id = static_cast<PrimId>(r.names.size());
  r.names.push_back(name);
  r.ids.emplace(name, id);
  return id;
}

PrimId prim_n() {
  static PrimId id = prim("n");
  return id;
}

const std::string& prim_name(PrimId p) {
  PrimRegistry& r = preg();
  std::lock_guard<std::mutex> lock(r.mu);
  return r.names[static_cast<size_t>(p)];
}

DTermId d_leaf(PrimId p) { return intern(p, kNoDTerm, kNoDTerm); }
DTermId d_comp(DTermId major, DTermId minor) { return intern(-1, major, minor); }

bool d_is_leaf(DTermId d) { return node_of(d).prim >= 0; }
PrimId d_leaf_prim(DTermId d) { return node_of(d).prim; }
DTermId d_major(DTermId d) { return node_of(d).major; }
DTermId d_minor(DTermId d) { return node_of(d).minor; }

// ----------------------------------------------------------- traversal

namespace {

// Distinct compound subterms in post-order first-visit order, iterative.
template <class F>
void for_each_compound_postorder(DTermId root, F&& f) {
  if (d_is_leaf(root)) return;
  std::unordered_set<DTermId> done;
  std::vector<std::pair<DTermId, int>> stack;
  stack.emplace_back(root, 0);
  while (!stack.empty()) {
    auto [node, st] = stack.back();
    if (d_is_leaf(node) || done.count(node)) {
      stack.pop_back();
      continue;
    }
    if (st == 0) {
      stack.back().second = 1;
      stack.emplace_back(d_major(node), 0);
    } else if (st == 1) {
      stack.back().second = 2;
      stack.emplace_back(d_minor(node), 0);
    } else {
      stack.pop_back();
      done.insert(node);
      f(node);
    }
  }
}

}  // namespace

std::vector<DTermId> subeq_compounds(DTermId d) {
  std::vector<DTermId> out;
  for_each_compound_postorder(d, [&](DTermId x) { out.push_back(x); });
  return out;
}

std::vector<DTermId> sub_compounds(DTermId d) {
  std::vector<DTermId> out = subeq_compounds(d);
  if (!out.empty()) out.pop_back();  // the root completes last
  return out;
}

std::vector<PrimId> prims_of(DTermId d) {
  std::vector<PrimId> out;
  std::unordered_set<PrimId> seen;
  std::unordered_set<DTermId> visited;
  std::vector<DTermId> stack{d};
  while (!stack.empty()) {
    DTermId cur = stack.back();
    stack.pop_back();
    if (d_is_leaf(cur)) {
      if (seen.insert(d_leaf_prim(cur)).second) out.push_back(d_leaf_prim(cur));
      continue;
    }
    if (!visited.insert(cur).second) continue;
    stack.push_back(d_minor(cur));
    stack.push_back(d_major(cur));  // major explored first
  }
  return out;
}

bool d_contains(DTermId d, DTermId e) {
  std::unordered_set<DTermId> visited;
  std::vector<DTermId> stack{d};
  while (!stack.empty()) {
    DTermId cur = stack.back();
    stack.pop_back();
    if (cur == e) return true;
    if (d_is_leaf(cur) || !visited.insert(cur).second) continue;
    stack.push_back(d_major(cur));
    stack.push_back(d_minor(cur));
  }
  return false;
}

bool contains_prim(DTermId d, PrimId p) { return d_contains(d, d_leaf(p)); }

bool contains_n(DTermId d) {
  DNode& n = node_of(d);
  uint8_t cached = n.has_n.load(std::memory_order_relaxed);
  if (cached) return cached == 2;
  bool v = d_is_leaf(d) ? d_leaf_prim(d) == prim_n()
                        : contains_n(d_major(d)) || contains_n(d_minor(d));
  n.has_n.store(v ? 2 : 1, std::memory_order_relaxed);
  return v;
}

// ------------------------------------------------------------- measures

int64_t t_size(DTermId d) {
  {
    int64_t cached = node_of(d).tsize.load(std::memory_order_relaxed);
    if (cached >= 0) return cached;
  }
  for_each_compound_postorder(d, [](DTermId x) {
    DNode& n = node_of(x);
    if (n.tsize.load(std::memory_order_relaxed) >= 0) return;
    int64_t a = d_is_leaf(d_major(x)) ? 0 : node_of(d_major(x)).tsize.load(std::memory_order_relaxed);
    int64_t b = d_is_leaf(d_minor(x)) ? 0 : node_of(d_minor(x)).tsize.load(std::memory_order_relaxed);
    if (a < 0 || b < 0 || a > std::numeric_limits<int64_t>::max() - b - 1)
      throw ResourceLimitError("t-size exceeds 64-bit range");
    n.tsize.store(a + b + 1, std::memory_order_relaxed);
  });
  if (d_is_leaf(d)) return 0;
  return node_of(d).tsize.load(std::memory_order_relaxed);
}

int32_t d_height(DTermId d) {
  {
    int32_t cached = node_of(d).height.load(std::memory_order_relaxed);
    if (cached >= 0) return cached;
  }
  for_each_compound_postorder(d, [](DTermId x) {
    DNode& n = node_of(x);
    if (n.height.load(std::memory_order_relaxed) >= 0) return;
    int32_t a = d_is_leaf(d_major(x)) ? 0 : node_of(d_major(x)).height.load(std::memory_order_relaxed);
    int32_t b = d_is_leaf(d_minor(x)) ? 0 : node_of(d_minor(x)).height.load(std::memory_order_relaxed);
    n.height.store(1 + std::max(a, b), std::memory_order_relaxed);
  });
  if (d_is_leaf(d)) return 0;
  return node_of(d).height.load(std::memory_order_relaxed);
}

int64_t c_size(DTermId d) {
  DNode& n = node_of(d);
  int64_t cached = n.csize.load(std::memory_order_relaxed);
  if (cached >= 0) return cached;
  int64_t count = 0;
  for_each_compound_postorder(d, [&count](DTermId) { ++count; });
  n.csize.store(count, std::memory_order_relaxed);
  return count;
}

int64_t sc_size(DTermId d) {
  // Leaves have c-size 0, so only compound subterms contribute.
  int64_t sum = 0;
  for_each_compound_postorder(d, [&sum](DTermId x) { sum += c_size(x); });
  return sum;
}

SizeReport measure(DTermId d) {
  return SizeReport{t_size(d), c_size(d), sc_size(d), d_height(d)};
}

int64_t c_size_of_set(const std::vector<DTermId>& ds) {
  std::unordered_set<DTermId> all;
  for (DTermId d : ds)
    for_each_compound_postorder(d, [&all](DTermId x) { all.insert(x); });
  return static_cast<int64_t>(all.size());
}

// ------------------------------------------------- compaction orderings

namespace {
std::unordered_set<DTermId> strict_compound_set(DTermId d) {
  std::unordered_set<DTermId> out;
  for_each_compound_postorder(d, [&out](DTermId x) { out.insert(x); });
  if (!d_is_leaf(d)) out.erase(d);
  return out;
}
}  // namespace

bool c_geq(DTermId d, DTermId e) {
  if (d == e) return true;
  std::unordered_set<DTermId> sd = strict_compound_set(d);
  std::vector<DTermId> se = subeq_compounds(e);
  if (!se.empty()) se.pop_back();  // strict
  for (DTermId x : se)
    if (!sd.count(x)) return false;
  return true;
}

bool c_gt(DTermId d, DTermId e) {
  if (d == e) return false;
  std::unordered_set<DTermId> sd = strict_compound_set(d);
  std::vector<DTermId> se = subeq_compounds(e);
  if (!se.empty()) se.pop_back();
  for (DTermId x : se)
    if (!sd.count(x)) return false;
  return se.size() < sd.size();
}

std::vector<DTermId> c_smaller_set(DTermId d) {
  if (d_is_leaf(d))
    throw NotCompoundError("c-smaller-set of the primitive D-term " + prim_name(d_leaf_prim(d)));
  std::vector<DTermId> subs = sub_compounds(d);
  std::vector<PrimId> prims = prims_of(d);
  std::vector<DTermId> pool = subs;
  for (PrimId p : prims) pool.push_back(d_leaf(p));
  std::vector<DTermId> out;
  out.reserve(pool.size() * pool.size() + prims.size());
  for (DTermId a : pool)
    for (DTermId b : pool) out.push_back(d_comp(a, b));
  for (PrimId p : prims) out.push_back(d_leaf(p));
  return out;
}

bool is_prime(DTermId d) { return t_size(d) == c_size(d); }

std::pair<int32_t, int32_t> successive_heights(DTermId d) {
  // Per distinct node: longest run of major edges (resp. minor edges)
  // starting there, and the best run anywhere below.
  struct Entry {
    int32_t runL, runR, bestL, bestR;
  };
  std::unordered_map<DTermId, Entry> memo;
  auto entry = [&memo](DTermId x) -> Entry {
    if (d_is_leaf(x)) return {0, 0, 0, 0};
    return memo.at(x);
  };
  for_each_compound_postorder(d, [&](DTermId x) {
    Entry a = entry(d_major(x));
    Entry b = entry(d_minor(x));
    Entry e;
    e.runL = 1 + a.runL;
    e.runR = 1 + b.runR;
    e.bestL = std::max({e.runL, a.bestL, b.bestL});
    e.bestR = std::max({e.runR, a.bestR, b.bestR});
    memo.emplace(x, e);
  });
  Entry r = entry(d);
  return {r.bestL, r.bestR};
}

// ------------------------------------------------- tree-view positions

std::vector<std::pair<Position, DTermId>> d_positions(DTermId d, size_t limit) {
  std::vector<std::pair<Position, DTermId>> out;
  std::vector<std::pair<Position, DTermId>> stack;
  stack.emplace_back(Position{}, d);
  while (!stack.empty()) {
    auto [pos, node] = std::move(stack.back());
    stack.pop_back();
    if (out.size() >= limit)
      throw ResourceLimitError("tree unfolding exceeds " + std::to_string(limit) + " positions");
    out.emplace_back(pos, node);
    if (!d_is_leaf(node)) {
      Position p2 = pos;
      p2.push_back(2);
      stack.emplace_back(std::move(p2), d_minor(node));
      Position p1 = std::move(pos);
      p1.push_back(1);
      stack.emplace_back(std::move(p1), d_major(node));
    }
  }
  return out;
}

DTermId d_subterm_at(DTermId d, const Position& p) {
  DTermId cur = d;
  for (size_t i = 0; i < p.size(); ++i) {
    if (d_is_leaf(cur) || (p[i] != 1 && p[i] != 2))
      throw PositionOutOfRangeError("no subterm at " + position_to_string(p));
    cur = p[i] == 1 ? d_major(cur) : d_minor(cur);
  }
  return cur;
}

DTermId d_replace_at(DTermId d, const Position& p, DTermId s) {
  if (p.empty()) return s;
  if (d_is_leaf(d) || (p.front() != 1 && p.front() != 2))
    throw PositionOutOfRangeError("no subterm at " + position_to_string(p));
  Position rest(p.begin() + 1, p.end());
  if (p.front() == 1) return d_comp(d_replace_at(d_major(d), rest, s), d_minor(d));
  return d_comp(d_major(d), d_replace_at(d_minor(d), rest, s));
}

DTermId d_replace_all(DTermId d, DTermId e, DTermId repl) {
  std::unordered_map<DTermId, DTermId> memo;
  // Post-order rewrite over distinct nodes; leaves equal to e are also
  // replaced (e may be primitive only if callers allow it).
  std::vector<std::pair<DTermId, int>> stack;
  stack.emplace_back(d, 0);
  while (!stack.empty()) {
    auto [node, st] = stack.back();
    if (memo.count(node)) {
      stack.pop_back();
      continue;
    }
    if (node == e) {
      memo.emplace(node, repl);
      stack.pop_back();
      continue;
    }
    if (d_is_leaf(node)) {
      memo.emplace(node, node);
      stack.pop_back();
      continue;
    }
    if (st == 0) {
      stack.back().second = 1;
      stack.emplace_back(d_major(node), 0);
    } else if (st == 1) {
      stack.back().second = 2;
      stack.emplace_back(d_minor(node), 0);
    } else {
      stack.pop_back();
      memo.emplace(node, d_comp(memo.at(d_major(node)), memo.at(d_minor(node))));
    }
  }
  return memo.at(d);
}

// -------------------------------------------------------- compacted form

bool CompactedDTerm::defines(PrimId l) const {
  for (const auto& [k, v] : bindings)
    if (k == l) return true;
  for (const auto& [k, v] : aliases)
    if (k == l) return true;
  return false;
}

DTermId CompactedDTerm::rhs(PrimId l) const {
  for (const auto& [k, v] : bindings)
    if (k == l) return v;
  for (const auto& [k, v] : aliases)
    if (k == l) return d_leaf(v);
  throw UnknownLabelError("label " + prim_name(l) + " is not bound");
}

std::vector<PrimId> CompactedDTerm::domain() const {
  std::vector<PrimId> out;
  out.reserve(bindings.size() + aliases.size());
  for (const auto& [k, v] : bindings) out.push_back(k);
  for (const auto& [k, v] : aliases) out.push_back(k);
  return out;
}

std::vector<PrimId> CompactedDTerm::maximal_labels() const {
  std::unordered_set<PrimId> referenced;
  for (const auto& [k, v] : bindings) {
    std::vector<PrimId> ps = prims_of(v);
    referenced.insert(ps.begin(), ps.end());
  }
  for (const auto& [k, v] : aliases) referenced.insert(v);
  std::vector<PrimId> out;
  for (const auto& [k, v] : bindings)
    if (!referenced.count(k)) out.push_back(k);
  for (const auto& [k, v] : aliases)
    if (!referenced.count(k)) out.push_back(k);
  return out;
}

CompactedDTerm compact(const std::vector<std::pair<PrimId, DTermId>>& roots) {
  CompactedDTerm out;
  std::unordered_set<std::string> used;
  for (const auto& [label, tree] : roots) {
    used.insert(prim_name(label));
    for (PrimId p : prims_of(tree)) used.insert(prim_name(p));
  }
  int counter = 2;
  auto fresh = [&]() {
    while (used.count(std::to_string(counter))) ++counter;
    used.insert(std::to_string(counter));
    return prim(std::to_string(counter++));
  };
  std::unordered_map<DTermId, PrimId> label_of;
  auto ref_of = [&](DTermId x) { return d_is_leaf(x) ? d_leaf_prim(x) : label_of.at(x); };
  for (const auto& [label, tree] : roots) {
    if (d_is_leaf(tree)) {
      out.aliases.emplace_back(label, d_leaf_prim(tree));
      out.goal_labels.push_back(label);
      continue;
    }
    if (label_of.count(tree)) {
      out.aliases.emplace_back(label, label_of.at(tree));
      out.goal_labels.push_back(label);
      continue;
    }
    for_each_compound_postorder(tree, [&](DTermId x) {
      if (label_of.count(x)) return;
      PrimId l = (x == tree) ? label : fresh();
      out.bindings.emplace_back(l, d_comp(d_leaf(ref_of(d_major(x))), d_leaf(ref_of(d_minor(x)))));
      label_of.emplace(x, l);
    });
    out.goal_labels.push_back(label);
  }
  return out;
}

namespace {

// Substitute defined-label leaves by their expansions, iteratively.
DTermId subst_label_leaves(DTermId t, const std::unordered_map<PrimId, DTermId>& leaf_map) {
  std::unordered_map<DTermId, DTermId> memo;
  std::vector<std::pair<DTermId, int>> stack;
  stack.emplace_back(t, 0);
  while (!stack.empty()) {
    auto [node, st] = stack.back();
    if (memo.count(node)) {
      stack.pop_back();
      continue;
    }
    if (d_is_leaf(node)) {
      auto it = leaf_map.find(d_leaf_prim(node));
      memo.emplace(node, it == leaf_map.end() ? node : it->second);
      stack.pop_back();
      continue;
    }
    if (st == 0) {
      stack.back().second = 1;
      stack.emplace_back(d_major(node), 0);
    } else if (st == 1) {
      stack.back().second = 2;
      stack.emplace_back(d_minor(node), 0);
    } else {
      stack.pop_back();
      memo.emplace(node, d_comp(memo.at(d_major(node)), memo.at(d_minor(node))));
    }
  }
  return memo.at(t);
}

struct Expander {
  const CompactedDTerm& delta;
  std::unordered_map<PrimId, DTermId> rhs_map;  // label -> unexpanded rhs
  std::unordered_map<PrimId, DTermId> done;
  std::unordered_map<PrimId, uint8_t> color;  // 1 grey, 2 black

  explicit Expander(const CompactedDTerm& d) : delta(d) {
    for (const auto& [k, v] : d.bindings) rhs_map.emplace(k, v);
    for (const auto& [k, v] : d.aliases) rhs_map.emplace(k, d_leaf(v));
  }

  DTermId expand_label(PrimId l) {
    auto d_it = done.find(l);
    if (d_it != done.end()) return d_it->second;
    // Iterative DFS over labels.
    std::vector<PrimId> stack{l};
    while (!stack.empty()) {
      PrimId cur = stack.back();
      if (done.count(cur)) {
        stack.pop_back();
        continue;
      }
      DTermId rhs = rhs_map.at(cur);
      std::vector<PrimId> pending;
      for (PrimId p : prims_of(rhs)) {
        if (!rhs_map.count(p) || done.count(p)) continue;
        if (color[p] == 1)
          throw CyclicLabelsError("label " + prim_name(p) + " participates in a reference cycle");
        pending.push_back(p);
      }
      if (pending.empty()) {
        std::unordered_map<PrimId, DTermId> leaf_map;
        for (PrimId p : prims_of(rhs)) {
          auto it = done.find(p);
          if (it != done.end()) leaf_map.emplace(p, it->second);
        }
        done.emplace(cur, subst_label_leaves(rhs, leaf_map));
        color[cur] = 2;
        stack.pop_back();
      } else {
        color[cur] = 1;
        for (PrimId p : pending) stack.push_back(p);
      }
    }
    return done.at(l);
  }
};

}  // namespace

DTermId expand(const CompactedDTerm& delta, PrimId label) {
  if (!delta.defines(label)) throw UnknownLabelError("label " + prim_name(label) + " is not bound");
  Expander ex(delta);
  return ex.expand_label(label);
}

DTermId expand_tree(const CompactedDTerm& delta, DTermId t) {
  Expander ex(delta);
  std::unordered_map<PrimId, DTermId> leaf_map;
  for (PrimId p : prims_of(t))
    if (ex.rhs_map.count(p)) leaf_map.emplace(p, ex.expand_label(p));
  return subst_label_leaves(t, leaf_map);
}

DagStats dag_stats(const CompactedDTerm& delta) {
  DagStats out;
  std::map<PrimId, int64_t> di, dr;
  for (const auto& [k, v] : delta.bindings) {
    out.inner_nodes += t_size(v);
    // In-edges: every leaf occurrence in the rhs tree.
    std::vector<std::pair<Position, DTermId>> nodes = d_positions(v);
    for (const auto& [pos, node] : nodes)
      if (d_is_leaf(node)) di[d_leaf_prim(node)] += 1;
  }
  for (const auto& [k, v] : delta.aliases) di[v] += 1;
  for (const auto& [k, v] : delta.bindings) di[k] += 0;  // ensure presence
  for (const auto& [k, v] : delta.aliases) di[k] += 0;
  out.roots = delta.maximal_labels();

  // Occurrence counts in expanded root trees via a multiplicity pass.
  Expander ex(delta);
  std::unordered_map<DTermId, int64_t> occ;
  for (PrimId r : out.roots) {
    DTermId tree = ex.expand_label(r);
    out.total_inner += t_size(tree);
    out.total_leaves += t_size(tree) + 1;
    std::unordered_map<DTermId, int64_t> local;
    local[tree] += 1;
    std::vector<DTermId> order;
    for_each_compound_postorder(tree, [&order](DTermId x) { order.push_back(x); });
    std::sort(order.begin(), order.end(),
              [](DTermId a, DTermId b) { return d_height(a) > d_height(b); });
    for (DTermId x : order) {
      int64_t m = local[x];
      local[d_major(x)] += m;
      local[d_minor(x)] += m;
    }
    for (const auto& [node, count] : local) occ[node] += count;
  }
  for (const auto& [k, v] : delta.bindings) {
    DTermId tree = ex.expand_label(k);
    auto it = occ.find(tree);
    dr[k] = it == occ.end() ? 0 : it->second;
  }
  for (const auto& [k, v] : delta.aliases) {
    DTermId tree = ex.expand_label(k);
    auto it = occ.find(tree);
    dr[k] = it == occ.end() ? 0 : it->second;
  }
  // Primitive leaves (excluding "n" from the occurrence report).
  std::unordered_set<PrimId> prims_seen;
  for (const auto& [k, v] : delta.bindings)
    for (PrimId p : prims_of(v))
      if (!delta.defines(p)) prims_seen.insert(p);
  for (PrimId p : prims_seen) {
    auto it = occ.find(d_leaf(p));
    di[p] += 0;  // ensure presence
    if (p != prim_n()) dr[p] = it == occ.end() ? 0 : it->second;
  }
  out.di.assign(di.begin(), di.end());
  out.dr.assign(dr.begin(), dr.end());
  return out;
}

// ----------------------------------------------------------- enumeration

std::vector<DTermId> prime_level(int n, const std::vector<PrimId>& axioms) {
  if (n < 0) throw ResourceLimitError("negative level");
  if (axioms.size() == 1) {
    DTermId leaf = d_leaf(axioms[0]);
    if (n == 0) return {leaf};
    if (n > 24) throw ResourceLimitError("prime level " + std::to_string(n) + " exceeds the enumeration budget");
    std::vector<DTermId> level{d_comp(leaf, leaf)};
    for (int k = 2; k <= n; ++k) {
      std::vector<DTermId> next;
      next.reserve(level.size() * 2);
      for (DTermId c : level) {
        next.push_back(d_comp(c, leaf));
        next.push_back(d_comp(leaf, c));
      }
      level = std::move(next);
    }
    return level;
  }
  std::vector<DTermId> all = csize_level(n, axioms);
  std::vector<DTermId> out;
  for (DTermId d : all)
    if (is_prime(d)) out.push_back(d);
  return out;
}

namespace {

struct PspCache {
  std::mutex mu;
  std::map<std::pair<std::vector<PrimId>, int>, std::vector<DTermId>> levels;
};

PspCache& psp_cache() {
  static PspCache c;
  return c;
}

std::vector<DTermId> psp_successors(DTermId d, const std::vector<PrimId>& axioms) {
  std::vector<DTermId> out;
  std::vector<DTermId> subeq = subeq_compounds(d);
  std::vector<PrimId> prims = prims_of(d);
  std::vector<DTermId> pool;  // subterm pool in deterministic order
  pool.insert(pool.end(), subeq.begin(), subeq.end());
  std::unordered_set<PrimId> seen(prims.begin(), prims.end());
  for (PrimId p : prims) pool.push_back(d_leaf(p));
  for (PrimId a : axioms)
    if (seen.insert(a).second) pool.push_back(d_leaf(a));
  for (DTermId e : pool) out.push_back(d_comp(d, e));
  for (DTermId e : pool)
    if (e != d) out.push_back(d_comp(e, d));
  return out;
}

}  // namespace

const std::vector<DTermId>& psp_level(int n, const std::vector<PrimId>& axioms, size_t max_terms) {
  if (n < 0) throw ResourceLimitError("negative level");
  PspCache& cache = psp_cache();
  std::lock_guard<std::mutex> lock(cache.mu);
  auto key = std::make_pair(axioms, n);
  auto it = cache.levels.find(key);
  if (it != cache.levels.end()) return it->second;
  // Build missing levels bottom-up.
  for (int k = 0; k <= n; ++k) {
    auto kk = std::make_pair(axioms, k);
    if (cache.levels.count(kk)) continue;
    std::vector<DTermId> level;
    if (k == 0) {
      for (PrimId a : axioms) level.push_back(d_leaf(a));
    } else {
      const std::vector<DTermId>& prev = cache.levels.at(std::make_pair(axioms, k - 1));
      size_t estimate = 0;
      for (DTermId d : prev) {
        size_t c = subeq_compounds(d).size();
        size_t p = prims_of(d).size();
        estimate += 2 * (c + p) + 2 * axioms.size();
      }
      if (estimate > max_terms)
        throw ResourceLimitError("psp level " + std::to_string(k) + " would exceed " +
                                 std::to_string(max_terms) + " terms");
      int jobs = effective_jobs(0);
      if (jobs > 1 && prev.size() > 256) {
        std::vector<std::vector<DTermId>> parts(prev.size());
#ifdef CDT_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 64)
#endif
        for (size_t i = 0; i < prev.size(); ++i) parts[i] = psp_successors(prev[i], axioms);
        for (auto& part : parts) level.insert(level.end(), part.begin(), part.end());
      } else {
        for (DTermId d : prev) {
          std::vector<DTermId> part = psp_successors(d, axioms);
          level.insert(level.end(), part.begin(), part.end());
        }
      }
    }
    cache.levels.emplace(kk, std::move(level));
  }
  return cache.levels.at(key);
}

// --------------------------------------- canonical minimal-DAG sequences

namespace {

// Enumerates label sequences L1..Ln over the primitive alphabet where
// each Li pairs two earlier entities, pairs never repeat (minimality),
// every label is reachable from Ln, and the sequence order equals the
// post-order first-visit numbering of the final DAG (canonicality), so
// each DAG is produced exactly once.
struct SeqState {
  int nprims = 0;
  int n = 0;
  std::vector<std::pair<int, int>> seq;  // entity = prim index | nprims+label
  std::unordered_set<uint64_t> used;
  std::vector<uint8_t> referenced;  // per label
  int unreferenced = 0;

  bool canonical() const {
    // Post-order first-visit numbering from the last label.
    std::vector<int> number(seq.size(), -1);
    int next = 0;
    struct Frame {
      int label;
      int st;
    };
    std::vector<Frame> stack{{static_cast<int>(seq.size()) - 1, 0}};
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (number[f.label] >= 0) {
        stack.pop_back();
        continue;
      }
      const auto& [a, b] = seq[f.label];
      if (f.st == 0) {
        f.st = 1;
        if (a >= nprims && number[a - nprims] < 0) stack.push_back({a - nprims, 0});
      } else if (f.st == 1) {
        f.st = 2;
        if (b >= nprims && number[b - nprims] < 0) stack.push_back({b - nprims, 0});
      } else {
        number[f.label] = next++;
        if (number[f.label] != f.label) return false;  // order mismatch
        stack.pop_back();
      }
    }
    return next == static_cast<int>(seq.size());  // reachability
  }
};

template <class Sink>
void enumerate_seq(SeqState& st, Sink&& sink) {
  int i = static_cast<int>(st.seq.size());
  if (i == st.n) {
    if (st.canonical()) sink(st);
    return;
  }
  int entities = st.nprims + i;
  for (int a = 0; a < entities; ++a) {
    for (int b = 0; b < entities; ++b) {
      uint64_t key = (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
      if (st.used.count(key)) continue;
      int newly_ref = 0;
      bool ra = a >= st.nprims && !st.referenced[a - st.nprims];
      bool rb = b >= st.nprims && !st.referenced[b - st.nprims] && b != a;
      newly_ref = (ra ? 1 : 0) + (rb ? 1 : 0);
      int unref_after = st.unreferenced - newly_ref + 1;
      // Each later step nets at least -1 unreferenced labels; exactly one
      // may remain at the end.
      if (unref_after > st.n - i) continue;
      st.used.insert(key);
      if (ra) st.referenced[a - st.nprims] = 1;
      if (rb) st.referenced[b - st.nprims] = 1;
      st.seq.emplace_back(a, b);
      st.referenced.push_back(0);
      st.unreferenced = unref_after;
      enumerate_seq(st, sink);
      st.unreferenced += newly_ref - 1;
      st.referenced.pop_back();
      st.seq.pop_back();
      if (ra) st.referenced[a - st.nprims] = 0;
      if (rb) st.referenced[b - st.nprims] = 0;
      st.used.erase(key);
    }
  }
}

// Collect all valid prefixes of a given depth (for parallel splitting).
void collect_prefixes(SeqState& st, int depth, std::vector<SeqState>& out) {
  if (static_cast<int>(st.seq.size()) == depth) {
    out.push_back(st);
    return;
  }
  int i = static_cast<int>(st.seq.size());
  int entities = st.nprims + i;
  for (int a = 0; a < entities; ++a) {
    for (int b = 0; b < entities; ++b) {
      uint64_t key = (static_cast<uint64_t>(a) << 32) | static_cast<uint32_t>(b);
      if (st.used.count(key)) continue;
      bool ra = a >= st.nprims && !st.referenced[a - st.nprims];
      bool rb = b >= st.nprims && !st.referenced[b - st.nprims] && b != a;
      int newly_ref = (ra ? 1 : 0) + (rb ? 1 : 0);
      int unref_after = st.unreferenced - newly_ref + 1;
      if (unref_after > st.n - i) continue;
      st.used.insert(key);
      if (ra) st.referenced[a - st.nprims] = 1;
      if (rb) st.referenced[b - st.nprims] = 1;
      st.seq.emplace_back(a, b);
      st.referenced.push_back(0);
      st.unreferenced = unref_after;
      collect_prefixes(st, depth, out);
      st.unreferenced += newly_ref - 1;
      st.referenced.pop_back();
      st.seq.pop_back();
      if (ra) st.referenced[a - st.nprims] = 0;
      if (rb) st.referenced[b - st.nprims] = 0;
      st.used.erase(key);
    }
  }
}

DTermId build_from_seq(const SeqState& st, const std::vector<PrimId>& axioms) {
  std::vector<DTermId> exp;
  exp.reserve(st.seq.size());
  auto entity = [&](int e) {
    return e < st.nprims ? d_leaf(axioms[static_cast<size_t>(e)]) : exp[static_cast<size_t>(e - st.nprims)];
  };
  for (const auto& [a, b] : st.seq) exp.push_back(d_comp(entity(a), entity(b)));
  return exp.back();
}

constexpr int kMaxCSizeLevel = 8;

}  // namespace

std::vector<DTermId> csize_level(int n, const std::vector<PrimId>& axioms, int jobs) {
  if (n < 0) throw ResourceLimitError("negative level");
  if (n == 0) {
    std::vector<DTermId> out;
    for (PrimId a : axioms) out.push_back(d_leaf(a));
    return out;
  }
  if (n > kMaxCSizeLevel)
    throw ResourceLimitError("c-size level " + std::to_string(n) + " exceeds the enumeration budget");
  SeqState st;
  st.nprims = static_cast<int>(axioms.size());
  st.n = n;
  int workers = effective_jobs(jobs);
  if (workers <= 1 || n <= 2) {
    std::vector<DTermId> out;
    enumerate_seq(st, [&](const SeqState& s) { out.push_back(build_from_seq(s, axioms)); });
    return out;
  }
  std::vector<SeqState> prefixes;
  collect_prefixes(st, std::min(3, n), prefixes);
  std::vector<std::vector<DTermId>> parts(prefixes.size());
#ifdef CDT_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers)
#endif
  for (size_t i = 0; i < prefixes.size(); ++i) {
    SeqState local = prefixes[i];
    enumerate_seq(local, [&](const SeqState& s) { parts[i].push_back(build_from_seq(s, axioms)); });
  }
  std::vector<DTermId> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// --------------------------------------------------------------- counting

namespace {

uint64_t count_csize(int n, int jobs) {
  if (n == 0) return 1;
  if (n > kMaxCSizeLevel)
    throw ResourceLimitError("c-size counting beyond level " + std::to_string(kMaxCSizeLevel));
  SeqState st;
  st.nprims = 1;
  st.n = n;
  int workers = effective_jobs(jobs);
  if (workers <= 1 || n <= 2) {
    uint64_t count = 0;
    enumerate_seq(st, [&](const SeqState&) { ++count; });
    return count;
  }
  std::vector<SeqState> prefixes;
  collect_prefixes(st, std::min(3, n), prefixes);
  uint64_t total = 0;
#ifdef CDT_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) reduction(+ : total) num_threads(workers)
#endif
  for (size_t i = 0; i < prefixes.size(); ++i) {
    SeqState local = prefixes[i];
    uint64_t count = 0;
    enumerate_seq(local, [&](const SeqState&) { ++count; });
    total += count;
  }
  return total;
}

}  // namespace

uint64_t count_dterms(CountMeasure m, int n, int jobs) {
  if (n < 0) throw ResourceLimitError("negative size");
  const uint64_t kMax = std::numeric_limits<uint64_t>::max();
  switch (m) {
    case CountMeasure::TSize: {
      // Full binary trees over one primitive: Catalan numbers.
      std::vector<unsigned __int128> c(static_cast<size_t>(n) + 1, 0);
      c[0] = 1;
      for (int k = 1; k <= n; ++k) {
        unsigned __int128 sum = 0;
        for (int i = 0; i < k; ++i) {
          unsigned __int128 prod = c[static_cast<size_t>(i)] * c[static_cast<size_t>(k - 1 - i)];
          sum += prod;
          if (sum > static_cast<unsigned __int128>(kMax))
            throw ResourceLimitError("tree-size count exceeds 64-bit range");
        }
        c[static_cast<size_t>(k)] = sum;
      }
      return static_cast<uint64_t>(c[static_cast<size_t>(n)]);
    }
    case CountMeasure::Height: {
      // A(h) = number of trees of height <= h; A(h+1) = 1 + A(h)^2;
      // the exact-height count is A(n) - A(n-1).
      if (n == 0) return 1;
      if (n > 7) throw ResourceLimitError("height count exceeds 64-bit range");
      unsigned __int128 a = 1;     // A(0)
      unsigned __int128 prev = 1;  // A(n-1) once the loop ends
      for (int h = 1; h <= n; ++h) {
        prev = a;
        a = 1 + a * a;
      }
      unsigned __int128 exact = a - prev;
      if (exact > static_cast<unsigned __int128>(kMax))
        throw ResourceLimitError("height count exceeds 64-bit range");
      return static_cast<uint64_t>(exact);
    }
    case CountMeasure::CSize:
      return count_csize(n, jobs);
    case CountMeasure::Prime: {
      if (n == 0) return 1;
      if (n > 63) throw ResourceLimitError("prime count exceeds 64-bit range");
      return uint64_t{1} << (n - 1);
    }
    case CountMeasure::Psp: {
      const std::vector<DTermId>& level = psp_level(n, {prim("1")});
      return level.size();
    }
  }
  throw Error("Internal", "unknown measure");
}

}  // namespace cdt
