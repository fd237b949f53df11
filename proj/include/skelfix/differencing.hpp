#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "skelfix/ast.hpp"
#include "skelfix/edit_distance.hpp"
#include "skelfix/print.hpp"

namespace skelfix {

struct InconsistentMatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AnchorNotFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MatchPair {
  const AstNode* buggy = nullptr;
  const AstNode* patched = nullptr;
  double similarity = 0.0;
};

// Statement similarity. Same-kind atomic statements compare by normalized
// token edit distance; a statement composed of child statements averages the
// best similarity of each of its children against the other side's children.
inline double similarity(const AstNode& a, const AstNode& b) {
  if (a.kind != b.kind) return 0.0;
  auto ca = child_statements(a);
  auto cb = child_statements(b);
  if (ca.empty() && cb.empty()) {
    TokenSequence ta = tokenize_node(a);
    TokenSequence tb = tokenize_node(b);
    std::size_t m = std::max(ta.size(), tb.size());
    if (m == 0) return 1.0;
    double s =
        1.0 - static_cast<double>(token_edit_distance(ta, tb)) /
                  static_cast<double>(m);
    return std::clamp(s, 0.0, 1.0);
  }
  if (ca.empty()) return 0.0;
  double sum = 0.0;
  for (const AstNode* c1 : ca) {
    double best = 0.0;
    for (const AstNode* c2 : cb) best = std::max(best, similarity(*c1, *c2));
    sum += best;
  }
  return sum / static_cast<double>(ca.size());
}

namespace detail {

inline void match_node(const AstNode* a, const AstNode* b,
                       std::vector<std::pair<const AstNode*, const AstNode*>>&
                           mapping) {
  if (a->kind != b->kind) return;
  mapping.emplace_back(a, b);
  for (const AstNode* ca : child_statements(*a))
    for (const AstNode* cb : child_statements(*b)) match_node(ca, cb, mapping);
}

}  // namespace detail

// Greedy statement matching: collect every same-kind candidate pair reachable
// through the Cartesian product of child statements, sort by similarity, and
// keep each node in at most one pair. Equal similarities are broken by the
// smaller preorder-index gap, then the smaller buggy index, then the smaller
// patched index.
inline std::vector<MatchPair> match_trees(const AstNode& buggy,
                                          const AstNode& patched) {
  std::vector<std::pair<const AstNode*, const AstNode*>> mapping;
  detail::match_node(&buggy, &patched, mapping);

  std::vector<MatchPair> scored;
  scored.reserve(mapping.size());
  for (auto& [a, b] : mapping) scored.push_back({a, b, similarity(*a, *b)});

  std::stable_sort(scored.begin(), scored.end(),
                   [](const MatchPair& x, const MatchPair& y) {
                     if (x.similarity != y.similarity)
                       return x.similarity > y.similarity;
                     auto gap = [](const MatchPair& p) {
                       auto i = p.buggy->preorder_index;
                       auto j = p.patched->preorder_index;
                       return i > j ? i - j : j - i;
                     };
                     if (gap(x) != gap(y)) return gap(x) < gap(y);
                     if (x.buggy->preorder_index != y.buggy->preorder_index)
                       return x.buggy->preorder_index < y.buggy->preorder_index;
                     return x.patched->preorder_index <
                            y.patched->preorder_index;
                   });

  std::set<const AstNode*> used;
  std::vector<MatchPair> retained;
  for (const MatchPair& p : scored) {
    if (p.buggy == &buggy && p.patched == &patched) continue;  // root pair
    if (used.count(p.buggy) || used.count(p.patched)) continue;
    used.insert(p.buggy);
    used.insert(p.patched);
    retained.push_back(p);
  }
  std::sort(retained.begin(), retained.end(),
            [](const MatchPair& x, const MatchPair& y) {
              return x.buggy->preorder_index < y.buggy->preorder_index;
            });
  return retained;
}

enum class ModOp { Update, Insert, Delete };

// One statement-granularity modification. Paths are child-index paths in the
// buggy function body. For Insert, `parent` addresses the container (a Block,
// or a SwitchCase for case bodies) and `index` is the patched-side statement
// position inside it.
struct Modification {
  ModOp op = ModOp::Update;
  NodePath target;        // Update/Delete: the buggy statement
  NodePath parent;        // Insert: the container node
  int index = 0;          // Insert: statement index within the container
  AstNode payload;        // Update: replacement; Insert: new statement
  std::size_t complexity = 1;

  bool is_abstractable() const { return op != ModOp::Delete; }
};

struct EditScript {
  std::vector<Modification> modifications;
};

namespace detail {

struct Slot {
  const AstNode* container;            // Block or SwitchCase
  std::size_t stmt_base;               // raw child index of first statement
  std::vector<const AstNode*> stmts;
};

inline std::vector<Slot> statement_slots(const AstNode& n) {
  std::vector<Slot> out;
  auto add_block = [&out](const AstNode& blk) {
    Slot s{&blk, 0, {}};
    for (const auto& c : blk.children)
      if (is_statement(c.kind)) s.stmts.push_back(&c);
    out.push_back(std::move(s));
  };
  switch (n.kind) {
    case NodeKind::Block:
      add_block(n);
      break;
    case NodeKind::IfStatement:
      for (std::size_t i = 1; i < n.children.size(); ++i)
        add_block(n.children[i]);
      break;
    case NodeKind::WhileStatement:
    case NodeKind::DoStatement:
      add_block(n.children[1]);
      break;
    case NodeKind::ForStatement:
      add_block(n.children[3]);
      break;
    case NodeKind::SwitchStatement:
      for (std::size_t i = 1; i < n.children.size(); ++i) {
        const AstNode& sc = n.children[i];
        Slot s{&sc, 1, {}};
        for (std::size_t j = 1; j < sc.children.size(); ++j)
          if (is_statement(sc.children[j].kind))
            s.stmts.push_back(&sc.children[j]);
        out.push_back(std::move(s));
      }
      break;
    default:
      break;
  }
  return out;
}

// The statement with its nested statement lists emptied; two matched
// statements with equal signatures differ at most in those lists.
inline void strip_slot_statements(AstNode& n) {
  switch (n.kind) {
    case NodeKind::Block:
      n.children.clear();
      break;
    case NodeKind::IfStatement:
      for (std::size_t i = 1; i < n.children.size(); ++i)
        n.children[i].children.clear();
      break;
    case NodeKind::WhileStatement:
    case NodeKind::DoStatement:
      n.children[1].children.clear();
      break;
    case NodeKind::ForStatement:
      n.children[3].children.clear();
      break;
    case NodeKind::SwitchStatement:
      for (std::size_t i = 1; i < n.children.size(); ++i) {
        AstNode& sc = n.children[i];
        sc.children.resize(1);
      }
      break;
    default:
      break;
  }
}

inline std::string local_signature(const AstNode& n) {
  AstNode copy = n;
  strip_slot_statements(copy);
  return pretty_print(copy);
}

// Longest strictly increasing subsequence of pair.second over pairs sorted by
// pair.first; earliest-predecessor tie-breaking keeps it deterministic.
inline std::vector<std::size_t> lis_indices(
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  const std::size_t n = pairs.size();
  std::vector<std::size_t> len(n, 1), prev(n, SIZE_MAX);
  std::size_t best = 0, best_i = n == 0 ? SIZE_MAX : 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (pairs[j].second < pairs[i].second && len[j] + 1 > len[i]) {
        len[i] = len[j] + 1;
        prev[i] = j;
      }
    }
    if (len[i] > best) {
      best = len[i];
      best_i = i;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = best_i; i != SIZE_MAX; i = prev[i]) out.push_back(i);
  std::reverse(out.begin(), out.end());
  return out;
}

class Extractor {
 public:
  Extractor(const AstNode& buggy, const AstNode& patched,
            const std::vector<MatchPair>& matches)
      : buggy_(buggy) {
    std::set<const AstNode*> in_buggy, in_patched;
    collect(buggy, in_buggy);
    collect(patched, in_patched);
    for (const MatchPair& p : matches) {
      if (!in_buggy.count(p.buggy) || !in_patched.count(p.patched))
        throw InconsistentMatch(
            "match pair references a node outside the given trees");
      b2p_[p.buggy] = p.patched;
    }
  }

  std::vector<Modification> run(const AstNode& patched) {
    std::vector<Modification> mods;
    reconcile(buggy_, patched, mods);
    std::sort(mods.begin(), mods.end(), [](const Modification& x,
                                           const Modification& y) {
      return doc_key(x) < doc_key(y);
    });
    return mods;
  }

 private:
  const AstNode& buggy_;
  std::map<const AstNode*, const AstNode*> b2p_;

  static void collect(const AstNode& n, std::set<const AstNode*>& out) {
    out.insert(&n);
    for (const auto& c : n.children) collect(c, out);
  }

  static std::pair<NodePath, std::pair<int, int>> doc_key(
      const Modification& m) {
    if (m.op == ModOp::Insert) {
      NodePath p = m.parent;
      return {std::move(p), {m.index, 1}};
    }
    NodePath p = m.target;
    int last = p.empty() ? 0 : p.back();
    if (!p.empty()) p.pop_back();
    return {std::move(p), {last, 0}};
  }

  NodePath path_of(const AstNode* n) const {
    NodePath p;
    if (!find_path(buggy_, n, p))
      throw InconsistentMatch("anchor node is not part of the buggy tree");
    return p;
  }

  void emit_update(const AstNode& a, const AstNode& b,
                   std::vector<Modification>& mods) {
    Modification m;
    m.op = ModOp::Update;
    m.target = path_of(&a);
    m.payload = b;
    m.complexity = node_count(b);
    mods.push_back(std::move(m));
  }

  void emit_insert(const AstNode* container, int index, const AstNode& b,
                   std::vector<Modification>& mods) {
    Modification m;
    m.op = ModOp::Insert;
    m.parent = path_of(container);
    m.index = index;
    m.payload = b;
    m.complexity = node_count(b);
    mods.push_back(std::move(m));
  }

  void emit_delete(const AstNode& a, std::vector<Modification>& mods) {
    Modification m;
    m.op = ModOp::Delete;
    m.target = path_of(&a);
    m.complexity = 1;
    mods.push_back(std::move(m));
  }

  void reconcile(const AstNode& a, const AstNode& b,
                 std::vector<Modification>& mods) {
    if (pretty_print(a) == pretty_print(b)) return;
    std::vector<Slot> sa = statement_slots(a);
    std::vector<Slot> sb = statement_slots(b);
    if (sa.empty() || sa.size() != sb.size() ||
        local_signature(a) != local_signature(b)) {
      emit_update(a, b, mods);
      return;
    }
    for (std::size_t s = 0; s < sa.size(); ++s)
      reconcile_slot(sa[s], sb[s], mods);
  }

  void reconcile_slot(const Slot& sa, const Slot& sb,
                      std::vector<Modification>& mods) {
    // matched pairs connecting this buggy slot to this patched slot
    std::map<const AstNode*, std::size_t> b_pos;
    for (std::size_t i = 0; i < sb.stmts.size(); ++i) b_pos[sb.stmts[i]] = i;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t j = 0; j < sa.stmts.size(); ++j) {
      auto it = b2p_.find(sa.stmts[j]);
      if (it == b2p_.end()) continue;
      auto pos = b_pos.find(it->second);
      if (pos == b_pos.end()) continue;
      pairs.emplace_back(j, pos->second);
    }
    // crossing matches reduce to delete + insert; keep a longest in-order run
    std::vector<std::size_t> keep = lis_indices(pairs);
    std::set<std::size_t> kept_a, kept_b;
    for (std::size_t k : keep) {
      kept_a.insert(pairs[k].first);
      kept_b.insert(pairs[k].second);
    }
    for (std::size_t k : keep)
      reconcile(*sa.stmts[pairs[k].first], *sb.stmts[pairs[k].second], mods);
    for (std::size_t j = 0; j < sa.stmts.size(); ++j)
      if (!kept_a.count(j)) emit_delete(*sa.stmts[j], mods);
    for (std::size_t i = 0; i < sb.stmts.size(); ++i)
      if (!kept_b.count(i))
        emit_insert(sa.container, static_cast<int>(i), *sb.stmts[i], mods);
  }
};

}  // namespace detail

// Extracts the minimal Update/Insert/Delete set whose application transforms
// the buggy body into the patched body. `matches` must come from match_trees
// on the same pair of trees.
inline EditScript extract_modifications(const AstNode& buggy,
                                        const AstNode& patched,
                                        const std::vector<MatchPair>& matches) {
  detail::Extractor ex(buggy, patched, matches);
  EditScript script;
  script.modifications = ex.run(patched);
  return script;
}

namespace detail {

struct OpsIndex {
  std::map<NodePath, const Modification*> replace_or_delete;
  std::map<NodePath, std::vector<const Modification*>> inserts;
};

inline AstNode rebuild(const AstNode& n, NodePath& path, const OpsIndex& ops) {
  AstNode out = n;
  out.children.clear();
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    path.push_back(static_cast<int>(i));
    auto it = ops.replace_or_delete.find(path);
    if (it != ops.replace_or_delete.end()) {
      if (it->second->op == ModOp::Update)
        out.children.push_back(it->second->payload);
      // deletes drop the child
    } else {
      out.children.push_back(rebuild(n.children[i], path, ops));
    }
    path.pop_back();
  }
  auto ins = ops.inserts.find(path);
  if (ins != ops.inserts.end()) {
    std::size_t base = n.kind == NodeKind::SwitchCase ? 1 : 0;
    for (const Modification* m : ins->second) {
      std::size_t pos = std::min(out.children.size(),
                                 base + static_cast<std::size_t>(m->index));
      out.children.insert(out.children.begin() + static_cast<long>(pos),
                          m->payload);
    }
  }
  return out;
}

}  // namespace detail

// Applies a script (or any subset of one) to a buggy function body and
// returns the new tree; the input tree is unchanged.
inline AstNode apply_edit_script(const AstNode& buggy,
                                 const EditScript& script) {
  detail::OpsIndex ops;
  for (const Modification& m : script.modifications) {
    if (m.op == ModOp::Insert) {
      const AstNode* container = node_at(buggy, m.parent);
      if (!container || (container->kind != NodeKind::Block &&
                         container->kind != NodeKind::SwitchCase))
        throw AnchorNotFound("insert parent not found");
      ops.inserts[m.parent].push_back(&m);
    } else {
      const AstNode* target = node_at(buggy, m.target);
      if (!target || !is_statement(target->kind))
        throw AnchorNotFound("target statement not found");
      ops.replace_or_delete[m.target] = &m;
    }
  }
  for (auto& [path, list] : ops.inserts)
    std::sort(list.begin(), list.end(),
              [](const Modification* a, const Modification* b) {
                return a->index < b->index;
              });
  NodePath path;
  AstNode result = detail::rebuild(buggy, path, ops);
  std::size_t next = 0;
  assign_preorder(result, next);
  return result;
}

inline nlohmann::json to_json(const EditScript& script) {
  nlohmann::json mods = nlohmann::json::array();
  for (const Modification& m : script.modifications) {
    nlohmann::json j;
    switch (m.op) {
      case ModOp::Update:
        j["op"] = "update";
        j["anchor_path"] = m.target;
        j["code"] = pretty_print(m.payload);
        break;
      case ModOp::Insert:
        j["op"] = "insert";
        j["anchor_path"] = m.parent;
        j["code"] = pretty_print(m.payload);
        j["index"] = m.index;
        break;
      case ModOp::Delete:
        j["op"] = "delete";
        j["anchor_path"] = m.target;
        break;
    }
    mods.push_back(std::move(j));
  }
  return nlohmann::json{{"modifications", std::move(mods)}};
}

}  // namespace skelfix
