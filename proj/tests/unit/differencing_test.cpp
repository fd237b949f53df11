#include <doctest.h>

#include <random>

#include "skelfix/differencing.hpp"
#include "skelfix/parse.hpp"
#include "skelfix/print.hpp"
#include "../support/mutate.hpp"
#include "../support/oracle.hpp"

using namespace skelfix;

namespace {

struct Fn {
  SourceUnit unit;
  const AstNode* body;
};

Fn fn(const std::string& body_text) {
  Fn f;
  f.unit = parse_function("void f() { " + body_text + " }");
  f.body = method_body(*find_method(f.unit, "f"));
  return f;
}

EditScript diff(const AstNode& buggy, const AstNode& patched) {
  return extract_modifications(buggy, patched, match_trees(buggy, patched));
}

}  // namespace

TEST_CASE("token edit distance") {
  using T = TokenSequence;
  CHECK(token_edit_distance(T{"a", "=", "b", "+", "c", ";"},
                            T{"a", "=", "b", "-", "c", ";"}) == 1);
  T s{"x", "(", "y", ")", ";"};
  CHECK(token_edit_distance(s, s) == 0);
  CHECK(token_edit_distance(T{}, T{"x", ";"}) == 2);
  CHECK(token_edit_distance(T{"x", ";"}, T{}) == 2);
  T a{"if", "(", "a", ")", "{", "}"};
  T b{"while", "(", "a", ")", "{", "x", ";", "}"};
  CHECK(token_edit_distance(a, b) == token_edit_distance(b, a));
}

TEST_CASE("similarity of atomic statements") {
  Fn a = fn("a = b + c;");
  Fn b = fn("a = b - c;");
  const AstNode& sa = a.body->children[0];
  const AstNode& sb = b.body->children[0];
  CHECK(similarity(sa, sa) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(similarity(sa, sb) == doctest::Approx(1.0 - 1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("similarity of ensembled statements") {
  Fn a = fn("if (x > 0) { y = 1; }");
  Fn b = fn("if (x < 0) { y = 1; }");
  const AstNode& sa = a.body->children[0];
  const AstNode& sb = b.body->children[0];
  // bodies contain one identical statement each
  CHECK(similarity(sa, sb) == doctest::Approx(1.0).epsilon(1e-12));

  Fn c = fn("while (x > 0) { y = 1; }");
  CHECK(similarity(sa, c.body->children[0]) == 0.0);  // kind mismatch
}

TEST_CASE("similarity bounds over mixed statements") {
  const char* texts[] = {"a = 1;", "if (c) { a = 1; }", "return a;",
                         "while (c) { f(); }", "throw e;"};
  std::vector<Fn> fns;
  for (const char* t : texts) fns.push_back(fn(t));
  for (auto& x : fns) {
    for (auto& y : fns) {
      double s = similarity(x.body->children[0], y.body->children[0]);
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
    CHECK(similarity(x.body->children[0], x.body->children[0]) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("match_trees on identical bodies") {
  Fn a = fn("x = 1; if (c) { y = 2; } return x;");
  Fn b = fn("x = 1; if (c) { y = 2; } return x;");
  auto matches = match_trees(*a.body, *b.body);
  // 3 top-level statements plus the nested one
  CHECK(matches.size() == 4);
  for (auto& m : matches) {
    CHECK(m.similarity == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.buggy->kind == m.patched->kind);
    CHECK(pretty_print(*m.buggy) == pretty_print(*m.patched));
  }
}

TEST_CASE("match_trees keeps the best pair only") {
  Fn a = fn("x = 1;");
  Fn b = fn("x = 1; y = 2;");
  auto matches = match_trees(*a.body, *b.body);
  REQUIRE(matches.size() == 1);
  CHECK(pretty_print(*matches[0].patched) == "x = 1;");
  CHECK(matches[0].similarity == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("match_trees with no same-kind statements") {
  Fn a = fn("return x;");
  Fn b = fn("if (c) { y = 1; }");
  CHECK(match_trees(*a.body, *b.body).empty());
}

TEST_CASE("match uniqueness") {
  Fn a = fn("x = 1; x = 2; x = 3;");
  Fn b = fn("x = 2; x = 1;");
  auto matches = match_trees(*a.body, *b.body);
  std::set<const AstNode*> seen;
  for (auto& m : matches) {
    CHECK(!seen.count(m.buggy));
    CHECK(!seen.count(m.patched));
    seen.insert(m.buggy);
    seen.insert(m.patched);
  }
}

TEST_CASE("extract: identical trees give an empty script") {
  Fn a = fn("x = 1; return x;");
  Fn b = fn("x = 1; return x;");
  CHECK(diff(*a.body, *b.body).modifications.empty());
}

TEST_CASE("extract: update") {
  Fn a = fn("x = compute(y); return x;");
  Fn b = fn("x = compute(z); return x;");
  EditScript s = diff(*a.body, *b.body);
  REQUIRE(s.modifications.size() == 1);
  CHECK(s.modifications[0].op == ModOp::Update);
  CHECK(pretty_print(s.modifications[0].payload) == "x = compute(z);");
  CHECK(apply_edit_script(*a.body, s) == *b.body);
}

TEST_CASE("extract: wrap in if becomes insert plus delete") {
  Fn a = fn("x = compute(y);");
  Fn b = fn("if (y > 0) { x = compute(y); }");
  EditScript s = diff(*a.body, *b.body);
  REQUIRE(s.modifications.size() == 2);
  bool saw_insert = false, saw_delete = false;
  for (auto& m : s.modifications) {
    if (m.op == ModOp::Insert) {
      saw_insert = true;
      CHECK(m.payload.kind == NodeKind::IfStatement);
    }
    if (m.op == ModOp::Delete) saw_delete = true;
  }
  CHECK(saw_insert);
  CHECK(saw_delete);
  CHECK(apply_edit_script(*a.body, s) == *b.body);
}

TEST_CASE("extract: whole loop deletion") {
  Fn a = fn(
      "pos = startPos + width;"
      "while (pos <= len) { pos++; }"
      "return pos;");
  Fn b = fn(
      "pos = startPos + width;"
      "return pos;");
  EditScript s = diff(*a.body, *b.body);
  REQUIRE(s.modifications.size() == 1);
  CHECK(s.modifications[0].op == ModOp::Delete);
  const AstNode* target = node_at(*a.body, s.modifications[0].target);
  REQUIRE(target != nullptr);
  CHECK(target->kind == NodeKind::WhileStatement);
  CHECK(apply_edit_script(*a.body, s) == *b.body);
}

TEST_CASE("extract: insert index composition") {
  Fn a = fn("m();");
  Fn b = fn("a(); b(); m(); c();");
  EditScript s = diff(*a.body, *b.body);
  CHECK(s.modifications.size() == 3);
  for (auto& m : s.modifications) CHECK(m.op == ModOp::Insert);
  CHECK(apply_edit_script(*a.body, s) == *b.body);
}

TEST_CASE("extract: signature change updates the whole statement") {
  Fn a = fn("if (c) { x = 1; }");
  Fn b = fn("if (d) { x = 1; }");
  EditScript s = diff(*a.body, *b.body);
  REQUIRE(s.modifications.size() == 1);
  CHECK(s.modifications[0].op == ModOp::Update);
  CHECK(s.modifications[0].payload.kind == NodeKind::IfStatement);
  CHECK(apply_edit_script(*a.body, s) == *b.body);
}

TEST_CASE("extract: change inside matching if recurses") {
  Fn a = fn("if (c) { x = 1; y = 2; }");
  Fn b = fn("if (c) { x = 1; y = 3; }");
  EditScript s = diff(*a.body, *b.body);
  REQUIRE(s.modifications.size() == 1);
  CHECK(s.modifications[0].op == ModOp::Update);
  CHECK(pretty_print(s.modifications[0].payload) == "y = 3;");
  CHECK(apply_edit_script(*a.body, s) == *b.body);
}

TEST_CASE("extract: reordered statements round-trip") {
  Fn a = fn("a(); b();");
  Fn b = fn("b(); a();");
  EditScript s = diff(*a.body, *b.body);
  CHECK(apply_edit_script(*a.body, s) == *b.body);
}

TEST_CASE("extract: else branch added") {
  Fn a = fn("if (c) { x = 1; }");
  Fn b = fn("if (c) { x = 1; } else { x = 2; }");
  EditScript s = diff(*a.body, *b.body);
  CHECK(apply_edit_script(*a.body, s) == *b.body);
}

TEST_CASE("extract rejects foreign matches") {
  Fn a = fn("x = 1;");
  Fn b = fn("x = 2;");
  Fn c = fn("x = 3;");
  std::vector<MatchPair> bogus{
      {&c.body->children[0], &b.body->children[0], 1.0}};
  CHECK_THROWS_AS(extract_modifications(*a.body, *b.body, bogus),
                  InconsistentMatch);
}

TEST_CASE("apply: empty script copies") {
  Fn a = fn("x = 1; if (c) { y = 2; }");
  EditScript empty;
  CHECK(apply_edit_script(*a.body, empty) == *a.body);
}

TEST_CASE("apply: missing anchor") {
  Fn a = fn("x = 1;");
  Modification m;
  m.op = ModOp::Delete;
  m.target = {9};
  EditScript s;
  s.modifications.push_back(m);
  CHECK_THROWS_AS(apply_edit_script(*a.body, s), AnchorNotFound);
}

TEST_CASE("apply: delete subset") {
  Fn a = fn("x = 1; y = 2;");
  Fn b = fn("y = 3;");
  EditScript s = diff(*a.body, *b.body);
  EditScript subset;
  for (auto& m : s.modifications)
    if (m.op == ModOp::Delete) subset.modifications.push_back(m);
  REQUIRE(subset.modifications.size() == 1);
  AstNode out = apply_edit_script(*a.body, subset);
  CHECK(pretty_print(out) == "{ y = 2; }");
}

TEST_CASE("subset closure: every subset applies and reparses") {
  Fn a = fn("x = 1; if (c) { y = 2; } while (d) { z(); } return x;");
  Fn b = fn("x = 0; if (c) { y = 2; w(); } return y;");
  EditScript s = diff(*a.body, *b.body);
  std::size_t n = s.modifications.size();
  REQUIRE(n >= 2);
  REQUIRE(n <= 16);
  for (std::size_t mask = 0; mask < (1u << n); ++mask) {
    EditScript subset;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) subset.modifications.push_back(s.modifications[i]);
    AstNode out = apply_edit_script(*a.body, subset);
    std::string text = "void f() " + pretty_print(out);
    CHECK_NOTHROW(parse_function(text));
  }
}

TEST_CASE("determinism of match and extract") {
  Fn a = fn("x = 1; x = 2; if (c) { x = 3; } return x;");
  Fn b = fn("x = 2; if (c) { x = 4; } x = 1; return y;");
  auto m1 = match_trees(*a.body, *b.body);
  auto m2 = match_trees(*a.body, *b.body);
  REQUIRE(m1.size() == m2.size());
  for (std::size_t i = 0; i < m1.size(); ++i) {
    CHECK(m1[i].buggy == m2[i].buggy);
    CHECK(m1[i].patched == m2[i].patched);
  }
  EditScript s1 = diff(*a.body, *b.body);
  EditScript s2 = diff(*a.body, *b.body);
  CHECK(to_json(s1) == to_json(s2));
}

TEST_CASE("edit script serializes to json") {
  Fn a = fn("x = 1;");
  Fn b = fn("x = 2; y = 3;");
  EditScript s = diff(*a.body, *b.body);
  nlohmann::json j = to_json(s);
  REQUIRE(j.contains("modifications"));
  for (auto& m : j["modifications"]) {
    CHECK(m.contains("op"));
    CHECK(m.contains("anchor_path"));
    if (m["op"] == "insert") CHECK(m.contains("index"));
    if (m["op"] != "delete") CHECK(m.contains("code"));
  }
}

TEST_CASE("randomized mutation round trip") {
  std::mt19937 rng(20240817);
  Fn base = fn(
      "int acc = 0;"
      "for (int i = 0; i < n; ++i) { acc = acc + i; }"
      "if (acc > limit) { acc = limit; warn(); }"
      "while (acc > 0) { acc = acc - step; }"
      "return acc;");
  for (int iter = 0; iter < 40; ++iter) {
    AstNode mutated = testgen::mutate_body(*base.body, rng);
    CAPTURE(iter);
    CAPTURE(pretty_print(mutated));
    EditScript s = diff(*base.body, mutated);
    AstNode out = apply_edit_script(*base.body, s);
    CHECK(out == mutated);
  }
}

TEST_CASE("implementation matches the reference distance") {
  std::mt19937 rng(7);
  std::vector<std::string> alphabet{"a", "b", "c", "(", ")", ";",
                                    "+", "=", "0", "1"};
  for (int iter = 0; iter < 200; ++iter) {
    TokenSequence a, b;
    std::size_t la = rng() % 12, lb = rng() % 12;
    for (std::size_t i = 0; i < la; ++i)
      a.push_back(alphabet[rng() % alphabet.size()]);
    for (std::size_t i = 0; i < lb; ++i)
      b.push_back(alphabet[rng() % alphabet.size()]);
    CHECK(token_edit_distance(a, b) == oracle::levenshtein(a, b));
  }
}
