#include <doctest.h>

#include "skelfix/instantiation.hpp"

using namespace skelfix;

namespace {

const char* kBoxSource =
    "class Box {"
    "  int size;"
    "  int cap;"
    "  boolean open;"
    "  boolean sealed;"
    "  int grow(int amount, int other) {"
    "    int next = size + amount;"
    "    return next;"
    "  }"
    "  boolean fits(int amount) { return amount < cap; }"
    "  int pad(int amount) { return amount + 1; }"
    "}";

struct Setup {
  SourceUnit unit;
  SymbolTable table;
  const AstNode* body;

  explicit Setup(const std::string& fn = "grow")
      : unit(parse_unit(kBoxSource)),
        table(collect_scope(unit, fn, {})),
        body(method_body(*find_method(unit, fn))) {}

  InstantiationContext ctx(const std::string& guide_text) const {
    InstantiationContext c;
    c.site = body->span.end - 1;
    TokenSequence bt = tokenize_node(*body);
    c.buggy_tokens.insert(bt.begin(), bt.end());
    SourceUnit gu = parse_function(guide_text);
    TokenSequence gt =
        tokenize_node(*method_body(*gu.classes[0].children.data()));
    c.guide_tokens.insert(gt.begin(), gt.end());
    return c;
  }
};

AstNode stmt_of(const std::string& text) {
  SourceUnit u = parse_function("void f() { " + text + " }");
  return method_body(*find_method(u, "f"))->children[0];
}

Skeleton skeleton_of(const std::string& text) {
  Modification m;
  m.op = ModOp::Insert;
  m.payload = stmt_of(text);
  m.complexity = node_count(m.payload);
  return abstract_modification(m);
}

}  // namespace

TEST_CASE("zero-hole skeleton yields exactly the original statement") {
  Setup s;
  Skeleton sk = skeleton_of("break;");
  // break needs a loop; the site checker is permissive there
  auto list = instantiate_skeleton(sk, s.table, s.ctx("void g() { break; }"));
  REQUIRE(list.size() == 1);
  CHECK(pretty_print(list[0].stmt) == "break;");
  CHECK(list[0].identity);
}

TEST_CASE("boolean hole enumerates the two boolean fields") {
  Setup s;
  Skeleton sk = skeleton_of("assert open;");
  auto list = instantiate_skeleton(sk, s.table,
                                   s.ctx("void g() { assert open; }"));
  REQUIRE(list.size() == 2);
  CHECK(pretty_print(list[0].stmt) == "assert open;");  // origin first
  CHECK(pretty_print(list[1].stmt) == "assert sealed;");
}

TEST_CASE("cap truncates the instantiation list") {
  Setup s;
  Skeleton sk = skeleton_of("size = size + size;");
  auto all = instantiate_skeleton(sk, s.table, s.ctx("void g() { }"), 500);
  CHECK(all.size() > 5);  // several int variables in scope, three holes
  auto capped = instantiate_skeleton(sk, s.table, s.ctx("void g() { }"), 5);
  CHECK(capped.size() == 5);
}

TEST_CASE("every instantiation satisfies its constraints") {
  Setup s;
  Skeleton sk = skeleton_of("assert open;");
  for (auto& inst :
       instantiate_skeleton(sk, s.table, s.ctx("void g() { }"))) {
    for (auto& [hole_id, token] : inst.tokens) {
      bool found = false;
      for (auto& v : visible_variables(s.ctx("void g() { }").site,
                                       sk.holes[0].constraint, s.table))
        found = found || v.name == token;
      CHECK(found);
    }
  }
}

TEST_CASE("unsatisfiable hole reports NoFilling") {
  Setup s;
  // no variable of a class type is in scope, and 'mystery' names nothing
  Skeleton sk = skeleton_of("mystery.run();");
  CHECK_THROWS_AS(
      instantiate_skeleton(sk, s.table, s.ctx("void g() { }")),
      NoFilling);
}

TEST_CASE("distance ordering after the common tier") {
  Setup s;
  Skeleton sk = skeleton_of("size = size + size;");
  auto list = instantiate_skeleton(sk, s.table, s.ctx("void g() { }"));
  bool in_tail = false;
  std::size_t last = 0;
  for (auto& inst : list) {
    if (inst.identity) continue;
    if (!inst.all_common) in_tail = true;
    if (in_tail) {
      CHECK(inst.distance >= last);
      last = inst.distance;
    } else {
      last = inst.distance;
    }
  }
}

TEST_CASE("subset selection") {
  auto script_of = [](std::vector<std::size_t> complexities) {
    EditScript s;
    for (std::size_t c : complexities) {
      Modification m;
      m.op = ModOp::Delete;
      m.complexity = c;
      s.modifications.push_back(m);
    }
    return s;
  };

  auto one = select_modification_subsets(script_of({4}));
  REQUIRE(one.size() == 1);
  CHECK(one[0] == std::vector<std::size_t>{0});

  auto two = select_modification_subsets(script_of({2, 7}));
  REQUIRE(two.size() == 3);
  CHECK(two[0] == std::vector<std::size_t>{0, 1});  // full script first
  CHECK(two[1] == std::vector<std::size_t>{1});     // bigger single next
  CHECK(two[2] == std::vector<std::size_t>{0});

  auto five = select_modification_subsets(script_of({1, 2, 3, 4, 5}));
  for (auto& s : five) CHECK(s.size() <= 3);
  std::set<std::vector<std::size_t>> uniq(five.begin(), five.end());
  CHECK(uniq.size() == five.size());
  CHECK(five.size() == 5 + 10 + 10);
}

namespace {

struct Run {
  SourceUnit buggy_unit;
  SourceUnit guide_unit;
  std::vector<CandidatePatch> candidates;
};

Run run_generation(const std::string& buggy_fn_text,
                   const std::string& guide_fn_text,
                   const std::string& fn_name,
                   std::size_t /*unused*/ = 0) {
  Run r;
  std::string unit_text = std::string(kBoxSource);
  // swap in the buggy function text
  SourceUnit base = parse_unit(kBoxSource);
  r.buggy_unit = parse_unit(unit_text);
  // rebuild the unit with the replacement function text
  std::string rebuilt = "class Box {"
                        "  int size;"
                        "  int cap;"
                        "  boolean open;"
                        "  boolean sealed;" +
                        buggy_fn_text +
                        "  boolean fits(int amount) { return amount < cap; }"
                        "  int pad(int amount) { return amount + 1; }"
                        "}";
  r.buggy_unit = parse_unit(rebuilt);
  r.guide_unit = parse_function(guide_fn_text);

  const AstNode* buggy_body =
      method_body(*find_method(r.buggy_unit, fn_name));
  const AstNode* guide_body =
      method_body(*find_method(r.guide_unit, fn_name));
  REQUIRE(buggy_body);
  REQUIRE(guide_body);

  SymbolTable table = collect_scope(r.buggy_unit, fn_name, {});
  EditScript script =
      extract_modifications(*buggy_body, *guide_body,
                            match_trees(*buggy_body, *guide_body));
  std::vector<std::optional<Skeleton>> skeletons;
  for (auto& m : script.modifications) {
    if (m.is_abstractable())
      skeletons.push_back(abstract_modification(m));
    else
      skeletons.push_back(std::nullopt);
  }

  GenerationInput in;
  in.buggy_unit = &r.buggy_unit;
  in.function = fn_name;
  in.buggy_body = buggy_body;
  in.guide_id = 1;
  in.guide_body = guide_body;
  generate_candidates(script, skeletons, table, in,
                      [&r](CandidatePatch&& c) {
                        r.candidates.push_back(std::move(c));
                        return r.candidates.size() < 2000;
                      });
  return r;
}

}  // namespace

TEST_CASE("single delete modification yields one candidate") {
  Run r = run_generation(
      "int grow(int amount, int other) {"
      "  size = size + amount;"
      "  size = size + 1;"
      "  return size;"
      "}",
      "int grow(int amount, int other) {"
      "  size = size + amount;"
      "  return size;"
      "}",
      "grow");
  REQUIRE(r.candidates.size() == 1);
  CHECK(pretty_print(r.candidates[0].patched_body) ==
        "{ size = size + amount; return size; }");
}

TEST_CASE("guide body appears first when it type checks") {
  Run r = run_generation(
      "int grow(int amount, int other) {"
      "  return amount;"
      "}",
      "int grow(int amount, int other) {"
      "  return other;"
      "}",
      "grow");
  REQUIRE(!r.candidates.empty());
  CHECK(pretty_print(r.candidates[0].patched_body) == "{ return other; }");
  // the buggy body itself is never a candidate
  for (auto& c : r.candidates)
    CHECK(pretty_print(c.patched_body) != "{ return amount; }");
}

TEST_CASE("candidates are unique and well typed") {
  Run r = run_generation(
      "int grow(int amount, int other) {"
      "  return amount;"
      "}",
      "int grow(int amount, int other) {"
      "  if (open) { return cap; }"
      "  return other;"
      "}",
      "grow");
  std::set<std::string> texts;
  for (auto& c : r.candidates) {
    CHECK(texts.insert(pretty_print(c.patched_body)).second);
    CHECK(c.applied_modifications.size() <= 3);
    std::string whole =
        unit_with_body(r.buggy_unit, "grow", c.patched_body);
    CHECK(check_unit_text(whole, "grow", {}).empty());
  }
  CHECK(r.candidates.size() > 3);
}

TEST_CASE("generation order is stable") {
  auto once = [] {
    Run r = run_generation(
        "int grow(int amount, int other) {"
        "  return amount;"
        "}",
        "int grow(int amount, int other) {"
        "  if (open) { return cap; }"
        "  return other;"
        "}",
        "grow");
    std::vector<std::string> texts;
    for (auto& c : r.candidates)
      texts.push_back(pretty_print(c.patched_body));
    return texts;
  };
  CHECK(once() == once());
}

TEST_CASE("candidate json carries provenance") {
  Run r = run_generation(
      "int grow(int amount, int other) { return amount; }",
      "int grow(int amount, int other) { return other; }", "grow");
  REQUIRE(!r.candidates.empty());
  nlohmann::json j = to_json(r.candidates[0]);
  CHECK(j.contains("guide_id"));
  CHECK(j.contains("subset"));
  CHECK(j.contains("distance_to_guide"));
  CHECK(j.contains("fillings"));
  CHECK(j.contains("body"));
}
