#pragma once

#include <cctype>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "skelfix/ast.hpp"

namespace skelfix {

struct ParseError : std::runtime_error {
  int line;
  int column;
  std::set<std::string> expected;

  ParseError(std::string msg, int line_, int column_,
             std::set<std::string> expected_ = {})
      : std::runtime_error(std::move(msg)),
        line(line_),
        column(column_),
        expected(std::move(expected_)) {}
};

enum class TokKind { Identifier, Keyword, Number, String, Char, Punct, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string text;
  std::size_t offset = 0;
  int line = 1;
  int column = 1;
};

namespace detail {

inline bool is_keyword(std::string_view s) {
  static const std::set<std::string_view> kw = {
      "package", "class",   "extends",  "public", "private", "protected",
      "static",  "final",   "if",       "else",   "while",   "do",
      "for",     "return",  "switch",   "case",   "default", "throw",
      "assert",  "new",     "this",     "super",  "true",    "false",
      "null",    "void",    "int",      "long",   "short",   "byte",
      "float",   "double",  "boolean",  "char",   "break",   "continue"};
  return kw.count(s) > 0;
}

inline bool is_primitive_type(std::string_view s) {
  return s == "int" || s == "long" || s == "short" || s == "byte" ||
         s == "float" || s == "double" || s == "boolean" || s == "char" ||
         s == "void";
}

}  // namespace detail

inline std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '*') {
      advance(2);
      while (i + 1 < src.size() && !(src[i] == '*' && src[i + 1] == '/'))
        advance(1);
      if (i + 1 >= src.size())
        throw ParseError("unterminated block comment", line, col);
      advance(2);
      continue;
    }
    Token t;
    t.offset = i;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) ||
              src[j] == '_' || src[j] == '$'))
        ++j;
      t.text = std::string(src.substr(i, j - i));
      t.kind = detail::is_keyword(t.text) ? TokKind::Keyword
                                          : TokKind::Identifier;
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isdigit(static_cast<unsigned char>(src[j])) ||
              src[j] == '.' || src[j] == 'e' || src[j] == 'E' ||
              src[j] == 'f' || src[j] == 'F' || src[j] == 'L' ||
              src[j] == 'd' || src[j] == 'D' || src[j] == 'x' ||
              src[j] == 'X' ||
              (j > i && (src[j] == '+' || src[j] == '-') &&
               (src[j - 1] == 'e' || src[j - 1] == 'E'))))
        ++j;
      t.text = std::string(src.substr(i, j - i));
      t.kind = TokKind::Number;
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '"') {
        if (src[j] == '\\') ++j;
        ++j;
      }
      if (j >= src.size()) throw ParseError("unterminated string", line, col);
      t.text = std::string(src.substr(i, j + 1 - i));
      t.kind = TokKind::String;
      advance(j + 1 - i);
      out.push_back(std::move(t));
      continue;
    }
    if (c == '\'') {
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '\'') {
        if (src[j] == '\\') ++j;
        ++j;
      }
      if (j >= src.size()) throw ParseError("unterminated char", line, col);
      t.text = std::string(src.substr(i, j + 1 - i));
      t.kind = TokKind::Char;
      advance(j + 1 - i);
      out.push_back(std::move(t));
      continue;
    }
    static const char* two_char[] = {"==", "!=", "<=", ">=", "&&",
                                     "||", "++", "--"};
    bool matched = false;
    for (const char* op : two_char) {
      if (src.substr(i, 2) == op) {
        t.text = op;
        t.kind = TokKind::Punct;
        advance(2);
        out.push_back(std::move(t));
        matched = true;
        break;
      }
    }
    if (matched) continue;
    static const std::string one_char = "+-*/%<>=!&|^~?:;,.(){}[]";
    if (one_char.find(c) != std::string::npos) {
      t.text = std::string(1, c);
      t.kind = TokKind::Punct;
      advance(1);
      out.push_back(std::move(t));
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line,
                     col);
  }
  Token end;
  end.kind = TokKind::End;
  end.offset = src.size();
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src), toks_(lex(src)) {}

  SourceUnit parse_unit() {
    SourceUnit unit;
    unit.raw_text = std::string(src_);
    if (at_kw("package")) {
      next();
      std::string name = expect_ident("package name");
      while (at_punct(".")) {
        next();
        name += "." + expect_ident("package segment");
      }
      expect_punct(";");
      unit.package_name = name;
    }
    while (!at_end()) unit.classes.push_back(parse_class());
    if (unit.classes.empty())
      err("expected a class declaration", {"class"});
    reindex_unit(unit);
    return unit;
  }

 private:
  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t n = 1) const {
    return toks_[std::min(pos_ + n, toks_.size() - 1)];
  }
  void next() { if (pos_ + 1 < toks_.size()) ++pos_; }
  bool at_end() const { return cur().kind == TokKind::End; }
  bool at_kw(std::string_view s) const {
    return cur().kind == TokKind::Keyword && cur().text == s;
  }
  bool at_punct(std::string_view s) const {
    return cur().kind == TokKind::Punct && cur().text == s;
  }
  bool at_ident() const { return cur().kind == TokKind::Identifier; }

  [[noreturn]] void err(const std::string& msg,
                        std::set<std::string> expected = {}) const {
    std::ostringstream os;
    os << msg << " at line " << cur().line << ", column " << cur().column
       << " (found '" << (cur().kind == TokKind::End ? "<eof>" : cur().text)
       << "')";
    throw ParseError(os.str(), cur().line, cur().column, std::move(expected));
  }

  std::string expect_ident(const std::string& what) {
    if (!at_ident()) err("expected " + what, {"identifier"});
    std::string s = cur().text;
    next();
    return s;
  }

  void expect_punct(const std::string& s) {
    if (!at_punct(s)) err("expected '" + s + "'", {s});
    next();
  }

  void expect_kw(const std::string& s) {
    if (!at_kw(s)) err("expected '" + s + "'", {s});
    next();
  }

  AstNode finish(AstNode n, std::size_t begin) {
    n.span.begin = begin;
    n.span.end = toks_[pos_ > 0 ? pos_ - 1 : 0].offset +
                 toks_[pos_ > 0 ? pos_ - 1 : 0].text.size();
    return n;
  }

  bool at_modifier() const {
    return at_kw("public") || at_kw("private") || at_kw("protected") ||
           at_kw("static") || at_kw("final");
  }

  std::vector<AstNode> parse_modifiers() {
    std::vector<AstNode> mods;
    while (at_modifier()) {
      AstNode m = make_node(NodeKind::Modifier, cur().text);
      m.span = {cur().offset, cur().offset + cur().text.size()};
      mods.push_back(std::move(m));
      next();
    }
    return mods;
  }

  bool at_type_start() const {
    return (cur().kind == TokKind::Keyword &&
            is_primitive_type(cur().text)) ||
           at_ident();
  }

  AstNode parse_type() {
    std::size_t begin = cur().offset;
    if (!at_type_start()) err("expected type", {"type"});
    std::string name = cur().text;
    next();
    while (at_punct("[") && peek().kind == TokKind::Punct &&
           peek().text == "]") {
      next();
      next();
      name += "[]";
    }
    return finish(make_node(NodeKind::TypeName, name), begin);
  }

  AstNode parse_class() {
    std::size_t begin = cur().offset;
    std::vector<AstNode> children = parse_modifiers();
    expect_kw("class");
    std::string name = expect_ident("class name");
    if (at_kw("extends")) {
      next();
      children.push_back(parse_type());
    }
    expect_punct("{");
    while (!at_punct("}")) children.push_back(parse_member(name));
    expect_punct("}");
    AstNode n = make_node(NodeKind::ClassDecl, name, std::move(children));
    return finish(std::move(n), begin);
  }

  AstNode parse_member(const std::string& class_name) {
    std::size_t begin = cur().offset;
    std::vector<AstNode> mods = parse_modifiers();
    // constructor: Name ( ... )
    if (at_ident() && cur().text == class_name && peek().kind == TokKind::Punct &&
        peek().text == "(") {
      std::string name = expect_ident("constructor name");
      std::vector<AstNode> children = std::move(mods);
      parse_params(children);
      children.push_back(parse_block());
      return finish(make_node(NodeKind::ConstructorDecl, name,
                              std::move(children)),
                    begin);
    }
    AstNode type = parse_type();
    std::string name = expect_ident("member name");
    if (at_punct("(")) {
      std::vector<AstNode> children = std::move(mods);
      children.push_back(std::move(type));
      parse_params(children);
      children.push_back(parse_block());
      return finish(make_node(NodeKind::MethodDecl, name, std::move(children)),
                    begin);
    }
    // field declaration
    std::vector<AstNode> children = std::move(mods);
    children.push_back(std::move(type));
    children.push_back(parse_fragment(name, begin));
    while (at_punct(",")) {
      next();
      std::size_t fb = cur().offset;
      std::string fname = expect_ident("field name");
      children.push_back(parse_fragment(fname, fb));
    }
    expect_punct(";");
    return finish(make_node(NodeKind::FieldDecl, "", std::move(children)),
                  begin);
  }

  void parse_params(std::vector<AstNode>& children) {
    expect_punct("(");
    if (!at_punct(")")) {
      while (true) {
        std::size_t begin = cur().offset;
        AstNode type = parse_type();
        std::string name = expect_ident("parameter name");
        children.push_back(finish(
            make_node(NodeKind::Parameter, name, {std::move(type)}), begin));
        if (!at_punct(",")) break;
        next();
      }
    }
    expect_punct(")");
  }

  AstNode parse_fragment(std::string name, std::size_t begin) {
    std::vector<AstNode> children;
    if (at_punct("=")) {
      next();
      children.push_back(parse_expr());
    }
    return finish(make_node(NodeKind::VarDeclFragment, std::move(name),
                            std::move(children)),
                  begin);
  }

  AstNode parse_block() {
    std::size_t begin = cur().offset;
    expect_punct("{");
    std::vector<AstNode> stmts;
    while (!at_punct("}")) stmts.push_back(parse_statement());
    expect_punct("}");
    return finish(make_node(NodeKind::Block, "", std::move(stmts)), begin);
  }

  // A statement position that tolerates unbraced bodies: a single statement
  // is normalized into a Block so the canonical form always has braces.
  AstNode parse_body() {
    if (at_punct("{")) return parse_block();
    std::size_t begin = cur().offset;
    std::vector<AstNode> stmts;
    stmts.push_back(parse_statement());
    return finish(make_node(NodeKind::Block, "", std::move(stmts)), begin);
  }

  AstNode parse_statement() {
    std::size_t begin = cur().offset;
    if (at_punct("{")) return parse_block();
    if (at_kw("assert")) {
      next();
      AstNode e = parse_expr();
      expect_punct(";");
      return finish(make_node(NodeKind::AssertStatement, "", {std::move(e)}),
                    begin);
    }
    if (at_kw("this") && peek().kind == TokKind::Punct && peek().text == "(") {
      next();
      std::vector<AstNode> args;
      parse_args(args);
      expect_punct(";");
      return finish(
          make_node(NodeKind::ConstructorInvocation, "", std::move(args)),
          begin);
    }
    if (at_kw("do")) {
      next();
      AstNode body = parse_body();
      expect_kw("while");
      expect_punct("(");
      AstNode cond = parse_expr();
      expect_punct(")");
      expect_punct(";");
      return finish(make_node(NodeKind::DoStatement, "",
                              {std::move(cond), std::move(body)}),
                    begin);
    }
    if (at_kw("for")) {
      next();
      expect_punct("(");
      AstNode init = make_node(NodeKind::Empty);
      if (!at_punct(";")) init = parse_for_init();
      expect_punct(";");
      AstNode cond = make_node(NodeKind::Empty);
      if (!at_punct(";")) cond = parse_expr();
      expect_punct(";");
      AstNode update = make_node(NodeKind::Empty);
      if (!at_punct(")")) update = parse_expr();
      expect_punct(")");
      AstNode body = parse_body();
      return finish(make_node(NodeKind::ForStatement, "",
                              {std::move(init), std::move(cond),
                               std::move(update), std::move(body)}),
                    begin);
    }
    if (at_kw("if")) {
      next();
      expect_punct("(");
      AstNode cond = parse_expr();
      expect_punct(")");
      AstNode then_b = parse_body();
      std::vector<AstNode> children{std::move(cond), std::move(then_b)};
      if (at_kw("else")) {
        next();
        if (at_kw("if")) {
          // else-if chains nest as a block holding the inner if
          std::size_t eb = cur().offset;
          std::vector<AstNode> inner{parse_statement()};
          children.push_back(
              finish(make_node(NodeKind::Block, "", std::move(inner)), eb));
        } else {
          children.push_back(parse_body());
        }
      }
      return finish(make_node(NodeKind::IfStatement, "", std::move(children)),
                    begin);
    }
    if (at_kw("return")) {
      next();
      AstNode e = parse_expr();
      expect_punct(";");
      return finish(make_node(NodeKind::ReturnStatement, "", {std::move(e)}),
                    begin);
    }
    if (at_kw("switch")) {
      next();
      expect_punct("(");
      std::vector<AstNode> children{parse_expr()};
      expect_punct(")");
      expect_punct("{");
      while (!at_punct("}")) {
        std::size_t cb = cur().offset;
        std::vector<AstNode> case_children;
        if (at_kw("case")) {
          next();
          case_children.push_back(parse_expr());
        } else if (at_kw("default")) {
          next();
          case_children.push_back(make_node(NodeKind::Empty));
        } else {
          err("expected 'case' or 'default'", {"case", "default"});
        }
        expect_punct(":");
        while (!at_punct("}") && !at_kw("case") && !at_kw("default"))
          case_children.push_back(parse_statement());
        children.push_back(finish(
            make_node(NodeKind::SwitchCase, "", std::move(case_children)),
            cb));
      }
      expect_punct("}");
      return finish(
          make_node(NodeKind::SwitchStatement, "", std::move(children)),
          begin);
    }
    if (at_kw("throw")) {
      next();
      AstNode e = parse_expr();
      expect_punct(";");
      return finish(make_node(NodeKind::ThrowStatement, "", {std::move(e)}),
                    begin);
    }
    if (at_kw("while")) {
      next();
      expect_punct("(");
      AstNode cond = parse_expr();
      expect_punct(")");
      AstNode body = parse_body();
      return finish(make_node(NodeKind::WhileStatement, "",
                              {std::move(cond), std::move(body)}),
                    begin);
    }
    if (at_kw("break")) {
      next();
      expect_punct(";");
      return finish(make_node(NodeKind::BreakStatement, ""), begin);
    }
    if (at_kw("continue")) {
      next();
      expect_punct(";");
      return finish(make_node(NodeKind::ContinueStatement, ""), begin);
    }
    if (at_var_decl()) {
      AstNode decl = parse_var_decl(NodeKind::VarDeclStatement);
      expect_punct(";");
      return decl;
    }
    AstNode e = parse_expr();
    expect_punct(";");
    return finish(make_node(NodeKind::ExpressionStatement, "", {std::move(e)}),
                  begin);
  }

  // Lookahead: a statement starting with a type is a declaration when the
  // type is primitive, or "Name name", or "Name[] ...".
  bool at_var_decl() const {
    if (cur().kind == TokKind::Keyword && is_primitive_type(cur().text))
      return true;
    if (!at_ident()) return false;
    std::size_t k = 1;
    while (peek(k).kind == TokKind::Punct && peek(k).text == "[" &&
           peek(k + 1).kind == TokKind::Punct && peek(k + 1).text == "]")
      k += 2;
    return peek(k).kind == TokKind::Identifier;
  }

  AstNode parse_for_init() {
    if (at_var_decl()) return parse_var_decl(NodeKind::VarDeclExpression);
    return parse_expr();
  }

  AstNode parse_var_decl(NodeKind kind) {
    std::size_t begin = cur().offset;
    std::vector<AstNode> children{parse_type()};
    while (true) {
      std::size_t fb = cur().offset;
      std::string name = expect_ident("variable name");
      children.push_back(parse_fragment(name, fb));
      if (!at_punct(",")) break;
      next();
    }
    return finish(make_node(kind, "", std::move(children)), begin);
  }

  void parse_args(std::vector<AstNode>& args) {
    expect_punct("(");
    if (!at_punct(")")) {
      while (true) {
        args.push_back(parse_expr());
        if (!at_punct(",")) break;
        next();
      }
    }
    expect_punct(")");
  }

  AstNode parse_expr() { return parse_assignment(); }

  bool is_lvalue(const AstNode& n) const {
    return n.kind == NodeKind::SimpleName || n.kind == NodeKind::FieldAccess ||
           n.kind == NodeKind::ArrayAccess ||
           n.kind == NodeKind::SuperFieldAccess;
  }

  AstNode parse_assignment() {
    std::size_t begin = cur().offset;
    AstNode lhs = parse_conditional();
    if (at_punct("=")) {
      if (!is_lvalue(lhs)) err("invalid assignment target");
      next();
      AstNode rhs = parse_assignment();
      return finish(make_node(NodeKind::Assignment, "=",
                              {std::move(lhs), std::move(rhs)}),
                    begin);
    }
    return lhs;
  }

  AstNode parse_conditional() {
    std::size_t begin = cur().offset;
    AstNode cond = parse_binary(0);
    if (at_punct("?")) {
      next();
      AstNode then_e = parse_expr();
      expect_punct(":");
      AstNode else_e = parse_conditional();
      return finish(
          make_node(NodeKind::ConditionalExpression, "",
                    {std::move(cond), std::move(then_e), std::move(else_e)}),
          begin);
    }
    return cond;
  }

  int binary_level(const std::string& op) const {
    if (op == "||") return 0;
    if (op == "&&") return 1;
    if (op == "|") return 2;
    if (op == "^") return 3;
    if (op == "&") return 4;
    if (op == "==" || op == "!=") return 5;
    if (op == "<" || op == ">" || op == "<=" || op == ">=") return 6;
    if (op == "+" || op == "-") return 7;
    if (op == "*" || op == "/" || op == "%") return 8;
    return -1;
  }

  AstNode parse_binary(int level) {
    if (level > 8) return parse_unary();
    std::size_t begin = cur().offset;
    AstNode lhs = parse_binary(level + 1);
    while (cur().kind == TokKind::Punct && binary_level(cur().text) == level) {
      std::string op = cur().text;
      next();
      AstNode rhs = parse_binary(level + 1);
      lhs = finish(make_node(NodeKind::InfixExpression, op,
                             {std::move(lhs), std::move(rhs)}),
                   begin);
    }
    return lhs;
  }

  AstNode parse_unary() {
    std::size_t begin = cur().offset;
    if (at_punct("!") || at_punct("~") || at_punct("+") || at_punct("-") ||
        at_punct("++") || at_punct("--")) {
      std::string op = cur().text;
      next();
      AstNode operand = parse_unary();
      return finish(make_node(NodeKind::PrefixExpression, op,
                              {std::move(operand)}),
                    begin);
    }
    if (at_cast()) {
      expect_punct("(");
      AstNode type = parse_type();
      expect_punct(")");
      AstNode operand = parse_unary();
      return finish(make_node(NodeKind::CastExpression, "",
                              {std::move(type), std::move(operand)}),
                    begin);
    }
    return parse_postfix();
  }

  // "(T) x" is a cast when T is a primitive type, or an identifier starting
  // with an uppercase letter whose closing paren is followed by a token that
  // can begin an operand.
  bool at_cast() const {
    if (!at_punct("(")) return false;
    std::size_t k = 1;
    const Token& t = peek(k);
    bool prim = t.kind == TokKind::Keyword && is_primitive_type(t.text);
    bool upper = t.kind == TokKind::Identifier && !t.text.empty() &&
                 std::isupper(static_cast<unsigned char>(t.text[0]));
    if (!prim && !upper) return false;
    ++k;
    while (peek(k).kind == TokKind::Punct && peek(k).text == "[" &&
           peek(k + 1).kind == TokKind::Punct && peek(k + 1).text == "]")
      k += 2;
    if (!(peek(k).kind == TokKind::Punct && peek(k).text == ")")) return false;
    const Token& after = peek(k + 1);
    if (prim)
      return after.kind == TokKind::Identifier ||
             after.kind == TokKind::Number || after.kind == TokKind::String ||
             after.kind == TokKind::Char ||
             (after.kind == TokKind::Punct &&
              (after.text == "(" || after.text == "!" || after.text == "~" ||
               after.text == "-" || after.text == "+")) ||
             (after.kind == TokKind::Keyword &&
              (after.text == "new" || after.text == "super" ||
               after.text == "true" || after.text == "false" ||
               after.text == "null"));
    return after.kind == TokKind::Identifier || after.kind == TokKind::String ||
           (after.kind == TokKind::Punct && after.text == "(") ||
           (after.kind == TokKind::Keyword &&
            (after.text == "new" || after.text == "super"));
  }

  AstNode parse_postfix() {
    std::size_t begin = cur().offset;
    AstNode e = parse_primary();
    while (true) {
      if (at_punct(".")) {
        next();
        std::string name = expect_ident("member name");
        if (at_punct("(")) {
          std::vector<AstNode> children{std::move(e)};
          parse_args(children);
          e = finish(make_node(NodeKind::MethodInvocation, name,
                               std::move(children)),
                     begin);
        } else {
          e = finish(make_node(NodeKind::FieldAccess, name, {std::move(e)}),
                     begin);
        }
        continue;
      }
      if (at_punct("[")) {
        next();
        AstNode idx = parse_expr();
        expect_punct("]");
        e = finish(make_node(NodeKind::ArrayAccess, "",
                             {std::move(e), std::move(idx)}),
                   begin);
        continue;
      }
      if (at_punct("++") || at_punct("--")) {
        std::string op = cur().text;
        next();
        e = finish(make_node(NodeKind::PostfixExpression, op, {std::move(e)}),
                   begin);
        continue;
      }
      break;
    }
    return e;
  }

  AstNode parse_primary() {
    std::size_t begin = cur().offset;
    if (cur().kind == TokKind::Number || cur().kind == TokKind::String ||
        cur().kind == TokKind::Char) {
      AstNode n = make_node(NodeKind::Literal, cur().text);
      next();
      return finish(std::move(n), begin);
    }
    if (at_kw("true") || at_kw("false") || at_kw("null")) {
      AstNode n = make_node(NodeKind::Literal, cur().text);
      next();
      return finish(std::move(n), begin);
    }
    if (at_punct("(")) {
      next();
      AstNode inner = parse_expr();
      expect_punct(")");
      return finish(make_node(NodeKind::ParenthesizedExpression, "",
                              {std::move(inner)}),
                    begin);
    }
    if (at_kw("new")) {
      next();
      std::string name = expect_ident("class name");
      std::vector<AstNode> args;
      parse_args(args);
      return finish(make_node(NodeKind::ClassInstanceCreation, name,
                              std::move(args)),
                    begin);
    }
    if (at_kw("super")) {
      next();
      expect_punct(".");
      std::string name = expect_ident("member name");
      if (at_punct("(")) {
        std::vector<AstNode> args;
        parse_args(args);
        return finish(make_node(NodeKind::SuperMethodInvocation, name,
                                std::move(args)),
                      begin);
      }
      return finish(make_node(NodeKind::SuperFieldAccess, name), begin);
    }
    if (at_ident()) {
      std::string name = cur().text;
      next();
      if (at_punct("(")) {
        std::vector<AstNode> children{make_node(NodeKind::Empty)};
        parse_args(children);
        return finish(make_node(NodeKind::MethodInvocation, name,
                                std::move(children)),
                      begin);
      }
      return finish(make_node(NodeKind::SimpleName, name), begin);
    }
    err("expected expression", {"expression"});
  }
};

}  // namespace detail

// Parses a full source file (one or more classes, optional package header).
inline SourceUnit parse_unit(std::string_view source_text) {
  detail::Parser p(source_text);
  return p.parse_unit();
}

// Parses a standalone function by wrapping it in a synthetic class; accepts
// a full class/unit text unchanged.
inline SourceUnit parse_function(std::string_view source_text) {
  std::size_t i = 0;
  while (i < source_text.size() &&
         std::isspace(static_cast<unsigned char>(source_text[i])))
    ++i;
  std::string_view rest = source_text.substr(i);
  bool bare = !(rest.rfind("package", 0) == 0 || rest.rfind("class", 0) == 0 ||
                rest.rfind("public", 0) == 0 || rest.rfind("private", 0) == 0 ||
                rest.rfind("protected", 0) == 0 ||
                rest.rfind("final class", 0) == 0);
  if (!bare) return parse_unit(source_text);
  std::string wrapped = "class __Patch {\n";
  wrapped += source_text;
  wrapped += "\n}\n";
  return parse_unit(wrapped);
}

inline const AstNode* find_method(const SourceUnit& unit,
                                  std::string_view name) {
  for (const auto& cls : unit.classes)
    for (const auto& m : cls.children)
      if ((m.kind == NodeKind::MethodDecl ||
           m.kind == NodeKind::ConstructorDecl) &&
          m.token == name)
        return &m;
  return nullptr;
}

// The Block child of a method or constructor declaration.
inline const AstNode* method_body(const AstNode& decl) {
  for (const auto& c : decl.children)
    if (c.kind == NodeKind::Block) return &c;
  return nullptr;
}

}  // namespace skelfix
