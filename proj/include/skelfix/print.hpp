#pragma once

#include <cassert>
#include <string>
#include <vector>

#include "skelfix/ast.hpp"

namespace skelfix {

using TokenSequence = std::vector<std::string>;

namespace detail {

struct PrintTok {
  std::string text;
  bool glue_left = false;   // no space between this token and the previous
  bool glue_right = false;  // no space between this token and the next
};

class TokenEmitter {
 public:
  std::vector<PrintTok> toks;

  void word(std::string s) { toks.push_back({std::move(s), false, false}); }
  void open_paren_call() { toks.push_back({"(", true, true}); }
  void open_paren() { toks.push_back({"(", false, true}); }
  void close_paren() { toks.push_back({")", true, false}); }
  void semi() { toks.push_back({";", true, false}); }
  void comma() { toks.push_back({",", true, false}); }
  void dot() { toks.push_back({".", true, true}); }
  void open_bracket() { toks.push_back({"[", true, true}); }
  void close_bracket() { toks.push_back({"]", true, false}); }
  void colon_label() { toks.push_back({":", true, false}); }

  void type_name(const std::string& name) {
    std::size_t base = name.find('[');
    if (base == std::string::npos) {
      word(name);
      return;
    }
    word(name.substr(0, base));
    for (std::size_t i = base; i + 1 < name.size(); i += 2) {
      open_bracket();
      close_bracket();
    }
  }

  void emit(const AstNode& n) {
    switch (n.kind) {
      case NodeKind::Empty:
        break;
      case NodeKind::Block: {
        word("{");
        for (const auto& s : n.children) emit(s);
        word("}");
        break;
      }
      case NodeKind::AssertStatement:
        word("assert");
        emit(n.children[0]);
        semi();
        break;
      case NodeKind::ConstructorInvocation:
        word("this");
        args(n.children, 0);
        semi();
        break;
      case NodeKind::DoStatement:
        word("do");
        emit(n.children[1]);
        word("while");
        open_paren();
        emit(n.children[0]);
        close_paren();
        semi();
        break;
      case NodeKind::ForStatement:
        word("for");
        open_paren();
        emit(n.children[0]);
        semi();
        emit(n.children[1]);
        semi();
        emit(n.children[2]);
        close_paren();
        emit(n.children[3]);
        break;
      case NodeKind::IfStatement:
        word("if");
        open_paren();
        emit(n.children[0]);
        close_paren();
        emit(n.children[1]);
        if (n.children.size() > 2) {
          word("else");
          emit(n.children[2]);
        }
        break;
      case NodeKind::ReturnStatement:
        word("return");
        emit(n.children[0]);
        semi();
        break;
      case NodeKind::SwitchStatement:
        word("switch");
        open_paren();
        emit(n.children[0]);
        close_paren();
        word("{");
        for (std::size_t i = 1; i < n.children.size(); ++i)
          emit(n.children[i]);
        word("}");
        break;
      case NodeKind::SwitchCase:
        if (n.children[0].kind == NodeKind::Empty) {
          word("default");
        } else {
          word("case");
          emit(n.children[0]);
        }
        colon_label();
        for (std::size_t i = 1; i < n.children.size(); ++i)
          emit(n.children[i]);
        break;
      case NodeKind::ThrowStatement:
        word("throw");
        emit(n.children[0]);
        semi();
        break;
      case NodeKind::VarDeclStatement:
        var_decl(n);
        semi();
        break;
      case NodeKind::VarDeclExpression:
        var_decl(n);
        break;
      case NodeKind::VarDeclFragment:
        word(n.token);
        if (!n.children.empty()) {
          word("=");
          emit(n.children[0]);
        }
        break;
      case NodeKind::WhileStatement:
        word("while");
        open_paren();
        emit(n.children[0]);
        close_paren();
        emit(n.children[1]);
        break;
      case NodeKind::ExpressionStatement:
        emit(n.children[0]);
        semi();
        break;
      case NodeKind::BreakStatement:
        word("break");
        semi();
        break;
      case NodeKind::ContinueStatement:
        word("continue");
        semi();
        break;
      case NodeKind::Assignment:
        emit(n.children[0]);
        word("=");
        emit(n.children[1]);
        break;
      case NodeKind::CastExpression:
        open_paren();
        emit(n.children[0]);
        close_paren();
        emit(n.children[1]);
        break;
      case NodeKind::ClassInstanceCreation:
        word("new");
        word(n.token);
        args(n.children, 0);
        break;
      case NodeKind::ConditionalExpression:
        emit(n.children[0]);
        word("?");
        emit(n.children[1]);
        word(":");
        emit(n.children[2]);
        break;
      case NodeKind::FieldAccess:
        emit(n.children[0]);
        dot();
        word(n.token);
        break;
      case NodeKind::InfixExpression:
        emit(n.children[0]);
        word(n.token);
        emit(n.children[1]);
        break;
      case NodeKind::PrefixExpression:
        toks.push_back({n.token, false, true});
        emit(n.children[0]);
        break;
      case NodeKind::PostfixExpression:
        emit(n.children[0]);
        toks.push_back({n.token, true, false});
        break;
      case NodeKind::MethodInvocation:
        if (n.children[0].kind != NodeKind::Empty) {
          emit(n.children[0]);
          dot();
        }
        word(n.token);
        args(n.children, 1);
        break;
      case NodeKind::SimpleName:
      case NodeKind::Literal:
      case NodeKind::Modifier:
        word(n.token);
        break;
      case NodeKind::SuperFieldAccess:
        word("super");
        dot();
        word(n.token);
        break;
      case NodeKind::SuperMethodInvocation:
        word("super");
        dot();
        word(n.token);
        args(n.children, 0);
        break;
      case NodeKind::ArrayAccess:
        emit(n.children[0]);
        open_bracket();
        emit(n.children[1]);
        close_bracket();
        break;
      case NodeKind::ParenthesizedExpression:
        open_paren();
        emit(n.children[0]);
        close_paren();
        break;
      case NodeKind::TypeName:
        type_name(n.token);
        break;
      case NodeKind::Parameter:
        emit(n.children[0]);
        word(n.token);
        break;
      case NodeKind::MethodDecl: {
        std::size_t i = 0;
        for (; i < n.children.size() &&
               n.children[i].kind == NodeKind::Modifier;
             ++i)
          emit(n.children[i]);
        emit(n.children[i]);  // return type
        ++i;
        word(n.token);
        params(n, i);
        emit(n.children.back());
        break;
      }
      case NodeKind::ConstructorDecl: {
        std::size_t i = 0;
        for (; i < n.children.size() &&
               n.children[i].kind == NodeKind::Modifier;
             ++i)
          emit(n.children[i]);
        word(n.token);
        params(n, i);
        emit(n.children.back());
        break;
      }
      case NodeKind::FieldDecl: {
        std::size_t i = 0;
        for (; i < n.children.size() &&
               n.children[i].kind == NodeKind::Modifier;
             ++i)
          emit(n.children[i]);
        emit(n.children[i]);
        ++i;
        for (bool first = true; i < n.children.size(); ++i, first = false) {
          if (!first) comma();
          emit(n.children[i]);
        }
        semi();
        break;
      }
      case NodeKind::ClassDecl: {
        std::size_t i = 0;
        for (; i < n.children.size() &&
               n.children[i].kind == NodeKind::Modifier;
             ++i)
          emit(n.children[i]);
        word("class");
        word(n.token);
        if (i < n.children.size() &&
            n.children[i].kind == NodeKind::TypeName) {
          word("extends");
          emit(n.children[i]);
          ++i;
        }
        word("{");
        for (; i < n.children.size(); ++i) emit(n.children[i]);
        word("}");
        break;
      }
    }
  }

 private:
  void var_decl(const AstNode& n) {
    emit(n.children[0]);
    for (std::size_t i = 1; i < n.children.size(); ++i) {
      if (i > 1) comma();
      emit(n.children[i]);
    }
  }

  void args(const std::vector<AstNode>& children, std::size_t from) {
    open_paren_call();
    for (std::size_t i = from; i < children.size(); ++i) {
      if (i > from) comma();
      emit(children[i]);
    }
    close_paren();
  }

  void params(const AstNode& n, std::size_t from) {
    open_paren_call();
    bool first = true;
    for (std::size_t i = from; i + 1 < n.children.size(); ++i) {
      if (!first) comma();
      emit(n.children[i]);
      first = false;
    }
    close_paren();
  }
};

inline bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

// True when gluing a and b would lex as a different token sequence.
inline bool needs_separator(const std::string& a, const std::string& b) {
  if (a.empty() || b.empty()) return false;
  char x = a.back(), y = b.front();
  if (is_word_char(x) && is_word_char(y)) return true;
  static const char* merges[] = {"++", "--", "<=", ">=", "==",
                                 "!=", "&&", "||", "//", "/*"};
  for (const char* m : merges)
    if (x == m[0] && y == m[1]) return true;
  return false;
}

inline std::string fold(const std::vector<PrintTok>& toks) {
  std::string out;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (i > 0) {
      bool glued = toks[i - 1].glue_right || toks[i].glue_left;
      if (!glued || needs_separator(toks[i - 1].text, toks[i].text))
        out += ' ';
    }
    out += toks[i].text;
  }
  return out;
}

}  // namespace detail

// Canonical single-line text of a node. Deterministic; braces always emitted;
// re-parsing yields a structurally identical tree.
inline std::string pretty_print(const AstNode& n) {
  detail::TokenEmitter em;
  em.emit(n);
  return detail::fold(em.toks);
}

inline TokenSequence tokenize_node(const AstNode& n) {
  detail::TokenEmitter em;
  em.emit(n);
  TokenSequence seq;
  seq.reserve(em.toks.size());
  for (auto& t : em.toks) seq.push_back(std::move(t.text));
  return seq;
}

namespace detail {

class UnitWriter {
 public:
  std::string out;

  void line(int indent, const std::vector<PrintTok>& toks) {
    for (int i = 0; i < indent; ++i) out += "    ";
    out += fold(toks);
    out += '\n';
  }

  void line(int indent, const char* text) {
    for (int i = 0; i < indent; ++i) out += "    ";
    out += text;
    out += '\n';
  }

  std::vector<PrintTok> frag(const AstNode& n) {
    TokenEmitter em;
    em.emit(n);
    return std::move(em.toks);
  }

  void write_block_body(const AstNode& block, int indent) {
    for (const auto& s : block.children) write_statement(s, indent);
  }

  void write_statement(const AstNode& n, int indent) {
    TokenEmitter em;
    switch (n.kind) {
      case NodeKind::Block:
        line(indent, "{");
        write_block_body(n, indent + 1);
        line(indent, "}");
        return;
      case NodeKind::IfStatement: {
        em.word("if");
        em.open_paren();
        em.emit(n.children[0]);
        em.close_paren();
        em.word("{");
        line(indent, em.toks);
        write_block_body(n.children[1], indent + 1);
        if (n.children.size() > 2) {
          line(indent, "} else {");
          write_block_body(n.children[2], indent + 1);
        }
        line(indent, "}");
        return;
      }
      case NodeKind::WhileStatement: {
        em.word("while");
        em.open_paren();
        em.emit(n.children[0]);
        em.close_paren();
        em.word("{");
        line(indent, em.toks);
        write_block_body(n.children[1], indent + 1);
        line(indent, "}");
        return;
      }
      case NodeKind::DoStatement: {
        line(indent, "do {");
        write_block_body(n.children[1], indent + 1);
        em.word("}");
        em.word("while");
        em.open_paren();
        em.emit(n.children[0]);
        em.close_paren();
        em.semi();
        line(indent, em.toks);
        return;
      }
      case NodeKind::ForStatement: {
        em.word("for");
        em.open_paren();
        em.emit(n.children[0]);
        em.semi();
        em.emit(n.children[1]);
        em.semi();
        em.emit(n.children[2]);
        em.close_paren();
        em.word("{");
        line(indent, em.toks);
        write_block_body(n.children[3], indent + 1);
        line(indent, "}");
        return;
      }
      case NodeKind::SwitchStatement: {
        em.word("switch");
        em.open_paren();
        em.emit(n.children[0]);
        em.close_paren();
        em.word("{");
        line(indent, em.toks);
        for (std::size_t i = 1; i < n.children.size(); ++i) {
          const AstNode& sc = n.children[i];
          TokenEmitter lab;
          if (sc.children[0].kind == NodeKind::Empty) {
            lab.word("default");
          } else {
            lab.word("case");
            lab.emit(sc.children[0]);
          }
          lab.colon_label();
          line(indent, lab.toks);
          for (std::size_t j = 1; j < sc.children.size(); ++j)
            write_statement(sc.children[j], indent + 1);
        }
        line(indent, "}");
        return;
      }
      default:
        line(indent, frag(n));
        return;
    }
  }

  void write_member(const AstNode& n, int indent) {
    TokenEmitter em;
    if (n.kind == NodeKind::FieldDecl) {
      line(indent, frag(n));
      return;
    }
    std::size_t i = 0;
    for (; i < n.children.size() && n.children[i].kind == NodeKind::Modifier;
         ++i)
      em.emit(n.children[i]);
    if (n.kind == NodeKind::MethodDecl) {
      em.emit(n.children[i]);
      ++i;
    }
    em.word(n.token);
    em.open_paren_call();
    bool first = true;
    for (; i + 1 < n.children.size(); ++i) {
      if (!first) em.comma();
      em.emit(n.children[i]);
      first = false;
    }
    em.close_paren();
    em.word("{");
    line(indent, em.toks);
    write_block_body(n.children.back(), indent + 1);
    line(indent, "}");
  }

  void write_class(const AstNode& n, int indent) {
    TokenEmitter em;
    std::size_t i = 0;
    for (; i < n.children.size() && n.children[i].kind == NodeKind::Modifier;
         ++i)
      em.emit(n.children[i]);
    em.word("class");
    em.word(n.token);
    if (i < n.children.size() && n.children[i].kind == NodeKind::TypeName) {
      em.word("extends");
      em.emit(n.children[i]);
      ++i;
    }
    em.word("{");
    line(indent, em.toks);
    for (; i < n.children.size(); ++i) write_member(n.children[i], indent + 1);
    line(indent, "}");
  }
};

}  // namespace detail

// Canonical multi-line text of a single method or constructor declaration.
inline std::string method_text(const AstNode& decl) {
  detail::UnitWriter w;
  w.write_member(decl, 0);
  return w.out;
}

// Canonical multi-line text of a whole unit: one statement per line,
// four-space indentation, mandatory braces.
inline std::string unit_text(const SourceUnit& unit) {
  detail::UnitWriter w;
  if (unit.package_name) {
    w.out += "package " + *unit.package_name + ";\n";
  }
  for (const auto& cls : unit.classes) w.write_class(cls, 0);
  return w.out;
}

}  // namespace skelfix
