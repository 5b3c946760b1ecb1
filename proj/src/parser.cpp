#include <cctype>
#include <optional>
#include <set>

#include "pvgr/parser.hpp"

namespace pvgr {

namespace {

enum class Tok { Ident, Number, Keyword, Symbol, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t begin, end;
  int line, column;
};

const std::set<std::string>& keywords() {
  static const std::set<std::string> k = {
      "let",   "in",    "fork",  "new",    "accept", "request", "send",  "recv",
      "select", "case", "close", "proj1",  "proj2",  "chan",    "nu",    "closed",
      "forall", "ex",   "dual",  "Chan",   "AP",     "Unit",    "Int",   "End",
      "pi1",   "pi2",   "Type",  "Session", "State", "Shape",   "Dom"};
  return k;
}

class Lexer {
 public:
  Lexer(std::string_view src, std::shared_ptr<const std::string> file) : src_(src), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      if (pos_ >= src_.size()) {
        out.push_back(Token{Tok::End, "", pos_, pos_, line_, col_});
        return out;
      }
      out.push_back(next());
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '-') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  Token next() {
    std::size_t b = pos_;
    int line = line_, col = col_;
    auto make = [&](Tok k) {
      return Token{k, std::string(src_.substr(b, pos_ - b)), b, pos_, line, col};
    };
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' || src_[pos_] == '\''))
        advance();
      auto t = make(Tok::Ident);
      if (keywords().contains(t.text)) t.kind = Tok::Keyword;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      return make(Tok::Number);
    }
    auto starts = [&](std::string_view s) { return src_.substr(pos_, s.size()) == s; };
    for (std::string_view sym : {"->", "/\\", "+c", "+b"}) {
      if (starts(sym)) {
        for (std::size_t i = 0; i < sym.size(); ++i) advance();
        return make(Tok::Symbol);
      }
    }
    if (std::string_view("()[]{},;:.*\\!?#=|").find(c) != std::string_view::npos) {
      advance();
      return make(Tok::Symbol);
    }
    SourceSpan sp{file_, b, b + 1, line, col};
    throw ParseError("unexpected character '" + std::string(1, c) + "'", sp, {});
  }

  std::string_view src_;
  std::shared_ptr<const std::string> file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  Parser(std::string_view src, std::string file)
      : file_(std::make_shared<const std::string>(std::move(file))), toks_(Lexer(src, file_).run()) {}

  ConfigP program() {
    if (at_end()) fail("empty program", {"expression", "nu"});
    auto c = config();
    expect_end();
    return c;
  }

  TypeP type_only() {
    auto t = type();
    expect_end();
    return t;
  }

  KindP kind_only() {
    auto k = kind();
    expect_end();
    return k;
  }

  ExprP expr_only() {
    auto e = expr();
    expect_end();
    return e;
  }

  ValueP value_only() {
    auto v = value();
    expect_end();
    return v;
  }

 private:
  struct Entry {
    std::string name;
    Ident id;
    KindP kind;  // null for value variables
  };

  // ---------------------------------------------------------------- tokens

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_sym(std::string_view s, std::size_t k = 0) const {
    return peek(k).kind == Tok::Symbol && peek(k).text == s;
  }
  bool is_kw(std::string_view s, std::size_t k = 0) const {
    return peek(k).kind == Tok::Keyword && peek(k).text == s;
  }
  const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  SourceSpan span_of(const Token& t) const { return SourceSpan{file_, t.begin, t.end, t.line, t.column}; }
  SourceSpan span_from(std::size_t start_tok) const {
    const auto& a = toks_[start_tok];
    const auto& z = toks_[pos_ > start_tok ? pos_ - 1 : start_tok];
    return SourceSpan{file_, a.begin, z.end, a.line, a.column};
  }

  [[noreturn]] void fail(const std::string& what, std::vector<std::string> expected) {
    const auto& t = peek();
    std::string found = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(what + ", found " + found, span_of(t), std::move(expected));
  }

  void expect_sym(std::string_view s) {
    if (!is_sym(s)) fail("expected '" + std::string(s) + "'", {std::string(s)});
    take();
  }
  void expect_kw(std::string_view s) {
    if (!is_kw(s)) fail("expected '" + std::string(s) + "'", {std::string(s)});
    take();
  }
  void expect_end() {
    if (!at_end()) fail("unexpected trailing input", {"end of input"});
  }
  std::string ident_text() {
    if (peek().kind != Tok::Ident) fail("expected an identifier", {"identifier"});
    return take().text;
  }
  Label label() {
    if (peek().kind == Tok::Number && (peek().text == "1" || peek().text == "2"))
      return take().text == "1" ? Label::One : Label::Two;
    fail("expected a label", {"1", "2"});
  }

  // ---------------------------------------------------------------- scopes

  Ident bind(const std::string& name, KindP kind) {
    Ident id = fresh_ident(name);
    scope_.push_back(Entry{name, id, std::move(kind)});
    return id;
  }
  void unbind(std::size_t n) { scope_.resize(scope_.size() - n); }

  const Entry* lookup(const std::string& name) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->name == name) return &*it;
    return nullptr;
  }
  Ident resolve(const std::string& name) const {
    const Entry* e = lookup(name);
    return e ? e->id : Ident{name, 0};
  }
  KindP kind_of(const Ident& id) const {
    for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
      if (it->id == id) return it->kind;
    return nullptr;
  }

  // Category hints for the shared (a*b) and (a,b) syntax.
  bool shape_like(const TypeP& t) const {
    switch (t->tag) {
      case TypeTag::ShapeZero:
      case TypeTag::ShapeOne:
      case TypeTag::ShapePair:
        return true;
      case TypeTag::Var: {
        auto k = kind_of(t->id);
        return k && k->tag == KindTag::Shape;
      }
      default:
        return false;
    }
  }
  bool state_like(const TypeP& t) const {
    switch (t->tag) {
      case TypeTag::StEmpty:
      case TypeTag::StBind:
      case TypeTag::StMerge:
        return true;
      case TypeTag::Var: {
        auto k = kind_of(t->id);
        return k && k->tag == KindTag::State;
      }
      case TypeTag::App: {
        TypeP head = t;
        while (head->tag == TypeTag::App) head = head->fn();
        if (head->tag == TypeTag::Lam) return state_like(head->body());
        if (head->tag != TypeTag::Var) return false;
        auto k = kind_of(head->id);
        return k && k->tag == KindTag::Arrow && k->to->tag == KindTag::State;
      }
      default:
        return false;
    }
  }
  // Inside a state slot a parenthesized comma list is always a state.
  static TypeP to_state(const TypeP& t) {
    if (t->tag == TypeTag::DomMerge || t->tag == TypeTag::StMerge)
      return ty::st_merge(to_state(t->left()), to_state(t->right()));
    return t;
  }
  static TypeP to_shape(const TypeP& t) {
    if (t->tag == TypeTag::Pair || t->tag == TypeTag::ShapePair)
      return ty::shape_pair(to_shape(t->left()), to_shape(t->right()));
    return t;
  }

  // ----------------------------------------------------------------- kinds

  KindP kind() {
    auto k = kind_base();
    if (is_sym("->")) {
      take();
      return kd::arrow(k, kind());
    }
    return k;
  }

  KindP kind_base() {
    if (is_kw("Type")) return take(), kd::type();
    if (is_kw("Session")) return take(), kd::session();
    if (is_kw("State")) return take(), kd::state();
    if (is_kw("Shape")) return take(), kd::shape();
    if (is_kw("Dom")) {
      take();
      expect_sym("(");
      auto s = shape();
      expect_sym(")");
      return kd::dom(s);
    }
    if (is_sym("(")) {
      take();
      auto k = kind();
      expect_sym(")");
      return k;
    }
    fail("expected a kind", {"Type", "Session", "State", "Shape", "Dom", "("});
  }

  TypeP shape() { return to_shape(type()); }

  Constraints constraints_opt() {
    Constraints c;
    if (!is_sym("[")) return c;
    take();
    if (is_sym("]")) {
      take();
      return c;
    }
    for (;;) {
      auto l = unary();
      expect_sym("#");
      auto r = unary();
      c.push_back(Disjoint{l, r});
      if (is_sym(",")) {
        take();
        continue;
      }
      expect_sym("]");
      return c;
    }
  }

  // ----------------------------------------------------------------- types

  TypeP type() {
    if (is_kw("forall")) {
      take();
      auto name = ident_text();
      expect_sym(":");
      auto k = kind();
      auto id = bind(name, k);
      auto c = constraints_opt();
      expect_sym(".");
      auto body = type();
      unbind(1);
      return ty::all(id, k, c, body);
    }
    if (is_sym("\\")) {
      take();
      auto name = ident_text();
      expect_sym(":");
      auto sh = shape();
      expect_sym(".");
      auto id = bind(name, kd::dom(sh));
      auto body = type();
      unbind(1);
      return ty::lam(id, sh, body);
    }
    if (is_sym("!") || is_sym("?")) {
      TypeTag tag = take().text == "!" ? TypeTag::Send : TypeTag::Recv;
      expect_sym("{");
      auto name = ident_text();
      expect_sym(":");
      expect_kw("Dom");
      expect_sym("(");
      auto sh = shape();
      expect_sym(")");
      expect_sym("}");
      expect_sym("(");
      auto id = bind(name, kd::dom(sh));
      auto st = state();
      expect_sym(";");
      auto pl = type();
      unbind(1);
      expect_sym(")");
      expect_sym(".");
      auto cont = type();
      return ty::message(tag, id, sh, st, pl, cont);
    }
    auto l = unary();
    if (is_sym("+c") || is_sym("+b")) {
      bool is_choice = take().text == "+c";
      auto r = unary();
      return is_choice ? ty::choice(l, r) : ty::branch(l, r);
    }
    return l;
  }

  TypeP unary() {
    if (is_kw("dual")) return take(), ty::dual(unary());
    if (is_kw("Chan")) return take(), ty::chan(unary());
    if (is_kw("pi1")) return take(), ty::dom_proj(Label::One, unary());
    if (is_kw("pi2")) return take(), ty::dom_proj(Label::Two, unary());
    auto head = atom();
    while (starts_arg()) head = ty::app(head, arg_atom());
    return head;
  }

  bool starts_arg() const {
    return peek().kind == Tok::Ident || is_sym("(") || (is_sym("{") && is_sym("}", 1));
  }

  TypeP arg_atom() {
    if (peek().kind == Tok::Ident) return ty::var(resolve(take().text));
    if (is_sym("{")) {
      take();
      expect_sym("}");
      return ty::dom_zero();
    }
    return paren_type();
  }

  TypeP atom() {
    const auto& t = peek();
    if (t.kind == Tok::Ident) return ty::var(resolve(take().text));
    if (t.kind == Tok::Number) {
      if (t.text == "0") return take(), ty::shape_zero();
      if (t.text == "1") return take(), ty::shape_one();
      fail("expected a shape", {"0", "1"});
    }
    if (is_kw("Unit") || is_kw("Int")) return take(), ty::unit();
    if (is_kw("End")) return take(), ty::end();
    if (is_kw("AP")) {
      take();
      expect_sym("(");
      auto s = type();
      expect_sym(")");
      return ty::access_point(s);
    }
    if (is_sym(".")) return take(), ty::st_empty();
    if (is_sym("{")) {
      take();
      if (is_sym("}")) {
        take();
        return ty::dom_zero();
      }
      std::vector<TypeP> items;
      bindings_into(items);
      return fold_state(items);
    }
    if (is_sym("[")) return arrow();
    if (is_sym("(")) return paren_type();
    fail("expected a type", {"identifier", "Unit", "End", "AP", "Chan", "(", "[", "{", ".", "forall"});
  }

  TypeP paren_type() {
    expect_sym("(");
    auto first = type();
    if (is_sym("*")) {
      take();
      auto second = type();
      expect_sym(")");
      if (shape_like(first) || shape_like(second)) return ty::shape_pair(to_shape(first), to_shape(second));
      return ty::pair(first, second);
    }
    if (is_sym(",")) {
      std::vector<TypeP> items{first};
      while (is_sym(",")) {
        take();
        items.push_back(type());
      }
      expect_sym(")");
      bool st = false;
      for (const auto& i : items) st |= state_like(i);
      if (st) return fold_state(items);
      TypeP out = items.back();
      for (std::size_t i = items.size() - 1; i-- > 0;) out = ty::dom_merge(items[i], out);
      return out;
    }
    expect_sym(")");
    return first;
  }

  // After '{': d: S (, d: S)* '}'
  void bindings_into(std::vector<TypeP>& items) {
    for (;;) {
      auto d = unary();
      expect_sym(":");
      auto s = type();
      items.push_back(ty::st_bind(d, s));
      if (is_sym(",")) {
        take();
        continue;
      }
      expect_sym("}");
      return;
    }
  }

  static TypeP fold_state(const std::vector<TypeP>& items) {
    TypeP out = items.back();
    for (std::size_t i = items.size() - 1; i-- > 0;) out = ty::st_merge(items[i], out);
    return out;
  }

  // A state slot: items separated by commas; braces contribute each binding.
  TypeP state() {
    std::vector<TypeP> items;
    for (;;) {
      if (is_sym("{") && !is_sym("}", 1)) {
        take();
        bindings_into(items);
      } else {
        items.push_back(to_state(type()));
      }
      if (!is_sym(",")) break;
      take();
    }
    return fold_state(items);
  }

  // After '[': Σ; T -> (ex Γ.)? Σ; T ']'
  TypeP arrow() {
    expect_sym("[");
    auto pre = state();
    expect_sym(";");
    auto arg = type();
    expect_sym("->");
    Ctx ex;
    std::size_t introduced = 0;
    if (is_kw("ex")) {
      take();
      while (!is_sym(".")) {
        if (peek().kind == Tok::Ident && is_sym(":", 1)) {
          auto name = take().text;
          take();
          auto k = kind();
          ex.push_back(Binding::type_var(bind(name, k), k));
          ++introduced;
        } else {
          auto l = unary();
          expect_sym("#");
          auto r = unary();
          ex.push_back(Binding::disjoint(l, r));
        }
        if (is_sym(",")) {
          take();
        } else if (!is_sym(".")) {
          fail("expected ',' or '.' in existential context", {",", "."});
        }
      }
      take();
    }
    auto post = state();
    expect_sym(";");
    auto ret = type();
    unbind(introduced);
    expect_sym("]");
    return ty::arr(pre, arg, std::move(ex), post, ret);
  }

  // ----------------------------------------------------------- expressions

  bool starts_value_atom() const {
    return peek().kind == Tok::Ident || is_sym("(") || is_kw("chan");
  }

  ValueP value() {
    if (is_sym("\\") || is_sym("/\\")) return abstraction();
    return value_atom();
  }

  ValueP abstraction() {
    std::size_t start = pos_;
    if (is_sym("\\")) {
      take();
      expect_sym("[");
      auto pre = state();
      expect_sym("]");
      expect_sym("(");
      auto name = ident_text();
      expect_sym(":");
      auto pty = type();
      expect_sym(")");
      expect_sym(".");
      auto id = bind(name, nullptr);
      auto body = expr();
      unbind(1);
      return mk_value(val::Abs{pre, id, pty, body}, span_from(start));
    }
    expect_sym("/\\");
    auto name = ident_text();
    expect_sym(":");
    auto k = kind();
    auto id = bind(name, k);
    auto c = constraints_opt();
    expect_sym(".");
    auto body = value();
    unbind(1);
    return mk_value(val::TAbs{id, k, c, body}, span_from(start));
  }

  ValueP value_atom() {
    std::size_t start = pos_;
    if (peek().kind == Tok::Ident) {
      auto id = resolve(take().text);
      return mk_value(val::Var{id}, span_from(start));
    }
    if (is_kw("chan")) {
      take();
      auto d = arg_atom();
      return mk_value(val::Chan{d}, span_from(start));
    }
    if (is_sym("(")) {
      take();
      if (is_sym(")")) {
        take();
        return mk_value(val::Unit{}, span_from(start));
      }
      auto a = value();
      if (is_sym(",")) {
        take();
        auto b = value();
        expect_sym(")");
        return mk_value(val::Pair{a, b}, span_from(start));
      }
      expect_sym(")");
      return a;
    }
    fail("expected a value", {"identifier", "()", "(", "chan", "\\", "/\\"});
  }

  // Application chains `f a [T] b` become let-sequenced binary applications.
  ExprP apply_chain(ValueP head, std::size_t start) {
    struct Tail {
      ValueP arg;
      TypeP targ;
      SourceSpan span;
    };
    std::vector<Tail> tails;
    for (;;) {
      std::size_t ts = pos_;
      if (is_sym("[")) {
        take();
        auto t = type();
        expect_sym("]");
        tails.push_back(Tail{nullptr, t, span_from(ts)});
      } else if (starts_value_atom()) {
        tails.push_back(Tail{value_atom(), nullptr, span_from(ts)});
      } else {
        break;
      }
    }
    if (tails.empty()) return mk_expr(ex::Val{head}, span_from(start));
    auto step = [&](const ValueP& f, const Tail& t) -> ExprP {
      if (t.targ) return mk_expr(ex::TApp{f, t.targ}, span_from(start));
      return mk_expr(ex::App{f, t.arg}, span_from(start));
    };
    std::vector<Ident> temps;
    ValueP cur = head;
    std::vector<ExprP> headers;
    for (std::size_t i = 0; i + 1 < tails.size(); ++i) {
      headers.push_back(step(cur, tails[i]));
      temps.push_back(fresh_ident("_t"));
      cur = mk_value(val::Var{temps.back()}, tails[i].span);
    }
    ExprP out = step(cur, tails.back());
    for (std::size_t i = headers.size(); i-- > 0;)
      out = mk_expr(ex::Let{temps[i], headers[i], out}, span_from(start));
    return out;
  }

  ExprP expr() {
    std::size_t start = pos_;
    auto sp = [&] { return span_from(start); };
    if (is_kw("let")) {
      take();
      auto name = ident_text();
      expect_sym("=");
      auto bound = expr();
      expect_kw("in");
      auto id = bind(name, nullptr);
      auto body = expr();
      unbind(1);
      return mk_expr(ex::Let{id, bound, body}, sp());
    }
    if (is_kw("fork")) return take(), mk_expr(ex::Fork{value()}, sp());
    if (is_kw("new")) return take(), mk_expr(ex::New{type()}, sp());
    if (is_kw("accept")) return take(), mk_expr(ex::Accept{value()}, sp());
    if (is_kw("request")) return take(), mk_expr(ex::Request{value()}, sp());
    if (is_kw("recv")) return take(), mk_expr(ex::Recv{value()}, sp());
    if (is_kw("close")) return take(), mk_expr(ex::Close{value()}, sp());
    if (is_kw("proj1")) return take(), mk_expr(ex::Proj{Label::One, value()}, sp());
    if (is_kw("proj2")) return take(), mk_expr(ex::Proj{Label::Two, value()}, sp());
    if (is_kw("send")) {
      take();
      auto payload = value_atom();
      auto chan = value();
      return mk_expr(ex::Send{payload, chan}, sp());
    }
    if (is_kw("select")) {
      take();
      auto l = label();
      return mk_expr(ex::Select{l, value()}, sp());
    }
    if (is_kw("case")) {
      take();
      auto c = value_atom();
      expect_sym("{");
      auto l = expr();
      expect_sym(";");
      auto r = expr();
      expect_sym("}");
      return mk_expr(ex::Case{c, l, r}, sp());
    }
    if (is_sym("\\") || is_sym("/\\")) return mk_expr(ex::Val{abstraction()}, sp());
    if (is_sym("(") && !is_sym(")", 1)) {
      // Either a parenthesized expression or the head of a value form.
      take();
      auto inner = expr();
      if (is_sym(",")) {
        auto a = std::get_if<ex::Val>(&inner->node);
        if (!a) fail("pair components must be values", {"value"});
        take();
        auto b = value();
        expect_sym(")");
        return apply_chain(mk_value(val::Pair{a->v, b}, sp()), start);
      }
      expect_sym(")");
      if (auto v = std::get_if<ex::Val>(&inner->node)) return apply_chain(v->v, start);
      return inner;
    }
    if (starts_value_atom()) return apply_chain(value_atom(), start);
    fail("expected an expression",
         {"let", "fork", "new", "accept", "request", "send", "recv", "select", "case", "close", "proj1",
          "proj2", "value"});
  }

  // -------------------------------------------------------- configurations

  ConfigP config() {
    std::size_t start = pos_;
    auto left = config_term();
    while (is_sym("|")) {
      take();
      auto right = config_term();
      left = mk_config(cfg::Par{left, right}, span_from(start));
    }
    return left;
  }

  ConfigP config_term() {
    std::size_t start = pos_;
    if (is_kw("nu")) {
      take();
      if (is_sym("(")) {
        take();
        auto a = ident_text();
        expect_sym(",");
        auto b = ident_text();
        expect_sym(")");
        expect_sym(":");
        bool closed = false;
        TypeP ses;
        if (is_kw("closed")) {
          take();
          closed = true;
          ses = ty::end();
        } else {
          ses = type();
        }
        expect_sym(".");
        auto ia = bind(a, kd::dom(ty::shape_one()));
        auto ib = bind(b, kd::dom(ty::shape_one()));
        auto body = config();
        unbind(2);
        return mk_config(cfg::NuChan{ia, ib, ses, closed, body}, span_from(start));
      }
      auto x = ident_text();
      expect_sym(":");
      expect_kw("AP");
      expect_sym("(");
      auto ses = type();
      expect_sym(")");
      expect_sym(".");
      auto ix = bind(x, nullptr);
      auto body = config();
      unbind(1);
      return mk_config(cfg::NuAccess{ix, ses, body}, span_from(start));
    }
    if (is_sym("{")) {
      take();
      auto c = config();
      expect_sym("}");
      return c;
    }
    auto e = expr();
    return mk_config(cfg::Proc{e}, span_from(start));
  }

  std::shared_ptr<const std::string> file_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<Entry> scope_;
};

}  // namespace

bool Program::is_expression() const { return std::holds_alternative<cfg::Proc>(config->node); }

ExprP Program::expression() const {
  auto p = std::get_if<cfg::Proc>(&config->node);
  return p ? p->e : nullptr;
}

Program parse_program(std::string_view src, std::string file) {
  Parser p(src, file);
  return Program{p.program(), std::move(file)};
}

TypeP parse_type(std::string_view src) { return Parser(src, "<type>").type_only(); }
KindP parse_kind(std::string_view src) { return Parser(src, "<kind>").kind_only(); }
ExprP parse_expr(std::string_view src) { return Parser(src, "<expr>").expr_only(); }
ValueP parse_value(std::string_view src) { return Parser(src, "<value>").value_only(); }

}  // namespace pvgr
