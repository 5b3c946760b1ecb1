#include <cctype>
#include <functional>
#include <optional>
#include <sstream>

#include "pvgr/parser.hpp"

namespace pvgr {

namespace {

bool printable_name(const std::string& s) {
  static const std::set<std::string> reserved = {
      "let",   "in",    "fork",  "new",    "accept", "request", "send",  "recv",
      "select", "case", "close", "proj1",  "proj2",  "chan",    "nu",    "closed",
      "forall", "ex",   "dual",  "Chan",   "AP",     "Unit",    "Int",   "End",
      "pi1",   "pi2",   "Type",  "Session", "State", "Shape",   "Dom"};
  if (s.empty() || reserved.contains(s)) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '\'') return false;
  return true;
}

// Operator levels: prefix forms and choices bind loosest, then unary
// keywords and application, then atoms.
enum Level { Top = 0, Operand = 1, Atom = 2 };

class Printer {
 public:
  // Free variables get their bare name unless two distinct identifiers
  // share it, in which case the uid disambiguates.
  void declare_free(const IdentSet& fv) {
    std::map<std::string, int> count;
    for (const auto& id : fv) ++count[base(id)];
    for (const auto& id : fv) {
      std::string n = base(id);
      if (count[n] > 1) n += "_" + std::to_string(id.uid);
      names_[id] = n;
      ++used_[n];
    }
  }

  // ------------------------------------------------------------- kinds

  std::string kind(const KindP& k) {
    switch (k->tag) {
      case KindTag::Type: return "Type";
      case KindTag::Session: return "Session";
      case KindTag::State: return "State";
      case KindTag::Shape: return "Shape";
      case KindTag::Dom: return "Dom(" + type(k->shape, Top) + ")";
      case KindTag::Arrow: {
        std::string from = kind(k->from);
        if (k->from->tag == KindTag::Arrow) from = "(" + from + ")";
        return from + " -> " + kind(k->to);
      }
    }
    return "?";
  }

  std::string constraints(const Constraints& c) {
    std::string s;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (i) s += ", ";
      s += type(c[i].lhs, Operand) + " # " + type(c[i].rhs, Operand);
    }
    return s;
  }

  std::string cstr_suffix(const Constraints& c) { return c.empty() ? "" : "[" + constraints(c) + "]"; }

  // Binds as it prints; the caller pops `g.size()`-many type binders.
  std::string ctx(const Ctx& g, std::size_t& pushed) {
    std::string s;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (i) s += ", ";
      const auto& b = g[i];
      switch (b.tag) {
        case BindingTag::TypeVar: {
          auto k = kind(b.kind);
          s += push(b.id) + ":" + k;
          ++pushed;
          break;
        }
        case BindingTag::ValVar: {
          auto t = type(b.type, Top);
          s += push(b.id) + ":" + t;
          ++pushed;
          break;
        }
        case BindingTag::Disjoint:
          s += type(b.lhs, Operand) + " # " + type(b.rhs, Operand);
          break;
      }
    }
    return s;
  }

  // ------------------------------------------------------------- types

  std::string type(const TypeP& t, Level want) {
    Level have = level(t);
    std::string s = type_raw(t);
    return have < want ? "(" + s + ")" : s;
  }

  std::string state(const TypeP& st) {
    std::vector<TypeP> items;
    TypeP cur = st;
    while (cur->tag == TypeTag::StMerge) {
      items.push_back(cur->left());
      cur = cur->right();
    }
    items.push_back(cur);
    std::string s;
    std::size_t i = 0;
    while (i < items.size()) {
      if (i) s += ", ";
      if (items[i]->tag == TypeTag::StBind) {
        std::string group;
        for (; i < items.size() && items[i]->tag == TypeTag::StBind; ++i) {
          if (!group.empty()) group += ", ";
          group += type(items[i]->dom(), Operand) + ": " + type(items[i]->ses(), Top);
        }
        s += "{" + group + "}";
        continue;
      }
      if (items[i]->tag == TypeTag::StMerge)
        s += "(" + state(items[i]) + ")";
      else
        s += type(items[i], Top);
      ++i;
    }
    return s;
  }

  // ------------------------------------------------------------ values

  std::string value(const ValueP& v, bool atom) {
    return std::visit(
        overloaded{
            [&](const val::Var& x) { return name(x.id); },
            [&](const val::Chan& c) { return "chan " + arg(c.dom); },
            [&](const val::Unit&) { return std::string("()"); },
            [&](const val::Pair& p) { return "(" + value(p.fst, false) + ", " + value(p.snd, false) + ")"; },
            [&](const val::Abs& a) {
              std::string s = "\\[" + state(a.pre) + "](";
              auto pty = type(a.param_ty, Top);
              auto x = push(a.param);
              s += x + ":" + pty + "). " + expr(a.body);
              pop(1);
              return atom ? "(" + s + ")" : s;
            },
            [&](const val::TAbs& a) {
              auto k = kind(a.kind);
              auto x = push(a.binder);
              auto c = cstr_suffix(a.cstr);
              std::string s = "/\\" + x + ":" + k + c + ". " + value(a.body, false);
              pop(1);
              return atom ? "(" + s + ")" : s;
            },
        },
        v->node);
  }

  std::string expr(const ExprP& e) {
    return std::visit(
        overloaded{
            [&](const ex::Val& x) { return value(x.v, false); },
            [&](const ex::Let& l) {
              std::string h = expr(l.bound);
              if (std::holds_alternative<ex::Let>(l.bound->node)) h = "(" + h + ")";
              auto x = push(l.x);
              std::string s = "let " + x + " = " + h + " in " + expr(l.body);
              pop(1);
              return s;
            },
            [&](const ex::App& a) { return value(a.fn, true) + " " + value(a.arg, true); },
            [&](const ex::Proj& p) {
              return std::string(p.l == Label::One ? "proj1 " : "proj2 ") + value(p.v, false);
            },
            [&](const ex::TApp& a) { return value(a.fn, true) + " [" + type(a.arg, Top) + "]"; },
            [&](const ex::Fork& f) { return "fork " + value(f.v, false); },
            [&](const ex::New& n) { return "new " + type(n.ses, Top); },
            [&](const ex::Accept& a) { return "accept " + value(a.v, false); },
            [&](const ex::Request& r) { return "request " + value(r.v, false); },
            [&](const ex::Send& s) { return "send " + value(s.payload, true) + " " + value(s.chan, false); },
            [&](const ex::Recv& r) { return "recv " + value(r.chan, false); },
            [&](const ex::Select& s) {
              return std::string(s.l == Label::One ? "select 1 " : "select 2 ") + value(s.chan, false);
            },
            [&](const ex::Case& c) {
              return "case " + value(c.chan, true) + " {" + expr(c.left) + "; " + expr(c.right) + "}";
            },
            [&](const ex::Close& c) { return "close " + value(c.chan, false); },
        },
        e->node);
  }

  // A binder's scope extends as far right as possible.
  static bool ends_in_binder(const ConfigP& c) {
    if (auto p = get_if<cfg::Par>(c)) return !get_if<cfg::Par>(p->right) && ends_in_binder(p->right);
    return !get_if<cfg::Proc>(c);
  }

  std::string config(const ConfigP& c) {
    return std::visit(
        overloaded{
            [&](const cfg::Proc& p) { return expr(p.e); },
            [&](const cfg::Par& p) {
              std::string l = config(p.left);
              if (ends_in_binder(p.left)) l = "{" + l + "}";
              std::string r = config(p.right);
              if (std::holds_alternative<cfg::Par>(p.right->node)) r = "{" + r + "}";
              return l + " | " + r;
            },
            [&](const cfg::NuChan& n) {
              std::string ses = n.closed ? "closed" : type(n.ses, Top);
              std::string a = push(n.end1);
              std::string b = push(n.end2);
              std::string s = "nu (" + a + ", " + b + "):" + ses + ". " + config(n.body);
              pop(2);
              return s;
            },
            [&](const cfg::NuAccess& n) {
              std::string ses = type(n.ses, Top);
              auto x = push(n.x);
              std::string s = "nu " + x + ":AP(" + ses + "). " + config(n.body);
              pop(1);
              return s;
            },
        },
        c->node);
  }

 private:
  static std::string base(const Ident& id) { return printable_name(id.name) ? id.name : "v"; }

  std::string name(const Ident& id) {
    auto it = names_.find(id);
    if (it != names_.end()) return it->second;
    // Unbound and undeclared: fall back to a unique rendering.
    std::string n = id.uid ? base(id) + "_" + std::to_string(id.uid) : base(id);
    names_[id] = n;
    ++used_[n];
    return n;
  }

  std::string push(const Ident& id) {
    std::string b = base(id);
    std::string n = b;
    for (int i = 1; used_[n] > 0; ++i) n = b + std::to_string(i);
    ++used_[n];
    auto prev = names_.find(id);
    stack_.push_back({id, n, prev == names_.end() ? std::nullopt : std::optional<std::string>(prev->second)});
    names_[id] = n;
    return n;
  }

  void pop(std::size_t k) {
    for (; k > 0; --k) {
      auto& f = stack_.back();
      --used_[f.chosen];
      if (f.previous)
        names_[f.id] = *f.previous;
      else
        names_.erase(f.id);
      stack_.pop_back();
    }
  }

  static Level level(const TypeP& t) {
    switch (t->tag) {
      case TypeTag::All:
      case TypeTag::Lam:
      case TypeTag::Send:
      case TypeTag::Recv:
      case TypeTag::Choice:
      case TypeTag::Branch:
        return Top;
      case TypeTag::Dual:
      case TypeTag::Chan:
      case TypeTag::DomProj:
      case TypeTag::App:
        return Operand;
      default:
        return Atom;
    }
  }

  // Argument position of type application: identifiers, {} and parentheses.
  std::string arg(const TypeP& t) {
    switch (t->tag) {
      case TypeTag::Var:
      case TypeTag::DomZero:
      case TypeTag::DomMerge:
      case TypeTag::StMerge:
      case TypeTag::Pair:
      case TypeTag::ShapePair:
        return type_raw(t);
      default:
        return "(" + type_raw(t) + ")";
    }
  }

  std::string type_raw(const TypeP& t) {
    switch (t->tag) {
      case TypeTag::Var: return name(t->id);
      case TypeTag::App: {
        std::string head = t->fn()->tag == TypeTag::App ? type_raw(t->fn()) : type(t->fn(), Atom);
        return head + " " + arg(t->arg());
      }
      case TypeTag::Lam: {
        auto sh = type(t->shape(), Operand);
        auto x = push(t->id);
        std::string s = "\\" + x + ":" + sh + ". " + type(t->body(), Top);
        pop(1);
        return s;
      }
      case TypeTag::All: {
        auto k = kind(t->kind);
        auto x = push(t->id);
        auto c = cstr_suffix(t->cstr);
        std::string s = "forall " + x + ":" + k + c + ". " + type(t->body(), Top);
        pop(1);
        return s;
      }
      case TypeTag::Arr: {
        std::string s = "[" + state(t->pre()) + "; ";
        s += type(t->arg(), Top) + " -> ";
        std::size_t pushed = 0;
        if (!t->ex.empty()) s += "ex " + ctx(t->ex, pushed) + ". ";
        s += state(t->post()) + "; ";
        s += type(t->ret(), Top) + "]";
        pop(pushed);
        return s;
      }
      case TypeTag::Chan: return "Chan " + type(t->dom(), Operand);
      case TypeTag::AccessPoint: return "AP(" + type(t->ses(), Top) + ")";
      case TypeTag::Unit: return "Unit";
      case TypeTag::Pair: return "(" + type(t->left(), Top) + " * " + type(t->right(), Top) + ")";
      case TypeTag::Send:
      case TypeTag::Recv: {
        std::string s = t->tag == TypeTag::Send ? "!{" : "?{";
        auto sh = type(t->shape(), Top);
        s += push(t->id) + ":Dom(" + sh + ")}(";
        s += state(t->state()) + "; ";
        s += type(t->payload(), Top) + ")";
        pop(1);
        return s + "." + type(t->cont(), Top);
      }
      case TypeTag::Choice: return type(t->left(), Operand) + " +c " + type(t->right(), Operand);
      case TypeTag::Branch: return type(t->left(), Operand) + " +b " + type(t->right(), Operand);
      case TypeTag::End: return "End";
      case TypeTag::Dual: return "dual " + type(t->ses(), Operand);
      case TypeTag::ShapeZero: return "0";
      case TypeTag::ShapeOne: return "1";
      case TypeTag::ShapePair: return "(" + type(t->left(), Top) + " * " + type(t->right(), Top) + ")";
      case TypeTag::DomZero: return "{}";
      case TypeTag::DomMerge: return "(" + type(t->left(), Top) + ", " + type(t->right(), Top) + ")";
      case TypeTag::DomProj:
        return std::string(t->label == Label::One ? "pi1 " : "pi2 ") + type(t->dom(), Operand);
      case TypeTag::StEmpty: return ".";
      case TypeTag::StBind: return "{" + type(t->dom(), Operand) + ": " + type(t->ses(), Top) + "}";
      case TypeTag::StMerge: {
        bool binds_only = true;
        for (TypeP cur = t; binds_only; cur = cur->right()) {
          if (cur->left()->tag != TypeTag::StBind) binds_only = false;
          if (cur->right()->tag != TypeTag::StMerge) {
            binds_only = binds_only && cur->right()->tag == TypeTag::StBind;
            break;
          }
        }
        return binds_only ? state(t) : "(" + state(t) + ")";
      }
    }
    return "?";
  }

  struct Frame {
    Ident id;
    std::string chosen;
    std::optional<std::string> previous;
  };

  std::map<Ident, std::string> names_;
  std::map<std::string, int> used_;
  std::vector<Frame> stack_;
};

template <class T, class F>
std::string run_printer(const T& x, F body) {
  Printer p;
  p.declare_free(free_vars(x));
  return body(p);
}

}  // namespace

std::string pretty(const TypeP& t) {
  return run_printer(t, [&](Printer& p) { return p.type(t, Top); });
}

std::string pretty(const KindP& k) {
  return run_printer(k, [&](Printer& p) { return p.kind(k); });
}

std::string pretty(const Ctx& g) {
  return run_printer(g, [&](Printer& p) {
    std::size_t pushed = 0;
    return p.ctx(g, pushed);
  });
}

std::string pretty(const Constraints& c) {
  IdentSet fv;
  for (const auto& d : c) {
    fv.merge(free_vars(d.lhs));
    fv.merge(free_vars(d.rhs));
  }
  Printer p;
  p.declare_free(fv);
  return p.constraints(c);
}

std::string pretty(const ValueP& v) {
  return run_printer(v, [&](Printer& p) { return p.value(v, false); });
}

std::string pretty(const ExprP& e) {
  return run_printer(e, [&](Printer& p) { return p.expr(e); });
}

std::string pretty(const ConfigP& c) {
  return run_printer(c, [&](Printer& p) { return p.config(c); });
}

}  // namespace pvgr
