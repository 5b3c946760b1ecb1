#include "pvgr/runtime.hpp"

#include "pvgr/kinding.hpp"
#include "pvgr/normalize.hpp"
#include "pvgr/parser.hpp"
#include "pvgr/typing.hpp"

namespace pvgr {

// ------------------------------------------------------------ expressions

ExprP eval_head(const ExprP& e) {
  if (auto l = get_if<ex::Let>(e); l && !get_if<ex::Val>(l->bound)) return eval_head(l->bound);
  return e;
}

namespace {

ExprP replace_head(const ExprP& e, const std::function<ExprP(const ExprP&)>& f) {
  if (auto l = get_if<ex::Let>(e); l && !get_if<ex::Val>(l->bound))
    return mk_expr(ex::Let{l->x, replace_head(l->bound, f), l->body}, e->span);
  return f(e);
}

ExprP unit_expr() { return xp::val(vl::unit()); }

// Beta step at the head itself, if there is one.
std::optional<std::pair<ExprP, std::string>> beta(const ExprP& h) {
  using R = std::optional<std::pair<ExprP, std::string>>;
  return std::visit(
      overloaded{
          [&](const ex::Let& l) -> R {
            auto v = get_if<ex::Val>(l.bound);
            if (!v) return std::nullopt;
            return std::pair{subst1(l.x, v->v, l.body), std::string("ER-BetaLet")};
          },
          [&](const ex::App& a) -> R {
            auto f = get_if<val::Abs>(a.fn);
            if (!f) return std::nullopt;
            return std::pair{subst1(f->param, a.arg, f->body), std::string("ER-BetaFun")};
          },
          [&](const ex::Proj& p) -> R {
            auto pr = get_if<val::Pair>(p.v);
            if (!pr) return std::nullopt;
            return std::pair{xp::val(p.l == Label::One ? pr->fst : pr->snd), std::string("ER-BetaPair")};
          },
          [&](const ex::TApp& a) -> R {
            auto t = get_if<val::TAbs>(a.fn);
            if (!t) return std::nullopt;
            Subst s;
            s.types[t->binder] = a.arg;
            return std::pair{xp::val(subst(s, t->body)), std::string("ER-BetaAll")};
          },
          [&](const auto&) -> R { return std::nullopt; },
      },
      h->node);
}

bool is_comm(const ExprP& h) {
  return std::visit(overloaded{
                        [](const ex::Fork& f) { return get_if<val::Abs>(f.v) != nullptr; },
                        [](const ex::New&) { return true; },
                        [](const ex::Accept&) { return true; },
                        [](const ex::Request&) { return true; },
                        [](const ex::Send&) { return true; },
                        [](const ex::Recv&) { return true; },
                        [](const ex::Select&) { return true; },
                        [](const ex::Case&) { return true; },
                        [](const ex::Close&) { return true; },
                        [](const auto&) { return false; },
                    },
                    h->node);
}

}  // namespace

std::optional<std::pair<ExprP, std::string>> step_expr_rule(const ExprP& e) {
  auto h = eval_head(e);
  auto b = beta(h);
  if (!b) return std::nullopt;
  std::string rule = b->second;
  return std::pair{replace_head(e, [&](const ExprP&) { return b->first; }), rule};
}

std::optional<ExprP> step_expr(const ExprP& e) {
  auto r = step_expr_rule(e);
  if (!r) return std::nullopt;
  return r->first;
}

ExprClass classify_expr(const ExprP& e) {
  if (get_if<ex::Val>(e)) return ExprClass::Value;
  auto h = eval_head(e);
  if (beta(h)) return ExprClass::Reducible;
  if (is_comm(h)) return ExprClass::Comm;
  return ExprClass::Stuck;
}

// --------------------------------------------------------------- machine

namespace {

void flatten(const ConfigP& c, std::vector<Binder>& bs, std::vector<ExprP>& ps) {
  std::visit(overloaded{
                 [&](const cfg::Proc& p) { ps.push_back(p.e); },
                 [&](const cfg::Par& p) {
                   flatten(p.left, bs, ps);
                   flatten(p.right, bs, ps);
                 },
                 [&](const cfg::NuChan& n) {
                   bs.push_back(Binder{Binder::Kind::Chan, n.end1, n.end2,
                                       n.closed ? ty::end() : normalize(n.ses), n.closed});
                   flatten(n.body, bs, ps);
                 },
                 [&](const cfg::NuAccess& n) {
                   bs.push_back(Binder{Binder::Kind::Access, n.x, {}, normalize(n.ses), false});
                   flatten(n.body, bs, ps);
                 },
             },
             c->node);
}

}  // namespace

Machine::Machine(const ConfigP& c, std::uint64_t seed, std::uint64_t max_steps)
    : seed_(seed), max_steps_(max_steps), rng_(seed) {
  flatten(c, binders_, procs_);
}

ConfigP Machine::config() const {
  ConfigP body;
  for (const auto& p : procs_) {
    auto leaf = mk_config(cfg::Proc{p}, p->span);
    body = body ? mk_config(cfg::Par{body, leaf}) : leaf;
  }
  if (!body) body = mk_config(cfg::Proc{unit_expr()});
  for (auto it = binders_.rbegin(); it != binders_.rend(); ++it) {
    if (it->kind == Binder::Kind::Chan)
      body = mk_config(cfg::NuChan{it->end1, it->end2, it->ses, it->closed, body});
    else
      body = mk_config(cfg::NuAccess{it->end1, it->ses, body});
  }
  return body;
}

Ctx Machine::context() const {
  Ctx g;
  for (const auto& b : binders_) {
    if (b.kind == Binder::Kind::Chan)
      g = disjoint_append(g, {Binding::type_var(b.end1, kd::dom(ty::shape_one())),
                              Binding::type_var(b.end2, kd::dom(ty::shape_one()))});
    else
      g.push_back(Binding::val_var(b.end1, ty::access_point(b.ses)));
  }
  return g;
}

TypeP Machine::open_state() const {
  std::vector<TypeP> atoms;
  for (const auto& b : binders_) {
    if (b.kind != Binder::Kind::Chan || b.closed) continue;
    atoms.push_back(ty::st_bind(ty::var(b.end1), b.ses));
    atoms.push_back(ty::st_bind(ty::var(b.end2), dual_of(b.ses)));
  }
  return make_state(atoms);
}

std::string DeadlockReport::describe() const {
  std::string out;
  for (const auto& b : blocked) {
    out += "process " + std::to_string(b.process) + " blocked on " + b.op;
    if (!b.target.empty()) out += " " + b.target;
    out += ": " + b.redex + "\n";
  }
  return out;
}

const char* outcome_name(StepOutcome::Kind k) {
  switch (k) {
    case StepOutcome::Kind::Stepped: return "Stepped";
    case StepOutcome::Kind::Final: return "Final";
    case StepOutcome::Kind::Deadlock: return "Deadlock";
    case StepOutcome::Kind::OutOfFuel: return "OutOfFuel";
    case StepOutcome::Kind::Stuck: return "Stuck";
  }
  return "?";
}

// ------------------------------------------------------------- redexes

namespace {

enum class Op { None, Request, Accept, Send, Recv, Select, Case, Close };

const char* op_name(Op o) {
  switch (o) {
    case Op::Request: return "request";
    case Op::Accept: return "accept";
    case Op::Send: return "send";
    case Op::Recv: return "recv";
    case Op::Select: return "select";
    case Op::Case: return "case";
    case Op::Close: return "close";
    case Op::None: break;
  }
  return "";
}

struct Blocked {
  Op op = Op::None;
  std::optional<Ident> target;  // channel end or access point variable
};

std::optional<Ident> chan_end(const ValueP& v) {
  auto c = get_if<val::Chan>(v);
  if (!c) return std::nullopt;
  auto d = normalize(c->dom);
  if (d->tag != TypeTag::Var) return std::nullopt;
  return d->id;
}

std::optional<Ident> access_var(const ValueP& v) {
  auto x = get_if<val::Var>(v);
  if (!x) return std::nullopt;
  return x->id;
}

Blocked blocked_on(const ExprP& h) {
  return std::visit(overloaded{
                        [](const ex::Request& r) { return Blocked{Op::Request, access_var(r.v)}; },
                        [](const ex::Accept& a) { return Blocked{Op::Accept, access_var(a.v)}; },
                        [](const ex::Send& s) { return Blocked{Op::Send, chan_end(s.chan)}; },
                        [](const ex::Recv& r) { return Blocked{Op::Recv, chan_end(r.chan)}; },
                        [](const ex::Select& s) { return Blocked{Op::Select, chan_end(s.chan)}; },
                        [](const ex::Case& c) { return Blocked{Op::Case, chan_end(c.chan)}; },
                        [](const ex::Close& c) { return Blocked{Op::Close, chan_end(c.chan)}; },
                        [](const auto&) { return Blocked{}; },
                    },
                    h->node);
}

struct Candidate {
  std::string rule;
  std::vector<std::size_t> procs;
  std::size_t binder = 0;
};

// Operation pairs that synchronize: first on one end, second on the other.
const std::pair<Op, Op> kChanPairs[] = {{Op::Send, Op::Recv}, {Op::Select, Op::Case}, {Op::Close, Op::Close}};

const char* pair_rule(Op first) {
  switch (first) {
    case Op::Send: return "CR-SendRecv";
    case Op::Select: return "CR-SelectCase";
    case Op::Close: return "CR-Close";
    default: return "CR-RequestAccept";
  }
}

// Candidate redexes grouped by rule, in priority order.
std::vector<std::vector<Candidate>> candidates(const std::vector<Binder>& binders, const std::vector<ExprP>& procs) {
  std::vector<std::vector<Candidate>> groups(7);
  std::vector<ExprP> heads;
  std::vector<Blocked> blk;
  for (std::size_t i = 0; i < procs.size(); ++i) {
    heads.push_back(eval_head(procs[i]));
    blk.push_back(get_if<ex::Val>(procs[i]) ? Blocked{} : blocked_on(heads[i]));
  }
  for (std::size_t i = 0; i < procs.size(); ++i) {
    if (get_if<ex::Val>(procs[i])) continue;
    if (beta(heads[i])) groups[0].push_back({"CR-Expr", {i}});
    if (auto f = get_if<ex::Fork>(heads[i]); f && get_if<val::Abs>(f->v)) groups[1].push_back({"CR-Fork", {i}});
    if (get_if<ex::New>(heads[i])) groups[2].push_back({"CR-New", {i}});
  }
  for (std::size_t b = 0; b < binders.size(); ++b) {
    const auto& bd = binders[b];
    if (bd.kind == Binder::Kind::Access) {
      for (std::size_t i = 0; i < procs.size(); ++i) {
        if (blk[i].op != Op::Request || blk[i].target != bd.end1) continue;
        for (std::size_t j = 0; j < procs.size(); ++j)
          if (j != i && blk[j].op == Op::Accept && blk[j].target == bd.end1)
            groups[3].push_back({"CR-RequestAccept", {i, j}, b});
      }
      continue;
    }
    if (bd.closed) continue;
    int g = 4;
    for (auto [first, second] : kChanPairs) {
      for (std::size_t i = 0; i < procs.size(); ++i) {
        if (blk[i].op != first || !blk[i].target) continue;
        const Ident& e = *blk[i].target;
        if (e != bd.end1 && e != bd.end2) continue;
        const Ident& other = e == bd.end1 ? bd.end2 : bd.end1;
        for (std::size_t j = 0; j < procs.size(); ++j) {
          if (j == i || blk[j].op != second || blk[j].target != other) continue;
          // close/close pairs are symmetric; keep one orientation
          if (first == Op::Close && j < i) continue;
          groups[g].push_back({pair_rule(first), {i, j}, b});
        }
      }
      ++g;
    }
  }
  return groups;
}

bool binder_final(const Binder& b) {
  return b.kind == Binder::Kind::Access || b.closed || normalize(b.ses)->tag == TypeTag::End;
}

Classification classify(const std::vector<Binder>& binders, const std::vector<ExprP>& procs) {
  bool all_values = true;
  for (const auto& p : procs)
    if (!get_if<ex::Val>(p)) all_values = false;
  if (all_values) {
    bool ends = true;
    for (const auto& b : binders)
      if (!binder_final(b)) ends = false;
    if (ends) return {ConfigClass::Final, {}};
  }
  auto groups = candidates(binders, procs);
  for (const auto& g : groups)
    if (!g.empty()) return {ConfigClass::Reducible, {}};
  // No rule applies. Deadlock needs every process to be a value or blocked
  // on a communication other than fork/new.
  DeadlockReport rep;
  for (std::size_t i = 0; i < procs.size(); ++i) {
    if (get_if<ex::Val>(procs[i])) continue;
    auto h = eval_head(procs[i]);
    auto b = blocked_on(h);
    if (b.op == Op::None) return {ConfigClass::Stuck, {}};
    rep.blocked.push_back(BlockedSite{i, op_name(b.op), b.target ? b.target->name : std::string(), pretty(h)});
  }
  return {ConfigClass::Deadlock, rep};
}

}  // namespace

Classification classify_config(const ConfigP& c) {
  Machine m(c);
  return classify_machine(m);
}

Classification classify_machine(const Machine& m) { return classify(m.binders(), m.processes()); }

// --------------------------------------------------------------- stepping

struct Stepper {
  Machine& m;

  ExprP& proc(std::size_t i) { return m.procs_[i]; }

  void set_head(std::size_t i, const ExprP& by) {
    proc(i) = replace_head(proc(i), [&](const ExprP&) { return by; });
  }

  void apply(const Candidate& c) {
    auto head = [&](std::size_t i) { return eval_head(proc(i)); };
    if (c.rule == "CR-Expr") {
      proc(c.procs[0]) = step_expr_rule(proc(c.procs[0]))->first;
    } else if (c.rule == "CR-Fork") {
      auto f = get_if<ex::Fork>(head(c.procs[0]));
      auto child = mk_expr(ex::App{f->v, vl::unit()});
      set_head(c.procs[0], unit_expr());
      m.procs_.push_back(child);
    } else if (c.rule == "CR-New") {
      auto n = get_if<ex::New>(head(c.procs[0]));
      Ident x = fresh_ident("ap");
      m.binders_.push_back(Binder{Binder::Kind::Access, x, {}, normalize(n->ses), false});
      set_head(c.procs[0], xp::val(vl::var(x)));
    } else if (c.rule == "CR-RequestAccept") {
      const auto& ap = m.binders_[c.binder];
      Ident acc = fresh_ident("c"), req = fresh_ident("c");
      auto ses = ap.ses;
      set_head(c.procs[0], xp::val(vl::chan(ty::var(req))));
      set_head(c.procs[1], xp::val(vl::chan(ty::var(acc))));
      m.binders_.push_back(Binder{Binder::Kind::Chan, acc, req, ses, false});
    } else if (c.rule == "CR-SendRecv") {
      auto s = get_if<ex::Send>(head(c.procs[0]));
      auto payload = s->payload;
      set_head(c.procs[0], unit_expr());
      set_head(c.procs[1], xp::val(payload));
      auto& b = m.binders_[c.binder];
      b.ses = normalize(b.ses)->cont();
    } else if (c.rule == "CR-SelectCase") {
      auto s = get_if<ex::Select>(head(c.procs[0]));
      auto k = get_if<ex::Case>(head(c.procs[1]));
      Label l = s->l;
      auto branch = l == Label::One ? k->left : k->right;
      set_head(c.procs[0], unit_expr());
      set_head(c.procs[1], branch);
      auto& b = m.binders_[c.binder];
      b.ses = normalize(b.ses)->kids[index_of(l)];
    } else if (c.rule == "CR-Close") {
      set_head(c.procs[0], unit_expr());
      set_head(c.procs[1], unit_expr());
      auto& b = m.binders_[c.binder];
      b.ses = ty::end();
      b.closed = true;
    }
  }

  StepOutcome step() {
    auto cls = classify_machine(m);
    if (cls.kind == ConfigClass::Final) return {StepOutcome::Kind::Final, "", "", {}, {}};
    if (cls.kind == ConfigClass::Deadlock) return {StepOutcome::Kind::Deadlock, "", "", {}, cls.report};
    if (cls.kind == ConfigClass::Stuck) return {StepOutcome::Kind::Stuck, "", "", {}, {}};
    if (m.steps_ >= m.max_steps_) return {StepOutcome::Kind::OutOfFuel, "", "", {}, {}};

    auto groups = candidates(m.binders_, m.procs_);
    for (const auto& g : groups) {
      if (g.empty()) continue;
      std::size_t pick = m.seed_ == 0 ? 0 : static_cast<std::size_t>(m.rng_() % g.size());
      const auto& c = g[pick];
      std::string rule = c.rule;
      if (rule == "CR-Expr") rule = step_expr_rule(m.procs_[c.procs[0]])->second;
      std::string redex = describe(c);
      apply(c);
      ++m.steps_;
      m.trace_.push_back(TraceEntry{m.steps_, rule, redex});
      return {StepOutcome::Kind::Stepped, rule, redex, c.procs, {}};
    }
    return {StepOutcome::Kind::Stuck, "", "", {}, {}};
  }

  std::string describe(const Candidate& c) {
    std::string out;
    for (auto i : c.procs) {
      if (!out.empty()) out += " | ";
      out += pretty(eval_head(proc(i)));
    }
    return out;
  }
};

StepOutcome step_config(Machine& m) { return Stepper{m}.step(); }

RunResult run(Machine& m, const StepHook& hook) {
  for (;;) {
    std::optional<Machine> before;
    if (hook) before = m;
    auto o = step_config(m);
    if (o.kind != StepOutcome::Kind::Stepped) return {o, ""};
    if (hook) {
      auto v = hook(*before, m, o);
      if (!v.empty()) return {o, v};
    }
  }
}

std::string subject_reduction_check(const Machine& before, const Machine& after, const StepOutcome& o) {
  try {
    check_program(after.config());
  } catch (const TypeError& e) {
    return "step " + std::to_string(after.steps()) + " (" + o.rule + "): configuration no longer types: " + e.what();
  } catch (const KindError& e) {
    return "step " + std::to_string(after.steps()) + " (" + o.rule + "): configuration no longer kinds: " + e.what();
  }
  if (o.rule.rfind("ER-", 0) != 0) return "";
  auto i = o.processes.at(0);
  auto g = before.context();
  auto sigma = before.open_state();
  try {
    auto t1 = type_expr(g, sigma, before.processes()[i]);
    auto t2 = type_expr(g, sigma, after.processes()[i]);
    if (!match_packages(g, t2, t1))
      return "step " + std::to_string(after.steps()) + " (" + o.rule + "): typing changed from " +
             pretty(t1.post) + "; " + pretty(t1.type) + " to " + pretty(t2.post) + "; " + pretty(t2.type);
  } catch (const std::exception& e) {
    return "step " + std::to_string(after.steps()) + " (" + o.rule + "): " + e.what();
  }
  return "";
}

}  // namespace pvgr
