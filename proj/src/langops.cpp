#include "tl/langops.hpp"

#include <algorithm>
#include <functional>

#include "tl/grammar.hpp"
#include "tl/text.hpp"

namespace tl {

bool Relabeling::is_projection() const {
    return std::all_of(map.begin(), map.end(), [](const auto& e) { return e.second.size() == 1; });
}

bool TreeHom::is_linear() const {
    return std::all_of(map.begin(), map.end(), [](const auto& e) { return tl::is_linear(e.second); });
}

bool TreeHom::is_nondeleting() const {
    return std::all_of(map.begin(), map.end(),
                       [](const auto& e) { return tl::is_nondeleting(e.second, e.first.second); });
}

const Tree& TreeHom::image(const std::string& a, int k) const {
    auto it = map.find({a, k});
    if (it == map.end())
        throw Error(ErrorKind::Invalid, "homomorphism '" + name + "' has no image for " + a + "/" + std::to_string(k));
    return it->second;
}

TreeSet relabel_open(const Relabeling& r, const Tree& t, const std::set<std::string>& atoms) {
    if (t.var || (t.kids.empty() && atoms.count(t.label))) return {t};
    auto it = r.map.find({t.label, t.rank()});
    if (it == r.map.end())
        throw Error(ErrorKind::Invalid,
                    "relabeling '" + r.name + "' has no entry for " + t.label + "/" + std::to_string(t.rank()));
    std::vector<std::vector<Tree>> kids;
    for (const auto& k : t.kids) {
        auto s = relabel_open(r, k, atoms);
        if (s.empty()) return {};
        kids.emplace_back(s.begin(), s.end());
    }
    TreeSet out;
    for (const auto& b : it->second) {
        std::vector<std::size_t> idx(kids.size(), 0);
        while (true) {
            Tree n(b);
            for (std::size_t i = 0; i < kids.size(); ++i) n.kids.push_back(kids[i][idx[i]]);
            out.insert(std::move(n));
            int p = static_cast<int>(kids.size()) - 1;
            while (p >= 0 && ++idx[p] == kids[p].size()) idx[p--] = 0;
            if (p < 0) break;
        }
    }
    return out;
}

TreeSet apply_relabeling(const Relabeling& r, const Tree& t) { return relabel_open(r, t); }

Tree apply_hom_open(const TreeHom& h, const Tree& t, const std::set<std::string>& atoms) {
    if (t.var || (t.kids.empty() && atoms.count(t.label))) return t;
    std::vector<Tree> kids;
    kids.reserve(t.kids.size());
    for (const auto& k : t.kids) kids.push_back(apply_hom_open(h, k, atoms));
    return substitute(h.image(t.label, t.rank()), kids);
}

Tree apply_hom(const TreeHom& h, const Tree& t) { return apply_hom_open(h, t); }

Rtg relabel_image(const Relabeling& r, const Rtg& g) {
    Rtg out = g;
    out.sigma = r.to;
    out.rules.clear();
    for (const auto& [a, rhs] : g.rules)
        for (auto& s : relabel_open(r, rhs, g.nonterminals)) out.rules.insert({a, s});
    return out;
}

Rtg linear_hom_image(const TreeHom& h, const Rtg& g) {
    if (!h.is_linear()) throw Error(ErrorKind::FlagViolation, "homomorphism '" + h.name + "' is not linear");
    Rtg red = reduce_rtg(g);
    Rtg out = red;
    out.sigma = h.to;
    out.rules.clear();
    for (const auto& [a, rhs] : red.rules) out.rules.insert({a, apply_hom_open(h, rhs, red.nonterminals)});
    return out;
}

Fta inverse_hom(const TreeHom& h, const Fta& a0) {
    Fta a = complete(with_alphabet(a0, h.to));
    Fta b;
    b.name = h.name + "_inv_" + a0.name;
    b.sigma = h.from;
    b.states = a.states;
    b.final = a.final;
    std::vector<State> qs(a.states.begin(), a.states.end());
    for (const auto& [sym, k] : h.from.entries()) {
        const Tree& img = h.image(sym, k);
        if (k == 0) {
            for (const auto& q : run_states(a, img)) b.add_leaf(sym, q);
            continue;
        }
        std::vector<std::vector<State>> choices(k, qs);
        for_tuples(choices, [&](const StateVec& tuple) {
            std::vector<StateSet> vars;
            for (const auto& q : tuple) vars.push_back({q});
            for (const auto& q : run_states(a, img, vars)) b.add_trans(sym, tuple, q);
        });
    }
    return b;
}

Rtg reduce_rtg(const Rtg& g) {
    std::set<std::string> prod;
    auto nts_in = [&](const Tree& t) {
        std::set<std::string> out;
        for (const auto& l : labels_of(t))
            if (g.nonterminals.count(l)) out.insert(l);
        return out;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [a, rhs] : g.rules) {
            if (prod.count(a)) continue;
            auto ns = nts_in(rhs);
            if (std::all_of(ns.begin(), ns.end(), [&](const std::string& n) { return prod.count(n); })) {
                prod.insert(a);
                changed = true;
            }
        }
    }
    Rtg out = g;
    out.rules.clear();
    if (!prod.count(g.start)) {
        out.nonterminals = {g.start};
        return out;
    }
    std::set<std::string> reach{g.start};
    std::vector<std::string> work{g.start};
    std::set<std::pair<std::string, Tree>> keep;
    while (!work.empty()) {
        std::string a = work.back();
        work.pop_back();
        for (auto it = g.rules.lower_bound({a, Tree()}); it != g.rules.end() && it->first == a; ++it) {
            auto ns = nts_in(it->second);
            if (!std::all_of(ns.begin(), ns.end(), [&](const std::string& n) { return prod.count(n); })) continue;
            keep.insert(*it);
            for (const auto& n : ns)
                if (reach.insert(n).second) work.push_back(n);
        }
    }
    out.nonterminals = reach;
    out.rules = keep;
    return out;
}

namespace {

std::set<std::string> all_names(const Rtg& g) {
    std::set<std::string> s = g.nonterminals;
    for (const auto& [sym, rs] : g.sigma.ranks) s.insert(sym);
    return s;
}

// Renames the nonterminals of g so that none is in taken; extends taken.
Rtg rename_apart(const Rtg& g, std::set<std::string>& taken) {
    std::map<std::string, std::string> m;
    for (const auto& n : g.nonterminals) {
        std::string fresh = fresh_name(n, taken);
        taken.insert(fresh);
        m[n] = fresh;
    }
    std::function<Tree(const Tree&)> go = [&](const Tree& t) {
        if (t.kids.empty() && t.var == 0 && m.count(t.label)) return Tree(m[t.label]);
        Tree r = t;
        for (auto& k : r.kids) k = go(k);
        return r;
    };
    Rtg r = g;
    r.nonterminals.clear();
    for (const auto& [o, n] : m) r.nonterminals.insert(n);
    r.start = m.at(g.start);
    r.rules.clear();
    for (const auto& [a, rhs] : g.rules) r.rules.insert({m.at(a), go(rhs)});
    return r;
}

std::set<std::string> symbols_of(const std::vector<const Rtg*>& gs) {
    std::set<std::string> s;
    for (const auto* g : gs)
        for (const auto& [sym, rs] : g->sigma.ranks) s.insert(sym);
    return s;
}

}  // namespace

Rtg finite_rtg(const TreeSet& ts, const RankedAlphabet& sigma) {
    Rtg g;
    g.name = "Finite";
    g.sigma = sigma;
    std::set<std::string> taken;
    for (const auto& [s, rs] : sigma.ranks) taken.insert(s);
    for (const auto& t : ts)
        for (const auto& l : labels_of(t)) taken.insert(l);
    g.start = fresh_name("S", taken);
    g.nonterminals = {g.start};
    for (const auto& t : ts) {
        g.rules.insert({g.start, t});
        std::function<void(const Tree&)> add = [&](const Tree& n) {
            g.sigma.add(n.label, n.rank());
            for (const auto& k : n.kids) add(k);
        };
        add(t);
    }
    return g;
}

Rtg lang_union(const Rtg& a, const Rtg& b) {
    std::set<std::string> taken = symbols_of({&a, &b});
    Rtg x = rename_apart(a, taken), y = rename_apart(b, taken);
    Rtg r;
    r.name = a.name + "_U_" + b.name;
    r.sigma = a.sigma.merged(b.sigma);
    r.start = fresh_name("S", taken);
    r.nonterminals = x.nonterminals;
    r.nonterminals.insert(y.nonterminals.begin(), y.nonterminals.end());
    r.nonterminals.insert(r.start);
    r.rules = x.rules;
    r.rules.insert(y.rules.begin(), y.rules.end());
    r.rules.insert({r.start, Tree(x.start)});
    r.rules.insert({r.start, Tree(y.start)});
    return r;
}

Rtg lang_top_concat(const std::string& a, const std::vector<Rtg>& gs) {
    if (gs.empty()) throw Error(ErrorKind::Invalid, "top concatenation needs at least one operand");
    std::vector<const Rtg*> ptrs;
    for (const auto& g : gs) ptrs.push_back(&g);
    std::set<std::string> taken = symbols_of(ptrs);
    taken.insert(a);
    Rtg r;
    r.name = "tc_" + a;
    Tree top(a);
    for (const auto& g : gs) {
        Rtg x = rename_apart(g, taken);
        r.sigma = r.sigma.merged(x.sigma);
        r.nonterminals.insert(x.nonterminals.begin(), x.nonterminals.end());
        r.rules.insert(x.rules.begin(), x.rules.end());
        top.kids.emplace_back(x.start);
    }
    r.sigma.add(a, static_cast<int>(gs.size()));
    r.start = fresh_name("S", taken);
    r.nonterminals.insert(r.start);
    r.rules.insert({r.start, top});
    return r;
}

static void require_leaf_symbol(const RankedAlphabet& sigma, const std::string& a) {
    auto it = sigma.ranks.find(a);
    if (it != sigma.ranks.end() && !it->second.count(0))
        throw Error(ErrorKind::Invalid, "'" + a + "' is not a rank-0 symbol");
}

Rtg lang_concat_at(const Rtg& g, const std::map<std::string, Rtg>& bindings) {
    std::vector<const Rtg*> ptrs{&g};
    for (const auto& [a, h] : bindings) ptrs.push_back(&h);
    std::set<std::string> taken = symbols_of(ptrs);
    Rtg base = rename_apart(g, taken);
    std::map<std::string, std::string> starts;
    Rtg r = base;
    r.name = g.name + "_concat";
    for (const auto& [a, h] : bindings) {
        require_leaf_symbol(g.sigma, a);
        Rtg x = rename_apart(h, taken);
        starts[a] = x.start;
        r.sigma = r.sigma.merged(x.sigma);
        r.nonterminals.insert(x.nonterminals.begin(), x.nonterminals.end());
        r.rules.insert(x.rules.begin(), x.rules.end());
    }
    std::function<Tree(const Tree&)> go = [&](const Tree& t) {
        if (t.kids.empty() && t.var == 0 && starts.count(t.label)) return Tree(starts[t.label]);
        Tree n = t;
        for (auto& k : n.kids) k = go(k);
        return n;
    };
    for (const auto& rule : base.rules) {
        r.rules.erase(rule);
        r.rules.insert({rule.first, go(rule.second)});
    }
    return r;
}

Rtg lang_star_at(const Rtg& g, const std::string& a) {
    require_leaf_symbol(g.sigma, a);
    Rtg n = normalize_rtg(g);
    std::set<std::string> taken = all_names(n);
    taken.insert(a);
    Rtg r = n;
    r.name = g.name + "_star";
    r.sigma.add(a, 0);
    for (const auto& [lhs, rhs] : n.rules)
        if (rhs.kids.empty() && rhs.var == 0 && rhs.label == a) r.rules.insert({lhs, Tree(n.start)});
    r.start = fresh_name("S0", taken);
    r.nonterminals.insert(r.start);
    r.rules.insert({r.start, Tree(n.start)});
    r.rules.insert({r.start, Tree(a)});
    return r;
}

TreeSet concat_sets(const TreeSet& l, const std::string& a, const TreeSet& m) {
    TreeSet out;
    std::function<TreeSet(const Tree&)> go = [&](const Tree& t) -> TreeSet {
        if (t.kids.empty() && t.var == 0 && t.label == a) return m;
        std::vector<std::vector<Tree>> kids;
        for (const auto& k : t.kids) {
            auto s = go(k);
            if (s.empty()) return {};
            kids.emplace_back(s.begin(), s.end());
        }
        TreeSet res;
        std::vector<std::size_t> idx(kids.size(), 0);
        while (true) {
            Tree n(t.label);
            for (std::size_t i = 0; i < kids.size(); ++i) n.kids.push_back(kids[i][idx[i]]);
            res.insert(std::move(n));
            int p = static_cast<int>(kids.size()) - 1;
            while (p >= 0 && ++idx[p] == kids[p].size()) idx[p--] = 0;
            if (p < 0) break;
        }
        return res;
    };
    for (const auto& t : l) {
        auto s = go(t);
        out.insert(s.begin(), s.end());
    }
    return out;
}

TreeSet concat_sets_det(const TreeSet& l, const std::string& a, const TreeSet& m) {
    TreeSet out;
    for (const auto& t : l) {
        if (!labels_of(t).count(a)) {
            out.insert(t);
            continue;
        }
        for (const auto& s : m) out.insert(tree_concat(t, {{a, s}}));
    }
    return out;
}

// ---- Kleene decomposition ----

namespace {

RegExprPtr lit(TreeSet ts) {
    auto e = std::make_shared<RegExpr>();
    e->kind = RegExpr::Kind::Lit;
    e->lits = std::move(ts);
    return e;
}

bool is_empty_lit(const RegExprPtr& e) { return e->kind == RegExpr::Kind::Lit && e->lits.empty(); }

bool lit_mentions(const RegExprPtr& e, const std::string& b) {
    for (const auto& t : e->lits)
        if (labels_of(t).count(b)) return true;
    return false;
}

bool is_unit(const RegExprPtr& e, const std::string& b) {
    return e->kind == RegExpr::Kind::Lit && e->lits.size() == 1 && *e->lits.begin() == Tree(b);
}

RegExprPtr mk_concat(RegExprPtr x, const std::string& b, RegExprPtr m) {
    if (is_empty_lit(x)) return x;
    if (x->kind == RegExpr::Kind::Lit && !lit_mentions(x, b)) return x;
    if (is_unit(x, b)) return m;
    if (is_unit(m, b)) return x;
    auto e = std::make_shared<RegExpr>();
    e->kind = RegExpr::Kind::Concat;
    e->at = b;
    e->left = std::move(x);
    e->right = std::move(m);
    return e;
}

RegExprPtr mk_star(RegExprPtr y, const std::string& b) {
    if (is_empty_lit(y)) return lit({Tree(b)});
    if (y->kind == RegExpr::Kind::Lit && !lit_mentions(y, b)) {
        TreeSet s = y->lits;
        s.insert(Tree(b));
        return lit(s);
    }
    auto e = std::make_shared<RegExpr>();
    e->kind = RegExpr::Kind::Star;
    e->at = b;
    e->left = std::move(y);
    return e;
}

}  // namespace

RegExprPtr kleene(const Rtg& g0) {
    Rtg g = remove_chain_rules(reduce_rtg(g0));
    std::vector<std::string> order(g.nonterminals.begin(), g.nonterminals.end());
    std::map<std::tuple<std::string, std::size_t, std::set<std::string>>, RegExprPtr> memo;
    std::function<RegExprPtr(const std::string&, std::size_t, const std::set<std::string>&)> L =
        [&](const std::string& a, std::size_t j, const std::set<std::string>& p) -> RegExprPtr {
        auto key = std::make_tuple(a, j, p);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        RegExprPtr res;
        if (j == 0) {
            TreeSet ts;
            for (auto r = g.rules.lower_bound({a, Tree()}); r != g.rules.end() && r->first == a; ++r) {
                bool ok = true;
                for (const auto& l : labels_of(r->second))
                    if (g.nonterminals.count(l) && !p.count(l)) ok = false;
                if (ok) ts.insert(r->second);
            }
            res = lit(ts);
        } else {
            const std::string& b = order[j - 1];
            auto pb = p;
            pb.insert(b);
            auto x = L(a, j - 1, pb);
            auto y = L(b, j - 1, pb);
            auto z = L(b, j - 1, p);
            if (a == b) {
                // Trees of y without b already lie in z, so the star only needs the rest.
                if (y->kind == RegExpr::Kind::Lit) {
                    TreeSet keep;
                    for (const auto& t : y->lits)
                        if (labels_of(t).count(b)) keep.insert(t);
                    y = lit(keep);
                }
                res = mk_concat(mk_star(y, b), b, z);
            } else {
                res = mk_concat(x, b, mk_concat(mk_star(y, b), b, z));
            }
        }
        memo[key] = res;
        return res;
    };
    return L(g.start, order.size(), {});
}

Rtg eval(const RegExpr& e, const RankedAlphabet& sigma) {
    switch (e.kind) {
        case RegExpr::Kind::Lit: {
            RankedAlphabet s = sigma;
            Rtg g = finite_rtg(e.lits, s);
            return g;
        }
        case RegExpr::Kind::Union:
            return lang_union(eval(*e.left, sigma), eval(*e.right, sigma));
        case RegExpr::Kind::Concat: {
            Rtg l = eval(*e.left, sigma);
            l.sigma.add(e.at, 0);
            return lang_concat_at(l, {{e.at, eval(*e.right, sigma)}});
        }
        case RegExpr::Kind::Star: {
            Rtg l = eval(*e.left, sigma);
            l.sigma.add(e.at, 0);
            return lang_star_at(l, e.at);
        }
    }
    return {};
}

std::string print(const RegExpr& e) {
    switch (e.kind) {
        case RegExpr::Kind::Lit: {
            std::string s = "LIT{";
            bool first = true;
            for (const auto& t : canonical_sorted(e.lits)) {
                if (!first) s += ", ";
                first = false;
                s += print(t);
            }
            return s + "}";
        }
        case RegExpr::Kind::Union:
            return "(" + print(*e.left) + " U " + print(*e.right) + ")";
        case RegExpr::Kind::Concat:
            return "(" + print(*e.left) + " ." + e.at + " " + print(*e.right) + ")";
        case RegExpr::Kind::Star:
            return "(" + print(*e.left) + " *" + e.at + ")";
    }
    return "";
}

RegExprPtr parse_regexpr(std::string_view text) {
    Cursor c(text);
    std::function<RegExprPtr()> expr = [&]() -> RegExprPtr {
        if (c.accept('(')) {
            auto l = expr();
            std::string op = c.expect_word("operator");
            RegExprPtr out;
            if (op == "U") {
                auto r = expr();
                auto e = std::make_shared<RegExpr>();
                e->kind = RegExpr::Kind::Union;
                e->left = l;
                e->right = r;
                out = e;
            } else if (op.size() > 1 && op[0] == '.') {
                auto r = expr();
                auto e = std::make_shared<RegExpr>();
                e->kind = RegExpr::Kind::Concat;
                e->at = op.substr(1);
                e->left = l;
                e->right = r;
                out = e;
            } else if (op.size() > 1 && op[0] == '*') {
                auto e = std::make_shared<RegExpr>();
                e->kind = RegExpr::Kind::Star;
                e->at = op.substr(1);
                e->left = l;
                out = e;
            } else {
                c.fail("unknown operator '" + op + "'");
            }
            c.expect(')');
            return out;
        }
        std::string w = c.expect_word("LIT or '('");
        if (w != "LIT") c.fail("expected LIT");
        c.expect('{');
        TreeSet ts;
        if (!c.accept('}')) {
            do {
                ts.insert(c.term());
            } while (c.accept(','));
            c.expect('}');
        }
        return lit(ts);
    };
    auto e = expr();
    if (!c.at_end()) c.fail("unexpected trailing input");
    return e;
}

}  // namespace tl
