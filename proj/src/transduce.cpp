#include "tl/transduce.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>

#include "tl/grammar.hpp"
#include "tl/langops.hpp"

namespace tl {

namespace {

std::set<std::string> symbols_of(const RankedAlphabet& a) {
    std::set<std::string> s;
    for (const auto& [sym, rs] : a.ranks) s.insert(sym);
    return s;
}

std::set<std::string> symbols_of(const RankedAlphabet& a, const RankedAlphabet& b) {
    auto s = symbols_of(a);
    auto t = symbols_of(b);
    s.insert(t.begin(), t.end());
    return s;
}

Tree vars_tree(const std::string& b, int k) {
    Tree t(b);
    for (int i = 1; i <= k; ++i) t.kids.push_back(Tree::variable(i));
    return t;
}

// Replaces every state call q(xi) by f(q, i).
Tree map_calls(const Tree& t, const std::function<Tree(const std::string&, int)>& f) {
    if (t.is_call()) return f(t.label, t.var);
    Tree r = t;
    for (auto& k : r.kids) k = map_calls(k, f);
    return r;
}

Tree calls_to_vars(const Tree& t) {
    return map_calls(t, [](const std::string&, int i) { return Tree::variable(i); });
}

void collect_calls(const Tree& t, std::vector<std::pair<State, int>>& out) {
    if (t.is_call()) {
        out.emplace_back(t.label, t.var);
        return;
    }
    for (const auto& k : t.kids) collect_calls(k, out);
}

std::vector<std::pair<State, int>> calls_of(const Tree& t) {
    std::vector<std::pair<State, int>> out;
    collect_calls(t, out);
    return out;
}

std::string hex_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string fta_key(const Fta& a) {
    std::string k;
    for (const auto& q : a.states) k += q + ",";
    k += "|";
    for (const auto& [sym, qs] : a.leaf) k += sym + ":" + subset_name(qs) + ";";
    for (const auto& [key, qs] : a.trans) {
        k += key.first + "(";
        for (const auto& q : key.second) k += q + ",";
        k += "):" + subset_name(qs) + ";";
    }
    return k + "|" + subset_name(a.final);
}

// Registers a look-ahead automaton and returns its name, reusing equal ones.
std::string intern_la(TdFtt& m, const Fta& a) {
    std::string key = fta_key(a);
    for (const auto& [n, f] : m.lookahead)
        if (fta_key(f) == key) return n;
    std::set<std::string> taken;
    for (const auto& [n, f] : m.lookahead) taken.insert(n);
    std::string name;
    for (int i = 0;; ++i) {
        name = "D" + std::to_string(i);
        if (!taken.count(name)) break;
    }
    Fta c = a;
    c.name = name;
    m.lookahead[name] = c;
    return name;
}

Fta small(const Fta& a) { return rename_compact(trim(a), "s"); }

// D(x_i) of a rule as an automaton over sigma; nullopt means no restriction.
std::optional<Fta> la_of(const TdFtt& m, const TdRule& r, int i) {
    if (r.la.empty() || r.la[i].empty()) return std::nullopt;
    return with_alphabet(m.lookahead.at(r.la[i]), m.in);
}

Fta la_meet(const std::optional<Fta>& a, const Fta& b, const RankedAlphabet& sigma) {
    Fta bb = with_alphabet(b, sigma);
    if (!a) return small(bb);
    Fta aa = with_alphabet(*a, sigma);
    return small(intersection(aa, bb));
}

StateSet td_reachable(const TdFtt& m) {
    StateSet seen = m.init;
    std::vector<State> work(m.init.begin(), m.init.end());
    while (!work.empty()) {
        State q = work.back();
        work.pop_back();
        for (const auto& r : m.rules) {
            if (r.q != q) continue;
            for (const auto& [p, i] : calls_of(r.rhs))
                if (seen.insert(p).second) work.push_back(p);
        }
    }
    return seen;
}

TdFtt prune_td(const TdFtt& m) {
    StateSet keep = td_reachable(m);
    TdFtt r = m;
    r.states = keep;
    r.rules.clear();
    for (const auto& rule : m.rules)
        if (keep.count(rule.q)) r.rules.insert(rule);
    std::set<std::string> used;
    for (const auto& rule : r.rules)
        for (const auto& n : rule.la)
            if (!n.empty()) used.insert(n);
    r.lookahead.clear();
    for (const auto& n : used) r.lookahead[n] = m.lookahead.at(n);
    return r;
}

// Drops states that no input tree reaches bottom-up.
BuFtt prune_bu(const BuFtt& m) {
    StateSet reach;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : m.rules) {
            if (reach.count(r.q)) continue;
            if (std::all_of(r.qs.begin(), r.qs.end(), [&](const State& q) { return reach.count(q) > 0; })) {
                reach.insert(r.q);
                changed = true;
            }
        }
    }
    BuFtt out = m;
    out.states = reach;
    out.rules.clear();
    for (const auto& r : m.rules)
        if (reach.count(r.q) && std::all_of(r.qs.begin(), r.qs.end(), [&](const State& q) { return reach.count(q) > 0; }))
            out.rules.insert(r);
    StateSet fin;
    for (const auto& q : m.final)
        if (reach.count(q)) fin.insert(q);
    out.final = fin;
    return out;
}

std::map<State, State> compact_map(const StateSet& states, const std::set<std::string>& avoid, const std::string& prefix) {
    std::map<State, State> m;
    int i = 0;
    for (const auto& q : states) {
        std::string n;
        do {
            n = prefix + std::to_string(i++);
        } while (avoid.count(n));
        m[q] = n;
    }
    return m;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::FlagViolation, what);
}

// Runs a deterministic bottom-up transducer over a tree whose variables x_j
// start in states ps[j-1]. Returns nullopt when no rule applies.
std::optional<std::pair<State, Tree>> run_det_open(const BuFtt& n, const Tree& t, const StateVec& ps) {
    if (t.is_var()) return std::make_pair(ps[t.var - 1], t);
    std::vector<std::pair<State, Tree>> kids;
    for (const auto& k : t.kids) {
        auto r = run_det_open(n, k, ps);
        if (!r) return std::nullopt;
        kids.push_back(*r);
    }
    StateVec qs;
    std::vector<Tree> outs;
    for (const auto& [q, u] : kids) {
        qs.push_back(q);
        outs.push_back(u);
    }
    for (auto it = n.rules.lower_bound(BuRule{t.label, qs, "", Tree()});
         it != n.rules.end() && it->a == t.label && it->qs == qs; ++it)
        return std::make_pair(it->q, substitute(it->rhs, outs));
    return std::nullopt;
}

// Every left-hand side over the input alphabet has a rule.
bool covers_all(const BuFtt& n) {
    std::set<std::pair<std::string, StateVec>> lhs;
    for (const auto& r : n.rules) lhs.insert({r.a, r.qs});
    std::vector<State> qs(n.states.begin(), n.states.end());
    bool all = true;
    for (const auto& [sym, k] : n.in.entries()) {
        std::vector<std::vector<State>> choices(k, qs);
        bool any = false;
        for_tuples(choices, [&](const StateVec& t) {
            any = true;
            if (!lhs.count({sym, t})) all = false;
        });
        if (!any) all = false;
    }
    return all;
}

}  // namespace

bool TdFtt::has_lookahead() const {
    for (const auto& r : rules)
        for (const auto& n : r.la)
            if (!n.empty()) return true;
    return false;
}

// ---- application ----

std::map<State, TreeSet> apply_states(const BuFtt& m, const Tree& t, std::size_t cap) {
    std::map<std::pair<std::string, int>, std::vector<const BuRule*>> index;
    for (const auto& r : m.rules) index[{r.a, static_cast<int>(r.qs.size())}].push_back(&r);
    std::function<std::map<State, TreeSet>(const Tree&)> go = [&](const Tree& n) {
        std::vector<std::map<State, TreeSet>> kids;
        for (const auto& k : n.kids) kids.push_back(go(k));
        std::map<State, TreeSet> out;
        auto it = index.find({n.label, n.rank()});
        if (it == index.end()) return out;
        for (const BuRule* r : it->second) {
            auto used = var_counts(r->rhs);
            std::vector<std::vector<Tree>> choices;
            bool ok = true;
            for (std::size_t i = 0; i < r->qs.size() && ok; ++i) {
                auto f = kids[i].find(r->qs[i]);
                if (f == kids[i].end() || f->second.empty()) {
                    ok = false;
                    break;
                }
                if (used.count(static_cast<int>(i) + 1))
                    choices.emplace_back(f->second.begin(), f->second.end());
                else
                    choices.push_back({*f->second.begin()});
            }
            if (!ok) continue;
            auto& dest = out[r->q];
            for_tuples(choices, [&](const std::vector<Tree>& args) {
                dest.insert(substitute(r->rhs, args));
                if (dest.size() > cap)
                    throw Error(ErrorKind::CapExceeded, "transducer output exceeds cap " + std::to_string(cap));
            });
        }
        return out;
    };
    return go(t);
}

TreeSet apply(const BuFtt& m, const Tree& t, std::size_t cap) {
    TreeSet out;
    for (auto& [q, ts] : apply_states(m, t, cap))
        if (m.final.count(q)) out.insert(ts.begin(), ts.end());
    return out;
}

namespace {

struct TdRunner {
    const TdFtt& m;
    std::size_t cap;
    std::map<std::tuple<State, std::string, int>, std::vector<const TdRule*>> index;
    std::map<std::pair<State, const Tree*>, TreeSet> memo;
    std::map<std::pair<std::string, const Tree*>, bool> la_memo;

    TdRunner(const TdFtt& mm, std::size_t c) : m(mm), cap(c) {
        for (const auto& r : m.rules) index[{r.q, r.a, r.k}].push_back(&r);
    }

    bool la_ok(const std::string& name, const Tree* t) {
        if (name.empty()) return true;
        auto key = std::make_pair(name, t);
        auto it = la_memo.find(key);
        if (it != la_memo.end()) return it->second;
        bool ok = accepts(m.lookahead.at(name), *t);
        la_memo[key] = ok;
        return ok;
    }

    TreeSet expand(const Tree& rhs, const Tree& node) {
        if (rhs.is_call()) return run(rhs.label, node.kids[rhs.var - 1]);
        if (rhs.kids.empty()) return {rhs};
        std::vector<std::vector<Tree>> choices;
        for (const auto& k : rhs.kids) {
            auto s = expand(k, node);
            if (s.empty()) return {};
            choices.emplace_back(s.begin(), s.end());
        }
        TreeSet out;
        for_tuples(choices, [&](const std::vector<Tree>& kids) {
            out.insert(Tree(rhs.label, kids));
            if (out.size() > cap)
                throw Error(ErrorKind::CapExceeded, "transducer output exceeds cap " + std::to_string(cap));
        });
        return out;
    }

    const TreeSet& run(const State& q, const Tree& t) {
        auto key = std::make_pair(q, &t);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        TreeSet out;
        auto rs = index.find({q, t.label, t.rank()});
        if (rs != index.end()) {
            for (const TdRule* r : rs->second) {
                bool ok = true;
                for (std::size_t i = 0; i < r->la.size() && ok; ++i) ok = la_ok(r->la[i], &t.kids[i]);
                if (!ok) continue;
                auto s = expand(r->rhs, t);
                out.insert(s.begin(), s.end());
                if (out.size() > cap)
                    throw Error(ErrorKind::CapExceeded, "transducer output exceeds cap " + std::to_string(cap));
            }
        }
        return memo[key] = std::move(out);
    }
};

}  // namespace

TreeSet apply_from(const TdFtt& m, const State& q, const Tree& t, std::size_t cap) {
    TdRunner r(m, cap);
    return r.run(q, t);
}

TreeSet apply(const TdFtt& m, const Tree& t, std::size_t cap) {
    TdRunner r(m, cap);
    TreeSet out;
    for (const auto& q : m.init) {
        const auto& s = r.run(q, t);
        out.insert(s.begin(), s.end());
    }
    return out;
}

TreeSet apply_piece(const Piece& p, const Tree& t, std::size_t cap) {
    return std::visit(
        [&](const auto& x) -> TreeSet {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Relabeling>) {
                return apply_relabeling(x, t);
            } else if constexpr (std::is_same_v<T, Fta>) {
                return accepts(x, t) ? TreeSet{t} : TreeSet{};
            } else if constexpr (std::is_same_v<T, TreeHom>) {
                return {apply_hom(x, t)};
            } else {
                return apply(x, t, cap);
            }
        },
        p);
}

TreeSet apply_chain(const std::vector<Piece>& chain, const Tree& t, std::size_t cap) {
    TreeSet cur{t};
    for (const auto& p : chain) {
        TreeSet next;
        for (const auto& u : cur) {
            auto s = apply_piece(p, u, cap);
            next.insert(s.begin(), s.end());
            if (next.size() > cap)
                throw Error(ErrorKind::CapExceeded, "chain output exceeds cap " + std::to_string(cap));
        }
        cur = std::move(next);
    }
    return cur;
}

const RankedAlphabet& piece_input(const Piece& p) {
    return std::visit(
        [](const auto& x) -> const RankedAlphabet& {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Relabeling> || std::is_same_v<T, TreeHom>) {
                return x.from;
            } else if constexpr (std::is_same_v<T, Fta>) {
                return x.sigma;
            } else {
                return x.in;
            }
        },
        p);
}

RankedAlphabet piece_output(const Piece& p) {
    return std::visit(
        [](const auto& x) -> RankedAlphabet {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, Relabeling> || std::is_same_v<T, TreeHom>) {
                return x.to;
            } else if constexpr (std::is_same_v<T, Fta>) {
                return x.sigma;
            } else {
                return x.out;
            }
        },
        p);
}

// ---- classification ----

SubclassFlags classify(const BuFtt& m) {
    SubclassFlags f;
    f.linear = f.nondeleting = f.qrel = true;
    f.pure = m.states.size() == 1;
    std::map<std::pair<std::string, StateVec>, int> lhs;
    for (const auto& r : m.rules) {
        int k = static_cast<int>(r.qs.size());
        if (!is_linear(r.rhs)) f.linear = false;
        if (!is_nondeleting(r.rhs, k)) f.nondeleting = false;
        if (!(r.rhs == vars_tree(r.rhs.label, k) && m.out.has(r.rhs.label, k))) f.qrel = false;
        ++lhs[{r.a, r.qs}];
    }
    f.deterministic = std::all_of(lhs.begin(), lhs.end(), [](const auto& e) { return e.second <= 1; });
    f.total_deterministic = f.deterministic && m.final == m.states;
    if (f.total_deterministic) {
        std::vector<State> qs(m.states.begin(), m.states.end());
        for (const auto& [sym, k] : m.in.entries()) {
            std::vector<std::vector<State>> choices(k, qs);
            for_tuples(choices, [&](const StateVec& t) {
                if (!lhs.count({sym, t})) f.total_deterministic = false;
            });
            if (qs.empty()) f.total_deterministic = false;
        }
    }
    return f;
}

SubclassFlags classify(const TdFtt& m) {
    SubclassFlags f;
    f.linear = f.nondeleting = f.qrel = true;
    f.pure = m.states.size() == 1;
    std::map<std::tuple<State, std::string, int>, std::vector<const TdRule*>> lhs;
    bool la = m.has_lookahead();
    for (const auto& r : m.rules) {
        if (!is_linear(r.rhs)) f.linear = false;
        if (!is_nondeleting(r.rhs, r.k)) f.nondeleting = false;
        bool shape = m.out.has(r.rhs.label, r.k) && r.rhs.rank() == r.k && !r.rhs.var;
        for (int i = 0; shape && i < r.k; ++i)
            shape = r.rhs.kids[i].is_call() && r.rhs.kids[i].var == i + 1;
        if (!shape || la) f.qrel = false;
        lhs[{r.q, r.a, r.k}].push_back(&r);
    }
    f.deterministic = m.init.size() == 1;
    for (const auto& [key, rs] : lhs) {
        for (std::size_t i = 0; i < rs.size() && f.deterministic; ++i)
            for (std::size_t j = i + 1; j < rs.size() && f.deterministic; ++j) {
                bool disjoint = false;
                for (int v = 0; v < rs[i]->k && !disjoint; ++v) {
                    auto a = la_of(m, *rs[i], v), b = la_of(m, *rs[j], v);
                    if (!a && !b) continue;
                    Fta x = a ? *a : universal_fta(m.in);
                    Fta y = b ? *b : universal_fta(m.in);
                    disjoint = decide_empty(intersection(with_alphabet(x, m.in), with_alphabet(y, m.in))).empty;
                }
                if (!disjoint) f.deterministic = false;
            }
    }
    f.total_deterministic = f.deterministic && !la;
    if (f.total_deterministic)
        for (const auto& q : m.states)
            for (const auto& [sym, k] : m.in.entries())
                if (!lhs.count({q, sym, k}) || lhs.at({q, sym, k}).size() != 1) f.total_deterministic = false;
    return f;
}

// ---- embeddings ----

namespace {

State star_state(const RankedAlphabet& a, const RankedAlphabet& b) { return fresh_name("*", symbols_of(a, b)); }

}  // namespace

BuFtt embed_bu(const Relabeling& r) {
    BuFtt m;
    m.name = r.name;
    m.in = r.from;
    m.out = r.to;
    State s = star_state(r.from, r.to);
    m.states = m.final = {s};
    for (const auto& [key, bs] : r.map)
        for (const auto& b : bs) m.rules.insert({key.first, StateVec(key.second, s), s, vars_tree(b, key.second)});
    return m;
}

BuFtt embed_bu(const Fta& a) {
    BuFtt m;
    m.name = a.name;
    m.in = m.out = a.sigma;
    m.states = a.states;
    m.final = a.final;
    for (const auto& [sym, qs] : a.leaf)
        for (const auto& q : qs) m.rules.insert({sym, {}, q, Tree(sym)});
    for (const auto& [key, qs] : a.trans)
        for (const auto& q : qs)
            m.rules.insert({key.first, key.second, q, vars_tree(key.first, static_cast<int>(key.second.size()))});
    return m;
}

BuFtt embed_bu(const TreeHom& h) {
    BuFtt m;
    m.name = h.name;
    m.in = h.from;
    m.out = h.to;
    State s = star_state(h.from, h.to);
    m.states = m.final = {s};
    for (const auto& [key, img] : h.map) m.rules.insert({key.first, StateVec(key.second, s), s, img});
    return m;
}

TdFtt embed_td(const Relabeling& r) {
    TdFtt m;
    m.name = r.name;
    m.in = r.from;
    m.out = r.to;
    State s = star_state(r.from, r.to);
    m.states = m.init = {s};
    for (const auto& [key, bs] : r.map)
        for (const auto& b : bs) {
            Tree rhs(b);
            for (int i = 1; i <= key.second; ++i) rhs.kids.push_back(Tree::call(s, i));
            m.rules.insert({s, key.first, key.second, rhs, {}});
        }
    return m;
}

TdFtt embed_td(const Fta& a) {
    TdFta t = associate(a);
    TdFtt m;
    m.name = a.name;
    m.in = m.out = a.sigma;
    m.states = t.states;
    m.init = t.init;
    for (const auto& [sym, qs] : t.leaf_final)
        for (const auto& q : qs) m.rules.insert({q, sym, 0, Tree(sym), {}});
    for (const auto& [key, tuples] : t.trans) {
        const auto& [q, sym, k] = key;
        for (const auto& tuple : tuples) {
            Tree rhs(sym);
            for (int i = 0; i < k; ++i) rhs.kids.push_back(Tree::call(tuple[i], i + 1));
            m.rules.insert({q, sym, k, rhs, {}});
        }
    }
    return m;
}

TdFtt embed_td(const TreeHom& h) {
    TdFtt m;
    m.name = h.name;
    m.in = h.from;
    m.out = h.to;
    State s = star_state(h.from, h.to);
    m.states = m.init = {s};
    for (const auto& [key, img] : h.map) {
        Tree rhs = substitute(img, [&] {
            std::vector<Tree> args;
            for (int i = 1; i <= key.second; ++i) args.push_back(Tree::call(s, i));
            return args;
        }());
        m.rules.insert({s, key.first, key.second, rhs, {}});
    }
    return m;
}

TreeHom extract_hom(const BuFtt& m) {
    auto f = classify(m);
    require(f.pure && f.total_deterministic, "transducer '" + m.name + "' is not pure total deterministic");
    TreeHom h;
    h.name = m.name;
    h.from = m.in;
    h.to = m.out;
    for (const auto& r : m.rules) h.map[{r.a, static_cast<int>(r.qs.size())}] = r.rhs;
    return h;
}

TreeHom extract_hom(const TdFtt& m) {
    auto f = classify(m);
    require(f.pure && f.total_deterministic, "transducer '" + m.name + "' is not pure total deterministic");
    TreeHom h;
    h.name = m.name;
    h.from = m.in;
    h.to = m.out;
    for (const auto& r : m.rules) h.map[{r.a, r.k}] = calls_to_vars(r.rhs);
    return h;
}

bool is_fta_restriction(const BuFtt& m) {
    for (const auto& r : m.rules)
        if (!(r.rhs == vars_tree(r.a, static_cast<int>(r.qs.size())))) return false;
    return true;
}

Fta restriction_fta(const BuFtt& m) {
    Fta a;
    a.name = m.name;
    a.sigma = m.in;
    a.states = m.states;
    a.final = m.final;
    for (const auto& r : m.rules) {
        if (r.qs.empty())
            a.add_leaf(r.a, r.q);
        else
            a.add_trans(r.a, r.qs, r.q);
    }
    return a;
}

// ---- renaming ----

BuFtt rename_states(const BuFtt& m, const std::string& prefix) {
    auto map = compact_map(m.states, symbols_of(m.in, m.out), prefix);
    BuFtt r;
    r.name = m.name;
    r.in = m.in;
    r.out = m.out;
    for (const auto& q : m.states) r.states.insert(map.at(q));
    for (const auto& q : m.final) r.final.insert(map.at(q));
    for (const auto& rule : m.rules) {
        StateVec qs;
        for (const auto& q : rule.qs) qs.push_back(map.at(q));
        r.rules.insert({rule.a, qs, map.at(rule.q), rule.rhs});
    }
    return r;
}

TdFtt rename_states(const TdFtt& m, const std::string& prefix) {
    auto map = compact_map(m.states, symbols_of(m.in, m.out), prefix);
    TdFtt r;
    r.name = m.name;
    r.in = m.in;
    r.out = m.out;
    r.lookahead = m.lookahead;
    for (const auto& q : m.states) r.states.insert(map.at(q));
    for (const auto& q : m.init) r.init.insert(map.at(q));
    for (const auto& rule : m.rules) {
        Tree rhs = map_calls(rule.rhs, [&](const std::string& q, int i) { return Tree::call(map.at(q), i); });
        r.rules.insert({map.at(rule.q), rule.a, rule.k, rhs, rule.la});
    }
    return r;
}

BuFtt with_initial(const BuFtt& m, const StateSet& final) {
    BuFtt r = m;
    r.final = final;
    return r;
}

TdFtt with_initial(const TdFtt& m, const StateSet& init) {
    TdFtt r = m;
    r.init = init;
    return r;
}

// ---- linearity conversions ----

TdFtt lb_to_ltr(const BuFtt& m) {
    require(classify(m).linear, "transducer '" + m.name + "' is not linear");
    TdFtt n;
    n.name = m.name;
    n.in = m.in;
    n.out = m.out;
    n.states = m.states;
    n.init = m.final;
    std::map<State, std::string> dom;
    for (const auto& r : m.rules) {
        int k = static_cast<int>(r.qs.size());
        std::vector<Tree> args;
        for (int i = 0; i < k; ++i) args.push_back(Tree::call(r.qs[i], i + 1));
        Tree rhs = substitute(r.rhs, args);
        std::vector<std::string> la;
        auto used = var_counts(r.rhs);
        for (int i = 0; i < k; ++i) {
            if (used.count(i + 1)) {
                la.emplace_back();
                continue;
            }
            const State& q = r.qs[i];
            if (!dom.count(q)) dom[q] = intern_la(n, small(domain_of(with_initial(m, {q}))));
            la.push_back(dom[q]);
        }
        if (std::all_of(la.begin(), la.end(), [](const std::string& s) { return s.empty(); })) la.clear();
        n.rules.insert({r.q, r.a, k, rhs, la});
    }
    return n;
}

BuFtt ltr_to_lb(const TdFtt& m) {
    require(classify(m).linear, "transducer '" + m.name + "' is not linear");
    std::vector<std::string> names;
    for (const auto& [n, a] : m.lookahead) names.push_back(n);
    std::vector<Fta> dets;
    for (const auto& n : names) dets.push_back(complete(determinize(with_alphabet(m.lookahead.at(n), m.in))));
    auto step = [&](const std::string& a, const std::vector<StateVec>& kids) {
        StateVec out;
        for (std::size_t j = 0; j < dets.size(); ++j) {
            if (kids.empty()) {
                out.push_back(*dets[j].leaf.at(a).begin());
                continue;
            }
            StateVec qs;
            for (const auto& kid : kids) qs.push_back(kid[j]);
            out.push_back(*dets[j].trans.at({a, qs}).begin());
        }
        return out;
    };
    auto accepted = [&](const StateVec& l, const std::string& name) {
        auto j = std::find(names.begin(), names.end(), name) - names.begin();
        return dets[j].final.count(l[j]) > 0;
    };

    std::set<StateVec> reach;
    for (const auto& a : m.in.of_rank(0)) reach.insert(step(a, {}));
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<StateVec> snap(reach.begin(), reach.end());
        for (const auto& [sym, k] : m.in.entries()) {
            if (k == 0) continue;
            std::vector<std::vector<StateVec>> choices(k, snap);
            for_tuples(choices, [&](const std::vector<StateVec>& kids) {
                if (reach.insert(step(sym, kids)).second) changed = true;
            });
        }
    }

    bool deletes = false;
    for (const auto& r : m.rules)
        if (!is_nondeleting(r.rhs, r.k)) deletes = true;
    std::set<std::string> taken = m.states;
    State d = fresh_name("d", taken);
    bool plain = names.empty();
    auto st = [&](const State& s, const StateVec& l) {
        if (plain) return s;
        std::string t = "(";
        for (std::size_t i = 0; i < l.size(); ++i) t += (i ? "," : "") + l[i];
        return pair_name(s, t + ")");
    };

    BuFtt b;
    b.name = m.name;
    b.in = m.in;
    b.out = deletes ? m.out.merged(m.in) : m.out;
    std::map<std::tuple<State, std::string, int>, std::vector<const TdRule*>> index;
    for (const auto& r : m.rules) index[{r.q, r.a, r.k}].push_back(&r);
    std::vector<StateVec> rl(reach.begin(), reach.end());
    auto emit = [&](const std::string& a, const std::vector<StateVec>& kids) {
        StateVec l = step(a, kids);
        int k = static_cast<int>(kids.size());
        if (deletes) {
            StateVec qs;
            for (const auto& kl : kids) qs.push_back(st(d, kl));
            b.rules.insert({a, qs, st(d, l), vars_tree(a, k)});
        }
        for (const auto& q : m.states) {
            auto it = index.find({q, a, k});
            if (it == index.end()) continue;
            for (const TdRule* r : it->second) {
                bool ok = true;
                for (int i = 0; i < k && ok; ++i)
                    if (!r->la.empty() && !r->la[i].empty()) ok = accepted(kids[i], r->la[i]);
                if (!ok) continue;
                StateVec qs(k);
                for (int i = 0; i < k; ++i) qs[i] = st(d, kids[i]);
                for (const auto& [p, i] : calls_of(r->rhs)) qs[i - 1] = st(p, kids[i - 1]);
                b.rules.insert({a, qs, st(q, l), calls_to_vars(r->rhs)});
            }
        }
    };
    for (const auto& a : m.in.of_rank(0)) emit(a, {});
    for (const auto& [sym, k] : m.in.entries()) {
        if (k == 0) continue;
        std::vector<std::vector<StateVec>> choices(k, rl);
        for_tuples(choices, [&](const std::vector<StateVec>& kids) { emit(sym, kids); });
    }
    for (const auto& l : rl) {
        for (const auto& q : m.states) b.states.insert(st(q, l));
        if (deletes) b.states.insert(st(d, l));
        for (const auto& q : m.init) b.final.insert(st(q, l));
    }
    b = prune_bu(b);
    return plain ? b : rename_states(b);
}

Piece convert_linear(const Piece& p, Scheme s) {
    switch (s) {
        case Scheme::NlbToNlt:
        case Scheme::LbToLtr: {
            const auto* m = std::get_if<BuFtt>(&p);
            require(m != nullptr, "conversion expects a bottom-up transducer");
            auto f = classify(*m);
            require(f.linear, "transducer '" + m->name + "' is not linear");
            if (s == Scheme::NlbToNlt) require(f.nondeleting, "transducer '" + m->name + "' is deleting");
            return lb_to_ltr(*m);
        }
        case Scheme::NltToNlb:
        case Scheme::LtToLb: {
            const auto* m = std::get_if<TdFtt>(&p);
            require(m != nullptr, "conversion expects a top-down transducer");
            require(!m->has_lookahead(), "transducer '" + m->name + "' uses look-ahead");
            auto f = classify(*m);
            require(f.linear, "transducer '" + m->name + "' is not linear");
            if (s == Scheme::NltToNlb) require(f.nondeleting, "transducer '" + m->name + "' is deleting");
            return ltr_to_lb(*m);
        }
    }
    return p;
}

// ---- decompositions ----

QrelHom decompose_bu(const BuFtt& m) {
    QrelHom out;
    out.qrel.name = m.name + "_rel";
    out.qrel.in = m.in;
    out.qrel.states = m.states;
    out.qrel.final = m.final;
    out.hom.name = m.name + "_hom";
    out.hom.to = m.out;
    std::map<std::string, Tree> seen;
    for (const auto& r : m.rules) {
        int k = static_cast<int>(r.qs.size());
        std::string key = print(r.rhs);
        std::string d = "d_" + hex_hash(key);
        auto [it, fresh] = seen.emplace(d, r.rhs);
        if (!fresh && !(it->second == r.rhs))
            throw Error(ErrorKind::Invalid, "symbol hash collision for " + key);
        out.qrel.out.add(d, k);
        out.qrel.rules.insert({r.a, r.qs, r.q, vars_tree(d, k)});
        out.hom.map[{d, k}] = r.rhs;
    }
    out.hom.from = out.qrel.out;
    return out;
}

RelFtaHom decompose_lb(const BuFtt& m) {
    BuFtt q = m;
    TreeHom h;
    bool qrel = classify(m).qrel;
    if (!qrel) {
        auto d = decompose_bu(m);
        q = d.qrel;
        h = d.hom;
    }
    RelFtaHom out;
    out.rel.name = m.name + "_guess";
    out.rel.from = m.in;
    out.fta.name = m.name + "_check";
    out.fta.states = m.states;
    out.fta.final = m.final;
    out.hom.name = m.name + "_proj";
    out.hom.to = m.out;
    for (const auto& [sym, k] : m.in.entries()) out.rel.map[{sym, k}];
    auto taken = symbols_of(m.in, m.out);
    int i = 0;
    for (const auto& r : q.rules) {
        int k = static_cast<int>(r.qs.size());
        std::string d;
        do {
            d = "r" + std::to_string(++i);
        } while (taken.count(d));
        out.rel.to.add(d, k);
        out.rel.map[{r.a, k}].insert(d);
        if (k == 0)
            out.fta.add_leaf(d, r.q);
        else
            out.fta.add_trans(d, r.qs, r.q);
        out.hom.map[{d, k}] = qrel ? r.rhs : h.image(r.rhs.label, k);
        taken.insert(d);
    }
    // A symbol without rules still needs an image: a subtree the first stage of
    // a composition later deletes must survive the relabeling. The automaton
    // has no transition for it.
    auto leaves = m.out.of_rank(0);
    for (auto& [key, bs] : out.rel.map) {
        if (!bs.empty()) continue;
        std::string d;
        do {
            d = "r" + std::to_string(++i);
        } while (taken.count(d));
        taken.insert(d);
        Tree img = leaves.empty() ? Tree() : Tree(leaves.front());
        if (leaves.empty()) {
            if (key.second == 0) continue;
            img = Tree::variable(1);
        }
        out.rel.to.add(d, key.second);
        bs.insert(d);
        out.hom.map[{d, key.second}] = img;
    }
    out.fta.sigma = out.rel.to;
    out.hom.from = out.rel.to;
    return out;
}

CopyLinear decompose_td(const TdFtt& m) {
    require(!m.has_lookahead(), "transducer '" + m.name + "' uses look-ahead");
    int n = 1;
    for (const auto& r : m.rules)
        for (const auto& [v, c] : var_counts(r.rhs)) n = std::max(n, c);
    CopyLinear out;
    out.copy.name = m.name + "_copy";
    out.copy.from = m.in;
    for (const auto& [sym, k] : m.in.entries()) {
        Tree img(sym);
        for (int i = 1; i <= k; ++i)
            for (int j = 0; j < n; ++j) img.kids.push_back(Tree::variable(i));
        out.copy.to.add(sym, k * n);
        out.copy.map[{sym, k}] = img;
    }
    out.linear = m;
    out.linear.name = m.name + "_lin";
    out.linear.in = out.copy.to;
    out.linear.rules.clear();
    for (const auto& r : m.rules) {
        std::map<int, int> seen;
        Tree rhs = map_calls(r.rhs, [&](const std::string& q, int i) {
            int j = seen[i]++;
            return Tree::call(q, (i - 1) * n + j + 1);
        });
        out.linear.rules.insert({r.q, r.a, r.k * n, rhs, {}});
    }
    return out;
}

TdQrelHom decompose_ldt(const TdFtt& m) {
    require(!m.has_lookahead(), "transducer '" + m.name + "' uses look-ahead");
    auto f = classify(m);
    require(f.linear && f.deterministic, "transducer '" + m.name + "' is not linear deterministic");
    TdQrelHom out;
    out.qrel.name = m.name + "_rel";
    out.qrel.in = m.in;
    out.qrel.states = m.states;
    out.qrel.init = m.init;
    out.hom.name = m.name + "_hom";
    out.hom.to = m.out;
    State d = fresh_name("d", m.states);
    bool deletes = false;
    std::map<std::string, Tree> seen;
    for (const auto& r : m.rules) {
        Tree t = calls_to_vars(r.rhs);
        std::string key = print(t);
        std::string sym = "d_" + hex_hash(key);
        auto [it, fresh] = seen.emplace(sym, t);
        if (!fresh && !(it->second == t)) throw Error(ErrorKind::Invalid, "symbol hash collision for " + key);
        Tree rhs(sym);
        std::vector<State> qs(r.k, d);
        for (const auto& [p, i] : calls_of(r.rhs)) qs[i - 1] = p;
        for (int i = 0; i < r.k; ++i) {
            if (qs[i] == d) deletes = true;
            rhs.kids.push_back(Tree::call(qs[i], i + 1));
        }
        out.qrel.out.add(sym, r.k);
        out.qrel.rules.insert({r.q, r.a, r.k, rhs, {}});
        out.hom.map[{sym, r.k}] = t;
    }
    if (deletes) {
        out.qrel.states.insert(d);
        for (const auto& [sym, k] : m.in.entries()) {
            Tree rhs(sym);
            for (int i = 1; i <= k; ++i) rhs.kids.push_back(Tree::call(d, i));
            out.qrel.rules.insert({d, sym, k, rhs, {}});
            out.qrel.out.add(sym, k);
            out.hom.map[{sym, k}] = vars_tree(sym, k);
        }
        out.hom.to = out.hom.to.merged(m.in);
    }
    out.hom.from = out.qrel.out;
    return out;
}

RelabelTd remove_lookahead(const TdFtt& m) {
    std::vector<std::string> names;
    for (const auto& [n, a] : m.lookahead) names.push_back(n);
    std::vector<Fta> dets;
    for (const auto& n : names) dets.push_back(complete(determinize(with_alphabet(m.lookahead.at(n), m.in))));
    auto step = [&](const std::string& a, const std::vector<StateVec>& kids) {
        StateVec out;
        for (std::size_t j = 0; j < dets.size(); ++j) {
            if (kids.empty()) {
                out.push_back(*dets[j].leaf.at(a).begin());
                continue;
            }
            StateVec qs;
            for (const auto& kid : kids) qs.push_back(kid[j]);
            out.push_back(*dets[j].trans.at({a, qs}).begin());
        }
        return out;
    };
    auto bits = [&](const StateVec& l) {
        std::string s;
        for (std::size_t j = 0; j < dets.size(); ++j) s += dets[j].final.count(l[j]) ? '1' : '0';
        return s;
    };

    std::map<StateVec, State> names_of;
    auto state_of = [&](const StateVec& l) {
        auto it = names_of.find(l);
        if (it != names_of.end()) return it->second;
        State s = "l" + std::to_string(names_of.size());
        names_of[l] = s;
        return s;
    };

    RelabelTd out;
    BuFtt& f = out.relabel;
    f.name = m.name + "_la";
    f.in = m.in;
    std::map<std::pair<std::string, int>, std::vector<std::pair<std::string, std::vector<std::string>>>> labels;
    std::set<StateVec> reach;
    for (const auto& a : m.in.of_rank(0)) {
        StateVec l = step(a, {});
        reach.insert(l);
        f.rules.insert({a, {}, state_of(l), Tree(a)});
        f.out.add(a, 0);
    }
    std::set<std::pair<std::string, std::vector<StateVec>>> done;
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<StateVec> snap(reach.begin(), reach.end());
        for (const auto& [sym, k] : m.in.entries()) {
            if (k == 0) continue;
            std::vector<std::vector<StateVec>> choices(k, snap);
            for_tuples(choices, [&](const std::vector<StateVec>& kids) {
                if (!done.insert({sym, kids}).second) return;
                StateVec l = step(sym, kids);
                if (reach.insert(l).second) changed = true;
                std::vector<std::string> us;
                std::string label = sym + "<";
                StateVec qs;
                for (int i = 0; i < k; ++i) {
                    us.push_back(bits(kids[i]));
                    label += (i ? "." : "") + us.back();
                    qs.push_back(state_of(kids[i]));
                }
                label += ">";
                if (!f.out.has(label, k)) labels[{sym, k}].push_back({label, us});
                f.out.add(label, k);
                f.rules.insert({sym, qs, state_of(l), vars_tree(label, k)});
            });
        }
    }
    for (const auto& [l, s] : names_of) f.states.insert(s);
    f.final = f.states;

    TdFtt& n = out.td;
    n.name = m.name + "_plain";
    n.in = f.out;
    n.out = m.out;
    n.states = m.states;
    n.init = m.init;
    for (const auto& r : m.rules) {
        if (r.k == 0) {
            n.rules.insert({r.q, r.a, 0, r.rhs, {}});
            continue;
        }
        auto it = labels.find({r.a, r.k});
        if (it == labels.end()) continue;
        for (const auto& [label, us] : it->second) {
            bool ok = true;
            for (int i = 0; i < r.k && ok; ++i) {
                if (r.la.empty() || r.la[i].empty()) continue;
                auto j = std::find(names.begin(), names.end(), r.la[i]) - names.begin();
                ok = us[i][j] == '1';
            }
            if (ok) n.rules.insert({r.q, label, r.k, r.rhs, {}});
        }
    }
    return out;
}

std::vector<Piece> decompose(const Piece& p, DecompScheme s) {
    const auto* bu = std::get_if<BuFtt>(&p);
    const auto* td = std::get_if<TdFtt>(&p);
    switch (s) {
        case DecompScheme::BuQrelHom: {
            require(bu != nullptr, "scheme expects a bottom-up transducer");
            auto d = decompose_bu(*bu);
            return {d.qrel, d.hom};
        }
        case DecompScheme::QrelRelFtaProj: {
            require(bu != nullptr, "scheme expects a bottom-up transducer");
            require(classify(*bu).qrel, "transducer '" + bu->name + "' is not a finite state relabeling");
            auto d = decompose_lb(*bu);
            return {d.rel, d.fta, d.hom};
        }
        case DecompScheme::TdCopyHomLt: {
            require(td != nullptr, "scheme expects a top-down transducer");
            auto d = decompose_td(*td);
            return {d.copy, d.linear};
        }
        case DecompScheme::LdtQrelLhom: {
            require(td != nullptr, "scheme expects a top-down transducer");
            auto d = decompose_ldt(*td);
            return {d.qrel, d.hom};
        }
        case DecompScheme::TdrRemoveLookahead: {
            require(td != nullptr, "scheme expects a top-down transducer");
            auto d = remove_lookahead(*td);
            return {d.relabel, d.td};
        }
    }
    return {};
}

// ---- bottom-up composition ----

BuFtt compose_bu_hom(const BuFtt& m, const TreeHom& h) {
    // Placeholder outputs of an earlier composition only sit in deleted
    // subtrees; they pass through unchanged.
    TreeHom g = h;
    BuFtt k = m;
    k.name = m.name + "_" + h.name;
    k.out = h.to;
    for (const auto& [a, rank] : m.out.entries())
        if (!g.map.count({a, rank})) {
            g.map[{a, rank}] = vars_tree(a, rank);
            k.out.add(a, rank);
        }
    k.rules.clear();
    for (const auto& r : m.rules) k.rules.insert({r.a, r.qs, r.q, apply_hom_open(g, r.rhs)});
    return k;
}

BuFtt compose_lb_rel(const BuFtt& m, const Relabeling& rel) {
    require(classify(m).linear, "transducer '" + m.name + "' is not linear");
    BuFtt k = m;
    k.name = m.name + "_" + rel.name;
    k.out = rel.to;
    k.rules.clear();
    for (const auto& r : m.rules)
        for (const auto& t : relabel_open(rel, r.rhs)) k.rules.insert({r.a, r.qs, r.q, t});
    return k;
}

BuFtt compose_bu_dbqrel(const BuFtt& m, const BuFtt& n) {
    require(classify(n).deterministic, "transducer '" + n.name + "' is not deterministic");
    bool total = covers_all(n);
    StateVec ps(n.states.begin(), n.states.end());
    State bot = fresh_name("bot", n.states);
    if (!total) ps.push_back(bot);
    std::string nil = fresh_name("nil", symbols_of(n.out));

    BuFtt k;
    k.name = m.name + "_" + n.name;
    k.in = m.in;
    k.out = n.out;
    if (!total) k.out.add(nil, 0);
    for (const auto& q : m.states)
        for (const auto& p : ps) k.states.insert(pair_name(q, p));
    for (const auto& q : m.final)
        for (const auto& p : n.final) k.final.insert(pair_name(q, p));
    for (const auto& r : m.rules) {
        int arity = static_cast<int>(r.qs.size());
        auto used = var_counts(r.rhs);
        std::vector<std::vector<State>> choices(arity, ps);
        for_tuples(choices, [&](const StateVec& pv) {
            StateVec qs;
            for (int i = 0; i < arity; ++i) qs.push_back(pair_name(r.qs[i], pv[i]));
            bool dead = false;
            for (int i = 0; i < arity; ++i)
                if (pv[i] == bot && used.count(i + 1)) dead = true;
            std::optional<std::pair<State, Tree>> res;
            if (!dead) res = run_det_open(n, r.rhs, pv);
            if (res)
                k.rules.insert({r.a, qs, pair_name(r.q, res->first), res->second});
            else if (!total)
                k.rules.insert({r.a, qs, pair_name(r.q, bot), Tree(nil)});
        });
    }
    return rename_states(prune_bu(k));
}

BuFtt compose_bu_fta(const BuFtt& m, const Fta& a) {
    Fta d = determinize(with_alphabet(a, m.out));
    BuFtt n = embed_bu(d);
    n.final = d.final;
    return compose_bu_dbqrel(m, n);
}

BuFtt compose_bu(const BuFtt& m, const BuFtt& n) {
    auto fn = classify(n);
    if (fn.pure && fn.total_deterministic) return compose_bu_hom(m, extract_hom(n));
    if (is_fta_restriction(n)) return compose_bu_fta(m, restriction_fta(n));
    if (fn.qrel && fn.deterministic) return compose_bu_dbqrel(m, n);
    if (classify(m).linear) {
        auto d = decompose_lb(n);
        BuFtt k = compose_lb_rel(m, d.rel);
        k = compose_bu_fta(k, d.fta);
        return compose_bu_hom(k, d.hom);
    }
    if (fn.deterministic) {
        auto d = decompose_bu(n);
        BuFtt k = compose_bu_dbqrel(m, d.qrel);
        return compose_bu_hom(k, d.hom);
    }
    throw Error(ErrorKind::FlagViolation,
                "cannot compose '" + m.name + "' with '" + n.name + "': first is not linear and second is not deterministic");
}

// ---- domains and inverse images ----

Fta domain_of(const BuFtt& m) {
    Fta a;
    a.name = "dom_" + m.name;
    a.sigma = m.in;
    a.states = m.states;
    a.final = m.final;
    for (const auto& r : m.rules) {
        if (r.qs.empty())
            a.add_leaf(r.a, r.q);
        else
            a.add_trans(r.a, r.qs, r.q);
    }
    return a;
}

Fta inverse_image(const BuFtt& m, const Fta& a) {
    BuFtt k = compose_bu_fta(m, a);
    Fta d = small(domain_of(k));
    d.name = "inv_" + m.name;
    return d;
}

Fta domain_of(const TdFtt& m) {
    auto chain = chain_to_bu({m});
    Fta d = small(domain_of(chain.back()));
    for (int i = static_cast<int>(chain.size()) - 2; i >= 0; --i) d = inverse_image(chain[i], d);
    d.name = "dom_" + m.name;
    d.sigma = m.in;
    return d;
}

Fta domain_of(const Piece& p) {
    return std::visit(
        [](const auto& x) -> Fta {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, BuFtt> || std::is_same_v<T, TdFtt>) {
                return domain_of(x);
            } else {
                return domain_of(embed_bu(x));
            }
        },
        p);
}

Fta inverse_image(const Piece& p, const Fta& a) {
    auto chain = chain_to_bu({p});
    Fta d = a;
    for (int i = static_cast<int>(chain.size()) - 1; i >= 0; --i) d = inverse_image(chain[i], d);
    d.sigma = piece_input(p);
    return d;
}

// ---- top-down composition ----

TdFtt compose_tdr_hom(const TdFtt& m, const TreeHom& h) {
    require(h.is_linear() || classify(m).deterministic,
            "homomorphism '" + h.name + "' is not linear and '" + m.name + "' is not deterministic");
    TdFtt k = m;
    k.name = m.name + "_" + h.name;
    k.out = h.to;
    k.rules.clear();
    std::map<State, Fta> dom;
    for (const auto& r : m.rules) {
        Tree rhs = apply_hom_open(h, r.rhs);
        auto before = calls_of(r.rhs);
        auto after_v = calls_of(rhs);
        std::set<std::pair<State, int>> after(after_v.begin(), after_v.end());
        std::vector<std::string> la = r.la;
        for (const auto& c : std::set<std::pair<State, int>>(before.begin(), before.end())) {
            if (after.count(c)) continue;
            auto it = dom.find(c.first);
            if (it == dom.end()) it = dom.emplace(c.first, small(domain_of(with_initial(m, {c.first})))).first;
            if (la.empty()) la.assign(r.k, "");
            std::string& slot = la[c.second - 1];
            std::optional<Fta> cur;
            if (!slot.empty()) cur = k.lookahead.at(slot);
            slot = intern_la(k, la_meet(cur, it->second, m.in));
        }
        k.rules.insert({r.q, r.a, r.k, rhs, la});
    }
    return prune_td(k);
}

TdFtt compose_tdr_tdqrel(const TdFtt& m, const TdFtt& n) {
    require(classify(n).qrel, "transducer '" + n.name + "' is not a finite state relabeling");
    std::map<std::tuple<State, std::string, int>, std::vector<const TdRule*>> index;
    for (const auto& r : n.rules) index[{r.q, r.a, r.k}].push_back(&r);
    std::function<TreeSet(const Tree&, const State&)> expand = [&](const Tree& t, const State& p) -> TreeSet {
        if (t.is_call()) return {Tree::call(pair_name(t.label, p), t.var)};
        TreeSet out;
        auto it = index.find({p, t.label, t.rank()});
        if (it == index.end()) return out;
        for (const TdRule* r : it->second) {
            std::vector<std::vector<Tree>> choices;
            for (int i = 0; i < t.rank(); ++i) {
                auto s = expand(t.kids[i], r->rhs.kids[i].label);
                choices.emplace_back(s.begin(), s.end());
            }
            for_tuples(choices, [&](const std::vector<Tree>& kids) { out.insert(Tree(r->rhs.label, kids)); });
        }
        return out;
    };
    TdFtt k;
    k.name = m.name + "_" + n.name;
    k.in = m.in;
    k.out = n.out;
    k.lookahead = m.lookahead;
    for (const auto& q : m.states)
        for (const auto& p : n.states) k.states.insert(pair_name(q, p));
    for (const auto& q : m.init)
        for (const auto& p : n.init) k.init.insert(pair_name(q, p));
    for (const auto& r : m.rules)
        for (const auto& p : n.states)
            for (const auto& t : expand(r.rhs, p)) k.rules.insert({pair_name(r.q, p), r.a, r.k, t, r.la});
    return rename_states(prune_td(k));
}

namespace {

// Inverse image of a through a top-down transducer started in state q.
Fta inverse_image_td(const TdFtt& m, const State& q, const Fta& a) {
    auto chain = chain_to_bu({with_initial(m, {q})});
    Fta d = a;
    for (int i = static_cast<int>(chain.size()) - 1; i >= 0; --i) d = inverse_image(chain[i], d);
    d.sigma = m.in;
    return d;
}

}  // namespace

TdFtt compose_tdr_dbqrel(const TdFtt& m0, const BuFtt& n) {
    require(classify(m0).deterministic, "transducer '" + m0.name + "' is not deterministic");
    auto fn = classify(n);
    require(fn.deterministic, "transducer '" + n.name + "' is not deterministic");
    TdFtt m = m0;
    State qd = *m.init.begin();
    bool called = false;
    for (const auto& r : m.rules)
        for (const auto& [p, i] : calls_of(r.rhs))
            if (p == qd) called = true;
    if (called) {
        State fresh = fresh_name(qd + "_0", m.states);
        m.states.insert(fresh);
        for (const auto& r : m0.rules)
            if (r.q == qd) m.rules.insert({fresh, r.a, r.k, r.rhs, r.la});
        m.init = {fresh};
        qd = fresh;
    }
    StateVec ps(n.states.begin(), n.states.end());
    std::map<std::pair<State, State>, Fta> dom;
    auto dom_of = [&](const State& q, const State& p) -> const Fta& {
        auto key = std::make_pair(q, p);
        auto it = dom.find(key);
        if (it != dom.end()) return it->second;
        Fta np = domain_of(with_initial(n, {p}));
        return dom[key] = small(inverse_image_td(m, q, np));
    };

    TdFtt k;
    k.name = m.name + "_" + n.name;
    k.in = m.in;
    k.out = n.out;
    k.states = m.states;
    k.init = m.init;
    k.lookahead = m.lookahead;
    for (const auto& r : m.rules) {
        auto calls = calls_of(r.rhs);
        int mc = static_cast<int>(calls.size());
        int j = 0;
        Tree s = map_calls(r.rhs, [&](const std::string&, int) { return Tree::variable(++j); });
        std::vector<std::vector<State>> choices(mc, ps);
        for_tuples(choices, [&](const StateVec& pv) {
            auto res = run_det_open(n, s, pv);
            if (!res) return;
            if (r.q == qd && !n.final.count(res->first)) return;
            Tree rhs = substitute(res->second, [&] {
                std::vector<Tree> args;
                for (const auto& [q, i] : calls) args.push_back(Tree::call(q, i));
                return args;
            }());
            std::vector<std::string> la = r.la;
            if (mc > 0 && la.empty()) la.assign(r.k, "");
            std::map<int, std::optional<Fta>> meet;
            for (int c = 0; c < mc; ++c) {
                int u = calls[c].second - 1;
                if (!meet.count(u)) meet[u] = la_of(m, r, u);
                meet[u] = la_meet(meet[u], dom_of(calls[c].first, pv[c]), m.in);
            }
            for (auto& [u, a] : meet) la[u] = intern_la(k, *a);
            k.rules.insert({r.q, r.a, r.k, rhs, la});
        });
    }
    return prune_td(k);
}

TdFtt compose_tdr(const TdFtt& m, const TdFtt& n) {
    auto fn = classify(n);
    bool mdet = classify(m).deterministic;
    if (!n.has_lookahead() && fn.pure && fn.total_deterministic) {
        TreeHom h = extract_hom(n);
        if (h.is_linear() || mdet) return compose_tdr_hom(m, h);
    }
    if (fn.qrel) return compose_tdr_tdqrel(m, n);
    if (fn.linear) {
        auto d = decompose_bu(ltr_to_lb(n));
        TdFtt q = lb_to_ltr(d.qrel);
        TdFtt k = compose_tdr_tdqrel(m, q);
        return compose_tdr_hom(k, d.hom);
    }
    if (mdet) {
        auto rl = remove_lookahead(n);
        TdFtt k = compose_tdr_dbqrel(m, rl.relabel);
        auto cl = decompose_td(rl.td);
        k = compose_tdr_hom(k, cl.copy);
        if (fn.deterministic) {
            auto dq = decompose_ldt(cl.linear);
            k = compose_tdr_tdqrel(k, dq.qrel);
            return compose_tdr_hom(k, dq.hom);
        }
        return compose_tdr(k, cl.linear);
    }
    throw Error(ErrorKind::FlagViolation,
                "cannot compose '" + m.name + "' with '" + n.name + "': second is not linear and first is not deterministic");
}

// ---- chains ----

std::vector<BuFtt> chain_to_bu(const std::vector<Piece>& chain) {
    std::vector<BuFtt> out;
    for (const auto& p : chain) {
        if (const auto* b = std::get_if<BuFtt>(&p)) {
            out.push_back(*b);
        } else if (const auto* t = std::get_if<TdFtt>(&p)) {
            if (classify(*t).linear) {
                out.push_back(ltr_to_lb(*t));
                continue;
            }
            TdFtt td = *t;
            if (td.has_lookahead()) {
                auto rl = remove_lookahead(td);
                out.push_back(rl.relabel);
                td = rl.td;
            }
            auto cl = decompose_td(td);
            out.push_back(embed_bu(cl.copy));
            out.push_back(ltr_to_lb(cl.linear));
        } else {
            std::visit(
                [&](const auto& x) {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (!std::is_same_v<T, BuFtt> && !std::is_same_v<T, TdFtt>) out.push_back(embed_bu(x));
                },
                p);
        }
    }
    return out;
}

std::vector<TdFtt> chain_to_tdr(const std::vector<Piece>& chain) {
    std::vector<TdFtt> out;
    for (const auto& p : chain) {
        if (const auto* t = std::get_if<TdFtt>(&p)) {
            out.push_back(*t);
        } else if (const auto* b = std::get_if<BuFtt>(&p)) {
            if (classify(*b).linear) {
                out.push_back(lb_to_ltr(*b));
                continue;
            }
            auto d = decompose_bu(*b);
            out.push_back(lb_to_ltr(d.qrel));
            out.push_back(embed_td(d.hom));
        } else {
            std::visit(
                [&](const auto& x) {
                    using T = std::decay_t<decltype(x)>;
                    if constexpr (!std::is_same_v<T, BuFtt> && !std::is_same_v<T, TdFtt>) out.push_back(embed_td(x));
                },
                p);
        }
    }
    return out;
}

std::vector<Piece> normalize_chain(const std::vector<Piece>& chain, ChainTarget target) {
    std::vector<Piece> out;
    if (target == ChainTarget::Bu)
        for (auto& b : chain_to_bu(chain)) out.push_back(std::move(b));
    else
        for (auto& t : chain_to_tdr(chain)) out.push_back(std::move(t));
    return out;
}

}  // namespace tl
