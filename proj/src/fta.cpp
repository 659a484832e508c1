#include "tl/fta.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace tl {

namespace {

// Visits every transition entry of symbol a with k children.
template <class F>
void for_entries(const Fta& a, const std::string& sym, int k, F&& f) {
    for (auto it = a.trans.lower_bound({sym, {}}); it != a.trans.end() && it->first.first == sym; ++it)
        if (static_cast<int>(it->first.second.size()) == k) f(it->first.second, it->second);
}

bool all_in(const StateVec& qs, const std::vector<StateSet>& sets) {
    for (std::size_t i = 0; i < qs.size(); ++i)
        if (!sets[i].count(qs[i])) return false;
    return true;
}

void require_same_alphabet(const Fta& a, const Fta& b) {
    if (!a.sigma.same_symbols(b.sigma))
        throw Error(ErrorKind::Invalid, "automata '" + a.name + "' and '" + b.name + "' have different alphabets");
}

}  // namespace

bool Fta::is_deterministic() const {
    for (const auto& a : sigma.of_rank(0)) {
        auto it = leaf.find(a);
        if (it == leaf.end() || it->second.size() != 1) return false;
    }
    for (const auto& [a, k] : sigma.entries()) {
        if (k == 0) continue;
        double count = 0;
        bool ok = true;
        for_entries(*this, a, k, [&](const StateVec& qs, const StateSet& ts) {
            if (ts.size() > 1) ok = false;
            if (ts.size() == 1) ++count;
            (void)qs;
        });
        if (!ok || count != std::pow(static_cast<double>(states.size()), k)) return false;
    }
    return true;
}

bool TdFta::is_deterministic() const {
    if (init.size() != 1) return false;
    for (const auto& [a, k] : sigma.entries()) {
        if (k == 0) continue;
        for (const auto& q : states) {
            auto it = trans.find({q, a, k});
            if (it == trans.end() || it->second.size() != 1) return false;
        }
    }
    return true;
}

bool Dfa::accepts(const Word& w) const {
    State q = start;
    for (const auto& a : w) {
        auto it = trans.find({q, a});
        if (it == trans.end()) return false;
        q = it->second;
    }
    return final.count(q) > 0;
}

std::string subset_name(const StateSet& s) {
    std::string out = "{";
    bool first = true;
    for (const auto& q : s) {
        if (!first) out += ",";
        first = false;
        out += q;
    }
    return out + "}";
}

std::string pair_name(const State& a, const State& b) { return "(" + a + "," + b + ")"; }

StateSet run_states(const Fta& a, const Tree& t, const std::vector<StateSet>& vars) {
    if (t.is_var()) return t.var <= static_cast<int>(vars.size()) ? vars[t.var - 1] : StateSet{};
    if (t.kids.empty()) {
        auto it = a.leaf.find(t.label);
        return it == a.leaf.end() ? StateSet{} : it->second;
    }
    std::vector<StateSet> kids;
    kids.reserve(t.kids.size());
    for (const auto& k : t.kids) {
        kids.push_back(run_states(a, k, vars));
        if (kids.back().empty()) return {};
    }
    StateSet out;
    for_entries(a, t.label, t.rank(), [&](const StateVec& qs, const StateSet& ts) {
        if (all_in(qs, kids)) out.insert(ts.begin(), ts.end());
    });
    return out;
}

StateSet run_states(const Fta& a, const Tree& t) { return run_states(a, t, {}); }

RunResult run(const Fta& a, const Tree& t) {
    RunResult r;
    r.states = run_states(a, t);
    for (const auto& q : r.states)
        if (a.final.count(q)) r.accepted = true;
    return r;
}

bool accepts(const Fta& a, const Tree& t) { return run(a, t).accepted; }

std::vector<std::pair<Tree, StateSet>> run_annotated(const Fta& a, const Tree& t) {
    std::vector<std::pair<Tree, StateSet>> out;
    std::function<void(const Tree&)> go = [&](const Tree& n) {
        out.emplace_back(n, run_states(a, n));
        for (const auto& k : n.kids) go(k);
    };
    go(t);
    return out;
}

StateSet run_states(const TdFta& a, const Tree& t) {
    if (t.kids.empty()) {
        auto it = a.leaf_final.find(t.label);
        return it == a.leaf_final.end() ? StateSet{} : it->second;
    }
    std::vector<StateSet> kids;
    for (const auto& k : t.kids) kids.push_back(run_states(a, k));
    StateSet out;
    for (const auto& q : a.states) {
        auto it = a.trans.find({q, t.label, t.rank()});
        if (it == a.trans.end()) continue;
        for (const auto& qs : it->second)
            if (all_in(qs, kids)) {
                out.insert(q);
                break;
            }
    }
    return out;
}

RunResult run(const TdFta& a, const Tree& t) {
    RunResult r;
    r.states = run_states(a, t);
    for (const auto& q : r.states)
        if (a.init.count(q)) r.accepted = true;
    return r;
}

bool accepts(const TdFta& a, const Tree& t) { return run(a, t).accepted; }

Fta determinize(const Fta& a) {
    std::set<StateSet> seen;
    std::vector<StateSet> list;
    auto add = [&](const StateSet& s) {
        if (seen.insert(s).second) list.push_back(s);
    };
    Fta d;
    d.name = a.name;
    d.sigma = a.sigma;
    for (const auto& sym : a.sigma.of_rank(0)) {
        auto it = a.leaf.find(sym);
        StateSet s = it == a.leaf.end() ? StateSet{} : it->second;
        add(s);
        d.leaf[sym] = {subset_name(s)};
    }
    std::map<std::pair<std::string, std::vector<StateSet>>, StateSet> computed;
    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<StateSet> snapshot = list;
        for (const auto& [sym, k] : a.sigma.entries()) {
            if (k == 0) continue;
            std::vector<std::vector<StateSet>> choices(k, snapshot);
            for_tuples(choices, [&](const std::vector<StateSet>& tuple) {
                auto key = std::make_pair(sym, tuple);
                if (computed.count(key)) return;
                StateSet target;
                for_entries(a, sym, k, [&](const StateVec& qs, const StateSet& ts) {
                    if (all_in(qs, tuple)) target.insert(ts.begin(), ts.end());
                });
                computed[key] = target;
                if (!seen.count(target)) changed = true;
                add(target);
            });
        }
    }
    for (const auto& s : list) {
        std::string n = subset_name(s);
        d.states.insert(n);
        for (const auto& q : s)
            if (a.final.count(q)) {
                d.final.insert(n);
                break;
            }
    }
    for (const auto& [key, target] : computed) {
        StateVec qs;
        for (const auto& s : key.second) qs.push_back(subset_name(s));
        d.trans[{key.first, qs}] = {subset_name(target)};
    }
    return d;
}

Fta complete(const Fta& a) {
    if (a.is_deterministic()) return a;
    bool single = true;
    for (const auto& [k, s] : a.leaf)
        if (s.size() > 1) single = false;
    for (const auto& [k, s] : a.trans)
        if (s.size() > 1) single = false;
    if (!single) return determinize(a);
    Fta c = a;
    State sink = fresh_name("sink", a.states);
    c.states.insert(sink);
    for (const auto& sym : a.sigma.of_rank(0))
        if (c.leaf[sym].empty()) c.leaf[sym] = {sink};
    std::vector<State> qs(c.states.begin(), c.states.end());
    for (const auto& [sym, k] : a.sigma.entries()) {
        if (k == 0) continue;
        std::vector<std::vector<State>> choices(k, qs);
        for_tuples(choices, [&](const StateVec& tuple) {
            auto& t = c.trans[{sym, tuple}];
            if (t.empty()) t = {sink};
        });
    }
    return c;
}

TdFta associate(const Fta& a) {
    TdFta t;
    t.name = a.name;
    t.sigma = a.sigma;
    t.states = a.states;
    t.init = a.final;
    t.leaf_final = a.leaf;
    for (const auto& [key, targets] : a.trans)
        for (const auto& q : targets) t.trans[{q, key.first, static_cast<int>(key.second.size())}].insert(key.second);
    return t;
}

Fta associate(const TdFta& a) {
    Fta f;
    f.name = a.name;
    f.sigma = a.sigma;
    f.states = a.states;
    f.final = a.init;
    for (const auto& [sym, qs] : a.leaf_final)
        if (!qs.empty()) f.leaf[sym] = qs;
    for (const auto& [key, tuples] : a.trans)
        for (const auto& qs : tuples) f.add_trans(std::get<1>(key), qs, std::get<0>(key));
    return f;
}

Fta td_to_bu(const TdFta& a) { return associate(a); }

Fta with_alphabet(const Fta& a, const RankedAlphabet& sigma) {
    Fta r = a;
    r.sigma = a.sigma.merged(sigma);
    return r;
}

Fta rename_compact(const Fta& a, const std::string& prefix) {
    std::map<State, State> m;
    int i = 0;
    for (const auto& q : a.states) m[q] = prefix + std::to_string(i++);
    Fta r;
    r.name = a.name;
    r.sigma = a.sigma;
    for (const auto& q : a.states) r.states.insert(m[q]);
    for (const auto& q : a.final) r.final.insert(m.at(q));
    for (const auto& [sym, qs] : a.leaf)
        for (const auto& q : qs) r.leaf[sym].insert(m.at(q));
    for (const auto& [key, ts] : a.trans) {
        StateVec qs;
        for (const auto& q : key.second) qs.push_back(m.at(q));
        auto& dst = r.trans[{key.first, qs}];
        for (const auto& q : ts) dst.insert(m.at(q));
    }
    return r;
}

static StateSet productive_states(const Fta& a) {
    StateSet prod;
    for (const auto& [sym, qs] : a.leaf) prod.insert(qs.begin(), qs.end());
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [key, ts] : a.trans) {
            bool ok = std::all_of(key.second.begin(), key.second.end(), [&](const State& q) { return prod.count(q); });
            if (!ok) continue;
            for (const auto& q : ts)
                if (prod.insert(q).second) changed = true;
        }
    }
    return prod;
}

Fta trim(const Fta& a) {
    StateSet prod = productive_states(a);
    StateSet co;
    for (const auto& q : a.final)
        if (prod.count(q)) co.insert(q);
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [key, ts] : a.trans) {
            bool ok = std::all_of(key.second.begin(), key.second.end(), [&](const State& q) { return prod.count(q); });
            if (!ok) continue;
            bool useful = std::any_of(ts.begin(), ts.end(), [&](const State& q) { return co.count(q); });
            if (!useful) continue;
            for (const auto& q : key.second)
                if (co.insert(q).second) changed = true;
        }
    }
    Fta r;
    r.name = a.name;
    r.sigma = a.sigma;
    r.states = co;
    for (const auto& q : a.final)
        if (co.count(q)) r.final.insert(q);
    for (const auto& [sym, qs] : a.leaf)
        for (const auto& q : qs)
            if (co.count(q)) r.leaf[sym].insert(q);
    for (const auto& [key, ts] : a.trans) {
        bool ok = std::all_of(key.second.begin(), key.second.end(), [&](const State& q) { return co.count(q); });
        if (!ok) continue;
        StateSet keep;
        for (const auto& q : ts)
            if (co.count(q)) keep.insert(q);
        if (!keep.empty()) r.trans[key] = keep;
    }
    return r;
}

Fta universal_fta(const RankedAlphabet& sigma) {
    Fta u;
    u.name = "All";
    u.sigma = sigma;
    u.states = {"u"};
    u.final = {"u"};
    for (const auto& [sym, k] : sigma.entries()) {
        if (k == 0) u.add_leaf(sym, "u");
        else u.add_trans(sym, StateVec(k, "u"), "u");
    }
    return u;
}

Fta empty_fta(const RankedAlphabet& sigma) {
    Fta e;
    e.name = "Empty";
    e.sigma = sigma;
    return e;
}

// Product automaton over transition-entry pairs; only reachable pairs are built.
static Fta product(const Fta& a, const Fta& b, const std::function<bool(bool, bool)>& fin) {
    Fta p;
    p.name = a.name + "_" + b.name;
    p.sigma = a.sigma;
    for (const auto& sym : a.sigma.of_rank(0)) {
        auto ia = a.leaf.find(sym);
        auto ib = b.leaf.find(sym);
        if (ia == a.leaf.end() || ib == b.leaf.end()) continue;
        for (const auto& x : ia->second)
            for (const auto& y : ib->second) p.add_leaf(sym, pair_name(x, y));
    }
    std::map<State, std::pair<State, State>> parts;
    auto note = [&](const State& x, const State& y) {
        std::string n = pair_name(x, y);
        parts[n] = {x, y};
        p.states.insert(n);
        return n;
    };
    for (const auto& sym : a.sigma.of_rank(0)) {
        auto ia = a.leaf.find(sym);
        auto ib = b.leaf.find(sym);
        if (ia == a.leaf.end() || ib == b.leaf.end()) continue;
        for (const auto& x : ia->second)
            for (const auto& y : ib->second) note(x, y);
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [ka, ta] : a.trans) {
            const auto& sym = ka.first;
            int k = static_cast<int>(ka.second.size());
            for_entries(b, sym, k, [&](const StateVec& qb, const StateSet& tb) {
                StateVec qs;
                for (int i = 0; i < k; ++i) {
                    std::string n = pair_name(ka.second[i], qb[i]);
                    if (!p.states.count(n)) return;
                    qs.push_back(n);
                }
                auto& dst = p.trans[{sym, qs}];
                for (const auto& x : ta)
                    for (const auto& y : tb) {
                        std::string n = note(x, y);
                        if (dst.insert(n).second) changed = true;
                    }
            });
        }
    }
    for (const auto& [n, xy] : parts)
        if (fin(a.final.count(xy.first) > 0, b.final.count(xy.second) > 0)) p.final.insert(n);
    return p;
}

Fta complement(const Fta& a) {
    Fta d = a.is_deterministic() ? a : complete(a);
    Fta c = d;
    c.final.clear();
    for (const auto& q : d.states)
        if (!d.final.count(q)) c.final.insert(q);
    return c;
}

Fta intersection(const Fta& a, const Fta& b) {
    require_same_alphabet(a, b);
    return product(a, b, [](bool x, bool y) { return x && y; });
}

Fta union_of(const Fta& a, const Fta& b) {
    require_same_alphabet(a, b);
    if (a.is_deterministic() && b.is_deterministic())
        return product(a, b, [](bool x, bool y) { return x || y; });
    Fta l = rename_compact(a, "l"), r = rename_compact(b, "r");
    Fta u = l;
    u.name = a.name + "_" + b.name;
    u.states.insert(r.states.begin(), r.states.end());
    u.final.insert(r.final.begin(), r.final.end());
    for (const auto& [sym, qs] : r.leaf) u.leaf[sym].insert(qs.begin(), qs.end());
    for (const auto& [key, ts] : r.trans) u.trans[key].insert(ts.begin(), ts.end());
    return u;
}

Fta boolean_op(const Fta& a, const Fta* b, BoolOp op) {
    switch (op) {
        case BoolOp::Complement:
            return complement(a);
        case BoolOp::Intersection:
            if (!b) throw Error(ErrorKind::Invalid, "intersection needs two automata");
            return intersection(a, *b);
        case BoolOp::Union:
            if (!b) throw Error(ErrorKind::Invalid, "union needs two automata");
            return union_of(a, *b);
    }
    return a;
}

namespace {
struct Best {
    Tree t;
    int h = 0;
    std::string p;
    bool operator<(const Best& o) const { return h != o.h ? h < o.h : p < o.p; }
};
}  // namespace

std::map<State, Tree> state_witnesses(const Fta& a) {
    std::map<State, Best> best;
    auto offer = [&](const State& q, const Best& c) {
        auto it = best.find(q);
        if (it == best.end() || c < it->second) {
            best[q] = c;
            return true;
        }
        return false;
    };
    for (const auto& [sym, qs] : a.leaf)
        for (const auto& q : qs) offer(q, Best{Tree(sym), 0, sym});
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [key, ts] : a.trans) {
            if (ts.empty()) continue;
            Best c;
            c.t = Tree(key.first);
            bool ok = true;
            for (const auto& q : key.second) {
                auto it = best.find(q);
                if (it == best.end()) {
                    ok = false;
                    break;
                }
                c.t.kids.push_back(it->second.t);
                c.h = std::max(c.h, it->second.h + 1);
            }
            if (!ok) continue;
            c.p = print(c.t);
            for (const auto& q : ts)
                if (offer(q, c)) changed = true;
        }
    }
    std::map<State, Tree> out;
    for (auto& [q, b] : best) out[q] = b.t;
    return out;
}

EmptinessResult decide_empty(const Fta& a) {
    auto w = state_witnesses(a);
    EmptinessResult r;
    for (const auto& q : a.final) {
        auto it = w.find(q);
        if (it == w.end()) continue;
        if (!r.witness || canonical_less(it->second, *r.witness)) r.witness = it->second;
    }
    r.empty = !r.witness.has_value();
    return r;
}

bool decide_finite(const Fta& a) {
    Fta t = trim(a);
    std::map<State, StateSet> edges;
    for (const auto& [key, ts] : t.trans)
        for (const auto& q : key.second) edges[q].insert(ts.begin(), ts.end());
    std::map<State, int> color;
    std::function<bool(const State&)> cyclic = [&](const State& q) {
        color[q] = 1;
        for (const auto& r : edges[q]) {
            int c = color[r];
            if (c == 1) return true;
            if (c == 0 && cyclic(r)) return true;
        }
        color[q] = 2;
        return false;
    };
    for (const auto& q : t.states)
        if (color[q] == 0 && cyclic(q)) return false;
    return true;
}

InclusionResult decide_inclusion(const Fta& a, const Fta& b) {
    RankedAlphabet sigma = a.sigma.merged(b.sigma);
    Fta x = with_alphabet(a, sigma), y = with_alphabet(b, sigma);
    auto e = decide_empty(intersection(x, complement(y)));
    InclusionResult r;
    r.included = e.empty;
    r.counterexample = e.witness;
    return r;
}

bool decide_equivalent(const Fta& a, const Fta& b) {
    return decide_inclusion(a, b).included && decide_inclusion(b, a).included;
}

static Tree replace_at(const Tree& t, const std::vector<int>& path, std::size_t depth, const Tree& with) {
    if (depth == 0) return with;
    Tree r = t;
    Tree* n = &r;
    for (std::size_t d = 0; d + 1 < depth; ++d) n = &n->kids[path[d]];
    n->kids[path[depth - 1]] = with;
    return r;
}

Pumping pump(const Fta& a0, const Tree& t) {
    Fta a = a0.is_deterministic() ? a0 : determinize(a0);
    int p = static_cast<int>(a.states.size());
    if (!accepts(a, t)) throw Error(ErrorKind::Invalid, "tree is not accepted: " + print(t));
    int h = height_of(t);
    if (h < p) throw Error(ErrorKind::Invalid, "tree height " + std::to_string(h) + " is below " + std::to_string(p));
    std::vector<int> path;
    std::vector<const Tree*> nodes{&t};
    while (!nodes.back()->kids.empty()) {
        const Tree* n = nodes.back();
        int best = 0;
        for (int i = 1; i < n->rank(); ++i)
            if (height_of(n->kids[i]) > height_of(n->kids[best])) best = i;
        path.push_back(best);
        nodes.push_back(&n->kids[best]);
    }
    // s_i is the subtree at depth h - i + 1, for i = 1..p+1.
    std::vector<State> r(p + 2);
    for (int i = 1; i <= p + 1; ++i) r[i] = *run_states(a, *nodes[h - i + 1]).begin();
    for (int j = 2; j <= p + 1; ++j)
        for (int i = 1; i < j; ++i) {
            if (r[i] != r[j]) continue;
            Pumping pm;
            std::size_t di = h - i + 1, dj = h - j + 1;
            pm.w = *nodes[di];
            std::vector<int> sub(path.begin() + dj, path.end());
            pm.v = replace_at(*nodes[dj], sub, di - dj, Tree::variable(1));
            pm.u = replace_at(t, path, dj, Tree::variable(1));
            return pm;
        }
    throw Error(ErrorKind::Invalid, "no repeated state found");
}

Tree pumped(const Pumping& p, int n) {
    Tree mid = Tree::variable(1);
    for (int i = 0; i < n; ++i) mid = substitute(p.v, {mid});
    return substitute(p.u, {substitute(mid, {p.w})});
}

Fta yield_in_regular(const RankedAlphabet& sigma, const Dfa& m) {
    Fta f;
    f.name = m.name + "_yield";
    f.sigma = sigma;
    std::vector<State> qs(m.states.begin(), m.states.end());
    for (const auto& p : qs)
        for (const auto& q : qs) f.states.insert(pair_name(p, q));
    for (const auto& a : sigma.of_rank(0)) {
        for (const auto& p : qs) {
            if (a == "e") {
                f.add_leaf(a, pair_name(p, p));
                continue;
            }
            auto it = m.trans.find({p, a});
            if (it != m.trans.end()) f.add_leaf(a, pair_name(p, it->second));
        }
    }
    for (const auto& [a, k] : sigma.entries()) {
        if (k == 0) continue;
        std::vector<std::vector<State>> choices(k + 1, qs);
        for_tuples(choices, [&](const StateVec& chain) {
            StateVec kids;
            for (int i = 0; i < k; ++i) kids.push_back(pair_name(chain[i], chain[i + 1]));
            f.add_trans(a, kids, pair_name(chain[0], chain[k]));
        });
    }
    for (const auto& q : m.final) f.final.insert(pair_name(m.start, q));
    return f;
}

Fta finite_language_fta(const TreeSet& ts, const RankedAlphabet* sigma) {
    Fta f;
    f.name = "Finite";
    std::map<Tree, State> names;
    std::function<State(const Tree&)> go = [&](const Tree& t) -> State {
        auto it = names.find(t);
        if (it != names.end()) return it->second;
        StateVec kids;
        for (const auto& k : t.kids) kids.push_back(go(k));
        State q = "t" + std::to_string(names.size());
        names[t] = q;
        f.states.insert(q);
        if (kids.empty()) f.add_leaf(t.label, q);
        else f.add_trans(t.label, kids, q);
        if (!sigma) f.sigma.add(t.label, t.rank());
        return q;
    };
    for (const auto& t : ts) f.final.insert(go(t));
    if (sigma) f.sigma = *sigma;
    return f;
}

Dfa word_dfa(const Word& w, const std::vector<std::string>& alphabet) {
    Dfa d;
    d.name = "Word";
    d.alphabet = alphabet;
    for (std::size_t i = 0; i <= w.size(); ++i) d.states.insert("s" + std::to_string(i));
    d.states.insert("dead");
    d.start = "s0";
    d.final = {"s" + std::to_string(w.size())};
    for (const auto& q : d.states)
        for (const auto& a : alphabet) d.trans[{q, a}] = "dead";
    for (std::size_t i = 0; i < w.size(); ++i) d.trans[{"s" + std::to_string(i), w[i]}] = "s" + std::to_string(i + 1);
    return d;
}

Dfa all_words_dfa(const std::vector<std::string>& alphabet) {
    Dfa d;
    d.name = "All";
    d.alphabet = alphabet;
    d.states = {"s"};
    d.start = "s";
    d.final = {"s"};
    for (const auto& a : alphabet) d.trans[{"s", a}] = "s";
    return d;
}

// Builds, height by height, the trees of height at most h reaching each state.
std::vector<Tree> accepted_trees(const Fta& a, int max_height, std::size_t cap) {
    StateSet useful = a.final;
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& [key, qs] : a.trans)
            if (std::any_of(qs.begin(), qs.end(), [&](const State& q) { return useful.count(q) > 0; }))
                for (const auto& p : key.second) changed |= useful.insert(p).second;
    }
    std::map<State, TreeSet> by_state;
    for (const auto& [sym, qs] : a.leaf)
        for (const auto& q : qs)
            if (useful.count(q)) by_state[q].insert(Tree(sym));
    for (int h = 1; h <= max_height; ++h) {
        std::map<State, TreeSet> next = by_state;
        std::size_t total = 0;
        for (const auto& [q, ts] : next) total += ts.size();
        for (const auto& [key, qs] : a.trans) {
            std::vector<std::vector<Tree>> choices;
            for (const auto& p : key.second) {
                auto it = by_state.find(p);
                choices.emplace_back();
                if (it != by_state.end()) choices.back().assign(it->second.begin(), it->second.end());
            }
            for_tuples(choices, [&](const std::vector<Tree>& kids) {
                Tree t(key.first, kids);
                for (const auto& q : qs)
                    if (useful.count(q)) total += next[q].insert(t).second;
                if (total > cap) throw Error(ErrorKind::CapExceeded, "enumeration to height " + std::to_string(max_height) + " exceeds cap " + std::to_string(cap));
            });
        }
        by_state = std::move(next);
    }
    TreeSet out;
    for (const auto& q : a.final)
        if (auto it = by_state.find(q); it != by_state.end()) out.insert(it->second.begin(), it->second.end());
    return canonical_sorted(out);
}

}  // namespace tl
