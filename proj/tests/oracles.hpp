#pragma once

// Brute-force reference implementations used to cross-check the library, and
// random fixture generators. The reference checks use only the data types.

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tl/fta.hpp"
#include "tl/lang_types.hpp"
#include "tl/transduce.hpp"

namespace oracle {

using namespace tl;

struct Rng {
    std::mt19937 g;
    explicit Rng(unsigned seed) : g(seed) {}
    int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }
    bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(g); }
    template <class C>
    const typename C::value_type& pick(const C& c) {
        auto it = c.begin();
        std::advance(it, uniform(0, static_cast<int>(c.size()) - 1));
        return *it;
    }
};

inline RankedAlphabet alphabet(std::initializer_list<std::pair<const char*, int>> xs, const std::string& name = "") {
    RankedAlphabet a;
    a.name = name;
    for (auto& [s, r] : xs) a.add(s, r);
    return a;
}

inline std::vector<std::pair<std::string, int>> symbols(const RankedAlphabet& a) {
    std::vector<std::pair<std::string, int>> out;
    for (const auto& [s, rs] : a.ranks)
        for (int r : rs) out.push_back({s, r});
    return out;
}

// Every tree of height at most h.
inline std::vector<Tree> all_trees(const RankedAlphabet& sigma, int h) {
    std::vector<Tree> cur;
    for (auto& [s, r] : symbols(sigma))
        if (r == 0) cur.emplace_back(s);
    for (int level = 1; level <= h; ++level) {
        std::vector<Tree> next;
        for (auto& [s, r] : symbols(sigma)) {
            if (r == 0) {
                next.emplace_back(s);
                continue;
            }
            std::vector<std::size_t> idx(r, 0);
            while (true) {
                Tree t(s);
                for (auto i : idx) t.kids.push_back(cur[i]);
                next.push_back(t);
                int p = r - 1;
                while (p >= 0 && ++idx[p] == cur.size()) idx[p--] = 0;
                if (p < 0 || cur.empty()) break;
            }
        }
        cur = next;
    }
    return cur;
}

inline Tree random_tree(Rng& rng, const RankedAlphabet& sigma, int h) {
    auto syms = symbols(sigma);
    std::vector<std::pair<std::string, int>> leaves, inner;
    for (auto& e : syms) (e.second == 0 ? leaves : inner).push_back(e);
    if (h == 0 || inner.empty() || rng.coin(0.3)) return Tree(rng.pick(leaves).first);
    auto [s, r] = rng.pick(inner);
    Tree t(s);
    for (int i = 0; i < r; ++i) t.kids.push_back(random_tree(rng, sigma, h - 1));
    return t;
}

inline int height(const Tree& t) {
    int h = 0;
    for (auto& k : t.kids) h = std::max(h, 1 + height(k));
    return h;
}

inline Word yield(const Tree& t) {
    if (t.kids.empty()) return t.label == "e" ? Word{} : Word{t.label};
    Word w;
    for (auto& k : t.kids) {
        Word x = yield(k);
        w.insert(w.end(), x.begin(), x.end());
    }
    return w;
}

// ---- automata ----

inline std::set<State> nbu_states(const Fta& a, const Tree& t) {
    std::set<State> out;
    if (t.kids.empty()) {
        if (auto it = a.leaf.find(t.label); it != a.leaf.end()) out = it->second;
        return out;
    }
    std::vector<std::set<State>> ks;
    for (auto& k : t.kids) ks.push_back(nbu_states(a, k));
    for (const auto& [key, qs] : a.trans) {
        if (key.first != t.label || key.second.size() != t.kids.size()) continue;
        bool ok = true;
        for (std::size_t i = 0; i < ks.size() && ok; ++i) ok = ks[i].count(key.second[i]) > 0;
        if (ok) out.insert(qs.begin(), qs.end());
    }
    return out;
}

inline bool nbu_accepts(const Fta& a, const Tree& t) {
    for (auto& q : nbu_states(a, t))
        if (a.final.count(q)) return true;
    return false;
}

inline Fta random_nbu(Rng& rng, const RankedAlphabet& sigma, int nstates, double density = 0.35) {
    Fta a;
    a.sigma = sigma;
    std::vector<State> qs;
    for (int i = 0; i < nstates; ++i) qs.push_back("q" + std::to_string(i));
    a.states = StateSet(qs.begin(), qs.end());
    for (auto& q : qs)
        if (rng.coin(0.4)) a.final.insert(q);
    for (auto& [s, r] : symbols(sigma)) {
        if (r == 0) {
            for (auto& q : qs)
                if (rng.coin(density + 0.1)) a.add_leaf(s, q);
            continue;
        }
        std::vector<std::size_t> idx(r, 0);
        while (true) {
            StateVec v;
            for (auto i : idx) v.push_back(qs[i]);
            for (auto& q : qs)
                if (rng.coin(density / r)) a.add_trans(s, v, q);
            int p = r - 1;
            while (p >= 0 && ++idx[p] == qs.size()) idx[p--] = 0;
            if (p < 0) break;
        }
    }
    return a;
}

// ---- homomorphisms ----

inline Tree subst_vars(const Tree& t, const std::vector<Tree>& args) {
    if (t.is_var()) return args.at(t.var - 1);
    Tree out(t.label);
    for (auto& k : t.kids) out.kids.push_back(subst_vars(k, args));
    return out;
}

inline Tree hom_apply(const TreeHom& h, const Tree& t) {
    std::vector<Tree> args;
    for (auto& k : t.kids) args.push_back(hom_apply(h, k));
    return subst_vars(h.map.at({t.label, t.rank()}), args);
}

inline int count_var(const Tree& t, int i) {
    int n = t.is_var() && t.var == i ? 1 : 0;
    for (auto& k : t.kids) n += count_var(k, i);
    return n;
}

// Random output tree with variable leaves x1..xk; linear/nondeleting enforced
// by rejection.
inline Tree random_rhs(Rng& rng, const RankedAlphabet& out, int k, int h, bool linear, bool nondeleting,
                       const std::function<Tree(int)>& leaf_var) {
    auto syms = symbols(out);
    std::vector<std::pair<std::string, int>> leaves, inner;
    for (auto& e : syms) (e.second == 0 ? leaves : inner).push_back(e);
    std::function<Tree(int)> gen = [&](int d) -> Tree {
        bool leaf = d == 0 || inner.empty() || rng.coin(0.45);
        if (leaf) {
            if (k > 0 && (leaves.empty() || rng.coin(0.6))) return leaf_var(rng.uniform(1, k));
            return Tree(rng.pick(leaves).first);
        }
        auto [s, r] = rng.pick(inner);
        Tree t(s);
        for (int i = 0; i < r; ++i) t.kids.push_back(gen(d - 1));
        return t;
    };
    auto uses = [](const Tree& t, int i) {
        std::function<int(const Tree&)> c = [&](const Tree& u) {
            int n = u.var == i ? 1 : 0;
            for (auto& x : u.kids) n += c(x);
            return n;
        };
        return c(t);
    };
    for (int attempt = 0; attempt < 400; ++attempt) {
        Tree t = gen(h);
        bool ok = true;
        for (int i = 1; i <= k && ok; ++i) {
            int n = uses(t, i);
            if (linear && n > 1) ok = false;
            if (nondeleting && n == 0) ok = false;
        }
        if (ok) return t;
    }
    // Fallback: a symbol of rank k over x1..xk, which is linear and nondeleting.
    for (auto& [s, r] : inner)
        if (r == k) {
            Tree t(s);
            for (int i = 1; i <= k; ++i) t.kids.push_back(leaf_var(i));
            return t;
        }
    return k == 0 ? Tree(rng.pick(leaves).first) : leaf_var(1);
}

inline TreeHom random_hom(Rng& rng, const RankedAlphabet& from, const RankedAlphabet& to, bool linear, bool nondeleting,
                          bool growing = false) {
    TreeHom h;
    h.from = from;
    h.to = to;
    for (auto& [s, r] : symbols(from)) {
        Tree img;
        do {
            img = random_rhs(rng, to, r, 2, linear, nondeleting, [](int i) { return Tree::variable(i); });
        } while (growing && r > 0 && img.is_var());
        h.map[{s, r}] = img;
    }
    return h;
}

// ---- grammars ----

// Nonterminals that derive each subtree, computed bottom-up with a local fixpoint
// for chain rules.
inline bool rtg_member(const Rtg& g, const Tree& t) {
    std::map<Tree, std::set<std::string>> memo;
    std::function<const std::set<std::string>&(const Tree&)> derives;
    std::function<bool(const Tree&, const Tree&, const std::set<std::string>&, bool)> match =
        [&](const Tree& s, const Tree& u, const std::set<std::string>& cur, bool top) -> bool {
        if (s.kids.empty() && g.nonterminals.count(s.label)) return (top ? cur : derives(u)).count(s.label) > 0;
        if (s.label != u.label || s.kids.size() != u.kids.size()) return false;
        for (std::size_t i = 0; i < s.kids.size(); ++i)
            if (!match(s.kids[i], u.kids[i], cur, false)) return false;
        return true;
    };
    derives = [&](const Tree& u) -> const std::set<std::string>& {
        if (auto it = memo.find(u); it != memo.end()) return it->second;
        for (auto& k : u.kids) derives(k);
        std::set<std::string> cur;
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& [a, s] : g.rules)
                if (!cur.count(a) && match(s, u, cur, true)) cur.insert(a), changed = true;
        }
        return memo[u] = cur;
    };
    return derives(t).count(g.start) > 0;
}

inline std::set<Word> concat_bounded(const std::set<Word>& a, const std::set<Word>& b, std::size_t len) {
    std::set<Word> out;
    for (auto& x : a)
        for (auto& y : b)
            if (x.size() + y.size() <= len) {
                Word w = x;
                w.insert(w.end(), y.begin(), y.end());
                out.insert(w);
            }
    return out;
}

// All strings of length at most len derivable from the start symbol.
inline std::set<Word> cfg_strings(const Cfg& g, std::size_t len) {
    std::map<std::string, std::set<Word>> lang;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [a, w] : g.rules) {
            std::set<Word> acc = {Word{}};
            for (auto& s : w) acc = concat_bounded(acc, g.nonterminals.count(s) ? lang[s] : std::set<Word>{Word{s}}, len);
            for (auto& x : acc) changed |= lang[a].insert(x).second;
        }
    }
    return lang[g.start];
}

// Yields (with e as the empty word) of length at most len of the trees of g.
inline std::set<Word> rtg_yields(const Rtg& g, std::size_t len) {
    std::map<std::string, std::set<Word>> lang;
    std::function<std::set<Word>(const Tree&)> of = [&](const Tree& t) -> std::set<Word> {
        if (t.kids.empty()) {
            if (g.nonterminals.count(t.label)) return lang[t.label];
            return {t.label == "e" ? Word{} : Word{t.label}};
        }
        std::set<Word> acc = {Word{}};
        for (auto& k : t.kids) acc = concat_bounded(acc, of(k), len);
        return acc;
    };
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [a, t] : g.rules)
            for (auto& x : of(t)) changed |= lang[a].insert(x).second;
    }
    return lang[g.start];
}

// Bare trees (inner nodes '*', empty right sides as *[e]) of height at most h.
inline std::set<Tree> bare_trees(const Cfg& g, int h) {
    std::map<std::string, std::set<Tree>> lang;
    for (int round = 0; round < h; ++round) {
        std::map<std::string, std::set<Tree>> next = lang;
        for (const auto& [a, w] : g.rules) {
            std::vector<std::set<Tree>> choices;
            for (auto& s : w) {
                if (g.nonterminals.count(s)) choices.push_back(lang[s]);
                else choices.push_back({Tree(s)});
            }
            if (w.empty()) choices.push_back({Tree("e")});
            std::vector<Tree> acc = {Tree("*")};
            for (auto& c : choices) {
                std::vector<Tree> n2;
                for (auto& t : acc)
                    for (auto& k : c) {
                        Tree u = t;
                        u.kids.push_back(k);
                        n2.push_back(u);
                    }
                acc = n2;
            }
            for (auto& t : acc) next[a].insert(t);
        }
        lang = next;
    }
    return lang[g.start];
}

inline Cfg random_cfg(Rng& rng, int nonterminals, int rules_per, int max_len) {
    Cfg g;
    g.terminals = {"a", "b"};
    std::vector<std::string> ns;
    for (int i = 0; i < nonterminals; ++i) ns.push_back(std::string(1, static_cast<char>('S' + i)));
    g.nonterminals = std::set<std::string>(ns.begin(), ns.end());
    g.start = ns[0];
    std::vector<std::string> all = ns;
    all.push_back("a");
    all.push_back("b");
    for (auto& a : ns) {
        int n = rng.uniform(1, rules_per);
        for (int i = 0; i < n; ++i) {
            Word w;
            int l = rng.uniform(0, max_len);
            for (int j = 0; j < l; ++j) w.push_back(rng.pick(all));
            if (w.empty() && rng.coin(0.5)) w.push_back("a");
            g.rules.push_back({a, w});
        }
    }
    return g;
}

// ---- transducers: exhaustive rewriting search ----

inline const std::string kIn = "\x02";
inline const std::string kSt = "\x01";

inline Tree mark_input(const Tree& t) {
    Tree out(kIn + t.label);
    for (auto& k : t.kids) out.kids.push_back(mark_input(k));
    return out;
}

inline Tree unmark(const Tree& t) {
    Tree out(t.label.rfind(kIn, 0) == 0 ? t.label.substr(1) : t.label);
    for (auto& k : t.kids) out.kids.push_back(unmark(k));
    return out;
}

inline bool is_output(const Tree& t) {
    if (t.label.rfind(kIn, 0) == 0 || t.label.rfind(kSt, 0) == 0) return false;
    for (auto& k : t.kids)
        if (!is_output(k)) return false;
    return true;
}

// Applies f at every node; f returns the rewrites of that node.
inline void rewrite_everywhere(const Tree& t, const std::function<std::vector<Tree>(const Tree&)>& f,
                               std::vector<Tree>& out) {
    for (auto& r : f(t)) out.push_back(r);
    for (std::size_t i = 0; i < t.kids.size(); ++i) {
        std::vector<Tree> sub;
        rewrite_everywhere(t.kids[i], f, sub);
        for (auto& s : sub) {
            Tree u = t;
            u.kids[i] = s;
            out.push_back(u);
        }
    }
}

inline TreeSet search(const std::vector<Tree>& starts, const std::function<std::vector<Tree>(const Tree&)>& step,
                      const std::function<std::optional<Tree>(const Tree&)>& final_form) {
    std::set<Tree> seen(starts.begin(), starts.end());
    std::deque<Tree> todo(starts.begin(), starts.end());
    TreeSet out;
    while (!todo.empty()) {
        Tree t = todo.front();
        todo.pop_front();
        if (auto f = final_form(t)) out.insert(*f);
        std::vector<Tree> next;
        rewrite_everywhere(t, step, next);
        for (auto& n : next)
            if (seen.insert(n).second) todo.push_back(n);
    }
    return out;
}

inline TreeSet rewrite_bu(const BuFtt& m, const Tree& input) {
    auto step = [&](const Tree& t) {
        std::vector<Tree> out;
        if (t.label.rfind(kIn, 0) != 0) return out;
        std::string a = t.label.substr(1);
        StateVec qs;
        std::vector<Tree> args;
        for (auto& k : t.kids) {
            if (k.label.rfind(kSt, 0) != 0) return out;
            qs.push_back(k.label.substr(1));
            args.push_back(k.kids[0]);
        }
        for (auto& r : m.rules)
            if (r.a == a && r.qs == qs) out.push_back(Tree(kSt + r.q, {subst_vars(r.rhs, args)}));
        return out;
    };
    auto fin = [&](const Tree& t) -> std::optional<Tree> {
        if (t.label.rfind(kSt, 0) == 0 && m.final.count(t.label.substr(1)) && is_output(t.kids[0])) return t.kids[0];
        return std::nullopt;
    };
    return search({mark_input(input)}, step, fin);
}

inline TreeSet rewrite_td(const TdFtt& m, const Tree& input) {
    std::function<Tree(const Tree&, const std::vector<Tree>&)> inst = [&](const Tree& rhs, const std::vector<Tree>& args) {
        if (rhs.is_call()) return Tree(kSt + rhs.label, {args.at(rhs.var - 1)});
        Tree out(rhs.label);
        for (auto& k : rhs.kids) out.kids.push_back(inst(k, args));
        return out;
    };
    auto step = [&](const Tree& t) {
        std::vector<Tree> out;
        if (t.label.rfind(kSt, 0) != 0) return out;
        const Tree& sub = t.kids[0];
        if (sub.label.rfind(kIn, 0) != 0) return out;
        std::string q = t.label.substr(1), a = sub.label.substr(1);
        for (auto& r : m.rules) {
            if (r.q != q || r.a != a || r.k != sub.rank()) continue;
            bool ok = true;
            for (std::size_t i = 0; i < r.la.size() && ok; ++i)
                if (!r.la[i].empty()) ok = nbu_accepts(m.lookahead.at(r.la[i]), unmark(sub.kids[i]));
            if (ok) out.push_back(inst(r.rhs, sub.kids));
        }
        return out;
    };
    auto fin = [&](const Tree& t) -> std::optional<Tree> {
        if (is_output(t)) return t;
        return std::nullopt;
    };
    std::vector<Tree> starts;
    for (auto& q : m.init) starts.push_back(Tree(kSt + q, {mark_input(input)}));
    return search(starts, step, fin);
}

// ---- random transducers ----

struct BuOpts {
    bool linear = false, nondeleting = false, deterministic = false, qrel = false;
    int states = 2;
    double density = 0.5;
};

inline BuFtt random_bu(Rng& rng, const RankedAlphabet& in, const RankedAlphabet& out, BuOpts o) {
    BuFtt m;
    m.in = in;
    m.out = out;
    std::vector<State> qs;
    for (int i = 0; i < o.states; ++i) qs.push_back("p" + std::to_string(i));
    m.states = StateSet(qs.begin(), qs.end());
    for (auto& q : qs)
        if (rng.coin(0.6)) m.final.insert(q);
    if (m.final.empty()) m.final.insert(qs[0]);
    for (auto& [s, r] : symbols(in)) {
        std::vector<std::size_t> idx(r, 0);
        while (true) {
            StateVec v;
            for (auto i : idx) v.push_back(qs[i]);
            int n = o.deterministic ? (rng.coin(0.8) ? 1 : 0) : (rng.coin(o.density) ? rng.uniform(1, 2) : 0);
            if (r == 0 && n == 0) n = 1;
            for (int j = 0; j < n; ++j) {
                BuRule rule{s, v, rng.pick(qs), Tree()};
                if (o.qrel) {
                    auto cands = out.of_rank(r);
                    if (cands.empty()) continue;
                    Tree t(rng.pick(cands));
                    for (int i = 1; i <= r; ++i) t.kids.push_back(Tree::variable(i));
                    rule.rhs = t;
                } else {
                    rule.rhs = random_rhs(rng, out, r, 2, o.linear, o.nondeleting, [](int i) { return Tree::variable(i); });
                }
                m.rules.insert(rule);
            }
            int p = r - 1;
            while (p >= 0 && ++idx[p] == qs.size()) idx[p--] = 0;
            if (p < 0) break;
        }
    }
    return m;
}

struct TdOpts {
    bool linear = false, nondeleting = false, deterministic = false, lookahead = false, qrel = false;
    int states = 2;
    double density = 0.6;
};

inline TdFtt random_td(Rng& rng, const RankedAlphabet& in, const RankedAlphabet& out, TdOpts o) {
    TdFtt m;
    m.in = in;
    m.out = out;
    std::vector<State> qs;
    for (int i = 0; i < o.states; ++i) qs.push_back("r" + std::to_string(i));
    m.states = StateSet(qs.begin(), qs.end());
    m.init.insert(qs[0]);
    if (!o.deterministic && rng.coin(0.3)) m.init.insert(rng.pick(qs));
    std::vector<std::string> las;
    if (o.lookahead) {
        for (int i = 0; i < 2; ++i) {
            Fta a = random_nbu(rng, in, 2, 0.5);
            std::string n = "D" + std::to_string(i);
            a.name = n;
            m.lookahead[n] = a;
            las.push_back(n);
            // The complement keeps deterministic rule pairs disjoint.
            Fta c = complement(a);
            c.name = n + "c";
            m.lookahead[n + "c"] = c;
        }
    }
    for (auto& q : qs)
        for (auto& [s, r] : symbols(in)) {
            int n = rng.coin(o.density) ? (o.deterministic ? 1 : rng.uniform(1, 2)) : 0;
            if (r == 0 && n == 0 && rng.coin(0.7)) n = 1;
            bool split = o.deterministic && o.lookahead && r > 0 && n == 1 && rng.coin(0.5);
            std::string la_name = split || (o.lookahead && rng.coin(0.4) && r > 0) ? rng.pick(las) : "";
            int la_var = r > 0 ? rng.uniform(0, r - 1) : 0;
            for (int j = 0; j < n + (split ? 1 : 0); ++j) {
                TdRule rule{q, s, r, Tree(), {}};
                if (o.qrel) {
                    auto cands = out.of_rank(r);
                    if (cands.empty()) continue;
                    Tree t(rng.pick(cands));
                    for (int i = 1; i <= r; ++i) t.kids.push_back(Tree::call(rng.pick(qs), i));
                    rule.rhs = t;
                } else {
                    rule.rhs = random_rhs(rng, out, r, 2, o.linear, o.nondeleting,
                                          [&](int i) { return Tree::call(rng.pick(qs), i); });
                }
                if (!la_name.empty()) {
                    rule.la.assign(r, "");
                    rule.la[la_var] = split && j == 1 ? la_name + "c" : la_name;
                }
                m.rules.insert(rule);
            }
        }
    std::set<std::string> used;
    for (auto& r : m.rules)
        for (auto& n : r.la)
            if (!n.empty()) used.insert(n);
    for (auto it = m.lookahead.begin(); it != m.lookahead.end();)
        it = used.count(it->first) ? std::next(it) : m.lookahead.erase(it);
    return m;
}

inline TreeSet apply_then(const std::function<TreeSet(const Tree&)>& first, const std::function<TreeSet(const Tree&)>& second,
                          const Tree& t) {
    TreeSet out;
    for (auto& s : first(t))
        for (auto& u : second(s)) out.insert(u);
    return out;
}

}  // namespace oracle
