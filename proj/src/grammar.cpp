#include "tl/grammar.hpp"

#include <algorithm>
#include <functional>

#include "tl/langops.hpp"

namespace tl {

namespace {

bool is_nt_leaf(const Rtg& g, const Tree& t) {
    return t.kids.empty() && t.var == 0 && g.nonterminals.count(t.label);
}

std::set<std::string> taken_names(const Rtg& g) {
    std::set<std::string> s = g.nonterminals;
    for (const auto& [sym, rs] : g.sigma.ranks) s.insert(sym);
    return s;
}

}  // namespace

std::vector<Tree> enumerate_rtg(const Rtg& g, int max_height, std::size_t cap) {
    std::map<std::string, std::map<Tree, int>> lang;
    std::size_t total = 0;
    std::function<std::map<Tree, int>(const Tree&, int)> expand = [&](const Tree& t, int budget) {
        std::map<Tree, int> out;
        if (is_nt_leaf(g, t)) {
            for (const auto& [s, h] : lang[t.label])
                if (h <= budget) out.emplace(s, h);
            return out;
        }
        if (t.kids.empty()) {
            out.emplace(t, 0);
            return out;
        }
        if (budget == 0) return out;
        std::vector<std::vector<std::pair<Tree, int>>> parts;
        for (const auto& k : t.kids) {
            auto e = expand(k, budget - 1);
            if (e.empty()) return out;
            parts.emplace_back(e.begin(), e.end());
        }
        std::vector<std::size_t> idx(parts.size(), 0);
        while (true) {
            Tree n(t.label);
            int h = 0;
            for (std::size_t i = 0; i < parts.size(); ++i) {
                n.kids.push_back(parts[i][idx[i]].first);
                h = std::max(h, parts[i][idx[i]].second + 1);
            }
            out.emplace(std::move(n), h);
            if (out.size() > cap) throw Error(ErrorKind::CapExceeded, "grammar enumeration exceeds cap");
            int p = static_cast<int>(parts.size()) - 1;
            while (p >= 0 && ++idx[p] == parts[p].size()) idx[p--] = 0;
            if (p < 0) break;
        }
        return out;
    };
    for (int h = 0; h <= max_height; ++h) {
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& [a, rhs] : g.rules) {
                for (auto& [t, th] : expand(rhs, h)) {
                    if (lang[a].emplace(t, th).second) {
                        changed = true;
                        if (++total > cap) throw Error(ErrorKind::CapExceeded, "grammar enumeration exceeds cap");
                    }
                }
            }
        }
    }
    TreeSet result;
    for (const auto& [t, h] : lang[g.start]) result.insert(t);
    return canonical_sorted(result);
}

bool is_normal_form(const Rtg& g) {
    for (const auto& [a, rhs] : g.rules) {
        if (rhs.var || g.nonterminals.count(rhs.label)) return false;
        for (const auto& k : rhs.kids)
            if (!is_nt_leaf(g, k)) return false;
    }
    return true;
}

Rtg remove_chain_rules(const Rtg& g) {
    std::map<std::string, std::set<std::string>> closure;
    for (const auto& a : g.nonterminals) {
        std::set<std::string> seen{a};
        std::vector<std::string> work{a};
        while (!work.empty()) {
            std::string b = work.back();
            work.pop_back();
            for (auto it = g.rules.lower_bound({b, Tree()}); it != g.rules.end() && it->first == b; ++it)
                if (is_nt_leaf(g, it->second) && seen.insert(it->second.label).second) work.push_back(it->second.label);
        }
        closure[a] = seen;
    }
    Rtg r = g;
    r.rules.clear();
    for (const auto& a : g.nonterminals)
        for (const auto& b : closure[a])
            for (auto it = g.rules.lower_bound({b, Tree()}); it != g.rules.end() && it->first == b; ++it)
                if (!is_nt_leaf(g, it->second)) r.rules.insert({a, it->second});
    return r;
}

Rtg normalize_rtg(const Rtg& g0) {
    Rtg g = remove_chain_rules(g0);
    Rtg r = g;
    r.rules.clear();
    std::set<std::string> taken = taken_names(g);
    int counter = 0;
    std::function<std::string(const std::string&, const Tree&)> lift;
    std::function<Tree(const std::string&, const Tree&)> shape = [&](const std::string& base, const Tree& t) {
        Tree n(t.label);
        for (const auto& k : t.kids) n.kids.push_back(Tree(lift(base, k)));
        return n;
    };
    lift = [&](const std::string& base, const Tree& t) -> std::string {
        if (is_nt_leaf(g, t)) return t.label;
        std::string name;
        do {
            name = base + "_" + std::to_string(++counter);
        } while (taken.count(name));
        taken.insert(name);
        r.nonterminals.insert(name);
        r.rules.insert({name, shape(base, t)});
        return name;
    };
    for (const auto& [a, rhs] : g.rules) r.rules.insert({a, shape(a, rhs)});
    return r;
}

Fta rtg_to_fta(const Rtg& g) {
    Rtg n = normalize_rtg(g);
    Fta f;
    f.name = g.name;
    f.sigma = g.sigma;
    f.states = n.nonterminals;
    f.final = {n.start};
    for (const auto& [a, rhs] : n.rules) {
        if (rhs.kids.empty()) {
            f.add_leaf(rhs.label, a);
            continue;
        }
        StateVec qs;
        for (const auto& k : rhs.kids) qs.push_back(k.label);
        f.add_trans(rhs.label, qs, a);
    }
    return f;
}

Rtg fta_to_rtg(const Fta& a0) {
    bool plain = true;
    for (const auto& q : a0.states) {
        try {
            check_symbol(q);
        } catch (const Error&) {
            plain = false;
        }
        if (a0.sigma.has_symbol(q)) plain = false;
    }
    Fta a = plain ? a0 : rename_compact(a0, "N");
    Rtg g;
    g.name = a0.name;
    g.sigma = a.sigma;
    g.nonterminals = a.states;
    auto add = [&](const std::string& lhs, const Tree& rhs) { g.rules.insert({lhs, rhs}); };
    std::vector<std::string> heads;
    if (a.final.size() == 1) {
        g.start = *a.final.begin();
    } else {
        std::set<std::string> taken = a.states;
        for (const auto& [s, rs] : a.sigma.ranks) taken.insert(s);
        g.start = fresh_name("S", taken);
        g.nonterminals.insert(g.start);
    }
    auto emit = [&](const State& q, const Tree& rhs) {
        add(q, rhs);
        if (a.final.size() != 1 && a.final.count(q)) add(g.start, rhs);
    };
    for (const auto& [sym, qs] : a.leaf)
        for (const auto& q : qs) emit(q, Tree(sym));
    for (const auto& [key, ts] : a.trans) {
        Tree rhs(key.first);
        for (const auto& q : key.second) rhs.kids.emplace_back(q);
        for (const auto& q : ts) emit(q, rhs);
    }
    return g;
}

Cfg yield_cfg(const Rtg& g) {
    Cfg c;
    c.name = g.name;
    c.start = g.start;
    c.nonterminals = g.nonterminals;
    for (const auto& a : g.sigma.of_rank(0))
        if (a != "e") c.terminals.insert(a);
    std::set<std::pair<std::string, Word>> seen;
    for (const auto& [a, rhs] : g.rules) {
        auto rule = std::make_pair(a, yield_of(rhs));
        if (seen.insert(rule).second) c.rules.push_back(rule);
    }
    return c;
}

std::string star_symbol(const std::set<std::string>& terminals) {
    if (!terminals.count("*")) return "*";
    return fresh_name("STAR", terminals);
}

Rtg cfg_to_rtg(const Cfg& g) {
    Rtg r;
    r.name = g.name;
    r.nonterminals = g.nonterminals;
    r.start = g.start;
    std::string star = star_symbol(g.terminals);
    for (const auto& a : g.terminals) r.sigma.add(a, 0);
    r.sigma.add("e", 0);
    for (const auto& [a, w] : g.rules) {
        if (w.empty()) {
            r.rules.insert({a, Tree("e")});
            continue;
        }
        Tree rhs(star);
        for (const auto& s : w) rhs.kids.emplace_back(s);
        r.sigma.add(star, static_cast<int>(w.size()));
        r.rules.insert({a, rhs});
    }
    return r;
}

TreeHom binary_yield_hom(const RankedAlphabet& sigma) {
    TreeHom h;
    h.name = "binary";
    h.from = sigma;
    auto leaves = sigma.of_rank(0);
    std::string star = star_symbol({leaves.begin(), leaves.end()});
    for (const auto& a : leaves) h.to.add(a, 0);
    h.to.add("e", 0);
    for (const auto& [a, k] : sigma.entries()) {
        if (k == 0) {
            h.map[{a, 0}] = Tree(a);
        } else if (k == 1) {
            h.map[{a, 1}] = Tree::variable(1);
        } else {
            Tree t = Tree::variable(k);
            for (int i = k - 1; i >= 1; --i) t = Tree(star, {Tree::variable(i), t});
            h.map[{a, k}] = t;
            h.to.add(star, 2);
        }
    }
    return h;
}

Rtg binary_yield_form(const Rtg& g) { return linear_hom_image(binary_yield_hom(g.sigma), g); }

static std::string nt_name(const std::string& a) { return "<" + a + ">"; }

Rtg derivation_grammar(const Cfg& g, const std::set<std::string>& tops) {
    if (tops.empty()) throw Error(ErrorKind::Invalid, "derivation grammar needs a nonempty top set");
    Rtg r;
    r.name = g.name + "_deriv";
    for (const auto& a : g.terminals) r.sigma.add(a, 0);
    for (const auto& a : g.nonterminals) r.nonterminals.insert(nt_name(a));
    for (const auto& [a, w] : g.rules) {
        Tree rhs(a);
        if (w.empty()) {
            rhs.kids.emplace_back("e");
            r.sigma.add("e", 0);
        }
        for (const auto& s : w) rhs.kids.emplace_back(g.nonterminals.count(s) ? nt_name(s) : s);
        r.sigma.add(a, rhs.rank());
        r.rules.insert({nt_name(a), rhs});
    }
    if (tops.size() == 1 && g.nonterminals.count(*tops.begin())) {
        r.start = nt_name(*tops.begin());
        return r;
    }
    std::set<std::string> taken = taken_names(r);
    r.start = fresh_name("S0", taken);
    r.nonterminals.insert(r.start);
    for (const auto& v : tops) {
        if (g.nonterminals.count(v)) {
            for (const auto& [a, rhs] : std::set<std::pair<std::string, Tree>>(r.rules))
                if (a == nt_name(v)) r.rules.insert({r.start, rhs});
        } else if (g.terminals.count(v)) {
            r.sigma.add(v, 0);
            r.rules.insert({r.start, Tree(v)});
        } else {
            throw Error(ErrorKind::UnknownName, "'" + v + "' is not a symbol of grammar '" + g.name + "'");
        }
    }
    return r;
}

RuleTreeGrammar rule_tree_grammar(const Cfg& g) {
    RuleTreeGrammar out;
    Rtg& r = out.grammar;
    r.name = g.name + "_rules";
    for (const auto& a : g.nonterminals) r.nonterminals.insert(nt_name(a));
    r.start = nt_name(g.start);
    for (std::size_t i = 0; i < g.rules.size(); ++i) {
        std::string name = "r" + std::to_string(i + 1);
        out.rule_names.push_back(name);
        Tree rhs(name);
        for (const auto& s : g.rules[i].second)
            if (g.nonterminals.count(s)) rhs.kids.emplace_back(nt_name(s));
        r.sigma.add(name, rhs.rank());
        r.rules.insert({nt_name(g.rules[i].first), rhs});
    }
    return out;
}

RuleTreeProjection rule_tree_grammar(const Rtg& g0) {
    Rtg g = is_normal_form(g0) ? g0 : normalize_rtg(g0);
    RuleTreeProjection out;
    Rtg& r = out.grammar;
    r.name = g.name + "_rules";
    r.nonterminals = g.nonterminals;
    r.start = g.start;
    std::set<std::string> taken = g.nonterminals;
    std::string prefix = "r";
    while (std::any_of(taken.begin(), taken.end(), [&](const std::string& n) {
        return n.rfind(prefix, 0) == 0 && n.size() > prefix.size() &&
               std::all_of(n.begin() + prefix.size(), n.end(), ::isdigit);
    }))
        prefix += "r";
    out.projection.name = "proj";
    out.projection.to = g.sigma;
    int i = 0;
    for (const auto& [a, rhs] : g.rules) {
        std::string name = prefix + std::to_string(++i);
        Tree t(name);
        t.kids = rhs.kids;
        r.sigma.add(name, t.rank());
        r.rules.insert({a, t});
        out.projection.map[{name, t.rank()}] = {rhs.label};
    }
    out.projection.from = r.sigma;
    return out;
}

Rtg bare_tree_grammar(const Cfg& g) {
    Rtg r;
    r.name = g.name + "_bare";
    std::string star = star_symbol(g.terminals);
    for (const auto& a : g.terminals) r.sigma.add(a, 0);
    for (const auto& a : g.nonterminals) r.nonterminals.insert(nt_name(a));
    r.start = nt_name(g.start);
    for (const auto& [a, w] : g.rules) {
        Tree rhs(star);
        if (w.empty()) {
            rhs.kids.emplace_back("e");
            r.sigma.add("e", 0);
        }
        for (const auto& s : w) rhs.kids.emplace_back(g.nonterminals.count(s) ? nt_name(s) : s);
        r.sigma.add(star, rhs.rank());
        r.rules.insert({nt_name(a), rhs});
    }
    return r;
}

bool structurally_equivalent(const Cfg& g1, const Cfg& g2) {
    if (g1.terminals != g2.terminals)
        throw Error(ErrorKind::Invalid, "grammars '" + g1.name + "' and '" + g2.name + "' have different terminals");
    return decide_equivalent(rtg_to_fta(bare_tree_grammar(g1)), rtg_to_fta(bare_tree_grammar(g2)));
}

Cfg cfg_intersect_regular(const Cfg& g, const Dfa& m) {
    for (const auto& a : g.terminals)
        if (std::find(m.alphabet.begin(), m.alphabet.end(), a) == m.alphabet.end())
            throw Error(ErrorKind::Invalid, "terminal '" + a + "' is missing from the alphabet of '" + m.name + "'");
    Fta a = rtg_to_fta(cfg_to_rtg(g));
    Fta both = trim(intersection(a, yield_in_regular(a.sigma, m)));
    Rtg r = fta_to_rtg(rename_compact(both, "N"));
    Cfg c = yield_cfg(reduce_rtg(r));
    c.name = g.name + "_" + m.name;
    c.terminals = g.terminals;
    return c;
}

}  // namespace tl
