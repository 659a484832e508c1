#include "tl/workspace.hpp"

#include <fstream>
#include <sstream>

#include "tl/text.hpp"

namespace tl {

namespace {

const std::set<std::string> kKinds = {"alphabet", "fta", "dfta", "tdfta", "ntdfta", "dfa", "rtg", "cfg",
                                      "hom", "rel", "buftt", "tdftt", "tdrftt", "chain"};

int kind_phase(const std::string& kind) {
    if (kind == "alphabet") return 0;
    if (kind == "fta" || kind == "dfta" || kind == "tdfta" || kind == "ntdfta" || kind == "dfa") return 1;
    if (kind == "rtg" || kind == "cfg" || kind == "hom" || kind == "rel") return 2;
    if (kind == "chain") return 4;
    return 3;
}

bool is_plain_word(const std::string& s) {
    if (s.empty() || is_variable_name(s)) return false;
    for (std::size_t i = 0; i < s.size();) {
        std::size_t len;
        if (!is_symbol_char(s, i, &len)) return false;
        i += len;
    }
    return true;
}

std::string ref(Cursor& c) {
    c.accept('@');
    return c.expect_word("a name");
}

void arrow(Cursor& c) {
    c.expect('-');
    c.expect('>');
}

std::vector<std::string> items_until(Cursor& c, const std::set<std::string>& keywords) {
    std::vector<std::string> out;
    while (true) {
        char p = c.peek();
        if (p == '}' || p == '\0') break;
        std::size_t at = c.pos();
        std::string w = c.state();
        if (keywords.count(w)) {
            c.seek(at);
            break;
        }
        out.push_back(w);
    }
    return out;
}

// Either {q ...} or a single state.
StateSet state_set(Cursor& c) {
    StateSet out;
    if (c.peek() == '{') {
        std::size_t at = c.pos();
        c.expect('{');
        // A group state like {a,b} on its own is also a singleton target.
        while (!c.accept('}')) {
            if (c.at_end()) {
                c.seek(at);
                c.fail("unterminated state set");
            }
            out.insert(c.state());
            c.accept(',');
        }
        return out;
    }
    out.insert(c.state());
    return out;
}

StateVec state_tuple(Cursor& c) {
    StateVec out;
    c.expect('(');
    if (c.accept(')')) return out;
    do {
        out.push_back(c.state());
    } while (c.accept(','));
    c.expect(')');
    return out;
}

std::pair<std::string, int> sym_rank(Cursor& c) {
    std::string w = c.expect_word("symbol/rank");
    auto slash = w.rfind('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == w.size()) c.fail("expected symbol/rank, got '" + w + "'");
    std::string r = w.substr(slash + 1);
    for (char ch : r)
        if (!std::isdigit(static_cast<unsigned char>(ch))) c.fail("bad rank in '" + w + "'");
    return {w.substr(0, slash), std::stoi(r)};
}

void require_state(Cursor& c, const StateSet& states, const State& q) {
    if (!states.count(q)) c.fail("undeclared state '" + q + "'");
}

}  // namespace

class Loader {
public:
    explicit Loader(Workspace& ws) : ws_(ws) {}

    void run() {
        for (int phase = 0; phase <= 4; ++phase)
            for (const auto& p : ws_.pending_)
                if (kind_phase(p.kind) == phase) block(p);
        ws_.pending_.clear();
    }

private:
    Workspace& ws_;

    template <class M>
    void put(Cursor& c, M& m, const std::string& name, typename M::mapped_type v) {
        if (m.count(name)) c.fail("duplicate definition of '" + name + "'");
        m.emplace(name, std::move(v));
    }

    const RankedAlphabet& alphabet_ref(Cursor& c) {
        std::string n = ref(c);
        auto it = ws_.alphabets_.find(n);
        if (it == ws_.alphabets_.end()) throw Error(ErrorKind::Unresolved, "unresolved alphabet reference '@" + n + "'");
        return it->second;
    }

    void block(const Workspace::Pending& p) {
        const auto& [text, source] = ws_.files_[p.file];
        Cursor c(text, source);
        c.seek(p.body);
        c.expect('{');
        const std::string& k = p.kind;
        if (k == "alphabet") {
            RankedAlphabet a;
            a.name = p.name;
            while (!c.accept('}')) {
                if (c.at_end()) c.fail("unterminated alphabet block");
                auto [s, r] = sym_rank(c);
                check_symbol(s);
                a.add(s, r);
            }
            put(c, ws_.alphabets_, p.name, a);
        } else if (k == "fta" || k == "dfta") {
            put(c, ws_.ftas_, p.name, fta(c, p.name, k == "dfta"));
        } else if (k == "tdfta" || k == "ntdfta") {
            put(c, ws_.tdftas_, p.name, tdfta(c, p.name, k == "tdfta"));
        } else if (k == "dfa") {
            put(c, ws_.dfas_, p.name, dfa(c, p.name));
        } else if (k == "rtg") {
            put(c, ws_.rtgs_, p.name, rtg(c, p.name));
        } else if (k == "cfg") {
            put(c, ws_.cfgs_, p.name, cfg(c, p.name));
        } else if (k == "hom") {
            put(c, ws_.homs_, p.name, hom(c, p.name));
        } else if (k == "rel") {
            put(c, ws_.rels_, p.name, rel(c, p.name));
        } else if (k == "buftt") {
            put(c, ws_.buftts_, p.name, buftt(c, p.name));
        } else if (k == "tdftt" || k == "tdrftt") {
            put(c, ws_.tdftts_, p.name, tdftt(c, p.name, k == "tdrftt"));
        } else {
            put(c, ws_.chains_, p.name, chain(c, p.name));
        }
    }

    Fta fta(Cursor& c, const std::string& name, bool det) {
        static const std::set<std::string> kw = {"input", "states", "final", "leaf", "trans"};
        Fta a;
        a.name = name;
        bool have_input = false;
        std::vector<std::pair<std::size_t, State>> refs;
        while (!c.accept('}')) {
            std::size_t at = c.pos();
            std::string w = c.expect_word("a clause keyword");
            if (w == "input") {
                a.sigma = alphabet_ref(c);
                have_input = true;
            } else if (w == "states") {
                for (auto& q : items_until(c, kw)) a.states.insert(q);
            } else if (w == "final") {
                for (auto& q : items_until(c, kw)) a.final.insert(q), refs.push_back({at, q});
            } else if (w == "leaf") {
                std::string s = c.expect_word("a symbol");
                if (!have_input || !a.sigma.has(s, 0)) c.fail("'" + s + "/0' is not in the input alphabet");
                arrow(c);
                StateSet ts = state_set(c);
                if (det && ts.size() != 1) c.fail("dfta targets must be single states");
                for (auto& q : ts) a.add_leaf(s, q), refs.push_back({at, q});
            } else if (w == "trans") {
                std::string s = c.expect_word("a symbol");
                StateVec qs = state_tuple(c);
                int r = static_cast<int>(qs.size());
                if (r == 0 || !have_input || !a.sigma.has(s, r))
                    c.fail("'" + s + "/" + std::to_string(r) + "' is not in the input alphabet");
                arrow(c);
                StateSet ts = state_set(c);
                if (det && ts.size() != 1) c.fail("dfta targets must be single states");
                for (auto& q : qs) refs.push_back({at, q});
                for (auto& q : ts) a.add_trans(s, qs, q), refs.push_back({at, q});
            } else {
                c.seek(at);
                c.fail("unknown clause '" + w + "'");
            }
        }
        if (!have_input) c.fail("missing input alphabet");
        for (auto& [at, q] : refs) {
            c.seek(at);
            require_state(c, a.states, q);
        }
        if (det) {
            bool partial = false;
            for (const auto& [s, r] : a.sigma.entries()) {
                if (r == 0) {
                    partial |= !a.leaf.count(s);
                    continue;
                }
                std::size_t need = 1;
                for (int i = 0; i < r; ++i) need *= a.states.size();
                std::size_t have = 0;
                for (const auto& [key, ts] : a.trans)
                    if (key.first == s && static_cast<int>(key.second.size()) == r) ++have;
                partial |= have < need;
            }
            if (partial) {
                ws_.warnings.push_back("dfta " + name + " is partial; completed with a sink state");
                a = complete(a);
                a.name = name;
            }
        }
        return a;
    }

    TdFta tdfta(Cursor& c, const std::string& name, bool det) {
        static const std::set<std::string> kw = {"input", "states", "initial", "leaffinal", "trans"};
        TdFta a;
        a.name = name;
        bool have_input = false;
        std::vector<std::pair<std::size_t, State>> refs;
        while (!c.accept('}')) {
            std::size_t at = c.pos();
            std::string w = c.expect_word("a clause keyword");
            if (w == "input") {
                a.sigma = alphabet_ref(c);
                have_input = true;
            } else if (w == "states") {
                for (auto& q : items_until(c, kw)) a.states.insert(q);
            } else if (w == "initial") {
                for (auto& q : items_until(c, kw)) a.init.insert(q), refs.push_back({at, q});
            } else if (w == "leaffinal") {
                std::string s = c.expect_word("a symbol");
                if (!have_input || !a.sigma.has(s, 0)) c.fail("'" + s + "/0' is not in the input alphabet");
                arrow(c);
                for (auto& q : state_set(c)) a.leaf_final[s].insert(q), refs.push_back({at, q});
            } else if (w == "trans") {
                State q = c.state();
                std::string lab = c.expect_word("-a->");
                if (lab.size() < 4 || lab[0] != '-' || lab.substr(lab.size() - 2) != "->")
                    c.fail("expected -SYMBOL-> in transition");
                std::string s = lab.substr(1, lab.size() - 3);
                StateVec qs = state_tuple(c);
                int r = static_cast<int>(qs.size());
                if (r == 0 || !have_input || !a.sigma.has(s, r))
                    c.fail("'" + s + "/" + std::to_string(r) + "' is not in the input alphabet");
                refs.push_back({at, q});
                for (auto& p : qs) refs.push_back({at, p});
                a.trans[{q, s, r}].insert(qs);
            } else {
                c.seek(at);
                c.fail("unknown clause '" + w + "'");
            }
        }
        if (!have_input) c.fail("missing input alphabet");
        for (auto& [at, q] : refs) {
            c.seek(at);
            require_state(c, a.states, q);
        }
        if (det) {
            if (a.init.size() != 1) c.fail("tdfta needs exactly one initial state");
            for (const auto& [key, vs] : a.trans)
                if (vs.size() != 1) c.fail("tdfta transitions must be deterministic");
        }
        return a;
    }

    Dfa dfa(Cursor& c, const std::string& name) {
        static const std::set<std::string> kw = {"alphabet", "states", "start", "final", "trans"};
        Dfa d;
        d.name = name;
        std::set<std::string> letters;
        while (!c.accept('}')) {
            std::size_t at = c.pos();
            std::string w = c.expect_word("a clause keyword");
            if (w == "alphabet") {
                for (auto& a : items_until(c, kw)) {
                    check_symbol(a);
                    if (letters.insert(a).second) d.alphabet.push_back(a);
                }
            } else if (w == "states") {
                for (auto& q : items_until(c, kw)) d.states.insert(q);
            } else if (w == "start") {
                d.start = c.state();
            } else if (w == "final") {
                for (auto& q : items_until(c, kw)) d.final.insert(q);
            } else if (w == "trans") {
                State p = c.state();
                std::string lab = c.expect_word("-a->");
                if (lab.size() < 4 || lab[0] != '-' || lab.substr(lab.size() - 2) != "->")
                    c.fail("expected -SYMBOL-> in transition");
                std::string a = lab.substr(1, lab.size() - 3);
                State q = c.state();
                if (!letters.count(a)) c.fail("letter '" + a + "' is not in the alphabet");
                require_state(c, d.states, p);
                require_state(c, d.states, q);
                if (!d.trans.emplace(std::make_pair(p, a), q).second) c.fail("duplicate dfa transition");
            } else {
                c.seek(at);
                c.fail("unknown clause '" + w + "'");
            }
        }
        if (!d.states.count(d.start)) c.fail("dfa start state is not declared");
        for (auto& q : d.final) require_state(c, d.states, q);
        return d;
    }

    Rtg rtg(Cursor& c, const std::string& name) {
        static const std::set<std::string> kw = {"terminals", "nonterminals", "start", "rule"};
        Rtg g;
        g.name = name;
        std::vector<std::pair<std::size_t, std::pair<std::string, Tree>>> rules;
        while (!c.accept('}')) {
            std::size_t at = c.pos();
            std::string w = c.expect_word("a clause keyword");
            if (w == "terminals") {
                g.sigma = alphabet_ref(c);
            } else if (w == "nonterminals") {
                for (auto& n : items_until(c, kw)) check_symbol(n), g.nonterminals.insert(n);
            } else if (w == "start") {
                g.start = c.expect_word("a nonterminal");
            } else if (w == "rule") {
                std::string lhs = c.expect_word("a nonterminal");
                arrow(c);
                rules.push_back({at, {lhs, c.term()}});
            } else {
                c.seek(at);
                c.fail("unknown clause '" + w + "'");
            }
        }
        for (auto& n : g.nonterminals)
            if (g.sigma.has_symbol(n)) c.fail("nonterminal '" + n + "' is also a terminal");
        if (!g.nonterminals.count(g.start)) c.fail("start symbol is not a nonterminal");
        RankedAlphabet full = g.sigma;
        for (auto& n : g.nonterminals) full.add(n, 0);
        for (auto& [at, r] : rules) {
            c.seek(at);
            if (!g.nonterminals.count(r.first)) c.fail("'" + r.first + "' is not a nonterminal");
            auto chk = check_ranked(r.second, full);
            if (!chk.ok) c.fail(chk.violation);
            g.rules.insert(r);
        }
        return g;
    }

    Cfg cfg(Cursor& c, const std::string& name) {
        static const std::set<std::string> kw = {"terminals", "nonterminals", "start", "rule"};
        Cfg g;
        g.name = name;
        std::vector<std::pair<std::size_t, std::pair<std::string, Word>>> rules;
        while (!c.accept('}')) {
            std::size_t at = c.pos();
            std::string w = c.expect_word("a clause keyword");
            if (w == "terminals") {
                for (auto& a : items_until(c, kw)) check_symbol(a), g.terminals.insert(a);
            } else if (w == "nonterminals") {
                for (auto& a : items_until(c, kw)) check_symbol(a), g.nonterminals.insert(a);
            } else if (w == "start") {
                g.start = c.expect_word("a nonterminal");
            } else if (w == "rule") {
                std::string lhs = c.expect_word("a nonterminal");
                arrow(c);
                Word rhs;
                for (auto& s : items_until(c, kw))
                    if (s != "eps") rhs.push_back(s);
                rules.push_back({at, {lhs, rhs}});
            } else {
                c.seek(at);
                c.fail("unknown clause '" + w + "'");
            }
        }
        for (auto& n : g.nonterminals)
            if (g.terminals.count(n)) c.fail("'" + n + "' is both a terminal and a nonterminal");
        if (!g.nonterminals.count(g.start)) c.fail("start symbol is not a nonterminal");
        for (auto& [at, r] : rules) {
            c.seek(at);
            if (!g.nonterminals.count(r.first)) c.fail("'" + r.first + "' is not a nonterminal");
            for (auto& s : r.second)
                if (!g.terminals.count(s) && !g.nonterminals.count(s)) c.fail("unknown grammar symbol '" + s + "'");
            g.rules.push_back(r);
        }
        return g;
    }

    TreeHom hom(Cursor& c, const std::string& name) {
        TreeHom h;
        h.name = name;
        bool from = false, to = false;
        while (!c.accept('}')) {
            std::size_t at = c.pos();
            std::string w = c.expect_word("a clause keyword");
            if (w == "from") {
                h.from = alphabet_ref(c), from = true;
            } else if (w == "to") {
                h.to = alphabet_ref(c), to = true;
            } else if (w == "map") {
                auto [s, r] = sym_rank(c);
                arrow(c);
                Tree img = c.term();
                if (!from || !to) c.fail("map before from/to");
                if (!h.from.has(s, r)) c.fail("'" + s + "/" + std::to_string(r) + "' is not in the source alphabet");
                auto chk = check_ranked(img, h.to, r);
                if (!chk.ok) c.fail(chk.violation);
                if (!h.map.emplace(std::make_pair(s, r), img).second) c.fail("duplicate map entry");
            } else {
                c.seek(at);
                c.fail("unknown clause '" + w + "'");
            }
        }
        if (!from || !to) c.fail("hom needs from and to alphabets");
        for (const auto& e : h.from.entries())
            if (!h.map.count(e)) c.fail("hom " + name + " has no image for '" + e.first + "/" + std::to_string(e.second) + "'");
        return h;
    }

    Relabeling rel(Cursor& c, const std::string& name) {
        Relabeling r;
        r.name = name;
        bool from = false, to = false;
        while (!c.accept('}')) {
            std::size_t at = c.pos();
            std::string w = c.expect_word("a clause keyword");
            if (w == "from") {
                r.from = alphabet_ref(c), from = true;
            } else if (w == "to") {
                r.to = alphabet_ref(c), to = true;
            } else if (w == "map") {
                auto [s, k] = sym_rank(c);
                arrow(c);
                StateSet targets = state_set(c);
                if (!from || !to) c.fail("map before from/to");
                if (!r.from.has(s, k)) c.fail("'" + s + "/" + std::to_string(k) + "' is not in the source alphabet");
                if (targets.empty()) c.fail("relabeling sets must be nonempty");
                for (auto& b : targets)
                    if (!r.to.has(b, k)) c.fail("'" + b + "/" + std::to_string(k) + "' is not in the target alphabet");
                if (!r.map.emplace(std::make_pair(s, k), targets).second) c.fail("duplicate map entry");
            } else {
                c.seek(at);
                c.fail("unknown clause '" + w + "'");
            }
        }
        if (!from || !to) c.fail("rel needs from and to alphabets");
        for (const auto& e : r.from.entries())
            if (!r.map.count(e)) c.fail("rel " + name + " has no entry for '" + e.first + "/" + std::to_string(e.second) + "'");
        return r;
    }

    BuFtt buftt(Cursor& c, const std::string& name) {
        static const std::set<std::string> kw = {"input", "output", "states", "final", "rule"};
        BuFtt m;
        m.name = name;
        bool in = false, out = false;
        std::vector<std::pair<std::size_t, BuRule>> rules;
        while (!c.accept('}')) {
            std::size_t at = c.pos();
            std::string w = c.expect_word("a clause keyword");
            if (w == "input") {
                m.in = alphabet_ref(c), in = true;
            } else if (w == "output") {
                m.out = alphabet_ref(c), out = true;
            } else if (w == "states") {
                for (auto& q : items_until(c, kw)) m.states.insert(q);
            } else if (w == "final") {
                for (auto& q : items_until(c, kw)) m.final.insert(q);
            } else if (w == "rule") {
                BuRule r;
                r.a = c.expect_word("a symbol");
                if (c.peek() == '(') r.qs = state_tuple(c);
                arrow(c);
                r.q = c.state();
                c.expect('[');
                r.rhs = c.term();
                c.expect(']');
                rules.push_back({at, r});
            } else {
                c.seek(at);
                c.fail("unknown clause '" + w + "'");
            }
        }
        if (!in || !out) c.fail("buftt needs input and output alphabets");
        for (auto& q : m.final) require_state(c, m.states, q);
        for (auto& [at, r] : rules) {
            c.seek(at);
            int k = static_cast<int>(r.qs.size());
            if (!m.in.has(r.a, k)) c.fail("'" + r.a + "/" + std::to_string(k) + "' is not in the input alphabet");
            require_state(c, m.states, r.q);
            for (auto& q : r.qs) require_state(c, m.states, q);
            auto chk = check_ranked(r.rhs, m.out, k);
            if (!chk.ok) c.fail(chk.violation);
            m.rules.insert(r);
        }
        return m;
    }

    void check_td_rhs(Cursor& c, const TdFtt& m, const Tree& t, int k) {
        if (t.is_var()) c.fail("bare variable in a top-down right-hand side; use a state call");
        if (t.is_call()) {
            require_state(c, m.states, t.label);
            if (t.var > k) c.fail("variable x" + std::to_string(t.var) + " out of range");
            return;
        }
        if (!m.out.has(t.label, t.rank()))
            c.fail("'" + t.label + "/" + std::to_string(t.rank()) + "' is not in the output alphabet");
        for (auto& s : t.kids) check_td_rhs(c, m, s, k);
    }

    TdFtt tdftt(Cursor& c, const std::string& name, bool lookahead) {
        static const std::set<std::string> kw = {"input", "output", "states", "initial", "rule"};
        TdFtt m;
        m.name = name;
        bool in = false, out = false;
        std::vector<std::pair<std::size_t, TdRule>> rules;
        while (!c.accept('}')) {
            std::size_t at = c.pos();
            std::string w = c.expect_word("a clause keyword");
            if (w == "input") {
                m.in = alphabet_ref(c), in = true;
            } else if (w == "output") {
                m.out = alphabet_ref(c), out = true;
            } else if (w == "states") {
                for (auto& q : items_until(c, kw)) m.states.insert(q);
            } else if (w == "initial") {
                for (auto& q : items_until(c, kw)) m.init.insert(q);
            } else if (w == "rule") {
                TdRule r;
                r.q = c.state();
                c.expect('[');
                r.a = c.expect_word("a symbol");
                if (c.accept('(')) {
                    do {
                        std::string v = c.expect_word("a variable");
                        if (v != "x" + std::to_string(r.k + 1)) c.fail("expected x" + std::to_string(r.k + 1));
                        ++r.k;
                    } while (c.accept(','));
                    c.expect(')');
                }
                c.expect(']');
                arrow(c);
                r.rhs = c.term();
                std::size_t here = c.pos();
                if (c.peek() != '}' && c.word() == "where") {
                    if (!lookahead) c.fail("where clauses need a tdrftt block");
                    r.la.assign(r.k, "");
                    do {
                        std::string v = c.expect_word("a variable");
                        if (!is_variable_name(v)) c.fail("expected a variable");
                        int i = std::stoi(v.substr(1));
                        if (i > r.k) c.fail("variable " + v + " out of range");
                        c.expect(':');
                        std::string f = ref(c);
                        auto it = ws_.ftas_.find(f);
                        if (it == ws_.ftas_.end())
                            throw Error(ErrorKind::Unresolved, "unresolved automaton reference '@" + f + "'");
                        if (!r.la[i - 1].empty()) c.fail("two look-aheads for " + v);
                        r.la[i - 1] = f;
                        m.lookahead.emplace(f, it->second);
                    } while (c.accept(','));
                } else {
                    c.seek(here);
                }
                rules.push_back({at, r});
            } else {
                c.seek(at);
                c.fail("unknown clause '" + w + "'");
            }
        }
        if (!in || !out) c.fail("transducer needs input and output alphabets");
        for (auto& q : m.init) require_state(c, m.states, q);
        for (auto& [key, a] : m.lookahead)
            if (!a.sigma.same_symbols(m.in)) c.fail("look-ahead automaton " + key + " has a different alphabet");
        for (auto& [at, r] : rules) {
            c.seek(at);
            if (!m.in.has(r.a, r.k)) c.fail("'" + r.a + "/" + std::to_string(r.k) + "' is not in the input alphabet");
            require_state(c, m.states, r.q);
            check_td_rhs(c, m, r.rhs, r.k);
            m.rules.insert(r);
        }
        return m;
    }

    Chain chain(Cursor& c, const std::string& name) {
        Chain ch;
        ch.name = name;
        bool base = false;
        while (!c.accept('}')) {
            std::size_t at = c.pos();
            std::string w = c.expect_word("a clause keyword");
            if (w == "base") {
                std::string f = ref(c);
                auto it = ws_.ftas_.find(f);
                if (it == ws_.ftas_.end()) throw Error(ErrorKind::Unresolved, "unresolved automaton reference '@" + f + "'");
                ch.base = it->second;
                base = true;
            } else if (w == "stage") {
                std::string s = ref(c);
                try {
                    ch.stages.push_back(ws_.piece(s));
                } catch (const Error& e) {
                    if (e.kind() == ErrorKind::UnknownName)
                        throw Error(ErrorKind::Unresolved, "unresolved stage reference '@" + s + "'");
                    throw;
                }
            } else {
                c.seek(at);
                c.fail("unknown clause '" + w + "'");
            }
        }
        if (!base) c.fail("chain needs a base automaton");
        RankedAlphabet cur = ch.base.sigma;
        for (std::size_t i = 0; i < ch.stages.size(); ++i) {
            const RankedAlphabet& in = piece_input(ch.stages[i]);
            for (const auto& [s, r] : cur.entries())
                if (!in.has(s, r))
                    throw Error(ErrorKind::Invalid, "chain " + name + ": stage " + std::to_string(i + 1) + " does not accept '" +
                                                        s + "/" + std::to_string(r) + "'");
            cur = piece_output(ch.stages[i]);
        }
        return ch;
    }
};

void Workspace::add_text(std::string text, const std::string& source) {
    files_.emplace_back(std::move(text), source);
    std::size_t idx = files_.size() - 1;
    const std::string& t = files_[idx].first;
    Cursor c(t, source);
    while (!c.at_end()) {
        std::size_t at = c.pos();
        std::string kind = c.word();
        if (!kKinds.count(kind)) c.fail(kind.empty() ? "expected a block keyword" : "unknown block kind '" + kind + "'");
        std::string name = c.expect_word("a block name");
        check_symbol(name);
        if (c.peek() != '{') c.fail("expected '{'");
        std::size_t body = c.pos();
        int depth = 0;
        std::size_t i = body;
        for (; i < t.size(); ++i) {
            if (t[i] == '#') {
                while (i < t.size() && t[i] != '\n') ++i;
                continue;
            }
            if (t[i] == '{') ++depth;
            if (t[i] == '}' && --depth == 0) break;
        }
        if (i >= t.size()) {
            c.seek(at);
            c.fail("unterminated block '" + name + "'");
        }
        pending_.push_back({idx, kind, name, body});
        c.seek(i + 1);
    }
}

void Workspace::add_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Invalid, "cannot read file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    add_text(ss.str(), path);
}

void Workspace::resolve() { Loader(*this).run(); }

namespace {

template <class M>
const typename M::mapped_type& lookup(const M& m, const std::string& name, const char* kind) {
    std::string n = !name.empty() && name[0] == '@' ? name.substr(1) : name;
    auto it = m.find(n);
    if (it == m.end()) throw Error(ErrorKind::UnknownName, std::string("no ") + kind + " named '" + n + "'");
    return it->second;
}

}  // namespace

const RankedAlphabet& Workspace::alphabet(const std::string& n) const { return lookup(alphabets_, n, "alphabet"); }
const Fta& Workspace::fta(const std::string& n) const { return lookup(ftas_, n, "fta"); }
const TdFta& Workspace::tdfta(const std::string& n) const { return lookup(tdftas_, n, "top-down fta"); }
const Dfa& Workspace::dfa(const std::string& n) const { return lookup(dfas_, n, "dfa"); }
const Rtg& Workspace::rtg(const std::string& n) const { return lookup(rtgs_, n, "rtg"); }
const Cfg& Workspace::cfg(const std::string& n) const { return lookup(cfgs_, n, "cfg"); }
const TreeHom& Workspace::hom(const std::string& n) const { return lookup(homs_, n, "hom"); }
const Relabeling& Workspace::rel(const std::string& n) const { return lookup(rels_, n, "rel"); }
const Chain& Workspace::chain(const std::string& n) const { return lookup(chains_, n, "chain"); }

Piece Workspace::piece(const std::string& name) const {
    std::string n = !name.empty() && name[0] == '@' ? name.substr(1) : name;
    std::vector<Piece> found;
    if (auto it = buftts_.find(n); it != buftts_.end()) found.push_back(it->second);
    if (auto it = tdftts_.find(n); it != tdftts_.end()) found.push_back(it->second);
    if (auto it = homs_.find(n); it != homs_.end()) found.push_back(it->second);
    if (auto it = rels_.find(n); it != rels_.end()) found.push_back(it->second);
    if (auto it = ftas_.find(n); it != ftas_.end()) found.push_back(it->second);
    if (found.empty()) throw Error(ErrorKind::UnknownName, "no transducer, hom, rel or fta named '" + n + "'");
    if (found.size() > 1) throw Error(ErrorKind::Invalid, "name '" + n + "' is ambiguous across kinds");
    return found.front();
}

// ---------------------------------------------------------------------------

namespace {

std::string join(const std::vector<std::string>& xs) {
    std::string out;
    for (const auto& x : xs) out += " " + x;
    return out;
}

std::string join(const StateSet& xs) { return join(std::vector<std::string>(xs.begin(), xs.end())); }

std::string set_text(const StateSet& s) {
    std::string out = "{";
    bool first = true;
    for (const auto& q : s) {
        if (!first) out += " ";
        out += q;
        first = false;
    }
    return out + "}";
}

std::string tuple_text(const StateVec& qs) {
    std::string out = "(";
    for (std::size_t i = 0; i < qs.size(); ++i) out += (i ? "," : "") + qs[i];
    return out + ")";
}

Tree rename_leaves(const Tree& t, const std::map<std::string, std::string>& m) {
    Tree out = t;
    if (t.kids.empty() && !t.is_var() && !t.is_call()) {
        if (auto it = m.find(t.label); it != m.end()) out.label = it->second;
        return out;
    }
    for (auto& k : out.kids) k = rename_leaves(k, m);
    return out;
}

}  // namespace

std::string Emitter::fresh(const std::string& kind, const std::string& base) {
    std::string n = fresh_name(base.empty() ? kind : base, used_[kind]);
    used_[kind].insert(n);
    return n;
}

std::string Emitter::alphabet(const RankedAlphabet& sigma, const std::string& fallback) {
    for (const auto& [n, a] : alphabets_)
        if (a.same_symbols(sigma)) return n;
    std::string n = fresh("alphabet", sigma.name.empty() ? fallback : sigma.name);
    alphabets_[n] = sigma;
    out_ += "alphabet " + n + " {";
    for (const auto& [s, r] : sigma.entries()) out_ += " " + s + "/" + std::to_string(r);
    out_ += " }\n";
    return n;
}

void Emitter::emit(const Fta& a, const std::string& name) {
    std::string n = fresh("fta", name.empty() ? a.name : name);
    std::string in = alphabet(a.sigma, n + "_in");
    out_ += (a.is_deterministic() ? "dfta " : "fta ") + n + " {\n";
    out_ += "  input " + in + "\n";
    out_ += "  states" + join(a.states) + "\n";
    out_ += "  final" + join(a.final) + "\n";
    for (const auto& [s, qs] : a.leaf)
        if (!qs.empty()) out_ += "  leaf " + s + " -> " + set_text(qs) + "\n";
    for (const auto& [key, qs] : a.trans)
        if (!qs.empty()) out_ += "  trans " + key.first + tuple_text(key.second) + " -> " + set_text(qs) + "\n";
    out_ += "}\n";
}

void Emitter::emit(const TdFta& a, const std::string& name) {
    std::string n = fresh("tdfta", name.empty() ? a.name : name);
    std::string in = alphabet(a.sigma, n + "_in");
    out_ += (a.is_deterministic() ? "tdfta " : "ntdfta ") + n + " {\n";
    out_ += "  input " + in + "\n";
    out_ += "  states" + join(a.states) + "\n";
    out_ += "  initial" + join(a.init) + "\n";
    for (const auto& [s, qs] : a.leaf_final)
        if (!qs.empty()) out_ += "  leaffinal " + s + " -> " + set_text(qs) + "\n";
    for (const auto& [key, vs] : a.trans)
        for (const auto& v : vs)
            out_ += "  trans " + std::get<0>(key) + " -" + std::get<1>(key) + "-> " + tuple_text(v) + "\n";
    out_ += "}\n";
}

void Emitter::emit(const Dfa& d, const std::string& name) {
    std::string n = fresh("dfa", name.empty() ? d.name : name);
    out_ += "dfa " + n + " {\n";
    out_ += "  alphabet" + join(d.alphabet) + "\n";
    out_ += "  states" + join(d.states) + "\n";
    out_ += "  start " + d.start + "\n";
    out_ += "  final" + join(d.final) + "\n";
    for (const auto& [key, q] : d.trans) out_ += "  trans " + key.first + " -" + key.second + "-> " + q + "\n";
    out_ += "}\n";
}

void Emitter::emit(const Rtg& g0, const std::string& name) {
    Rtg g = g0;
    bool plain = true;
    for (const auto& a : g.nonterminals) plain &= is_plain_word(a);
    if (!plain) {
        std::map<std::string, std::string> m;
        std::set<std::string> taken;
        for (const auto& [s, r] : g.sigma.ranks) taken.insert(s);
        for (const auto& a : g.nonterminals) {
            std::string f = is_plain_word(a) && !taken.count(a) ? a : fresh_name("N" + std::to_string(m.size()), taken);
            taken.insert(f);
            m[a] = f;
        }
        Rtg r = g;
        r.nonterminals.clear();
        r.rules.clear();
        for (const auto& a : g.nonterminals) r.nonterminals.insert(m[a]);
        r.start = m[g.start];
        for (const auto& [a, t] : g.rules) r.rules.insert({m[a], rename_leaves(t, m)});
        g = r;
    }
    std::string n = fresh("rtg", name.empty() ? g.name : name);
    std::string al = alphabet(g.sigma, n + "_terminals");
    out_ += "rtg " + n + " {\n";
    out_ += "  terminals " + al + "\n";
    out_ += "  nonterminals" + join(g.nonterminals) + "\n";
    out_ += "  start " + g.start + "\n";
    for (const auto& [a, t] : g.rules) out_ += "  rule " + a + " -> " + print(t) + "\n";
    out_ += "}\n";
}

void Emitter::emit(const Cfg& g, const std::string& name) {
    std::string n = fresh("cfg", name.empty() ? g.name : name);
    out_ += "cfg " + n + " {\n";
    out_ += "  terminals" + join(g.terminals) + "\n";
    out_ += "  nonterminals" + join(g.nonterminals) + "\n";
    out_ += "  start " + g.start + "\n";
    for (const auto& [a, w] : g.rules) out_ += "  rule " + a + " ->" + (w.empty() ? std::string(" eps") : join(w)) + "\n";
    out_ += "}\n";
}

void Emitter::emit(const TreeHom& h, const std::string& name) {
    std::string n = fresh("hom", name.empty() ? h.name : name);
    std::string from = alphabet(h.from, n + "_from");
    std::string to = alphabet(h.to, n + "_to");
    out_ += "hom " + n + " {\n  from " + from + "\n  to " + to + "\n";
    for (const auto& [key, t] : h.map)
        out_ += "  map " + key.first + "/" + std::to_string(key.second) + " -> " + print(t) + "\n";
    out_ += "}\n";
}

void Emitter::emit(const Relabeling& r, const std::string& name) {
    std::string n = fresh("rel", name.empty() ? r.name : name);
    std::string from = alphabet(r.from, n + "_from");
    std::string to = alphabet(r.to, n + "_to");
    out_ += "rel " + n + " {\n  from " + from + "\n  to " + to + "\n";
    for (const auto& [key, bs] : r.map)
        out_ += "  map " + key.first + "/" + std::to_string(key.second) + " -> " + set_text(bs) + "\n";
    out_ += "}\n";
}

void Emitter::emit(const BuFtt& m, const std::string& name) {
    std::string n = fresh("ftt", name.empty() ? m.name : name);
    std::string in = alphabet(m.in, n + "_in");
    std::string out = alphabet(m.out, n + "_out");
    out_ += "buftt " + n + " {\n  input " + in + "\n  output " + out + "\n";
    out_ += "  states" + join(m.states) + "\n";
    out_ += "  final" + join(m.final) + "\n";
    for (const auto& r : m.rules)
        out_ += "  rule " + r.a + (r.qs.empty() ? "" : tuple_text(r.qs)) + " -> " + r.q + "[" + print(r.rhs) + "]\n";
    out_ += "}\n";
}

void Emitter::emit(const TdFtt& m0, const std::string& name) {
    bool plain = true;
    for (const auto& q : m0.states) plain &= is_plain_word(q);
    TdFtt m = plain ? m0 : rename_states(m0);
    std::map<std::string, std::string> la;
    for (const auto& [key, a] : m.lookahead) {
        std::string base = is_plain_word(key) ? key : "D";
        la[key] = fresh("fta", base);
        used_["fta"].erase(la[key]);
        emit(a, la[key]);
    }
    std::string n = fresh("ftt", name.empty() ? m.name : name);
    std::string in = alphabet(m.in, n + "_in");
    std::string out = alphabet(m.out, n + "_out");
    out_ += std::string(m.has_lookahead() ? "tdrftt " : "tdftt ") + n + " {\n  input " + in + "\n  output " + out + "\n";
    out_ += "  states" + join(m.states) + "\n";
    out_ += "  initial" + join(m.init) + "\n";
    for (const auto& r : m.rules) {
        out_ += "  rule " + r.q + "[" + r.a;
        if (r.k > 0) {
            out_ += "(";
            for (int i = 1; i <= r.k; ++i) out_ += (i > 1 ? "," : "") + std::string("x") + std::to_string(i);
            out_ += ")";
        }
        out_ += "] -> " + print(r.rhs);
        std::string where;
        for (std::size_t i = 0; i < r.la.size(); ++i)
            if (!r.la[i].empty()) where += (where.empty() ? "" : ", ") + std::string("x") + std::to_string(i + 1) + ":@" + la[r.la[i]];
        if (!where.empty()) out_ += " where " + where;
        out_ += "\n";
    }
    out_ += "}\n";
}

void Emitter::emit(const Piece& p, const std::string& name) {
    std::visit([&](const auto& x) { emit(x, name); }, p);
}

}  // namespace tl
