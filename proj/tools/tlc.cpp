#include <CLI11.hpp>

#include <algorithm>
#include <functional>
#include <iostream>
#include <sstream>

#include "tl/fta.hpp"
#include "tl/grammar.hpp"
#include "tl/langops.hpp"
#include "tl/surface.hpp"
#include "tl/transduce.hpp"
#include "tl/workspace.hpp"

using namespace tl;

namespace {

struct Opts {
    std::vector<std::string> files, fta, cfg, ftt, rtg, top;
    std::string tree, hom, rel, dfa, chain, alphabet, str, scheme, dir, expr;
    bool str_set = false;
    int max_height = 3;
    std::size_t cap = kDefaultCap;
};

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::UnknownName: return 3;
        case ErrorKind::Unresolved: return 4;
        case ErrorKind::FlagViolation: return 5;
        case ErrorKind::CapExceeded: return 6;
        case ErrorKind::Syntax: return 7;
        case ErrorKind::Invalid: return 8;
    }
    return 1;
}

void need(bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::Invalid, "missing " + what);
}

std::string yn(bool b) { return b ? "yes" : "no"; }

void print_trees(const TreeSet& ts) {
    for (const auto& t : canonical_sorted(ts)) std::cout << print(t) << "\n";
}

void print_trees(const std::vector<Tree>& ts) { print_trees(TreeSet(ts.begin(), ts.end())); }

Word parse_string(const std::string& s) {
    Word w;
    if (s.find_first_of(" \t") != std::string::npos) {
        std::istringstream in(s);
        for (std::string x; in >> x;) w.push_back(x);
        return w;
    }
    for (std::size_t i = 0; i < s.size();) {
        std::size_t len = 1;
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (c >= 0xF0) len = 4;
        else if (c >= 0xE0) len = 3;
        else if (c >= 0x80) len = 2;
        w.push_back(s.substr(i, len));
        i += len;
    }
    return w;
}

DecompScheme decomp_scheme(std::string s) {
    std::replace(s.begin(), s.end(), '-', '_');
    if (s == "bu_qrel_hom") return DecompScheme::BuQrelHom;
    if (s == "qrel_rel_fta_proj") return DecompScheme::QrelRelFtaProj;
    if (s == "td_copy_hom_lt") return DecompScheme::TdCopyHomLt;
    if (s == "ldt_qrel_lhom") return DecompScheme::LdtQrelLhom;
    if (s == "tdr_remove_lookahead") return DecompScheme::TdrRemoveLookahead;
    throw Error(ErrorKind::Invalid, "unknown decomposition scheme '" + s + "'");
}

Scheme convert_scheme(std::string s) {
    std::replace(s.begin(), s.end(), '-', '_');
    if (s == "nlb_to_nlt") return Scheme::NlbToNlt;
    if (s == "nlt_to_nlb") return Scheme::NltToNlb;
    if (s == "lt_to_lb") return Scheme::LtToLb;
    if (s == "lb_to_ltr") return Scheme::LbToLtr;
    throw Error(ErrorKind::Invalid, "unknown conversion scheme '" + s + "'");
}

void print_witness(const EmptinessResult& r) {
    std::cout << yn(r.empty) << "\n";
    if (!r.empty && r.witness) std::cout << "witness: " << print(*r.witness) << "\n";
}

Piece compose_pieces(const Piece& m, const Piece& n) {
    std::vector<Piece> chain = {m, n};
    bool td = std::holds_alternative<TdFtt>(m) || std::holds_alternative<TdFtt>(n);
    if (td) {
        auto parts = chain_to_tdr(chain);
        TdFtt acc = parts.front();
        for (std::size_t i = 1; i < parts.size(); ++i) acc = compose_tdr(acc, parts[i]);
        return acc;
    }
    auto parts = chain_to_bu(chain);
    BuFtt acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = compose_bu(acc, parts[i]);
    return acc;
}

using Handler = std::function<void(const Workspace&, const Opts&)>;

struct Command {
    const char* name;
    const char* help;
    std::vector<std::string> flags;
    Handler run;
};

std::vector<Command> commands() {
    std::vector<Command> cs;
    auto tree_of = [](const Opts& o) {
        need(!o.tree.empty(), "--tree");
        return parse_term(o.tree);
    };
    auto one_fta = [](const Workspace& ws, const Opts& o) -> const Fta& {
        need(o.fta.size() == 1, "exactly one --fta");
        return ws.fta(o.fta[0]);
    };
    auto two_fta = [](const Workspace& ws, const Opts& o) {
        need(o.fta.size() == 2, "two --fta options");
        return std::make_pair(ws.fta(o.fta[0]), ws.fta(o.fta[1]));
    };
    auto one_rtg = [](const Workspace& ws, const Opts& o) -> const Rtg& {
        need(o.rtg.size() == 1, "exactly one --rtg");
        return ws.rtg(o.rtg[0]);
    };
    auto one_cfg = [](const Workspace& ws, const Opts& o) -> const Cfg& {
        need(o.cfg.size() == 1, "exactly one --cfg");
        return ws.cfg(o.cfg[0]);
    };
    auto one_ftt = [](const Workspace& ws, const Opts& o) {
        need(o.ftt.size() == 1, "exactly one --ftt");
        return ws.piece(o.ftt[0]);
    };
    auto emit = [](const auto& x, const std::string& name = "") {
        Emitter e;
        e.emit(x, name);
        std::cout << e.text();
    };

    cs.push_back({"parse", "Parse a term and print it canonically", {"tree", "alphabet"}, [=](const Workspace& ws, const Opts& o) {
        Tree t = tree_of(o);
        if (!o.alphabet.empty()) require_ranked(t, ws.alphabet(o.alphabet));
        std::cout << print(t) << "\n";
    }});
    cs.push_back({"yield", "Print the leaf word of a term", {"tree"}, [=](const Workspace&, const Opts& o) {
        Word w = yield_of(tree_of(o));
        std::cout << (w.empty() ? "eps" : join_word(w)) << "\n";
    }});
    cs.push_back({"height", "Print the height of a term", {"tree"}, [=](const Workspace&, const Opts& o) {
        std::cout << height_of(tree_of(o)) << "\n";
    }});
    cs.push_back({"paths", "Print the label paths of a term", {"tree"}, [=](const Workspace&, const Opts& o) {
        for (const auto& p : paths_of(tree_of(o))) std::cout << join_word(p) << "\n";
    }});
    cs.push_back({"enumerate", "List trees of an alphabet, automaton or grammar up to a height",
                  {"alphabet", "fta", "rtg", "max-height", "cap"}, [=](const Workspace& ws, const Opts& o) {
        if (!o.fta.empty()) {
            print_trees(accepted_trees(one_fta(ws, o), o.max_height, o.cap));
        } else if (!o.rtg.empty()) {
            print_trees(enumerate_rtg(one_rtg(ws, o), o.max_height, o.cap));
        } else {
            need(!o.alphabet.empty(), "--alphabet, --fta or --rtg");
            print_trees(enumerate_trees(ws.alphabet(o.alphabet), o.max_height, o.cap));
        }
    }});
    cs.push_back({"run", "Run an automaton on a term", {"fta", "tree"}, [=](const Workspace& ws, const Opts& o) {
        need(o.fta.size() == 1, "exactly one --fta");
        Tree t = tree_of(o);
        RunResult r;
        bool det;
        if (ws.has_tdfta(o.fta[0]) && !ws.has_fta(o.fta[0])) {
            const TdFta& a = ws.tdfta(o.fta[0]);
            require_ranked(t, a.sigma);
            r = run(a, t);
            det = false;
        } else {
            const Fta& a = ws.fta(o.fta[0]);
            require_ranked(t, a.sigma);
            r = run(a, t);
            det = a.is_deterministic();
        }
        if (det && r.states.size() == 1)
            std::cout << "state: " << *r.states.begin() << "\n";
        else
            std::cout << "states: " << subset_name(r.states) << "\n";
        std::cout << "accepted: " << yn(r.accepted) << "\n";
    }});
    cs.push_back({"determinize", "Subset construction", {"fta"}, [=](const Workspace& ws, const Opts& o) {
        emit(determinize(one_fta(ws, o)));
    }});
    cs.push_back({"complement", "Complement automaton", {"fta"}, [=](const Workspace& ws, const Opts& o) {
        emit(complement(one_fta(ws, o)));
    }});
    cs.push_back({"intersect", "Product automaton for intersection", {"fta"}, [=](const Workspace& ws, const Opts& o) {
        auto [a, b] = two_fta(ws, o);
        emit(intersection(a, b));
    }});
    cs.push_back({"union", "Automaton for the union", {"fta"}, [=](const Workspace& ws, const Opts& o) {
        auto [a, b] = two_fta(ws, o);
        emit(union_of(a, b));
    }});
    cs.push_back({"empty", "Decide emptiness", {"fta"}, [=](const Workspace& ws, const Opts& o) {
        print_witness(decide_empty(one_fta(ws, o)));
    }});
    cs.push_back({"finite", "Decide finiteness", {"fta"}, [=](const Workspace& ws, const Opts& o) {
        std::cout << yn(decide_finite(one_fta(ws, o))) << "\n";
    }});
    cs.push_back({"subset", "Decide inclusion L(A) in L(B)", {"fta"}, [=](const Workspace& ws, const Opts& o) {
        auto [a, b] = two_fta(ws, o);
        auto r = decide_inclusion(a, b);
        std::cout << yn(r.included) << "\n";
        if (r.counterexample) std::cout << "witness: " << print(*r.counterexample) << "\n";
    }});
    cs.push_back({"equiv", "Decide language equality", {"fta"}, [=](const Workspace& ws, const Opts& o) {
        auto [a, b] = two_fta(ws, o);
        std::cout << yn(decide_equivalent(a, b)) << "\n";
    }});
    cs.push_back({"pump", "Pumping decomposition of an accepted tree", {"fta", "tree"}, [=](const Workspace& ws, const Opts& o) {
        Pumping p = pump(one_fta(ws, o), tree_of(o));
        std::cout << "u: " << print(p.u) << "\nv: " << print(p.v) << "\nw: " << print(p.w) << "\n";
    }});
    cs.push_back({"yield-regular", "Automaton for trees whose yield is accepted by a DFA", {"alphabet", "dfa"},
                  [=](const Workspace& ws, const Opts& o) {
        need(!o.alphabet.empty() && !o.dfa.empty(), "--alphabet and --dfa");
        emit(yield_in_regular(ws.alphabet(o.alphabet), ws.dfa(o.dfa)));
    }});
    cs.push_back({"normalize", "Normal form of a tree grammar", {"rtg"}, [=](const Workspace& ws, const Opts& o) {
        emit(normalize_rtg(one_rtg(ws, o)));
    }});
    cs.push_back({"to-fta", "Tree grammar to automaton", {"rtg"}, [=](const Workspace& ws, const Opts& o) {
        emit(rtg_to_fta(one_rtg(ws, o)));
    }});
    cs.push_back({"to-rtg", "Automaton to tree grammar", {"fta"}, [=](const Workspace& ws, const Opts& o) {
        emit(fta_to_rtg(one_fta(ws, o)));
    }});
    cs.push_back({"yield-cfg", "Context-free grammar of the yields", {"rtg"}, [=](const Workspace& ws, const Opts& o) {
        emit(yield_cfg(one_rtg(ws, o)));
    }});
    cs.push_back({"from-cfg", "Tree grammar whose yield is the CFG language", {"cfg"}, [=](const Workspace& ws, const Opts& o) {
        emit(cfg_to_rtg(one_cfg(ws, o)));
    }});
    cs.push_back({"deriv-trees", "Grammar of derivation trees", {"cfg", "top"}, [=](const Workspace& ws, const Opts& o) {
        const Cfg& g = one_cfg(ws, o);
        std::set<std::string> tops(o.top.begin(), o.top.end());
        if (tops.empty()) tops.insert(g.start);
        emit(derivation_grammar(g, tops));
    }});
    cs.push_back({"rule-trees", "Grammar of rule trees", {"cfg", "rtg"}, [=](const Workspace& ws, const Opts& o) {
        if (!o.rtg.empty()) {
            auto r = rule_tree_grammar(one_rtg(ws, o));
            Emitter e;
            e.emit(r.grammar);
            e.emit(r.projection);
            std::cout << e.text();
        } else {
            emit(rule_tree_grammar(one_cfg(ws, o)).grammar);
        }
    }});
    cs.push_back({"bare", "Grammar of bare derivation trees", {"cfg"}, [=](const Workspace& ws, const Opts& o) {
        emit(bare_tree_grammar(one_cfg(ws, o)));
    }});
    cs.push_back({"struct-equiv", "Decide structural equivalence of two CFGs", {"cfg"}, [=](const Workspace& ws, const Opts& o) {
        need(o.cfg.size() == 2, "two --cfg options");
        std::cout << yn(structurally_equivalent(ws.cfg(o.cfg[0]), ws.cfg(o.cfg[1]))) << "\n";
    }});
    cs.push_back({"cfg-intersect", "Intersect a CFG with a DFA", {"cfg", "dfa"}, [=](const Workspace& ws, const Opts& o) {
        need(!o.dfa.empty(), "--dfa");
        emit(cfg_intersect_regular(one_cfg(ws, o), ws.dfa(o.dfa)));
    }});
    cs.push_back({"apply-hom", "Apply a tree homomorphism", {"hom", "tree"}, [=](const Workspace& ws, const Opts& o) {
        need(!o.hom.empty(), "--hom");
        const TreeHom& h = ws.hom(o.hom);
        Tree t = tree_of(o);
        require_ranked(t, h.from);
        std::cout << print(apply_hom(h, t)) << "\n";
    }});
    cs.push_back({"inv-hom", "Automaton for the inverse homomorphic image", {"hom", "fta"}, [=](const Workspace& ws, const Opts& o) {
        need(!o.hom.empty(), "--hom");
        emit(inverse_hom(ws.hom(o.hom), one_fta(ws, o)));
    }});
    cs.push_back({"relabel", "Apply a relabeling to a term or a grammar", {"rel", "tree", "rtg"}, [=](const Workspace& ws, const Opts& o) {
        need(!o.rel.empty(), "--rel");
        const Relabeling& r = ws.rel(o.rel);
        if (!o.rtg.empty()) {
            emit(relabel_image(r, one_rtg(ws, o)));
        } else {
            Tree t = tree_of(o);
            require_ranked(t, r.from);
            print_trees(apply_relabeling(r, t));
        }
    }});
    cs.push_back({"hom-image", "Grammar for a linear homomorphic image", {"hom", "rtg"}, [=](const Workspace& ws, const Opts& o) {
        need(!o.hom.empty(), "--hom");
        emit(linear_hom_image(ws.hom(o.hom), one_rtg(ws, o)));
    }});
    cs.push_back({"kleene", "Regular tree expression for a grammar", {"rtg"}, [=](const Workspace& ws, const Opts& o) {
        std::cout << print(*kleene(one_rtg(ws, o))) << "\n";
    }});
    cs.push_back({"kleene-eval", "Grammar for a regular tree expression", {"expr", "alphabet"}, [=](const Workspace& ws, const Opts& o) {
        need(!o.expr.empty() && !o.alphabet.empty(), "--expr and --alphabet");
        emit(eval(*parse_regexpr(o.expr), ws.alphabet(o.alphabet)));
    }});
    cs.push_back({"transduce", "Apply a transducer to a term", {"ftt", "tree", "cap"}, [=](const Workspace& ws, const Opts& o) {
        Piece p = one_ftt(ws, o);
        Tree t = tree_of(o);
        require_ranked(t, piece_input(p));
        print_trees(apply_piece(p, t, o.cap));
    }});
    cs.push_back({"classify", "Print the subclass flags of a transducer", {"ftt"}, [=](const Workspace& ws, const Opts& o) {
        Piece p = one_ftt(ws, o);
        SubclassFlags f = std::visit(
            [](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, BuFtt> || std::is_same_v<T, TdFtt>)
                    return classify(x);
                else
                    return classify(embed_bu(x));
            },
            p);
        std::cout << "linear: " << yn(f.linear) << "\nnondeleting: " << yn(f.nondeleting) << "\npure: " << yn(f.pure)
                  << "\ndeterministic: " << yn(f.deterministic) << "\ntotal-deterministic: " << yn(f.total_deterministic)
                  << "\nrelabeling: " << yn(f.qrel) << "\n";
    }});
    cs.push_back({"embed", "Embed a relabeling, automaton or homomorphism as a transducer",
                  {"rel", "fta", "hom", "dir"}, [=](const Workspace& ws, const Opts& o) {
        bool td = o.dir == "td";
        need(td || o.dir == "bu", "--dir bu|td");
        if (!o.hom.empty()) {
            const TreeHom& h = ws.hom(o.hom);
            td ? emit(embed_td(h)) : emit(embed_bu(h));
        } else if (!o.rel.empty()) {
            const Relabeling& r = ws.rel(o.rel);
            td ? emit(embed_td(r)) : emit(embed_bu(r));
        } else {
            const Fta& a = one_fta(ws, o);
            td ? emit(embed_td(a)) : emit(embed_bu(a));
        }
    }});
    cs.push_back({"convert", "Linear bottom-up and top-down conversions", {"ftt", "scheme"}, [=](const Workspace& ws, const Opts& o) {
        emit(convert_linear(one_ftt(ws, o), convert_scheme(o.scheme)));
    }});
    cs.push_back({"decompose", "Split a transducer into simpler stages", {"ftt", "scheme"}, [=](const Workspace& ws, const Opts& o) {
        Piece p = one_ftt(ws, o);
        auto parts = decompose(p, decomp_scheme(o.scheme));
        Emitter e;
        std::string base = std::visit([](const auto& x) { return x.name; }, p);
        for (std::size_t i = 0; i < parts.size(); ++i) e.emit(parts[i], base + "_" + std::to_string(i + 1));
        std::cout << e.text();
    }});
    cs.push_back({"compose", "Compose two transducers", {"ftt"}, [=](const Workspace& ws, const Opts& o) {
        need(o.ftt.size() == 2, "two --ftt options");
        emit(compose_pieces(ws.piece(o.ftt[0]), ws.piece(o.ftt[1])));
    }});
    cs.push_back({"domain", "Automaton for the domain of a transducer", {"ftt"}, [=](const Workspace& ws, const Opts& o) {
        emit(domain_of(one_ftt(ws, o)));
    }});
    cs.push_back({"inv-image", "Automaton for the inverse image of a language", {"ftt", "fta"}, [=](const Workspace& ws, const Opts& o) {
        emit(inverse_image(one_ftt(ws, o), one_fta(ws, o)));
    }});
    cs.push_back({"chain-empty", "Decide emptiness of a surface language", {"chain"}, [=](const Workspace& ws, const Opts& o) {
        need(!o.chain.empty(), "--chain");
        print_witness(surface_empty(ws.chain(o.chain)));
    }});
    cs.push_back({"chain-member", "Decide membership in a surface language", {"chain", "tree"}, [=](const Workspace& ws, const Opts& o) {
        need(!o.chain.empty(), "--chain");
        std::cout << yn(surface_member(ws.chain(o.chain), tree_of(o))) << "\n";
    }});
    cs.push_back({"chain-finite", "Decide finiteness of a surface language", {"chain"}, [=](const Workspace& ws, const Opts& o) {
        need(!o.chain.empty(), "--chain");
        std::cout << yn(surface_finite(ws.chain(o.chain))) << "\n";
    }});
    cs.push_back({"target-empty", "Decide emptiness of a target language", {"chain"}, [=](const Workspace& ws, const Opts& o) {
        need(!o.chain.empty(), "--chain");
        std::cout << yn(target_empty(ws.chain(o.chain))) << "\n";
    }});
    cs.push_back({"target-member", "Decide membership of a string in a target language", {"chain", "string"},
                  [=](const Workspace& ws, const Opts& o) {
        need(!o.chain.empty() && o.str_set, "--chain and --string");
        std::cout << yn(target_member(ws.chain(o.chain), parse_string(o.str))) << "\n";
    }});
    cs.push_back({"target-finite", "Decide finiteness of a target language", {"chain"}, [=](const Workspace& ws, const Opts& o) {
        need(!o.chain.empty(), "--chain");
        std::cout << yn(target_finite(ws.chain(o.chain))) << "\n";
    }});
    return cs;
}

void add_flag(CLI::App* sub, const std::string& f, Opts& o) {
    if (f == "tree") sub->add_option("--tree", o.tree, "Term in bracket syntax");
    else if (f == "alphabet") sub->add_option("--alphabet", o.alphabet, "Alphabet name");
    else if (f == "fta") sub->add_option("--fta", o.fta, "Automaton name (repeatable)");
    else if (f == "rtg") sub->add_option("--rtg", o.rtg, "Tree grammar name");
    else if (f == "cfg") sub->add_option("--cfg", o.cfg, "Context-free grammar name (repeatable)");
    else if (f == "ftt") sub->add_option("--ftt", o.ftt, "Transducer name (repeatable)");
    else if (f == "hom") sub->add_option("--hom", o.hom, "Homomorphism name");
    else if (f == "rel") sub->add_option("--rel", o.rel, "Relabeling name");
    else if (f == "dfa") sub->add_option("--dfa", o.dfa, "String automaton name");
    else if (f == "chain") sub->add_option("--chain", o.chain, "Chain name");
    else if (f == "top") sub->add_option("--top", o.top, "Top nonterminal (repeatable)");
    else if (f == "scheme") sub->add_option("--scheme", o.scheme, "Scheme name")->required();
    else if (f == "dir") sub->add_option("--dir", o.dir, "bu or td")->required();
    else if (f == "expr") sub->add_option("--expr", o.expr, "Regular tree expression");
    else if (f == "string") sub->add_option("--string", o.str, "Input string (letters, or space separated symbols)");
    else if (f == "max-height") sub->add_option("--max-height", o.max_height, "Height bound")->capture_default_str();
    else if (f == "cap") sub->add_option("--cap", o.cap, "Result cap")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tree automata, grammars and transducers"};
    app.require_subcommand(1);
    Opts o;
    auto cs = commands();
    std::map<CLI::App*, const Command*> by_sub;
    for (const auto& c : cs) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--file", o.files, "Definition file (repeatable)");
        for (const auto& f : c.flags) add_flag(sub, f, o);
        by_sub[sub] = &c;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    try {
        for (auto* sub : app.get_subcommands()) {
            if (sub->get_option_no_throw("--string") && sub->count("--string")) o.str_set = true;
            Workspace ws;
            for (const auto& f : o.files) ws.add_file(f);
            ws.resolve();
            for (const auto& w : ws.warnings) std::cerr << "warning: " << w << "\n";
            by_sub.at(sub)->run(ws, o);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    }
    return 0;
}
