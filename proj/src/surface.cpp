#include "tl/surface.hpp"

#include <algorithm>

#include "tl/grammar.hpp"
#include "tl/langops.hpp"

namespace tl {

namespace {

Fta meet(const Fta& a, const Fta& b) {
    RankedAlphabet s = a.sigma.merged(b.sigma);
    return trim(intersection(with_alphabet(a, s), with_alphabet(b, s)));
}

// Base intersected with the inverse image of `last` through every stage; the
// fold keeps each intermediate domain so a witness can be replayed forward.
EmptinessResult nonempty_with(const Chain& c, const Fta& last) {
    auto bu = chain_to_bu(c.stages);
    std::vector<Fta> doms(bu.size() + 1);
    doms[bu.size()] = last;
    for (int i = static_cast<int>(bu.size()) - 1; i >= 0; --i)
        doms[i] = inverse_image(bu[i], doms[i + 1]);
    EmptinessResult r = decide_empty(meet(c.base, doms[0]));
    if (r.empty) return r;
    Tree s = *r.witness;
    for (std::size_t i = 0; i < bu.size(); ++i) {
        auto imgs = apply(bu[i], s);
        std::vector<Tree> ok;
        for (const auto& u : imgs)
            if (accepts(with_alphabet(doms[i + 1], bu[i].out), u)) ok.push_back(u);
        if (ok.empty()) throw Error(ErrorKind::Invalid, "witness replay failed at stage " + std::to_string(i + 1));
        s = *std::min_element(ok.begin(), ok.end(), canonical_less);
    }
    r.witness = s;
    return r;
}

TdFtt prune_monadic(const TdFtt& m) {
    TdFtt r = m;
    r.rules.clear();
    std::function<bool(const Tree&)> monadic = [&](const Tree& t) {
        if (t.kids.size() > 1) return false;
        return t.kids.empty() || monadic(t.kids[0]);
    };
    for (const auto& rule : m.rules)
        if (monadic(rule.rhs)) r.rules.insert(rule);
    return r;
}

}  // namespace

RankedAlphabet chain_output(const Chain& c) {
    return c.stages.empty() ? c.base.sigma : piece_output(c.stages.back());
}

Fta lb_image(const BuFtt& m, const Fta& a) {
    if (!classify(m).linear) throw Error(ErrorKind::FlagViolation, "transducer '" + m.name + "' is not linear");
    auto d = decompose_lb(m);
    Rtg g = fta_to_rtg(rename_compact(trim(with_alphabet(a, m.in)), "N"));
    Rtg g1 = relabel_image(d.rel, g);
    Fta f1 = meet(rtg_to_fta(g1), d.fta);
    Rtg g2 = fta_to_rtg(rename_compact(f1, "N"));
    Rtg g3 = linear_hom_image(d.hom, g2);
    Fta out = rename_compact(trim(rtg_to_fta(g3)), "q");
    out.name = "img_" + m.name;
    out.sigma = m.out;
    return out;
}

TdFtt path_transducer(const RankedAlphabet& sigma) {
    TdFtt m;
    m.name = "Path";
    m.in = sigma;
    std::set<std::string> taken;
    for (const auto& [s, rs] : sigma.ranks) {
        taken.insert(s);
        m.out.add(s, 1);
    }
    m.out.add("e", 0);
    State p = fresh_name("p", taken);
    m.states = m.init = {p};
    for (const auto& [a, k] : sigma.entries()) {
        if (k == 0) {
            m.rules.insert({p, a, 0, Tree(a, {Tree("e")}), {}});
            continue;
        }
        for (int i = 1; i <= k; ++i) m.rules.insert({p, a, k, Tree(a, {Tree::call(p, i)}), {}});
    }
    return m;
}

EmptinessResult surface_empty(const Chain& c) { return nonempty_with(c, universal_fta(chain_output(c))); }

bool surface_member(const Chain& c, const Tree& t) {
    RankedAlphabet out = chain_output(c);
    return !nonempty_with(c, finite_language_fta({t}, &out)).empty;
}

bool surface_finite(const Chain& c) {
    std::vector<Piece> stages = c.stages;
    stages.push_back(path_transducer(chain_output(c)));
    auto tdr = chain_to_tdr(stages);
    while (tdr.size() > 1) {
        TdFtt last = prune_monadic(tdr.back());
        tdr.pop_back();
        tdr.back() = compose_tdr(tdr.back(), last);
    }
    BuFtt lb = ltr_to_lb(prune_monadic(tdr[0]));
    return decide_finite(lb_image(lb, c.base));
}

YieldNormal yield_normalize(const Chain& c) {
    RankedAlphabet sigma = chain_output(c);
    YieldNormal out;
    out.chain = c;
    bool plain = !sigma.has_symbol("e");
    for (const auto& [s, rs] : sigma.ranks)
        if (rs.count(1)) plain = false;
    if (plain) return out;

    std::vector<std::string> letters;
    for (const auto& a : sigma.of_rank(0))
        if (a != "e") letters.push_back(a);
    Fta lam = yield_in_regular(sigma, word_dfa({}, letters));
    out.lambda = !nonempty_with(c, lam).empty;

    std::set<std::string> taken;
    for (const auto& [s, rs] : sigma.ranks) taken.insert(s);
    std::string cat = fresh_name("c", taken);
    taken.insert(cat);
    std::string nil = fresh_name("nil", taken);
    BuFtt y;
    y.name = "Yield";
    y.in = sigma;
    for (const auto& a : letters) y.out.add(a, 0);
    y.out.add(cat, 2);
    y.out.add(nil, 0);
    State qe = "q_eps", qp = "q_plus";
    y.states = {qe, qp};
    y.final = {qp};
    for (const auto& [a, k] : sigma.entries()) {
        if (k == 0) {
            if (a == "e")
                y.rules.insert({a, {}, qe, Tree(nil)});
            else
                y.rules.insert({a, {}, qp, Tree(a)});
            continue;
        }
        std::vector<std::vector<State>> choices(k, StateVec{qe, qp});
        for_tuples(choices, [&](const StateVec& qs) {
            std::vector<int> plus;
            for (int i = 0; i < k; ++i)
                if (qs[i] == qp) plus.push_back(i + 1);
            if (plus.empty()) {
                y.rules.insert({a, qs, qe, Tree(nil)});
                return;
            }
            Tree t = Tree::variable(plus.back());
            for (int i = static_cast<int>(plus.size()) - 2; i >= 0; --i)
                t = Tree(cat, {Tree::variable(plus[i]), t});
            y.rules.insert({a, qs, qp, t});
        });
    }
    out.chain.stages.push_back(y);
    return out;
}

bool target_empty(const Chain& c) { return surface_empty(yield_normalize(c).chain).empty; }

bool target_member(const Chain& c, const Word& w) {
    auto yn = yield_normalize(c);
    if (w.empty()) return yn.lambda;
    RankedAlphabet sigma = chain_output(yn.chain);
    std::vector<std::string> letters = sigma.of_rank(0);
    for (const auto& a : w)
        if (std::find(letters.begin(), letters.end(), a) == letters.end()) return false;
    return !nonempty_with(yn.chain, yield_in_regular(sigma, word_dfa(w, letters))).empty;
}

bool target_finite(const Chain& c) { return surface_finite(yield_normalize(c).chain); }

}  // namespace tl
