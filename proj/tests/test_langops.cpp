#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tl/grammar.hpp"
#include "tl/langops.hpp"
#include "tl/workspace.hpp"

using namespace tl;
using namespace oracle;

namespace {

const RankedAlphabet kSigma = alphabet({{"a", 0}, {"b", 0}, {"f", 1}, {"g", 2}}, "S");

TreeSet upto(const Rtg& g, int h) {
    auto ts = enumerate_rtg(g, h);
    return TreeSet(ts.begin(), ts.end());
}

TreeSet cut(const TreeSet& ts, int h) {
    TreeSet out;
    for (auto& t : ts)
        if (height(t) <= h) out.insert(t);
    return out;
}

// A small finite language as a grammar.
Rtg finite(std::initializer_list<const char*> terms) {
    TreeSet ts;
    for (auto s : terms) ts.insert(parse_term(s));
    return finite_rtg(ts, kSigma);
}

}  // namespace

TEST_CASE("relabelings list every choice", "[langops]") {
    Relabeling r;
    r.from = kSigma;
    r.to = kSigma;
    r.map[{"a", 0}] = {"a", "b"};
    r.map[{"b", 0}] = {"b"};
    r.map[{"f", 1}] = {"f"};
    r.map[{"g", 2}] = {"g"};
    TreeSet got = apply_relabeling(r, parse_term("g[a f[a]]"));
    CHECK(got == TreeSet{parse_term("g[a f[a]]"), parse_term("g[a f[b]]"), parse_term("g[b f[a]]"), parse_term("g[b f[b]]")});
    CHECK_FALSE(r.is_projection());
}

TEST_CASE("homomorphisms agree with direct substitution", "[langops][property]") {
    Rng rng(31);
    for (int i = 0; i < 30; ++i) {
        TreeHom h = random_hom(rng, kSigma, kSigma, rng.coin(), rng.coin());
        for (int j = 0; j < 20; ++j) {
            Tree t = random_tree(rng, kSigma, 3);
            CHECK(apply_hom(h, t) == hom_apply(h, t));
        }
    }
}

TEST_CASE("the mirror homomorphism is an involution", "[langops]") {
    Workspace ws;
    ws.add_file(std::string(TL_DATA_DIR) + "/grammars.tl");
    ws.resolve();
    const TreeHom& m = ws.hom("Mirror");
    CHECK(m.is_linear());
    CHECK(m.is_nondeleting());
    CHECK(apply_hom(m, parse_term("p[a p[a b]]")) == parse_term("p[p[b a] a]"));
    for (auto& t : all_trees(m.from, 3)) CHECK(apply_hom(m, apply_hom(m, t)) == t);
}

TEST_CASE("linear images of grammars", "[langops][property]") {
    Rng rng(32);
    Rtg g = finite({"a", "f[b]", "g[a f[a]]", "g[b b]", "g[f[a] g[b a]]"});
    TreeSet lang = upto(g, 3);
    for (int i = 0; i < 30; ++i) {
        TreeHom h = random_hom(rng, kSigma, kSigma, true, rng.coin());
        TreeSet ref;
        for (auto& t : lang) ref.insert(hom_apply(h, t));
        CHECK(upto(linear_hom_image(h, g), 12) == ref);
    }
}

TEST_CASE("inverse images of automata", "[langops][property]") {
    Rng rng(33);
    for (int i = 0; i < 20; ++i) {
        TreeHom h = random_hom(rng, kSigma, kSigma, rng.coin(), rng.coin());
        Fta a = random_nbu(rng, kSigma, rng.uniform(1, 3));
        Fta inv = inverse_hom(h, a);
        for (auto& t : all_trees(kSigma, 2)) CHECK(accepts(inv, t) == nbu_accepts(a, hom_apply(h, t)));
    }
}

TEST_CASE("relabeled grammars", "[langops]") {
    Relabeling r;
    r.from = kSigma;
    r.to = kSigma;
    r.map[{"a", 0}] = {"a", "b"};
    r.map[{"b", 0}] = {"b"};
    r.map[{"f", 1}] = {"f"};
    r.map[{"g", 2}] = {"g"};
    Rtg g = finite({"g[a a]", "f[b]"});
    TreeSet ref;
    for (auto& t : upto(g, 3))
        for (auto& u : apply_relabeling(r, t)) ref.insert(u);
    CHECK(upto(relabel_image(r, g), 3) == ref);
}

TEST_CASE("language operations on finite sets", "[langops]") {
    Rtg l = finite({"a", "g[a b]"});
    Rtg m = finite({"b", "f[b]"});
    CHECK(upto(lang_union(l, m), 3) == TreeSet{parse_term("a"), parse_term("g[a b]"), parse_term("b"), parse_term("f[b]")});
    CHECK(upto(lang_top_concat("g", {l, m}), 3) ==
          TreeSet{parse_term("g[a b]"), parse_term("g[a f[b]]"), parse_term("g[g[a b] b]"), parse_term("g[g[a b] f[b]]")});
    TreeSet lt = upto(l, 3), mt = upto(m, 3);
    CHECK(upto(lang_concat_at(l, {{"a", m}}), 4) == concat_sets(lt, "a", mt));
}

TEST_CASE("concatenation replaces occurrences independently", "[langops]") {
    TreeSet l = {parse_term("g[a a]")}, m = {parse_term("b"), parse_term("f[b]")};
    CHECK(concat_sets(l, "a", m).size() == 4);
    CHECK(concat_sets_det(l, "a", m).size() == 2);
}

TEST_CASE("iteration matches bounded unfolding", "[langops]") {
    Rtg l = finite({"g[a b]", "f[a]"});
    Rtg s = lang_star_at(l, "a");
    TreeSet lt = upto(l, 2);
    TreeSet acc = {parse_term("a")};
    for (int i = 0; i < 5; ++i) {
        TreeSet next = acc;
        for (auto& t : concat_sets(lt, "a", acc)) next.insert(t);
        acc = next;
    }
    CHECK(upto(s, 4) == cut(acc, 4));
}

TEST_CASE("regular tree expressions round trip", "[langops]") {
    Workspace ws;
    ws.add_file(std::string(TL_DATA_DIR) + "/grammars.tl");
    ws.resolve();
    for (std::string name : {"Comb", "Two"}) {
        INFO(name);
        const Rtg& g = ws.rtg(name);
        RegExprPtr e = kleene(g);
        Rtg back = eval(*e, g.sigma);
        CHECK(upto(back, 4) == upto(g, 4));
        std::string text = print(*e);
        CHECK(print(*parse_regexpr(text)) == text);
    }
}

TEST_CASE("reduction keeps the language", "[langops]") {
    Rtg g = finite({"a", "f[b]"});
    g.nonterminals.insert("Dead");
    g.rules.insert({"Dead", parse_term("f[Dead]")});
    Rtg r = reduce_rtg(g);
    CHECK_FALSE(r.nonterminals.count("Dead"));
    CHECK(upto(r, 3) == upto(g, 3));
}
