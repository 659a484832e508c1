#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tl/fta.hpp"

using namespace tl;
using namespace oracle;

namespace {

const RankedAlphabet kSigma = alphabet({{"a", 0}, {"b", 0}, {"f", 1}, {"g", 2}}, "S");

std::vector<Tree> small_trees() { return all_trees(kSigma, 3); }

// Trees over kSigma with an even number of b leaves.
Fta even_b() {
    Fta a;
    a.name = "Even";
    a.sigma = kSigma;
    a.states = {"0", "1"};
    a.final = {"0"};
    a.add_leaf("a", "0");
    a.add_leaf("b", "1");
    for (State p : {"0", "1"}) {
        a.add_trans("f", {p}, p);
        for (State q : {"0", "1"}) a.add_trans("g", {p, q}, p == q ? "0" : "1");
    }
    return a;
}

int count_b(const Tree& t) {
    int n = t.label == "b";
    for (auto& k : t.kids) n += count_b(k);
    return n;
}

}  // namespace

TEST_CASE("a deterministic run labels every node", "[fta]") {
    Fta a = even_b();
    CHECK(a.is_deterministic());
    auto r = run(a, parse_term("g[b f[b]]"));
    CHECK(r.states == StateSet{"0"});
    CHECK(r.accepted);
    auto nodes = run_annotated(a, parse_term("g[b a]"));
    REQUIRE(nodes.size() == 3);
    CHECK(nodes[0].second == StateSet{"1"});
    CHECK(nodes[1].second == StateSet{"1"});
    CHECK(nodes[2].second == StateSet{"0"});
    for (auto& t : small_trees()) CHECK(accepts(a, t) == (count_b(t) % 2 == 0));
}

TEST_CASE("determinization preserves the language", "[fta][property]") {
    Rng rng(11);
    for (int i = 0; i < 25; ++i) {
        Fta n = random_nbu(rng, kSigma, rng.uniform(1, 4));
        Fta d = determinize(n);
        CHECK(d.is_deterministic());
        for (auto& t : small_trees()) CHECK(accepts(d, t) == nbu_accepts(n, t));
    }
}

TEST_CASE("boolean operations follow set logic", "[fta][property]") {
    Rng rng(12);
    for (int i = 0; i < 20; ++i) {
        Fta a = random_nbu(rng, kSigma, rng.uniform(1, 3));
        Fta b = random_nbu(rng, kSigma, rng.uniform(1, 3));
        Fta c = complement(a), x = intersection(a, b), u = union_of(a, b);
        for (auto& t : all_trees(kSigma, 2)) {
            bool ia = nbu_accepts(a, t), ib = nbu_accepts(b, t);
            CHECK(accepts(c, t) == !ia);
            CHECK(accepts(x, t) == (ia && ib));
            CHECK(accepts(u, t) == (ia || ib));
        }
    }
}

TEST_CASE("emptiness gives an accepted witness", "[fta][property]") {
    Rng rng(13);
    for (int i = 0; i < 40; ++i) {
        Fta a = random_nbu(rng, kSigma, rng.uniform(1, 4), 0.2);
        auto r = decide_empty(a);
        bool any = false;
        for (auto& t : small_trees()) any |= nbu_accepts(a, t);
        if (any) CHECK_FALSE(r.empty);
        if (!r.empty) {
            REQUIRE(r.witness);
            CHECK(nbu_accepts(a, *r.witness));
        }
    }
    CHECK(decide_empty(empty_fta(kSigma)).empty);
    CHECK_FALSE(decide_empty(universal_fta(kSigma)).empty);
}

TEST_CASE("finiteness matches bounded enumeration", "[fta]") {
    CHECK_FALSE(decide_finite(even_b()));
    TreeSet ts = {parse_term("a"), parse_term("g[a b]"), parse_term("f[f[b]]")};
    Fta fin = finite_language_fta(ts, &kSigma);
    CHECK(decide_finite(fin));
    for (auto& t : small_trees()) CHECK(accepts(fin, t) == (ts.count(t) > 0));
    auto got = accepted_trees(fin, 5);
    CHECK(TreeSet(got.begin(), got.end()) == ts);
}

TEST_CASE("accepted trees agree with filtering", "[fta][property]") {
    Rng rng(14);
    for (int i = 0; i < 20; ++i) {
        Fta a = random_nbu(rng, kSigma, rng.uniform(1, 3));
        auto got = accepted_trees(a, 3);
        TreeSet ref;
        for (auto& t : small_trees())
            if (nbu_accepts(a, t)) ref.insert(t);
        CHECK(TreeSet(got.begin(), got.end()) == ref);
    }
}

TEST_CASE("inclusion and equivalence", "[fta]") {
    Fta e = even_b();
    Fta both = intersection(e, complement(finite_language_fta({parse_term("a")}, &kSigma)));
    CHECK(decide_inclusion(both, e).included);
    auto r = decide_inclusion(e, both);
    CHECK_FALSE(r.included);
    REQUIRE(r.counterexample);
    CHECK(*r.counterexample == parse_term("a"));
    CHECK(decide_equivalent(e, determinize(e)));
    CHECK(decide_equivalent(e, complement(complement(e))));
    CHECK_FALSE(decide_equivalent(e, complement(e)));
}

TEST_CASE("pumping keeps trees in the language", "[fta][property]") {
    Fta a = even_b();
    Rng rng(15);
    int tried = 0;
    for (int i = 0; i < 200 && tried < 30; ++i) {
        Tree t = random_tree(rng, kSigma, 5);
        if (!accepts(a, t) || height_of(t) < 3) continue;
        ++tried;
        Pumping p = pump(a, t);
        CHECK(pumped(p, 1) == t);
        CHECK(count_var(p.u, 1) == 1);
        CHECK(count_var(p.v, 1) == 1);
        CHECK(p.v != Tree::variable(1));
        for (int n : {0, 2, 3}) CHECK(accepts(a, pumped(p, n)));
    }
    CHECK(tried > 0);
}

TEST_CASE("top-down and bottom-up automata convert both ways", "[fta][property]") {
    Rng rng(16);
    for (int i = 0; i < 15; ++i) {
        Fta n = random_nbu(rng, kSigma, rng.uniform(1, 3));
        TdFta td = associate(n);
        Fta back = associate(td);
        for (auto& t : all_trees(kSigma, 2)) {
            CHECK(accepts(td, t) == nbu_accepts(n, t));
            CHECK(accepts(back, t) == nbu_accepts(n, t));
            CHECK(accepts(td_to_bu(td), t) == nbu_accepts(n, t));
        }
    }
}

TEST_CASE("yields in a regular language", "[fta]") {
    Dfa m;
    m.alphabet = {"a", "b"};
    m.states = {"s", "t"};
    m.start = "s";
    m.final = {"t"};
    m.trans[{"s", "a"}] = "t";
    m.trans[{"t", "a"}] = "t";
    m.trans[{"s", "b"}] = "s";
    m.trans[{"t", "b"}] = "s";
    auto sigma = alphabet({{"a", 0}, {"b", 0}, {"e", 0}, {"g", 2}});
    Fta y = yield_in_regular(sigma, m);
    for (auto& t : all_trees(sigma, 2)) CHECK(accepts(y, t) == m.accepts(yield(t)));
    CHECK(word_dfa({"a", "b"}, {"a", "b"}).accepts({"a", "b"}));
    CHECK_FALSE(word_dfa({"a", "b"}, {"a", "b"}).accepts({"a"}));
    CHECK(all_words_dfa({"a"}).accepts({}));
}

TEST_CASE("state names of subsets and pairs", "[fta]") {
    CHECK(subset_name({"p", "q"}) == "{p,q}");
    CHECK(subset_name({}) == "{}");
    CHECK(pair_name("p", "q") != pair_name("q", "p"));
}
