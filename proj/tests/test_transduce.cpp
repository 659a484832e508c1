#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tl/langops.hpp"
#include "tl/transduce.hpp"
#include "tl/workspace.hpp"

using namespace tl;
using namespace oracle;

namespace {

const RankedAlphabet kFrom = alphabet({{"a", 0}, {"f", 1}, {"g", 2}}, "In");
const RankedAlphabet kTo = alphabet({{"a", 0}, {"b", 0}, {"f", 1}, {"g", 2}}, "Out");

Workspace load(const std::string& file) {
    Workspace ws;
    ws.add_file(std::string(TL_DATA_DIR) + "/" + file);
    ws.resolve();
    return ws;
}

TreeSet chain_apply(const std::vector<Piece>& ps, const Tree& t) { return apply_chain(ps, t); }

}  // namespace

TEST_CASE("bottom-up application matches rewriting", "[transduce][property]") {
    Rng rng(41);
    for (int i = 0; i < 20; ++i) {
        BuFtt m = random_bu(rng, kFrom, kTo, {.linear = i % 3 == 0, .deterministic = i % 4 == 0, .states = rng.uniform(1, 2)});
        for (auto& t : all_trees(kFrom, 2)) CHECK(apply(m, t) == rewrite_bu(m, t));
    }
}

TEST_CASE("top-down application matches rewriting", "[transduce][property]") {
    Rng rng(42);
    for (int i = 0; i < 20; ++i) {
        TdFtt m = random_td(rng, kFrom, kTo, {.deterministic = i % 4 == 0, .lookahead = i % 2 == 0, .states = rng.uniform(1, 2)});
        for (auto& t : all_trees(kFrom, 2)) CHECK(apply(m, t) == rewrite_td(m, t));
    }
}

TEST_CASE("doubling transducer and its homomorphism agree", "[transduce]") {
    Workspace ws = load("double.tl");
    BuFtt m = std::get<BuFtt>(ws.piece("Double"));
    const TreeHom& h = ws.hom("DoubleHom");
    CHECK(apply(m, parse_term("b[b[a]]")) == TreeSet{parse_term("b[b[a a] b[a a]]")});
    for (auto& t : all_trees(m.in, 4)) CHECK(apply(m, t) == TreeSet{apply_hom(h, t)});
    auto f = classify(m);
    CHECK(f.pure);
    CHECK(f.total_deterministic);
    CHECK_FALSE(f.linear);
    CHECK(extract_hom(m).map == h.map);
}

TEST_CASE("derivative transducer", "[transduce]") {
    Workspace ws = load("deriv.tl");
    TdFtt m = std::get<TdFtt>(ws.piece("Deriv"));
    CHECK(apply(m, parse_term("sin[a]")) == TreeSet{parse_term("*[cos[a] 1]")});
    CHECK(apply(m, parse_term("+[a b]")) == TreeSet{parse_term("+[1 0]")});
    auto f = classify(m);
    CHECK(f.deterministic);
    CHECK_FALSE(f.linear);
}

TEST_CASE("copying with nondeterministic relabeling", "[transduce]") {
    Workspace ws = load("copy.tl");
    BuFtt m = std::get<BuFtt>(ws.piece("Copy"));
    CHECK(apply(m, parse_term("f[a[e]]")) == TreeSet{parse_term("f[a[e] a[e]]"), parse_term("f[b[e] b[e]]")});
    CHECK_FALSE(classify(m).deterministic);
}

TEST_CASE("embeddings behave like the embedded object", "[transduce][property]") {
    Rng rng(43);
    for (int i = 0; i < 10; ++i) {
        TreeHom h = random_hom(rng, kFrom, kTo, rng.coin(), rng.coin());
        Fta a = random_nbu(rng, kFrom, 2);
        for (auto& t : all_trees(kFrom, 2)) {
            CHECK(apply(embed_bu(h), t) == TreeSet{hom_apply(h, t)});
            CHECK(apply(embed_td(h), t) == TreeSet{hom_apply(h, t)});
            TreeSet keep = nbu_accepts(a, t) ? TreeSet{t} : TreeSet{};
            CHECK(apply(embed_bu(a), t) == keep);
            CHECK(apply(embed_td(a), t) == keep);
        }
        CHECK(is_fta_restriction(embed_bu(a)));
    }
}

TEST_CASE("linear conversions keep the translation", "[transduce][property]") {
    Rng rng(44);
    for (int i = 0; i < 15; ++i) {
        BuFtt m = random_bu(rng, kFrom, kTo, {.linear = true, .states = 2});
        TdFtt t = lb_to_ltr(m);
        CHECK(classify(t).linear);
        for (auto& x : all_trees(kFrom, 2)) CHECK(apply(t, x) == apply(m, x));
        BuFtt back = ltr_to_lb(t);
        for (auto& x : all_trees(kFrom, 2)) CHECK(apply(back, x) == apply(m, x));
    }
    for (int i = 0; i < 15; ++i) {
        TdFtt m = random_td(rng, kFrom, kTo, {.linear = true, .lookahead = i % 2 == 0, .states = 2});
        BuFtt b = ltr_to_lb(m);
        for (auto& x : all_trees(kFrom, 2)) CHECK(apply(b, x) == apply(m, x));
    }
}

TEST_CASE("decompositions give the same translation", "[transduce][property]") {
    Rng rng(45);
    auto small = all_trees(kFrom, 2);
    for (int i = 0; i < 8; ++i) {
        BuFtt b = random_bu(rng, kFrom, kTo, {.states = 2});
        auto d = decompose_bu(b);
        CHECK(classify(d.qrel).qrel);
        for (auto& t : small) CHECK(chain_apply({d.qrel, d.hom}, t) == apply(b, t));
        TdFtt m = random_td(rng, kFrom, kTo, {.states = 2});
        auto c = decompose_td(m);
        CHECK(classify(c.linear).linear);
        for (auto& t : small) CHECK(chain_apply({c.copy, c.linear}, t) == apply(m, t));
        TdFtt la = random_td(rng, kFrom, kTo, {.lookahead = true, .states = 2});
        auto r = remove_lookahead(la);
        CHECK_FALSE(r.td.has_lookahead());
        for (auto& t : small) CHECK(chain_apply({r.relabel, r.td}, t) == apply(la, t));
    }
}

TEST_CASE("compositions give the sequential translation", "[transduce][property]") {
    Rng rng(46);
    auto small = all_trees(kFrom, 2);
    auto seq = [](auto f, auto g, const Tree& t) {
        return apply_then([&](const Tree& x) { return apply(f, x); }, [&](const Tree& x) { return apply(g, x); }, t);
    };
    for (int i = 0; i < 8; ++i) {
        BuFtt m = random_bu(rng, kFrom, kTo, {.states = 2});
        BuFtt n = random_bu(rng, kTo, kTo, {.deterministic = true, .states = 2});
        BuFtt k = compose_bu(m, n);
        for (auto& t : small) CHECK(apply(k, t) == seq(m, n, t));
        TdFtt p = random_td(rng, kFrom, kTo, {.deterministic = true, .states = 2});
        TdFtt q = random_td(rng, kTo, kTo, {.deterministic = true, .states = 2});
        TdFtt pq = compose_tdr(p, q);
        for (auto& t : small) CHECK(apply(pq, t) == seq(p, q, t));
    }
}

TEST_CASE("composition refuses unsupported pairs", "[transduce]") {
    Workspace ws = load("copy.tl");
    BuFtt copy = std::get<BuFtt>(ws.piece("Copy"));
    BuFtt twice = copy;
    twice.in = copy.out;
    try {
        compose_bu(copy, twice);
        FAIL("composed");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::FlagViolation);
    }
}

TEST_CASE("domains and inverse images", "[transduce][property]") {
    Rng rng(47);
    for (int i = 0; i < 10; ++i) {
        BuFtt m = random_bu(rng, kFrom, kTo, {.states = 2, .density = 0.4});
        Fta dom = domain_of(m);
        Fta a = random_nbu(rng, kTo, 2);
        Fta inv = inverse_image(m, a);
        for (auto& t : all_trees(kFrom, 2)) {
            TreeSet out = apply(m, t);
            CHECK(accepts(dom, t) == !out.empty());
            bool hit = false;
            for (auto& u : out) hit |= nbu_accepts(a, u);
            CHECK(accepts(inv, t) == hit);
        }
        TdFtt td = random_td(rng, kFrom, kTo, {.lookahead = true, .states = 2});
        Fta tdom = domain_of(td);
        for (auto& t : all_trees(kFrom, 2)) CHECK(accepts(tdom, t) == !apply(td, t).empty());
    }
}

TEST_CASE("state renaming keeps the translation", "[transduce]") {
    Rng rng(48);
    BuFtt m = random_bu(rng, kFrom, kTo, {.states = 3});
    BuFtt r = rename_states(m, "s");
    for (auto& q : r.states) CHECK(q.rfind("s", 0) == 0);
    for (auto& t : all_trees(kFrom, 2)) CHECK(apply(r, t) == apply(m, t));
}
