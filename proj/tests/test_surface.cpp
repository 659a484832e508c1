#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tl/surface.hpp"
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

// A chain over a finite base, so its whole surface can be listed.
struct FiniteChain {
    Chain chain;
    TreeSet surface;
    std::set<Word> target;
};

FiniteChain random_chain(Rng& rng) {
    FiniteChain fc;
    TreeSet base;
    auto pool = all_trees(kFrom, 2);
    for (int i = 0; i < 4; ++i) base.insert(rng.pick(pool));
    fc.chain.name = "C";
    fc.chain.base = finite_language_fta(base, &kFrom);
    switch (rng.uniform(0, 2)) {
        case 0: fc.chain.stages.push_back(random_bu(rng, kFrom, kTo, {.states = 2})); break;
        case 1: fc.chain.stages.push_back(random_td(rng, kFrom, kTo, {.lookahead = rng.coin(), .states = 2})); break;
        default: fc.chain.stages.push_back(random_hom(rng, kFrom, kTo, rng.coin(), rng.coin())); break;
    }
    if (rng.coin()) fc.chain.stages.push_back(random_hom(rng, kTo, kTo, true, true));
    for (auto& t : base)
        for (auto& u : apply_chain(fc.chain.stages, t)) {
            fc.surface.insert(u);
            fc.target.insert(yield(u));
        }
    return fc;
}

std::vector<Word> words_upto(const std::vector<std::string>& letters, std::size_t n) {
    std::vector<Word> out = {Word{}};
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out[i].size() < n)
            for (auto& a : letters) {
                Word w = out[i];
                w.push_back(a);
                out.push_back(w);
            }
    return out;
}

}  // namespace

TEST_CASE("surface decisions on finite chains", "[surface][property]") {
    Rng rng(51);
    for (int i = 0; i < 25; ++i) {
        auto fc = random_chain(rng);
        auto e = surface_empty(fc.chain);
        CHECK(e.empty == fc.surface.empty());
        if (!e.empty) {
            REQUIRE(e.witness);
            CHECK(fc.surface.count(*e.witness));
        }
        CHECK(surface_finite(fc.chain));
        for (auto& t : all_trees(kTo, 2)) CHECK(surface_member(fc.chain, t) == (fc.surface.count(t) > 0));
        // Membership pulls a one-tree automaton back through every stage, which
        // grows with the tree size times the copying; large trees are skipped.
        for (auto& t : fc.surface)
            if (size_of(t) <= 30) CHECK(surface_member(fc.chain, t));
    }
}

TEST_CASE("target decisions on finite chains", "[surface][property]") {
    Rng rng(52);
    for (int i = 0; i < 25; ++i) {
        auto fc = random_chain(rng);
        CHECK(target_empty(fc.chain) == fc.target.empty());
        CHECK(target_finite(fc.chain));
        for (auto& w : words_upto({"a", "b"}, 4)) CHECK(target_member(fc.chain, w) == (fc.target.count(w) > 0));
    }
}

TEST_CASE("doubling chain", "[surface]") {
    Workspace ws = load("chain.tl");
    const Chain& dbl = ws.chain("Doubling");
    CHECK_FALSE(surface_empty(dbl).empty);
    CHECK_FALSE(surface_finite(dbl));
    CHECK(surface_member(dbl, parse_term("b[b[a a] b[a a]]")));
    CHECK_FALSE(surface_member(dbl, parse_term("b[a b[a a]]")));
    for (int n = 1; n <= 16; ++n) CHECK(target_member(dbl, Word(n, "a")) == ((n & (n - 1)) == 0));
    CHECK_FALSE(target_finite(dbl));
    CHECK(surface_empty(ws.chain("EmptyBase")).empty);
    CHECK(target_empty(ws.chain("EmptyBase")));
    CHECK(surface_finite(ws.chain("FiniteBase")));
    CHECK(target_member(ws.chain("FiniteBase"), Word(4, "a")));
    CHECK_FALSE(target_member(ws.chain("FiniteBase"), Word(8, "a")));
}

TEST_CASE("images of linear bottom-up transducers", "[surface][property]") {
    Rng rng(53);
    for (int i = 0; i < 20; ++i) {
        BuFtt m = random_bu(rng, kFrom, kTo, {.linear = true, .states = 2});
        Fta a = random_nbu(rng, kFrom, 2);
        Fta img = lb_image(m, a);
        TreeSet ref;
        for (auto& t : all_trees(kFrom, 3))
            if (nbu_accepts(a, t))
                for (auto& u : apply(m, t)) ref.insert(u);
        for (auto& u : ref) CHECK(accepts(img, u));
        for (auto& u : all_trees(kTo, 1))
            if (accepts(img, u) && !ref.count(u)) {
                // A small image tree may come from a taller input; check it by a bounded search.
                bool found = false;
                for (auto& t : all_trees(kFrom, 4))
                    if (!found && nbu_accepts(a, t) && apply(m, t).count(u)) found = true;
                CHECK(found);
            }
    }
}

TEST_CASE("path transducer lists root-to-leaf paths", "[surface]") {
    TdFtt p = path_transducer(kFrom);
    CHECK(apply(p, parse_term("g[a f[a]]")) == TreeSet{parse_term("g[a[e]]"), parse_term("g[f[a[e]]]")});
    for (auto& t : all_trees(kFrom, 3)) CHECK(apply(p, t).size() == paths_of(t).size());
}
