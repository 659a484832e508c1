#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "tl/core.hpp"

using namespace tl;
using namespace oracle;

TEST_CASE("terms print and parse back", "[core]") {
    for (std::string s : {"a", "f[a]", "g[a f[b]]", "+[*[1 0] -[a]]", "x1", "g[x2 x1]"})
        CHECK(print(parse_term(s)) == s);
    CHECK(parse_term("g[ a   f[b] ]") == parse_term("g[a f[b]]"));
    CHECK(parse_term("x2").is_var());
    CHECK(parse_term("x2").var == 2);
}

TEST_CASE("malformed terms raise syntax errors", "[core]") {
    for (std::string s : {"", "g[a", "g[a]]", "[a]", "g[]"}) {
        INFO(s);
        try {
            parse_term(s);
            FAIL("accepted");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Syntax);
        }
    }
}

TEST_CASE("random terms round-trip through print", "[core][property]") {
    Rng rng(1);
    auto sigma = alphabet({{"a", 0}, {"b", 0}, {"f", 1}, {"g", 2}, {"h", 3}});
    for (int i = 0; i < 500; ++i) {
        Tree t = random_tree(rng, sigma, rng.uniform(0, 5));
        CHECK(parse_term(print(t)) == t);
    }
}

TEST_CASE("yield, height, size and paths", "[core]") {
    Tree t = parse_term("g[f[a] g[b e]]");
    CHECK(yield_of(t) == Word{"a", "b"});
    CHECK(height_of(t) == 2);
    CHECK(height_of(parse_term("a")) == 0);
    CHECK(size_of(t) == 6);
    CHECK(paths_of(t) == std::set<Word>{{"g", "f", "a"}, {"g", "g", "b"}, {"g", "g", "e"}});
}

TEST_CASE("yield and height agree with the oracle", "[core][property]") {
    Rng rng(2);
    auto sigma = alphabet({{"a", 0}, {"e", 0}, {"f", 1}, {"g", 2}});
    for (int i = 0; i < 300; ++i) {
        Tree t = random_tree(rng, sigma, rng.uniform(0, 4));
        CHECK(yield_of(t) == yield(t));
        CHECK(height_of(t) == height(t));
    }
}

TEST_CASE("rank checking", "[core]") {
    auto sigma = alphabet({{"a", 0}, {"f", 1}, {"g", 2}});
    CHECK(check_ranked(parse_term("g[a f[a]]"), sigma).ok);
    CHECK_FALSE(check_ranked(parse_term("g[a]"), sigma).ok);
    CHECK_FALSE(check_ranked(parse_term("h[a]"), sigma).ok);
    CHECK_FALSE(check_ranked(parse_term("f[x1]"), sigma).ok);
    CHECK(check_ranked(parse_term("f[x1]"), sigma, 1).ok);
    CHECK_FALSE(check_ranked(parse_term("f[x2]"), sigma, 1).ok);
    CHECK_THROWS_AS(require_ranked(parse_term("g[a]"), sigma), Error);
}

TEST_CASE("symbols may carry several ranks", "[core]") {
    RankedAlphabet s;
    s.add("p", 2);
    s.add("p", 3);
    s.add("a", 0);
    CHECK(s.has("p", 2));
    CHECK(s.has("p", 3));
    CHECK_FALSE(s.has("p", 1));
    CHECK(s.max_rank() == 3);
    CHECK(s.of_rank(0) == std::vector<std::string>{"a"});
    CHECK(check_ranked(parse_term("p[a a a]"), s).ok);
}

TEST_CASE("top and tree concatenation", "[core]") {
    auto sigma = alphabet({{"a", 0}, {"b", 0}, {"g", 2}});
    CHECK(top_concat("g", {parse_term("a"), parse_term("b")}, &sigma) == parse_term("g[a b]"));
    CHECK_THROWS_AS(top_concat("g", {parse_term("a")}, &sigma), Error);
    Tree t = parse_term("g[a g[b a]]");
    CHECK(tree_concat(t, {{"a", parse_term("g[b b]")}}) == parse_term("g[g[b b] g[b g[b b]]]"));
    CHECK(substitute(parse_term("g[x2 x1]"), {parse_term("a"), parse_term("b")}) == parse_term("g[b a]"));
}

TEST_CASE("variable counts and linearity", "[core]") {
    Tree t = parse_term("g[x1 g[x1 x3]]");
    CHECK(max_var(t) == 3);
    CHECK(var_counts(t) == std::map<int, int>{{1, 2}, {3, 1}});
    CHECK_FALSE(is_linear(t));
    CHECK(is_linear(parse_term("g[x2 x1]")));
    CHECK(is_nondeleting(parse_term("g[x2 x1]"), 2));
    CHECK_FALSE(is_nondeleting(t, 3));
}

TEST_CASE("monadic encodings invert", "[core][property]") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        Word w;
        int n = rng.uniform(1, 6);
        for (int j = 0; j < n; ++j) w.push_back(rng.coin() ? "a" : "b");
        for (auto mode : {MonadicMode::M, MonadicMode::TopDown, MonadicMode::BottomUp})
            CHECK(monadic_decode(monadic_encode(w, mode), mode) == w);
    }
    CHECK(monadic_encode({"a", "b"}, MonadicMode::TopDown) == parse_term("a[b[e]]"));
    CHECK(monadic_encode({"a", "b"}, MonadicMode::BottomUp) == parse_term("b[a[e]]"));
    CHECK(monadic_encode({"a", "b"}, MonadicMode::M) == parse_term("a[b]"));
}

TEST_CASE("enumeration matches the brute-force listing", "[core][property]") {
    auto sigma = alphabet({{"a", 0}, {"b", 0}, {"f", 1}, {"g", 2}});
    for (int h = 0; h <= 3; ++h) {
        auto got = enumerate_trees(sigma, h);
        auto ref = all_trees(sigma, h);
        CHECK(TreeSet(got.begin(), got.end()) == TreeSet(ref.begin(), ref.end()));
        CHECK(got.size() == ref.size());
        for (std::size_t i = 1; i < got.size(); ++i) CHECK(canonical_less(got[i - 1], got[i]));
    }
    CHECK_THROWS_AS(enumerate_trees(sigma, 4, 100), Error);
}

TEST_CASE("fresh names avoid taken ones", "[core]") {
    CHECK(fresh_name("q", {}) == "q");
    CHECK(fresh_name("q", {"q", "q_1"}) == "q_2");
    CHECK(fresh_name("x1", {}) != "x1");
}

TEST_CASE("tuples enumerate the product", "[core]") {
    std::vector<std::vector<int>> c = {{1, 2}, {3, 4, 5}};
    int n = 0;
    for_tuples(c, [&](const std::vector<int>&) { ++n; });
    CHECK(n == 6);
    c.push_back({});
    n = 0;
    for_tuples(c, [&](const std::vector<int>&) { ++n; });
    CHECK(n == 0);
}
