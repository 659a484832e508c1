#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tl/core.hpp"

namespace tl {

using State = std::string;
using StateSet = std::set<State>;
using StateVec = std::vector<State>;

// Bottom-up automaton. Deterministic automata use the same representation with
// singleton leaf/transition sets; is_deterministic() checks that and totality.
struct Fta {
    std::string name;
    RankedAlphabet sigma;
    StateSet states;
    std::map<std::string, StateSet> leaf;
    std::map<std::pair<std::string, StateVec>, StateSet> trans;
    StateSet final;

    void add_leaf(const std::string& a, const State& q) { leaf[a].insert(q); }
    void add_trans(const std::string& a, const StateVec& qs, const State& q) { trans[{a, qs}].insert(q); }
    bool is_deterministic() const;
};

// Top-down automaton (deterministic when init is a singleton and every
// transition set has exactly one member).
struct TdFta {
    std::string name;
    RankedAlphabet sigma;
    StateSet states;
    StateSet init;
    std::map<std::tuple<State, std::string, int>, std::set<StateVec>> trans;
    std::map<std::string, StateSet> leaf_final;
    bool is_deterministic() const;
};

struct Dfa {
    std::string name;
    std::vector<std::string> alphabet;
    StateSet states;
    State start;
    StateSet final;
    std::map<std::pair<State, std::string>, State> trans;
    bool accepts(const Word& w) const;
};

std::string subset_name(const StateSet& s);
std::string pair_name(const State& a, const State& b);

struct RunResult {
    StateSet states;
    bool accepted = false;
};

StateSet run_states(const Fta& a, const Tree& t);
// Runs over a tree with variables, variable x_i starting in vars[i-1].
StateSet run_states(const Fta& a, const Tree& t, const std::vector<StateSet>& vars);
RunResult run(const Fta& a, const Tree& t);
bool accepts(const Fta& a, const Tree& t);
StateSet run_states(const TdFta& a, const Tree& t);
RunResult run(const TdFta& a, const Tree& t);
bool accepts(const TdFta& a, const Tree& t);

// Per-node states in preorder (used for the annotated run listing).
std::vector<std::pair<Tree, StateSet>> run_annotated(const Fta& a, const Tree& t);

Fta determinize(const Fta& a);
Fta complete(const Fta& a);
TdFta associate(const Fta& a);
Fta associate(const TdFta& a);
Fta td_to_bu(const TdFta& a);

enum class BoolOp { Complement, Intersection, Union };
Fta boolean_op(const Fta& a, const Fta* b, BoolOp op);
Fta complement(const Fta& a);
Fta intersection(const Fta& a, const Fta& b);
Fta union_of(const Fta& a, const Fta& b);

Fta with_alphabet(const Fta& a, const RankedAlphabet& sigma);
Fta rename_compact(const Fta& a, const std::string& prefix = "q");
Fta trim(const Fta& a);
Fta universal_fta(const RankedAlphabet& sigma);
Fta empty_fta(const RankedAlphabet& sigma);

struct EmptinessResult {
    bool empty = true;
    std::optional<Tree> witness;
};
EmptinessResult decide_empty(const Fta& a);
// Least tree (height, then printed form) reaching each productive state.
std::map<State, Tree> state_witnesses(const Fta& a);
bool decide_finite(const Fta& a);
struct InclusionResult {
    bool included = true;
    std::optional<Tree> counterexample;
};
InclusionResult decide_inclusion(const Fta& a, const Fta& b);
bool decide_equivalent(const Fta& a, const Fta& b);

struct Pumping {
    Tree u, v, w;  // u and v contain the hole variable x1 once
};
Pumping pump(const Fta& a, const Tree& t);
Tree pumped(const Pumping& p, int n);

Fta yield_in_regular(const RankedAlphabet& sigma, const Dfa& m);
Fta finite_language_fta(const TreeSet& ts, const RankedAlphabet* sigma = nullptr);
Dfa word_dfa(const Word& w, const std::vector<std::string>& alphabet);
Dfa all_words_dfa(const std::vector<std::string>& alphabet);

std::vector<Tree> accepted_trees(const Fta& a, int max_height, std::size_t cap = kDefaultCap);

}  // namespace tl
