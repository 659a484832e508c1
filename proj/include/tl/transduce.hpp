#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "tl/fta.hpp"
#include "tl/lang_types.hpp"

namespace tl {

// Right-hand sides use variables x1..xk for the translated children.
struct BuRule {
    std::string a;
    StateVec qs;
    State q;
    Tree rhs;
    auto operator<=>(const BuRule&) const = default;
    bool operator==(const BuRule&) const = default;
};

struct BuFtt {
    std::string name;
    RankedAlphabet in, out;
    StateSet states;
    StateSet final;
    std::set<BuRule> rules;
};

// Right-hand sides use state calls q(xi). la[i] names the look-ahead automaton
// for x_{i+1} in the owning transducer's lookahead map; empty means no test.
struct TdRule {
    State q;
    std::string a;
    int k = 0;
    Tree rhs;
    std::vector<std::string> la;
    auto operator<=>(const TdRule&) const = default;
    bool operator==(const TdRule&) const = default;
};

struct TdFtt {
    std::string name;
    RankedAlphabet in, out;
    StateSet states;
    StateSet init;
    std::set<TdRule> rules;
    std::map<std::string, Fta> lookahead;
    bool has_lookahead() const;
};

using Piece = std::variant<Relabeling, Fta, TreeHom, BuFtt, TdFtt>;

constexpr std::size_t kOutputCap = 10000;

std::map<State, TreeSet> apply_states(const BuFtt& m, const Tree& t, std::size_t cap = kOutputCap);
TreeSet apply(const BuFtt& m, const Tree& t, std::size_t cap = kOutputCap);
TreeSet apply_from(const TdFtt& m, const State& q, const Tree& t, std::size_t cap = kOutputCap);
TreeSet apply(const TdFtt& m, const Tree& t, std::size_t cap = kOutputCap);
TreeSet apply_piece(const Piece& p, const Tree& t, std::size_t cap = kOutputCap);
TreeSet apply_chain(const std::vector<Piece>& chain, const Tree& t, std::size_t cap = kOutputCap);
const RankedAlphabet& piece_input(const Piece& p);
RankedAlphabet piece_output(const Piece& p);

struct SubclassFlags {
    bool linear = false;
    bool nondeleting = false;
    bool pure = false;
    bool deterministic = false;
    bool total_deterministic = false;
    bool qrel = false;
};
SubclassFlags classify(const BuFtt& m);
SubclassFlags classify(const TdFtt& m);

enum class Direction { BottomUp, TopDown };
BuFtt embed_bu(const Relabeling& r);
BuFtt embed_bu(const Fta& a);
BuFtt embed_bu(const TreeHom& h);
TdFtt embed_td(const Relabeling& r);
TdFtt embed_td(const Fta& a);
TdFtt embed_td(const TreeHom& h);
TreeHom extract_hom(const BuFtt& m);
TreeHom extract_hom(const TdFtt& m);
bool is_fta_restriction(const BuFtt& m);
Fta restriction_fta(const BuFtt& m);

enum class Scheme { NlbToNlt, NltToNlb, LtToLb, LbToLtr };
Piece convert_linear(const Piece& m, Scheme s);
TdFtt lb_to_ltr(const BuFtt& m);
// Linear top-down (with or without look-ahead) to linear bottom-up.
BuFtt ltr_to_lb(const TdFtt& m);

enum class DecompScheme { BuQrelHom, QrelRelFtaProj, TdCopyHomLt, LdtQrelLhom, TdrRemoveLookahead };
std::vector<Piece> decompose(const Piece& m, DecompScheme s);
struct QrelHom {
    BuFtt qrel;
    TreeHom hom;
};
QrelHom decompose_bu(const BuFtt& m);
struct RelFtaHom {
    Relabeling rel;
    Fta fta;
    TreeHom hom;
};
RelFtaHom decompose_lb(const BuFtt& m);
struct CopyLinear {
    TreeHom copy;
    TdFtt linear;
};
CopyLinear decompose_td(const TdFtt& m);
struct TdQrelHom {
    TdFtt qrel;
    TreeHom hom;
};
TdQrelHom decompose_ldt(const TdFtt& m);
struct RelabelTd {
    BuFtt relabel;
    TdFtt td;
};
RelabelTd remove_lookahead(const TdFtt& m);

BuFtt compose_bu(const BuFtt& m, const BuFtt& n);
BuFtt compose_bu_hom(const BuFtt& m, const TreeHom& h);
BuFtt compose_bu_fta(const BuFtt& m, const Fta& a);
BuFtt compose_bu_dbqrel(const BuFtt& m, const BuFtt& n);
BuFtt compose_lb_rel(const BuFtt& m, const Relabeling& r);

TdFtt compose_tdr(const TdFtt& m, const TdFtt& n);
TdFtt compose_tdr_hom(const TdFtt& m, const TreeHom& h);
TdFtt compose_tdr_tdqrel(const TdFtt& m, const TdFtt& n);
TdFtt compose_tdr_dbqrel(const TdFtt& m, const BuFtt& n);

Fta domain_of(const BuFtt& m);
Fta domain_of(const TdFtt& m);
Fta domain_of(const Piece& p);
Fta inverse_image(const BuFtt& m, const Fta& a);
Fta inverse_image(const Piece& p, const Fta& a);

std::vector<BuFtt> chain_to_bu(const std::vector<Piece>& chain);
std::vector<TdFtt> chain_to_tdr(const std::vector<Piece>& chain);
enum class ChainTarget { Bu, Tdr };
std::vector<Piece> normalize_chain(const std::vector<Piece>& chain, ChainTarget target);

// Compact state renaming; keeps the rule structure.
BuFtt rename_states(const BuFtt& m, const std::string& prefix = "q");
TdFtt rename_states(const TdFtt& m, const std::string& prefix = "q");
BuFtt with_initial(const BuFtt& m, const StateSet& final);
TdFtt with_initial(const TdFtt& m, const StateSet& init);

}  // namespace tl
