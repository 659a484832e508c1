#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tl/fta.hpp"
#include "tl/lang_types.hpp"

namespace tl {

TreeSet apply_relabeling(const Relabeling& r, const Tree& t);
Tree apply_hom(const TreeHom& h, const Tree& t);
// Applies h to the symbols of t; variables, state calls and the listed rank-0
// atoms (e.g. nonterminals) are kept in place.
Tree apply_hom_open(const TreeHom& h, const Tree& t, const std::set<std::string>& atoms = {});
TreeSet relabel_open(const Relabeling& r, const Tree& t, const std::set<std::string>& atoms = {});

Rtg relabel_image(const Relabeling& r, const Rtg& g);
Rtg linear_hom_image(const TreeHom& h, const Rtg& g);
Fta inverse_hom(const TreeHom& h, const Fta& a);
Rtg reduce_rtg(const Rtg& g);

Rtg finite_rtg(const TreeSet& ts, const RankedAlphabet& sigma);
Rtg lang_union(const Rtg& a, const Rtg& b);
Rtg lang_top_concat(const std::string& a, const std::vector<Rtg>& gs);
Rtg lang_concat_at(const Rtg& g, const std::map<std::string, Rtg>& bindings);
Rtg lang_star_at(const Rtg& g, const std::string& a);

// Set-level tree concatenation on explicit finite sets.
TreeSet concat_sets(const TreeSet& l, const std::string& a, const TreeSet& m);
TreeSet concat_sets_det(const TreeSet& l, const std::string& a, const TreeSet& m);

struct RegExpr;
using RegExprPtr = std::shared_ptr<const RegExpr>;
struct RegExpr {
    enum class Kind { Lit, Union, Concat, Star } kind = Kind::Lit;
    TreeSet lits;
    std::string at;
    RegExprPtr left, right;
};
RegExprPtr kleene(const Rtg& g);
Rtg eval(const RegExpr& e, const RankedAlphabet& sigma);
std::string print(const RegExpr& e);
RegExprPtr parse_regexpr(std::string_view text);

}  // namespace tl
