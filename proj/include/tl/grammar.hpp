#pragma once

#include <string>
#include <vector>

#include "tl/fta.hpp"
#include "tl/lang_types.hpp"

namespace tl {

std::vector<Tree> enumerate_rtg(const Rtg& g, int max_height, std::size_t cap = kDefaultCap);
bool is_normal_form(const Rtg& g);
Rtg remove_chain_rules(const Rtg& g);
Rtg normalize_rtg(const Rtg& g);
Fta rtg_to_fta(const Rtg& g);
Rtg fta_to_rtg(const Fta& a);

Cfg yield_cfg(const Rtg& g);
std::string star_symbol(const std::set<std::string>& terminals);
Rtg cfg_to_rtg(const Cfg& g);
TreeHom binary_yield_hom(const RankedAlphabet& sigma);
Rtg binary_yield_form(const Rtg& g);

Rtg derivation_grammar(const Cfg& g, const std::set<std::string>& tops);
struct RuleTreeGrammar {
    Rtg grammar;
    std::vector<std::string> rule_names;  // r1..rn in rule order
};
RuleTreeGrammar rule_tree_grammar(const Cfg& g);
struct RuleTreeProjection {
    Rtg grammar;
    Relabeling projection;
};
RuleTreeProjection rule_tree_grammar(const Rtg& g);
Rtg bare_tree_grammar(const Cfg& g);
bool structurally_equivalent(const Cfg& g1, const Cfg& g2);
Cfg cfg_intersect_regular(const Cfg& g, const Dfa& m);

}  // namespace tl
