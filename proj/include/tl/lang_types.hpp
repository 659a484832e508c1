#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tl/core.hpp"

namespace tl {

// Nonterminals occur in right-hand sides as rank-0 leaves.
struct Rtg {
    std::string name;
    RankedAlphabet sigma;
    std::set<std::string> nonterminals;
    std::string start;
    std::set<std::pair<std::string, Tree>> rules;
};

struct Cfg {
    std::string name;
    std::set<std::string> terminals;
    std::set<std::string> nonterminals;
    std::string start;
    std::vector<std::pair<std::string, Word>> rules;
};

struct Relabeling {
    std::string name;
    RankedAlphabet from, to;
    std::map<std::pair<std::string, int>, std::set<std::string>> map;
    bool is_projection() const;
};

struct TreeHom {
    std::string name;
    RankedAlphabet from, to;
    std::map<std::pair<std::string, int>, Tree> map;
    bool is_linear() const;
    bool is_nondeleting() const;
    const Tree& image(const std::string& a, int k) const;
};

}  // namespace tl
