#pragma once

#include <string>
#include <vector>

#include "tl/transduce.hpp"

namespace tl {

struct Chain {
    std::string name;
    Fta base;
    std::vector<Piece> stages;
};

RankedAlphabet chain_output(const Chain& c);

Fta lb_image(const BuFtt& m, const Fta& a);
TdFtt path_transducer(const RankedAlphabet& sigma);

EmptinessResult surface_empty(const Chain& c);
bool surface_member(const Chain& c, const Tree& t);
bool surface_finite(const Chain& c);

struct YieldNormal {
    Chain chain;
    bool lambda = false;
};
YieldNormal yield_normalize(const Chain& c);
bool target_empty(const Chain& c);
bool target_member(const Chain& c, const Word& w);
bool target_finite(const Chain& c);

}  // namespace tl
