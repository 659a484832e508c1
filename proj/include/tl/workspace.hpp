#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tl/fta.hpp"
#include "tl/grammar.hpp"
#include "tl/lang_types.hpp"
#include "tl/surface.hpp"
#include "tl/transduce.hpp"

namespace tl {

// Named definitions merged from one or more files.
class Workspace {
public:
    // Blocks are queued by add_* and processed together by resolve(), so
    // references may point into any of the loaded files.
    void add_text(std::string text, const std::string& source = "");
    void add_file(const std::string& path);
    void resolve();
    void load(std::string text, const std::string& source = "") {
        add_text(std::move(text), source);
        resolve();
    }

    const RankedAlphabet& alphabet(const std::string& name) const;
    const Fta& fta(const std::string& name) const;
    const TdFta& tdfta(const std::string& name) const;
    const Dfa& dfa(const std::string& name) const;
    const Rtg& rtg(const std::string& name) const;
    const Cfg& cfg(const std::string& name) const;
    const TreeHom& hom(const std::string& name) const;
    const Relabeling& rel(const std::string& name) const;
    const Chain& chain(const std::string& name) const;
    // A transducer-like definition of any kind: buftt, tdftt, hom, rel or fta.
    Piece piece(const std::string& name) const;
    bool has_fta(const std::string& name) const { return ftas_.count(name) > 0; }
    bool has_tdfta(const std::string& name) const { return tdftas_.count(name) > 0; }
    bool has_buftt(const std::string& name) const { return buftts_.count(name) > 0; }
    bool has_tdftt(const std::string& name) const { return tdftts_.count(name) > 0; }

    std::vector<std::string> warnings;

private:
    struct Pending {
        std::size_t file;
        std::string kind, name;
        std::size_t body;
    };
    std::vector<std::pair<std::string, std::string>> files_;
    std::vector<Pending> pending_;
    std::map<std::string, RankedAlphabet> alphabets_;
    std::map<std::string, Fta> ftas_;
    std::map<std::string, TdFta> tdftas_;
    std::map<std::string, Dfa> dfas_;
    std::map<std::string, Rtg> rtgs_;
    std::map<std::string, Cfg> cfgs_;
    std::map<std::string, TreeHom> homs_;
    std::map<std::string, Relabeling> rels_;
    std::map<std::string, BuFtt> buftts_;
    std::map<std::string, TdFtt> tdftts_;
    std::map<std::string, Chain> chains_;
    friend class Loader;
};

// Re-emits constructed objects in block syntax. Alphabets and look-ahead
// automata they depend on are emitted first, under fresh names if needed.
class Emitter {
public:
    std::string alphabet(const RankedAlphabet& sigma, const std::string& fallback);
    void emit(const Fta& a, const std::string& name = "");
    void emit(const TdFta& a, const std::string& name = "");
    void emit(const Dfa& d, const std::string& name = "");
    void emit(const Rtg& g, const std::string& name = "");
    void emit(const Cfg& g, const std::string& name = "");
    void emit(const TreeHom& h, const std::string& name = "");
    void emit(const Relabeling& r, const std::string& name = "");
    void emit(const BuFtt& m, const std::string& name = "");
    void emit(const TdFtt& m, const std::string& name = "");
    void emit(const Piece& p, const std::string& name = "");
    const std::string& text() const { return out_; }

private:
    std::string fresh(const std::string& kind, const std::string& base);
    std::map<std::string, RankedAlphabet> alphabets_;
    std::map<std::string, std::set<std::string>> used_;
    std::string out_;
};

}  // namespace tl
