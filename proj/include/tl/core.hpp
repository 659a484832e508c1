#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tl {

enum class ErrorKind { Syntax, UnknownName, Unresolved, FlagViolation, CapExceeded, Invalid };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

// A node is one of: a symbol a[t1 ... tk] (var == 0), a variable x_i (label empty,
// var == i), or a state call q(x_i) used in top-down right-hand sides (both set).
struct Tree {
    std::string label;
    int var = 0;
    std::vector<Tree> kids;

    Tree() = default;
    explicit Tree(std::string l, std::vector<Tree> k = {}) : label(std::move(l)), kids(std::move(k)) {}
    static Tree variable(int i);
    static Tree call(std::string state, int i);

    bool is_var() const { return var > 0 && label.empty(); }
    bool is_call() const { return var > 0 && !label.empty(); }
    bool is_leaf() const { return kids.empty(); }
    int rank() const { return static_cast<int>(kids.size()); }

    std::strong_ordering operator<=>(const Tree& o) const;
    bool operator==(const Tree& o) const;
};

using TreeSet = std::set<Tree>;
using Word = std::vector<std::string>;

struct RankedAlphabet {
    std::string name;
    std::map<std::string, std::set<int>> ranks;

    void add(const std::string& sym, int rank) { ranks[sym].insert(rank); }
    bool has(const std::string& sym, int rank) const;
    bool has_symbol(const std::string& sym) const { return ranks.count(sym) > 0; }
    std::vector<std::string> of_rank(int rank) const;
    std::vector<std::pair<std::string, int>> entries() const;
    int max_rank() const;
    bool same_symbols(const RankedAlphabet& o) const { return ranks == o.ranks; }
    RankedAlphabet merged(const RankedAlphabet& o) const;
};

bool is_variable_name(std::string_view s);
bool is_symbol_char(std::string_view s, std::size_t pos, std::size_t* len);
void check_symbol(const std::string& s);

std::string print(const Tree& t);
Tree parse_term(std::string_view text);
std::string join_word(const Word& w);
std::string print_word_set(const std::set<Word>& ws);

struct RankCheck {
    bool ok = true;
    std::string violation;
};
RankCheck check_ranked(const Tree& t, const RankedAlphabet& sigma, int arity = 0);
void require_ranked(const Tree& t, const RankedAlphabet& sigma, int arity = 0);

Word yield_of(const Tree& t);
int height_of(const Tree& t);
std::size_t size_of(const Tree& t);
std::set<Word> paths_of(const Tree& t);

Tree top_concat(const std::string& a, std::vector<Tree> trees, const RankedAlphabet* sigma = nullptr);
// Keys are rank-0 symbols or variable names such as "x1".
Tree tree_concat(const Tree& t, const std::map<std::string, Tree>& bindings,
                 const RankedAlphabet* sigma = nullptr);
Tree substitute(const Tree& t, const std::vector<Tree>& args);

int max_var(const Tree& t);
std::map<int, int> var_counts(const Tree& t);
bool is_linear(const Tree& t);
bool is_nondeleting(const Tree& t, int k);
std::set<std::string> labels_of(const Tree& t);

enum class MonadicMode { M, TopDown, BottomUp };
Tree monadic_encode(const Word& w, MonadicMode mode);
Word monadic_decode(const Tree& t, MonadicMode mode);

// Order used for every printed listing: by height, then by printed form.
bool canonical_less(const Tree& a, const Tree& b);
std::vector<Tree> canonical_sorted(const TreeSet& ts);

constexpr std::size_t kDefaultCap = 100000;
std::vector<Tree> enumerate_trees(const RankedAlphabet& sigma, int max_height, std::size_t cap = kDefaultCap);

std::string fresh_name(const std::string& base, const std::set<std::string>& taken);

// Calls f for every tuple over the given choice lists.
template <class T, class F>
void for_tuples(const std::vector<std::vector<T>>& choices, F&& f) {
    for (const auto& c : choices)
        if (c.empty()) return;
    std::vector<std::size_t> idx(choices.size(), 0);
    std::vector<T> cur(choices.size());
    while (true) {
        for (std::size_t i = 0; i < choices.size(); ++i) cur[i] = choices[i][idx[i]];
        f(cur);
        int p = static_cast<int>(choices.size()) - 1;
        while (p >= 0 && ++idx[p] == choices[p].size()) idx[p--] = 0;
        if (p < 0) return;
    }
}

}  // namespace tl
