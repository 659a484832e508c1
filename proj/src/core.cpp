#include "tl/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>

#include "tl/text.hpp"

namespace tl {

Tree Tree::variable(int i) {
    Tree t;
    t.var = i;
    return t;
}

Tree Tree::call(std::string state, int i) {
    Tree t(std::move(state));
    t.var = i;
    return t;
}

std::strong_ordering Tree::operator<=>(const Tree& o) const {
    if (auto c = label <=> o.label; c != 0) return c;
    if (auto c = var <=> o.var; c != 0) return c;
    if (auto c = kids.size() <=> o.kids.size(); c != 0) return c;
    for (std::size_t i = 0; i < kids.size(); ++i)
        if (auto c = kids[i] <=> o.kids[i]; c != 0) return c;
    return std::strong_ordering::equal;
}

bool Tree::operator==(const Tree& o) const {
    return label == o.label && var == o.var && kids == o.kids;
}

bool RankedAlphabet::has(const std::string& sym, int rank) const {
    auto it = ranks.find(sym);
    return it != ranks.end() && it->second.count(rank);
}

std::vector<std::string> RankedAlphabet::of_rank(int rank) const {
    std::vector<std::string> out;
    for (const auto& [s, rs] : ranks)
        if (rs.count(rank)) out.push_back(s);
    return out;
}

std::vector<std::pair<std::string, int>> RankedAlphabet::entries() const {
    std::vector<std::pair<std::string, int>> out;
    for (const auto& [s, rs] : ranks)
        for (int r : rs) out.emplace_back(s, r);
    return out;
}

int RankedAlphabet::max_rank() const {
    int m = 0;
    for (const auto& [s, rs] : ranks)
        if (!rs.empty()) m = std::max(m, *rs.rbegin());
    return m;
}

RankedAlphabet RankedAlphabet::merged(const RankedAlphabet& o) const {
    RankedAlphabet r = *this;
    for (const auto& [s, rs] : o.ranks)
        for (int k : rs) r.add(s, k);
    return r;
}

bool is_variable_name(std::string_view s) {
    if (s.size() < 2 || s[0] != 'x' || s[1] == '0') return false;
    return std::all_of(s.begin() + 1, s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool is_symbol_char(std::string_view s, std::size_t pos, std::size_t* len) {
    unsigned char c = static_cast<unsigned char>(s[pos]);
    *len = 1;
    if (c >= 0x80) {
        std::size_t n = c >= 0xF0 ? 4 : c >= 0xE0 ? 3 : 2;
        if (pos + n > s.size()) return false;
        *len = n;
        return true;
    }
    if (std::isalnum(c)) return true;
    static const std::string extra = "+-*/.<>=_!~";
    return extra.find(static_cast<char>(c)) != std::string::npos;
}

void check_symbol(const std::string& s) {
    if (s.empty()) throw Error(ErrorKind::Syntax, "empty symbol");
    for (std::size_t i = 0; i < s.size();) {
        std::size_t len;
        if (!is_symbol_char(s, i, &len)) throw Error(ErrorKind::Syntax, "invalid character in symbol '" + s + "'");
        i += len;
    }
    if (is_variable_name(s)) throw Error(ErrorKind::Syntax, "symbol '" + s + "' is a reserved variable name");
}

static void print_into(const Tree& t, std::string& out) {
    if (t.is_var()) {
        out += "x" + std::to_string(t.var);
        return;
    }
    out += t.label;
    if (t.is_call()) {
        out += "(x" + std::to_string(t.var) + ")";
        return;
    }
    if (t.kids.empty()) return;
    out += '[';
    for (std::size_t i = 0; i < t.kids.size(); ++i) {
        if (i) out += ' ';
        print_into(t.kids[i], out);
    }
    out += ']';
}

std::string print(const Tree& t) {
    std::string out;
    print_into(t, out);
    return out;
}

Tree parse_term(std::string_view text) {
    Cursor c(text);
    Tree t = c.term();
    if (!c.at_end()) c.fail("unexpected trailing input");
    return t;
}

std::string join_word(const Word& w) {
    bool single = std::all_of(w.begin(), w.end(), [](const std::string& s) { return s.size() == 1; });
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i && !single) out += ' ';
        out += w[i];
    }
    return out;
}

std::string print_word_set(const std::set<Word>& ws) {
    std::string out = "{";
    bool first = true;
    for (const auto& w : ws) {
        if (!first) out += ", ";
        first = false;
        out += join_word(w);
    }
    return out + "}";
}

RankCheck check_ranked(const Tree& t, const RankedAlphabet& sigma, int arity) {
    RankCheck r;
    std::function<bool(const Tree&)> go = [&](const Tree& n) {
        if (n.is_var() || n.is_call()) {
            if (n.var > arity) {
                r.violation = "variable x" + std::to_string(n.var) + " exceeds arity " + std::to_string(arity);
                return false;
            }
            return true;
        }
        if (!sigma.has(n.label, n.rank())) {
            r.violation = "symbol '" + n.label + "' used with rank " + std::to_string(n.rank());
            return false;
        }
        for (const auto& k : n.kids)
            if (!go(k)) return false;
        return true;
    };
    r.ok = go(t);
    return r;
}

void require_ranked(const Tree& t, const RankedAlphabet& sigma, int arity) {
    auto r = check_ranked(t, sigma, arity);
    if (!r.ok) throw Error(ErrorKind::Invalid, print(t) + ": " + r.violation);
}

static void yield_into(const Tree& t, Word& w) {
    if (t.kids.empty()) {
        if (t.is_var()) w.push_back("x" + std::to_string(t.var));
        else if (t.is_call()) w.push_back(print(t));
        else if (t.label != "e") w.push_back(t.label);
        return;
    }
    for (const auto& k : t.kids) yield_into(k, w);
}

Word yield_of(const Tree& t) {
    Word w;
    yield_into(t, w);
    return w;
}

int height_of(const Tree& t) {
    int h = 0;
    for (const auto& k : t.kids) h = std::max(h, 1 + height_of(k));
    return h;
}

std::size_t size_of(const Tree& t) {
    std::size_t n = 1;
    for (const auto& k : t.kids) n += size_of(k);
    return n;
}

std::set<Word> paths_of(const Tree& t) {
    if (t.kids.empty()) return {Word{t.label}};
    std::set<Word> out;
    for (const auto& k : t.kids)
        for (auto p : paths_of(k)) {
            p.insert(p.begin(), t.label);
            out.insert(std::move(p));
        }
    return out;
}

Tree top_concat(const std::string& a, std::vector<Tree> trees, const RankedAlphabet* sigma) {
    if (trees.empty()) throw Error(ErrorKind::Invalid, "top concatenation needs at least one tree");
    if (sigma && !sigma->has(a, static_cast<int>(trees.size())))
        throw Error(ErrorKind::Invalid, "symbol '" + a + "' does not have rank " + std::to_string(trees.size()));
    return Tree(a, std::move(trees));
}

Tree tree_concat(const Tree& t, const std::map<std::string, Tree>& bindings, const RankedAlphabet* sigma) {
    if (sigma)
        for (const auto& [key, img] : bindings) {
            if (is_variable_name(key)) continue;
            auto it = sigma->ranks.find(key);
            if (it != sigma->ranks.end() && (it->second.size() > 1 || !it->second.count(0)))
                throw Error(ErrorKind::Invalid, "cannot concatenate at '" + key + "': it also has a positive rank");
        }
    std::function<Tree(const Tree&)> go = [&](const Tree& n) -> Tree {
        if (n.kids.empty() && !n.is_call()) {
            std::string key = n.is_var() ? "x" + std::to_string(n.var) : n.label;
            auto it = bindings.find(key);
            if (it != bindings.end()) return it->second;
            return n;
        }
        Tree r = n;
        for (auto& k : r.kids) k = go(k);
        return r;
    };
    return go(t);
}

Tree substitute(const Tree& t, const std::vector<Tree>& args) {
    if (t.is_var()) {
        if (t.var > static_cast<int>(args.size())) return t;
        return args[t.var - 1];
    }
    if (t.kids.empty()) return t;
    Tree r(t.label);
    r.var = t.var;
    r.kids.reserve(t.kids.size());
    for (const auto& k : t.kids) r.kids.push_back(substitute(k, args));
    return r;
}

int max_var(const Tree& t) {
    int m = t.var;
    for (const auto& k : t.kids) m = std::max(m, max_var(k));
    return m;
}

static void count_vars(const Tree& t, std::map<int, int>& m) {
    if (t.var > 0) ++m[t.var];
    for (const auto& k : t.kids) count_vars(k, m);
}

std::map<int, int> var_counts(const Tree& t) {
    std::map<int, int> m;
    count_vars(t, m);
    return m;
}

bool is_linear(const Tree& t) {
    for (const auto& [v, n] : var_counts(t))
        if (n > 1) return false;
    return true;
}

bool is_nondeleting(const Tree& t, int k) {
    auto m = var_counts(t);
    for (int i = 1; i <= k; ++i)
        if (!m.count(i)) return false;
    return true;
}

std::set<std::string> labels_of(const Tree& t) {
    std::set<std::string> out;
    std::function<void(const Tree&)> go = [&](const Tree& n) {
        if (!n.is_var()) out.insert(n.label);
        for (const auto& k : n.kids) go(k);
    };
    go(t);
    return out;
}

Tree monadic_encode(const Word& w, MonadicMode mode) {
    if (mode == MonadicMode::M) {
        if (w.empty()) throw Error(ErrorKind::Invalid, "m() needs a nonempty string");
        Tree t(w.back());
        for (auto it = w.rbegin() + 1; it != w.rend(); ++it) t = Tree(*it, {t});
        return t;
    }
    Tree t("e");
    if (mode == MonadicMode::TopDown)
        for (auto it = w.rbegin(); it != w.rend(); ++it) t = Tree(*it, {t});
    else
        for (const auto& a : w) t = Tree(a, {t});
    return t;
}

Word monadic_decode(const Tree& t, MonadicMode mode) {
    Word w;
    const Tree* n = &t;
    while (!n->kids.empty()) {
        if (n->kids.size() != 1 || n->var) throw Error(ErrorKind::Invalid, "not a monadic tree: " + print(t));
        w.push_back(n->label);
        n = &n->kids[0];
    }
    if (n->var) throw Error(ErrorKind::Invalid, "not a monadic tree: " + print(t));
    if (mode == MonadicMode::M) {
        w.push_back(n->label);
        return w;
    }
    if (n->label != "e") throw Error(ErrorKind::Invalid, "monadic tree must end in e: " + print(t));
    if (mode == MonadicMode::BottomUp) std::reverse(w.begin(), w.end());
    return w;
}

bool canonical_less(const Tree& a, const Tree& b) {
    int ha = height_of(a), hb = height_of(b);
    if (ha != hb) return ha < hb;
    return print(a) < print(b);
}

std::vector<Tree> canonical_sorted(const TreeSet& ts) {
    std::vector<std::pair<std::pair<int, std::string>, const Tree*>> keyed;
    keyed.reserve(ts.size());
    for (const auto& t : ts) keyed.push_back({{height_of(t), print(t)}, &t});
    std::sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<Tree> out;
    out.reserve(ts.size());
    for (const auto& k : keyed) out.push_back(*k.second);
    return out;
}

std::vector<Tree> enumerate_trees(const RankedAlphabet& sigma, int max_height, std::size_t cap) {
    if (cap == 0) throw Error(ErrorKind::Invalid, "cap must be positive");
    std::vector<Tree> all;
    std::vector<std::size_t> upto;  // upto[h] = number of trees of height <= h
    auto push_bucket = [&](std::vector<Tree> bucket) {
        std::sort(bucket.begin(), bucket.end(), [](const Tree& a, const Tree& b) { return print(a) < print(b); });
        for (auto& t : bucket) all.push_back(std::move(t));
        upto.push_back(all.size());
    };
    std::vector<Tree> leaves;
    for (const auto& a : sigma.of_rank(0)) leaves.emplace_back(a);
    if (leaves.size() > cap) throw Error(ErrorKind::CapExceeded, "enumeration exceeds cap");
    push_bucket(std::move(leaves));
    for (int h = 1; h <= max_height; ++h) {
        std::size_t below = upto[h - 1];
        std::size_t below2 = h >= 2 ? upto[h - 2] : 0;
        double expected = 0;
        for (const auto& [a, k] : sigma.entries()) {
            if (k == 0) continue;
            expected += std::pow(static_cast<double>(below), k) - std::pow(static_cast<double>(below2), k);
        }
        if (all.size() + expected > static_cast<double>(cap))
            throw Error(ErrorKind::CapExceeded, "enumeration to height " + std::to_string(max_height) + " exceeds cap " +
                                                    std::to_string(cap));
        std::vector<Tree> bucket;
        for (const auto& [a, k] : sigma.entries()) {
            if (k == 0) continue;
            std::vector<std::size_t> idx(k, 0);
            while (true) {
                bool fresh = false;
                for (auto i : idx)
                    if (i >= below2) fresh = true;
                if (fresh) {
                    Tree t(a);
                    t.kids.reserve(k);
                    for (auto i : idx) t.kids.push_back(all[i]);
                    bucket.push_back(std::move(t));
                }
                int p = k - 1;
                while (p >= 0 && ++idx[p] == below) idx[p--] = 0;
                if (p < 0) break;
            }
        }
        if (bucket.empty()) {
            upto.push_back(all.size());
            continue;
        }
        push_bucket(std::move(bucket));
    }
    return all;
}

std::string fresh_name(const std::string& base, const std::set<std::string>& taken) {
    if (!taken.count(base) && !is_variable_name(base)) return base;
    for (int i = 1;; ++i) {
        std::string n = base + "_" + std::to_string(i);
        if (!taken.count(n)) return n;
    }
}

// ---- Cursor ----

void Cursor::skip_ws() {
    while (pos_ < s_.size()) {
        char c = s_[pos_];
        if (c == '#') {
            while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos_;
        } else {
            break;
        }
    }
}

bool Cursor::at_end() {
    skip_ws();
    return pos_ >= s_.size();
}

char Cursor::peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
}

bool Cursor::accept(char c) {
    if (peek() == c) {
        ++pos_;
        return true;
    }
    return false;
}

void Cursor::expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
}

std::string Cursor::word() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < s_.size()) {
        std::size_t len;
        if (!is_symbol_char(s_, pos_, &len)) break;
        pos_ += len;
    }
    return std::string(s_.substr(start, pos_ - start));
}

std::string Cursor::expect_word(const char* what) {
    std::string w = word();
    if (w.empty()) fail(std::string("expected ") + what);
    return w;
}

std::string Cursor::group() {
    char open = s_[pos_];
    char close = open == '{' ? '}' : ')';
    int depth = 0;
    std::string out;
    while (pos_ < s_.size()) {
        char c = s_[pos_++];
        if (c == '{' || c == '(') ++depth;
        if (c == '}' || c == ')') --depth;
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
        if (depth == 0) {
            if (c != close) fail("mismatched brackets in state name");
            return out;
        }
    }
    fail("unterminated state name");
}

std::string Cursor::state() {
    char c = peek();
    if (c == '{' || c == '(') return group();
    return expect_word("state name");
}

Tree Cursor::term() {
    std::string sym = word();
    if (sym.empty()) fail("expected a term");
    if (is_variable_name(sym)) return Tree::variable(std::stoi(sym.substr(1)));
    if (pos_ < s_.size() && s_[pos_] == '(') {
        ++pos_;
        std::string v = word();
        if (!is_variable_name(v)) fail("expected a variable inside state call");
        expect(')');
        return Tree::call(sym, std::stoi(v.substr(1)));
    }
    Tree t(sym);
    if (pos_ < s_.size() && s_[pos_] == '[') {
        ++pos_;
        if (peek() == ']') fail("empty child list");
        while (!accept(']')) {
            if (at_end()) fail("unbalanced brackets");
            t.kids.push_back(term());
        }
    }
    return t;
}

void Cursor::fail(const std::string& msg) const {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) {
        if (s_[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    std::string where = source_.empty() ? "" : source_ + ":";
    throw Error(ErrorKind::Syntax, where + std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
}

}  // namespace tl
