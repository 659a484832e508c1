#pragma once

#include <string>
#include <string_view>

#include "tl/core.hpp"

namespace tl {

// Character cursor shared by the term parser and the definition-file loader.
class Cursor {
public:
    explicit Cursor(std::string_view text, std::string source = "") : s_(text), source_(std::move(source)) {}

    void skip_ws();
    bool at_end();
    char peek();
    bool accept(char c);
    void expect(char c);
    // Reads a maximal run of symbol characters; empty if none.
    std::string word();
    std::string expect_word(const char* what);
    // A state name: a word or a balanced {...} / (...) group with whitespace removed.
    std::string state();
    Tree term();
    [[noreturn]] void fail(const std::string& msg) const;
    std::size_t pos() const { return pos_; }
    void seek(std::size_t p) { pos_ = p; }

private:
    std::string group();
    std::string_view s_;
    std::string source_;
    std::size_t pos_ = 0;
};

}  // namespace tl
