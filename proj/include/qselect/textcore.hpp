#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qselect/errors.hpp"

namespace qselect {

enum class Granularity { Word, Char };

/// Inclusive token index range [start, end].
struct Span {
    std::size_t start;
    std::size_t end;

    std::size_t length() const { return end - start + 1; }

    bool operator==(const Span&) const = default;
    bool operator<(const Span& other) const {
        return start != other.start ? start < other.start : end < other.end;
    }
};

namespace detail {

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Length in bytes of the UTF-8 sequence starting at `c`. Malformed lead bytes
// are treated as single-byte tokens.
inline std::size_t utf8_len(unsigned char c) {
    if (c < 0x80) return 1;
    if ((c & 0xE0) == 0xC0) return 2;
    if ((c & 0xF0) == 0xE0) return 3;
    if ((c & 0xF8) == 0xF0) return 4;
    return 1;
}

}  // namespace detail

/// Immutable token sequence over a source string. Word granularity splits on
/// whitespace; Char granularity makes every non-whitespace code point a token.
class TokenizedText {
public:
    static TokenizedText tokenize(std::string_view source, Granularity granularity) {
        std::vector<std::string> tokens;
        if (granularity == Granularity::Word) {
            std::size_t i = 0;
            while (i < source.size()) {
                while (i < source.size() && detail::is_space(source[i])) ++i;
                std::size_t begin = i;
                while (i < source.size() && !detail::is_space(source[i])) ++i;
                if (i > begin) tokens.emplace_back(source.substr(begin, i - begin));
            }
        } else {
            std::size_t i = 0;
            while (i < source.size()) {
                if (detail::is_space(source[i])) {
                    ++i;
                    continue;
                }
                std::size_t len = std::min(detail::utf8_len(static_cast<unsigned char>(source[i])),
                                           source.size() - i);
                tokens.emplace_back(source.substr(i, len));
                i += len;
            }
        }
        if (tokens.empty()) throw EmptyTextError("source contains no tokens");
        return TokenizedText(std::move(tokens), granularity, std::string(source));
    }

    const std::vector<std::string>& tokens() const { return tokens_; }
    const std::string& token(std::size_t pos) const { return tokens_.at(pos); }
    Granularity granularity() const { return granularity_; }
    const std::string& original() const { return original_; }
    std::size_t size() const { return tokens_.size(); }

    /// Re-joined token sequence: single spaces for Word, concatenation for Char.
    std::string join() const { return join_excluding({}); }

    /// Source with every token inside the given (pairwise disjoint) spans removed.
    std::string exclude(const std::set<Span>& spans) const {
        std::size_t prev_end = 0;
        bool first = true;
        for (const Span& s : spans) {
            if (s.start > s.end || s.end >= tokens_.size())
                throw SpanOutOfRangeError("span out of range");
            if (!first && s.start <= prev_end)
                throw SpanOutOfRangeError("spans overlap");
            prev_end = s.end;
            first = false;
        }
        return join_excluding(spans);
    }

    /// New text identical except tokens[pos] = replacement.
    TokenizedText with_replacement(std::size_t pos, const std::string& replacement) const {
        if (pos >= tokens_.size()) throw IndexOutOfRangeError("replace position out of range");
        if (replacement.empty()) throw InvalidReplacementError("empty replacement");
        if (granularity_ == Granularity::Word) {
            for (char c : replacement)
                if (detail::is_space(c))
                    throw InvalidReplacementError("replacement contains whitespace");
        }
        std::vector<std::string> tokens = tokens_;
        tokens[pos] = replacement;
        TokenizedText out(std::move(tokens), granularity_, "");
        out.original_ = out.join();
        return out;
    }

private:
    TokenizedText(std::vector<std::string> tokens, Granularity g, std::string original)
        : tokens_(std::move(tokens)), granularity_(g), original_(std::move(original)) {}

    std::string join_excluding(const std::set<Span>& spans) const {
        std::string out;
        auto excluded = [&](std::size_t i) {
            for (const Span& s : spans)
                if (i >= s.start && i <= s.end) return true;
            return false;
        };
        for (std::size_t i = 0; i < tokens_.size(); ++i) {
            if (excluded(i)) continue;
            if (granularity_ == Granularity::Word && !out.empty()) out += ' ';
            out += tokens_[i];
        }
        return out;
    }

    std::vector<std::string> tokens_;
    Granularity granularity_;
    std::string original_;
};

}  // namespace qselect
