#pragma once
// Text utilities shared by indexing, entity resolution and the mock
// providers: tokenization, edit-distance similarity, first-person
// normalization and the default token counter.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace hindsight {

inline std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Case-folded, punctuation-stripped tokens. Splits on anything that is not
// alphanumeric; this is the tokenizer both the lexical index and the mock
// reranker use.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline size_t levenshtein(const std::string& a, const std::string& b) {
    const size_t n = a.size(), m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    std::vector<size_t> prev(m + 1), cur(m + 1);
    for (size_t j = 0; j <= m; ++j) prev[j] = j;
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (size_t j = 1; j <= m; ++j) {
            size_t cost = (a[i - 1] == b[j - 1]) ? 0 : 1;
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

// Normalized edit-distance similarity over case-folded strings:
// 1 - dist/max(|a|,|b|). Both empty -> 1, one empty -> 0.
inline double string_similarity(const std::string& a, const std::string& b) {
    std::string la = to_lower(a), lb = to_lower(b);
    if (la.empty() && lb.empty()) return 1.0;
    if (la.empty() || lb.empty()) return 0.0;
    size_t dist = levenshtein(la, lb);
    return 1.0 - static_cast<double>(dist) / static_cast<double>(std::max(la.size(), lb.size()));
}

namespace detail {

inline bool is_sentence_end(char c) {
    return c == '.' || c == '!' || c == '?';
}

inline bool word_boundary_at(const std::string& s, size_t pos) {
    return pos >= s.size() || !std::isalnum(static_cast<unsigned char>(s[pos]));
}

// Case-insensitive match of `word` at position i, requiring a word boundary after it.
inline bool matches_word(const std::string& s, size_t i, const std::string& word) {
    if (i + word.size() > s.size()) return false;
    for (size_t k = 0; k < word.size(); ++k) {
        if (std::tolower(static_cast<unsigned char>(s[i + k])) !=
            std::tolower(static_cast<unsigned char>(word[k])))
            return false;
    }
    return word_boundary_at(s, i + word.size());
}

}  // namespace detail

// Rewrites sentence-initial second-person subjects to first person using a
// fixed table: "You are"->"I am", "You were"->"I was", "Your"->"My",
// "You"->"I". Idempotent: output never starts a sentence with "You".
inline std::string normalize_first_person(const std::string& text) {
    struct Rule {
        const char* from;
        const char* to;
    };
    static const Rule rules[] = {
        {"You are", "I am"},
        {"You were", "I was"},
        {"Your", "My"},
        {"You", "I"},
    };
    std::string out;
    out.reserve(text.size());
    bool at_sentence_start = true;
    size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (at_sentence_start && (std::isalpha(static_cast<unsigned char>(c)))) {
            bool rewrote = false;
            for (const Rule& r : rules) {
                std::string from(r.from);
                if (detail::matches_word(text, i, from)) {
                    out += r.to;
                    i += from.size();
                    rewrote = true;
                    break;
                }
            }
            at_sentence_start = false;
            if (rewrote) continue;
            out.push_back(c);
            ++i;
            continue;
        }
        out.push_back(c);
        if (detail::is_sentence_end(c)) {
            at_sentence_start = true;
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            at_sentence_start = false;
        }
        ++i;
    }
    return out;
}

// True if the text reads as first person already, i.e. normalization is a no-op.
inline bool is_first_person(const std::string& text) {
    return normalize_first_person(text) == text;
}

// Default token counter: ceil(characters / 4). Exact tokenizers are a
// provider concern; this keeps budgets backbone-agnostic.
inline int default_token_count(const std::string& text) {
    return static_cast<int>((text.size() + 3) / 4);
}

// FNV-1a 64-bit. Stable across platforms, used by the mock embedder and
// snapshot checksums.
inline uint64_t fnv1a64(const std::string& data, uint64_t seed = 14695981039346656037ULL) {
    uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace hindsight
