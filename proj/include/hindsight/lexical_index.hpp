#pragma once
// Inverted lexical index with BM25 scoring (k1 = 1.2, b = 0.75), built from
// scratch over the case-folded, punctuation-stripped tokens of unit text.
// Corpus statistics always come from the owning bank only. The idf uses the
// non-negative ln(1 + (N - df + 0.5)/(df + 0.5)) form.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "hindsight/text.hpp"

namespace hindsight {

class LexicalIndex {
public:
    static constexpr double kK1 = 1.2;
    static constexpr double kB = 0.75;

    void add(const std::string& doc_id, const std::string& text) {
        remove(doc_id);
        auto tokens = tokenize(text);
        doc_len_[doc_id] = static_cast<int>(tokens.size());
        total_len_ += static_cast<long long>(tokens.size());
        for (const auto& t : tokens) postings_[t][doc_id] += 1;
    }

    void remove(const std::string& doc_id) {
        auto it = doc_len_.find(doc_id);
        if (it == doc_len_.end()) return;
        total_len_ -= it->second;
        doc_len_.erase(it);
        for (auto p = postings_.begin(); p != postings_.end();) {
            p->second.erase(doc_id);
            if (p->second.empty())
                p = postings_.erase(p);
            else
                ++p;
        }
    }

    bool contains(const std::string& doc_id) const { return doc_len_.count(doc_id) > 0; }
    size_t doc_count() const { return doc_len_.size(); }

    // BM25 scores for all documents matching at least one query token.
    // Duplicate query tokens are collapsed, keeping first-occurrence order so
    // accumulation order is deterministic.
    std::vector<std::pair<std::string, double>> bm25(const std::string& query_text) const {
        std::vector<std::string> terms;
        for (const auto& t : tokenize(query_text)) {
            bool seen = false;
            for (const auto& u : terms)
                if (u == t) seen = true;
            if (!seen) terms.push_back(t);
        }
        std::map<std::string, double> scores;
        const double n_docs = static_cast<double>(doc_len_.size());
        if (n_docs == 0) return {};
        const double avgdl = static_cast<double>(total_len_) / n_docs;
        for (const auto& term : terms) {
            auto it = postings_.find(term);
            if (it == postings_.end()) continue;
            const double df = static_cast<double>(it->second.size());
            const double idf = std::log(1.0 + (n_docs - df + 0.5) / (df + 0.5));
            for (const auto& [doc, tf_int] : it->second) {
                const double tf = static_cast<double>(tf_int);
                const double dl = static_cast<double>(doc_len_.at(doc));
                const double denom = tf + kK1 * (1.0 - kB + kB * dl / avgdl);
                scores[doc] += idf * (tf * (kK1 + 1.0)) / denom;
            }
        }
        std::vector<std::pair<std::string, double>> out(scores.begin(), scores.end());
        return out;
    }

private:
    std::map<std::string, std::map<std::string, int>> postings_;  // term -> doc -> tf
    std::map<std::string, int> doc_len_;                          // doc -> token count
    long long total_len_ = 0;
};

}  // namespace hindsight
