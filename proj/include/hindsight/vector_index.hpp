#pragma once
// Exact vector index: cosine similarity by linear scan over a sorted map.
// Correctness-first; the recall oracle tolerance allows swapping in an
// approximate structure later without changing the contract.

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace hindsight {

inline double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    size_t n = std::min(a.size(), b.size());
    for (size_t i = 0; i < n; ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

class VectorIndex {
public:
    void add(const std::string& id, std::vector<double> embedding) {
        vectors_[id] = std::move(embedding);
    }

    void remove(const std::string& id) { vectors_.erase(id); }

    bool contains(const std::string& id) const { return vectors_.count(id) > 0; }
    size_t size() const { return vectors_.size(); }

    const std::vector<double>* get(const std::string& id) const {
        auto it = vectors_.find(id);
        return it == vectors_.end() ? nullptr : &it->second;
    }

    // Cosine against every stored vector, unsorted. Callers rank with the
    // engine-wide tie-break rule.
    std::vector<std::pair<std::string, double>> scan(const std::vector<double>& query) const {
        std::vector<std::pair<std::string, double>> out;
        out.reserve(vectors_.size());
        for (const auto& [id, v] : vectors_) out.emplace_back(id, cosine_similarity(query, v));
        return out;
    }

private:
    std::map<std::string, std::vector<double>> vectors_;
};

}  // namespace hindsight
