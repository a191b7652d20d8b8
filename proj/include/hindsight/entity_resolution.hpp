#pragma once
// Entity resolution: maps a mention to an existing canonical entity when the
// weighted similarity score clears the threshold, otherwise registers a new
// entity. score(e) = alpha_e * sim_str + beta_e * sim_co + gamma_e * sim_temp
// with string similarity over case-folded names, Jaccard co-mention overlap
// and exp(-dt/sigma_t) temporal proximity to the entity's last mention.

#include <cctype>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "hindsight/bank.hpp"
#include "hindsight/providers.hpp"
#include "hindsight/text.hpp"
#include "hindsight/types.hpp"

namespace hindsight {

// Mention scan shared by the mock extractor and the opinion entity path:
// maximal runs of capitalized tokens, stopwords removed, deduplicated
// case-insensitively. Names found in `person_names` are tagged PERSON,
// everything else OTHER.
inline std::vector<EntityMention> scan_capitalized_mentions(
    const std::string& text, const std::set<std::string>& person_names) {
    static const std::set<std::string> stopwords = {
        "i",    "the",  "a",    "an",   "my",   "your",  "you",  "we",   "he",   "she",
        "it",   "they", "this", "that", "what", "when",  "where", "who", "why",  "how",
        "is",   "was",  "do",   "did",  "yes",  "no",    "on",   "in",   "at",   "to",
        "and",  "or",   "but",  "so",   "if",   "then",  "there", "here", "said"};
    std::vector<EntityMention> out;
    std::set<std::string> seen;
    size_t i = 0;
    while (i < text.size()) {
        if (std::isupper(static_cast<unsigned char>(text[i]))) {
            std::string run;
            size_t j = i;
            while (j < text.size()) {
                size_t k = j;
                std::string word;
                while (k < text.size() && std::isalnum(static_cast<unsigned char>(text[k])))
                    word.push_back(text[k++]);
                if (word.empty() || !std::isupper(static_cast<unsigned char>(word[0]))) break;
                if (stopwords.count(to_lower(word))) break;
                if (!run.empty()) run += " ";
                run += word;
                j = k;
                if (j < text.size() && text[j] == ' ' && j + 1 < text.size() &&
                    std::isupper(static_cast<unsigned char>(text[j + 1]))) {
                    ++j;
                    continue;
                }
                break;
            }
            if (!run.empty() && run.size() >= 2) {
                std::string key = to_lower(run);
                if (!seen.count(key)) {
                    seen.insert(key);
                    EntityMention m;
                    m.text = run;
                    m.kind = person_names.count(key) ? EntityKind::Person : EntityKind::Other;
                    out.push_back(std::move(m));
                }
            }
            i = std::max(j, i + 1);
        } else {
            ++i;
        }
    }
    return out;
}

struct MentionContext {
    std::string text;
    EntityKind kind = EntityKind::Other;
    std::set<std::string> co_mentions;  // case-folded texts of co-occurring mentions
    Timestamp timestamp = 0;
};

inline double co_mention_similarity(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 0.0;
    size_t shared = 0;
    for (const auto& x : a)
        if (b.count(x)) ++shared;
    size_t uni = a.size() + b.size() - shared;
    return uni == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(uni);
}

// Resolves a mention against the bank's registry, updating the registry in
// place. Mentions matching an existing canonical name adopt that entity's
// kind before candidate filtering, so the same name seen with a weaker kind
// hint still resolves.
inline std::string resolve_entity(const MentionContext& mention, BankState& state,
                                  const EngineConfig& config) {
    std::string folded = to_lower(mention.text);
    EntityKind kind = mention.kind;
    for (const auto& [id, e] : state.entities) {
        if (to_lower(e.canonical_name) == folded) {
            kind = e.kind;
            break;
        }
    }

    std::string best_id;
    double best_score = -1.0;
    for (const auto& [id, e] : state.entities) {
        if (e.kind != kind) continue;
        double sim_str = string_similarity(mention.text, e.canonical_name);
        double sim_co = co_mention_similarity(mention.co_mentions, e.co_mentions);
        double dt = std::abs(static_cast<double>(mention.timestamp - e.last_mentioned));
        double sim_temp = std::exp(-dt / config.sigma_t);
        double score = config.entity_weight_string * sim_str +
                       config.entity_weight_cooccurrence * sim_co +
                       config.entity_weight_temporal * sim_temp;
        if (score > best_score) {
            best_score = score;
            best_id = id;
        }
    }

    if (!best_id.empty() && best_score >= config.entity_resolution_threshold) {
        Entity& e = state.entities[best_id];
        e.mention_count += 1;
        e.last_mentioned = std::max(e.last_mentioned, mention.timestamp);
        e.co_mentions.insert(mention.co_mentions.begin(), mention.co_mentions.end());
        return best_id;
    }

    Entity fresh;
    fresh.id = state.next_entity_id();
    fresh.canonical_name = mention.text;
    fresh.kind = kind;
    fresh.mention_count = 1;
    fresh.last_mentioned = mention.timestamp;
    fresh.co_mentions = mention.co_mentions;
    state.entities[fresh.id] = fresh;
    return fresh.id;
}

}  // namespace hindsight
