#pragma once
// Budgeted multi-strategy retrieval: semantic, keyword, graph and temporal
// channels over a bank snapshot, reciprocal rank fusion, cross-encoder
// reranking and greedy token-budget packing.
//
// Tie-break rule used everywhere: score desc, then mentioned_at desc, then
// unit id ascending.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hindsight/bank.hpp"
#include "hindsight/providers.hpp"
#include "hindsight/temporal.hpp"
#include "hindsight/types.hpp"

namespace hindsight {

enum class Channel { Semantic, Keyword, Graph, Temporal, Fused };

inline const char* to_string(Channel c) {
    switch (c) {
        case Channel::Semantic: return "semantic";
        case Channel::Keyword: return "keyword";
        case Channel::Graph: return "graph";
        case Channel::Temporal: return "temporal";
        case Channel::Fused: return "fused";
    }
    return "fused";
}

struct RankedEntry {
    std::string unit_id;
    double score = 0.0;
};

// Rank is implicit by position: entries[0] has rank 1.
struct RankedList {
    Channel channel = Channel::Fused;
    std::vector<RankedEntry> entries;
};

// mentioned_at lookup for tie-breaking; absent ids count as 0.
using MentionLookup = std::function<Timestamp(const std::string&)>;

inline MentionLookup mention_lookup_for(const BankState& state) {
    return [&state](const std::string& id) -> Timestamp {
        auto it = state.units.find(id);
        return it == state.units.end() ? 0 : it->second.mentioned_at;
    };
}

inline void sort_ranked(std::vector<RankedEntry>& entries, const MentionLookup& mentioned) {
    std::sort(entries.begin(), entries.end(), [&](const RankedEntry& a, const RankedEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        Timestamp ma = mentioned ? mentioned(a.unit_id) : 0;
        Timestamp mb = mentioned ? mentioned(b.unit_id) : 0;
        if (ma != mb) return ma > mb;
        return a.unit_id < b.unit_id;
    });
}

// --- Channels ---------------------------------------------------------------

inline RankedList semantic_search(const std::vector<double>& query_embedding,
                                  const BankState& state, int n) {
    RankedList list;
    list.channel = Channel::Semantic;
    auto scored = state.vectors.scan(query_embedding);
    for (auto& [id, score] : scored) list.entries.push_back({id, score});
    sort_ranked(list.entries, mention_lookup_for(state));
    if (static_cast<int>(list.entries.size()) > n) list.entries.resize(n);
    return list;
}

inline RankedList keyword_search(const std::string& query_text, const BankState& state, int n) {
    RankedList list;
    list.channel = Channel::Keyword;
    for (auto& [id, score] : state.lexical.bm25(query_text)) list.entries.push_back({id, score});
    sort_ranked(list.entries, mention_lookup_for(state));
    if (static_cast<int>(list.entries.size()) > n) list.entries.resize(n);
    return list;
}

// Spreading activation from the entry list. Initial activation is the
// entry's semantic score; each hop propagates A * w * delta * mu(kind) along
// stored edges and a node keeps the max of its prior activation and all
// received contributions, capped at 1.0.
inline RankedList graph_search(const RankedList& entry_list, const BankState& state,
                               const EngineConfig& config) {
    std::map<std::string, double> activation;
    for (const auto& e : entry_list.entries)
        activation[e.unit_id] = std::min(e.score, 1.0);

    std::map<std::string, std::vector<const Edge*>> adjacency;
    for (const auto& [key, edge] : state.edges) adjacency[edge.source].push_back(&edge);

    for (int hop = 0; hop < config.max_hops; ++hop) {
        std::map<std::string, double> next = activation;
        for (const auto& [id, act] : activation) {
            auto it = adjacency.find(id);
            if (it == adjacency.end()) continue;
            for (const Edge* edge : it->second) {
                double contribution =
                    std::min(act * edge->weight * config.activation_decay * config.mu(edge->kind),
                             1.0);
                auto [slot, inserted] = next.emplace(edge->target, contribution);
                if (!inserted && contribution > slot->second) slot->second = contribution;
            }
        }
        activation = std::move(next);
    }

    RankedList list;
    list.channel = Channel::Graph;
    std::map<std::string, bool> is_entry;
    for (const auto& e : entry_list.entries) is_entry[e.unit_id] = true;
    for (const auto& [id, act] : activation) {
        if (act > 0.0 || is_entry.count(id)) list.entries.push_back({id, act});
    }
    sort_ranked(list.entries, mention_lookup_for(state));
    return list;
}

// Units whose occurrence interval overlaps the query range, scored by
// temporal proximity of interval midpoints, clamped to [0,1]. An instant
// query range is treated as one second wide.
inline RankedList temporal_search(const TimeRange& range, const BankState& state, int n) {
    Timestamp start = range.first, end = range.second;
    if (start > end) throw ValidationError("temporal_search: inverted range");
    double duration = static_cast<double>(end - start);
    if (duration == 0.0) duration = 1.0;
    const double query_mid = (static_cast<double>(start) + static_cast<double>(end)) / 2.0;

    RankedList list;
    list.channel = Channel::Temporal;
    for (const auto& [id, u] : state.units) {
        if (!interval_overlaps(u.occurred_start, u.occurred_end, start, end)) continue;
        double fact_mid =
            (static_cast<double>(u.occurred_start) + static_cast<double>(u.occurred_end)) / 2.0;
        double score = 1.0 - std::abs(fact_mid - query_mid) / (duration / 2.0);
        score = std::clamp(score, 0.0, 1.0);
        list.entries.push_back({id, score});
    }
    sort_ranked(list.entries, mention_lookup_for(state));
    if (static_cast<int>(list.entries.size()) > n) list.entries.resize(n);
    return list;
}

// --- Fusion -------------------------------------------------------------------

// RRF(f) = sum over lists containing f of 1 / (rrf_k + rank). Lists that do
// not contain f contribute nothing.
inline RankedList rrf_fuse(const std::vector<RankedList>& lists, int rrf_k,
                           const MentionLookup& mentioned = {}) {
    if (rrf_k < 1) throw ConfigError("rrf_k must be >= 1");
    std::map<std::string, double> scores;
    for (const auto& list : lists) {
        for (size_t i = 0; i < list.entries.size(); ++i) {
            int rank = static_cast<int>(i) + 1;
            scores[list.entries[i].unit_id] += 1.0 / static_cast<double>(rrf_k + rank);
        }
    }
    RankedList fused;
    fused.channel = Channel::Fused;
    for (const auto& [id, score] : scores) fused.entries.push_back({id, score});
    sort_ranked(fused.entries, mentioned);
    return fused;
}

// --- Rerank -------------------------------------------------------------------

struct RerankOutcome {
    RankedList list;
    bool fallback = false;  // provider failed; fused order kept
};

// Scores the top candidates with the cross-encoder provider; candidate text
// is prefixed with its human-readable time reference so the reranker sees
// temporal cues. Provider failure falls back to the fused order.
inline RerankOutcome rerank(const std::string& query_text, const RankedList& candidates,
                            const BankState& state, Reranker& reranker, int window) {
    RerankOutcome outcome;
    outcome.list.channel = Channel::Fused;
    size_t m = std::min(candidates.entries.size(), static_cast<size_t>(std::max(window, 0)));
    try {
        std::vector<RankedEntry> scored;
        for (size_t i = 0; i < m; ++i) {
            const auto& entry = candidates.entries[i];
            const MemoryUnit& unit = state.units.at(entry.unit_id);
            std::string prefixed =
                "[" + format_human_date(unit.occurred_start) + "] " + unit.text;
            scored.push_back({entry.unit_id, reranker.score(query_text, prefixed)});
        }
        sort_ranked(scored, mention_lookup_for(state));
        outcome.list.entries = std::move(scored);
    } catch (const std::exception&) {
        outcome.fallback = true;
        outcome.list.entries.assign(candidates.entries.begin(), candidates.entries.begin() + m);
    }
    // Candidates beyond the rerank window keep their fused order.
    for (size_t i = m; i < candidates.entries.size(); ++i)
        outcome.list.entries.push_back(candidates.entries[i]);
    return outcome;
}

// --- Budget packing -------------------------------------------------------------

struct RecallItem {
    std::string unit_id;
    std::string text;
    double fused_score = 0.0;
    std::optional<double> rerank_score;
    std::vector<std::string> channels_hit;
    std::map<std::string, int> channel_ranks;  // channel name -> 1-based rank
};

struct RecallResult {
    std::vector<RecallItem> items;
    int total_tokens = 0;
    int budget = 0;
    std::optional<TimeRange> temporal_range_used;
    bool rerank_fallback = false;
};

// Greedy strict-prefix packing: include items in rank order while the
// cumulative token count stays within budget, stopping at the first item
// that would overflow. No skipping.
inline RecallResult pack_budget(const std::vector<RecallItem>& ranked, int budget_tokens,
                                const std::function<int(const std::string&)>& token_counter) {
    if (budget_tokens < 0) throw ValidationError("budget must be >= 0");
    RecallResult result;
    result.budget = budget_tokens;
    for (const auto& item : ranked) {
        int cost = token_counter(item.text);
        if (result.total_tokens + cost > budget_tokens) break;
        result.items.push_back(item);
        result.total_tokens += cost;
    }
    return result;
}

// --- Full recall -------------------------------------------------------------

// Semantic and keyword channels always run; the graph channel is seeded by
// the top semantic hits; the temporal channel joins only when the query
// carries a parseable time expression. All four networks are searched.
inline RecallResult recall(const BankState& state, const std::string& query_text,
                           int budget_tokens, const ProviderSuite& providers,
                           const EngineConfig& config, Timestamp now) {
    if (budget_tokens < 0) throw ValidationError("budget must be >= 0");
    RecallResult empty_result;
    empty_result.budget = budget_tokens;
    if (state.units.empty()) return empty_result;

    const int pool = config.channel_pool_size;
    auto lookup = mention_lookup_for(state);

    std::vector<double> query_embedding = providers.embedder->embed(query_text);
    RankedList semantic = semantic_search(query_embedding, state, pool);
    std::vector<RankedList> lists;
    lists.push_back(semantic);
    lists.push_back(keyword_search(query_text, state, pool));

    if (config.enable_graph_channel) {
        RankedList entries;
        entries.channel = Channel::Semantic;
        size_t seeds = std::min(semantic.entries.size(),
                                static_cast<size_t>(config.graph_entry_points));
        entries.entries.assign(semantic.entries.begin(), semantic.entries.begin() + seeds);
        RankedList graph = graph_search(entries, state, config);
        if (static_cast<int>(graph.entries.size()) > pool) graph.entries.resize(pool);
        lists.push_back(std::move(graph));
    }

    std::optional<TimeRange> range = parse_temporal(query_text, now);
    if (!range && providers.temporal_fallback) range = providers.temporal_fallback(query_text, now);
    if (range) lists.push_back(temporal_search(*range, state, pool));

    RankedList fused = rrf_fuse(lists, config.rrf_k, lookup);
    RerankOutcome reranked =
        rerank(query_text, fused, state, *providers.reranker, config.rerank_window);

    std::map<std::string, double> fused_scores;
    for (const auto& e : fused.entries) fused_scores[e.unit_id] = e.score;
    std::map<std::string, std::map<std::string, int>> ranks;
    for (const auto& list : lists) {
        for (size_t i = 0; i < list.entries.size(); ++i)
            ranks[list.entries[i].unit_id][to_string(list.channel)] = static_cast<int>(i) + 1;
    }
    size_t rerank_count = std::min(fused.entries.size(),
                                   static_cast<size_t>(std::max(config.rerank_window, 0)));

    std::vector<RecallItem> items;
    for (size_t i = 0; i < reranked.list.entries.size(); ++i) {
        const auto& entry = reranked.list.entries[i];
        RecallItem item;
        item.unit_id = entry.unit_id;
        item.text = state.units.at(entry.unit_id).text;
        item.fused_score = fused_scores[entry.unit_id];
        if (i < rerank_count && !reranked.fallback) item.rerank_score = entry.score;
        for (const auto& [channel, rank] : ranks[entry.unit_id]) {
            item.channels_hit.push_back(channel);
            item.channel_ranks[channel] = rank;
        }
        items.push_back(std::move(item));
    }

    RecallResult result = pack_budget(items, budget_tokens, providers.token_counter);
    result.temporal_range_used = range;
    result.rerank_fallback = reranked.fallback;
    return result;
}

}  // namespace hindsight
