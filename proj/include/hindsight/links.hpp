#pragma once
// Graph link construction for newly stored units: entity edges (weight 1.0,
// both orientations) between units sharing a canonical entity, temporal
// edges within a 3*sigma_t midpoint window, semantic edges where cosine
// clears theta_s, and causal edges taken verbatim from extraction.
// Temporal and semantic weights are symmetric, so those edges are stored in
// both orientations too; causal edges keep their extracted direction.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hindsight/bank.hpp"
#include "hindsight/providers.hpp"
#include "hindsight/types.hpp"
#include "hindsight/vector_index.hpp"

namespace hindsight {

inline double temporal_link_weight(Timestamp t_i, Timestamp t_j, double sigma_t) {
    if (sigma_t <= 0) throw ConfigError("sigma_t must be > 0");
    double dt = std::abs(static_cast<double>(t_i - t_j));
    return std::exp(-dt / sigma_t);
}

struct EdgeCounts {
    int temporal = 0;
    int semantic = 0;
    int entity = 0;
    int causal = 0;

    int total() const { return temporal + semantic + entity + causal; }
};

// Causal link request: batch-relative source index plus the extracted relation.
struct CausalLinkSpec {
    int source_index = 0;
    CausalRelation relation;
};

inline EdgeCounts build_links(BankState& state, const std::vector<std::string>& new_unit_ids,
                              const std::vector<CausalLinkSpec>& causal,
                              const EngineConfig& config) {
    EdgeCounts counts;

    auto temporal_allowed = [&](Network n) {
        if (n == Network::Opinion) return config.temporal_links_include_opinions;
        return n == Network::World || n == Network::Experience || n == Network::Observation;
    };

    for (const auto& uid : new_unit_ids) {
        const MemoryUnit& u = state.units.at(uid);

        // Entity edges: every pair sharing a canonical entity, w = 1.0,
        // stored in both orientations. Smallest shared entity id labels the
        // edge when a pair shares several.
        std::vector<std::string> entity_ids = u.entity_ids;
        std::sort(entity_ids.begin(), entity_ids.end());
        for (const auto& eid : entity_ids) {
            for (const auto& [vid, v] : state.units) {
                if (vid == uid) continue;
                bool shares = std::find(v.entity_ids.begin(), v.entity_ids.end(), eid) !=
                              v.entity_ids.end();
                if (!shares) continue;
                Edge forward{uid, vid, 1.0, EdgeKind::Entity, std::nullopt, eid};
                Edge backward{vid, uid, 1.0, EdgeKind::Entity, std::nullopt, eid};
                if (state.add_edge(forward)) ++counts.entity;
                if (state.add_edge(backward)) ++counts.entity;
            }
        }

        // Temporal edges within the 3*sigma_t window on occurrence midpoints.
        if (temporal_allowed(u.network)) {
            Timestamp u_mid = u.occurrence_midpoint();
            for (const auto& [vid, v] : state.units) {
                if (vid == uid || !temporal_allowed(v.network)) continue;
                double dt = std::abs(static_cast<double>(u_mid - v.occurrence_midpoint()));
                if (dt > 3.0 * config.sigma_t) continue;
                double w = temporal_link_weight(u_mid, v.occurrence_midpoint(), config.sigma_t);
                if (state.add_edge({uid, vid, w, EdgeKind::Temporal, std::nullopt, std::nullopt}))
                    ++counts.temporal;
                if (state.add_edge({vid, uid, w, EdgeKind::Temporal, std::nullopt, std::nullopt}))
                    ++counts.temporal;
            }
        }

        // Semantic edges: candidate set is the vector-index top-k per new
        // unit; the threshold itself is exact.
        auto scored = state.vectors.scan(u.embedding);
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        int taken = 0;
        for (const auto& [vid, cos] : scored) {
            if (vid == uid) continue;
            if (taken >= config.channel_pool_size) break;
            ++taken;
            if (cos < config.theta_s) continue;
            // identical embeddings can push cosine a few ulps past 1
            double w = std::clamp(cos, 0.0, 1.0);
            if (state.add_edge({uid, vid, w, EdgeKind::Semantic, std::nullopt, std::nullopt}))
                ++counts.semantic;
            if (state.add_edge({vid, uid, w, EdgeKind::Semantic, std::nullopt, std::nullopt}))
                ++counts.semantic;
        }
    }

    for (const auto& spec : causal) {
        int n = static_cast<int>(new_unit_ids.size());
        if (spec.source_index < 0 || spec.source_index >= n ||
            spec.relation.target_fact_index < 0 || spec.relation.target_fact_index >= n) {
            throw ValidationError("causal relation index out of batch range");
        }
        Edge e{new_unit_ids[spec.source_index], new_unit_ids[spec.relation.target_fact_index],
               1.0, EdgeKind::Causal, spec.relation.relation_type, std::nullopt};
        if (state.add_edge(e)) ++counts.causal;
    }

    return counts;
}

}  // namespace hindsight
