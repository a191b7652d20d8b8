#pragma once
// Core domain model: the four-network memory unit, entities, typed graph
// edges, opinions, bank profiles and the engine configuration.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hindsight/time.hpp"

namespace hindsight {

// ---------------------------------------------------------------------------
// Errors. Each maps to a distinct CLI exit code and HTTP status.
// ---------------------------------------------------------------------------

struct ValidationError : std::runtime_error {
    std::vector<std::string> violations;
    explicit ValidationError(const std::string& msg, std::vector<std::string> v = {})
        : std::runtime_error(msg), violations(std::move(v)) {}
};

struct ProviderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StorageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotFoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Enums
// ---------------------------------------------------------------------------

enum class Network { World, Experience, Opinion, Observation };

inline const char* to_string(Network n) {
    switch (n) {
        case Network::World: return "world";
        case Network::Experience: return "experience";
        case Network::Opinion: return "opinion";
        case Network::Observation: return "observation";
    }
    return "world";
}

inline Network network_from_string(const std::string& s) {
    if (s == "world") return Network::World;
    if (s == "experience") return Network::Experience;
    if (s == "opinion") return Network::Opinion;
    if (s == "observation") return Network::Observation;
    throw ValidationError("unknown network: " + s);
}

enum class EntityKind { Person, Organization, Location, Product, Concept, Other };

inline const char* to_string(EntityKind k) {
    switch (k) {
        case EntityKind::Person: return "PERSON";
        case EntityKind::Organization: return "ORGANIZATION";
        case EntityKind::Location: return "LOCATION";
        case EntityKind::Product: return "PRODUCT";
        case EntityKind::Concept: return "CONCEPT";
        case EntityKind::Other: return "OTHER";
    }
    return "OTHER";
}

inline EntityKind entity_kind_from_string(const std::string& s) {
    if (s == "PERSON") return EntityKind::Person;
    if (s == "ORGANIZATION") return EntityKind::Organization;
    if (s == "LOCATION") return EntityKind::Location;
    if (s == "PRODUCT") return EntityKind::Product;
    if (s == "CONCEPT") return EntityKind::Concept;
    if (s == "OTHER") return EntityKind::Other;
    throw ValidationError("unknown entity kind: " + s);
}

enum class EdgeKind { Temporal, Semantic, Entity, Causal };

inline const char* to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::Temporal: return "temporal";
        case EdgeKind::Semantic: return "semantic";
        case EdgeKind::Entity: return "entity";
        case EdgeKind::Causal: return "causal";
    }
    return "temporal";
}

inline EdgeKind edge_kind_from_string(const std::string& s) {
    if (s == "temporal") return EdgeKind::Temporal;
    if (s == "semantic") return EdgeKind::Semantic;
    if (s == "entity") return EdgeKind::Entity;
    if (s == "causal") return EdgeKind::Causal;
    throw ValidationError("unknown edge kind: " + s);
}

enum class CausalSubtype { Causes, CausedBy, Enables, Prevents };

inline const char* to_string(CausalSubtype s) {
    switch (s) {
        case CausalSubtype::Causes: return "causes";
        case CausalSubtype::CausedBy: return "caused_by";
        case CausalSubtype::Enables: return "enables";
        case CausalSubtype::Prevents: return "prevents";
    }
    return "causes";
}

inline CausalSubtype causal_subtype_from_string(const std::string& s) {
    if (s == "causes") return CausalSubtype::Causes;
    if (s == "caused_by") return CausalSubtype::CausedBy;
    if (s == "enables") return CausalSubtype::Enables;
    if (s == "prevents") return CausalSubtype::Prevents;
    throw ValidationError("unknown causal subtype: " + s);
}

enum class AssessLabel { Reinforce, Weaken, Contradict, Neutral };

inline const char* to_string(AssessLabel l) {
    switch (l) {
        case AssessLabel::Reinforce: return "reinforce";
        case AssessLabel::Weaken: return "weaken";
        case AssessLabel::Contradict: return "contradict";
        case AssessLabel::Neutral: return "neutral";
    }
    return "neutral";
}

inline AssessLabel assess_label_from_string(const std::string& s) {
    if (s == "reinforce") return AssessLabel::Reinforce;
    if (s == "weaken") return AssessLabel::Weaken;
    if (s == "contradict") return AssessLabel::Contradict;
    if (s == "neutral") return AssessLabel::Neutral;
    throw ValidationError("unknown assess label: " + s);
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

// One stored fact. Immutable value object once constructed; mutation goes
// through the store under its write contract.
struct MemoryUnit {
    std::string id;
    std::string bank_id;
    std::string text;
    std::vector<double> embedding;
    Timestamp occurred_start = 0;
    Timestamp occurred_end = 0;
    Timestamp mentioned_at = 0;
    Network network = Network::World;
    std::optional<double> confidence;               // present iff network == Opinion
    std::map<std::string, std::string> metadata;    // context, access count, ...
    std::vector<std::string> entity_ids;            // resolved canonical entities

    Timestamp occurrence_midpoint() const { return (occurred_start + occurred_end) / 2; }
};

struct BehavioralProfile {
    int skepticism = 3;   // 1 = trusting .. 5 = skeptical
    int literalism = 3;   // 1 = flexible .. 5 = literal
    int empathy = 3;      // 1 = detached .. 5 = empathetic
    double bias_strength = 0.5;  // 0 = fact-based .. 1 = strongly preference-conditioned
};

struct BankProfile {
    std::string name;
    BehavioralProfile profile;
    std::string background;  // first-person, <= background_max_len chars
};

struct Entity {
    std::string id;
    std::string canonical_name;
    EntityKind kind = EntityKind::Other;
    int64_t mention_count = 1;
    Timestamp last_mentioned = 0;
    std::set<std::string> co_mentions;  // case-folded names seen alongside this entity
};

struct Edge {
    std::string source;
    std::string target;
    double weight = 0.0;  // in [0,1]
    EdgeKind kind = EdgeKind::Temporal;
    std::optional<CausalSubtype> causal_subtype;  // present iff kind == Causal
    std::optional<std::string> entity_id;         // present iff kind == Entity
};

// Belief statement; stored one-to-one with a MemoryUnit in the opinion
// network (the unit id doubles as the opinion id).
struct Opinion {
    std::string id;
    std::string text;
    double confidence = 0.5;
    Timestamp formed_at = 0;
    std::string bank_id;
    std::set<std::string> entities;
};

// ---------------------------------------------------------------------------
// Engine configuration. Defaults are documented engine choices; only rrf_k
// has a literature-suggested value.
// ---------------------------------------------------------------------------

struct EngineConfig {
    int embedding_dim = 64;
    double sigma_t = 7.0 * kSecondsPerDay;  // temporal decay scale, seconds
    double theta_s = 0.80;                  // semantic link threshold
    double activation_decay = 0.7;          // delta in the activation update
    double mult_temporal = 1.0;             // link-type multipliers mu(l)
    double mult_semantic = 0.9;
    double mult_entity = 1.3;
    double mult_causal = 1.5;
    int rrf_k = 60;
    double opinion_alpha = 0.1;             // confidence update step
    double opinion_theta = 0.75;            // candidate similarity threshold (strict >)
    double entity_weight_string = 0.6;      // alpha_e
    double entity_weight_cooccurrence = 0.25;  // beta_e
    double entity_weight_temporal = 0.15;   // gamma_e
    double entity_resolution_threshold = 0.55;
    int channel_pool_size = 50;             // per-channel top-k
    int max_hops = 2;                       // graph traversal depth
    int background_max_len = 500;           // characters
    int graph_entry_points = 10;            // semantic seeds for the graph channel
    int rerank_window = 50;                 // fused candidates passed to the reranker
    int reflect_budget = 2048;              // token budget used by reflect's recall
    int provider_retries = 2;
    int provider_timeout_ms = 10000;
    int latency_budget_ms = 0;              // 0 = unlimited; reserved, not yet enforced
    bool enable_graph_channel = true;
    bool temporal_links_include_opinions = false;  // temporal edges stay within
                                                   // world/experience/observation
    double mu(EdgeKind k) const {
        switch (k) {
            case EdgeKind::Temporal: return mult_temporal;
            case EdgeKind::Semantic: return mult_semantic;
            case EdgeKind::Entity: return mult_entity;
            case EdgeKind::Causal: return mult_causal;
        }
        return 1.0;
    }

    void validate() const {
        if (embedding_dim < 1) throw ConfigError("embedding_dim must be >= 1");
        if (sigma_t <= 0) throw ConfigError("sigma_t must be > 0");
        if (theta_s <= 0 || theta_s >= 1) throw ConfigError("theta_s must be in (0,1)");
        if (activation_decay <= 0 || activation_decay >= 1)
            throw ConfigError("activation_decay must be in (0,1)");
        if (mult_temporal <= 0 || mult_semantic <= 0 || mult_entity <= 0 || mult_causal <= 0)
            throw ConfigError("link multipliers must be > 0");
        if (rrf_k < 1) throw ConfigError("rrf_k must be >= 1");
        if (opinion_alpha <= 0 || opinion_alpha >= 1)
            throw ConfigError("opinion_alpha must be in (0,1)");
        if (opinion_theta <= 0 || opinion_theta >= 1)
            throw ConfigError("opinion_theta must be in (0,1)");
        if (entity_weight_string < 0 || entity_weight_cooccurrence < 0 ||
            entity_weight_temporal < 0)
            throw ConfigError("entity weights must be >= 0");
        double sum = entity_weight_string + entity_weight_cooccurrence + entity_weight_temporal;
        if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("entity weights must sum to 1");
        if (channel_pool_size < 1) throw ConfigError("channel_pool_size must be >= 1");
        if (max_hops < 1) throw ConfigError("max_hops must be >= 1");
        if (background_max_len < 1) throw ConfigError("background_max_len must be >= 1");
    }
};

// ---------------------------------------------------------------------------
// Core predicates
// ---------------------------------------------------------------------------

// Closed-interval overlap: [a_start,a_end] and [b_start,b_end] share a point.
inline bool interval_overlaps(Timestamp a_start, Timestamp a_end, Timestamp b_start,
                              Timestamp b_end) {
    if (a_start > a_end) throw ValidationError("inverted interval: a_start > a_end");
    if (b_start > b_end) throw ValidationError("inverted interval: b_start > b_end");
    return std::max(a_start, b_start) <= std::min(a_end, b_end);
}

// Returns the list of violated invariants; empty means valid. Retain refuses
// units with a non-empty report.
inline std::vector<std::string> validate_unit(const MemoryUnit& unit, const EngineConfig& config) {
    std::vector<std::string> violations;
    if (unit.id.empty()) violations.push_back("id is empty");
    if (unit.bank_id.empty()) violations.push_back("bank_id is empty");
    if (unit.text.empty()) violations.push_back("text is empty");
    if (unit.occurred_start > unit.occurred_end)
        violations.push_back("occurred_start > occurred_end");
    if (unit.network == Network::Opinion) {
        if (!unit.confidence.has_value()) {
            violations.push_back("opinion unit missing confidence");
        } else if (*unit.confidence < 0.0 || *unit.confidence > 1.0) {
            violations.push_back("confidence outside [0,1]");
        }
    } else if (unit.confidence.has_value()) {
        violations.push_back("confidence on non-opinion unit");
    }
    if (static_cast<int>(unit.embedding.size()) != config.embedding_dim)
        violations.push_back("embedding dimension != configured embedding_dim");
    return violations;
}

}  // namespace hindsight
