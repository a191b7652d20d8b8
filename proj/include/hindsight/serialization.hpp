#pragma once
// Canonical JSON serialization for every domain type. One object per line
// (JSONL) is the interchange format shared by persistence, the CLI and the
// HTTP facade. Field names follow the domain model exactly.

#include <json.hpp>

#include "hindsight/providers.hpp"
#include "hindsight/types.hpp"

namespace hindsight {

using json = nlohmann::json;

// --- MemoryUnit -------------------------------------------------------------

inline json to_json(const MemoryUnit& u) {
    json j;
    j["id"] = u.id;
    j["bank_id"] = u.bank_id;
    j["text"] = u.text;
    j["embedding"] = u.embedding;
    j["occurred_start"] = u.occurred_start;
    j["occurred_end"] = u.occurred_end;
    j["mentioned_at"] = u.mentioned_at;
    j["network"] = to_string(u.network);
    if (u.confidence) j["confidence"] = *u.confidence;
    j["metadata"] = u.metadata;
    j["entity_ids"] = u.entity_ids;
    return j;
}

inline MemoryUnit unit_from_json(const json& j) {
    MemoryUnit u;
    u.id = j.at("id").get<std::string>();
    u.bank_id = j.at("bank_id").get<std::string>();
    u.text = j.at("text").get<std::string>();
    u.embedding = j.at("embedding").get<std::vector<double>>();
    u.occurred_start = j.at("occurred_start").get<Timestamp>();
    u.occurred_end = j.at("occurred_end").get<Timestamp>();
    u.mentioned_at = j.at("mentioned_at").get<Timestamp>();
    u.network = network_from_string(j.at("network").get<std::string>());
    if (j.contains("confidence") && !j["confidence"].is_null())
        u.confidence = j["confidence"].get<double>();
    if (j.contains("metadata"))
        u.metadata = j["metadata"].get<std::map<std::string, std::string>>();
    if (j.contains("entity_ids"))
        u.entity_ids = j["entity_ids"].get<std::vector<std::string>>();
    return u;
}

// --- Entity ----------------------------------------------------------------

inline json to_json(const Entity& e) {
    json j;
    j["id"] = e.id;
    j["canonical_name"] = e.canonical_name;
    j["kind"] = to_string(e.kind);
    j["mention_count"] = e.mention_count;
    j["last_mentioned"] = e.last_mentioned;
    j["co_mentions"] = e.co_mentions;
    return j;
}

inline Entity entity_from_json(const json& j) {
    Entity e;
    e.id = j.at("id").get<std::string>();
    e.canonical_name = j.at("canonical_name").get<std::string>();
    e.kind = entity_kind_from_string(j.at("kind").get<std::string>());
    e.mention_count = j.at("mention_count").get<int64_t>();
    e.last_mentioned = j.at("last_mentioned").get<Timestamp>();
    if (j.contains("co_mentions"))
        e.co_mentions = j["co_mentions"].get<std::set<std::string>>();
    return e;
}

// --- Edge ------------------------------------------------------------------

inline json to_json(const Edge& e) {
    json j;
    j["source"] = e.source;
    j["target"] = e.target;
    j["weight"] = e.weight;
    j["kind"] = to_string(e.kind);
    if (e.causal_subtype) j["causal_subtype"] = to_string(*e.causal_subtype);
    if (e.entity_id) j["entity_id"] = *e.entity_id;
    return j;
}

inline Edge edge_from_json(const json& j) {
    Edge e;
    e.source = j.at("source").get<std::string>();
    e.target = j.at("target").get<std::string>();
    e.weight = j.at("weight").get<double>();
    e.kind = edge_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("causal_subtype") && !j["causal_subtype"].is_null())
        e.causal_subtype = causal_subtype_from_string(j["causal_subtype"].get<std::string>());
    if (j.contains("entity_id") && !j["entity_id"].is_null())
        e.entity_id = j["entity_id"].get<std::string>();
    return e;
}

// --- Opinion ---------------------------------------------------------------

inline json to_json(const Opinion& o) {
    json j;
    j["id"] = o.id;
    j["text"] = o.text;
    j["confidence"] = o.confidence;
    j["formed_at"] = o.formed_at;
    j["bank_id"] = o.bank_id;
    j["entities"] = o.entities;
    return j;
}

inline Opinion opinion_from_json(const json& j) {
    Opinion o;
    o.id = j.at("id").get<std::string>();
    o.text = j.at("text").get<std::string>();
    o.confidence = j.at("confidence").get<double>();
    o.formed_at = j.at("formed_at").get<Timestamp>();
    o.bank_id = j.at("bank_id").get<std::string>();
    o.entities = j.at("entities").get<std::set<std::string>>();
    return o;
}

// --- Profiles ----------------------------------------------------------------

inline json to_json(const BehavioralProfile& p) {
    return json{{"skepticism", p.skepticism},
                {"literalism", p.literalism},
                {"empathy", p.empathy},
                {"bias_strength", p.bias_strength}};
}

inline BehavioralProfile behavioral_profile_from_json(const json& j) {
    BehavioralProfile p;
    p.skepticism = j.at("skepticism").get<int>();
    p.literalism = j.at("literalism").get<int>();
    p.empathy = j.at("empathy").get<int>();
    p.bias_strength = j.at("bias_strength").get<double>();
    return p;
}

inline json to_json(const BankProfile& p) {
    return json{{"name", p.name}, {"profile", to_json(p.profile)}, {"background", p.background}};
}

inline BankProfile bank_profile_from_json(const json& j) {
    BankProfile p;
    p.name = j.at("name").get<std::string>();
    p.profile = behavioral_profile_from_json(j.at("profile"));
    p.background = j.at("background").get<std::string>();
    return p;
}

// --- EngineConfig ------------------------------------------------------------

inline json to_json(const EngineConfig& c) {
    json j;
    j["embedding_dim"] = c.embedding_dim;
    j["sigma_t"] = c.sigma_t;
    j["theta_s"] = c.theta_s;
    j["activation_decay"] = c.activation_decay;
    j["link_multipliers"] = {{"temporal", c.mult_temporal},
                             {"semantic", c.mult_semantic},
                             {"entity", c.mult_entity},
                             {"causal", c.mult_causal}};
    j["rrf_k"] = c.rrf_k;
    j["opinion_alpha"] = c.opinion_alpha;
    j["opinion_theta"] = c.opinion_theta;
    j["entity_weights"] = {{"alpha_e", c.entity_weight_string},
                           {"beta_e", c.entity_weight_cooccurrence},
                           {"gamma_e", c.entity_weight_temporal}};
    j["entity_resolution_threshold"] = c.entity_resolution_threshold;
    j["channel_pool_size"] = c.channel_pool_size;
    j["max_hops"] = c.max_hops;
    j["background_max_len"] = c.background_max_len;
    j["graph_entry_points"] = c.graph_entry_points;
    j["rerank_window"] = c.rerank_window;
    j["reflect_budget"] = c.reflect_budget;
    j["provider_retries"] = c.provider_retries;
    j["provider_timeout_ms"] = c.provider_timeout_ms;
    j["latency_budget_ms"] = c.latency_budget_ms;
    j["enable_graph_channel"] = c.enable_graph_channel;
    j["temporal_links_include_opinions"] = c.temporal_links_include_opinions;
    return j;
}

inline EngineConfig engine_config_from_json(const json& j) {
    EngineConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("embedding_dim", c.embedding_dim);
    get("sigma_t", c.sigma_t);
    get("theta_s", c.theta_s);
    get("activation_decay", c.activation_decay);
    if (j.contains("link_multipliers")) {
        const auto& m = j.at("link_multipliers");
        if (m.contains("temporal")) c.mult_temporal = m["temporal"].get<double>();
        if (m.contains("semantic")) c.mult_semantic = m["semantic"].get<double>();
        if (m.contains("entity")) c.mult_entity = m["entity"].get<double>();
        if (m.contains("causal")) c.mult_causal = m["causal"].get<double>();
    }
    get("rrf_k", c.rrf_k);
    get("opinion_alpha", c.opinion_alpha);
    get("opinion_theta", c.opinion_theta);
    if (j.contains("entity_weights")) {
        const auto& w = j.at("entity_weights");
        if (w.contains("alpha_e")) c.entity_weight_string = w["alpha_e"].get<double>();
        if (w.contains("beta_e")) c.entity_weight_cooccurrence = w["beta_e"].get<double>();
        if (w.contains("gamma_e")) c.entity_weight_temporal = w["gamma_e"].get<double>();
    }
    get("entity_resolution_threshold", c.entity_resolution_threshold);
    get("channel_pool_size", c.channel_pool_size);
    get("max_hops", c.max_hops);
    get("background_max_len", c.background_max_len);
    get("graph_entry_points", c.graph_entry_points);
    get("rerank_window", c.rerank_window);
    get("reflect_budget", c.reflect_budget);
    get("provider_retries", c.provider_retries);
    get("provider_timeout_ms", c.provider_timeout_ms);
    get("latency_budget_ms", c.latency_budget_ms);
    get("enable_graph_channel", c.enable_graph_channel);
    get("temporal_links_include_opinions", c.temporal_links_include_opinions);
    c.validate();
    return c;
}

// --- Provider wire schemas ----------------------------------------------------
// External provider adapters exchange exactly these shapes. Extractors may
// only emit world | experience | opinion fact types.

inline const char* to_string(FactType t) {
    switch (t) {
        case FactType::World: return "world";
        case FactType::Experience: return "experience";
        case FactType::Opinion: return "opinion";
    }
    return "world";
}

inline FactType fact_type_from_string(const std::string& s) {
    if (s == "world") return FactType::World;
    if (s == "experience") return FactType::Experience;
    if (s == "opinion") return FactType::Opinion;
    throw ValidationError("unknown fact_type: " + s);
}

inline json to_json(const ExtractedFact& f) {
    json j;
    j["what"] = f.what;
    j["when"] = f.when;
    j["where"] = f.where;
    j["who"] = f.who;
    j["why"] = f.why;
    j["fact_type"] = to_string(f.fact_type);
    if (f.occurred_start) j["occurred_start"] = *f.occurred_start;
    if (f.occurred_end) j["occurred_end"] = *f.occurred_end;
    if (f.mentioned_at) j["mentioned_at"] = *f.mentioned_at;
    json entities = json::array();
    for (const auto& m : f.entities)
        entities.push_back(json{{"text", m.text}, {"kind", to_string(m.kind)}});
    j["entities"] = entities;
    json relations = json::array();
    for (const auto& r : f.causal_relations)
        relations.push_back(json{{"target_fact_index", r.target_fact_index},
                                 {"relation_type", to_string(r.relation_type)},
                                 {"strength", r.strength}});
    j["causal_relations"] = relations;
    return j;
}

inline ExtractedFact extracted_fact_from_json(const json& j) {
    ExtractedFact f;
    f.what = j.at("what").get<std::string>();
    f.when = j.value("when", "");
    f.where = j.value("where", "");
    f.who = j.value("who", "");
    f.why = j.value("why", "");
    f.fact_type = fact_type_from_string(j.at("fact_type").get<std::string>());
    if (j.contains("occurred_start") && !j["occurred_start"].is_null())
        f.occurred_start = j["occurred_start"].get<Timestamp>();
    if (j.contains("occurred_end") && !j["occurred_end"].is_null())
        f.occurred_end = j["occurred_end"].get<Timestamp>();
    if (j.contains("mentioned_at") && !j["mentioned_at"].is_null())
        f.mentioned_at = j["mentioned_at"].get<Timestamp>();
    if (j.contains("entities")) {
        for (const auto& m : j["entities"]) {
            EntityMention mention;
            mention.text = m.at("text").get<std::string>();
            if (m.contains("kind")) mention.kind = entity_kind_from_string(m["kind"].get<std::string>());
            f.entities.push_back(std::move(mention));
        }
    }
    if (j.contains("causal_relations")) {
        for (const auto& r : j["causal_relations"]) {
            CausalRelation rel;
            rel.target_fact_index = r.at("target_fact_index").get<int>();
            rel.relation_type = causal_subtype_from_string(r.at("relation_type").get<std::string>());
            rel.strength = r.value("strength", 1.0);
            f.causal_relations.push_back(rel);
        }
    }
    return f;
}

inline json to_json(const OpinionCandidate& c) {
    json j;
    j["opinion"] = c.text;
    if (c.confidence) j["confidence"] = *c.confidence;
    j["reasoning"] = c.reasoning;
    return j;
}

inline OpinionCandidate opinion_candidate_from_json(const json& j) {
    OpinionCandidate c;
    c.text = j.at("opinion").get<std::string>();
    if (j.contains("confidence") && !j["confidence"].is_null())
        c.confidence = j["confidence"].get<double>();
    c.reasoning = j.value("reasoning", "");
    return c;
}

// Compact single-line dump used for JSONL records.
inline std::string to_jsonl(const json& j) {
    return j.dump();
}

}  // namespace hindsight
