#pragma once
// The retain pipeline: extract -> normalize time text -> embed -> resolve
// entities -> create units -> build links -> reinforce existing opinions ->
// flag observation refresh -> merge background. The whole pipeline runs
// inside one copy-on-write mutation, so any failure leaves the bank
// byte-identical to before the call.

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hindsight/bank.hpp"
#include "hindsight/entity_resolution.hpp"
#include "hindsight/links.hpp"
#include "hindsight/providers.hpp"
#include "hindsight/recall.hpp"
#include "hindsight/reflect.hpp"
#include "hindsight/temporal.hpp"

namespace hindsight {

struct RetainReceipt {
    std::vector<std::string> fact_ids;
    std::vector<std::string> new_entities;
    std::vector<std::pair<std::string, std::string>> merged_entities;  // mention -> entity id
    EdgeCounts edges_created;
    std::vector<OpinionUpdate> opinions_updated;
    bool background_changed = false;
    std::vector<std::string> observation_entities;  // refresh scheduled for these
    std::vector<std::string> warnings;
};

// Provider-backed background merge with engine-side revalidation: the result
// must stay within background_max_len and read first-person, otherwise the
// provider output is rejected and an error surfaces.
inline std::string merge_background(const std::string& current_h, const std::string& new_snippet,
                                    const ProviderSuite& providers, const EngineConfig& config) {
    std::string normalized = normalize_first_person(new_snippet);
    ProviderCallOptions opts{config.provider_retries, config.provider_timeout_ms};
    return call_with_retries(
        [&] { return providers.synthesizer->merge_background(current_h, normalized); },
        [&](const std::string& merged) {
            std::vector<std::string> v;
            if (static_cast<int>(merged.size()) > config.background_max_len)
                v.push_back("merged background exceeds background_max_len");
            if (!is_first_person(merged)) v.push_back("merged background is not first person");
            return v;
        },
        opts, "background merge");
}

// Regenerates the observation units for one entity from the world and
// experience facts that mention it. Runs as a mutation body; the engine
// schedules it on the background executor. Throws on provider failure,
// which aborts the mutation and keeps the previous observations.
inline std::vector<std::string> refresh_observations(BankState& state,
                                                     const std::string& entity_id,
                                                     const ProviderSuite& providers,
                                                     const EngineConfig& config, Timestamp now) {
    auto entity_it = state.entities.find(entity_id);
    if (entity_it == state.entities.end()) return {};
    const std::string entity_name = entity_it->second.canonical_name;

    auto fact_ids = state.units_mentioning(entity_id, {Network::World, Network::Experience});
    std::vector<std::string> fact_texts;
    for (const auto& fid : fact_ids) fact_texts.push_back(state.units.at(fid).text);

    std::vector<std::string> texts =
        providers.synthesizer->synthesize_observations(entity_name, fact_texts);
    if (texts.size() > 7) texts.resize(7);

    for (const auto& old_id :
         state.units_mentioning(entity_id, {Network::Observation})) {
        state.remove_unit(old_id);
    }

    std::vector<std::string> created;
    std::vector<MemoryUnit> units;
    for (const auto& text : texts) {
        if (text.empty()) continue;
        MemoryUnit u;
        u.id = state.next_unit_id();
        u.bank_id = state.bank_id;
        u.text = text;
        u.network = Network::Observation;
        u.occurred_start = u.occurred_end = u.mentioned_at = now;
        u.entity_ids.push_back(entity_id);
        u.metadata["context"] = "observation:" + entity_id;
        u.metadata["access_count"] = "0";
        u.embedding = providers.embedder->embed("[" + format_human_date(now) + "] " + text);
        units.push_back(std::move(u));
    }
    if (!units.empty()) {
        created = state.upsert_units(units, config);
        build_links(state, created, {}, config);
    }
    return created;
}

namespace retain_detail {

// Extraction with retries; schema violations that survive all attempts are a
// rejected-fact validation error, provider exceptions a provider error.
inline std::vector<ExtractedFact> extract_validated(const Transcript& transcript,
                                                    const ProviderSuite& providers,
                                                    const EngineConfig& config) {
    std::vector<std::string> last_violations;
    std::string last_provider_error;
    for (int attempt = 0; attempt <= config.provider_retries; ++attempt) {
        std::vector<ExtractedFact> facts;
        try {
            facts = providers.fact_extractor->extract(transcript);
        } catch (const std::exception& e) {
            last_provider_error = e.what();
            last_violations.clear();
            continue;
        }
        std::vector<std::string> violations;
        for (size_t i = 0; i < facts.size(); ++i) {
            for (const auto& v : validate_extracted_fact(facts[i], facts.size()))
                violations.push_back("fact " + std::to_string(i) + ": " + v);
        }
        if (facts.empty()) violations.push_back("extractor returned no facts");
        if (violations.empty()) return facts;
        last_violations = std::move(violations);
        last_provider_error.clear();
    }
    if (!last_violations.empty())
        throw ValidationError("extracted facts rejected by schema gate", last_violations);
    throw ProviderError("fact extraction failed after retries: " + last_provider_error);
}

}  // namespace retain_detail

// Retain(B, D): converts a transcript into linked memory units. Atomic: on
// any failure the bank is unchanged. Observation refresh is only flagged
// here; the engine runs it in the background after the receipt returns.
inline RetainReceipt retain(MemoryBank& bank, const Transcript& transcript,
                            const ProviderSuite& providers, const EngineConfig& config,
                            Timestamp now, bool biographical = false) {
    if (transcript.empty()) throw ValidationError("retain: empty input");
    for (const auto& turn : transcript) {
        if (turn.text.empty()) throw ValidationError("retain: transcript turn with empty text");
    }

    return bank.mutate([&](BankState& state) {
        RetainReceipt receipt;

        // 1. Extraction through the schema gate.
        std::vector<ExtractedFact> facts =
            retain_detail::extract_validated(transcript, providers, config);

        // 2. Normalize time text: facts without structured occurrence fields
        // fall back to parsing their "when" phrase, then to the mention time.
        struct Prepared {
            ExtractedFact fact;
            Timestamp occurred_start, occurred_end, mentioned_at;
        };
        std::vector<Prepared> prepared;
        for (auto& f : facts) {
            Prepared p{f, 0, 0, f.mentioned_at.value_or(now)};
            if (f.occurred_start && f.occurred_end) {
                p.occurred_start = *f.occurred_start;
                p.occurred_end = *f.occurred_end;
            } else if (auto range = parse_temporal(f.when, p.mentioned_at)) {
                p.occurred_start = range->first;
                p.occurred_end = range->second;
            } else {
                p.occurred_start = p.occurred_end = p.mentioned_at;
            }
            if (p.occurred_start > p.occurred_end)
                throw ValidationError("fact with inverted occurrence interval");
            prepared.push_back(std::move(p));
        }

        // 3. Embeddings over time-augmented text.
        ProviderCallOptions opts{config.provider_retries, config.provider_timeout_ms};
        std::vector<std::vector<double>> embeddings;
        for (const auto& p : prepared) {
            std::string augmented =
                "[" + format_human_date(p.occurred_start) + "] " + p.fact.what;
            embeddings.push_back(call_with_retries(
                [&] { return providers.embedder->embed(augmented); },
                [&](const std::vector<double>& v) {
                    std::vector<std::string> errs;
                    if (static_cast<int>(v.size()) != config.embedding_dim)
                        errs.push_back("embedding dimension mismatch");
                    return errs;
                },
                opts, "embedding"));
        }

        // 4. Entity resolution.
        std::set<std::string> preexisting_entities;
        for (const auto& [id, e] : state.entities) preexisting_entities.insert(id);
        std::set<std::string> recorded_new;
        std::vector<std::vector<std::string>> fact_entities;
        for (const auto& p : prepared) {
            std::set<std::string> names;
            for (const auto& m : p.fact.entities) names.insert(to_lower(m.text));
            std::vector<std::string> resolved;
            for (const auto& m : p.fact.entities) {
                MentionContext ctx;
                ctx.text = m.text;
                ctx.kind = m.kind;
                ctx.timestamp = p.mentioned_at;
                for (const auto& n : names)
                    if (n != to_lower(m.text)) ctx.co_mentions.insert(n);
                std::string id = resolve_entity(ctx, state, config);
                if (!preexisting_entities.count(id)) {
                    if (recorded_new.insert(id).second) receipt.new_entities.push_back(id);
                } else {
                    receipt.merged_entities.emplace_back(m.text, id);
                }
                if (std::find(resolved.begin(), resolved.end(), id) == resolved.end())
                    resolved.push_back(id);
            }
            fact_entities.push_back(std::move(resolved));
        }

        // 5. Unit creation (opinion-typed facts also register Opinion records).
        std::set<std::string> preexisting_opinions;
        for (const auto& [id, o] : state.opinions) preexisting_opinions.insert(id);
        std::vector<MemoryUnit> units;
        for (size_t i = 0; i < prepared.size(); ++i) {
            const auto& p = prepared[i];
            MemoryUnit u;
            u.id = state.next_unit_id();
            u.bank_id = state.bank_id;
            u.text = p.fact.what;
            u.embedding = embeddings[i];
            u.occurred_start = p.occurred_start;
            u.occurred_end = p.occurred_end;
            u.mentioned_at = p.mentioned_at;
            u.network = to_network(p.fact.fact_type);
            if (u.network == Network::Opinion) u.confidence = kDefaultOpinionConfidence;
            u.entity_ids = fact_entities[i];
            u.metadata["context"] = "retain";
            u.metadata["access_count"] = "0";
            if (!p.fact.when.empty()) u.metadata["when"] = p.fact.when;
            if (!p.fact.where.empty()) u.metadata["where"] = p.fact.where;
            if (!p.fact.who.empty()) u.metadata["who"] = p.fact.who;
            if (!p.fact.why.empty()) u.metadata["why"] = p.fact.why;
            units.push_back(std::move(u));
        }
        receipt.fact_ids = state.upsert_units(units, config);
        for (size_t i = 0; i < prepared.size(); ++i) {
            if (units[i].network != Network::Opinion) continue;
            Opinion o;
            o.id = receipt.fact_ids[i];
            o.text = units[i].text;
            o.confidence = *units[i].confidence;
            o.formed_at = units[i].mentioned_at;
            o.bank_id = state.bank_id;
            o.entities.insert(units[i].entity_ids.begin(), units[i].entity_ids.end());
            state.opinions[o.id] = o;
        }

        // 6. Graph links, causal edges straight from extraction.
        std::vector<CausalLinkSpec> causal;
        for (size_t i = 0; i < prepared.size(); ++i) {
            for (const auto& rel : prepared[i].fact.causal_relations)
                causal.push_back({static_cast<int>(i), rel});
        }
        receipt.edges_created = build_links(state, receipt.fact_ids, causal, config);

        // 7. Reinforce beliefs that existed before this retain.
        receipt.opinions_updated = reinforce_opinions(receipt.fact_ids, state, providers, config,
                                                      receipt.warnings, &preexisting_opinions);

        // 8. Flag observation refresh for every entity touched.
        std::set<std::string> touched;
        for (const auto& ids : fact_entities) touched.insert(ids.begin(), ids.end());
        receipt.observation_entities.assign(touched.begin(), touched.end());

        // 9. Background merge, only for input flagged biographical.
        if (biographical) {
            std::string snippet;
            for (const auto& turn : transcript) {
                if (!snippet.empty()) snippet += " ";
                snippet += turn.text;
            }
            std::string merged = merge_background(state.profile.background, snippet, providers, config);
            if (merged != state.profile.background) {
                state.profile.background = merged;
                receipt.background_changed = true;
            }
        }
        return receipt;
    });
}

}  // namespace hindsight
