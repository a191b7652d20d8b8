#pragma once
// Preference-conditioned reflection: profile verbalization, response
// generation over recalled memories, opinion formation, and the confidence
// reinforcement rule applied when new evidence arrives.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "hindsight/bank.hpp"
#include "hindsight/entity_resolution.hpp"
#include "hindsight/links.hpp"
#include "hindsight/recall.hpp"
#include "hindsight/types.hpp"

namespace hindsight {

// ---------------------------------------------------------------------------
// Profile verbalization: each 1-5 disposition value maps to one fixed
// phrase, and the bias strength selects one of three clauses by thirds.
// Pure function of the profile.
// ---------------------------------------------------------------------------

inline std::string verbalize_profile(const BankProfile& bank_profile) {
    static const std::array<const char*, 5> skepticism = {
        "are generally trusting", "are fairly trusting", "balance trust with healthy skepticism",
        "are fairly skeptical", "are highly skeptical"};
    static const std::array<const char*, 5> literalism = {
        "interpret language very flexibly", "interpret language flexibly",
        "balance literal and flexible interpretation", "interpret language fairly literally",
        "interpret language strictly and literally"};
    static const std::array<const char*, 5> empathy = {
        "communicate in a detached, task-first manner", "keep some emotional distance",
        "balance empathy with detachment", "are considerate and empathetic",
        "are highly empathetic"};

    const BehavioralProfile& p = bank_profile.profile;
    auto idx = [](int v) { return static_cast<size_t>(std::clamp(v, 1, 5) - 1); };

    std::string msg;
    if (!bank_profile.name.empty()) msg += "You are " + bank_profile.name + ". ";
    if (!bank_profile.background.empty()) msg += "Background: " + bank_profile.background + " ";
    msg += std::string("You ") + skepticism[idx(p.skepticism)] + ", " +
           literalism[idx(p.literalism)] + ", and " + empathy[idx(p.empathy)] + ". ";

    double beta = std::clamp(p.bias_strength, 0.0, 1.0);
    if (beta < 1.0 / 3.0) {
        msg += "Emphasize objectivity: ground your reasoning in the retrieved evidence and keep "
               "personal leanings out of it.";
    } else if (beta < 2.0 / 3.0) {
        msg += "Balance factual neutrality with your configured preferences when forming "
               "judgments.";
    } else {
        msg += "Express your views in stronger, more opinionated language consistent with your "
               "preferences.";
    }
    return msg;
}

// ---------------------------------------------------------------------------
// Confidence update rule. Results are quantized to a 1e-9 grid so decimal
// step sequences (0.70 -> 0.80 -> 0.90 -> 0.70) land on exact values.
// ---------------------------------------------------------------------------

inline double apply_confidence_update(double c, AssessLabel label, double alpha) {
    if (c < 0.0 || c > 1.0) throw ValidationError("confidence outside [0,1]");
    if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("opinion_alpha must be in (0,1)");
    double next = c;
    switch (label) {
        case AssessLabel::Reinforce: next = std::min(c + alpha, 1.0); break;
        case AssessLabel::Weaken: next = std::max(c - alpha, 0.0); break;
        case AssessLabel::Contradict: next = std::max(c - 2.0 * alpha, 0.0); break;
        case AssessLabel::Neutral: return c;
    }
    return std::round(next * 1e9) / 1e9;
}

// ---------------------------------------------------------------------------
// Candidate identification: opinions sharing at least one entity with the
// fact, or with embedding cosine strictly above opinion_theta.
// ---------------------------------------------------------------------------

inline std::vector<Opinion> find_candidate_opinions(const MemoryUnit& new_fact,
                                                    const BankState& state,
                                                    const EngineConfig& config) {
    std::vector<Opinion> out;
    for (const auto& [oid, opinion] : state.opinions) {
        bool entity_overlap = false;
        for (const auto& eid : new_fact.entity_ids) {
            if (opinion.entities.count(eid)) {
                entity_overlap = true;
                break;
            }
        }
        bool similar = false;
        if (!entity_overlap) {
            const std::vector<double>* v = state.vectors.get(oid);
            if (v) similar = cosine_similarity(*v, new_fact.embedding) > config.opinion_theta;
        }
        if (entity_overlap || similar) out.push_back(opinion);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reinforcement: assess each (new fact, candidate opinion) pair, update
// confidence, and on contradiction ask the synthesizer for a revised opinion
// text (accepted only when non-empty and first-person).
// ---------------------------------------------------------------------------

struct OpinionUpdate {
    std::string opinion_id;
    double old_confidence = 0.0;
    double new_confidence = 0.0;
    AssessLabel label = AssessLabel::Neutral;
    bool text_revised = false;
};

namespace reflect_detail {

inline bool acceptable_opinion_text(const std::string& text) {
    if (text.empty()) return false;
    if (!is_first_person(text)) return false;
    static const char* starters[] = {"I ", "I'", "My ", "In my ", "Previously "};
    for (const char* s : starters) {
        if (text.rfind(s, 0) == 0) return true;
    }
    return false;
}

}  // namespace reflect_detail

// Processes facts in ingestion order. Assessor failures skip the pair and
// are reported as warnings; retain still succeeds. When `eligible` is
// non-null, only those opinion ids can be reinforced (retain passes the set
// of beliefs that existed before the batch).
inline std::vector<OpinionUpdate> reinforce_opinions(const std::vector<std::string>& new_fact_ids,
                                                     BankState& state,
                                                     const ProviderSuite& providers,
                                                     const EngineConfig& config,
                                                     std::vector<std::string>& warnings,
                                                     const std::set<std::string>* eligible = nullptr) {
    std::vector<OpinionUpdate> updates;
    for (const auto& fact_id : new_fact_ids) {
        auto fact_it = state.units.find(fact_id);
        if (fact_it == state.units.end()) continue;
        const MemoryUnit fact = fact_it->second;
        // Evidence comes from the objective networks.
        if (fact.network != Network::World && fact.network != Network::Experience) continue;

        for (const Opinion& candidate : find_candidate_opinions(fact, state, config)) {
            if (eligible && !eligible->count(candidate.id)) continue;
            AssessLabel label;
            try {
                label = providers.assessor->assess(candidate.text, fact.text);
            } catch (const std::exception& e) {
                warnings.push_back("assessor failed for opinion " + candidate.id + ": " + e.what());
                continue;
            }
            if (label == AssessLabel::Neutral) continue;

            Opinion& stored = state.opinions.at(candidate.id);
            MemoryUnit& unit = state.units.at(candidate.id);
            OpinionUpdate update;
            update.opinion_id = candidate.id;
            update.old_confidence = stored.confidence;
            update.label = label;
            stored.confidence = apply_confidence_update(stored.confidence, label, config.opinion_alpha);
            unit.confidence = stored.confidence;
            update.new_confidence = stored.confidence;

            if (label == AssessLabel::Contradict) {
                try {
                    std::string revised = providers.synthesizer->revise_opinion(stored.text, fact.text);
                    if (reflect_detail::acceptable_opinion_text(revised)) {
                        stored.text = revised;
                        unit.text = revised;
                        unit.embedding = providers.embedder->embed(
                            "[" + format_human_date(unit.occurred_start) + "] " + revised);
                        state.lexical.add(unit.id, unit.text);
                        state.vectors.add(unit.id, unit.embedding);
                        int revision = 0;
                        auto it = unit.metadata.find("revision");
                        if (it != unit.metadata.end()) revision = std::stoi(it->second);
                        unit.metadata["revision"] = std::to_string(revision + 1);
                        update.text_revised = true;
                    }
                } catch (const std::exception& e) {
                    warnings.push_back("opinion revision failed for " + candidate.id + ": " +
                                       e.what());
                }
            }
            updates.push_back(update);
        }
    }
    return updates;
}

// ---------------------------------------------------------------------------
// Reflect: recall, preference-conditioned generation, opinion formation.
// ---------------------------------------------------------------------------

struct ReflectResult {
    std::string response_text;
    std::vector<Opinion> opinions_formed;
    std::vector<OpinionUpdate> opinions_updated;  // reserved; reinforcement runs in retain
    std::vector<std::string> memories_used;
    std::string system_message_used;
    std::vector<std::string> warnings;
};

constexpr double kDefaultOpinionConfidence = 0.6;

inline ReflectResult reflect(MemoryBank& bank, const std::string& query,
                             const ProviderSuite& providers, const EngineConfig& config,
                             Timestamp now) {
    auto snap = bank.snapshot();
    RecallResult recalled = recall(*snap, query, config.reflect_budget, providers, config, now);

    ReflectResult result;
    result.system_message_used = verbalize_profile(snap->profile);

    std::vector<std::string> context;
    for (const auto& item : recalled.items) {
        const MemoryUnit& u = snap->units.at(item.unit_id);
        context.push_back("[" + format_human_date(u.occurred_start) + "] " + item.text);
        result.memories_used.push_back(item.unit_id);
    }

    ProviderCallOptions opts{config.provider_retries, config.provider_timeout_ms};
    SynthesisResult synth = call_with_retries(
        [&] { return providers.synthesizer->reflect(result.system_message_used, context, query); },
        [](const SynthesisResult& r) {
            std::vector<std::string> v;
            if (r.response_text.empty()) v.push_back("empty response");
            return v;
        },
        opts, "reflect synthesis");
    result.response_text = synth.response_text;

    // Validate candidates first; drop malformed ones individually.
    std::vector<OpinionCandidate> valid;
    for (const auto& cand : synth.opinions) {
        if (!reflect_detail::acceptable_opinion_text(cand.text)) {
            result.warnings.push_back("dropped opinion candidate: not first-person: " + cand.text);
            continue;
        }
        if (cand.confidence && (*cand.confidence < 0.0 || *cand.confidence > 1.0)) {
            result.warnings.push_back("dropped opinion candidate: confidence out of range: " +
                                      std::to_string(*cand.confidence));
            continue;
        }
        valid.push_back(cand);
    }

    if (!valid.empty()) {
        bank.mutate([&](BankState& state) {
            for (const auto& cand : valid) {
                MemoryUnit unit;
                unit.id = state.next_unit_id();
                unit.bank_id = state.bank_id;
                unit.text = cand.text;
                unit.network = Network::Opinion;
                unit.confidence = cand.confidence.value_or(kDefaultOpinionConfidence);
                unit.occurred_start = unit.occurred_end = unit.mentioned_at = now;
                unit.metadata["context"] = "reflect";
                unit.metadata["access_count"] = "0";
                if (!cand.reasoning.empty()) unit.metadata["reasoning"] = cand.reasoning;
                unit.embedding = providers.embedder->embed(
                    "[" + format_human_date(now) + "] " + cand.text);

                // Entity extraction reuses the retain resolution path.
                std::set<std::string> names;
                auto mentions = scan_capitalized_mentions(cand.text, {});
                for (const auto& m : mentions) names.insert(to_lower(m.text));
                for (const auto& m : mentions) {
                    MentionContext ctx;
                    ctx.text = m.text;
                    ctx.kind = m.kind;
                    ctx.timestamp = now;
                    for (const auto& n : names)
                        if (n != to_lower(m.text)) ctx.co_mentions.insert(n);
                    unit.entity_ids.push_back(resolve_entity(ctx, state, config));
                }

                state.upsert_units({unit}, config);

                Opinion opinion;
                opinion.id = unit.id;
                opinion.text = unit.text;
                opinion.confidence = *unit.confidence;
                opinion.formed_at = now;
                opinion.bank_id = state.bank_id;
                opinion.entities.insert(unit.entity_ids.begin(), unit.entity_ids.end());
                state.opinions[opinion.id] = opinion;

                build_links(state, {unit.id}, {}, config);
                result.opinions_formed.push_back(opinion);
            }
        });
    }
    return result;
}

}  // namespace hindsight
