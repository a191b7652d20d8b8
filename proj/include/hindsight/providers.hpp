#pragma once
// Narrow interfaces for every model-dependent step. The engine core only
// ever sees schema-validated provider outputs; prompt templates and model
// clients live behind these interfaces (the bundled implementations are the
// deterministic mocks in mock_providers.hpp).

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hindsight/text.hpp"
#include "hindsight/types.hpp"

namespace hindsight {

// One conversational turn of the transcript input format.
struct TranscriptTurn {
    std::string speaker;
    std::string text;
    Timestamp timestamp = 0;
};

using Transcript = std::vector<TranscriptTurn>;

struct EntityMention {
    std::string text;
    EntityKind kind = EntityKind::Other;
};

struct CausalRelation {
    int target_fact_index = 0;  // index into the same extraction batch
    CausalSubtype relation_type = CausalSubtype::Causes;
    double strength = 1.0;  // in [0,1]
};

// Fact types an extractor may emit. Observation units are created only by
// background synthesis, never by extraction.
enum class FactType { World, Experience, Opinion };

inline Network to_network(FactType t) {
    switch (t) {
        case FactType::World: return Network::World;
        case FactType::Experience: return Network::Experience;
        case FactType::Opinion: return Network::Opinion;
    }
    return Network::World;
}

// Structured extraction output: the five narrative dimensions plus
// classification, temporal fields and graph hints.
struct ExtractedFact {
    std::string what;
    std::string when;    // day-of-week phrasing, e.g. "Saturday, June 9, 2024"
    std::string where;   // may be empty
    std::string who;
    std::string why;
    FactType fact_type = FactType::World;
    std::optional<Timestamp> occurred_start;
    std::optional<Timestamp> occurred_end;
    std::optional<Timestamp> mentioned_at;
    std::vector<EntityMention> entities;
    std::vector<CausalRelation> causal_relations;
};

// Schema gate: violations returned here reject the fact before it can enter
// retain, regardless of provider behavior.
inline std::vector<std::string> validate_extracted_fact(const ExtractedFact& f, size_t batch_size) {
    std::vector<std::string> violations;
    if (f.what.empty()) violations.push_back("what is empty");
    if (f.occurred_start && f.occurred_end && *f.occurred_start > *f.occurred_end)
        violations.push_back("occurred_start > occurred_end");
    for (const auto& rel : f.causal_relations) {
        if (rel.target_fact_index < 0 || rel.target_fact_index >= static_cast<int>(batch_size))
            violations.push_back("causal target index out of batch range");
        if (rel.strength < 0.0 || rel.strength > 1.0)
            violations.push_back("causal strength outside [0,1]");
    }
    return violations;
}

// Candidate opinion emitted by the synthesizer during reflect. Confidence is
// optional on the wire; present-but-invalid values drop the candidate,
// absent values get the engine default.
struct OpinionCandidate {
    std::string text;
    std::optional<double> confidence;
    std::string reasoning;
};

struct SynthesisResult {
    std::string response_text;
    std::vector<OpinionCandidate> opinions;
};

// ---------------------------------------------------------------------------
// Provider interfaces. Implementations must be safe for concurrent
// invocation or declare single-flight, which the engine serializes.
// ---------------------------------------------------------------------------

class FactExtractor {
public:
    virtual ~FactExtractor() = default;
    virtual std::vector<ExtractedFact> extract(const Transcript& transcript) = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(const std::string& text) = 0;
    virtual int dim() const = 0;
};

class Reranker {
public:
    virtual ~Reranker() = default;
    // Relevance of one candidate text (already time-prefixed) to the query.
    virtual double score(const std::string& query, const std::string& candidate) = 0;
};

class Assessor {
public:
    virtual ~Assessor() = default;
    virtual AssessLabel assess(const std::string& opinion_text, const std::string& fact_text) = 0;
};

// Covers the generation roles: observation synthesis, background merging,
// reflect responses with candidate opinions, and opinion text revision.
class Synthesizer {
public:
    virtual ~Synthesizer() = default;
    virtual std::vector<std::string> synthesize_observations(
        const std::string& entity_name, const std::vector<std::string>& fact_texts) = 0;
    virtual std::string merge_background(const std::string& current,
                                         const std::string& snippet) = 0;
    virtual SynthesisResult reflect(const std::string& system_message,
                                    const std::vector<std::string>& context_facts,
                                    const std::string& query) = 0;
    virtual std::string revise_opinion(const std::string& opinion_text,
                                       const std::string& contradicting_fact) = 0;
};

// Per-call contract for provider invocations. The retry count applies with
// schema revalidation between attempts; the timeout is honored by external
// adapters (in-process mocks complete synchronously).
struct ProviderCallOptions {
    int retries = 2;
    int timeout_ms = 10000;
};

struct ProviderSuite {
    std::shared_ptr<FactExtractor> fact_extractor;
    std::shared_ptr<Embedder> embedder;
    std::shared_ptr<Reranker> reranker;
    std::shared_ptr<Assessor> assessor;
    std::shared_ptr<Synthesizer> synthesizer;
    // Optional fallback for temporal expressions the rule-based parser cannot
    // resolve; absent by default.
    std::function<std::optional<std::pair<Timestamp, Timestamp>>(const std::string&, Timestamp)>
        temporal_fallback;
    // Pluggable token counter; budgets use ceil(chars/4) unless replaced.
    std::function<int(const std::string&)> token_counter = default_token_count;
};

// Runs fn up to 1 + opts.retries times, revalidating via `valid` after each
// attempt. Exhausted attempts surface as ProviderError.
template <typename Fn, typename Validator>
auto call_with_retries(Fn&& fn, Validator&& valid, const ProviderCallOptions& opts,
                       const char* op_name) {
    std::string last_error = "no attempts made";
    for (int attempt = 0; attempt <= opts.retries; ++attempt) {
        try {
            auto result = fn();
            auto violations = valid(result);
            if (violations.empty()) return result;
            last_error = "schema violations:";
            for (const auto& v : violations) last_error += " " + v + ";";
        } catch (const std::exception& e) {
            last_error = e.what();
        }
    }
    throw ProviderError(std::string(op_name) + " failed after retries: " + last_error);
}

}  // namespace hindsight
