#pragma once
// Deterministic provider mocks. Every mock is a pure function of its inputs
// so the full engine test suite runs offline and reproducibly. The schemes
// are documented precisely because tests compute expected values from them.

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hindsight/entity_resolution.hpp"
#include "hindsight/providers.hpp"
#include "hindsight/temporal.hpp"
#include "hindsight/text.hpp"
#include "hindsight/time.hpp"

namespace hindsight {

// ---------------------------------------------------------------------------
// MockEmbedder
//
// Scheme: case-fold the text, take every contiguous character 3-gram (the
// whole text when shorter than 3), bucket each gram into fnv1a64(gram) % dim
// with count +1, then L2-normalize. Identical texts map to identical unit
// vectors; texts sharing grams share buckets.
// ---------------------------------------------------------------------------

class MockEmbedder : public Embedder {
public:
    explicit MockEmbedder(int dim = 64) : dim_(dim) {}

    std::vector<double> embed(const std::string& text) override {
        if (text.empty()) throw ValidationError("mock embedder: empty text");
        std::string folded = to_lower(text);
        std::vector<double> v(dim_, 0.0);
        if (folded.size() < 3) {
            v[fnv1a64(folded) % dim_] += 1.0;
        } else {
            for (size_t i = 0; i + 3 <= folded.size(); ++i) {
                v[fnv1a64(folded.substr(i, 3)) % dim_] += 1.0;
            }
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
        return v;
    }

    int dim() const override { return dim_; }

private:
    int dim_;
};

// ---------------------------------------------------------------------------
// MockFactExtractor
//
// Rule-based narrative extraction: turns are partitioned into
// clamp(n/2, 2, 5) contiguous groups (one group for a single-turn input) and
// each group becomes one fact whose text joins "<speaker> said: <text>".
// Entity mentions are maximal runs of capitalized tokens, stopwords removed,
// deduplicated per fact; speakers are tagged PERSON, everything else OTHER.
// A group containing "because" points a caused_by relation at the previous
// fact. Temporal expressions in the group text override the turn-timestamp
// occurrence interval.
// ---------------------------------------------------------------------------

class MockFactExtractor : public FactExtractor {
public:
    MockFactExtractor() : self_speakers_{"user", "me", "i", "assistant", "agent", "self"} {}

    std::vector<ExtractedFact> extract(const Transcript& transcript) override {
        if (transcript.empty()) throw ValidationError("mock extractor: empty transcript");
        const size_t n = transcript.size();
        const size_t groups = n < 2 ? 1 : std::clamp<size_t>(n / 2, 2, 5);

        std::set<std::string> speaker_set;
        for (const auto& t : transcript) speaker_set.insert(to_lower(t.speaker));

        std::vector<ExtractedFact> facts;
        for (size_t g = 0; g < groups; ++g) {
            size_t lo = g * n / groups;
            size_t hi = (g + 1) * n / groups;
            ExtractedFact f;
            std::vector<std::string> speakers;
            std::string raw_text;
            Timestamp ts_min = transcript[lo].timestamp, ts_max = transcript[lo].timestamp;
            for (size_t i = lo; i < hi; ++i) {
                const auto& turn = transcript[i];
                if (!f.what.empty()) f.what += " ";
                f.what += turn.speaker + " said: " + turn.text;
                if (!raw_text.empty()) raw_text += " ";
                raw_text += turn.text;
                if (std::find(speakers.begin(), speakers.end(), turn.speaker) == speakers.end())
                    speakers.push_back(turn.speaker);
                ts_min = std::min(ts_min, turn.timestamp);
                ts_max = std::max(ts_max, turn.timestamp);
            }
            for (size_t s = 0; s < speakers.size(); ++s)
                f.who += (s ? ", " : "") + speakers[s];
            f.when = format_human_date(ts_min);
            f.why = "Captured from the exchange between " + f.who + ".";
            f.mentioned_at = ts_max;

            // Explicit temporal expressions win over the turn timestamps.
            if (auto range = parse_temporal(f.what, ts_min)) {
                f.occurred_start = range->first;
                f.occurred_end = range->second;
                f.when = format_human_date(range->first);
            } else {
                f.occurred_start = ts_min;
                f.occurred_end = ts_max;
            }

            std::string folded = to_lower(f.what);
            if (folded.find("i think") != std::string::npos ||
                folded.find("i believe") != std::string::npos ||
                folded.find("in my opinion") != std::string::npos) {
                f.fact_type = FactType::Opinion;
                f.what = raw_text;  // opinion statements stay first-person
            } else {
                bool self = false;
                for (const auto& sp : speakers)
                    if (self_speakers_.count(to_lower(sp))) self = true;
                f.fact_type = self ? FactType::Experience : FactType::World;
            }

            f.entities = scan_capitalized_mentions(f.what, speaker_set);

            if (g > 0 && folded.find("because") != std::string::npos) {
                f.causal_relations.push_back(
                    {static_cast<int>(g - 1), CausalSubtype::CausedBy, 0.9});
            }
            facts.push_back(std::move(f));
        }
        return facts;
    }

private:
    std::set<std::string> self_speakers_;
};

// ---------------------------------------------------------------------------
// MockAssessor: keyword rule on configurable markers.
// ---------------------------------------------------------------------------

class MockAssessor : public Assessor {
public:
    MockAssessor(std::string reinforce_marker = "supports:", std::string contradict_marker = "refutes:",
                 std::string weaken_marker = "doubts:")
        : reinforce_(std::move(reinforce_marker)),
          contradict_(std::move(contradict_marker)),
          weaken_(std::move(weaken_marker)) {}

    AssessLabel assess(const std::string& opinion_text, const std::string& fact_text) override {
        if (opinion_text.empty() || fact_text.empty())
            throw ValidationError("mock assessor: empty input");
        std::string folded = to_lower(fact_text);
        if (folded.find(reinforce_) != std::string::npos) return AssessLabel::Reinforce;
        if (folded.find(contradict_) != std::string::npos) return AssessLabel::Contradict;
        if (folded.find(weaken_) != std::string::npos) return AssessLabel::Weaken;
        return AssessLabel::Neutral;
    }

private:
    std::string reinforce_, contradict_, weaken_;
};

// ---------------------------------------------------------------------------
// MockReranker: |query tokens ∩ candidate tokens| / |query tokens| over
// unique case-folded tokens. A candidate containing every query token
// scores 1.0.
// ---------------------------------------------------------------------------

class MockReranker : public Reranker {
public:
    double score(const std::string& query, const std::string& candidate) override {
        auto q = tokenize(query);
        std::set<std::string> qset(q.begin(), q.end());
        if (qset.empty()) return 0.0;
        auto c = tokenize(candidate);
        std::set<std::string> cset(c.begin(), c.end());
        size_t hits = 0;
        for (const auto& t : qset)
            if (cset.count(t)) ++hits;
        return static_cast<double>(hits) / static_cast<double>(qset.size());
    }
};

// ---------------------------------------------------------------------------
// MockSynthesizer
//
// Observations: one third-person line per fact, deduplicated, capped at 7.
// Background merge: sentences conflict when they share a >= 3 word prefix
// and differ afterwards; the new sentence wins, non-conflicting details are
// appended, output truncated to max_len.
// Reflect: scripted response/opinions when configured; otherwise an
// evidence-grounded response plus a cue-word opinion rule.
// ---------------------------------------------------------------------------

class MockSynthesizer : public Synthesizer {
public:
    explicit MockSynthesizer(int background_max_len = 500) : max_len_(background_max_len) {}

    std::vector<std::string> synthesize_observations(
        const std::string& entity_name, const std::vector<std::string>& fact_texts) override {
        std::vector<std::string> out;
        std::set<std::string> seen;
        for (const auto& fact : fact_texts) {
            if (out.size() >= 7) break;
            std::string snippet = fact.substr(0, 120);
            std::string obs = entity_name + " appears in a retained fact: " + snippet;
            if (seen.insert(obs).second) out.push_back(obs);
        }
        return out;
    }

    std::string merge_background(const std::string& current, const std::string& snippet) override {
        auto old_sentences = split_sentences(current);
        auto new_sentences = split_sentences(snippet);
        std::vector<std::string> merged;
        for (const auto& old_s : old_sentences) {
            bool conflicted = false;
            for (const auto& new_s : new_sentences) {
                if (conflicts(old_s, new_s)) {
                    conflicted = true;
                    break;
                }
            }
            if (!conflicted) merged.push_back(old_s);
        }
        for (const auto& new_s : new_sentences) {
            if (std::find(merged.begin(), merged.end(), new_s) == merged.end())
                merged.push_back(new_s);
        }
        std::string out;
        for (const auto& s : merged) {
            if (!out.empty()) out += " ";
            out += s;
        }
        if (static_cast<int>(out.size()) > max_len_) out = out.substr(0, max_len_);
        return out;
    }

    SynthesisResult reflect(const std::string& /*system_message*/,
                            const std::vector<std::string>& context_facts,
                            const std::string& query) override {
        SynthesisResult result;
        if (scripted_response_) {
            result.response_text = *scripted_response_;
        } else if (context_facts.empty()) {
            result.response_text = "I don't have enough information in my memory to answer that.";
        } else {
            result.response_text = "Based on what I remember: " + context_facts.front();
            if (context_facts.size() > 1) {
                result.response_text +=
                    " (drawing on " + std::to_string(context_facts.size()) + " memories)";
            }
        }
        if (!scripted_opinions_.empty()) {
            result.opinions = scripted_opinions_;
        } else if (!context_facts.empty() && wants_opinion(query)) {
            OpinionCandidate cand;
            cand.text = "I think " + opinion_topic(query);
            cand.confidence = 0.7;
            cand.reasoning = "Formed from the retrieved memories.";
            result.opinions.push_back(std::move(cand));
        }
        return result;
    }

    std::string revise_opinion(const std::string& opinion_text,
                               const std::string& contradicting_fact) override {
        std::string fact = contradicting_fact;
        for (const char* marker : {"refutes:", "supports:", "doubts:"}) {
            auto pos = to_lower(fact).find(marker);
            if (pos != std::string::npos) {
                fact = fact.substr(pos + std::string(marker).size());
                break;
            }
        }
        while (!fact.empty() && fact.front() == ' ') fact.erase(fact.begin());
        std::string base = opinion_text;
        while (!base.empty() && (base.back() == '.' || base.back() == ' ')) base.pop_back();
        return base + ", though I must weigh that " + fact;
    }

    // Test hooks: script the next reflect output.
    void script_response(std::string response) { scripted_response_ = std::move(response); }
    void script_opinions(std::vector<OpinionCandidate> opinions) {
        scripted_opinions_ = std::move(opinions);
    }
    void clear_scripts() {
        scripted_response_.reset();
        scripted_opinions_.clear();
    }

private:
    static std::vector<std::string> split_sentences(const std::string& text) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : text) {
            cur.push_back(c);
            if (c == '.' || c == '!' || c == '?') {
                while (!cur.empty() && cur.front() == ' ') cur.erase(cur.begin());
                if (!cur.empty()) out.push_back(cur);
                cur.clear();
            }
        }
        while (!cur.empty() && cur.front() == ' ') cur.erase(cur.begin());
        if (!cur.empty()) out.push_back(cur);
        return out;
    }

    static bool conflicts(const std::string& a, const std::string& b) {
        auto wa = tokenize(a);
        auto wb = tokenize(b);
        if (wa == wb) return false;  // identical sentences merge, not conflict
        size_t common = 0;
        while (common < wa.size() && common < wb.size() && wa[common] == wb[common]) ++common;
        return common >= 3 && (common < wa.size() || common < wb.size());
    }

    static bool wants_opinion(const std::string& query) {
        static const char* cues[] = {"think",  "believe", "opinion", "feel",
                                     "better", "best",    "should",  "reliable"};
        std::string folded = to_lower(query);
        for (const char* cue : cues)
            if (folded.find(cue) != std::string::npos) return true;
        return false;
    }

    static std::string opinion_topic(const std::string& query) {
        static const char* prefixes[] = {
            "what do you think about", "what do you think of", "do you think",
            "what is your opinion on", "what is your opinion of", "how do you feel about"};
        std::string topic = query;
        std::string folded = to_lower(query);
        for (const char* p : prefixes) {
            std::string prefix(p);
            if (folded.rfind(prefix, 0) == 0) {
                topic = query.substr(prefix.size());
                break;
            }
        }
        while (!topic.empty() && (topic.front() == ' ')) topic.erase(topic.begin());
        while (!topic.empty() && (topic.back() == '?' || topic.back() == ' ' || topic.back() == '.'))
            topic.pop_back();
        return topic.empty() ? "this" : topic;
    }

    int max_len_;
    std::optional<std::string> scripted_response_;
    std::vector<OpinionCandidate> scripted_opinions_;
};

inline ProviderSuite make_mock_suite(const EngineConfig& config) {
    ProviderSuite suite;
    suite.fact_extractor = std::make_shared<MockFactExtractor>();
    suite.embedder = std::make_shared<MockEmbedder>(config.embedding_dim);
    suite.reranker = std::make_shared<MockReranker>();
    suite.assessor = std::make_shared<MockAssessor>();
    suite.synthesizer = std::make_shared<MockSynthesizer>(config.background_max_len);
    return suite;
}

}  // namespace hindsight
