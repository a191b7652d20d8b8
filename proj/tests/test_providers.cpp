#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hindsight/mock_providers.hpp"
#include "hindsight/serialization.hpp"
#include "oracles.hpp"

using namespace hindsight;

TEST_CASE("mock embedder determinism and normalization") {
    MockEmbedder embedder(64);
    auto v1 = embedder.embed("the quick brown fox");
    auto v2 = embedder.embed("the quick brown fox");
    CHECK(v1 == v2);

    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        auto v = embedder.embed(oracle::random_text(rng));
        double norm = 0.0;
        for (double x : v) norm += x * x;
        CHECK_THAT(std::sqrt(norm), Catch::Matchers::WithinAbs(1.0, 1e-9));
    }
    CHECK(cosine_similarity(v1, v1) == Catch::Approx(1.0));
    CHECK_THROWS_AS(embedder.embed(""), ValidationError);
}

TEST_CASE("mock embedder matches the documented n-gram scheme") {
    MockEmbedder embedder(64);
    for (const char* text : {"alpha beta", "alpha beta gamma", "unrelated zzz", "ab"}) {
        CHECK(embedder.embed(text) == oracle::ngram_embed(text, 64));
    }
    // shared-gram texts are closer than disjoint ones
    double close = oracle::cosine(oracle::ngram_embed("alpha beta", 64),
                                  oracle::ngram_embed("alpha beta gamma", 64));
    double far = oracle::cosine(oracle::ngram_embed("alpha beta", 64),
                                oracle::ngram_embed("unrelated zzz", 64));
    CHECK(close > far);
    CHECK(embedder.embed("alpha beta") == embedder.embed("ALPHA Beta"));  // case-folded
}

static Transcript make_transcript(int turns, Timestamp start = 1717934400 /*2024-06-09 12:00*/) {
    Transcript t;
    const char* speakers[] = {"Alice", "Bob"};
    for (int i = 0; i < turns; ++i) {
        TranscriptTurn turn;
        turn.speaker = speakers[i % 2];
        turn.text = "turn number " + std::to_string(i) + " about the garden project";
        turn.timestamp = start + i * 60;
        t.push_back(turn);
    }
    return t;
}

TEST_CASE("mock extractor fact counts") {
    MockFactExtractor extractor;
    CHECK_THROWS_AS(extractor.extract({}), ValidationError);
    CHECK(extractor.extract(make_transcript(1)).size() == 1);
    for (int turns : {2, 3, 4, 6, 10, 24}) {
        auto facts = extractor.extract(make_transcript(turns));
        CHECK(facts.size() >= 2);
        CHECK(facts.size() <= 5);
    }
    CHECK(extractor.extract(make_transcript(10)).size() == 5);
}

TEST_CASE("mock extractor fields") {
    MockFactExtractor extractor;
    Transcript t = make_transcript(4);
    auto facts = extractor.extract(t);
    REQUIRE(facts.size() == 2);

    SECTION("temporal fields come from the turn timestamps") {
        CHECK(facts[0].occurred_start.value() == t[0].timestamp);
        CHECK(facts[0].occurred_end.value() == t[1].timestamp);
        CHECK(facts[0].mentioned_at.value() == t[1].timestamp);
        CHECK(facts[0].when == format_human_date(t[0].timestamp));
    }
    SECTION("speakers become PERSON mentions, deduplicated") {
        bool found_alice = false;
        for (const auto& m : facts[0].entities) {
            if (m.text == "Alice") {
                found_alice = true;
                CHECK(m.kind == EntityKind::Person);
            }
        }
        CHECK(found_alice);
        // "Alice" appears once per fact even though she is named repeatedly
        int alice_count = 0;
        for (const auto& m : facts[0].entities)
            if (to_lower(m.text) == "alice") ++alice_count;
        CHECK(alice_count == 1);
    }
    SECTION("no capitalized tokens means no entities") {
        Transcript plain;
        plain.push_back({"a", "just lowercase words here", 1700000000});
        plain.push_back({"b", "more plain words without names", 1700000060});
        auto plain_facts = extractor.extract(plain);
        for (const auto& f : plain_facts) CHECK(f.entities.empty());
    }
}

TEST_CASE("mock extractor classification and causality") {
    MockFactExtractor extractor;
    SECTION("self speakers yield experience facts") {
        Transcript t;
        t.push_back({"user", "going hiking at the lake", 1700000000});
        t.push_back({"assistant", "sounds like a plan", 1700000060});
        auto facts = extractor.extract(t);
        for (const auto& f : facts) CHECK(f.fact_type == FactType::Experience);
    }
    SECTION("third-party speakers yield world facts") {
        auto facts = extractor.extract(make_transcript(4));
        for (const auto& f : facts) CHECK(f.fact_type == FactType::World);
    }
    SECTION("opinion cue yields opinion facts") {
        Transcript t;
        t.push_back({"alice", "I think the harbor design is sound", 1700000000});
        t.push_back({"bob", "noted", 1700000060});
        auto facts = extractor.extract(t);
        CHECK(facts[0].fact_type == FactType::Opinion);
    }
    SECTION("because links back to the previous fact") {
        Transcript t;
        t.push_back({"alice", "the launch slipped a week", 1700000000});
        t.push_back({"bob", "that is unfortunate", 1700000060});
        t.push_back({"alice", "we missed reviews because the team was out", 1700000120});
        t.push_back({"bob", "we will recover", 1700000180});
        auto facts = extractor.extract(t);
        REQUIRE(facts.size() == 2);
        REQUIRE(facts[1].causal_relations.size() == 1);
        CHECK(facts[1].causal_relations[0].target_fact_index == 0);
        CHECK(facts[1].causal_relations[0].relation_type == CausalSubtype::CausedBy);
    }
    SECTION("temporal expression in text overrides turn timestamps") {
        Timestamp monday_noon = *parse_iso("2024-06-10T12:00:00Z");
        Transcript t;
        t.push_back({"alice", "we toured the museum yesterday", monday_noon});
        t.push_back({"bob", "lovely", monday_noon + 60});
        auto facts = extractor.extract(t);
        CHECK(facts[0].occurred_start.value() == *parse_iso("2024-06-09T00:00:00Z"));
        CHECK(facts[0].occurred_end.value() == *parse_iso("2024-06-09T23:59:59Z"));
    }
}

TEST_CASE("extracted fact wire schema") {
    ExtractedFact f;
    f.what = "Alice planted roses in the east bed";
    f.when = "Sunday, June 9, 2024";
    f.who = "Alice";
    f.why = "she wanted color near the gate";
    f.fact_type = FactType::World;
    f.occurred_start = 1717891200;
    f.occurred_end = 1717934400;
    f.entities.push_back({"Alice", EntityKind::Person});
    f.causal_relations.push_back({1, CausalSubtype::Enables, 0.8});

    json j = to_json(f);
    ExtractedFact back = extracted_fact_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.fact_type == FactType::World);
    CHECK(back.entities.size() == 1);
    CHECK(back.causal_relations[0].relation_type == CausalSubtype::Enables);

    SECTION("extractors may not emit observation facts") {
        j["fact_type"] = "observation";
        CHECK_THROWS_AS(extracted_fact_from_json(j), ValidationError);
    }
    SECTION("opinion candidate schema") {
        OpinionCandidate c{"I think roses beat tulips", 0.8, "the east bed thrived"};
        OpinionCandidate back_c = opinion_candidate_from_json(to_json(c));
        CHECK(back_c.text == c.text);
        CHECK(back_c.confidence.value() == 0.8);
        CHECK(back_c.reasoning == c.reasoning);
    }
}

TEST_CASE("extracted fact schema gate") {
    ExtractedFact f;
    f.what = "something happened";
    CHECK(validate_extracted_fact(f, 3).empty());
    SECTION("empty what") {
        f.what.clear();
        CHECK_FALSE(validate_extracted_fact(f, 3).empty());
    }
    SECTION("causal index out of range") {
        f.causal_relations.push_back({5, CausalSubtype::Causes, 0.5});
        CHECK_FALSE(validate_extracted_fact(f, 3).empty());
    }
    SECTION("causal strength out of range") {
        f.causal_relations.push_back({0, CausalSubtype::Causes, 1.5});
        CHECK_FALSE(validate_extracted_fact(f, 3).empty());
    }
}

TEST_CASE("mock assessor keyword rules") {
    MockAssessor assessor;
    CHECK(assessor.assess("X is good", "supports: X shipped on time") == AssessLabel::Reinforce);
    CHECK(assessor.assess("X is good", "refutes: X failed audit") == AssessLabel::Contradict);
    CHECK(assessor.assess("X is good", "doubts: X may be late") == AssessLabel::Weaken);
    CHECK(assessor.assess("X is good", "weather is mild") == AssessLabel::Neutral);
    CHECK_THROWS_AS(assessor.assess("", "fact"), ValidationError);
}

TEST_CASE("mock reranker token overlap") {
    MockReranker reranker;
    CHECK(reranker.score("garden project", "the garden project meeting") == 1.0);
    CHECK(reranker.score("garden project", "the garden only") == 0.5);
    CHECK(reranker.score("garden", "nothing relevant") == 0.0);
    CHECK(reranker.score("", "anything") == 0.0);
}

TEST_CASE("mock synthesizer background merge") {
    MockSynthesizer synth(500);
    SECTION("conflicting sentence resolved toward the new information") {
        std::string merged = synth.merge_background(
            "I was born in Colorado.",
            "I was born in Texas and have 10 years of startup experience.");
        CHECK(merged == "I was born in Texas and have 10 years of startup experience.");
    }
    SECTION("empty base adopts the snippet") {
        CHECK(synth.merge_background("", "I am a pianist.") == "I am a pianist.");
    }
    SECTION("disjoint sentences concatenate") {
        CHECK(synth.merge_background("I am a pianist.", "I grew up near the ocean.") ==
              "I am a pianist. I grew up near the ocean.");
    }
    SECTION("long output truncates to the limit") {
        MockSynthesizer tight(24);
        std::string merged = tight.merge_background("I am a pianist.", "I grew up near the ocean.");
        CHECK(merged.size() <= 24);
    }
}

TEST_CASE("mock synthesizer observations") {
    MockSynthesizer synth(500);
    SECTION("one observation per fact, third person") {
        auto obs = synth.synthesize_observations("Alice", {"Alice planted roses", "Alice fixed the gate"});
        REQUIRE(obs.size() == 2);
        for (const auto& o : obs) CHECK(o.rfind("Alice", 0) == 0);
    }
    SECTION("duplicates collapse") {
        auto obs = synth.synthesize_observations("Alice", {"same fact", "same fact"});
        CHECK(obs.size() == 1);
    }
    SECTION("capped at seven") {
        std::vector<std::string> facts;
        for (int i = 0; i < 12; ++i) facts.push_back("fact number " + std::to_string(i));
        CHECK(synth.synthesize_observations("Alice", facts).size() == 7);
    }
    SECTION("no facts, no observations") {
        CHECK(synth.synthesize_observations("Alice", {}).empty());
    }
}

TEST_CASE("mock synthesizer reflect and revision") {
    MockSynthesizer synth(500);
    SECTION("abstains without context") {
        auto r = synth.reflect("system", {}, "what is the plan?");
        CHECK(r.response_text.find("don't have enough information") != std::string::npos);
        CHECK(r.opinions.empty());
    }
    SECTION("grounds the response in the top memory") {
        auto r = synth.reflect("system", {"Alice planted roses"}, "what about the garden?");
        CHECK(r.response_text.find("Alice planted roses") != std::string::npos);
    }
    SECTION("cue words trigger one first-person opinion") {
        auto r = synth.reflect("system", {"fact"}, "Do you think Rust is better for the kernel?");
        REQUIRE(r.opinions.size() == 1);
        CHECK(r.opinions[0].text.rfind("I think ", 0) == 0);
        CHECK(r.opinions[0].text.find("Rust is better for the kernel") != std::string::npos);
    }
    SECTION("scripted opinions pass through") {
        synth.script_opinions({{"I think X is reliable", 0.8, "track record"}});
        auto r = synth.reflect("system", {"fact"}, "anything");
        REQUIRE(r.opinions.size() == 1);
        CHECK(r.opinions[0].confidence.value() == 0.8);
    }
    SECTION("revision stays first person and cites the fact") {
        std::string revised =
            synth.revise_opinion("I think X is reliable", "refutes: X failed the audit");
        CHECK(revised.rfind("I think X is reliable", 0) == 0);
        CHECK(revised.find("X failed the audit") != std::string::npos);
    }
}
