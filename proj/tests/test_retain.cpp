#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hindsight/engine.hpp"
#include "hindsight/mock_providers.hpp"
#include "hindsight/retain.hpp"
#include "hindsight/store.hpp"
#include "oracles.hpp"

using namespace hindsight;

namespace {

Timestamp base_now() { return *parse_iso("2024-06-10T12:00:00Z"); }

Transcript alice_two_sessions() {
    Timestamp s1 = *parse_iso("2024-06-01T09:00:00Z");
    Timestamp s2 = *parse_iso("2024-06-08T09:00:00Z");
    return {
        {"Alice", "the observatory dome opened for the season", s1},
        {"Bob", "Alice scheduled the telescope run", s1 + 60},
        {"Alice", "the comet survey starts next run", s2},
        {"Bob", "Alice booked the comet survey slot", s2 + 60},
    };
}

// Embedder that fails after a fixed number of calls; used for atomicity checks.
class FlakyEmbedder : public Embedder {
public:
    FlakyEmbedder(int dim, int fail_after) : inner_(dim), fail_after_(fail_after) {}
    std::vector<double> embed(const std::string& text) override {
        if (calls_++ >= fail_after_) throw ProviderError("embedder offline");
        return inner_.embed(text);
    }
    int dim() const override { return inner_.dim(); }

private:
    MockEmbedder inner_;
    int fail_after_;
    int calls_ = 0;
};

class ScriptedMerger : public MockSynthesizer {
public:
    using MockSynthesizer::MockSynthesizer;
    std::string merge_background(const std::string& current, const std::string& snippet) override {
        if (!scripted_merge_.empty()) return scripted_merge_;
        return MockSynthesizer::merge_background(current, snippet);
    }
    std::string scripted_merge_;
};

}  // namespace

TEST_CASE("resolve_entity weighted scoring") {
    EngineConfig config;
    BankState state;
    state.bank_id = "b1";

    SECTION("zero candidates creates a new entity") {
        MentionContext m{"Alice", EntityKind::Person, {}, 1700000000};
        std::string id = resolve_entity(m, state, config);
        REQUIRE(state.entities.count(id) == 1);
        CHECK(state.entities.at(id).canonical_name == "Alice");
        CHECK(state.entities.at(id).mention_count == 1);
    }
    SECTION("identical repeated mention resolves to the same id") {
        MentionContext m{"Alice", EntityKind::Person, {}, 1700000000};
        std::string first = resolve_entity(m, state, config);
        std::string second = resolve_entity(m, state, config);
        CHECK(first == second);
        CHECK(state.entities.at(first).mention_count == 2);
    }
    SECTION("hand-computed merge: Alice Chen onto Alice") {
        Entity alice;
        alice.id = state.next_entity_id();
        alice.canonical_name = "Alice";
        alice.kind = EntityKind::Person;
        alice.mention_count = 3;
        alice.last_mentioned = 1700000000;
        alice.co_mentions = {"bob", "carol", "observatory"};
        state.entities[alice.id] = alice;

        // sim_str("alice chen","alice") = 0.5; co overlap 2 shared / 4 union = 0.5;
        // same-day mention -> sim_temp = 1. score = 0.6*0.5 + 0.25*0.5 + 0.15*1 = 0.575
        MentionContext m{"Alice Chen", EntityKind::Person, {"bob", "carol", "dave"}, 1700000000};
        std::string id = resolve_entity(m, state, config);
        CHECK(id == alice.id);
        CHECK(state.entities.at(alice.id).mention_count == 4);
        CHECK(state.entities.at(alice.id).co_mentions.count("dave") == 1);
    }
    SECTION("below threshold creates a distinct entity") {
        Entity alice;
        alice.id = state.next_entity_id();
        alice.canonical_name = "Alice";
        alice.kind = EntityKind::Person;
        alice.mention_count = 1;
        alice.last_mentioned = 0;  // far in the past
        state.entities[alice.id] = alice;

        // sim_str("albertina","alice") = 1 - 6/9 = 0.333; no co overlap; sim_temp ~ 0
        MentionContext m{"Albertina", EntityKind::Person, {}, 1700000000};
        std::string id = resolve_entity(m, state, config);
        CHECK(id != alice.id);
        CHECK(state.entities.size() == 2);
    }
    SECTION("name match adopts the existing entity kind") {
        Entity python;
        python.id = state.next_entity_id();
        python.canonical_name = "Python";
        python.kind = EntityKind::Other;
        python.mention_count = 1;
        python.last_mentioned = 1700000000;
        state.entities[python.id] = python;

        MentionContext m{"Python", EntityKind::Person, {}, 1700000000};
        std::string id = resolve_entity(m, state, config);
        CHECK(id == python.id);  // kind hint overridden by the registry name match
    }
}

TEST_CASE("temporal link weight") {
    CHECK(temporal_link_weight(1000, 1000, 604800.0) == 1.0);
    CHECK_THAT(temporal_link_weight(0, 604800, 604800.0),
               Catch::Matchers::WithinAbs(std::exp(-1.0), 1e-12));
    CHECK_THROWS_AS(temporal_link_weight(0, 1, 0.0), ConfigError);
    CHECK_THROWS_AS(temporal_link_weight(0, 1, -5.0), ConfigError);

    std::mt19937_64 rng(53);
    std::uniform_int_distribution<Timestamp> dt(0, 30 * 86400);
    for (int i = 0; i < 200; ++i) {
        Timestamp d1 = dt(rng), d2 = dt(rng);
        if (d1 > d2) std::swap(d1, d2);
        if (d1 == d2) continue;
        CHECK(temporal_link_weight(0, d1, 604800.0) > temporal_link_weight(0, d2, 604800.0));
        CHECK(temporal_link_weight(0, d1, 604800.0) <= 1.0);
        CHECK(temporal_link_weight(0, d1, 604800.0) > 0.0);
    }
}

TEST_CASE("build_links constructs the four edge kinds") {
    EngineConfig config;
    config.embedding_dim = 2;
    BankState state;
    state.bank_id = "b1";

    auto add_unit = [&](std::vector<double> v, std::vector<std::string> entities,
                        Timestamp mid = 1700000000) {
        MemoryUnit u;
        u.id = state.next_unit_id();
        u.bank_id = "b1";
        u.text = "unit " + u.id;
        u.embedding = std::move(v);
        u.occurred_start = u.occurred_end = u.mentioned_at = mid;
        u.network = Network::World;
        u.entity_ids = std::move(entities);
        state.upsert_units({u}, config);
        return u.id;
    };

    SECTION("shared entity yields one edge plus its reverse orientation, weight 1") {
        state.entities["e1"] = {"e1", "Alice", EntityKind::Person, 2, 1700000000, {}};
        auto a = add_unit({1, 0}, {"e1"});
        auto b = add_unit({0, 1}, {"e1"});
        auto counts = build_links(state, {a, b}, {}, config);
        CHECK(counts.entity == 2);
        REQUIRE(state.edges.count({a, b, EdgeKind::Entity}) == 1);
        REQUIRE(state.edges.count({b, a, EdgeKind::Entity}) == 1);
        CHECK(state.edges.at({a, b, EdgeKind::Entity}).weight == 1.0);
        CHECK(state.edges.at({a, b, EdgeKind::Entity}).entity_id.value() == "e1");
    }
    SECTION("semantic threshold is inclusive at theta_s") {
        // cos((1,0),(4,3)) = 4/5 = 0.8 exactly; cos((1,0),(3,4)) = 0.6
        auto a = add_unit({1, 0}, {});
        auto b = add_unit({4, 3}, {});
        auto c = add_unit({3, 4}, {});
        auto counts = build_links(state, {a, b, c}, {}, config);
        CHECK(state.edges.count({a, b, EdgeKind::Semantic}) == 1);
        CHECK(state.edges.at({a, b, EdgeKind::Semantic}).weight == 0.8);
        CHECK(state.edges.count({a, c, EdgeKind::Semantic}) == 0);
        // b-c: cos((4,3),(3,4)) = 24/25 = 0.96 >= 0.8
        CHECK(state.edges.count({b, c, EdgeKind::Semantic}) == 1);
        CHECK(counts.semantic == 4);
    }
    SECTION("temporal edges stay within the 3 sigma window") {
        Timestamp t0 = 1700000000;
        auto a = add_unit({1, 0}, {}, t0);
        auto near = add_unit({0, 1}, {}, t0 + static_cast<Timestamp>(config.sigma_t));
        auto far = add_unit({0.5, 0.5}, {}, t0 + static_cast<Timestamp>(4 * config.sigma_t));
        build_links(state, {a, near, far}, {}, config);
        REQUIRE(state.edges.count({a, near, EdgeKind::Temporal}) == 1);
        CHECK_THAT(state.edges.at({a, near, EdgeKind::Temporal}).weight,
                   Catch::Matchers::WithinAbs(std::exp(-1.0), 1e-9));
        CHECK(state.edges.count({a, far, EdgeKind::Temporal}) == 0);
        // all temporal weights in (0,1]
        for (const auto& [k, e] : state.edges) {
            if (e.kind == EdgeKind::Temporal) {
                CHECK(e.weight > 0.0);
                CHECK(e.weight <= 1.0);
            }
        }
    }
    SECTION("temporal edges skip the opinion network by default") {
        Timestamp t0 = 1700000000;
        auto a = add_unit({1, 0}, {}, t0);
        MemoryUnit op;
        op.id = state.next_unit_id();
        op.bank_id = "b1";
        op.text = "I think the dome is sound";
        op.embedding = {0, 1};
        op.occurred_start = op.occurred_end = op.mentioned_at = t0 + 60;
        op.network = Network::Opinion;
        op.confidence = 0.6;
        state.upsert_units({op}, config);
        build_links(state, {a, op.id}, {}, config);
        CHECK(state.edges.count({a, op.id, EdgeKind::Temporal}) == 0);
        CHECK(state.edges.count({op.id, a, EdgeKind::Temporal}) == 0);
    }
    SECTION("causal specs become directed unit-weight edges") {
        auto a = add_unit({1, 0}, {});
        auto b = add_unit({0, 1}, {});
        auto c = add_unit({0.7, 0.1}, {});
        auto counts =
            build_links(state, {a, b, c}, {{0, {2, CausalSubtype::Causes, 0.9}}}, config);
        CHECK(counts.causal == 1);
        REQUIRE(state.edges.count({a, c, EdgeKind::Causal}) == 1);
        const Edge& e = state.edges.at({a, c, EdgeKind::Causal});
        CHECK(e.weight == 1.0);
        CHECK(e.causal_subtype.value() == CausalSubtype::Causes);
        CHECK(state.edges.count({c, a, EdgeKind::Causal}) == 0);  // directed
    }
    SECTION("causal index out of range is a rejected-fact error") {
        auto a = add_unit({1, 0}, {});
        CHECK_THROWS_AS(build_links(state, {a}, {{0, {3, CausalSubtype::Causes, 0.9}}}, config),
                        ValidationError);
    }
    SECTION("pairs sharing two entities still get one entity edge per orientation") {
        state.entities["e1"] = {"e1", "Alice", EntityKind::Person, 2, 1700000000, {}};
        state.entities["e2"] = {"e2", "Dome", EntityKind::Other, 2, 1700000000, {}};
        auto a = add_unit({1, 0}, {"e1", "e2"});
        auto b = add_unit({0, 1}, {"e1", "e2"});
        auto counts = build_links(state, {a, b}, {}, config);
        CHECK(counts.entity == 2);
        CHECK(state.edges.at({a, b, EdgeKind::Entity}).entity_id.value() == "e1");  // smallest id
    }
}

TEST_CASE("retain pipeline end to end with mocks") {
    EngineConfig config;
    ProviderSuite providers = make_mock_suite(config);
    MemoryBank bank("b1");

    SECTION("empty input is rejected and the bank unchanged") {
        std::string before = to_snapshot_text(*bank.snapshot());
        CHECK_THROWS_AS(retain(bank, {}, providers, config, base_now()), ValidationError);
        CHECK(to_snapshot_text(*bank.snapshot()) == before);
    }

    SECTION("two-session transcript links cross-session facts through Alice") {
        size_t units_before = bank.snapshot()->units.size();
        size_t edges_before = bank.snapshot()->edges.size();
        auto receipt = retain(bank, alice_two_sessions(), providers, config, base_now());
        REQUIRE(receipt.fact_ids.size() >= 2);
        CHECK(receipt.edges_created.entity >= 2);
        // receipt counts match the store deltas exactly
        CHECK(bank.snapshot()->units.size() - units_before == receipt.fact_ids.size());
        CHECK(bank.snapshot()->edges.size() - edges_before ==
              static_cast<size_t>(receipt.edges_created.total()));

        auto snap = bank.snapshot();
        // find the Alice entity
        std::string alice_id;
        for (const auto& [id, e] : snap->entities)
            if (e.canonical_name == "Alice") alice_id = id;
        REQUIRE(!alice_id.empty());

        bool cross_edge = false;
        for (const auto& [key, e] : snap->edges) {
            if (e.kind == EdgeKind::Entity && e.entity_id.value() == alice_id) cross_edge = true;
        }
        CHECK(cross_edge);
        CHECK(std::find(receipt.observation_entities.begin(), receipt.observation_entities.end(),
                        alice_id) != receipt.observation_entities.end());
    }

    SECTION("entity edge completeness holds after consecutive retains") {
        retain(bank, alice_two_sessions(), providers, config, base_now());
        Transcript more = {
            {"Carol", "Alice presented the comet data at the museum", base_now()},
            {"Dave", "the museum talk drew a crowd", base_now() + 60},
        };
        retain(bank, more, providers, config, base_now() + 3600);
        auto snap = bank.snapshot();
        for (const auto& [id_a, a] : snap->units) {
            for (const auto& [id_b, b] : snap->units) {
                if (id_a >= id_b) continue;
                bool shared = false;
                for (const auto& ea : a.entity_ids)
                    for (const auto& eb : b.entity_ids)
                        if (ea == eb) shared = true;
                if (shared) {
                    CHECK(snap->edges.count({id_a, id_b, EdgeKind::Entity}) == 1);
                    CHECK(snap->edges.count({id_b, id_a, EdgeKind::Entity}) == 1);
                }
            }
        }
    }

    SECTION("semantic edges equal the cosine of their endpoints") {
        retain(bank, alice_two_sessions(), providers, config, base_now());
        auto snap = bank.snapshot();
        for (const auto& [key, e] : snap->edges) {
            if (e.kind != EdgeKind::Semantic) continue;
            double cos = oracle::cosine(snap->units.at(e.source).embedding,
                                        snap->units.at(e.target).embedding);
            CHECK_THAT(e.weight, Catch::Matchers::WithinAbs(cos, 1e-9));
            CHECK(e.weight >= config.theta_s);
        }
    }

    SECTION("provider failure mid-pipeline leaves the bank byte-identical") {
        retain(bank, alice_two_sessions(), providers, config, base_now());
        std::string before = to_snapshot_text(*bank.snapshot());

        ProviderSuite flaky = providers;
        flaky.embedder = std::make_shared<FlakyEmbedder>(config.embedding_dim, 1);
        EngineConfig no_retry = config;
        no_retry.provider_retries = 0;
        CHECK_THROWS_AS(
            retain(bank, alice_two_sessions(), flaky, no_retry, base_now() + 7200),
            ProviderError);
        CHECK(to_snapshot_text(*bank.snapshot()) == before);
    }

    SECTION("schema-gate failure surfaces violations and changes nothing") {
        struct BadExtractor : FactExtractor {
            std::vector<ExtractedFact> extract(const Transcript&) override {
                ExtractedFact f;
                f.what = "";  // violates the schema
                return {f};
            }
        };
        std::string before = to_snapshot_text(*bank.snapshot());
        ProviderSuite bad = providers;
        bad.fact_extractor = std::make_shared<BadExtractor>();
        try {
            retain(bank, alice_two_sessions(), bad, config, base_now());
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK_FALSE(e.violations.empty());
        }
        CHECK(to_snapshot_text(*bank.snapshot()) == before);
    }
}

TEST_CASE("retain reinforces existing opinions from supporting facts") {
    EngineConfig config;
    ProviderSuite providers = make_mock_suite(config);
    MemoryBank bank("b1");
    Timestamp now = base_now();

    // Seed an opinion about Python through extraction ("I think ...").
    Transcript seed = {
        {"user", "I think Python is the best language for data science", now},
        {"assistant", "noted", now + 60},
    };
    auto seed_receipt = retain(bank, seed, providers, config, now);
    std::string opinion_id;
    for (const auto& [id, o] : bank.snapshot()->opinions) opinion_id = id;
    REQUIRE(!opinion_id.empty());
    double c0 = bank.snapshot()->opinions.at(opinion_id).confidence;
    CHECK(c0 == 0.6);  // default confidence for extracted opinions

    // A supporting fact sharing the Python entity reinforces it.
    Transcript support = {
        {"carol", "supports: Python has the dominant data ecosystem", now + 3600},
        {"dave", "the Python libraries keep growing", now + 3660},
    };
    auto receipt = retain(bank, support, providers, config, now + 3600);
    REQUIRE(!receipt.opinions_updated.empty());
    const auto& update = receipt.opinions_updated.front();
    CHECK(update.opinion_id == opinion_id);
    CHECK(update.label == AssessLabel::Reinforce);
    CHECK(update.old_confidence == 0.6);
    CHECK(update.new_confidence == 0.7);  // min(0.6 + 0.1, 1.0)
    CHECK(bank.snapshot()->opinions.at(opinion_id).confidence == 0.7);
    CHECK(*bank.snapshot()->units.at(opinion_id).confidence == 0.7);
}

TEST_CASE("background merge during biographical retain") {
    EngineConfig config;
    auto merger = std::make_shared<ScriptedMerger>(config.background_max_len);
    ProviderSuite providers = make_mock_suite(config);
    providers.synthesizer = merger;

    MemoryBank bank("b1", BankProfile{"aria", {}, "I was born in Colorado."});
    Timestamp now = base_now();
    Transcript bio = {
        {"user", "You were born in Texas and have 10 years of startup experience.", now},
    };

    SECTION("conflicts resolve toward the new snippet") {
        auto receipt = retain(bank, bio, providers, config, now, /*biographical=*/true);
        CHECK(receipt.background_changed);
        CHECK(bank.snapshot()->profile.background ==
              "I was born in Texas and have 10 years of startup experience.");
    }
    SECTION("non-biographical input never touches the background") {
        auto receipt = retain(bank, bio, providers, config, now, /*biographical=*/false);
        CHECK_FALSE(receipt.background_changed);
        CHECK(bank.snapshot()->profile.background == "I was born in Colorado.");
    }
    SECTION("second-person merger output is rejected and rolls back the retain") {
        merger->scripted_merge_ = "You are a Texan engineer.";
        std::string before = to_snapshot_text(*bank.snapshot());
        CHECK_THROWS_AS(retain(bank, bio, providers, config, now, true), ProviderError);
        CHECK(to_snapshot_text(*bank.snapshot()) == before);
    }
    SECTION("overlong merger output is rejected") {
        merger->scripted_merge_ = "I " + std::string(config.background_max_len, 'x');
        CHECK_THROWS_AS(retain(bank, bio, providers, config, now, true), ProviderError);
    }
}

TEST_CASE("observation refresh") {
    EngineConfig config;
    ProviderSuite providers = make_mock_suite(config);
    MemoryBank bank("b1");
    Timestamp now = base_now();
    retain(bank, alice_two_sessions(), providers, config, now);

    std::string alice_id;
    for (const auto& [id, e] : bank.snapshot()->entities)
        if (e.canonical_name == "Alice") alice_id = id;
    REQUIRE(!alice_id.empty());

    SECTION("synthesizes capped, confidence-free, entity-linked observations") {
        bank.mutate([&](BankState& state) {
            auto created = refresh_observations(state, alice_id, providers, config, now);
            REQUIRE(!created.empty());
            CHECK(created.size() <= 7);
        });
        auto snap = bank.snapshot();
        int observations = 0;
        for (const auto& [id, u] : snap->units) {
            if (u.network != Network::Observation) continue;
            ++observations;
            CHECK_FALSE(u.confidence.has_value());
            REQUIRE(u.entity_ids.size() == 1);
            CHECK(u.entity_ids[0] == alice_id);
            CHECK(snap->edges.count({id, *snap->units_mentioning(alice_id,
                                                                 {Network::World,
                                                                  Network::Experience})
                                              .begin(),
                                     EdgeKind::Entity}) == 1);
        }
        CHECK(observations > 0);
        CHECK(observations <= 7);
    }

    SECTION("an entity with two facts yields one to two observations") {
        MemoryBank small("b2");
        retain(small,
               {{"carol", "Juniper catalogued the west shelf", now},
                {"dave", "Juniper repaired the ladder", now + 60}},
               providers, config, now);
        std::string juniper;
        for (const auto& [id, e] : small.snapshot()->entities)
            if (e.canonical_name == "Juniper") juniper = id;
        REQUIRE(!juniper.empty());
        REQUIRE(small.snapshot()
                    ->units_mentioning(juniper, {Network::World, Network::Experience})
                    .size() == 2);
        small.mutate([&](BankState& state) {
            auto created = refresh_observations(state, juniper, providers, config, now + 120);
            CHECK(created.size() >= 1);
            CHECK(created.size() <= 2);
        });
    }

    SECTION("refresh replaces previous observations") {
        bank.mutate([&](BankState& state) {
            refresh_observations(state, alice_id, providers, config, now);
        });
        auto first_ids = bank.snapshot()->units_mentioning(alice_id, {Network::Observation});
        REQUIRE(!first_ids.empty());
        bank.mutate([&](BankState& state) {
            refresh_observations(state, alice_id, providers, config, now + 60);
        });
        auto snap = bank.snapshot();
        for (const auto& old_id : first_ids) CHECK(snap->units.count(old_id) == 0);
        CHECK(!snap->units_mentioning(alice_id, {Network::Observation}).empty());
    }

    SECTION("an entity with no facts loses its observations") {
        bank.mutate([&](BankState& state) {
            refresh_observations(state, alice_id, providers, config, now);
        });
        bank.mutate([&](BankState& state) {
            // remove the world/experience facts, then refresh again
            for (const auto& fid :
                 state.units_mentioning(alice_id, {Network::World, Network::Experience}))
                state.remove_unit(fid);
            refresh_observations(state, alice_id, providers, config, now + 120);
        });
        CHECK(bank.snapshot()->units_mentioning(alice_id, {Network::Observation}).empty());
    }

    SECTION("provider failure keeps the previous observations") {
        bank.mutate([&](BankState& state) {
            refresh_observations(state, alice_id, providers, config, now);
        });
        auto before = bank.snapshot()->units_mentioning(alice_id, {Network::Observation});
        struct FailingSynth : MockSynthesizer {
            using MockSynthesizer::MockSynthesizer;
            std::vector<std::string> synthesize_observations(
                const std::string&, const std::vector<std::string>&) override {
                throw ProviderError("synthesizer offline");
            }
        };
        ProviderSuite failing = providers;
        failing.synthesizer = std::make_shared<FailingSynth>(config.background_max_len);
        CHECK_THROWS_AS(bank.mutate([&](BankState& state) {
            refresh_observations(state, alice_id, failing, config, now + 180);
        }),
                        ProviderError);
        CHECK(bank.snapshot()->units_mentioning(alice_id, {Network::Observation}) == before);
    }
}

TEST_CASE("facts without temporal expressions default to the mention time") {
    EngineConfig config;
    ProviderSuite providers = make_mock_suite(config);
    MemoryBank bank("b1");
    Timestamp now = base_now();

    struct BareExtractor : FactExtractor {
        std::vector<ExtractedFact> extract(const Transcript&) override {
            ExtractedFact f;
            f.what = "a fact without any time phrasing";
            f.when = "no clue";
            return {f};
        }
    };
    ProviderSuite bare = providers;
    bare.fact_extractor = std::make_shared<BareExtractor>();
    auto receipt = retain(bank, {{"user", "hello there", 0}}, bare, config, now);
    REQUIRE(receipt.fact_ids.size() == 1);
    const auto& u = bank.snapshot()->units.at(receipt.fact_ids[0]);
    CHECK(u.occurred_start == now);
    CHECK(u.occurred_end == now);
    CHECK(u.mentioned_at == now);
}
