#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "hindsight/text.hpp"
#include "hindsight/time.hpp"

using namespace hindsight;

TEST_CASE("string_similarity") {
    CHECK(string_similarity("Alice", "Alice") == 1.0);
    // edit distance("alice","alicia") = 2, max length 6
    CHECK_THAT(string_similarity("Alice", "Alicia"),
               Catch::Matchers::WithinAbs(1.0 - 2.0 / 6.0, 1e-12));
    CHECK(string_similarity("Bob", "") == 0.0);
    CHECK(string_similarity("", "") == 1.0);
    CHECK(string_similarity("ALICE", "alice") == 1.0);  // case-folded
    // "alice chen" vs "alice": 5 deletions over max length 10
    CHECK_THAT(string_similarity("Alice Chen", "Alice"), Catch::Matchers::WithinAbs(0.5, 1e-12));
}

TEST_CASE("normalize_first_person rewrite table") {
    CHECK(normalize_first_person("You are a creative engineer") == "I am a creative engineer");
    CHECK(normalize_first_person("I was born in Texas") == "I was born in Texas");
    CHECK(normalize_first_person("You were born in Texas and have 10 years of startup experience.") ==
          "I was born in Texas and have 10 years of startup experience.");
    CHECK(normalize_first_person("Your team is great. You were right.") ==
          "My team is great. I was right.");
    CHECK(normalize_first_person("You like jazz.") == "I like jazz.");
    // word boundaries: no rewrite inside longer words
    CHECK(normalize_first_person("Yourself first.") == "Yourself first.");
    // only sentence-initial positions rewrite
    CHECK(normalize_first_person("I told you so.") == "I told you so.");
}

TEST_CASE("normalize_first_person is idempotent on randomized inputs") {
    std::mt19937_64 rng(11);
    const char* fragments[] = {"You are kind",  "You were away", "Your dog barks",
                               "You run fast",  "I am here",     "the sky is blue",
                               "Yours truly",   "You",           "are you sure"};
    std::uniform_int_distribution<int> count(1, 5);
    std::uniform_int_distribution<size_t> pick(0, std::size(fragments) - 1);
    const char* joiners[] = {". ", "! ", "? ", " "};
    std::uniform_int_distribution<size_t> joiner(0, 3);
    for (int trial = 0; trial < 300; ++trial) {
        std::string text;
        int n = count(rng);
        for (int i = 0; i < n; ++i) {
            if (!text.empty()) text += joiners[joiner(rng)];
            text += fragments[pick(rng)];
        }
        std::string once = normalize_first_person(text);
        CHECK(normalize_first_person(once) == once);
    }
}

TEST_CASE("tokenizer folds case and strips punctuation") {
    auto tokens = tokenize("Hello, World! 42-ways.");
    REQUIRE(tokens.size() == 4);
    CHECK(tokens[0] == "hello");
    CHECK(tokens[1] == "world");
    CHECK(tokens[2] == "42");
    CHECK(tokens[3] == "ways");
    CHECK(tokenize("...").empty());
}

TEST_CASE("default token counter is ceil(chars/4)") {
    CHECK(default_token_count("") == 0);
    CHECK(default_token_count("abcd") == 1);
    CHECK(default_token_count("abcde") == 2);
    CHECK(default_token_count(std::string(41, 'x')) == 11);
}

TEST_CASE("calendar helpers") {
    // 2024-06-09 was a Sunday; 2024-06-10 a Monday
    auto ts = parse_iso("2024-06-09T12:00:00Z");
    REQUIRE(ts.has_value());
    CHECK(day_of_week(*ts) == 0);
    CHECK(format_human_date(*ts) == "Sunday, June 9, 2024");
    CHECK(format_iso(*ts) == "2024-06-09T12:00:00Z");
    CHECK(parse_iso("2024-06-09").has_value());
    CHECK(parse_iso("2024-13-01") == std::nullopt);
    CHECK(parse_iso("not a date") == std::nullopt);
    CHECK(days_in_month(2024, 2) == 29);
    CHECK(days_in_month(2023, 2) == 28);
}
