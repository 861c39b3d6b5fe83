#include <doctest.h>

#include <algorithm>
#include <set>

#include "divrec/augment.hpp"
#include "divrec/error.hpp"
#include "divrec/prompt_codec.hpp"
#include "divrec/rng.hpp"
#include "divrec/strings.hpp"
#include "test_helpers.hpp"

using namespace divrec;
using namespace divrec::test;

namespace {

// Table-style fixture: first two and last history entries match the worked
// example, the elided middle is filled with plain Action titles.
std::vector<TitledEntry> table_history() {
    std::vector<TitledEntry> h;
    h.push_back({"Star Wars: Episode V - The Empire Strikes Back (1980)", "Action"});
    h.push_back({"Mission: Impossible (1996)", "Action"});
    for (int i = 0; i < 7; ++i) {
        h.push_back({"Filler Movie " + std::to_string(i + 1) + " (1990)", "Action"});
    }
    h.push_back({"Stargate (1994)", "Action"});
    return h;
}

GenreTaxonomy taxonomy() { return mini_catalog().taxonomy(); }

} // namespace

TEST_CASE("render_gp matches the published instruction and input format") {
    auto tax = taxonomy();
    PromptCodec codec(tax);
    auto p = codec.render_gp(table_history(), 3);

    CHECK(p.instruction ==
          "Given a list of movies and their corresponding genres the user has watched before, "
          "please provide the 3 most likely genres in the future recommendation list. Output the "
          "genres only, without movie names, explanations, or numbers. The output format is "
          "\"Genre1, Genre2, ..., Genre3\".");
    CHECK(starts_with(p.input,
                      "The user has watched the following movies with their corresponding genres "
                      "in \"()\" before: \"Star Wars: Episode V - The Empire Strikes Back (1980)\" "
                      "(Action), \"Mission: Impossible (1996)\" (Action), "));
    CHECK(p.input.ends_with("\"Stargate (1994)\" (Action)."));

    // pluralization stays fixed for k=1
    CHECK(codec.render_gp(table_history(), 1).instruction.find("the 1 most likely genres") !=
          std::string::npos);

    CHECK_THROWS_AS(codec.render_gp(table_history(), 0), Error);
    CHECK_THROWS_AS(codec.render_gp(table_history(), 11), Error);
}

TEST_CASE("parse_gp: published output, case folding, dedupe, fuzz repair") {
    auto tax = taxonomy();
    PromptCodec codec(tax);

    auto g = codec.parse_gp("Action, Comedy, Drama", 3);
    CHECK(g == std::vector<std::string>{"Action", "Comedy", "Drama"});

    CHECK(codec.parse_gp("action , ACTION, Comedy", 2) ==
          std::vector<std::string>{"Action", "Comedy"});

    CHECK(codec.parse_gp("Acton, Comdy", 2) == std::vector<std::string>{"Action", "Comedy"});

    CHECK_THROWS_AS(codec.parse_gp("no genres here at all", 3), Error);

    // idempotent and case-insensitive: parse(join(parse(t))) == parse(t)
    auto once = codec.parse_gp("drama,action\nromance, Bogus", 4);
    auto twice = codec.parse_gp(join(once, ", "), 4);
    CHECK(once == twice);
}

TEST_CASE("fuzzy normalization equals the exhaustive edit-distance oracle") {
    auto tax = taxonomy();
    auto oracle = [&](const std::string& token) -> std::string {
        std::string lower = to_lower(token);
        for (const auto& name : tax.names) {
            if (to_lower(name) == lower) return name;
        }
        for (const auto& name : tax.names) {
            if (edit_distance_capped(lower, to_lower(name), 1) <= 1) return name;
        }
        return "";
    };

    for (const auto& name : tax.names) {
        std::string lower = to_lower(name);
        std::vector<std::string> variants;
        for (size_t i = 0; i < lower.size(); ++i) {
            std::string del = lower;
            del.erase(i, 1);
            variants.push_back(del);
            for (char c = 'a'; c <= 'z'; ++c) {
                std::string sub = lower;
                sub[i] = c;
                variants.push_back(sub);
                std::string ins = lower;
                ins.insert(ins.begin() + static_cast<long>(i), c);
                variants.push_back(ins);
            }
        }
        for (const auto& v : variants) {
            auto got = normalize_genre(v, tax);
            std::string want = oracle(v);
            REQUIRE(got.has_value());
            CHECK(*got == want);
        }
    }
}

TEST_CASE("render_gf and parse_gf follow the trail format") {
    auto tax = taxonomy();
    PromptCodec codec(tax);
    std::vector<std::string> targets = {"Action", "Comedy", "Drama"};
    auto p = codec.render_gf(table_history(), targets);

    CHECK(p.instruction.find("fill in the genre placeholders represented by \"?\" with the "
                             "following genres: [Action, Comedy, Drama].") != std::string::npos);
    CHECK(starts_with(p.input,
                      "\"Star Wars: Episode V - The Empire Strikes Back (1980)\" 'Action', "));
    CHECK(p.input.ends_with("\"_\" '?'"));
    CHECK(codec.render_gf(table_history(), {"Action"}).instruction.find("[Action].") !=
          std::string::npos);
    CHECK_THROWS_AS(codec.render_gf(table_history(), {}), Error);

    // published output shape: the echoed trail with futures filled
    std::vector<std::string> filled = {"Action", "Action", "Comedy", "Drama", "Comedy",
                                       "Action", "Drama",  "Comedy", "Action", "Comedy"};
    std::string output = Trail::gf_output(table_history(), filled).render();
    CHECK(output.ends_with("\"_\" 'Comedy'"));
    CHECK(codec.parse_gf(output) == filled);

    CHECK_THROWS_AS(codec.parse_gf("\"_\" 'Action', \"_\" 'Comedy'"), Error); // too short
}

TEST_CASE("parse_gf tolerates whitespace mutations") {
    auto tax = taxonomy();
    PromptCodec codec(tax);
    std::vector<std::string> filled = {"Action", "Comedy", "Drama",  "Action", "Comedy",
                                       "Drama",  "Action", "Comedy", "Drama",  "Action"};
    std::string clean = Trail::gf_output(table_history(), filled).render();
    std::string fuzzed = replace_all(clean, ", ", " ,   ");
    fuzzed = replace_all(fuzzed, "\" '", "\"   '");
    CHECK(codec.parse_gf(fuzzed) == codec.parse_gf(clean));
}

TEST_CASE("render_ip and parse_ip: published fixture") {
    auto tax = taxonomy();
    PromptCodec codec(tax);
    std::vector<std::string> future_genres = {"Action", "Comedy", "Comedy", "Comedy", "Comedy",
                                              "Comedy", "Comedy", "Comedy", "Comedy", "Comedy"};
    auto p = codec.render_ip(table_history(), future_genres);
    CHECK(p.instruction.find("fill in the movie placeholders represented by \"?\".") !=
          std::string::npos);
    CHECK(p.input.find("\"Stargate (1994)\" 'Action', \"?\" 'Action', \"?\" 'Comedy'") !=
          std::string::npos);
    CHECK(p.input.ends_with("\"?\" 'Comedy'"));
    CHECK_THROWS_AS(codec.render_ip(table_history(), {"Action"}), Error);

    std::vector<TitledEntry> future;
    future.push_back({"Saving Private Ryan (1998)", "Action"});
    future.push_back({"Pretty Woman (1990)", "Comedy"});
    for (int i = 0; i < 7; ++i) {
        future.push_back({"Some Comedy " + std::to_string(i + 1) + " (1991)", "Comedy"});
    }
    future.push_back({"Ghost (1990)", "Comedy"});
    std::string output = Trail::ip_output(table_history(), future).render();
    auto parsed = codec.parse_ip(output);
    REQUIRE(parsed.size() == 10);
    CHECK(parsed[0].title == "Saving Private Ryan (1998)");
    CHECK(parsed[0].genre == "Action");
    CHECK(parsed[9].title == "Ghost (1990)");
    CHECK(parsed[9].genre == "Comedy");

    CHECK_THROWS_AS(codec.parse_ip("\"A\" 'Action'"), Error);
}

TEST_CASE("roundtrip identities over randomized trails") {
    auto tax = taxonomy();
    PromptCodec codec(tax);
    Rng rng(2024);
    const std::string charset = "abcdefghij KLMNOP:-.()&!0123456789";

    auto random_title = [&]() {
        size_t len = 4 + rng.bounded(30);
        std::string t;
        for (size_t i = 0; i < len; ++i) t += charset[rng.bounded(charset.size())];
        t = trim(t);
        if (t.empty() || t == "_" || t == "?") t = "Fallback Title";
        return t;
    };

    for (int round = 0; round < 500; ++round) {
        std::vector<TitledEntry> history;
        for (int i = 0; i < 10; ++i) {
            history.push_back({random_title(), tax.names[rng.bounded(tax.size())]});
        }
        std::vector<std::string> genres;
        for (int i = 0; i < 10; ++i) genres.push_back(tax.names[rng.bounded(tax.size())]);

        CHECK(codec.parse_gf(Trail::gf_output(history, genres).render()) == genres);

        std::vector<TitledEntry> future;
        for (int i = 0; i < 10; ++i) future.push_back({random_title(), genres[i]});
        auto parsed = codec.parse_ip(Trail::ip_output(history, future).render());
        REQUIRE(parsed.size() == 10);
        for (int i = 0; i < 10; ++i) {
            CHECK(parsed[i].title == future[i].title);
            CHECK(parsed[i].genre == future[i].genre);
        }

        auto distinct = distinct_by_frequency(genres);
        auto gp = codec.parse_gp(join(distinct, ", "), static_cast<int>(distinct.size()));
        CHECK(gp == distinct);
    }
}

TEST_CASE("pad_genres fills from the training distribution without repeats") {
    auto tax = taxonomy();
    PromptCodec codec(tax);
    GenreDistribution dist;
    dist.genres = tax.names;
    dist.counts.assign(tax.size(), 0);
    dist.probs.assign(tax.size(), 0.0);
    dist.counts[0] = 6; // Action
    dist.counts[5] = 2; // Comedy (taxonomy order of mini_catalog)

    Rng rng(11);
    auto padded = codec.pad_genres({"Drama"}, 3, dist, rng);
    REQUIRE(padded.size() == 3);
    CHECK(padded[0] == "Drama");
    std::set<std::string> uniq(padded.begin(), padded.end());
    CHECK(uniq.size() == 3);

    // distribution support exhausts after two additions; taxonomy fallback kicks in
    Rng rng2(11);
    auto five = codec.pad_genres({"Drama"}, 5, dist, rng2);
    CHECK(five.size() == 5);
    CHECK(std::set<std::string>(five.begin(), five.end()).size() == 5);

    Rng rng3(11);
    auto truncated = codec.pad_genres({"Drama", "Action", "Comedy"}, 2, dist, rng3);
    CHECK(truncated.size() == 2);
}

TEST_CASE("repair_gf replaces off-target tokens with the least-represented target") {
    auto tax = taxonomy();
    PromptCodec codec(tax);
    std::vector<std::string> targets = {"Action", "Comedy"};
    std::vector<std::string> slots = {"Action", "Action", "Action", "Horror", "Action",
                                      "Action", "Action", "Action", "Action", "Action"};
    auto repaired = codec.repair_gf(slots, targets);
    CHECK(repaired.slots[3] == "Comedy"); // Comedy had zero slots
    CHECK(repaired.targets_covered);

    // two off-target tokens spread across both targets by recounting
    std::vector<std::string> slots2 = {"Action", "Horror", "Sci-Fi", "Action", "Action",
                                       "Action", "Action", "Action", "Action", "Action"};
    auto repaired2 = codec.repair_gf(slots2, targets);
    CHECK(repaired2.slots[1] == "Comedy");
    CHECK(repaired2.slots[2] == "Comedy");

    // nothing off-target but a target missing: flagged, not forced
    std::vector<std::string> all_action(10, "Action");
    auto repaired3 = codec.repair_gf(all_action, targets);
    CHECK(repaired3.slots == all_action);
    CHECK_FALSE(repaired3.targets_covered);
}

TEST_CASE("rendering is deterministic") {
    auto tax = taxonomy();
    PromptCodec codec(tax);
    auto a = codec.render_gp(table_history(), 4);
    auto b = codec.render_gp(table_history(), 4);
    CHECK(a.text() == b.text());
}

TEST_CASE("baseline prompts embed control data") {
    auto tax = taxonomy();
    PromptCodec codec(tax);
    auto div = codec.render_baseline(TaskKind::BigrecDiv, table_history(), 5);
    CHECK(div.instruction.find("covering exactly 5 different genres") != std::string::npos);

    auto cot1 = codec.render_baseline(TaskKind::BigrecCotStage1, table_history(), 3);
    CHECK(cot1.instruction.find("provide the 3 genres") != std::string::npos);

    auto cot2 = codec.render_baseline(TaskKind::BigrecCotStage2, table_history(), 0,
                                      {"Action", "Drama"});
    CHECK(cot2.instruction.find("[Action, Drama]") != std::string::npos);

    auto titles = codec.parse_title_list("\"Movie One (1990)\", \"Movie Two (1991)\"");
    CHECK(titles == std::vector<std::string>{"Movie One (1990)", "Movie Two (1991)"});
    auto unquoted = codec.parse_title_list("Movie One (1990), Movie Two (1991)");
    CHECK(unquoted.size() == 2);
}

TEST_CASE("export_sft writes JSON-lines and reimports identically") {
    auto tax = taxonomy();
    PromptCodec codec(tax);
    TempDir dir("sft");

    CHECK(export_sft({}, dir.file("empty.jsonl")) == 0);
    CHECK(slurp(dir.file("empty.jsonl")).empty());

    std::vector<InstructionSample> samples;
    for (int i = 0; i < 3; ++i) {
        samples.push_back(codec.gp_sample(table_history(), {"Action", "Comedy"}));
    }
    CHECK(export_sft(samples, dir.file("gp.jsonl")) == 3);

    auto back = import_sft(dir.file("gp.jsonl"));
    REQUIRE(back.size() == 3);
    for (size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].instruction == samples[i].instruction);
        CHECK(back[i].input == samples[i].input);
        CHECK(back[i].output == samples[i].output);
    }
    // alpaca-style field order on disk
    CHECK(starts_with(slurp(dir.file("gp.jsonl")), "{\"instruction\":"));
}

TEST_CASE("templates round-trip through the asset directory") {
    TempDir dir("templates");
    auto defaults = PromptTemplates::defaults();
    defaults.save_dir(dir.file("t"));
    auto loaded = PromptTemplates::load_dir(dir.file("t"));
    CHECK(loaded.gp_instruction == defaults.gp_instruction);
    CHECK(loaded.gf_instruction == defaults.gf_instruction);
    CHECK(loaded.version() == defaults.version());

    auto modified = loaded;
    modified.gp_instruction += " EXTRA";
    CHECK(modified.version() != defaults.version());
}

TEST_CASE("repo template assets equal the built-in defaults") {
    auto repo = PromptTemplates::load_dir(std::string(DIVREC_SOURCE_DIR) + "/templates");
    CHECK(repo.version() == PromptTemplates::defaults().version());
}
