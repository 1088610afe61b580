#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "recomb/config.hpp"
#include "recomb/errors.hpp"

namespace {

using namespace recomb;

const char* kPairConfig = R"({
  "schema_version": 1,
  "space": {"alphabet_sizes": [2, 2]},
  "frames": [[1]],
  "legend": "uniform",
  "initial_measure": {"type": "explicit", "weights": [0.5, 0.0, 0.0, 0.5]},
  "particle": {"n": 100, "seed": 7, "snapshot_times": [1.0, 5.0]},
  "output": {"dir": "out"}
})";

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("a minimal config parses into typed objects") {
    const ExperimentConfig c = parse_config(kPairConfig);
    CHECK(c.schema_version == 1);
    CHECK(c.alphabet_sizes == std::vector<Letter>{2, 2});
    REQUIRE(c.frames.size() == 1);
    CHECK(c.frames[0] == SiteSet{0}); // 1-based in the file, 0-based here
    CHECK(c.legend.uniform);
    CHECK(c.particle.n == 100);
    CHECK(c.particle.snapshot_times == std::vector<double>{1.0, 5.0});

    SpacePtr space = build_space(c);
    CHECK(space->state_count() == 4);
    const FrameSystem fs = build_frame_system(c, space);
    CHECK(fs.frame_count() == 1);
    const Legend legend = build_legend(c, fs);
    CHECK(legend.total_max_rate() == 1.0);
    const DenseMeasure mu0 = build_initial_measure(c, space);
    CHECK(mu0.at({0, 0}) == 0.5);
    CHECK(mu0.at({1, 1}) == 0.5);
}

TEST_CASE("parse -> serialize -> parse is the identity") {
    const ExperimentConfig a = parse_config(kPairConfig);
    const ExperimentConfig b = parse_config(config_to_json(a));
    CHECK(a == b);

    // also through a file
    const auto path = temp_file("recomb_roundtrip.json");
    save_config(a, path);
    const ExperimentConfig c = load_config(path);
    CHECK(a == c);
    std::filesystem::remove(path);
}

TEST_CASE("explicit legend round-trips and is validated") {
    const char* text = R"({
      "schema_version": 1,
      "space": {"alphabet_sizes": [2, 2]},
      "frames": [[1], [2]],
      "legend": [
        {"frame": 2, "values": [[1.0, 0.5], [0.5, 1.0]]},
        {"frame": 1, "values": [[2.0, 1.0], [1.0, 2.0]]}
      ],
      "initial_measure": {"type": "product", "marginals": [[0.5, 0.5], [0.25, 0.75]]}
    })";
    const ExperimentConfig c = parse_config(text);
    CHECK(!c.legend.uniform);
    CHECK(c.legend.matrices[0] == std::vector<double>{2.0, 1.0, 1.0, 2.0});
    CHECK(c.legend.matrices[1] == std::vector<double>{1.0, 0.5, 0.5, 1.0});
    CHECK(parse_config(config_to_json(c)) == c);

    const Legend legend = build_legend(c, build_frame_system(c, build_space(c)));
    CHECK(legend.total_max_rate() == doctest::Approx(3.0));

    std::string bad = text;
    bad.replace(bad.find("0.5], [0.5"), 10, "0.5], [0.4"); // break symmetry
    CHECK_THROWS_WITH_AS(parse_config(bad), doctest::Contains("frame 2"),
                         std::invalid_argument);
}

TEST_CASE("structural errors name the offending field") {
    CHECK_THROWS_WITH_AS(parse_config("{"), doctest::Contains("not valid JSON"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config("[1,2]"), doctest::Contains("top level"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_config(R"({"schema_version": 2})"),
                         doctest::Contains("schema_version"), std::invalid_argument);

    std::string cfg = kPairConfig;
    cfg.replace(cfg.find("\"frames\": [[1]]"), 15, "\"frames\": [[3]]");
    CHECK_THROWS_WITH_AS(parse_config(cfg), doctest::Contains("site index 3"),
                         std::invalid_argument);

    cfg = kPairConfig;
    cfg.replace(cfg.find("\"frames\": [[1]]"), 15, "\"frames\": [[1], [1]]");
    CHECK_THROWS_AS(parse_config(cfg), std::invalid_argument); // duplicate frame

    cfg = kPairConfig;
    cfg.replace(cfg.find("\"output\""), 8, "\"outputs\"");
    CHECK_THROWS_WITH_AS(parse_config(cfg), doctest::Contains("unknown key"),
                         std::invalid_argument);

    cfg = kPairConfig;
    cfg.replace(cfg.find("[0.5, 0.0, 0.0, 0.5]"), 20, "[0.5, 0.0, 0.0, 0.4]");
    CHECK_THROWS_WITH_AS(parse_config(cfg), doctest::Contains("sums to"),
                         std::invalid_argument);

    // wrong JSON type inside a field still maps to a config diagnostic
    cfg = kPairConfig;
    cfg.replace(cfg.find("\"legend\": \"uniform\""), 19, "\"legend\": 3");
    CHECK_THROWS_AS(parse_config(cfg), std::invalid_argument);
}

TEST_CASE("near-simplex weights are repaired with a note") {
    std::string cfg = kPairConfig;
    cfg.replace(cfg.find("[0.5, 0.0, 0.0, 0.5]"), 20, "[0.5, -1e-12, 0.0, 0.5]");
    const ExperimentConfig c = parse_config(cfg);
    std::ostringstream notes;
    const DenseMeasure mu = build_initial_measure(c, build_space(c), &notes);
    CHECK(mu.at({0, 1}) == 0.0);
    CHECK(mu.total_mass() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(notes.str().find("renormalized") != std::string::npos);
}

TEST_CASE("labeled alphabets parse words symbolically") {
    const char* text = R"({
      "schema_version": 1,
      "space": {"alphabets": [["a", "b"], ["x", "y", "z"]]},
      "frames": [[1], [2]],
      "legend": "uniform",
      "initial_measure": {"type": "uniform_on_words", "words": [["a", "x"], ["b", "z"]]}
    })";
    const ExperimentConfig c = parse_config(text);
    CHECK(c.alphabet_sizes == std::vector<Letter>{2, 3});
    CHECK(c.initial.words == std::vector<Word>{{0, 0}, {1, 2}});
    CHECK(parse_config(config_to_json(c)) == c);

    CHECK(format_word(c, {1, 2}) == "b,z");
    CHECK(parse_word(c, "b,z") == Word{1, 2});
    CHECK(parse_word(c, " a , y ") == Word{0, 1});
    CHECK(parse_word(c, "0,2") == Word{0, 2}); // codes accepted alongside labels
    CHECK_THROWS_AS(parse_word(c, "a"), std::invalid_argument);
    CHECK_THROWS_AS(parse_word(c, "a,q"), std::invalid_argument);
    CHECK_THROWS_AS(parse_word(c, "a,3"), std::invalid_argument);

    const DenseMeasure mu = build_initial_measure(c, build_space(c));
    CHECK(mu.at({0, 0}) == 0.5);
    CHECK(mu.at({1, 2}) == 0.5);
}

TEST_CASE("unlabeled spaces format and parse words as codes") {
    const ExperimentConfig c = parse_config(kPairConfig);
    CHECK(format_word(c, {1, 0}) == "1,0");
    CHECK(parse_word(c, "1,0") == Word{1, 0});
    CHECK_THROWS_AS(parse_word(c, "2,0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_word(c, "1,0,0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_word(c, "99999999999999999999,0"), std::invalid_argument);
}

TEST_CASE("word lists skip comments and blanks") {
    const ExperimentConfig c = parse_config(kPairConfig);
    const auto path = temp_file("recomb_words.txt");
    {
        std::ofstream out(path);
        out << "# seeds\n0,0\n\n1,1  # fully swapped\n";
    }
    const auto words = load_word_list(c, path);
    std::filesystem::remove(path);
    REQUIRE(words.size() == 2);
    CHECK(words[0] == Word{0, 0});
    CHECK(words[1] == Word{1, 1});
    CHECK_THROWS_AS(load_word_list(c, temp_file("recomb_missing_file.txt")),
                    std::invalid_argument);
}

TEST_CASE("the state cap travels through the config") {
    std::string cfg = kPairConfig;
    cfg.insert(cfg.rfind('}'), ", \"state_cap\": 3");
    CHECK_THROWS_AS(parse_config(cfg), CapExceededError); // 4 states > cap 3
}

TEST_CASE("integrator settings flow into the typed config") {
    std::string cfg = kPairConfig;
    cfg.insert(cfg.rfind('}'),
               R"(, "integrator": {"step": 0.05, "drift_limit": 1e-7})");
    const ExperimentConfig c = parse_config(cfg);
    CHECK(c.integrator.step == 0.05);
    CHECK(c.integrator.drift_limit == 1e-7);
    CHECK(c.integrator.safety == 0.1); // untouched default
    CHECK(parse_config(config_to_json(c)) == c);
}
