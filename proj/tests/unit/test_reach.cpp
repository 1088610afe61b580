#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "generators.hpp"
#include "oracles.hpp"
#include "recomb/reach.hpp"

namespace {
using namespace recomb;

std::vector<StateIndex> encode_all(const ProductSpace& space, const std::vector<Word>& words) {
    std::vector<StateIndex> out;
    out.reserve(words.size());
    for (const Word& w : words) out.push_back(space.encode(w));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}
} // namespace

TEST_CASE("recombine splices frame letters") {
    auto space = make_space({2, 2, 2});
    CHECK(recombine(*space, {1}, {0, 0, 0}, {1, 1, 1}) == Word{0, 1, 0});
    CHECK(recombine(*space, {0, 2}, {0, 0, 0}, {1, 1, 1}) == Word{1, 0, 1});
    const Word x = {1, 0, 1};
    CHECK(recombine(*space, {1}, x, x) == x); // self-recombination is the identity
    // splicing twice with the original partner restores x
    const Word once = recombine(*space, {1}, x, {0, 1, 0});
    CHECK(recombine(*space, {1}, once, x) == x);
    CHECK_THROWS_AS(recombine(*space, {1}, {0, 0}, {1, 1, 1}), std::invalid_argument);
}

TEST_CASE("word sets deduplicate and sort") {
    auto space = make_space({2, 2});
    const WordSet ws(space, {{1, 1}, {0, 0}, {1, 1}});
    CHECK(ws.size() == 2);
    CHECK(ws.indices() == std::vector<StateIndex>{0, 3});
    CHECK(ws.contains({0, 0}));
    CHECK(!ws.contains({0, 1}));
    CHECK(!ws.is_full());
    CHECK(ws.words() == std::vector<Word>{{0, 0}, {1, 1}});
    CHECK_THROWS_AS(WordSet(space, {{0, 2}}), std::invalid_argument);
}

TEST_CASE("letter coverage verdicts") {
    auto space = make_space({2, 2});
    CHECK(covers_all_letters(WordSet(space, {{0, 0}, {1, 1}})));
    CHECK(!covers_all_letters(WordSet(space, {{0, 0}, {0, 1}}))); // site 0 misses letter 1
    std::vector<Word> all;
    for (StateIndex s = 0; s < 4; ++s) all.push_back(space->decode(s));
    CHECK(covers_all_letters(WordSet(space, all)));
    CHECK(!covers_all_letters(WordSet(space, {})));
}

TEST_CASE("pinned closures") {
    auto space = make_space({2, 2});
    const FrameSystem fs(space, {{1}});
    // two correlated seeds, one swapping frame: the cross words appear in one
    // step and saturate the square
    const ClosureResult cl = closure(WordSet(space, {{0, 0}, {1, 1}}), fs);
    CHECK(cl.members.size() == 4);
    CHECK(cl.full);
    CHECK(cl.discovery_order.size() == 4);
    CHECK(cl.discovery_order[0] == 0); // seeds first, ascending
    CHECK(cl.discovery_order[1] == 3);

    const ClosureResult solo = closure(WordSet(space, {{1, 0}}), fs);
    CHECK(solo.members == std::vector<StateIndex>{space->encode({1, 0})});
    CHECK(!solo.full);

    // a full frame only swaps whole words: nothing new is reachable
    const FrameSystem whole(space, {{0, 1}});
    const ClosureResult swap = closure(WordSet(space, {{0, 0}, {1, 1}}), whole);
    CHECK(swap.members.size() == 2);
}

TEST_CASE("closure matches the brute-force oracle") {
    RandomStream rng(808);
    for (int trial = 0; trial < 25; ++trial) {
        auto space = testgen::random_space(rng, 3, 3);
        const FrameSystem fs = (trial % 2 == 0) ? testgen::random_t0_system(rng, space)
                                                : testgen::random_non_t0_system(rng, space);
        std::vector<Word> seeds;
        const std::size_t m = 1 + rng.uniform_index(3);
        for (std::size_t j = 0; j < m; ++j) {
            seeds.push_back(space->decode(rng.uniform_index(space->state_count())));
        }
        const ClosureResult got = closure(WordSet(space, seeds), fs);
        const std::vector<Word> want = oracle::naive_closure(*space, seeds, fs.frames());
        CHECK(got.members == encode_all(*space, want));
    }
}

TEST_CASE("closure is monotone and idempotent") {
    RandomStream rng(809);
    for (int trial = 0; trial < 20; ++trial) {
        auto space = testgen::random_space(rng, 3, 3);
        const FrameSystem fs = testgen::random_t0_system(rng, space);
        std::vector<Word> seeds;
        for (std::size_t j = 0; j < 2; ++j) {
            seeds.push_back(space->decode(rng.uniform_index(space->state_count())));
        }
        const WordSet seed_set(space, seeds);
        const ClosureResult once = closure(seed_set, fs);
        for (StateIndex s : seed_set.indices()) CHECK(once.contains(s));

        std::vector<Word> member_words;
        for (StateIndex s : once.members) member_words.push_back(space->decode(s));
        const ClosureResult twice = closure(WordSet(space, member_words), fs);
        CHECK(twice.members == once.members);
    }
}

TEST_CASE("covering seeds regenerate the whole space under separating frames") {
    RandomStream rng(810);
    for (int trial = 0; trial < 40; ++trial) {
        auto space = testgen::random_space(rng, 3, 3);
        const FrameSystem fs = testgen::random_t0_system(rng, space);
        const std::vector<Word> seeds = testgen::covering_words(rng, *space);
        const WordSet seed_set(space, seeds);
        REQUIRE(covers_all_letters(seed_set));
        const ClosureResult cl = closure(seed_set, fs);
        CHECK(cl.full);
    }
}

TEST_CASE("witness sequences replay from the seeds") {
    RandomStream rng(811);
    for (int trial = 0; trial < 20; ++trial) {
        auto space = testgen::random_space(rng, 3, 3);
        const FrameSystem fs = testgen::random_t0_system(rng, space);
        const std::vector<Word> seeds = testgen::covering_words(rng, *space);
        const WordSet seed_set(space, seeds);
        const ClosureResult cl = closure(seed_set, fs);
        const Word target = space->decode(rng.uniform_index(space->state_count()));
        const auto steps = find_recombination_sequence(cl, target);

        std::set<StateIndex> known(seed_set.indices().begin(), seed_set.indices().end());
        for (const RecombinationStep& st : steps) {
            REQUIRE(known.count(st.source) == 1);  // inputs must already exist
            REQUIRE(known.count(st.partner) == 1);
            const Word out = recombine(*space, fs.frame(st.frame_index),
                                       space->decode(st.source), space->decode(st.partner));
            CHECK(space->encode(out) == st.result);
            known.insert(st.result);
        }
        CHECK(known.count(space->encode(target)) == 1);
        if (seed_set.contains(target)) CHECK(steps.empty());
    }
}

TEST_CASE("witness for an unreachable target throws") {
    auto space = make_space({2, 2});
    const FrameSystem fs(space, {{1}});
    const ClosureResult cl = closure(WordSet(space, {{0, 0}}), fs);
    CHECK_THROWS_AS(find_recombination_sequence(cl, Word{1, 1}), std::invalid_argument);
}

TEST_CASE("closure commutes with the quotient repacking") {
    RandomStream rng(812);
    for (int trial = 0; trial < 20; ++trial) {
        auto space = testgen::random_space(rng, 3, 3);
        const FrameSystem fs = testgen::random_non_t0_system(rng, space);
        const QuotientSystem q = quotient_system(fs);

        std::vector<Word> seeds;
        const std::size_t m = 2 + rng.uniform_index(2);
        for (std::size_t j = 0; j < m; ++j) {
            seeds.push_back(space->decode(rng.uniform_index(space->state_count())));
        }
        const ClosureResult direct = closure(WordSet(space, seeds), fs);

        std::vector<Word> qseeds;
        for (const Word& w : seeds) qseeds.push_back(q.to_quotient(w));
        const ClosureResult quotiented = closure(WordSet(q.space, qseeds), q.system);

        std::vector<StateIndex> mapped;
        for (StateIndex s : quotiented.members) {
            mapped.push_back(space->encode(q.from_quotient(q.space->decode(s))));
        }
        std::sort(mapped.begin(), mapped.end());
        CHECK(mapped == direct.members);
    }
}
