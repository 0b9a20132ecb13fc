#include <numeric>
#include <random>

#include "doctest.h"
#include "racer/models.hpp"

using namespace racer;

namespace {

std::vector<TokenId> toks(const std::string& s) {
    return {s.begin(), s.end()};
}

}  // namespace

TEST_CASE("scripted model replays its stream one-hot") {
    const ScriptedModel model({3, 1, 2}, 8);
    CHECK(model.horizon() == std::size_t{3});
    const auto d0 = model.distribution({});
    CHECK(d0[3] == 1.0);
    const auto out = autoregressive_reference(model, {}, 3, DecodeMode::Greedy);
    CHECK(out == std::vector<TokenId>{3, 1, 2});
    // Past the script: uniform.
    const auto d3 = model.distribution(std::vector<TokenId>{3, 1, 2});
    for (const double p : d3) CHECK(p == doctest::Approx(1.0 / 8));
}

TEST_CASE("markov model on 'abab' with vanishing smoothing") {
    const auto corpus = toks("abab");
    const auto model = train_markov(corpus, 1, 1e-9, 256);
    const auto dist = model.distribution(toks("a"));
    CHECK(dist['b'] > 0.999);
}

TEST_CASE("markov hand count: P(b|a) on 'aab' with alpha 1, V 2") {
    const std::vector<TokenId> corpus{0, 0, 1};  // "aab"
    const auto model = train_markov(corpus, 1, 1.0, 2);
    const auto dist = model.distribution(std::vector<TokenId>{0});
    CHECK(dist[1] == doctest::Approx(0.5));
    CHECK(dist[0] == doctest::Approx(0.5));
}

TEST_CASE("unseen or short contexts back off to uniform") {
    const std::vector<TokenId> corpus{0, 0, 1, 0};
    const auto model = train_markov(corpus, 2, 0.5, 4);
    const auto unseen = model.distribution(std::vector<TokenId>{3, 3});
    for (const double p : unseen) CHECK(p == doctest::Approx(0.25));
    const auto shorter = model.distribution(std::vector<TokenId>{0});
    for (const double p : shorter) CHECK(p == doctest::Approx(0.25));
}

TEST_CASE("markov distributions always normalize") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<TokenId> corpus;
        for (int i = 0; i < 200; ++i) corpus.push_back(static_cast<TokenId>(rng() % 16));
        const auto model = train_markov(corpus, 2, 0.3, 16);
        for (int probe = 0; probe < 20; ++probe) {
            std::vector<TokenId> ctx{static_cast<TokenId>(rng() % 16),
                                     static_cast<TokenId>(rng() % 16)};
            const auto dist = model.distribution(ctx);
            const double sum = std::accumulate(dist.begin(), dist.end(), 0.0);
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("train_markov rejects unusable corpora") {
    CHECK_THROWS_AS(train_markov({}, 1, 1.0, 4), std::invalid_argument);
    const std::vector<TokenId> tiny{1};
    CHECK_THROWS_AS(train_markov(tiny, 2, 1.0, 4), std::invalid_argument);
}

TEST_CASE("brute-force matcher on the three-pattern example") {
    const std::set<std::vector<TokenId>> patterns{toks("she"), toks("he"), toks("her")};
    const auto found = brute_force_match(patterns, toks("sherd"));
    const std::set<std::pair<std::vector<TokenId>, std::size_t>> expect{
        {toks("she"), 2}, {toks("he"), 2}, {toks("her"), 3}};
    CHECK(found == expect);

    CHECK(brute_force_match({}, toks("sherd")).empty());

    const std::set<std::vector<TokenId>> self{toks("abc")};
    const auto whole = brute_force_match(self, toks("abc"));
    REQUIRE(whole.size() == 1);
    CHECK(whole.begin()->second == 2);
}

TEST_CASE("greedy reference on a periodic corpus continues the period") {
    std::vector<TokenId> corpus;
    for (int i = 0; i < 30; ++i)
        for (const char c : {'a', 'b', 'c'}) corpus.push_back(static_cast<TokenId>(c));
    const auto model = train_markov(corpus, 2, 0.01, 256);
    const auto out = autoregressive_reference(model, toks("ab"), 9, DecodeMode::Greedy);
    CHECK(out == toks("cabcabcab"));
    CHECK(autoregressive_reference(model, toks("ab"), 0, DecodeMode::Greedy).empty());
}

TEST_CASE("sampled reference is seed-deterministic") {
    std::vector<TokenId> corpus;
    std::mt19937_64 rng(2);
    for (int i = 0; i < 100; ++i) corpus.push_back(static_cast<TokenId>(rng() % 8));
    const auto model = train_markov(corpus, 1, 0.5, 8);
    const std::vector<TokenId> prompt{1};
    const auto a = autoregressive_reference(model, prompt, 16, DecodeMode::Sampled, 77);
    const auto b = autoregressive_reference(model, prompt, 16, DecodeMode::Sampled, 77);
    const auto c = autoregressive_reference(model, prompt, 16, DecodeMode::Sampled, 78);
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("top_k_tokens orders by probability then id and drops zeros") {
    const std::vector<double> dist{0.0, 0.4, 0.1, 0.4, 0.0, 0.1};
    CHECK(top_k_tokens(dist, 3) == std::vector<TokenId>{1, 3, 2});
    CHECK(top_k_tokens(dist, 10) == std::vector<TokenId>{1, 3, 2, 5});
    const std::vector<double> zeros{0.0, 0.0};
    CHECK(top_k_tokens(zeros, 2).empty());
}
