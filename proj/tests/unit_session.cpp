#include <random>

#include "doctest.h"
#include "racer/session.hpp"

using namespace racer;

namespace {

std::vector<TokenId> random_corpus(std::mt19937_64& rng, int len, int vocab) {
    std::vector<TokenId> corpus;
    corpus.reserve(len);
    for (int i = 0; i < len; ++i) corpus.push_back(static_cast<TokenId>(rng() % vocab));
    return corpus;
}

SessionConfig small_config(Mode mode) {
    SessionConfig cfg;
    cfg.mode = mode;
    cfg.composer.capacity = 32;
    cfg.composer.retrieval_budget = 8;
    cfg.composer.root_breadth = 4;
    cfg.automaton_capacity = 512;
    cfg.ngram_len = 6;
    cfg.max_new_tokens = 48;
    return cfg;
}

}  // namespace

TEST_CASE("compute_mat is the arithmetic mean") {
    const std::vector<std::uint32_t> a{1, 1, 1};
    CHECK(compute_mat(a) == 1.0);
    const std::vector<std::uint32_t> b{3, 1, 2};
    CHECK(compute_mat(b) == 2.0);
    const std::vector<std::uint32_t> c{2, 2, 5, 1};
    CHECK(compute_mat(c) == 2.5);
    CHECK_THROWS_AS(compute_mat({}), std::invalid_argument);
}

TEST_CASE("autoregressive mode has MAT exactly 1") {
    std::mt19937_64 rng(1);
    const auto corpus = random_corpus(rng, 400, 8);
    const auto model = train_markov(corpus, 2, 0.3, 8);
    const std::vector<TokenId> prompt(corpus.begin(), corpus.begin() + 16);
    const auto report = run_session(small_config(Mode::Autoregressive), model, prompt);
    CHECK(report.mat == 1.0);
    CHECK(report.steps == report.tokens);
    CHECK(report.tokens >= 48);
}

TEST_CASE("greedy sessions are lossless in every mode") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 5; ++trial) {
        const auto corpus = random_corpus(rng, 600, 6);
        const auto model = train_markov(corpus, 2, 0.1, 6);
        const std::vector<TokenId> prompt(corpus.begin() + trial * 20,
                                          corpus.begin() + trial * 20 + 24);
        const auto reference =
            autoregressive_reference(model, prompt, 64, DecodeMode::Greedy);
        for (const Mode mode : {Mode::Racer, Mode::LogitsOnly, Mode::RetrievalOnly,
                                Mode::Half, Mode::Hard, Mode::Autoregressive}) {
            auto cfg = small_config(mode);
            cfg.max_new_tokens = 64;
            const auto report = run_session(cfg, model, prompt);
            REQUIRE(report.output.size() >= 64);
            const std::vector<TokenId> head(report.output.begin(),
                                            report.output.begin() + 64);
            CHECK(head == reference);
        }
    }
}

TEST_CASE("session accounting ties steps, tokens, and histograms together") {
    std::mt19937_64 rng(3);
    const auto corpus = random_corpus(rng, 500, 6);
    const auto model = train_markov(corpus, 2, 0.2, 6);
    const std::vector<TokenId> prompt(corpus.begin(), corpus.begin() + 20);
    const auto report = run_session(small_config(Mode::Racer), model, prompt);

    std::size_t hist_total = 0, hist_tokens = 0;
    for (const auto& [len, count] : report.accepted_len_hist) {
        hist_total += count;
        hist_tokens += static_cast<std::size_t>(len) * count;
    }
    CHECK(hist_total == report.steps);
    CHECK(hist_tokens == report.tokens);
    CHECK(report.mat == doctest::Approx(static_cast<double>(report.tokens) /
                                        static_cast<double>(report.steps)));
    CHECK(report.output.size() == report.tokens);
    CHECK(report.step_metrics.size() == report.steps);

    std::size_t no_root_tokens = 0;
    for (const auto& [len, count] : report.accepted_len_hist_no_root)
        no_root_tokens += static_cast<std::size_t>(len) * count;
    CHECK(no_root_tokens == report.tokens - report.steps);

    std::size_t origin_accepted = 0;
    for (const auto& s : report.step_metrics)
        origin_accepted += s.logits_accepted + s.retrieval_accepted;
    CHECK(origin_accepted == report.tokens - report.steps);
}

TEST_CASE("scripted sessions stop cleanly at the horizon") {
    std::vector<TokenId> script;
    for (int i = 0; i < 40; ++i) script.push_back(static_cast<TokenId>(i % 5));
    const ScriptedModel model(script, 8);
    const std::vector<TokenId> prompt(script.begin(), script.begin() + 10);
    auto cfg = small_config(Mode::Racer);
    cfg.max_new_tokens = 1000;  // the script runs out first
    const auto report = run_session(cfg, model, prompt);
    CHECK(report.tokens >= 30);
    CHECK(report.steps >= 1);
}

TEST_CASE("sampled sessions are seed-deterministic") {
    std::mt19937_64 rng(4);
    const auto corpus = random_corpus(rng, 400, 6);
    const auto model = train_markov(corpus, 1, 0.5, 6);
    const std::vector<TokenId> prompt(corpus.begin(), corpus.begin() + 12);
    auto cfg = small_config(Mode::Racer);
    cfg.decode = DecodeMode::Sampled;
    cfg.seed = 1234;
    const auto a = run_session(cfg, model, prompt);
    const auto b = run_session(cfg, model, prompt);
    CHECK(a.output == b.output);
    CHECK(a.mat == b.mat);
    CHECK(a.accepted_len_hist == b.accepted_len_hist);
    cfg.seed = 1235;
    const auto c = run_session(cfg, model, prompt);
    CHECK(a.output != c.output);
}

TEST_CASE("reports serialize deterministically") {
    SessionReport report;
    report.steps = 3;
    report.tokens = 4;
    report.mat = 4.0 / 3.0;
    report.accepted_len_hist = {{1, 2}, {2, 1}};
    report.accepted_len_hist_no_root = {{0, 2}, {1, 1}};
    report.accepted_rank_hist = {{0, 1}};

    const std::string json = emit_report(report, ReportFormat::Json);
    CHECK(json.find("\"accepted_len_hist\":{\"1\":2,\"2\":1}") != std::string::npos);
    CHECK(json.back() == '\n');

    const std::string csv = emit_report(report, ReportFormat::Csv);
    CHECK(csv.find("1:2|2:1") != std::string::npos);
    const auto count_commas = [](const std::string& s) {
        return std::count(s.begin(), s.end(), ',');
    };
    CHECK(count_commas(csv) == count_commas(csv_header()));
}

TEST_CASE("mode names round-trip") {
    for (const Mode mode : {Mode::Racer, Mode::LogitsOnly, Mode::RetrievalOnly,
                            Mode::Half, Mode::Hard, Mode::Autoregressive}) {
        CHECK(parse_mode(mode_name(mode)) == mode);
    }
    CHECK_THROWS_AS(parse_mode("bogus"), std::invalid_argument);
}

TEST_CASE("empty report serializes as zeroed aggregates") {
    const SessionReport report;
    const std::string json = emit_report(report, ReportFormat::Json);
    CHECK(json.find("\"steps\":0") != std::string::npos);
    CHECK(json.find("\"tokens\":0") != std::string::npos);
}
