#include "racer/models.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

#include "racer/verifier.hpp"

namespace racer {

ScriptedModel::ScriptedModel(std::vector<TokenId> expected_stream, std::uint32_t vocab_size)
    : expected_(std::move(expected_stream)), vocab_(vocab_size) {
    for (const TokenId t : expected_)
        if (t >= vocab_) throw std::invalid_argument("ScriptedModel: token out of vocab");
}

std::vector<double> ScriptedModel::distribution(std::span<const TokenId> prefix) const {
    std::vector<double> dist(vocab_, 0.0);
    if (prefix.size() < expected_.size()) {
        dist[expected_[prefix.size()]] = 1.0;
    } else {
        std::fill(dist.begin(), dist.end(), 1.0 / vocab_);
    }
    return dist;
}

MarkovModel::MarkovModel(int order, double alpha, std::uint32_t vocab_size)
    : order_(order), alpha_(alpha), vocab_(vocab_size) {
    if (order_ < 0) throw std::invalid_argument("MarkovModel: order must be >= 0");
    if (alpha_ <= 0.0) throw std::invalid_argument("MarkovModel: alpha must be > 0");
    if (vocab_ < 1) throw std::invalid_argument("MarkovModel: empty vocabulary");
}

std::string MarkovModel::key(std::span<const TokenId> context) {
    std::string k(context.size() * sizeof(TokenId), '\0');
    if (!context.empty()) std::memcpy(k.data(), context.data(), k.size());
    return k;
}

void MarkovModel::observe(std::span<const TokenId> context, TokenId next) {
    if (static_cast<int>(context.size()) != order_)
        throw std::invalid_argument("observe: context length must equal the order");
    auto& row = counts_[key(context)];
    if (row.empty()) row.assign(vocab_, 0);
    ++row[next];
}

std::vector<double> MarkovModel::distribution(std::span<const TokenId> prefix) const {
    std::vector<double> dist(vocab_, 1.0 / vocab_);
    if (static_cast<int>(prefix.size()) < order_) return dist;
    const auto context = prefix.subspan(prefix.size() - order_);
    auto it = counts_.find(key(context));
    if (it == counts_.end()) return dist;
    const auto& row = it->second;
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    const double denom = total + alpha_ * vocab_;
    for (std::uint32_t t = 0; t < vocab_; ++t) dist[t] = (row[t] + alpha_) / denom;
    return dist;
}

MarkovModel train_markov(std::span<const TokenId> corpus, int order, double alpha,
                         std::uint32_t vocab_size) {
    if (corpus.empty()) throw std::invalid_argument("train_markov: empty corpus");
    if (static_cast<int>(corpus.size()) <= order)
        throw std::invalid_argument("train_markov: corpus shorter than the order");
    MarkovModel model(order, alpha, vocab_size);
    for (std::size_t i = order; i < corpus.size(); ++i)
        model.observe(corpus.subspan(i - order, order), corpus[i]);
    return model;
}

std::set<std::pair<std::vector<TokenId>, std::size_t>> brute_force_match(
    const std::set<std::vector<TokenId>>& patterns, std::span<const TokenId> text) {
    std::set<std::pair<std::vector<TokenId>, std::size_t>> matches;
    std::size_t max_len = 0;
    for (const auto& p : patterns) max_len = std::max(max_len, p.size());
    std::vector<TokenId> window;
    for (std::size_t end = 0; end < text.size(); ++end) {
        for (std::size_t len = 1; len <= max_len && len <= end + 1; ++len) {
            window.assign(text.begin() + (end + 1 - len), text.begin() + end + 1);
            if (patterns.count(window)) matches.emplace(window, end);
        }
    }
    return matches;
}

std::vector<TokenId> autoregressive_reference(const TargetModel& model,
                                              std::span<const TokenId> prompt,
                                              std::size_t length, DecodeMode mode,
                                              std::uint64_t rng_seed) {
    std::mt19937_64 rng(rng_seed);
    std::vector<TokenId> sequence(prompt.begin(), prompt.end());
    std::vector<TokenId> output;
    output.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
        const auto dist = model.distribution(sequence);
        const TokenId t = mode == DecodeMode::Greedy ? argmax_token(dist)
                                                     : sample_token(dist, rng);
        sequence.push_back(t);
        output.push_back(t);
    }
    return output;
}

std::vector<TokenId> top_k_tokens(std::span<const double> dist, int k) {
    std::vector<TokenId> ids(dist.size());
    std::iota(ids.begin(), ids.end(), 0);
    const auto cmp = [&dist](TokenId a, TokenId b) {
        if (dist[a] != dist[b]) return dist[a] > dist[b];
        return a < b;
    };
    const std::size_t take = std::min<std::size_t>(k, ids.size());
    std::partial_sort(ids.begin(), ids.begin() + take, ids.end(), cmp);
    ids.resize(take);
    while (!ids.empty() && dist[ids.back()] <= 0.0) ids.pop_back();
    return ids;
}

}  // namespace racer
