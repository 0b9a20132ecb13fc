#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "racer/types.hpp"

namespace racer {

// Any source of next-token distributions over a finite vocabulary; the
// oracle stand-in for a target model. Must be a deterministic function of
// the prefix.
class TargetModel {
public:
    virtual ~TargetModel() = default;
    [[nodiscard]] virtual std::uint32_t vocab_size() const = 0;
    [[nodiscard]] virtual std::vector<double> distribution(
        std::span<const TokenId> prefix) const = 0;
    // Total sequence length after which the model has nothing scripted left;
    // sessions stop cleanly at this horizon. Unbounded by default.
    [[nodiscard]] virtual std::optional<std::size_t> horizon() const { return std::nullopt; }
};

// Emits one-hot distributions following a fixed expected stream (indexed by
// prefix length), uniform after exhaustion.
class ScriptedModel : public TargetModel {
public:
    ScriptedModel(std::vector<TokenId> expected_stream, std::uint32_t vocab_size);
    [[nodiscard]] std::uint32_t vocab_size() const override { return vocab_; }
    [[nodiscard]] std::vector<double> distribution(
        std::span<const TokenId> prefix) const override;
    [[nodiscard]] std::optional<std::size_t> horizon() const override {
        return expected_.size();
    }

private:
    std::vector<TokenId> expected_;
    std::uint32_t vocab_;
};

// Order-m count model with additive smoothing; unseen contexts back off to
// the uniform distribution.
class MarkovModel : public TargetModel {
public:
    MarkovModel(int order, double alpha, std::uint32_t vocab_size);
    [[nodiscard]] std::uint32_t vocab_size() const override { return vocab_; }
    [[nodiscard]] std::vector<double> distribution(
        std::span<const TokenId> prefix) const override;
    void observe(std::span<const TokenId> context, TokenId next);
    [[nodiscard]] int order() const { return order_; }

private:
    [[nodiscard]] static std::string key(std::span<const TokenId> context);
    int order_;
    double alpha_;
    std::uint32_t vocab_;
    std::unordered_map<std::string, std::vector<std::uint32_t>> counts_;
};

MarkovModel train_markov(std::span<const TokenId> corpus, int order, double alpha,
                         std::uint32_t vocab_size = 256);

// Exhaustive all-substrings matcher; ground truth for automaton equivalence.
// Returns (pattern, 0-based end index) pairs.
std::set<std::pair<std::vector<TokenId>, std::size_t>> brute_force_match(
    const std::set<std::vector<TokenId>>& patterns, std::span<const TokenId> text);

enum class DecodeMode { Greedy, Sampled };

// Plain one-token-at-a-time decoding; the equivalence oracle for
// losslessness tests.
std::vector<TokenId> autoregressive_reference(const TargetModel& model,
                                              std::span<const TokenId> prompt,
                                              std::size_t length, DecodeMode mode,
                                              std::uint64_t rng_seed = 0);

// Successor tokens ordered by probability (ties: lower id), zero-probability
// tokens dropped, at most k entries.
std::vector<TokenId> top_k_tokens(std::span<const double> dist, int k);

}  // namespace racer
