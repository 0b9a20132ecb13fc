#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "racer/composer.hpp"
#include "racer/models.hpp"
#include "racer/verifier.hpp"

namespace racer {

enum class Mode { Racer, LogitsOnly, RetrievalOnly, Half, Hard, Autoregressive };

struct RebuildPolicy {
    bool after_prefill_only = true;
    int every_n = 20;                // used when after_prefill_only is false
};

struct SessionConfig {
    Mode mode = Mode::Racer;
    ComposerConfig composer;
    std::uint32_t automaton_capacity = 10000;
    int ngram_len = 10;
    RebuildPolicy rebuild;
    DecodeMode decode = DecodeMode::Greedy;
    std::uint64_t seed = 0;
    std::size_t max_new_tokens = 1024;
    // Scan the prompt once to seed the adjacency with per-position top-k
    // lists; off to study cold starts.
    bool warm_adjacency = true;
};

struct StepMetrics {
    std::uint32_t accepted_len = 0;  // includes the committed root token
    std::vector<int> accepted_ranks;
    std::uint32_t logits_accepted = 0;
    std::uint32_t retrieval_accepted = 0;
};

struct SessionReport {
    std::size_t steps = 0;
    std::size_t tokens = 0;  // sum of accepted_len over steps
    double mat = 0.0;
    std::map<std::uint32_t, std::size_t> accepted_len_hist;          // root included
    std::map<std::uint32_t, std::size_t> accepted_len_hist_no_root;  // root excluded
    std::map<int, std::size_t> accepted_rank_hist;
    std::size_t logits_accepted = 0;
    std::size_t retrieval_accepted = 0;
    std::uint32_t max_tree_depth = 0;
    // Time breakdown, microseconds.
    std::int64_t draft_us = 0;
    std::int64_t forward_us = 0;
    std::int64_t logits_update_us = 0;
    std::int64_t retrieval_update_us = 0;
    std::vector<TokenId> output;  // committed tokens beyond the prompt
    std::vector<StepMetrics> step_metrics;
};

SessionReport run_session(const SessionConfig& cfg, const TargetModel& model,
                          std::span<const TokenId> prompt);

double compute_mat(std::span<const std::uint32_t> step_lengths);

enum class ReportFormat { Json, Csv };

// One newline-terminated record per session. Deterministic field order;
// timing fields are the only run-to-run variant part.
std::string emit_report(const SessionReport& report, ReportFormat format);
std::string csv_header();

Mode parse_mode(const std::string& name);
std::string mode_name(Mode mode);

}  // namespace racer
