#include "racer/session.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace racer {

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_us(Clock::time_point start) {
    return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - start)
        .count();
}

ComposerConfig effective_composer(const SessionConfig& cfg, const Automaton& automaton) {
    ComposerConfig c = cfg.composer;
    switch (cfg.mode) {
        case Mode::Racer:
            break;
        case Mode::LogitsOnly:
            c.use_retrieval = false;
            c.retrieval_budget = 0;
            break;
        case Mode::RetrievalOnly:
            c.use_logits = false;
            c.retrieval_budget = c.capacity - 1;
            break;
        case Mode::Half:
            c.retrieval_budget = c.capacity / 2;
            break;
        case Mode::Hard:
            // Fallback switching: retrieval exclusively when a usable border
            // exists, logits exclusively otherwise.
            if (automaton.state().matched_depth >= 2) {
                c.use_logits = false;
                c.retrieval_budget = c.capacity - 1;
            } else {
                c.use_retrieval = false;
                c.retrieval_budget = 0;
            }
            break;
        case Mode::Autoregressive:
            c.use_retrieval = false;
            c.use_logits = false;
            c.retrieval_budget = 0;
            break;
    }
    return c;
}

}  // namespace

double compute_mat(std::span<const std::uint32_t> step_lengths) {
    if (step_lengths.empty()) throw std::invalid_argument("compute_mat: no steps");
    const double total = std::accumulate(step_lengths.begin(), step_lengths.end(), 0.0);
    return total / static_cast<double>(step_lengths.size());
}

SessionReport run_session(const SessionConfig& cfg, const TargetModel& model,
                          std::span<const TokenId> prompt) {
    cfg.composer.validate();
    if (cfg.mode == Mode::RetrievalOnly && cfg.composer.capacity < 2)
        throw std::invalid_argument("run_session: retrieval_only needs capacity >= 2");

    const int k = cfg.composer.root_breadth;
    TopKAdjacency adjacency(model.vocab_size(), k);
    Automaton automaton(cfg.automaton_capacity, cfg.ngram_len);
    std::mt19937_64 rng(cfg.seed);
    SessionReport report;

    std::vector<TokenId> committed(prompt.begin(), prompt.end());
    const bool uses_automaton =
        cfg.mode != Mode::Autoregressive && cfg.mode != Mode::LogitsOnly;
    const bool uses_adjacency =
        cfg.mode != Mode::Autoregressive && cfg.mode != Mode::RetrievalOnly;

    // Prefill: stream the prompt through the automaton, insert every n-gram
    // window ending at each position, then rebuild failure links once.
    {
        const auto t0 = Clock::now();
        if (uses_automaton) {
            for (std::size_t i = 0; i < committed.size(); ++i) {
                automaton.trans_tokens(std::span(&committed[i], 1));
                const std::size_t len =
                    std::min<std::size_t>(cfg.ngram_len, i + 1);
                automaton.insert_tokens(
                    std::span(committed.data() + i + 1 - len, len), 1);
            }
            automaton.rebuild_failure_links();
        }
        report.retrieval_update_us += elapsed_us(t0);
    }
    if (uses_adjacency && cfg.warm_adjacency) {
        const auto t0 = Clock::now();
        for (std::size_t i = 0; i < committed.size(); ++i) {
            const auto dist =
                model.distribution(std::span(committed.data(), i + 1));
            adjacency.refresh_one(committed[i], top_k_tokens(dist, k));
        }
        report.logits_update_us += elapsed_us(t0);
    }

    // The first root token comes from the model at the bare prompt.
    std::vector<TokenId> prefix = committed;
    TokenId root_token;
    {
        const auto t0 = Clock::now();
        const auto dist = model.distribution(prefix);
        root_token = cfg.decode == DecodeMode::Greedy ? argmax_token(dist)
                                                      : sample_token(dist, rng);
        report.forward_us += elapsed_us(t0);
    }

    while (report.tokens < cfg.max_new_tokens) {
        if (model.horizon() && prefix.size() + 1 > *model.horizon()) break;

        const auto t_draft = Clock::now();
        if (uses_automaton) automaton.trans_tokens(std::span(&root_token, 1));
        const ComposedDraft draft = compose(root_token, automaton, automaton.state(),
                                            adjacency, effective_composer(cfg, automaton));
        report.max_tree_depth = std::max(report.max_tree_depth, draft.tree.max_depth());
        report.draft_us += elapsed_us(t_draft);

        const auto t_fwd = Clock::now();
        const VerifyOutcome outcome =
            cfg.decode == DecodeMode::Greedy
                ? verify_greedy(draft.tree, model, prefix)
                : verify_sampled(draft.tree, model, prefix, rng);
        report.forward_us += elapsed_us(t_fwd);

        StepMetrics step;
        step.accepted_len = outcome.accepted_count;
        step.accepted_ranks = outcome.accepted_ranks;
        std::vector<TokenId> accepted;
        accepted.reserve(outcome.accepted_count);
        for (const std::uint32_t id : outcome.accepted_node_ids) {
            const auto& node = draft.tree.nodes[id];
            accepted.push_back(node.token);
            if (node.origin == NodeOrigin::Logits) ++step.logits_accepted;
            if (node.origin == NodeOrigin::Retrieval) ++step.retrieval_accepted;
        }
        const std::size_t old_size = prefix.size();
        prefix.insert(prefix.end(), accepted.begin(), accepted.end());
        report.output.insert(report.output.end(), accepted.begin(), accepted.end());

        // Retrieval update: consume the accepted tokens past the root and
        // insert every window ending in the newly committed span.
        {
            const auto t0 = Clock::now();
            if (uses_automaton) {
                if (accepted.size() > 1)
                    automaton.trans_tokens(
                        std::span(accepted.data() + 1, accepted.size() - 1));
                for (std::size_t p = old_size; p < prefix.size(); ++p) {
                    const std::size_t len =
                        std::min<std::size_t>(cfg.ngram_len, p + 1);
                    automaton.insert_tokens(
                        std::span(prefix.data() + p + 1 - len, len), 1);
                }
                if (!cfg.rebuild.after_prefill_only &&
                    (report.steps + 1) % cfg.rebuild.every_n == 0) {
                    automaton.rebuild_failure_links();
                }
            }
            report.retrieval_update_us += elapsed_us(t0);
        }

        // Logits update: reuse the distributions of every draft node seen
        // this step, rejected ones included, keyed by the node's token.
        if (uses_adjacency) {
            const auto t0 = Clock::now();
            std::vector<TokenId> walk(prefix.begin(), prefix.begin() + old_size);
            const std::size_t base_len = walk.size();
            // Sequence-position order: shallower nodes first, last write wins.
            std::vector<std::uint32_t> order(draft.tree.nodes.size());
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&draft](std::uint32_t a, std::uint32_t b) {
                                 return draft.tree.nodes[a].depth <
                                        draft.tree.nodes[b].depth;
                             });
            for (const std::uint32_t id : order) {
                const auto& node = draft.tree.nodes[id];
                // Rebuild the root-to-node token path on top of the prefix.
                walk.resize(base_len);
                std::vector<TokenId> path;
                for (std::uint32_t v = id;;) {
                    path.push_back(draft.tree.nodes[v].token);
                    if (draft.tree.nodes[v].parent_id == kRootParent) break;
                    v = draft.tree.nodes[v].parent_id;
                }
                walk.insert(walk.end(), path.rbegin(), path.rend());
                const auto dist = model.distribution(walk);
                adjacency.refresh_one(node.token, top_k_tokens(dist, k));
            }
            report.logits_update_us += elapsed_us(t0);
        }

        report.step_metrics.push_back(step);
        report.tokens += step.accepted_len;
        report.logits_accepted += step.logits_accepted;
        report.retrieval_accepted += step.retrieval_accepted;
        ++report.accepted_len_hist[step.accepted_len];
        ++report.accepted_len_hist_no_root[step.accepted_len - 1];
        for (const int r : step.accepted_ranks) ++report.accepted_rank_hist[r];
        ++report.steps;
        root_token = outcome.bonus_token;
    }

    if (report.steps > 0) {
        std::vector<std::uint32_t> lens;
        lens.reserve(report.steps);
        for (const auto& s : report.step_metrics) lens.push_back(s.accepted_len);
        report.mat = compute_mat(lens);
    }
    return report;
}

namespace {

nlohmann::ordered_json hist_json(const std::map<std::uint32_t, std::size_t>& hist) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [bucket, count] : hist) j[std::to_string(bucket)] = count;
    return j;
}

template <typename Hist>
std::string hist_csv(const Hist& hist) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [bucket, count] : hist) {
        if (!first) os << '|';
        first = false;
        os << bucket << ':' << count;
    }
    return os.str();
}

}  // namespace

std::string emit_report(const SessionReport& report, ReportFormat format) {
    if (format == ReportFormat::Json) {
        nlohmann::ordered_json j;
        j["steps"] = report.steps;
        j["tokens"] = report.tokens;
        j["mat"] = report.mat;
        j["accepted_len_hist"] = hist_json(report.accepted_len_hist);
        j["accepted_len_hist_no_root"] = hist_json(report.accepted_len_hist_no_root);
        nlohmann::ordered_json ranks = nlohmann::ordered_json::object();
        for (const auto& [rank, count] : report.accepted_rank_hist)
            ranks[std::to_string(rank)] = count;
        j["accepted_rank_hist"] = ranks;
        j["logits_accepted"] = report.logits_accepted;
        j["retrieval_accepted"] = report.retrieval_accepted;
        j["max_tree_depth"] = report.max_tree_depth;
        j["timing_us"] = {{"draft", report.draft_us},
                          {"model_forward", report.forward_us},
                          {"logits_update", report.logits_update_us},
                          {"retrieval_update", report.retrieval_update_us}};
        return j.dump() + "\n";
    }
    std::ostringstream os;
    os << report.steps << ',' << report.tokens << ',' << report.mat << ','
       << hist_csv(report.accepted_len_hist) << ','
       << hist_csv(report.accepted_len_hist_no_root) << ','
       << hist_csv(report.accepted_rank_hist) << ',' << report.logits_accepted << ','
       << report.retrieval_accepted << ',' << report.max_tree_depth << ','
       << report.draft_us << ',' << report.forward_us << ','
       << report.logits_update_us << ',' << report.retrieval_update_us << '\n';
    return os.str();
}

std::string csv_header() {
    return "steps,tokens,mat,accepted_len_hist,accepted_len_hist_no_root,"
           "accepted_rank_hist,logits_accepted,retrieval_accepted,max_tree_depth,"
           "draft_us,model_forward_us,logits_update_us,retrieval_update_us\n";
}

Mode parse_mode(const std::string& name) {
    if (name == "racer") return Mode::Racer;
    if (name == "logits_only") return Mode::LogitsOnly;
    if (name == "retrieval_only") return Mode::RetrievalOnly;
    if (name == "half") return Mode::Half;
    if (name == "hard") return Mode::Hard;
    if (name == "autoregressive") return Mode::Autoregressive;
    throw std::invalid_argument("unknown mode: " + name);
}

std::string mode_name(Mode mode) {
    switch (mode) {
        case Mode::Racer: return "racer";
        case Mode::LogitsOnly: return "logits_only";
        case Mode::RetrievalOnly: return "retrieval_only";
        case Mode::Half: return "half";
        case Mode::Hard: return "hard";
        case Mode::Autoregressive: return "autoregressive";
    }
    return "unknown";
}

}  // namespace racer
