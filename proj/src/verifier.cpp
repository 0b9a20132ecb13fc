#include "racer/verifier.hpp"

#include <unordered_map>

namespace racer {

double acceptance_prob(double p_at_token, double q_at_token) {
    if (p_at_token < 0.0 || p_at_token > 1.0 || q_at_token < 0.0 || q_at_token > 1.0)
        throw std::invalid_argument("acceptance_prob: probabilities must be in [0,1]");
    if (q_at_token <= 0.0)
        throw std::domain_error("acceptance_prob: draft could not have proposed the token");
    if (p_at_token >= q_at_token) return 1.0;
    return p_at_token / q_at_token;
}

TokenId argmax_token(std::span<const double> dist) {
    TokenId best = 0;
    for (TokenId t = 1; t < dist.size(); ++t)
        if (dist[t] > dist[best]) best = t;
    return best;
}

TokenId sample_token(std::span<const double> dist, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double r = unif(rng);
    double acc = 0.0;
    TokenId last_positive = 0;
    for (TokenId t = 0; t < dist.size(); ++t) {
        if (dist[t] <= 0.0) continue;
        acc += dist[t];
        last_positive = t;
        if (r < acc) return t;
    }
    return last_positive;  // guard against rounding at the top of the CDF
}

namespace {

// Child lookup tables for O(1) membership tests while walking.
std::unordered_map<std::uint64_t, std::uint32_t> edge_index(const DraftTree& tree) {
    std::unordered_map<std::uint64_t, std::uint32_t> edges;
    edges.reserve(tree.nodes.size());
    for (std::uint32_t i = 1; i < tree.nodes.size(); ++i) {
        const auto& n = tree.nodes[i];
        edges.emplace((static_cast<std::uint64_t>(n.parent_id) << 32) | n.token, i);
    }
    return edges;
}

template <typename NextToken>
VerifyOutcome verify_walk(const DraftTree& tree, std::vector<TokenId>& sequence,
                          NextToken&& next_token) {
    const auto edges = edge_index(tree);
    VerifyOutcome outcome;
    std::uint32_t cur = 0;
    outcome.accepted_node_ids.push_back(0);
    for (;;) {
        sequence.push_back(tree.nodes[cur].token);
        const TokenId x = next_token(sequence);
        const auto it =
            edges.find((static_cast<std::uint64_t>(cur) << 32) | x);
        if (it == edges.end()) {
            outcome.bonus_token = x;
            break;
        }
        cur = it->second;
        outcome.accepted_node_ids.push_back(cur);
        if (tree.nodes[cur].origin == NodeOrigin::Logits)
            outcome.accepted_ranks.push_back(tree.nodes[cur].rank);
    }
    outcome.accepted_count = static_cast<std::uint32_t>(outcome.accepted_node_ids.size());
    return outcome;
}

}  // namespace

VerifyOutcome verify_greedy(const DraftTree& tree, const TargetModel& model,
                            std::span<const TokenId> prefix) {
    if (tree.empty()) throw std::invalid_argument("verify_greedy: empty tree");
    std::vector<TokenId> sequence(prefix.begin(), prefix.end());
    if (tree.nodes[0].token != argmax_token(model.distribution(sequence)))
        throw std::logic_error("verify_greedy: root token is not the model argmax");
    return verify_walk(tree, sequence, [&model](const std::vector<TokenId>& seq) {
        return argmax_token(model.distribution(seq));
    });
}

VerifyOutcome verify_sampled(const DraftTree& tree, const TargetModel& model,
                             std::span<const TokenId> prefix, std::mt19937_64& rng) {
    if (tree.empty()) throw std::invalid_argument("verify_sampled: empty tree");
    std::vector<TokenId> sequence(prefix.begin(), prefix.end());
    return verify_walk(tree, sequence, [&model, &rng](const std::vector<TokenId>& seq) {
        return sample_token(model.distribution(seq), rng);
    });
}

}  // namespace racer
