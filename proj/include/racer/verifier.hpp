#pragma once

#include <random>
#include <span>
#include <vector>

#include "racer/models.hpp"
#include "racer/types.hpp"

namespace racer {

// Acceptance rule: 1 if p >= q, else p/q. q must be positive.
double acceptance_prob(double p_at_token, double q_at_token);

// Greedy verification: walk from the root, accepting the child that carries
// the model's argmax after the accepted path; the argmax at the stopping
// point becomes the bonus token.
VerifyOutcome verify_greedy(const DraftTree& tree, const TargetModel& model,
                            std::span<const TokenId> prefix);

// Sampled verification with deterministic (point-mass) drafts: sample fresh
// from the model at each accepted node and accept the child carrying that
// sample. Committed sequences are distributed exactly as direct
// autoregressive sampling.
VerifyOutcome verify_sampled(const DraftTree& tree, const TargetModel& model,
                             std::span<const TokenId> prefix, std::mt19937_64& rng);

TokenId argmax_token(std::span<const double> dist);
TokenId sample_token(std::span<const double> dist, std::mt19937_64& rng);

}  // namespace racer
