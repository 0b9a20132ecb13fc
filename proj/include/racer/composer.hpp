#pragma once

#include "racer/automaton.hpp"
#include "racer/logits_tree.hpp"
#include "racer/types.hpp"

namespace racer {

struct ComposerConfig {
    std::uint32_t capacity = 64;       // total draft slots C, root included
    std::uint32_t retrieval_budget = 16;  // R, at most C - 1
    int root_breadth = 8;
    bool depth_constrained = false;
    bool use_retrieval = true;
    bool use_logits = true;

    void validate() const {
        if (capacity < 1) throw std::invalid_argument("ComposerConfig: capacity < 1");
        if (retrieval_budget + 1 > capacity)
            throw std::invalid_argument("ComposerConfig: R + 1 must be <= C");
    }
};

struct ComposedDraft {
    DraftTree tree;
    TreeLayout layout;
};

// Retrieval candidates first, remaining capacity to the logits tree, merged
// by trie union. Colliding (parent, token) nodes keep the retrieval origin
// and the logits breadth annotation.
ComposedDraft compose(TokenId next_token, const Automaton& automaton,
                      const MatchState& state, const TopKAdjacency& adj,
                      const ComposerConfig& cfg);

}  // namespace racer
