#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "racer/types.hpp"

namespace racer {

struct MatchState {
    std::uint32_t slot = 0;        // 0 = root
    std::uint64_t generation = 0;  // must match the slot's generation to be valid
    int matched_depth = 0;
};

struct RetrievalCandidate {
    std::vector<TokenId> continuation;  // tokens after the matched state
    std::uint64_t pooled_freq = 0;
};

// Capacity-bounded Aho-Corasick automaton over token n-grams with LRU leaf
// eviction. Failure links are rebuilt lazily; between rebuilds newly touched
// structure behaves as a plain trie. Slots carry generation counters so that
// references into recycled slots resolve to the root instead of dangling.
class Automaton {
public:
    Automaton(std::uint32_t capacity, int ngram_len);

    [[nodiscard]] std::uint32_t capacity() const { return capacity_; }
    [[nodiscard]] int ngram_len() const { return ngram_len_; }
    [[nodiscard]] std::size_t node_count() const { return allocated_; }
    [[nodiscard]] std::uint64_t eviction_count() const { return evictions_; }
    [[nodiscard]] std::uint64_t truncated_inserts() const { return truncated_inserts_; }

    void touch(std::uint32_t slot);
    // Touches `slot` and every ancestor up to (excluding) the root, deepest
    // first, so each ancestor ends at least as recent as its descendant.
    void touch_prefix(std::uint32_t slot);

    MatchState trans_tokens(std::span<const TokenId> tokens);
    void insert_tokens(std::span<const TokenId> tokens, std::uint64_t freq_delta);
    MatchState trans_tokens(std::initializer_list<TokenId> tokens) {
        return trans_tokens(std::span<const TokenId>(tokens.begin(), tokens.size()));
    }
    void insert_tokens(std::initializer_list<TokenId> tokens, std::uint64_t freq_delta) {
        insert_tokens(std::span<const TokenId>(tokens.begin(), tokens.size()), freq_delta);
    }
    void rebuild_failure_links();

    // Borders are the current state plus its failure-chain ancestors; the
    // deepest border must have matched depth >= 2 or the result is empty.
    // Continuations are pooled across borders by token sequence (frequencies
    // summed) and the top `max_candidates` are selected by pooled frequency,
    // ties broken by shorter continuation then lexicographically smaller
    // tokens. The selected set is prefix-closed. With `depth_constrained`
    // only the deepest border contributes.
    [[nodiscard]] std::vector<RetrievalCandidate> expand_candidates(
        const MatchState& state, int max_candidates, bool depth_constrained) const;

    [[nodiscard]] MatchState state() const;
    void reset_state();

    // Introspection for tests and the debug dump.
    [[nodiscard]] std::vector<TokenId> path_of(std::uint32_t slot) const;
    [[nodiscard]] std::vector<std::uint32_t> lru_front_to_back() const;
    [[nodiscard]] bool is_leaf(std::uint32_t slot) const;
    [[nodiscard]] int depth_of(std::uint32_t slot) const;
    [[nodiscard]] std::uint64_t freq_of(std::uint32_t slot) const;
    [[nodiscard]] std::uint32_t fail_of(std::uint32_t slot) const;  // generation-checked
    [[nodiscard]] std::vector<std::uint32_t> allocated_slots() const;
    [[nodiscard]] std::optional<std::uint32_t> child_of(std::uint32_t slot,
                                                        TokenId token) const;

    // One node per line: path tokens, freq, fail path, recency rank.
    [[nodiscard]] std::string debug_dump() const;

    // Throws std::logic_error when an LRU/trie invariant is violated.
    void self_check() const;

private:
    static constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
    static constexpr std::uint32_t kRoot = 0;

    struct Node {
        std::uint32_t parent = kNone;
        TokenId token = 0;
        int depth = 0;
        std::uint64_t generation = 0;
        std::uint64_t freq = 0;
        std::uint32_t fail_slot = kRoot;
        std::uint64_t fail_generation = 0;
        std::unordered_map<TokenId, std::uint32_t> children;
        std::uint32_t lru_prev = kNone;
        std::uint32_t lru_next = kNone;
        bool allocated = false;
    };

    void lru_unlink(std::uint32_t slot);
    void lru_push_front(std::uint32_t slot);
    std::uint32_t allocate_slot();  // kNone when only non-leaf slots remain
    [[nodiscard]] std::uint32_t resolve_state(const MatchState& s) const;
    void set_fail(std::uint32_t slot, std::uint32_t target);

    std::uint32_t capacity_;
    int ngram_len_;
    std::vector<Node> nodes_;          // nodes_[0] = root, always allocated
    std::vector<std::uint32_t> free_;  // unallocated slots
    std::uint32_t lru_head_ = kNone;   // most recent
    std::uint32_t lru_tail_ = kNone;   // least recent
    std::size_t allocated_ = 0;        // non-root allocated slots
    std::uint64_t generation_counter_ = 0;
    std::uint64_t evictions_ = 0;
    std::uint64_t truncated_inserts_ = 0;
    std::uint32_t cur_slot_ = kRoot;
    std::uint64_t cur_generation_ = 0;
};

}  // namespace racer
