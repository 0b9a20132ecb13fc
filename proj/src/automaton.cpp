#include "racer/automaton.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <queue>
#include <sstream>

namespace racer {

Automaton::Automaton(std::uint32_t capacity, int ngram_len)
    : capacity_(capacity), ngram_len_(ngram_len) {
    if (capacity_ < 1) throw std::invalid_argument("Automaton: capacity must be >= 1");
    if (ngram_len_ < 1) throw std::invalid_argument("Automaton: ngram_len must be >= 1");
    nodes_.resize(capacity_ + 1);
    nodes_[kRoot].allocated = true;
    nodes_[kRoot].depth = 0;
    free_.reserve(capacity_);
    for (std::uint32_t s = capacity_; s >= 1; --s) free_.push_back(s);
}

void Automaton::lru_unlink(std::uint32_t slot) {
    Node& n = nodes_[slot];
    if (n.lru_prev != kNone)
        nodes_[n.lru_prev].lru_next = n.lru_next;
    else if (lru_head_ == slot)
        lru_head_ = n.lru_next;
    if (n.lru_next != kNone)
        nodes_[n.lru_next].lru_prev = n.lru_prev;
    else if (lru_tail_ == slot)
        lru_tail_ = n.lru_prev;
    n.lru_prev = n.lru_next = kNone;
}

void Automaton::lru_push_front(std::uint32_t slot) {
    Node& n = nodes_[slot];
    n.lru_prev = kNone;
    n.lru_next = lru_head_;
    if (lru_head_ != kNone) nodes_[lru_head_].lru_prev = slot;
    lru_head_ = slot;
    if (lru_tail_ == kNone) lru_tail_ = slot;
}

void Automaton::touch(std::uint32_t slot) {
    if (slot == kRoot) return;
    if (!nodes_[slot].allocated) throw std::invalid_argument("touch: slot not allocated");
    if (lru_head_ == slot) return;
    lru_unlink(slot);
    lru_push_front(slot);
}

void Automaton::touch_prefix(std::uint32_t slot) {
    for (std::uint32_t v = slot; v != kRoot; v = nodes_[v].parent) touch(v);
}

std::uint32_t Automaton::resolve_state(const MatchState& s) const {
    if (s.slot > capacity_) return kRoot;
    const Node& n = nodes_[s.slot];
    if (!n.allocated || n.generation != s.generation) return kRoot;
    return s.slot;
}

std::uint32_t Automaton::fail_of(std::uint32_t slot) const {
    const Node& n = nodes_[slot];
    const Node& f = nodes_[n.fail_slot];
    if (!f.allocated || f.generation != n.fail_generation) return kRoot;
    return n.fail_slot;
}

void Automaton::set_fail(std::uint32_t slot, std::uint32_t target) {
    nodes_[slot].fail_slot = target;
    nodes_[slot].fail_generation = nodes_[target].generation;
}

std::optional<std::uint32_t> Automaton::child_of(std::uint32_t slot, TokenId token) const {
    const auto& ch = nodes_[slot].children;
    auto it = ch.find(token);
    if (it == ch.end()) return std::nullopt;
    return it->second;
}

MatchState Automaton::trans_tokens(std::span<const TokenId> tokens) {
    std::uint32_t u = resolve_state(state());
    for (const TokenId t : tokens) {
        touch_prefix(u);
        while (u != kRoot && !child_of(u, t)) u = fail_of(u);
        touch_prefix(u);
        if (auto c = child_of(u, t))
            u = *c;
        else
            u = kRoot;
    }
    touch_prefix(u);
    cur_slot_ = u;
    cur_generation_ = nodes_[u].generation;
    return state();
}

std::uint32_t Automaton::allocate_slot() {
    if (!free_.empty()) {
        const std::uint32_t s = free_.back();
        free_.pop_back();
        return s;
    }
    const std::uint32_t victim = lru_tail_;
    if (victim == kNone) return kNone;
    Node& v = nodes_[victim];
    if (!v.children.empty()) return kNone;  // never recycle an interior node
    ++evictions_;
    nodes_[v.parent].children.erase(v.token);
    lru_unlink(victim);
    --allocated_;
    v.allocated = false;
    v.freq = 0;
    v.fail_slot = kRoot;
    v.fail_generation = 0;
    return victim;
}

void Automaton::insert_tokens(std::span<const TokenId> tokens, std::uint64_t freq_delta) {
    if (static_cast<int>(tokens.size()) > ngram_len_)
        throw std::invalid_argument("insert_tokens: n-gram longer than configured n");
    std::uint32_t u = kRoot;
    nodes_[kRoot].freq += freq_delta;
    for (const TokenId t : tokens) {
        touch(u);
        auto c = child_of(u, t);
        if (!c) {
            if (free_.empty() && lru_tail_ == u) {
                // The only evictable slot is the node we stand on; recycling
                // it would orphan the new child.
                ++truncated_inserts_;
                break;
            }
            const std::uint32_t s = allocate_slot();
            if (s == kNone) {
                // Capacity too small for the remaining path; only leaves may
                // be recycled, so stop here.
                ++truncated_inserts_;
                break;
            }
            Node& n = nodes_[s];
            n.parent = u;
            n.token = t;
            n.depth = nodes_[u].depth + 1;
            n.generation = ++generation_counter_;
            n.allocated = true;
            n.freq = 0;
            n.fail_slot = kRoot;
            n.fail_generation = nodes_[kRoot].generation;
            n.children.clear();
            nodes_[u].children.emplace(t, s);
            ++allocated_;
            lru_push_front(s);
            c = s;
        }
        u = *c;
        nodes_[u].freq += freq_delta;
    }
    // Deepest-first retouch keeps every ancestor at least as recent as its
    // descendants, so the LRU tail stays a leaf.
    touch_prefix(u);
}

void Automaton::rebuild_failure_links() {
    std::deque<std::uint32_t> queue;
    for (const auto& [tok, child] : nodes_[kRoot].children) {
        (void)tok;
        set_fail(child, kRoot);
        queue.push_back(child);
    }
    while (!queue.empty()) {
        const std::uint32_t u = queue.front();
        queue.pop_front();
        for (const auto& [tok, v] : nodes_[u].children) {
            std::uint32_t f = fail_of(u);
            while (f != kRoot && !child_of(f, tok)) f = fail_of(f);
            auto target = child_of(f, tok);
            if (target && *target != v)
                set_fail(v, *target);
            else
                set_fail(v, kRoot);
            queue.push_back(v);
        }
    }
}

std::vector<RetrievalCandidate> Automaton::expand_candidates(const MatchState& state,
                                                             int max_candidates,
                                                             bool depth_constrained) const {
    std::vector<RetrievalCandidate> out;
    if (max_candidates <= 0) return out;
    const std::uint32_t start = resolve_state(state);
    if (nodes_[start].depth < 2) return out;  // no border of depth >= 2

    std::vector<std::uint32_t> borders{start};
    if (!depth_constrained) {
        for (std::uint32_t f = fail_of(start); f != kRoot; f = fail_of(f))
            borders.push_back(f);
    }

    // Best-first expansion over pooled continuations. Pooled frequency of a
    // prefix is always >= that of its extensions, so emitting in priority
    // order yields a prefix-closed selection.
    struct Item {
        std::vector<TokenId> seq;
        std::uint64_t freq;
        std::vector<std::uint32_t> slots;  // matching state under each border
    };
    auto better = [](const Item& a, const Item& b) {
        if (a.freq != b.freq) return a.freq > b.freq;
        if (a.seq.size() != b.seq.size()) return a.seq.size() < b.seq.size();
        return a.seq < b.seq;
    };
    auto heap_cmp = [&better](const Item& a, const Item& b) { return better(b, a); };
    std::priority_queue<Item, std::vector<Item>, decltype(heap_cmp)> heap(heap_cmp);

    auto push_extensions = [&](const std::vector<TokenId>& base,
                               const std::vector<std::uint32_t>& slots) {
        std::map<TokenId, Item> merged;
        for (const std::uint32_t s : slots) {
            for (const auto& [tok, child] : nodes_[s].children) {
                auto& item = merged[tok];
                if (item.slots.empty()) {
                    item.seq = base;
                    item.seq.push_back(tok);
                    item.freq = 0;
                }
                item.freq += nodes_[child].freq;
                item.slots.push_back(child);
            }
        }
        for (auto& [tok, item] : merged) {
            (void)tok;
            heap.push(std::move(item));
        }
    };

    push_extensions({}, borders);
    while (!heap.empty() && static_cast<int>(out.size()) < max_candidates) {
        Item item = heap.top();
        heap.pop();
        out.push_back({item.seq, item.freq});
        push_extensions(item.seq, item.slots);
    }
    return out;
}

MatchState Automaton::state() const {
    MatchState s;
    s.slot = cur_slot_;
    s.generation = cur_generation_;
    const std::uint32_t r = resolve_state(s);
    s.slot = r;
    s.generation = nodes_[r].generation;
    s.matched_depth = nodes_[r].depth;
    return s;
}

void Automaton::reset_state() {
    cur_slot_ = kRoot;
    cur_generation_ = nodes_[kRoot].generation;
}

std::vector<TokenId> Automaton::path_of(std::uint32_t slot) const {
    std::vector<TokenId> path;
    for (std::uint32_t v = slot; v != kRoot; v = nodes_[v].parent)
        path.push_back(nodes_[v].token);
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<std::uint32_t> Automaton::lru_front_to_back() const {
    std::vector<std::uint32_t> order;
    for (std::uint32_t s = lru_head_; s != kNone; s = nodes_[s].lru_next)
        order.push_back(s);
    return order;
}

bool Automaton::is_leaf(std::uint32_t slot) const { return nodes_[slot].children.empty(); }
int Automaton::depth_of(std::uint32_t slot) const { return nodes_[slot].depth; }
std::uint64_t Automaton::freq_of(std::uint32_t slot) const { return nodes_[slot].freq; }

std::vector<std::uint32_t> Automaton::allocated_slots() const {
    std::vector<std::uint32_t> slots;
    for (std::uint32_t s = 1; s <= capacity_; ++s)
        if (nodes_[s].allocated) slots.push_back(s);
    return slots;
}

std::string Automaton::debug_dump() const {
    std::vector<std::uint32_t> order = lru_front_to_back();
    std::unordered_map<std::uint32_t, std::size_t> recency;
    for (std::size_t i = 0; i < order.size(); ++i) recency[order[i]] = i;

    std::vector<std::pair<std::vector<TokenId>, std::uint32_t>> rows;
    for (const std::uint32_t s : allocated_slots()) rows.emplace_back(path_of(s), s);
    std::sort(rows.begin(), rows.end());

    auto join = [](const std::vector<TokenId>& v) {
        std::ostringstream os;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) os << ',';
            os << v[i];
        }
        return os.str();
    };
    std::ostringstream os;
    for (const auto& [path, slot] : rows) {
        os << "path=" << join(path) << " freq=" << nodes_[slot].freq
           << " fail=" << join(path_of(fail_of(slot))) << " recency=" << recency.at(slot)
           << '\n';
    }
    return os.str();
}

void Automaton::self_check() const {
    if (allocated_ > capacity_) throw std::logic_error("capacity exceeded");
    const auto order = lru_front_to_back();
    if (order.size() != allocated_) throw std::logic_error("LRU list size mismatch");
    if (!order.empty() && !is_leaf(order.back()))
        throw std::logic_error("LRU tail is not a leaf");
    std::unordered_map<std::uint32_t, std::size_t> recency;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (!recency.emplace(order[i], i).second)
            throw std::logic_error("slot appears twice in LRU list");
    }
    for (const std::uint32_t s : allocated_slots()) {
        const Node& n = nodes_[s];
        if (n.depth > ngram_len_) throw std::logic_error("node deeper than n");
        if (!recency.count(s)) throw std::logic_error("allocated slot missing from LRU");
        if (n.parent != kRoot) {
            if (!nodes_[n.parent].allocated) throw std::logic_error("dangling parent");
            // Prefix recency: ancestors are at least as recent.
            if (recency.at(n.parent) > recency.at(s))
                throw std::logic_error("prefix-recency violated");
            if (nodes_[n.parent].freq < n.freq)
                throw std::logic_error("freq monotonicity violated");
        } else {
            if (nodes_[kRoot].freq < n.freq)
                throw std::logic_error("freq monotonicity violated at root");
        }
        auto c = child_of(n.parent, n.token);
        if (!c || *c != s) throw std::logic_error("parent/child map inconsistent");
    }
}

}  // namespace racer
