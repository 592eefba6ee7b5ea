#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qselect/errors.hpp"
#include "qselect/oracle.hpp"
#include "qselect/textcore.hpp"

namespace qselect {

/// Positions ranked by probability drop, descending; ties go to the lower index.
using RankedDrops = std::vector<std::pair<std::size_t, double>>;

/// Shared scoring state for one selection/attack run: the oracle, the target
/// class, the baseline score, the ledger, and the segment-score cache. After a
/// word replacement the text pointer is swapped but cached drops are retained.
class SelectionRun {
public:
    SelectionRun(const TokenizedText* text, const Oracle* oracle, QueryLedger* ledger)
        : text_(text), oracle_(oracle), ledger_(ledger) {}

    /// Classifies the unmodified text once (baseline phase) and fixes the
    /// target class as its predicted label. No-op if already established.
    double establish_base() {
        if (!base_score_) {
            Verdict v = query(*oracle_, text_->join(), *ledger_, QueryPhase::Baseline);
            target_class_ = v.label;
            base_score_ = v.prob(v.label);
        }
        return *base_score_;
    }

    /// Adopt a baseline verdict obtained by the caller (already charged).
    void set_base(const Verdict& v) {
        target_class_ = v.label;
        base_score_ = v.prob(v.label);
    }

    double base_score() const { return base_score_.value(); }
    std::size_t target_class() const { return target_class_; }
    const TokenizedText& text() const { return *text_; }
    void set_text(const TokenizedText* text) { text_ = text; }

    /// Drop in target-class probability when the span is excluded. One oracle
    /// query per distinct span in the run; repeats are served from the cache.
    double segment_drop(Span span) {
        std::uint64_t key = (static_cast<std::uint64_t>(span.start) << 32) | span.end;
        auto it = cache_.find(key);
        if (it != cache_.end()) {
            ledger_->record_cache_hit();
            return it->second;
        }
        Verdict v = query(*oracle_, text_->exclude({span}), *ledger_, QueryPhase::Selection);
        double drop = base_score_.value() - v.prob(target_class_);
        cache_.emplace(key, drop);
        return drop;
    }

    /// Probability of the target class for an arbitrary candidate text
    /// (replacement phase; not cached).
    Verdict score_replacement(const std::string& candidate) {
        return query(*oracle_, candidate, *ledger_, QueryPhase::Replacement);
    }

private:
    const TokenizedText* text_;
    const Oracle* oracle_;
    QueryLedger* ledger_;
    std::optional<double> base_score_;
    std::size_t target_class_ = 0;
    std::unordered_map<std::uint64_t, double> cache_;
};

/// One node of the segment memory tree: a token span, its scored drop, and the
/// exploration state used to pick the next path.
struct SegmentNode {
    Span span;
    double drop = std::numeric_limits<double>::quiet_NaN();
    bool explored = false;
    std::unique_ptr<SegmentNode> left;
    std::unique_ptr<SegmentNode> right;

    bool is_leaf() const { return span.length() == 1; }
};

/// Memory tree of scored segments, retained across selections in one run so
/// later tokens reuse earlier queries.
class SegmentTree {
public:
    explicit SegmentTree(std::size_t n) {
        root_ = std::make_unique<SegmentNode>();
        root_->span = Span{0, n - 1};
        root_->drop = 0.0;  // excluding nothing drops nothing
        n_ = n;
    }

    SegmentNode& root() { return *root_; }
    const SegmentNode& root() const { return *root_; }
    std::size_t token_count() const { return n_; }

    const std::set<std::size_t>& excluded_positions() const { return excluded_; }
    void exclude_position(std::size_t pos) { excluded_.insert(pos); }
    bool is_excluded(std::size_t pos) const { return excluded_.count(pos) > 0; }

    bool span_fully_excluded(Span s) const {
        for (std::size_t i = s.start; i <= s.end; ++i)
            if (!excluded_.count(i)) return false;
        return true;
    }

    /// Scored-but-unexplored nodes, ordered by exploration priority.
    std::vector<SegmentNode*>& frontier() { return frontier_; }

    void mark_explored(SegmentNode* node) {
        node->explored = true;
        frontier_.erase(std::remove(frontier_.begin(), frontier_.end(), node), frontier_.end());
    }

    /// Drop used for priority comparison: excluded segments never win.
    double effective_drop(const SegmentNode& node) const {
        if (span_fully_excluded(node.span)) return -std::numeric_limits<double>::infinity();
        return node.drop;
    }

private:
    std::unique_ptr<SegmentNode> root_;
    std::size_t n_ = 0;
    std::set<std::size_t> excluded_;
    std::vector<SegmentNode*> frontier_;
};

namespace detail {

// Create and score both children of an internal node. Fully-excluded child
// segments get -inf without spending a query.
inline void split_node(SegmentTree& tree, SelectionRun& run, SegmentNode& node) {
    if (node.left) return;  // already split in this run
    std::size_t mid = (node.span.start + node.span.end) / 2;
    node.left = std::make_unique<SegmentNode>();
    node.left->span = Span{node.span.start, mid};
    node.right = std::make_unique<SegmentNode>();
    node.right->span = Span{mid + 1, node.span.end};
    for (SegmentNode* child : {node.left.get(), node.right.get()}) {
        if (tree.span_fully_excluded(child->span))
            child->drop = -std::numeric_limits<double>::infinity();
        else
            child->drop = run.segment_drop(child->span);
        tree.frontier().push_back(child);
    }
}

inline SegmentNode* pick_frontier_max(SegmentTree& tree) {
    SegmentNode* best = nullptr;
    double best_drop = 0.0;
    for (SegmentNode* node : tree.frontier()) {
        double d = tree.effective_drop(*node);
        if (!best || d > best_drop ||
            (d == best_drop && (node->span.length() < best->span.length() ||
                                (node->span.length() == best->span.length() &&
                                 node->span.start < best->span.start)))) {
            best = node;
            best_drop = d;
        }
    }
    return best;
}

}  // namespace detail

/// Score every non-excluded position by single-token exclusion and return the
/// full descending ranking. Costs one selection query per candidate position
/// (plus the baseline if not yet established).
inline RankedDrops greedy_select(SelectionRun& run, const std::set<std::size_t>& excluded) {
    std::size_t n = run.text().size();
    if (excluded.size() >= n) throw AllPositionsExcludedError("no candidate positions left");
    run.establish_base();
    RankedDrops ranked;
    ranked.reserve(n - excluded.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (excluded.count(i)) continue;
        ranked.emplace_back(i, run.segment_drop(Span{i, i}));
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    return ranked;
}

/// Descend from the root, scoring both halves at each level and recursing into
/// the half with the strictly larger drop (ties go right), until a single
/// token remains. All scored segments are recorded in the tree.
inline std::size_t binary_select_first(SelectionRun& run, SegmentTree& tree) {
    if (tree.excluded_positions().size() >= tree.token_count())
        throw AllPositionsExcludedError("no candidate positions left");
    run.establish_base();
    SegmentNode* cur = &tree.root();
    while (!cur->is_leaf()) {
        detail::split_node(tree, run, *cur);
        tree.mark_explored(cur);
        double drop_left = tree.effective_drop(*cur->left);
        double drop_right = tree.effective_drop(*cur->right);
        cur = drop_left > drop_right ? cur->left.get() : cur->right.get();
    }
    tree.mark_explored(cur);
    return cur->span.start;
}

/// Continue from the memory tree: repeatedly take the unexplored segment with
/// the greatest drop, splitting internal segments until a leaf surfaces.
inline std::size_t binary_select_next(SegmentTree& tree, SelectionRun& run) {
    while (true) {
        SegmentNode* node = detail::pick_frontier_max(tree);
        if (!node) throw TreeExhaustedError("every leaf explored or excluded");
        if (node->is_leaf()) {
            tree.mark_explored(node);
            if (tree.is_excluded(node->span.start)) continue;
            return node->span.start;
        }
        if (tree.span_fully_excluded(node->span)) {
            tree.mark_explored(node);
            continue;
        }
        detail::split_node(tree, run, *node);
        tree.mark_explored(node);
    }
}

namespace detail {

inline std::size_t ceil_log2(std::size_t n) {
    std::size_t log = 0;
    std::size_t value = 1;
    while (value < n) {
        value <<= 1;
        ++log;
    }
    return log;
}

}  // namespace detail

/// Queries to find one token: 2 per split level, 0 for a single-token text.
inline std::size_t theoretical_best_case(std::size_t n) {
    return n <= 1 ? 0 : 2 * detail::ceil_log2(n);
}

/// Worst-branch estimate for m tokens: the i-th retrieval re-descends a fresh
/// branch of depth log2(n/2^i), each term capped below at 1.
inline std::size_t theoretical_average_case(std::size_t n, std::size_t m) {
    std::size_t total = 0;
    double log2n = std::log2(static_cast<double>(n));
    for (std::size_t i = 0; i < m; ++i) {
        double term = 2.0 * (log2n - static_cast<double>(i));
        long rounded = static_cast<long>(std::ceil(term - 1e-9));
        total += static_cast<std::size_t>(std::max(1L, rounded));
    }
    return total;
}

/// Full exhaustion: n leaf queries plus every split level above them.
inline std::size_t theoretical_worst_case(std::size_t n) {
    std::size_t total = n;
    for (std::size_t half = n / 2; half >= 1; half /= 2) total += half;
    return total;
}

}  // namespace qselect
