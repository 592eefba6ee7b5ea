#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "qselect/errors.hpp"
#include "qselect/textcore.hpp"

namespace qselect {

/// Classifier output: winning label and the full probability distribution.
struct Verdict {
    std::size_t label = 0;
    std::vector<double> probs;

    double prob(std::size_t cls) const { return probs.at(cls); }

    /// Checks distribution invariants and the argmax/tie-break rule.
    void validate(double sum_tol = 1e-9) const {
        double sum = 0.0;
        for (double p : probs) {
            if (p < 0.0 || p > 1.0) throw ProbabilityInvalidError("probability outside [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > sum_tol)
            throw ProbabilityInvalidError("probabilities do not sum to 1");
        if (label != argmax(probs)) throw ProbabilityInvalidError("label is not the argmax class");
    }

    static std::size_t argmax(const std::vector<double>& probs) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < probs.size(); ++i)
            if (probs[i] > probs[best]) best = i;  // ties keep the lowest index
        return best;
    }

    static Verdict from_probs(std::vector<double> probs) {
        Verdict v;
        v.probs = std::move(probs);
        v.label = argmax(v.probs);
        return v;
    }
};

enum class QueryPhase { Baseline, Selection, Replacement };

/// Monotone accounting of classifier calls for one attack/selection run.
/// total = baseline + selection + replacement; cache hits are counted apart.
class QueryLedger {
public:
    void record(QueryPhase phase) {
        switch (phase) {
            case QueryPhase::Baseline: ++baseline_; break;
            case QueryPhase::Selection: ++selection_; break;
            case QueryPhase::Replacement: ++replacement_; break;
        }
    }
    void record_cache_hit() { ++cache_hits_; }

    std::size_t total() const { return baseline_ + selection_ + replacement_; }
    std::size_t baseline_queries() const { return baseline_; }
    std::size_t selection_queries() const { return selection_; }
    std::size_t replacement_queries() const { return replacement_; }
    std::size_t cache_hits() const { return cache_hits_; }

private:
    std::size_t baseline_ = 0;
    std::size_t selection_ = 0;
    std::size_t replacement_ = 0;
    std::size_t cache_hits_ = 0;
};

/// The black-box contract: a text string in, a Verdict out. Implementations
/// must be deterministic and safe for concurrent classify calls.
class Oracle {
public:
    virtual ~Oracle() = default;
    virtual Verdict classify(const std::string& text) const = 0;
};

/// Classify through the ledger: one oracle call, one counter tick.
inline Verdict query(const Oracle& oracle, const std::string& text, QueryLedger& ledger,
                     QueryPhase phase) {
    ledger.record(phase);
    return oracle.classify(text);
}

namespace detail {

// Clamp into (0,1) and emit a 2-class distribution with the target class last.
inline Verdict squash_two_class(double target_prob) {
    double p = std::clamp(target_prob, 0.001, 0.999);
    return Verdict::from_probs({1.0 - p, p});
}

}  // namespace detail

/// Test oracle with per-token influence known by construction: the target-class
/// probability is base minus the contributions of every reference token missing
/// from the input. Class 1 is the target class.
class AdditiveOracle : public Oracle {
public:
    AdditiveOracle(const TokenizedText& reference,
                   std::unordered_map<std::string, double> contributions, double base_score)
        : contributions_(std::move(contributions)), base_score_(base_score) {
        for (const auto& tok : reference.tokens()) ++reference_counts_[tok];
        granularity_ = reference.granularity();
    }

    /// Convenience: reference tokens w000..wNNN with per-position contributions.
    static AdditiveOracle positional(const std::vector<double>& contributions,
                                     double base_score = 0.9) {
        std::string source;
        std::unordered_map<std::string, double> by_token;
        for (std::size_t i = 0; i < contributions.size(); ++i) {
            std::string tok = "w" + std::to_string(i);
            if (!source.empty()) source += ' ';
            source += tok;
            by_token[tok] = contributions[i];
        }
        return AdditiveOracle(TokenizedText::tokenize(source, Granularity::Word),
                              std::move(by_token), base_score);
    }

    Verdict classify(const std::string& text) const override {
        std::unordered_map<std::string, std::size_t> present;
        try {
            TokenizedText parsed = TokenizedText::tokenize(text, granularity_);
            for (const auto& tok : parsed.tokens()) ++present[tok];
        } catch (const EmptyTextError&) {
            // fully excluded input: nothing present
        }
        double removed = 0.0;
        for (const auto& [tok, ref_count] : reference_counts_) {
            auto it = present.find(tok);
            std::size_t have = it == present.end() ? 0 : it->second;
            if (have < ref_count) {
                auto c = contributions_.find(tok);
                if (c != contributions_.end())
                    removed += c->second * static_cast<double>(ref_count - have);
            }
        }
        return detail::squash_two_class(base_score_ - removed);
    }

    double base_score() const { return base_score_; }

private:
    std::unordered_map<std::string, double> contributions_;
    std::unordered_map<std::string, std::size_t> reference_counts_;
    double base_score_;
    Granularity granularity_ = Granularity::Word;
};

/// Scripted oracle keyed on literal substrings: every keyword absent from the
/// input lowers the target-class probability by its weight. Used for
/// character-level targets where breaking "bad" into "bàd" removes the key.
class KeywordOracle : public Oracle {
public:
    KeywordOracle(std::unordered_map<std::string, double> keyword_weights, double base_score)
        : weights_(std::move(keyword_weights)), base_score_(base_score) {}

    Verdict classify(const std::string& text) const override {
        double removed = 0.0;
        for (const auto& [kw, w] : weights_)
            if (text.find(kw) == std::string::npos) removed += w;
        return detail::squash_two_class(base_score_ - removed);
    }

private:
    std::unordered_map<std::string, double> weights_;
    double base_score_;
};

/// Fully scripted oracle: an arbitrary text -> target-probability function.
class ScriptedOracle : public Oracle {
public:
    explicit ScriptedOracle(std::function<double(const std::string&)> target_prob)
        : target_prob_(std::move(target_prob)) {}

    Verdict classify(const std::string& text) const override {
        return detail::squash_two_class(target_prob_(text));
    }

private:
    std::function<double(const std::string&)> target_prob_;
};

}  // namespace qselect
