#pragma once

#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "qselect/attack.hpp"
#include "qselect/errors.hpp"
#include "qselect/oracle.hpp"

namespace qselect {

/// Per-bin average original confidence (percentages). Bin keys are the k
/// budgets: "5", "15", "30", "50", "ALL".
class ConfidenceBins {
public:
    ConfidenceBins() = default;
    explicit ConfidenceBins(std::map<std::string, double> bins) : bins_(std::move(bins)) {}

    double threshold(const std::string& bin) const {
        auto it = bins_.find(bin);
        if (it == bins_.end()) throw UnknownBinError("unknown confidence bin " + bin);
        return it->second;
    }

    bool has(const std::string& bin) const { return bins_.count(bin) > 0; }

    /// Bin averages reported for the reference classifier runs.
    static ConfidenceBins defaults() {
        return ConfidenceBins({{"5", 93.77}, {"15", 96.27}, {"30", 97.12},
                               {"50", 97.46}, {"ALL", 97.67}});
    }

    static ConfidenceBins load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read bins file " + path);
        nlohmann::json j;
        in >> j;
        std::map<std::string, double> bins;
        for (const auto& [k, v] : j.items()) bins[k] = v.get<double>();
        return ConfidenceBins(std::move(bins));
    }

private:
    std::map<std::string, double> bins_;
};

/// Strategy routing with oracle knowledge of the needed change count:
/// the binary selector for texts needing at most j changes, greedy otherwise.
inline SelectorKind oracle_select(std::size_t required_changes, std::size_t j_threshold) {
    return required_changes <= j_threshold ? SelectorKind::Binary : SelectorKind::Greedy;
}

/// Confidence stand-in for the oracle: the binary selector when the original
/// confidence is at or below the bin average.
inline SelectorKind confidence_select(double original_confidence, const ConfidenceBins& bins,
                                      const std::string& active_bin) {
    return original_confidence <= bins.threshold(active_bin) ? SelectorKind::Binary
                                                             : SelectorKind::Greedy;
}

/// Number of replacements a full binary-selector attack needs to flip the
/// example; nullopt when it never flips. Skipped (already wrong) examples
/// need 0. The probing run's queries are not charged to any shared ledger.
inline std::optional<std::size_t> measure_required_changes(const TokenizedText& text,
                                                           std::size_t gold_label,
                                                           const Oracle& oracle,
                                                           const SynonymLexicon& lexicon) {
    QueryLedger scratch;
    AttackOutcome probe =
        attack_example(text, gold_label, oracle, SelectorKind::Binary, kAll, lexicon, scratch);
    if (probe.skipped) return 0;
    if (!probe.success) return std::nullopt;
    return probe.modified_positions.size();
}

}  // namespace qselect
