#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qselect/attack.hpp"
#include "qselect/combiner.hpp"
#include "qselect/errors.hpp"
#include "qselect/http_oracle.hpp"
#include "qselect/metrics.hpp"
#include "qselect/naive_bayes.hpp"
#include "qselect/oracle.hpp"
#include "qselect/selector.hpp"
#include "qselect/textcore.hpp"

namespace qselect {

struct DatasetRecord {
    std::string text;
    std::size_t label;
};

/// JSONL records {"text": ..., "label": ...}; labels must form a dense 0..C-1
/// range.
inline std::vector<DatasetRecord> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read dataset file " + path);
    std::vector<DatasetRecord> records;
    std::set<std::size_t> labels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw ParseError("invalid JSON", lineno);
        }
        if (!j.contains("text") || !j.contains("label") || !j["text"].is_string() ||
            !j["label"].is_number_integer())
            throw ParseError("record needs string \"text\" and integer \"label\"", lineno);
        long label = j["label"].get<long>();
        if (label < 0) throw ParseError("negative label", lineno);
        records.push_back({j["text"].get<std::string>(), static_cast<std::size_t>(label)});
        labels.insert(static_cast<std::size_t>(label));
    }
    for (std::size_t expect = 0; const std::size_t l : labels) {
        if (l != expect++) throw SparseLabelsError("labels are not dense 0..C-1");
    }
    return records;
}

enum class TargetKind { Builtin, Remote, Scripted };
enum class SelectorMode { Greedy, Binary, OracleCombined, ConfidenceCombined };

struct ExperimentConfig {
    std::string dataset_path;
    TargetKind target_kind = TargetKind::Builtin;
    std::string target_spec;  // model path / endpoint url / scripted spec path
    SelectorMode selector = SelectorMode::Greedy;
    std::size_t j_threshold = 30;       // OracleCombined routing threshold
    std::string confidence_bin = "15";  // ConfidenceCombined active bin
    ConfidenceBins bins = ConfidenceBins::defaults();
    std::size_t k = kAll;
    Granularity granularity = Granularity::Word;
    std::string lexicon_path;
    std::string confusables_path;
    std::optional<std::size_t> sample_size;
    std::uint64_t rng_seed = 0;
    std::string output_path;
};

namespace detail {

// Engine-portable uniform draw in [0, bound) via rejection sampling; keeps
// sampling reproducible across standard libraries.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                          std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do {
        v = rng();
    } while (v >= limit);
    return v % bound;
}

// First `count` picks of a seeded Fisher-Yates shuffle, returned in dataset
// order.
inline std::vector<std::size_t> sample_indices(std::size_t population, std::size_t count,
                                               std::mt19937_64& rng) {
    std::vector<std::size_t> indices(population);
    for (std::size_t i = 0; i < population; ++i) indices[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + static_cast<std::size_t>(bounded_draw(rng, population - i));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(count);
    std::sort(indices.begin(), indices.end());
    return indices;
}

}  // namespace detail

/// Scripted target spec: JSON {"base": float, "keywords": {string: weight}}.
inline std::unique_ptr<Oracle> load_scripted_target(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read scripted target " + path);
    nlohmann::json j;
    in >> j;
    std::unordered_map<std::string, double> weights;
    for (const auto& [k, v] : j.at("keywords").items()) weights[k] = v.get<double>();
    return std::make_unique<KeywordOracle>(std::move(weights), j.at("base").get<double>());
}

inline std::unique_ptr<Oracle> make_target(const ExperimentConfig& config) {
    switch (config.target_kind) {
        case TargetKind::Builtin:
            return std::make_unique<NaiveBayesModel>(NaiveBayesModel::load(config.target_spec));
        case TargetKind::Remote:
            return std::make_unique<HttpOracle>(config.target_spec);
        case TargetKind::Scripted:
            return load_scripted_target(config.target_spec);
    }
    throw ConfigError("unknown target kind");
}

struct ExperimentResult {
    AggregateReport report;
    std::vector<AttackOutcome> outcomes;
    std::vector<std::size_t> indices;  // original dataset indices
    std::vector<std::size_t> gold;
};

namespace detail {

inline SelectorKind route_selector(const ExperimentConfig& config, const TokenizedText& text,
                                   std::size_t gold, const Oracle& oracle,
                                   const SynonymLexicon& lexicon) {
    switch (config.selector) {
        case SelectorMode::Greedy:
            return SelectorKind::Greedy;
        case SelectorMode::Binary:
            return SelectorKind::Binary;
        case SelectorMode::OracleCombined: {
            auto required = measure_required_changes(text, gold, oracle, lexicon);
            // never-flipping examples go to Greedy
            return required ? oracle_select(*required, config.j_threshold)
                            : SelectorKind::Greedy;
        }
        case SelectorMode::ConfidenceCombined: {
            QueryLedger scratch;
            Verdict v = query(oracle, text.join(), scratch, QueryPhase::Baseline);
            return confidence_select(100.0 * v.prob(v.label), config.bins,
                                     config.confidence_bin);
        }
    }
    throw ConfigError("unknown selector mode");
}

inline nlohmann::ordered_json outcome_to_json(const AttackOutcome& o, std::size_t index,
                                              std::size_t gold) {
    nlohmann::ordered_json j;
    j["index"] = index;
    j["gold_label"] = gold;
    j["original_label"] = o.original_label;
    j["final_label"] = o.final_label;
    j["success"] = o.success;
    j["skipped"] = o.skipped;
    j["modified_positions"] = o.modified_positions;
    j["queries"] = {{"total", o.queries.total()},
                    {"baseline", o.queries.baseline_queries()},
                    {"selection", o.queries.selection_queries()},
                    {"replacement", o.queries.replacement_queries()},
                    {"cache_hits", o.queries.cache_hits()}};
    j["final_text"] = o.final_text;
    return j;
}

inline void write_report(const std::string& path, const ExperimentResult& result, bool aborted,
                         const std::string& error = "") {
    if (path.empty()) return;
    nlohmann::ordered_json j;
    j["aborted"] = aborted;
    if (aborted) j["error"] = error;
    if (result.report.n_examples > 0) {
        nlohmann::ordered_json agg;
        agg["original_acc"] = result.report.original_acc;
        agg["attack_acc"] = result.report.attack_acc;
        agg["avg_queries"] = result.report.avg_queries;
        if (result.report.avg_queries_success)
            agg["avg_queries_success"] = *result.report.avg_queries_success;
        else
            agg["avg_queries_success"] = nullptr;
        agg["n_examples"] = result.report.n_examples;
        agg["n_success"] = result.report.n_success;
        j["aggregate"] = std::move(agg);
    }
    nlohmann::ordered_json examples = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < result.outcomes.size(); ++i)
        examples.push_back(
            outcome_to_json(result.outcomes[i], result.indices[i], result.gold[i]));
    j["examples"] = std::move(examples);
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write report file " + path);
    out << j.dump(2) << '\n';
}

}  // namespace detail

/// Attack every (sampled) example of the dataset with the configured selector
/// and aggregate the outcomes. Deterministic for a fixed config and builtin
/// target.
inline ExperimentResult run_experiment_on(const std::vector<DatasetRecord>& data,
                                          const Oracle& oracle, const ExperimentConfig& config,
                                          const SynonymLexicon& lexicon,
                                          const ConfusablesMap& confusables) {
    if (data.empty()) throw EmptyRunError("dataset is empty");
    std::size_t sample = config.sample_size.value_or(data.size());
    if (sample == 0) throw EmptyRunError("sample size is zero");
    if (sample > data.size()) throw ConfigError("sample size exceeds dataset size");

    std::mt19937_64 rng(config.rng_seed);
    ExperimentResult result;
    result.indices = detail::sample_indices(data.size(), sample, rng);

    try {
        for (std::size_t index : result.indices) {
            const DatasetRecord& record = data[index];
            TokenizedText text = TokenizedText::tokenize(record.text, config.granularity);
            QueryLedger ledger;
            AttackOutcome outcome;
            if (config.granularity == Granularity::Char) {
                outcome = char_attack_example(text, record.label, oracle,
                                              detail::route_selector(config, text, record.label,
                                                                     oracle, lexicon),
                                              config.k, confusables, ledger);
            } else {
                SelectorKind kind =
                    detail::route_selector(config, text, record.label, oracle, lexicon);
                outcome = attack_example(text, record.label, oracle, kind, config.k, lexicon,
                                         ledger);
            }
            result.outcomes.push_back(std::move(outcome));
            result.gold.push_back(record.label);
        }
    } catch (const std::exception& e) {
        // flush what we have with a failure marker, then propagate
        result.indices.resize(result.outcomes.size());
        detail::write_report(config.output_path, result, true, e.what());
        throw;
    }

    result.report = aggregate(result.outcomes, result.gold);
    detail::write_report(config.output_path, result, false);
    return result;
}

inline ExperimentResult run_experiment(const ExperimentConfig& config) {
    std::vector<DatasetRecord> data = load_dataset(config.dataset_path);
    std::unique_ptr<Oracle> oracle = make_target(config);
    SynonymLexicon lexicon;
    ConfusablesMap confusables = ConfusablesMap::default_ascii();
    if (config.granularity == Granularity::Word) {
        if (config.lexicon_path.empty())
            throw ConfigError("word-granularity attacks need --lexicon");
        lexicon = SynonymLexicon::load_tsv(config.lexicon_path);
    } else if (!config.confusables_path.empty()) {
        confusables = ConfusablesMap::load_tsv(config.confusables_path);
    }
    return run_experiment_on(data, *oracle, config, lexicon, confusables);
}

namespace detail {

inline std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

}  // namespace detail

/// Run GS and BS at every k and emit one CSV row per (k, selector); BS rows
/// carry EDR against the GS run at the same k.
inline std::string run_k_sweep(const std::vector<DatasetRecord>& data, const Oracle& oracle,
                               ExperimentConfig config, const SynonymLexicon& lexicon,
                               const ConfusablesMap& confusables,
                               const std::vector<std::size_t>& ks) {
    if (ks.empty()) throw ConfigError("k sweep needs at least one k");
    std::string csv =
        "k,selector,original_acc,attack_acc,avg_queries,avg_queries_success,asr,edr_vs_greedy\n";
    config.output_path.clear();
    for (std::size_t k : ks) {
        config.k = k;
        config.selector = SelectorMode::Greedy;
        AggregateReport gs = run_experiment_on(data, oracle, config, lexicon, confusables).report;
        config.selector = SelectorMode::Binary;
        AggregateReport bs = run_experiment_on(data, oracle, config, lexicon, confusables).report;
        double asr_gs = asr(gs.original_acc, gs.attack_acc);
        double asr_bs = asr(bs.original_acc, bs.attack_acc);
        std::string k_label = k == kAll ? "ALL" : std::to_string(k);
        auto row = [&](const std::string& selector, const AggregateReport& r, double asr_value,
                       const std::string& edr_value) {
            csv += k_label + "," + selector + "," + detail::fmt(r.original_acc, 1) + "," +
                   detail::fmt(r.attack_acc, 1) + "," + detail::fmt(r.avg_queries, 1) + "," +
                   (r.avg_queries_success ? detail::fmt(*r.avg_queries_success, 1) : "") + "," +
                   detail::fmt(asr_value, 5) + "," + edr_value + "\n";
        };
        row("greedy", gs, asr_gs, "");
        std::string edr_value =
            asr_gs > 0.0 ? detail::fmt(edr(asr_gs, asr_bs, gs.avg_queries, bs.avg_queries), 5)
                         : "";
        row("binary", bs, asr_bs, edr_value);
    }
    return csv;
}

struct AgreementRun {
    AgreementStats bs_vs_gs;
    AgreementStats random_vs_gs;
    std::vector<std::vector<std::size_t>> gs_top;
    std::vector<std::vector<std::size_t>> bs_top;
    std::vector<std::vector<std::size_t>> random_top;
};

/// Per example: the GS full-ranking top-k, the BS first+next top-k, and a
/// seeded random k-subset; aggregated into agreement stats for BS-vs-GS and
/// Random-vs-GS.
inline AgreementRun run_agreement(const std::vector<DatasetRecord>& data, const Oracle& oracle,
                                  const ExperimentConfig& config, std::size_t top_k = 10) {
    if (data.empty()) throw EmptyRunError("dataset is empty");
    std::size_t sample = config.sample_size.value_or(data.size());
    if (sample == 0) throw EmptyRunError("sample size is zero");
    if (sample > data.size()) throw ConfigError("sample size exceeds dataset size");

    std::mt19937_64 rng(config.rng_seed);
    std::vector<std::size_t> indices = detail::sample_indices(data.size(), sample, rng);
    for (std::size_t index : indices) {
        std::size_t n =
            TokenizedText::tokenize(data[index].text, config.granularity).size();
        if (n < top_k) throw ConfigError("top_k exceeds a sampled text's length");
    }

    AgreementRun run;
    for (std::size_t index : indices) {
        TokenizedText text = TokenizedText::tokenize(data[index].text, config.granularity);
        std::size_t n = text.size();

        QueryLedger gs_ledger;
        SelectionRun gs_run(&text, &oracle, &gs_ledger);
        RankedDrops ranking = greedy_select(gs_run, {});
        std::vector<std::size_t> gs_top;
        for (std::size_t i = 0; i < top_k; ++i) gs_top.push_back(ranking[i].first);

        QueryLedger bs_ledger;
        SelectionRun bs_run(&text, &oracle, &bs_ledger);
        SegmentTree tree(n);
        std::vector<std::size_t> bs_top;
        bs_top.push_back(binary_select_first(bs_run, tree));
        while (bs_top.size() < top_k) {
            try {
                bs_top.push_back(binary_select_next(tree, bs_run));
            } catch (const TreeExhaustedError&) {
                break;
            }
        }

        std::vector<std::size_t> positions(n);
        for (std::size_t i = 0; i < n; ++i) positions[i] = i;
        for (std::size_t i = 0; i < top_k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(detail::bounded_draw(rng, n - i));
            std::swap(positions[i], positions[j]);
        }
        positions.resize(top_k);

        run.gs_top.push_back(std::move(gs_top));
        run.bs_top.push_back(std::move(bs_top));
        run.random_top.push_back(std::move(positions));
    }
    run.bs_vs_gs = agreement_stats(run.gs_top, run.bs_top);
    run.random_vs_gs = agreement_stats(run.gs_top, run.random_top);
    return run;
}

}  // namespace qselect
