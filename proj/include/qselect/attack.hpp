#pragma once

#include <cstddef>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "qselect/errors.hpp"
#include "qselect/oracle.hpp"
#include "qselect/selector.hpp"
#include "qselect/textcore.hpp"

namespace qselect {

/// Unrestricted modification budget.
inline constexpr std::size_t kAll = std::numeric_limits<std::size_t>::max();

enum class SelectorKind { Greedy, Binary };

/// Replacement vocabulary: head word -> ordered candidate list. Absent words
/// yield the empty list.
class SynonymLexicon {
public:
    void add(const std::string& word, const std::vector<std::string>& synonyms) {
        auto& list = entries_[word];
        for (const auto& syn : synonyms)
            if (!syn.empty() && syn != word) list.push_back(syn);
    }

    const std::vector<std::string>& candidates(const std::string& word) const {
        static const std::vector<std::string> empty;
        auto it = entries_.find(word);
        return it == entries_.end() ? empty : it->second;
    }

    std::size_t size() const { return entries_.size(); }

    /// TSV format: word<TAB>syn1,syn2,...  Lines starting with '#' are comments.
    static SynonymLexicon load_tsv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read lexicon file " + path);
        SynonymLexicon lex;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos) throw ParseError("lexicon line missing TAB", lineno);
            std::string word = line.substr(0, tab);
            std::vector<std::string> syns;
            std::stringstream rest(line.substr(tab + 1));
            std::string syn;
            while (std::getline(rest, syn, ',')) syns.push_back(syn);
            lex.add(word, syns);
        }
        return lex;
    }

private:
    std::unordered_map<std::string, std::vector<std::string>> entries_;
};

/// Character -> single visually similar replacement. Ships with an embedded
/// default covering ASCII letters (diacritic look-alikes).
class ConfusablesMap {
public:
    void add(const std::string& ch, const std::string& replacement) {
        if (replacement != ch) entries_[ch] = replacement;
    }

    std::optional<std::string> lookup(const std::string& ch) const {
        auto it = entries_.find(ch);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const { return entries_.size(); }

    /// TSV format: char<TAB>replacement_char. '#' starts a comment.
    static ConfusablesMap load_tsv(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read confusables file " + path);
        ConfusablesMap map;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos) throw ParseError("confusables line missing TAB", lineno);
            map.add(line.substr(0, tab), line.substr(tab + 1));
        }
        return map;
    }

    static ConfusablesMap default_ascii() {
        static const std::pair<const char*, const char*> pairs[] = {
            {"a", "à"}, {"b", "ḃ"}, {"c", "ċ"}, {"d", "ḋ"}, {"e", "è"}, {"f", "ḟ"},
            {"g", "ġ"}, {"h", "ḣ"}, {"i", "ì"}, {"j", "ĵ"}, {"k", "ķ"}, {"l", "ĺ"},
            {"m", "ṁ"}, {"n", "ṅ"}, {"o", "ò"}, {"p", "ṗ"}, {"q", "ɋ"}, {"r", "ṙ"},
            {"s", "ṡ"}, {"t", "ṫ"}, {"u", "ù"}, {"v", "ṽ"}, {"w", "ẁ"}, {"x", "ẋ"},
            {"y", "ỳ"}, {"z", "ż"}, {"A", "À"}, {"B", "Ḃ"}, {"C", "Ċ"}, {"D", "Ḋ"},
            {"E", "È"}, {"F", "Ḟ"}, {"G", "Ġ"}, {"H", "Ḣ"}, {"I", "Ì"}, {"J", "Ĵ"},
            {"K", "Ķ"}, {"L", "Ĺ"}, {"M", "Ṁ"}, {"N", "Ṅ"}, {"O", "Ò"}, {"P", "Ṗ"},
            {"Q", "Ɋ"}, {"R", "Ṙ"}, {"S", "Ṡ"}, {"T", "Ṫ"}, {"U", "Ù"}, {"V", "Ṽ"},
            {"W", "Ẁ"}, {"X", "Ẋ"}, {"Y", "Ỳ"}, {"Z", "Ż"},
        };
        ConfusablesMap map;
        for (const auto& [k, v] : pairs) map.add(k, v);
        return map;
    }

private:
    std::unordered_map<std::string, std::string> entries_;
};

/// Record of one attacked example.
struct AttackOutcome {
    std::size_t original_label = 0;
    std::size_t final_label = 0;
    bool success = false;
    bool skipped = false;  // originally misclassified, attack not attempted
    std::set<std::size_t> modified_positions;
    QueryLedger queries;
    std::string final_text;
};

struct ReplaceResult {
    TokenizedText text;
    double best_drop = 0.0;
    bool flipped = false;
    std::size_t final_label = 0;
};

/// Try every candidate at the position, short-circuiting on the first label
/// flip; otherwise apply the candidate with the greatest drop (ties go to the
/// earliest candidate). The best candidate is applied even on a non-positive
/// drop.
inline ReplaceResult replace_best(const TokenizedText& text, std::size_t pos,
                                  const std::vector<std::string>& candidates,
                                  SelectionRun& run) {
    if (candidates.empty()) throw EmptyCandidatesError("no replacement candidates");
    std::optional<TokenizedText> best;
    double best_drop = -std::numeric_limits<double>::infinity();
    for (const auto& cand : candidates) {
        TokenizedText modified = text.with_replacement(pos, cand);
        Verdict v = run.score_replacement(modified.join());
        if (v.label != run.target_class())
            return ReplaceResult{std::move(modified), run.base_score() - v.prob(run.target_class()),
                                 true, v.label};
        double drop = run.base_score() - v.prob(run.target_class());
        if (drop > best_drop) {
            best_drop = drop;
            best = std::move(modified);
        }
    }
    return ReplaceResult{std::move(*best), best_drop, false, run.target_class()};
}

namespace detail {

using CandidateProvider = std::function<std::vector<std::string>(const std::string& token)>;

inline AttackOutcome attack_impl(const TokenizedText& text, std::size_t gold_label,
                                 const Oracle& oracle, SelectorKind selector, std::size_t k,
                                 const CandidateProvider& provider, QueryLedger& ledger) {
    if (k == 0) throw ConfigError("modification budget must be >= 1");
    AttackOutcome outcome;

    Verdict original = query(oracle, text.join(), ledger, QueryPhase::Baseline);
    outcome.original_label = original.label;
    outcome.final_label = original.label;
    if (original.label != gold_label) {
        outcome.skipped = true;
        outcome.queries = ledger;
        outcome.final_text = text.join();
        return outcome;
    }

    TokenizedText current = text;
    SelectionRun run(&current, &oracle, &ledger);
    run.set_base(original);
    std::size_t n = current.size();
    SegmentTree tree(n);
    RankedDrops ranking;
    std::size_t ranking_pos = 0;
    bool first_binary_call = true;
    std::set<std::size_t> tried;

    std::size_t rounds = k == kAll ? n : std::min(k, n);
    for (std::size_t round = 0; round < rounds; ++round) {
        std::size_t pos;
        if (selector == SelectorKind::Greedy) {
            // all drops come from the single first pass; later rounds walk the
            // ranking past already-tried positions
            if (ranking.empty()) ranking = greedy_select(run, tried);
            while (ranking_pos < ranking.size() && tried.count(ranking[ranking_pos].first))
                ++ranking_pos;
            if (ranking_pos >= ranking.size()) break;
            pos = ranking[ranking_pos].first;
        } else {
            try {
                pos = first_binary_call ? binary_select_first(run, tree)
                                        : binary_select_next(tree, run);
                first_binary_call = false;
            } catch (const AllPositionsExcludedError&) {
                break;
            } catch (const TreeExhaustedError&) {
                break;
            }
        }
        tried.insert(pos);
        tree.exclude_position(pos);

        std::vector<std::string> candidates = provider(current.token(pos));
        if (candidates.empty()) continue;  // no synonyms: the round is spent

        ReplaceResult result = replace_best(current, pos, candidates, run);
        current = std::move(result.text);
        run.set_text(&current);
        outcome.modified_positions.insert(pos);
        outcome.final_label = result.final_label;
        if (result.flipped) {
            outcome.success = true;
            break;
        }
    }

    outcome.queries = ledger;
    outcome.final_text = current.join();
    return outcome;
}

}  // namespace detail

/// The two-step attack loop: select a position (GS ranking walk or BS
/// first/next), replace it with the best synonym, stop on label flip or after
/// k rounds. Previously tried positions are excluded from later selection.
inline AttackOutcome attack_example(const TokenizedText& text, std::size_t gold_label,
                                    const Oracle& oracle, SelectorKind selector, std::size_t k,
                                    const SynonymLexicon& lexicon, QueryLedger& ledger) {
    return detail::attack_impl(text, gold_label, oracle, selector, k,
                               [&lexicon](const std::string& token) {
                                   return lexicon.candidates(token);
                               },
                               ledger);
}

/// Character-level variant: the candidate set for a selected character is its
/// single confusables replacement (or nothing, which skips the round).
inline AttackOutcome char_attack_example(const TokenizedText& text, std::size_t gold_label,
                                         const Oracle& oracle, SelectorKind selector,
                                         std::size_t k, const ConfusablesMap& confusables,
                                         QueryLedger& ledger) {
    if (text.granularity() != Granularity::Char)
        throw ConfigError("char attack requires Char granularity");
    return detail::attack_impl(text, gold_label, oracle, selector, k,
                               [&confusables](const std::string& token) {
                                   std::vector<std::string> out;
                                   if (auto repl = confusables.lookup(token))
                                       out.push_back(*repl);
                                   return out;
                               },
                               ledger);
}

}  // namespace qselect
