#pragma once

// Shared toy sentiment world for harness and acceptance tests: a naive Bayes
// target trained on generated reviews, an evaluation set whose sentiment words
// sit in a cluster, and a lexicon mapping sentiment words to neutral synonyms.

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qselect/attack.hpp"
#include "qselect/harness.hpp"
#include "qselect/naive_bayes.hpp"

namespace toy {

inline const std::vector<std::string>& positive_words() {
    static const std::vector<std::string> words = {
        "great", "excellent", "wonderful", "superb", "delightful",
        "charming", "amazing", "brilliant", "lovely", "perfect"};
    return words;
}

inline const std::vector<std::string>& negative_words() {
    static const std::vector<std::string> words = {
        "awful", "terrible", "horrible", "dreadful", "boring",
        "bland", "annoying", "poor", "lousy", "dull"};
    return words;
}

inline const std::vector<std::string>& filler_words() {
    static const std::vector<std::string> words = {
        "the", "a", "movie", "film", "plot", "scene", "actor", "story",
        "camera", "music", "director", "script", "character", "dialogue",
        "ending", "beginning", "runtime", "screen", "set", "costume",
        "budget", "release", "review", "audience", "theater", "cut",
        "take", "shot", "frame", "tone", "pace", "theme", "cast",
        "sound", "light", "color", "angle", "title", "credits", "sequel"};
    return words;
}

inline std::uint64_t draw(std::mt19937_64& rng, std::uint64_t bound) {
    return qselect::detail::bounded_draw(rng, bound);
}

/// Training corpus: fillers plus a handful of class words per document.
inline std::vector<std::pair<std::string, std::size_t>> training_corpus(std::size_t docs,
                                                                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::pair<std::string, std::size_t>> corpus;
    const auto& fillers = filler_words();
    for (std::size_t d = 0; d < docs; ++d) {
        std::size_t label = d % 2;
        const auto& sentiment = label == 1 ? positive_words() : negative_words();
        std::string text;
        std::size_t len = 20 + draw(rng, 10);
        for (std::size_t i = 0; i < len; ++i) {
            if (!text.empty()) text += ' ';
            if (i % 5 == 2)
                text += sentiment[draw(rng, sentiment.size())];
            else
                text += fillers[draw(rng, fillers.size())];
        }
        corpus.emplace_back(std::move(text), label);
    }
    return corpus;
}

inline qselect::NaiveBayesModel trained_model(std::uint64_t seed = 11) {
    return qselect::NaiveBayesModel::train(training_corpus(300, seed), 1.0);
}

/// Evaluation records: ~120 fillers with the gold-class sentiment words
/// grouped in one window plus two opposite-class words elsewhere.
inline std::vector<qselect::DatasetRecord> eval_dataset(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<qselect::DatasetRecord> data;
    const auto& fillers = filler_words();
    for (std::size_t d = 0; d < count; ++d) {
        std::size_t label = d % 2;
        const auto& gold_words = label == 1 ? positive_words() : negative_words();
        const auto& other_words = label == 1 ? negative_words() : positive_words();

        std::size_t len = 110 + draw(rng, 30);
        std::vector<std::string> tokens(len);
        for (auto& tok : tokens) tok = fillers[draw(rng, fillers.size())];

        std::size_t evidence = 4 + draw(rng, 5);  // 4..8 gold-class words
        std::size_t window = 16;
        std::size_t start = draw(rng, len - window);
        for (std::size_t i = 0; i < evidence; ++i)
            tokens[start + draw(rng, window)] = gold_words[draw(rng, gold_words.size())];
        for (std::size_t i = 0; i < 2; ++i)
            tokens[draw(rng, len)] = other_words[draw(rng, other_words.size())];

        std::string text;
        for (const auto& tok : tokens) {
            if (!text.empty()) text += ' ';
            text += tok;
        }
        data.push_back({std::move(text), label});
    }
    return data;
}

/// Every sentiment word maps to two out-of-vocabulary near-synonyms, so a
/// replacement erases the word's evidence without adding new evidence.
inline qselect::SynonymLexicon lexicon() {
    qselect::SynonymLexicon lex;
    for (const auto& words : {positive_words(), negative_words()})
        for (const auto& w : words) lex.add(w, {w + "ish", w + "esque"});
    return lex;
}

}  // namespace toy
