#pragma once

#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qselect/errors.hpp"
#include "qselect/oracle.hpp"
#include "qselect/textcore.hpp"

namespace qselect {

/// Multinomial naive Bayes over whitespace unigrams with Laplace smoothing.
/// Out-of-vocabulary tokens carry no evidence; an empty input returns the
/// class priors.
class NaiveBayesModel : public Oracle {
public:
    static NaiveBayesModel train(const std::vector<std::pair<std::string, std::size_t>>& corpus,
                                 double alpha) {
        if (corpus.empty()) throw EmptyCorpusError("training corpus is empty");
        if (alpha <= 0.0) throw ConfigError("smoothing alpha must be positive");

        std::size_t num_classes = 0;
        for (const auto& [_, label] : corpus) num_classes = std::max(num_classes, label + 1);
        if (num_classes < 2) throw SingleClassCorpusError("corpus has a single class");

        std::vector<std::size_t> class_docs(num_classes, 0);
        std::vector<std::size_t> class_tokens(num_classes, 0);
        // std::map keeps vocabulary iteration (and the persisted file) ordered.
        std::map<std::string, std::vector<std::size_t>> counts;
        for (const auto& [text, label] : corpus) {
            ++class_docs[label];
            try {
                TokenizedText parsed = TokenizedText::tokenize(text, Granularity::Word);
                for (const auto& tok : parsed.tokens()) {
                    auto& row = counts[tok];
                    row.resize(num_classes, 0);
                    ++row[label];
                    ++class_tokens[label];
                }
            } catch (const EmptyTextError&) {
                // empty document still counts toward the prior
            }
        }
        for (std::size_t c = 0; c < num_classes; ++c)
            if (class_docs[c] == 0) throw SingleClassCorpusError("class without examples");

        NaiveBayesModel model;
        model.alpha_ = alpha;
        model.num_classes_ = num_classes;
        model.class_log_priors_.resize(num_classes);
        for (std::size_t c = 0; c < num_classes; ++c)
            model.class_log_priors_[c] = std::log(static_cast<double>(class_docs[c]) /
                                                  static_cast<double>(corpus.size()));
        double vocab_size = static_cast<double>(counts.size());
        for (const auto& [tok, row] : counts) {
            std::vector<double> ll(num_classes);
            for (std::size_t c = 0; c < num_classes; ++c) {
                std::size_t n = row.size() > c ? row[c] : 0;
                ll[c] = std::log((static_cast<double>(n) + alpha) /
                                 (static_cast<double>(class_tokens[c]) + alpha * vocab_size));
            }
            model.token_log_likelihoods_.emplace(tok, std::move(ll));
        }
        return model;
    }

    Verdict classify(const std::string& text) const override {
        std::vector<double> log_post = class_log_priors_;
        try {
            TokenizedText parsed = TokenizedText::tokenize(text, Granularity::Word);
            for (const auto& tok : parsed.tokens()) {
                auto it = token_log_likelihoods_.find(tok);
                if (it == token_log_likelihoods_.end()) continue;
                for (std::size_t c = 0; c < num_classes_; ++c) log_post[c] += it->second[c];
            }
        } catch (const EmptyTextError&) {
            // priors only
        }
        double max_lp = *std::max_element(log_post.begin(), log_post.end());
        double sum = 0.0;
        for (double& lp : log_post) {
            lp = std::exp(lp - max_lp);
            sum += lp;
        }
        for (double& lp : log_post) lp /= sum;
        return Verdict::from_probs(std::move(log_post));
    }

    std::size_t num_classes() const { return num_classes_; }
    double alpha() const { return alpha_; }
    const std::vector<double>& class_log_priors() const { return class_log_priors_; }
    std::size_t vocabulary_size() const { return token_log_likelihoods_.size(); }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["alpha"] = alpha_;
        j["classes"] = num_classes_;
        j["log_priors"] = class_log_priors_;
        nlohmann::ordered_json vocab = nlohmann::ordered_json::object();
        std::map<std::string, std::vector<double>> ordered(token_log_likelihoods_.begin(),
                                                           token_log_likelihoods_.end());
        for (const auto& [tok, ll] : ordered) vocab[tok] = ll;
        j["vocab"] = std::move(vocab);
        return j;
    }

    static NaiveBayesModel from_json(const nlohmann::json& j) {
        NaiveBayesModel model;
        model.alpha_ = j.at("alpha").get<double>();
        model.num_classes_ = j.at("classes").get<std::size_t>();
        model.class_log_priors_ = j.at("log_priors").get<std::vector<double>>();
        for (const auto& [tok, ll] : j.at("vocab").items()) {
            auto row = ll.get<std::vector<double>>();
            if (row.size() != model.num_classes_)
                throw MalformedResponseError("vocab row size mismatch for token " + tok);
            model.token_log_likelihoods_.emplace(tok, std::move(row));
        }
        return model;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw ConfigError("cannot write model file " + path);
        out << to_json().dump(2) << '\n';
    }

    static NaiveBayesModel load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read model file " + path);
        nlohmann::json j;
        in >> j;
        return from_json(j);
    }

private:
    NaiveBayesModel() = default;

    double alpha_ = 1.0;
    std::size_t num_classes_ = 0;
    std::vector<double> class_log_priors_;
    std::unordered_map<std::string, std::vector<double>> token_log_likelihoods_;
};

}  // namespace qselect
