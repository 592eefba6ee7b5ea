// Command-line front end: attack runs, k sweeps, agreement experiments,
// naive Bayes training, and theoretical query estimates.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qselect/harness.hpp"

namespace {

using namespace qselect;

ExperimentConfig base_config;
std::string target_arg;
std::string selector_arg = "greedy";
std::string k_arg = "ALL";
std::string granularity_arg = "word";
std::string bins_path;
long sample_arg = -1;

void apply_common_args(ExperimentConfig& config) {
    if (target_arg.rfind("builtin:", 0) == 0) {
        config.target_kind = TargetKind::Builtin;
        config.target_spec = target_arg.substr(8);
    } else if (target_arg.rfind("http:", 0) == 0) {
        config.target_kind = TargetKind::Remote;
        config.target_spec = target_arg;  // the full URL is the endpoint
    } else if (target_arg.rfind("scripted:", 0) == 0) {
        config.target_kind = TargetKind::Scripted;
        config.target_spec = target_arg.substr(9);
    } else {
        throw ConfigError("target must be builtin:<model.json>, http:<url>, or "
                          "scripted:<spec.json>");
    }

    if (selector_arg == "greedy") {
        config.selector = SelectorMode::Greedy;
    } else if (selector_arg == "binary") {
        config.selector = SelectorMode::Binary;
    } else if (selector_arg.rfind("oracle:", 0) == 0) {
        config.selector = SelectorMode::OracleCombined;
        config.j_threshold = std::stoul(selector_arg.substr(7));
    } else if (selector_arg.rfind("confidence:", 0) == 0) {
        config.selector = SelectorMode::ConfidenceCombined;
        config.confidence_bin = selector_arg.substr(11);
    } else {
        throw ConfigError("selector must be greedy, binary, oracle:<j>, or confidence:<bin>");
    }

    if (k_arg == "ALL" || k_arg == "all") {
        config.k = kAll;
    } else {
        config.k = std::stoul(k_arg);
        if (config.k == 0) throw ConfigError("k must be >= 1 or ALL");
    }

    if (granularity_arg == "word") {
        config.granularity = Granularity::Word;
    } else if (granularity_arg == "char") {
        config.granularity = Granularity::Char;
    } else {
        throw ConfigError("granularity must be word or char");
    }

    if (sample_arg >= 0) config.sample_size = static_cast<std::size_t>(sample_arg);
    if (!bins_path.empty()) config.bins = ConfidenceBins::load(bins_path);
}

void add_common_options(CLI::App* cmd) {
    cmd->add_option("--dataset", base_config.dataset_path, "JSONL dataset path")->required();
    cmd->add_option("--target", target_arg,
                    "builtin:<model.json> | http:<url> | scripted:<spec.json>")
        ->required();
    cmd->add_option("--selector", selector_arg,
                    "greedy | binary | oracle:<j> | confidence:<bin>");
    cmd->add_option("--k", k_arg, "max words to modify (integer or ALL)");
    cmd->add_option("--granularity", granularity_arg, "word | char");
    cmd->add_option("--lexicon", base_config.lexicon_path, "synonym lexicon TSV");
    cmd->add_option("--confusables", base_config.confusables_path, "confusables TSV");
    cmd->add_option("--bins", bins_path, "bins config JSON path");
    cmd->add_option("--sample", sample_arg, "sample size (default: full dataset)");
    cmd->add_option("--seed", base_config.rng_seed, "sampling RNG seed");
    cmd->add_option("--out", base_config.output_path, "output file path");
}

void print_aggregate(const AggregateReport& report) {
    std::printf("examples:            %zu\n", report.n_examples);
    std::printf("successes:           %zu\n", report.n_success);
    std::printf("original_acc:        %.1f\n", report.original_acc);
    std::printf("attack_acc:          %.1f\n", report.attack_acc);
    std::printf("avg_queries:         %.1f\n", report.avg_queries);
    if (report.avg_queries_success)
        std::printf("avg_queries_success: %.1f\n", *report.avg_queries_success);
    else
        std::printf("avg_queries_success: n/a\n");
    std::printf("asr:                 %.5f\n", asr(report.original_acc, report.attack_acc));
}

int cmd_attack() {
    ExperimentConfig config = base_config;
    apply_common_args(config);
    ExperimentResult result = run_experiment(config);
    print_aggregate(result.report);
    return 0;
}

int cmd_sweep(const std::string& ks_arg) {
    ExperimentConfig config = base_config;
    apply_common_args(config);

    std::vector<std::size_t> ks;
    std::stringstream ss(ks_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "ALL" || item == "all")
            ks.push_back(kAll);
        else
            ks.push_back(std::stoul(item));
    }

    std::vector<DatasetRecord> data = load_dataset(config.dataset_path);
    auto oracle = make_target(config);
    SynonymLexicon lexicon;
    ConfusablesMap confusables = ConfusablesMap::default_ascii();
    if (config.granularity == Granularity::Word) {
        if (config.lexicon_path.empty()) throw ConfigError("sweep needs --lexicon");
        lexicon = SynonymLexicon::load_tsv(config.lexicon_path);
    } else if (!config.confusables_path.empty()) {
        confusables = ConfusablesMap::load_tsv(config.confusables_path);
    }

    std::string out_path = config.output_path;
    std::string csv = run_k_sweep(data, *oracle, config, lexicon, confusables, ks);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream out(out_path);
        if (!out) throw ConfigError("cannot write " + out_path);
        out << csv;
    }
    return 0;
}

int cmd_agree(std::size_t top_k) {
    ExperimentConfig config = base_config;
    apply_common_args(config);

    std::vector<DatasetRecord> data = load_dataset(config.dataset_path);
    auto oracle = make_target(config);
    AgreementRun agreement = run_agreement(data, *oracle, config, top_k);

    auto stats_json = [](const AgreementStats& s) {
        nlohmann::ordered_json j;
        j["first_gs_position_mean"] = s.first_gs_position_mean;
        j["first_gs_position_median"] = s.first_gs_position_median;
        j["not_found"] = s.not_found;
        j["overlap_mean"] = s.overlap_mean;
        j["overlap_median"] = s.overlap_median;
        j["none_overlap"] = s.none_overlap;
        return j;
    };
    nlohmann::ordered_json j;
    j["bs_vs_gs"] = stats_json(agreement.bs_vs_gs);
    j["random_vs_gs"] = stats_json(agreement.random_vs_gs);
    if (config.output_path.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        std::ofstream out(config.output_path);
        if (!out) throw ConfigError("cannot write " + config.output_path);
        out << j.dump(2) << '\n';
    }
    return 0;
}

int cmd_train_nb(const std::string& corpus_path, double alpha, const std::string& out_path) {
    std::vector<DatasetRecord> records = load_dataset(corpus_path);
    std::vector<std::pair<std::string, std::size_t>> corpus;
    corpus.reserve(records.size());
    for (auto& r : records) corpus.emplace_back(std::move(r.text), r.label);
    NaiveBayesModel model = NaiveBayesModel::train(corpus, alpha);
    model.save(out_path);
    std::printf("trained %zu-class model, vocabulary %zu, saved to %s\n", model.num_classes(),
                model.vocabulary_size(), out_path.c_str());
    return 0;
}

int cmd_theory(std::size_t n, std::size_t m) {
    std::printf("n=%zu m=%zu\n", n, m);
    std::printf("best_case:    %zu\n", theoretical_best_case(n));
    std::printf("average_case: %zu\n", theoretical_average_case(n, m));
    std::printf("worst_case:   %zu\n", theoretical_worst_case(n));
    std::printf("greedy:       %zu\n", n);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Query-efficient black-box token selection and attack harness"};
    app.require_subcommand(1);

    auto* attack = app.add_subcommand("attack", "run the adversarial attack on a dataset");
    add_common_options(attack);

    auto* sweep = app.add_subcommand("sweep", "run GS and BS across a list of k budgets");
    std::string ks_arg = "5,15,30,50,ALL";
    sweep->add_option("--ks", ks_arg, "comma-separated k values (integers or ALL)");
    add_common_options(sweep);

    auto* agree = app.add_subcommand("agree", "BS/random agreement with the GS top-k ranking");
    std::size_t top_k = 10;
    agree->add_option("--top-k", top_k, "ranking depth to compare");
    add_common_options(agree);

    auto* train = app.add_subcommand("train-nb", "train the builtin naive Bayes target");
    std::string corpus_path, model_out;
    double alpha = 1.0;
    train->add_option("--corpus", corpus_path, "JSONL training corpus")->required();
    train->add_option("--alpha", alpha, "Laplace smoothing");
    train->add_option("--out", model_out, "model JSON output path")->required();

    auto* theory = app.add_subcommand("theory", "print theoretical query estimates");
    std::size_t theory_n = 0, theory_m = 1;
    theory->add_option("--n", theory_n, "text length in tokens")->required();
    theory->add_option("--m", theory_m, "number of tokens to find");

    CLI11_PARSE(app, argc, argv);

    try {
        if (attack->parsed()) return cmd_attack();
        if (sweep->parsed()) return cmd_sweep(ks_arg);
        if (agree->parsed()) return cmd_agree(top_k);
        if (train->parsed()) return cmd_train_nb(corpus_path, alpha, model_out);
        if (theory->parsed()) return cmd_theory(theory_n, theory_m);
    } catch (const OracleUnavailableError& e) {
        std::cerr << "oracle failure: " << e.what() << '\n';
        return 2;
    } catch (const MalformedResponseError& e) {
        std::cerr << "oracle failure: " << e.what() << '\n';
        return 2;
    } catch (const ProbabilityInvalidError& e) {
        std::cerr << "oracle failure: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
