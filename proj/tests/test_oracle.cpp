#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "qselect/naive_bayes.hpp"
#include "qselect/oracle.hpp"

using namespace qselect;

TEST_CASE("verdict invariants") {
    Verdict v = Verdict::from_probs({0.2, 0.8});
    CHECK(v.label == 1);
    CHECK_NOTHROW(v.validate());

    // ties break to the lowest class index
    CHECK(Verdict::from_probs({0.5, 0.5}).label == 0);

    Verdict bad;
    bad.label = 0;
    bad.probs = {0.5, 0.6};
    CHECK_THROWS_AS(bad.validate(), ProbabilityInvalidError);
}

TEST_CASE("ledger conservation") {
    ScriptedOracle oracle([](const std::string&) { return 0.7; });
    QueryLedger ledger;
    query(oracle, "a", ledger, QueryPhase::Baseline);
    for (int i = 0; i < 5; ++i) query(oracle, "b", ledger, QueryPhase::Selection);
    for (int i = 0; i < 3; ++i) query(oracle, "c", ledger, QueryPhase::Replacement);
    ledger.record_cache_hit();
    CHECK(ledger.total() == 9);
    CHECK(ledger.baseline_queries() == 1);
    CHECK(ledger.selection_queries() == 5);
    CHECK(ledger.replacement_queries() == 3);
    CHECK(ledger.cache_hits() == 1);
    CHECK(ledger.total() ==
          ledger.baseline_queries() + ledger.selection_queries() + ledger.replacement_queries());
}

TEST_CASE("additive oracle drops track removed contributions") {
    auto text = TokenizedText::tokenize("w0 w1 w2 w3", Granularity::Word);
    AdditiveOracle oracle(text, {{"w2", 0.4}}, 0.9);

    CHECK(oracle.classify(text.join()).prob(1) == doctest::Approx(0.9));
    CHECK(oracle.classify(text.exclude({Span{2, 2}})).prob(1) == doctest::Approx(0.5));
    CHECK(oracle.classify(text.exclude({Span{0, 1}})).prob(1) == doctest::Approx(0.9));
    // empty input: everything removed
    CHECK(oracle.classify("").prob(1) == doctest::Approx(0.5));
    // squash keeps the distribution valid
    AdditiveOracle big(text, {{"w2", 5.0}}, 0.9);
    CHECK_NOTHROW(big.classify("").validate());
    CHECK(big.classify("").prob(1) == doctest::Approx(0.001));
}

TEST_CASE("additive oracle ground truth argmax") {
    auto oracle = AdditiveOracle::positional({0.1, 0.4, 0.0, 0.2});
    auto text = TokenizedText::tokenize("w0 w1 w2 w3", Granularity::Word);
    double base = oracle.classify(text.join()).prob(1);
    std::size_t best = 0;
    double best_drop = -1.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double drop = base - oracle.classify(text.exclude({Span{i, i}})).prob(1);
        if (drop > best_drop) {
            best_drop = drop;
            best = i;
        }
    }
    CHECK(best == 1);
}

TEST_CASE("naive bayes on the two-word toy corpus") {
    auto model = NaiveBayesModel::train({{"good good", 1}, {"bad bad", 0}}, 1.0);
    CHECK(model.classify("good").label == 1);
    CHECK(model.classify("bad").label == 0);

    // no evidence: priors with tie-break to class 0
    Verdict empty = model.classify("");
    CHECK(empty.label == 0);
    CHECK(empty.prob(0) == doctest::Approx(0.5));
    CHECK(empty.prob(1) == doctest::Approx(0.5));

    // hand-computed smoothed likelihoods: P(good|1) = 3/4, P(good|0) = 1/4
    Verdict good = model.classify("good");
    CHECK(good.prob(1) == doctest::Approx(0.75));

    // out-of-vocabulary input stays normalized
    CHECK_NOTHROW(model.classify("zzz qqq").validate());
}

TEST_CASE("naive bayes training errors") {
    CHECK_THROWS_AS(NaiveBayesModel::train({}, 1.0), EmptyCorpusError);
    CHECK_THROWS_AS(NaiveBayesModel::train({{"a", 0}, {"b", 0}}, 1.0), SingleClassCorpusError);
    CHECK_THROWS_AS(NaiveBayesModel::train({{"a", 0}, {"b", 2}}, 1.0), SingleClassCorpusError);
}

TEST_CASE("naive bayes persistence round-trip") {
    auto model = NaiveBayesModel::train({{"good fine good", 1}, {"bad sad", 0}, {"fine bad", 0}},
                                        0.5);
    auto path = std::filesystem::temp_directory_path() / "qselect_nb_model.json";
    model.save(path.string());
    auto loaded = NaiveBayesModel::load(path.string());
    for (const char* text : {"good", "bad", "fine sad", "good bad fine", ""}) {
        Verdict a = model.classify(text);
        Verdict b = loaded.classify(text);
        CHECK(a.label == b.label);
        for (std::size_t c = 0; c < a.probs.size(); ++c)
            CHECK(a.probs[c] == doctest::Approx(b.probs[c]).epsilon(1e-12));
    }
    std::filesystem::remove(path);
}
