#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "qselect/attack.hpp"
#include "qselect/naive_bayes.hpp"

using namespace qselect;

namespace {

// Oracle with a fixed target probability per exact input string.
ScriptedOracle table_oracle(std::map<std::string, double> table, double fallback) {
    return ScriptedOracle([table = std::move(table), fallback](const std::string& text) {
        auto it = table.find(text);
        return it == table.end() ? fallback : it->second;
    });
}

}  // namespace

TEST_CASE("replace_best picks the flip or the greatest drop") {
    auto text = TokenizedText::tokenize("a b", Granularity::Word);
    QueryLedger ledger;

    SUBCASE("short-circuits on the first flip") {
        auto oracle = table_oracle({{"a b", 0.9}, {"w1 b", 0.8}, {"w2 b", 0.6}, {"w3 b", 0.2}},
                                   0.9);
        SelectionRun run(&text, &oracle, &ledger);
        run.establish_base();
        auto result = replace_best(text, 0, {"w1", "w2", "w3", "w4"}, run);
        CHECK(result.flipped);
        CHECK(result.text.join() == "w3 b");
        CHECK(ledger.replacement_queries() == 3);  // w4 never evaluated
    }

    SUBCASE("max drop wins without a flip") {
        auto oracle = table_oracle({{"a b", 0.9}, {"w1 b", 0.8}, {"w2 b", 0.6}}, 0.9);
        SelectionRun run(&text, &oracle, &ledger);
        run.establish_base();
        auto result = replace_best(text, 0, {"w1", "w2"}, run);
        CHECK_FALSE(result.flipped);
        CHECK(result.text.join() == "w2 b");
        CHECK(result.best_drop == doctest::Approx(0.3));
    }

    SUBCASE("negative drop is still applied") {
        auto oracle = table_oracle({{"a b", 0.9}, {"w1 b", 0.95}}, 0.9);
        SelectionRun run(&text, &oracle, &ledger);
        run.establish_base();
        auto result = replace_best(text, 0, {"w1"}, run);
        CHECK_FALSE(result.flipped);
        CHECK(result.text.join() == "w1 b");
        CHECK(result.best_drop == doctest::Approx(-0.05));
    }

    SUBCASE("ties go to the earliest candidate") {
        auto oracle = table_oracle({{"a b", 0.9}, {"w1 b", 0.6}, {"w2 b", 0.6}}, 0.9);
        SelectionRun run(&text, &oracle, &ledger);
        run.establish_base();
        CHECK(replace_best(text, 0, {"w1", "w2"}, run).text.join() == "w1 b");
    }

    SUBCASE("empty candidates") {
        auto oracle = table_oracle({}, 0.9);
        SelectionRun run(&text, &oracle, &ledger);
        run.establish_base();
        CHECK_THROWS_AS(replace_best(text, 0, {}, run), EmptyCandidatesError);
    }
}

TEST_CASE("attack flips a toy naive Bayes target") {
    auto model = NaiveBayesModel::train(
        {{"great movie", 1}, {"great plot", 1}, {"bad movie", 0}, {"bad plot", 0}}, 1.0);
    SynonymLexicon lexicon;
    lexicon.add("great", {"fine"});

    auto text = TokenizedText::tokenize("great movie", Granularity::Word);
    QueryLedger ledger;
    AttackOutcome outcome =
        attack_example(text, 1, model, SelectorKind::Greedy, 1, lexicon, ledger);
    CHECK(outcome.success);
    CHECK(outcome.modified_positions == std::set<std::size_t>{0});
    CHECK(outcome.final_label == 0);
    CHECK(outcome.final_text == "fine movie");
    // 1 baseline + 2 selection + 1 replacement
    CHECK(outcome.queries.total() ==
          1 + outcome.queries.selection_queries() + outcome.queries.replacement_queries());
}

TEST_CASE("originally misclassified examples are skipped") {
    auto model = NaiveBayesModel::train({{"good", 1}, {"bad", 0}}, 1.0);
    auto text = TokenizedText::tokenize("good", Granularity::Word);
    SynonymLexicon lexicon;
    QueryLedger ledger;
    AttackOutcome outcome =
        attack_example(text, 0, model, SelectorKind::Binary, 5, lexicon, ledger);
    CHECK(outcome.skipped);
    CHECK_FALSE(outcome.success);
    CHECK(outcome.modified_positions.empty());
    CHECK(outcome.queries.total() == 1);
}

TEST_CASE("empty lexicon spends the round without modification") {
    auto model = NaiveBayesModel::train({{"good", 1}, {"bad", 0}}, 1.0);
    auto text = TokenizedText::tokenize("good good", Granularity::Word);
    SynonymLexicon lexicon;
    QueryLedger ledger;
    AttackOutcome outcome =
        attack_example(text, 1, model, SelectorKind::Greedy, 1, lexicon, ledger);
    CHECK_FALSE(outcome.success);
    CHECK(outcome.modified_positions.empty());
    CHECK(outcome.queries.selection_queries() == 2);  // one full greedy pass
    CHECK(outcome.queries.replacement_queries() == 0);
}

TEST_CASE("budget and no-double-modification invariants") {
    // every replacement nudges the score down but nothing flips
    auto oracle = ScriptedOracle([](const std::string& text) {
        double p = 0.95;
        for (char c : text)
            if (c == 'z') p -= 0.01;
        return p;
    });
    auto text = TokenizedText::tokenize("a b c d e f g h", Granularity::Word);
    SynonymLexicon lexicon;
    for (const char* w : {"a", "b", "c", "d", "e", "f", "g", "h"})
        lexicon.add(w, {std::string(w) + "z"});

    for (std::size_t k : {std::size_t{3}, std::size_t{8}, kAll}) {
        QueryLedger ledger;
        AttackOutcome outcome =
            attack_example(text, 1, oracle, SelectorKind::Binary, k, lexicon, ledger);
        CHECK_FALSE(outcome.success);
        std::size_t budget = k == kAll ? text.size() : k;
        CHECK(outcome.modified_positions.size() <= budget);
        CHECK(outcome.queries.total() ==
              1 + outcome.queries.selection_queries() + outcome.queries.replacement_queries());
    }
}

TEST_CASE("success soundness: the final text really flips") {
    auto model = NaiveBayesModel::train({{"great fun great fun", 1},
                                         {"great good great", 1},
                                         {"bad awful bad", 0},
                                         {"awful bad awful", 0}},
                                        1.0);
    SynonymLexicon lexicon;
    lexicon.add("great", {"okayish"});
    lexicon.add("fun", {"meh"});
    auto text = TokenizedText::tokenize("great fun the movie was great fun", Granularity::Word);
    for (SelectorKind kind : {SelectorKind::Greedy, SelectorKind::Binary}) {
        QueryLedger ledger;
        AttackOutcome outcome = attack_example(text, 1, model, kind, kAll, lexicon, ledger);
        if (outcome.success) {
            Verdict recheck = model.classify(outcome.final_text);
            CHECK(recheck.label == outcome.final_label);
            CHECK(recheck.label != outcome.original_label);
        }
    }
}

TEST_CASE("monotone k: success at k implies success at larger k") {
    auto model = NaiveBayesModel::train({{"great fun great fun nice", 1},
                                         {"great nice fun", 1},
                                         {"bad awful sad", 0},
                                         {"awful sad bad", 0}},
                                        1.0);
    SynonymLexicon lexicon;
    for (const char* w : {"great", "fun", "nice"}) lexicon.add(w, {std::string(w) + "x"});
    auto text =
        TokenizedText::tokenize("the great movie was fun and nice to watch", Granularity::Word);
    for (SelectorKind kind : {SelectorKind::Greedy, SelectorKind::Binary}) {
        bool succeeded = false;
        for (std::size_t k = 1; k <= 10; ++k) {
            QueryLedger ledger;
            AttackOutcome outcome = attack_example(text, 1, model, kind, k, lexicon, ledger);
            if (succeeded) CHECK(outcome.success);
            succeeded = succeeded || outcome.success;
        }
    }
}

TEST_CASE("char attack breaks a keyword with confusables") {
    KeywordOracle oracle({{"bad", 0.5}}, 0.9);
    auto text = TokenizedText::tokenize("bad", Granularity::Char);
    ConfusablesMap confusables = ConfusablesMap::default_ascii();
    QueryLedger ledger;
    AttackOutcome outcome =
        char_attack_example(text, 1, oracle, SelectorKind::Binary, 1, confusables, ledger);
    CHECK(outcome.success);
    CHECK(outcome.final_text.find("bad") == std::string::npos);
}

TEST_CASE("char attack skips unmapped characters") {
    KeywordOracle oracle({{"77", 0.5}}, 0.9);
    auto text = TokenizedText::tokenize("7 7 a", Granularity::Char);
    ConfusablesMap confusables = ConfusablesMap::default_ascii();  // no digits
    QueryLedger ledger;
    AttackOutcome outcome =
        char_attack_example(text, 1, oracle, SelectorKind::Greedy, kAll, confusables, ledger);
    CHECK_FALSE(outcome.success);
    // digit rounds were spent without modification; only 'a' was replaceable
    CHECK(outcome.modified_positions.size() <= 1);
}

TEST_CASE("lexicon and confusables file parsing") {
    auto dir = std::filesystem::temp_directory_path();
    auto lex_path = (dir / "qselect_lex.tsv").string();
    {
        std::ofstream out(lex_path);
        out << "# comment line\n";
        out << "great\tfine,decent,great\n";  // self-reference dropped
        out << "bad\tpoor\n";
    }
    auto lex = SynonymLexicon::load_tsv(lex_path);
    CHECK(lex.candidates("great") == std::vector<std::string>{"fine", "decent"});
    CHECK(lex.candidates("bad") == std::vector<std::string>{"poor"});
    CHECK(lex.candidates("absent").empty());

    auto conf_path = (dir / "qselect_conf.tsv").string();
    {
        std::ofstream out(conf_path);
        out << "a\tq\n";
        out << "b\tb\n";  // identity mapping rejected
    }
    auto conf = ConfusablesMap::load_tsv(conf_path);
    CHECK(conf.lookup("a") == std::optional<std::string>("q"));
    CHECK_FALSE(conf.lookup("b").has_value());

    std::filesystem::remove(lex_path);
    std::filesystem::remove(conf_path);
}
