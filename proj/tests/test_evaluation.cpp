#include <doctest.h>

#include <random>

#include "lemma/evaluation.hpp"
#include "lemma/gradcheck.hpp"

using namespace lemma;

namespace {

Corpus corpus_of(std::vector<std::tuple<std::string, std::string, std::string>> triples) {
    Corpus c;
    Sentence s;
    for (auto& [form, pos, lem] : triples) s.tokens.push_back({form, pos, {}, lem});
    c.sentences.push_back(std::move(s));
    return c;
}

}  // namespace

TEST_CASE("accuracy basics") {
    Corpus gold = corpus_of({{"a", "N", "x"}, {"b", "N", "y"}, {"c", "N", "z"}, {"d", "N", "w"}});
    CHECK(accuracy(gold, gold) == 1.0);
    Corpus pred = gold;
    pred.sentences[0].tokens[2].lemma = "wrong";
    CHECK(accuracy(pred, gold) == doctest::Approx(0.75));
    Corpus short_pred;
    CHECK_THROWS_AS(accuracy(short_pred, gold), std::invalid_argument);
}

TEST_CASE("accuracy matches a token-by-token recount") {
    std::mt19937_64 rng(2);
    Corpus gold, pred;
    Sentence gs, ps;
    size_t correct = 0, total = 0;
    for (int i = 0; i < 200; ++i) {
        std::string lemma(1, char('a' + rng() % 4));
        std::string guess(1, char('a' + rng() % 4));
        gs.tokens.push_back({"f", "N", {}, lemma});
        ps.tokens.push_back({"f", "N", {}, guess});
        ++total;
        if (lemma == guess) ++correct;
    }
    gold.sentences.push_back(gs);
    pred.sentences.push_back(ps);
    CHECK(accuracy(pred, gold) == doctest::Approx(double(correct) / double(total)));
}

TEST_CASE("oov accuracy and rate") {
    Corpus gold = corpus_of(
        {{"in1", "N", "a"}, {"in2", "N", "b"}, {"out1", "N", "c"}, {"out2", "N", "d"},
         {"out3", "N", "e"}, {"in3", "N", "f"}});
    Corpus pred = gold;
    pred.sentences[0].tokens[2].lemma = "wrong";  // out1 wrong
    pred.sentences[0].tokens[5].lemma = "wrong";  // in3 wrong (not OOV)
    std::unordered_set<std::string> train_forms = {"in1", "in2", "in3"};
    EvalReport r = evaluate(pred, gold, train_forms);
    CHECK(r.total == 6);
    CHECK(r.correct == 4);
    CHECK(r.oov_total == 3);
    CHECK(r.oov_correct == 2);
    CHECK(r.oov_rate() == doctest::Approx(0.5));
    CHECK(r.oov_accuracy() == doctest::Approx(2.0 / 3.0));
    CHECK(!r.oov_undefined);
}

TEST_CASE("zero OOV tokens reported as 1.0 with an explicit flag") {
    Corpus gold = corpus_of({{"a", "N", "x"}});
    Corpus pred = gold;
    pred.sentences[0].tokens[0].lemma = "wrong";
    EvalReport r = evaluate(pred, gold, {"a"});
    CHECK(r.oov_total == 0);
    CHECK(r.oov_undefined);
    CHECK(r.oov_accuracy() == 1.0);
    CHECK(r.oov_rate() == 0.0);
}

TEST_CASE("disjoint vocabularies: OOV accuracy equals all-words accuracy") {
    Corpus gold = corpus_of({{"a", "N", "x"}, {"b", "N", "y"}});
    Corpus pred = gold;
    pred.sentences[0].tokens[1].lemma = "no";
    EvalReport r = evaluate(pred, gold, {});
    CHECK(r.oov_accuracy() == doctest::Approx(r.accuracy()));
    CHECK(r.oov_rate() == 1.0);
}

TEST_CASE("cascade heuristic fits identity and lowercase rules") {
    // PRON types keep the form; PROPN types lowercase; VERB neither
    Corpus train = corpus_of({{"it", "PRON", "it"},
                              {"they", "PRON", "they"},
                              {"Rome", "PROPN", "rome"},
                              {"Berlin", "PROPN", "berlin"},
                              {"ran", "VERB", "run"},
                              {"went", "VERB", "go"}});
    auto h = CascadeHeuristic::fit(train);
    CHECK(h.rule_for("PRON") == CascadeHeuristic::Rule::Identity);
    CHECK(h.rule_for("PROPN") == CascadeHeuristic::Rule::Lowercase);
    CHECK(h.rule_for("VERB") == CascadeHeuristic::Rule::Abstain);
    CHECK(h.rule_for("NEVER_SEEN") == CascadeHeuristic::Rule::Abstain);
}

TEST_CASE("cascade precedence: lexicon, then heuristic, then decoder") {
    auto model = make_toy_model(41);
    UniqueLexicon lex;
    lex.insert_if_absent("ab", "N", "from-lexicon");
    Corpus train = corpus_of({{"it", "PRON", "it"}});
    auto h = CascadeHeuristic::fit(train);

    Corpus input = corpus_of({{"ab", "N", ""}, {"it", "PRON", ""}, {"ba", "V", ""}});
    CascadeStats stats;
    Corpus out = cascade_predict(lex, h, model, input, &stats);
    CHECK(out.sentences[0].tokens[0].lemma == "from-lexicon");
    CHECK(out.sentences[0].tokens[1].lemma == "it");
    CHECK(stats.lexicon_hits == 1);
    CHECK(stats.heuristic_hits == 1);
    CHECK(stats.decoder_calls == 1);
}

TEST_CASE("cascade never decodes forms present in the unique lexicon") {
    auto model = make_toy_model(43);
    UniqueLexicon lex;
    Corpus input;
    Sentence s;
    for (int i = 0; i < 20; ++i) {
        std::string form = std::string("f") + std::to_string(i);
        lex.insert_if_absent(form, "N", "lem");
        s.tokens.push_back({form, "N", {}, ""});
    }
    input.sentences.push_back(s);
    CascadeStats stats;
    cascade_predict(lex, CascadeHeuristic{}, model, input, &stats);
    CHECK(stats.decoder_calls == 0);
    CHECK(stats.lexicon_hits == 20);
}

TEST_CASE("compare_reports renders diffs against the first system") {
    EvalReport a;
    a.total = 4;
    a.correct = 2;
    a.oov_total = 2;
    a.oov_correct = 1;
    EvalReport b = a;
    b.correct = 3;
    std::string one = compare_reports({{"base", a}});
    CHECK(one.find("base\t0.5000") != std::string::npos);

    std::string same = compare_reports({{"base", a}, {"again", a}});
    CHECK(same.find("again\t0.5000\t0.5000\t0.5000\t+0.0000\t+0.0000") != std::string::npos);

    std::string diff = compare_reports({{"base", a}, {"better", b}});
    // diff column equals the recomputed subtraction: 0.75 - 0.50
    CHECK(diff.find("better\t0.7500\t0.5000\t0.5000\t+0.2500\t+0.0000") != std::string::npos);
    CHECK_THROWS_AS(compare_reports({}), std::invalid_argument);
}

TEST_CASE("lowercasing helper covers ASCII, Latin-1 and Cyrillic") {
    CHECK(to_lower("Rome") == "rome");
    CHECK(to_lower("\xc3\x84pfel") == "\xc3\xa4pfel");                  // Ä -> ä
    CHECK(to_lower("\xd0\x9c\xd0\xbe\xd1\x81\xd0\xba") == "\xd0\xbc\xd0\xbe\xd1\x81\xd0\xba");
}
