#include <doctest.h>

#include <filesystem>
#include <random>

#include "lemma/gradcheck.hpp"
#include "lemma/model.hpp"

using namespace lemma;

namespace {

Corpus tiny_corpus() {
    return parse_conllu(
        "1\tab\ta\tNOUN\t_\tNum=P\t_\t_\t_\t_\n"
        "2\tba\tb\tVERB\t_\t_\t_\t_\t_\t_\n\n");
}

ModelConfig tiny_config(uint64_t seed = 42) {
    ModelConfig cfg;
    cfg.emb_dim = 4;
    cfg.enc_hidden = 3;
    cfg.dec_hidden = 4;
    cfg.dropout = 0.0;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("build_vocab covers characters, tags, feats and specials") {
    EmptyProvider none;
    Vocab v = build_vocab(tiny_corpus(), {&none});
    CHECK(v.char_id("a") != Vocab::kUnk);
    CHECK(v.char_id("b") != Vocab::kUnk);
    CHECK(v.tag_id("NOUN") != Vocab::kUnk);
    CHECK(v.tag_id("VERB") != Vocab::kUnk);
    CHECK(v.feat_id("Num=P") != Vocab::kUnk);
    CHECK(v.char_id("\xd0\xb6") == Vocab::kUnk);  // unseen Cyrillic char
    // deterministic: rebuilding gives identical symbol list
    Vocab v2 = build_vocab(tiny_corpus(), {&none});
    CHECK(v == v2);
}

TEST_CASE("encode_source layout") {
    EmptyProvider none;
    Vocab v = build_vocab(parse_conllu("1\tdogs\tdog\tNOUN\t_\tNumber=Plur\t_\t_\t_\t_\n"), {&none});
    Token tok{"dogs", "NOUN", {"Number=Plur"}, "dog"};
    auto ids = encode_source(tok, v, true);
    std::vector<int> expect = {v.char_id("d"), v.char_id("o"), v.char_id("g"), v.char_id("s"),
                               Vocab::kSep, v.tag_id("NOUN"), v.feat_id("Number=Plur")};
    CHECK(ids == expect);

    auto pos_only = encode_source(tok, v, false);
    expect.pop_back();
    CHECK(pos_only == expect);

    Token nofeats{"dogs", "NOUN", {}, "dog"};
    CHECK(encode_source(nofeats, v, true) == pos_only);
}

TEST_CASE("encode_candidates") {
    EmptyProvider none;
    Vocab v = build_vocab(parse_conllu("1\tgut\tgut\tADJ\t_\t_\t_\t_\t_\t_\n"), {&none});
    CHECK(encode_candidates({}, v) == std::vector<int>{Vocab::kEmpty});
    CHECK(encode_candidates({"gut"}, v) ==
          std::vector<int>{v.char_id("g"), v.char_id("u"), v.char_id("t")});
    auto two = encode_candidates({"gu", "tu"}, v);
    CHECK(two == std::vector<int>{v.char_id("g"), v.char_id("u"), Vocab::kCsep, v.char_id("t"),
                                  v.char_id("u")});
}

TEST_CASE("apply_encoder_dropout at the extremes") {
    std::vector<Instance> batch(3);
    for (auto& ins : batch) ins.candidates = {10, 11};
    std::mt19937_64 rng(1);
    for (int i = 0; i < 50; ++i) {
        auto copy = batch;
        apply_encoder_dropout(copy, 0.0, rng);
        CHECK(copy == batch);
    }
    auto copy = batch;
    apply_encoder_dropout(copy, 1.0, rng);
    for (auto& ins : copy) CHECK(ins.candidates == std::vector<int>{Vocab::kEmpty});
}

TEST_CASE("encoder dropout rate is empirically close to p") {
    std::mt19937_64 rng(123);
    int dropped = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        std::vector<Instance> batch(2);
        for (auto& ins : batch) ins.candidates = {9};
        apply_encoder_dropout(batch, 0.8, rng);
        if (batch[0].candidates == std::vector<int>{Vocab::kEmpty}) ++dropped;
    }
    double rate = double(dropped) / n;
    CHECK(rate >= 0.78);
    CHECK(rate <= 0.82);
}

TEST_CASE("forward_loss is non-negative and near ln(V) at init scale") {
    auto model = make_toy_model(7);
    auto batch = toy_batch(model);
    double loss = model.forward_loss(batch);
    CHECK(loss >= 0.0);
    // small random weights keep logits near uniform
    CHECK(loss == doctest::Approx(std::log(double(model.vocab().size()))).epsilon(0.35));
}

TEST_CASE("forward_loss is permutation-invariant within a batch") {
    auto model = make_toy_model(3);
    auto batch = toy_batch(model);
    auto swapped = batch;
    std::swap(swapped[0], swapped[1]);
    CHECK(model.forward_loss(batch) == doctest::Approx(model.forward_loss(swapped)).epsilon(1e-12));
}

TEST_CASE("full model gradient check at toy dims") {
    auto model = make_toy_model(11);
    auto batch = toy_batch(model);
    auto build = [&](nn::Graph& g) { return model.forward_loss_var(g, batch, nullptr); };
    auto report = nn::grad_check(build, model.params());
    CHECK(report.max_rel_error < 1e-3);
}

TEST_CASE("greedy decode is deterministic and length-bounded") {
    EmptyProvider none;
    Vocab v = build_vocab(tiny_corpus(), {&none});
    EnhancedLemmatizer model(v, tiny_config());
    Token tok{"ab", "NOUN", {"Num=P"}, ""};
    std::string a = model.lemmatize(tok, none);
    std::string b = model.lemmatize(tok, none);
    CHECK(a == b);
    CHECK(utf8_length(a) <= utf8_length(tok.form) + size_t(model.config().max_decode_extra));
}

TEST_CASE("attention weights sum to one at every decode step") {
    auto model = make_toy_model(13);
    CandidateFileProvider provider(parse_candidate_tsv("ab\tba,a\n"));
    Token tok{"ab", "N", {"F=1"}, ""};
    DecodeTrace trace;
    model.lemmatize(tok, provider, &trace);
    REQUIRE(!trace.source_attention.empty());
    for (auto* side : {&trace.source_attention, &trace.candidate_attention})
        for (auto& weights : *side) {
            double sum = 0.0;
            for (double w : weights) sum += w;
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
}

TEST_CASE("empty candidate sequence keeps encoder-2 memory length 1") {
    auto model = make_toy_model(17);
    EmptyProvider none;
    Token tok{"ab", "N", {}, ""};
    DecodeTrace trace;
    model.lemmatize(tok, none, &trace);
    for (auto& w : trace.candidate_attention) {
        REQUIRE(w.size() == 1);
        CHECK(w[0] == doctest::Approx(1.0));
    }
}

TEST_CASE("model save/load round-trips bit-exactly") {
    auto model = make_toy_model(19);
    std::string bytes = model.serialize();
    auto loaded = EnhancedLemmatizer::deserialize(bytes);
    CHECK(loaded.vocab() == model.vocab());
    auto pa = model.params();
    auto pb = loaded.params();
    REQUIRE(pa.size() == pb.size());
    for (size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i]->name == pb[i]->name);
        CHECK(pa[i]->value.data == pb[i]->value.data);  // bit-equal doubles
    }
    // identical predictions on random inputs
    std::mt19937_64 rng(23);
    EmptyProvider none;
    for (int i = 0; i < 100; ++i) {
        std::string form;
        for (int j = 0, n = 1 + int(rng() % 4); j < n; ++j) form += char('a' + rng() % 2);
        Token tok{form, rng() % 2 ? "N" : "V", {}, ""};
        CHECK(model.lemmatize(tok, none) == loaded.lemmatize(tok, none));
    }
}

TEST_CASE("truncated model file fails the checksum") {
    auto model = make_toy_model(29);
    std::string bytes = model.serialize();
    bytes.resize(bytes.size() - 17);
    CHECK_THROWS_AS(EnhancedLemmatizer::deserialize(bytes), io::SerializationError);
    std::string corrupted = model.serialize();
    corrupted[40] ^= 0x01;
    CHECK_THROWS_AS(EnhancedLemmatizer::deserialize(corrupted), io::SerializationError);
}

TEST_CASE("predict_corpus keeps shape and works with an empty provider") {
    auto model = make_toy_model(31);
    Corpus c = tiny_corpus();
    EmptyProvider none;
    Corpus pred = predict_corpus(model, c, none);
    REQUIRE(pred.sentences.size() == c.sentences.size());
    CHECK(pred.token_count() == c.token_count());
    // multithreaded decode is order-stable
    Corpus pred4 = predict_corpus(model, c, none, 4);
    CHECK(pred4 == pred);
}
