#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "okbc/train.hpp"
#include "test_util.hpp"

using namespace okbc;

namespace {

// Small copy-task KB: the object repeats the subject's first token, which a
// toy model can memorize quickly.
KnowledgeBase overfit_kb(std::size_t count) {
    static const std::vector<std::string> heads = {"red",  "blue", "green", "small",
                                                   "big",  "old",  "new",   "cold"};
    static const std::vector<std::string> tails = {"cat", "dog", "bird", "fish"};
    KnowledgeBase kb;
    kb.name = "overfit";
    for (std::size_t i = 0; i < count; ++i) {
        const std::string& head = heads[i % heads.size()];
        const std::string& tail = tails[(i / heads.size()) % tails.size()];
        kb.triples.push_back(
            Triple{head + " " + tail, "maps to", head + " thing", Polarity::positive, ""});
    }
    return kb;
}

ModelConfig tiny_config(const Vocabulary& vocab) {
    ModelConfig cfg;
    cfg.max_seq_len = 8;
    cfg.model_dim = 16;
    cfg.ffn_dim = 32;
    cfg.num_heads = 2;
    cfg.num_blocks = 1;
    cfg.vocab_size = vocab.size();
    return cfg;
}

}  // namespace

TEST_CASE("teacher forcing targets shift the sequence left and mask pads") {
    EncodedPair pair;
    pair.target_ids = {kStartId, 7, 8, kEndId, kPadId, kPadId};
    pair.target_real = {1, 1, 1, 1, 0, 0};
    const TeacherForcingTargets t = teacher_forcing_targets(pair);
    CHECK(t.labels == std::vector<int>{7, 8, kEndId, kPadId, kPadId, kPadId});
    CHECK(t.mask == std::vector<std::uint8_t>{1, 1, 1, 0, 0, 0});  // [end] counted, pads excluded
}

TEST_CASE("token accuracy: exact, tie-break fixture, masking") {
    Tensor perfect({3, 4});
    perfect(0, 2) = 5;
    perfect(1, 0) = 5;
    perfect(2, 3) = 5;
    CHECK(token_accuracy(perfect, {2, 0, 3}, {1, 1, 1}) == 1.0);

    // uniform logits: argmax tie-break selects id 0, so accuracy equals the
    // rate of label 0 in the fixture: targets {0,1,0,2,0} -> 3/5
    Tensor uniform({5, 4});
    CHECK(token_accuracy(uniform, {0, 1, 0, 2, 0}, {1, 1, 1, 1, 1}) == Catch::Approx(0.6));

    // mask that keeps only one correct position
    Tensor mixed({3, 4});
    mixed(0, 1) = 3;  // wrong (target 0)
    mixed(1, 2) = 3;  // correct
    mixed(2, 0) = 3;  // wrong (target 3)
    CHECK(token_accuracy(mixed, {0, 2, 3}, {0, 1, 0}) == 1.0);

    CHECK_THROWS_AS(token_accuracy(mixed, {0, 2, 3}, {0, 0, 0}), ComputeError);
}

TEST_CASE("train config validation") {
    TrainConfig tc;
    tc.patience = 50;
    tc.max_epochs = 40;
    CHECK_THROWS_AS(tc.validate(), InputError);
    tc = TrainConfig{};
    tc.learning_rate = 0.0;
    CHECK_THROWS_AS(tc.validate(), InputError);
    tc = TrainConfig{};
    tc.adam_beta1 = 1.0;
    CHECK_THROWS_AS(tc.validate(), InputError);
}

TEST_CASE("one Adam step on a batch strictly decreases that batch's loss") {
    const KnowledgeBase kb = overfit_kb(4);
    const Vocabulary vocab = build_vocab(kb, 1, 1000);
    const ModelConfig cfg = tiny_config(vocab);
    TransformerParams params = init_params(cfg, 11);
    TrainConfig tc;
    tc.learning_rate = 1e-5;

    const auto pairs = detail::encode_kb(kb, vocab, cfg.max_seq_len);
    auto batch_loss = [&](const TransformerParams& p, std::vector<Tensor>* grads) {
        std::size_t total = 0;
        std::vector<std::size_t> counts;
        std::vector<TeacherForcingTargets> targets;
        for (const auto& pair : pairs) {
            targets.push_back(teacher_forcing_targets(pair));
            std::size_t c = 0;
            for (auto m : targets.back().mask) c += m;
            counts.push_back(c);
            total += c;
        }
        double pooled = 0.0;
        for (std::size_t e = 0; e < pairs.size(); ++e) {
            Graph g;
            const BoundParams bp = bind_params(g, p, cfg);
            ForwardOutput out = transformer_forward(g, cfg, bp, pairs[e].input_ids,
                                                    pairs[e].target_ids, pairs[e].input_real,
                                                    pairs[e].target_real);
            Var loss = cross_entropy_bits(out.logits, targets[e].labels, targets[e].mask);
            pooled += g.value(loss).item() * static_cast<double>(counts[e]) /
                      static_cast<double>(total);
            if (grads) {
                g.backward(loss, static_cast<double>(counts[e]) / static_cast<double>(total));
                for (std::size_t k = 0; k < grads->size(); ++k) {
                    const Tensor pg = g.param_grad(k);
                    for (std::size_t i = 0; i < pg.numel(); ++i) (*grads)[k][i] += pg[i];
                }
            }
        }
        return pooled;
    };

    std::vector<Tensor> grads;
    zero_params(cfg).for_each(
        [&](const std::string&, const Tensor& t) { grads.push_back(Tensor::zeros(t.shape())); });
    const double before = batch_loss(params, &grads);
    AdamState st = AdamState::init(cfg);
    adam_step(params, grads, st, tc);
    const double after = batch_loss(params, nullptr);
    CHECK(after < before);
}

TEST_CASE("training overfits a small copy-task KB and decoding reproduces objects") {
    const KnowledgeBase kb = overfit_kb(8);
    const Vocabulary vocab = build_vocab(kb, 1, 1000);
    const ModelConfig cfg = tiny_config(vocab);
    TrainConfig tc;
    tc.learning_rate = 3e-3;
    tc.batch_size = 8;
    tc.max_epochs = 300;
    tc.patience = 300;
    tc.seed = 5;

    const TrainResult result =
        train(cfg, init_params(cfg, derive_seed(tc.seed, 0)), kb, kb, vocab, tc);
    const EvalMetrics metrics = evaluate(cfg, result.best_params, kb, vocab);
    CHECK(metrics.accuracy == 1.0);
    CHECK(metrics.loss_bits < 0.01);

    for (const Triple& t : kb.triples) {
        const EncodedPair pair = encode_pair(t, vocab, cfg.max_seq_len);
        const std::vector<int> decoded = greedy_decode(cfg, result.best_params, pair.input_ids);
        std::vector<int> expected = {kStartId};
        for (const std::string& tok : tokenize(t.object)) expected.push_back(vocab.id_of(tok));
        expected.push_back(kEndId);
        CHECK(decoded == expected);
    }
}

TEST_CASE("early stopping: patience 1 with a rising held-out loss stops at epoch 2") {
    // heldout pairs the same inputs with fully anti-correlated objects, so
    // fitting the train set pushes the held-out loss up from epoch 1 on
    // (verified for this seed before freezing the fixture)
    const std::vector<std::string> heads = {"red", "blue", "green", "small", "big", "old"};
    KnowledgeBase train_kb, heldout;
    for (std::size_t i = 0; i < heads.size(); ++i) {
        train_kb.triples.push_back(Triple{heads[i] + " cat", "maps to", heads[i] + " thing",
                                          Polarity::positive, ""});
        heldout.triples.push_back(Triple{heads[i] + " cat", "maps to",
                                         heads[(i + 1) % heads.size()] + " cat cat",
                                         Polarity::positive, ""});
    }
    const Vocabulary vocab = build_vocab(train_kb, 1, 1000);
    const ModelConfig cfg = tiny_config(vocab);
    TrainConfig tc;
    tc.learning_rate = 3e-3;
    tc.batch_size = 6;
    tc.max_epochs = 40;
    tc.patience = 1;
    tc.seed = 9;

    const TrainResult result =
        train(cfg, init_params(cfg, derive_seed(tc.seed, 0)), train_kb, heldout, vocab, tc);
    CHECK(result.history.records.size() == 2);
    CHECK(result.history.best_epoch == 1);
}

TEST_CASE("early stopping always returns the minimum held-out-loss epoch") {
    const KnowledgeBase train_kb = overfit_kb(8);
    const auto [fit, held] = split(train_kb, SplitSpec{0.75, 3});
    const Vocabulary vocab = build_vocab(train_kb, 1, 1000);
    const ModelConfig cfg = tiny_config(vocab);
    TrainConfig tc;
    tc.learning_rate = 2e-3;
    tc.batch_size = 4;
    tc.max_epochs = 30;
    tc.patience = 4;
    tc.seed = 9;

    const TrainResult result =
        train(cfg, init_params(cfg, derive_seed(tc.seed, 0)), fit, held, vocab, tc);
    REQUIRE(!result.history.records.empty());
    double min_val = result.history.records[0].val_loss_bits;
    std::size_t min_epoch = 1;
    for (const EpochRecord& r : result.history.records) {
        if (r.val_loss_bits < min_val) {
            min_val = r.val_loss_bits;
            min_epoch = r.epoch;
        }
    }
    CHECK(result.history.best_epoch == min_epoch);
    if (result.history.records.size() < tc.max_epochs)
        CHECK(result.history.records.size() == result.history.best_epoch + tc.patience);

    // returned params evaluate to exactly the recorded best epoch metrics
    const EvalMetrics best = evaluate(cfg, result.best_params, held, vocab);
    CHECK(best.loss_bits == Catch::Approx(min_val).margin(1e-12));
}

TEST_CASE("training is bitwise deterministic given the seed") {
    const KnowledgeBase kb = overfit_kb(6);
    const auto [fit, held] = split(kb, SplitSpec{0.67, 4});
    const Vocabulary vocab = build_vocab(kb, 1, 1000);
    const ModelConfig cfg = tiny_config(vocab);
    TrainConfig tc;
    tc.learning_rate = 1e-3;
    tc.batch_size = 2;
    tc.max_epochs = 5;
    tc.patience = 5;
    tc.seed = 77;

    const TrainResult a = train(cfg, init_params(cfg, 1), fit, held, vocab, tc);
    const TrainResult b = train(cfg, init_params(cfg, 1), fit, held, vocab, tc);
    CHECK(serialize_history(a.history) == serialize_history(b.history));
    std::vector<const Tensor*> ta, tb;
    a.best_params.for_each([&](const std::string&, const Tensor& t) { ta.push_back(&t); });
    b.best_params.for_each([&](const std::string&, const Tensor& t) { tb.push_back(&t); });
    for (std::size_t i = 0; i < ta.size(); ++i) CHECK(*ta[i] == *tb[i]);
}

TEST_CASE("evaluate: uniform baseline and determinism") {
    // 8 heads + {cat, maps, to, thing} = 12 corpus tokens, 16 ids with specials
    const KnowledgeBase kb = overfit_kb(8);
    Vocabulary vocab = build_vocab(kb, 1, 1000);
    REQUIRE(vocab.size() == 16);
    // narrow model: initial logits stay small, so an untrained model sits
    // near the uniform-prediction baseline of log2(16) = 4 bits
    ModelConfig cfg;
    cfg.max_seq_len = 8;
    cfg.model_dim = 4;
    cfg.ffn_dim = 8;
    cfg.num_heads = 2;
    cfg.num_blocks = 1;
    cfg.vocab_size = vocab.size();
    for (std::uint64_t seed : {21, 22, 23, 99}) {
        const EvalMetrics m = evaluate(cfg, init_params(cfg, seed), kb, vocab);
        CHECK(std::abs(m.loss_bits - 4.0) < 0.5);
    }
    const TransformerParams params = init_params(cfg, 21);
    const EvalMetrics m1 = evaluate(cfg, params, kb, vocab);
    const EvalMetrics m2 = evaluate(cfg, params, kb, vocab);
    CHECK(m1.loss_bits == m2.loss_bits);
    CHECK(m1.accuracy == m2.accuracy);

    CHECK_THROWS_AS(evaluate(cfg, params, KnowledgeBase{}, vocab), InputError);
}

TEST_CASE("history CSV has the pinned column layout") {
    TrainHistory h;
    h.records.push_back({1, 1.5, 0.25, 2.5, 0.125});
    h.best_epoch = 1;
    const std::string csv = serialize_history(h);
    CHECK(csv.starts_with("epoch,train_loss_bits,train_acc,val_loss_bits,val_acc\n"));
    CHECK(csv.find("1,1.5,0.25,2.5,0.125\n") != std::string::npos);
}

TEST_CASE("train rejects mismatched vocabulary and empty KBs") {
    const KnowledgeBase kb = overfit_kb(4);
    const Vocabulary vocab = build_vocab(kb, 1, 1000);
    ModelConfig cfg = tiny_config(vocab);
    cfg.vocab_size = vocab.size() + 3;
    TrainConfig tc;
    CHECK_THROWS_AS(train(cfg, init_params(cfg, 1), kb, kb, vocab, tc), InputError);
    cfg.vocab_size = vocab.size();
    CHECK_THROWS_AS(train(cfg, init_params(cfg, 1), KnowledgeBase{}, kb, vocab, tc), InputError);
}
