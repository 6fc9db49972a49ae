// okbc: command-line driver for the open-vocabulary KB completion toolkit.
// Subcommands: kb {filter|merge|split|negatives|stats}, train, eval, infer, sts.
// Exit codes: 0 success, 1 input error, 2 runtime/numeric error.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <unordered_set>
#include <vector>

#include "CLI11.hpp"
#include "okbc/checkpoint.hpp"
#include "okbc/config.hpp"
#include "okbc/kb.hpp"
#include "okbc/rng.hpp"
#include "okbc/sts.hpp"
#include "okbc/text.hpp"
#include "okbc/train.hpp"
#include "okbc/transformer.hpp"

namespace {

using namespace okbc;

std::string strip_tsv_ext(const std::string& path) {
    if (path.size() > 4 && path.ends_with(".tsv")) return path.substr(0, path.size() - 4);
    return path;
}

std::vector<std::string> read_phrase_lines(const std::string& path) {
    const std::string content = read_text_file(path);
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string::npos) end = content.size();
        std::string line = content.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

void print_histogram(const char* label, const std::vector<std::size_t>& lengths) {
    std::map<std::size_t, std::size_t> hist;
    for (std::size_t len : lengths) ++hist[len];
    std::printf("%s length histogram (tokens: count):\n", label);
    for (const auto& [len, count] : hist) std::printf("  %zu: %zu\n", len, count);
}

void run_kb_stats(const std::string& input, bool header) {
    const KnowledgeBase kb = parse_kb(input, KbFormat::tsv, header);
    std::printf("kb: %s\n", input.c_str());
    std::printf("triples: %zu\n", kb.size());
    std::printf("positives: %zu\n", kb.count(Polarity::positive));
    std::printf("negatives: %zu\n", kb.count(Polarity::negative));
    std::unordered_set<std::string> distinct;
    std::vector<std::size_t> s_len, p_len, o_len;
    for (const Triple& t : kb.triples) {
        const auto st = tokenize(t.subject);
        const auto pt = tokenize(t.predicate);
        const auto ot = tokenize(t.object);
        s_len.push_back(st.size());
        p_len.push_back(pt.size());
        o_len.push_back(ot.size());
        for (const auto& tok : st) distinct.insert(tok);
        for (const auto& tok : pt) distinct.insert(tok);
        for (const auto& tok : ot) distinct.insert(tok);
    }
    std::printf("distinct tokens: %zu\n", distinct.size());
    std::printf("vocab size (with specials): %zu\n", distinct.size() + special_tokens().size());
    print_histogram("subject", s_len);
    print_histogram("predicate", p_len);
    print_histogram("object", o_len);
}

void run_train(const std::string& config_path) {
    RunConfig rc = parse_run_config(config_path);
    require_readable(rc.train_kb, "train_kb");
    require_readable(rc.heldout_kb, "heldout_kb");
    if (rc.checkpoint_out.empty()) throw InputError("config: checkpoint_out is required for train");
    if (!rc.vocab.empty()) require_readable(rc.vocab, "vocab");
    if (rc.history_out.empty()) rc.history_out = rc.checkpoint_out + ".history.csv";
    if (rc.vocab.empty() && rc.vocab_out.empty()) rc.vocab_out = rc.checkpoint_out + ".vocab";

    const KnowledgeBase train_kb = parse_kb(rc.train_kb, KbFormat::tsv, rc.kb_header);
    const KnowledgeBase heldout_kb = parse_kb(rc.heldout_kb, KbFormat::tsv, rc.kb_header);

    Vocabulary vocab;
    if (!rc.vocab.empty()) {
        vocab = load_vocab(rc.vocab);
    } else {
        vocab = build_vocab(train_kb, rc.min_freq, rc.max_vocab);
        write_vocab(vocab, rc.vocab_out);
        std::printf("vocab: built %zu tokens -> %s\n", vocab.size(), rc.vocab_out.c_str());
    }
    rc.model.vocab_size = vocab.size();
    rc.model.validate();
    rc.train.validate();

    TransformerParams params = init_params(rc.model, derive_seed(rc.train.seed, 0));
    TrainResult result = train(rc.model, std::move(params), train_kb, heldout_kb, vocab, rc.train);

    save_checkpoint(rc.checkpoint_out, rc.model, result.best_params);
    atomic_write_file(rc.history_out, serialize_history(result.history));
    atomic_write_file(rc.checkpoint_out + ".run", serialize_run_config(rc));

    const EpochRecord& best = result.history.records.at(result.history.best_epoch - 1);
    std::printf("trained %zu epochs, best epoch %zu\n", result.history.records.size(),
                result.history.best_epoch);
    std::printf("best: train_loss_bits=%.6f train_acc=%.6f val_loss_bits=%.6f val_acc=%.6f\n",
                best.train_loss_bits, best.train_accuracy, best.val_loss_bits, best.val_accuracy);
    std::printf("checkpoint: %s\n", rc.checkpoint_out.c_str());
    std::printf("history: %s\n", rc.history_out.c_str());
}

void run_eval(const std::string& ckpt_path, const std::string& kb_path, const std::string& vocab_path,
              bool header) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const Vocabulary vocab = load_vocab(vocab_path);
    if (vocab.size() != ckpt.config.vocab_size)
        throw InputError("vocabulary size " + std::to_string(vocab.size()) +
                         " does not match checkpoint vocab_size " +
                         std::to_string(ckpt.config.vocab_size));
    const KnowledgeBase kb = parse_kb(kb_path, KbFormat::tsv, header);
    const EvalMetrics metrics = evaluate(ckpt.config, ckpt.params, kb, vocab);
    std::printf("loss_bits=%.6f accuracy=%.6f triples=%zu\n", metrics.loss_bits, metrics.accuracy,
                kb.size());
}

void run_infer(const std::string& ckpt_path, const std::string& vocab_path, const std::string& subject,
               const std::string& predicate) {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    const Vocabulary vocab = load_vocab(vocab_path);
    if (vocab.size() != ckpt.config.vocab_size)
        throw InputError("vocabulary size does not match checkpoint");
    const std::size_t n = ckpt.config.max_seq_len;
    std::vector<std::string> tokens = tokenize(subject);
    for (const std::string& t : tokenize(predicate)) tokens.push_back(t);
    if (tokens.empty()) throw InputError("subject and predicate produced no tokens");
    std::vector<int> input_ids(n, kPadId);
    for (std::size_t i = 0; i < std::min(tokens.size(), n); ++i)
        input_ids[i] = vocab.id_of(tokens[i]);
    const std::vector<int> generated = greedy_decode(ckpt.config, ckpt.params, input_ids);
    std::printf("%s\n", decode_ids(generated, vocab).c_str());
}

void run_sts(const std::string& pred_path, const std::string& truth_path, const std::string& vec_path,
             const std::string& method_name, std::uint64_t seed, const std::string& out_path) {
    StsMethod method;
    if (method_name == "welch") {
        method = StsMethod::welch;
    } else if (method_name == "permutation") {
        method = StsMethod::permutation;
    } else {
        throw InputError("--method must be 'welch' or 'permutation'");
    }
    const std::vector<std::string> predicted = read_phrase_lines(pred_path);
    const std::vector<std::string> truth = read_phrase_lines(truth_path);
    std::vector<std::string> warnings;
    const WordVectors wv = load_vectors(vec_path, &warnings);
    for (const std::string& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    const STSReport report = sts_test(predicted, truth, wv, seed, method);
    const std::string json = sts_report_json(report);
    std::printf("%s\n", json.c_str());
    std::printf("%s\n", sts_report_row(report).c_str());
    if (!out_path.empty()) atomic_write_file(out_path, json + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"okbc: open-vocabulary knowledge base completion toolkit"};
    app.require_subcommand(1);

    // --- kb ---
    CLI::App* kb = app.add_subcommand("kb", "knowledge base operations");
    kb->require_subcommand(1);

    struct {
        std::string input, output, stopwords, name;
        std::vector<std::string> inputs;
        double fraction = 0.7;
        double ratio = 2.42;
        std::uint64_t seed = 0;
        bool header = false;
    } kb_args;

    CLI::App* kb_filter = kb->add_subcommand("filter", "drop triples whose subject or object is all stopwords");
    kb_filter->add_option("input", kb_args.input, "input KB (TSV)")->required();
    kb_filter->add_option("--stopwords", kb_args.stopwords, "stopword file, one token per line")->required();
    kb_filter->add_option("-o,--output", kb_args.output, "output path (default: <input>.filtered.tsv)");
    kb_filter->add_flag("--header", kb_args.header, "skip one header line");

    CLI::App* kb_merge = kb->add_subcommand("merge", "union of KBs with exact-duplicate removal");
    kb_merge->add_option("inputs", kb_args.inputs, "input KBs (TSV)")->required()->expected(-1);
    kb_merge->add_option("-o,--output", kb_args.output, "output path")->required();
    kb_merge->add_option("--name", kb_args.name, "name for the merged KB");
    kb_merge->add_flag("--header", kb_args.header, "skip one header line");

    CLI::App* kb_split = kb->add_subcommand("split", "seeded shuffle and train/test partition");
    kb_split->add_option("input", kb_args.input, "input KB (TSV)")->required();
    kb_split->add_option("--fraction", kb_args.fraction, "train fraction in (0,1)")->required();
    kb_split->add_option("--seed", kb_args.seed, "shuffle seed")->required();
    kb_split->add_option("-o,--output-prefix", kb_args.output,
                         "output prefix (default: input path without .tsv)");
    kb_split->add_flag("--header", kb_args.header, "skip one header line");

    CLI::App* kb_neg = kb->add_subcommand("negatives", "generate perturbation negatives from positives");
    kb_neg->add_option("input", kb_args.input, "input KB of positive triples")->required();
    kb_neg->add_option("--ratio", kb_args.ratio, "negatives per positive (default 2.42)");
    kb_neg->add_option("--seed", kb_args.seed, "sampling seed")->required();
    kb_neg->add_option("-o,--output", kb_args.output, "output path (default: <input>.negatives.tsv)");
    kb_neg->add_flag("--header", kb_args.header, "skip one header line");

    CLI::App* kb_stats = kb->add_subcommand("stats", "triple counts, vocabulary size, length histograms");
    kb_stats->add_option("input", kb_args.input, "input KB (TSV)")->required();
    kb_stats->add_flag("--header", kb_args.header, "skip one header line");

    // --- train / eval / infer / sts ---
    std::string config_path;
    CLI::App* train_cmd = app.add_subcommand("train", "train a model from a key=value config file");
    train_cmd->add_option("--config", config_path, "run config file")->required();

    struct {
        std::string checkpoint, kb, vocab;
        bool header = false;
    } eval_args;
    CLI::App* eval_cmd = app.add_subcommand("eval", "teacher-forced loss (bits) and token accuracy on a KB");
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "checkpoint file")->required();
    eval_cmd->add_option("--kb", eval_args.kb, "KB to evaluate (TSV)")->required();
    eval_cmd->add_option("--vocab", eval_args.vocab, "vocabulary file")->required();
    eval_cmd->add_flag("--header", eval_args.header, "skip one header line");

    struct {
        std::string checkpoint, vocab, subject, predicate;
    } infer_args;
    CLI::App* infer_cmd = app.add_subcommand("infer", "greedy-decode the object phrase for subject+predicate");
    infer_cmd->add_option("--checkpoint", infer_args.checkpoint, "checkpoint file")->required();
    infer_cmd->add_option("--vocab", infer_args.vocab, "vocabulary file")->required();
    infer_cmd->add_option("--subject", infer_args.subject, "subject phrase")->required();
    infer_cmd->add_option("--predicate", infer_args.predicate, "predicate phrase")->required();

    struct {
        std::string pred, truth, vectors, method = "welch", output;
        std::uint64_t seed = 0;
    } sts_args;
    CLI::App* sts_cmd = app.add_subcommand("sts", "STS hypothesis test of predictions vs shuffled truth");
    sts_cmd->add_option("--pred", sts_args.pred, "predicted phrases, one per line")->required();
    sts_cmd->add_option("--truth", sts_args.truth, "ground-truth phrases, one per line")->required();
    sts_cmd->add_option("--vectors", sts_args.vectors, "word vector file")->required();
    sts_cmd->add_option("--method", sts_args.method, "welch or permutation (default welch)");
    sts_cmd->add_option("--seed", sts_args.seed, "shuffle seed");
    sts_cmd->add_option("-o,--output", sts_args.output, "also write the JSON record here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }

    try {
        if (kb_filter->parsed()) {
            const KnowledgeBase in = parse_kb(kb_args.input, KbFormat::tsv, kb_args.header);
            const auto stopwords = load_stopwords(kb_args.stopwords);
            const KnowledgeBase out = filter_stopword_only(in, stopwords);
            const std::string out_path =
                kb_args.output.empty() ? strip_tsv_ext(kb_args.input) + ".filtered.tsv" : kb_args.output;
            write_kb(out, out_path);
            std::printf("kept %zu of %zu triples -> %s\n", out.size(), in.size(), out_path.c_str());
        } else if (kb_merge->parsed()) {
            std::vector<KnowledgeBase> kbs;
            for (const std::string& path : kb_args.inputs)
                kbs.push_back(parse_kb(path, KbFormat::tsv, kb_args.header));
            const KnowledgeBase out = merge(kbs, kb_args.name.empty() ? "merged" : kb_args.name);
            write_kb(out, kb_args.output);
            std::printf("merged %zu KBs into %zu triples -> %s\n", kbs.size(), out.size(),
                        kb_args.output.c_str());
        } else if (kb_split->parsed()) {
            const KnowledgeBase in = parse_kb(kb_args.input, KbFormat::tsv, kb_args.header);
            const auto [train_part, test_part] = split(in, SplitSpec{kb_args.fraction, kb_args.seed});
            const std::string prefix =
                kb_args.output.empty() ? strip_tsv_ext(kb_args.input) : kb_args.output;
            write_kb(train_part, prefix + ".train.tsv");
            write_kb(test_part, prefix + ".test.tsv");
            std::printf("split %zu triples into %zu train / %zu test -> %s.{train,test}.tsv\n", in.size(),
                        train_part.size(), test_part.size(), prefix.c_str());
        } else if (kb_neg->parsed()) {
            const KnowledgeBase in = parse_kb(kb_args.input, KbFormat::tsv, kb_args.header);
            const KnowledgeBase out = generate_negatives(in, kb_args.ratio, kb_args.seed);
            const std::string out_path =
                kb_args.output.empty() ? strip_tsv_ext(kb_args.input) + ".negatives.tsv" : kb_args.output;
            write_kb(out, out_path);
            std::printf("generated %zu negatives from %zu positives -> %s\n", out.size(), in.size(),
                        out_path.c_str());
        } else if (kb_stats->parsed()) {
            run_kb_stats(kb_args.input, kb_args.header);
        } else if (train_cmd->parsed()) {
            run_train(config_path);
        } else if (eval_cmd->parsed()) {
            run_eval(eval_args.checkpoint, eval_args.kb, eval_args.vocab, eval_args.header);
        } else if (infer_cmd->parsed()) {
            run_infer(infer_args.checkpoint, infer_args.vocab, infer_args.subject, infer_args.predicate);
        } else if (sts_cmd->parsed()) {
            run_sts(sts_args.pred, sts_args.truth, sts_args.vectors, sts_args.method, sts_args.seed,
                    sts_args.output);
        }
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
