#ifndef LEMMA_CLI_HPP
#define LEMMA_CLI_HPP

#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lemma/augmentation.hpp"
#include "lemma/evaluation.hpp"
#include "lemma/gradcheck.hpp"
#include "lemma/training.hpp"

namespace lemma::cli {

// Exit codes: 0 ok, 1 usage, 2 data error, 3 internal invariant violation.
enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

inline unsigned decode_threads() {
    if (const char* env = std::getenv("LEMMAFORGE_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    return 1;
}

// Provider syntax: comma-separated list of
//   none | lexicon[:train.conllu] | tsv:file | unimorph:file
// A bare "lexicon" uses the training corpus of the current command.
inline std::shared_ptr<CandidateProvider> make_provider(const std::string& spec,
                                                        const Corpus* train_corpus) {
    std::vector<std::shared_ptr<CandidateProvider>> parts;
    for (auto& piece : detail::split(spec.empty() ? "none" : spec, ',')) {
        auto colon = piece.find(':');
        std::string kind = piece.substr(0, colon);
        std::string arg = colon == std::string::npos ? "" : piece.substr(colon + 1);
        if (kind == "none") {
            parts.push_back(std::make_shared<EmptyProvider>());
        } else if (kind == "lexicon") {
            if (!arg.empty()) {
                Corpus c = parse_conllu(io::read_file(arg), arg);
                parts.push_back(
                    std::make_shared<TrainingLexiconProvider>(build_training_lexicon(c)));
            } else if (train_corpus) {
                parts.push_back(std::make_shared<TrainingLexiconProvider>(
                    build_training_lexicon(*train_corpus)));
            } else {
                throw std::invalid_argument("provider 'lexicon' needs a path here: lexicon:FILE");
            }
        } else if (kind == "tsv") {
            if (arg.empty()) throw std::invalid_argument("provider 'tsv' needs a path");
            parts.push_back(
                std::make_shared<CandidateFileProvider>(parse_candidate_tsv(io::read_file(arg))));
        } else if (kind == "unimorph") {
            if (arg.empty()) throw std::invalid_argument("provider 'unimorph' needs a path");
            parts.push_back(
                std::make_shared<UnimorphProvider>(parse_unimorph(io::read_file(arg))));
        } else {
            throw std::invalid_argument("unknown provider kind: " + kind);
        }
    }
    if (parts.size() == 1) return parts.front();
    return std::make_shared<CompositeProvider>(std::move(parts));
}

namespace detail_cli {

struct TrainArgs {
    std::string train_path, dev_path, out_path, history_path, config_path;
    std::string provider = "none";
    double encoder_dropout = 0.0;
    bool use_feats = true;
    int epochs = 60, patience = 10, batch_size = 32;
    double lr = 1e-3;
    int emb_dim = 64, enc_hidden = 128, dec_hidden = 256;
    double dropout = 0.3;
    uint64_t seed = 12345;
};

inline int cmd_train(const TrainArgs& a) {
    Corpus train_c = parse_conllu(io::read_file(a.train_path), a.train_path);
    Corpus dev_c = parse_conllu(io::read_file(a.dev_path), a.dev_path);
    auto provider = make_provider(a.provider, &train_c);

    ModelConfig mc;
    mc.emb_dim = a.emb_dim;
    mc.enc_hidden = a.enc_hidden;
    mc.dec_hidden = a.dec_hidden;
    mc.encoder_dropout_p = a.encoder_dropout;
    mc.dropout = a.dropout;
    mc.use_feats = a.use_feats;
    mc.seed = a.seed;

    TrainConfig tc;
    if (!a.config_path.empty()) tc = TrainConfig::from_kv(io::read_file(a.config_path));
    tc.max_epochs = a.epochs;
    tc.patience = a.patience;
    tc.batch_size = a.batch_size;
    tc.learning_rate = a.lr;
    tc.shuffle_seed = a.seed;

    std::cout << "command=train train=" << a.train_path << " dev=" << a.dev_path
              << " provider=" << provider->describe() << " encoder-dropout=" << mc.encoder_dropout_p
              << " use-feats=" << (mc.use_feats ? "true" : "false") << " epochs=" << tc.max_epochs
              << " patience=" << tc.patience << " batch-size=" << tc.batch_size
              << " lr=" << tc.learning_rate << " emb-dim=" << mc.emb_dim
              << " enc-hidden=" << mc.enc_hidden << " dec-hidden=" << mc.dec_hidden
              << " seed=" << mc.seed << "\n";

    Vocab vocab = build_vocab(train_c, {provider.get()});
    EnhancedLemmatizer model(vocab, mc);
    TrainHistory history = train(model, train_c, dev_c, *provider, tc);

    for (auto& e : history.epochs)
        std::cout << "epoch " << e.epoch << " loss " << e.train_loss << " dev_acc "
                  << e.dev_accuracy << "\n";
    std::cout << history.stop_reason << " at epoch " << history.epochs.back().epoch
              << " (best epoch " << history.best_epoch << ", dev_acc "
              << history.epochs[static_cast<size_t>(history.best_epoch - 1)].dev_accuracy << ")\n";

    model.save(a.out_path);
    if (!a.history_path.empty()) io::atomic_write_file(a.history_path, history.to_tsv());
    return kOk;
}

}  // namespace detail_cli

inline int run(std::vector<std::string> args) {
    CLI::App app{"lemmaforge: dual-encoder lexicon-enhanced lemmatization toolkit"};
    app.require_subcommand(1);

    // train
    detail_cli::TrainArgs ta;
    auto* train_cmd = app.add_subcommand("train", "train a lemmatizer model");
    train_cmd->add_option("--train", ta.train_path, "training corpus (CoNLL-U)")->required();
    train_cmd->add_option("--dev", ta.dev_path, "development corpus (CoNLL-U)")->required();
    train_cmd->add_option("--out", ta.out_path, "output model file")->required();
    train_cmd->add_option("--provider", ta.provider, "candidate provider spec");
    train_cmd->add_option("--encoder-dropout", ta.encoder_dropout, "batch candidate drop p");
    train_cmd->add_option("--use-feats", ta.use_feats, "include morphological features");
    train_cmd->add_option("--epochs", ta.epochs, "maximum epochs");
    train_cmd->add_option("--patience", ta.patience, "early-stopping patience");
    train_cmd->add_option("--batch-size", ta.batch_size, "batch size");
    train_cmd->add_option("--lr", ta.lr, "learning rate");
    train_cmd->add_option("--emb-dim", ta.emb_dim, "embedding size");
    train_cmd->add_option("--enc-hidden", ta.enc_hidden, "encoder hidden size per direction");
    train_cmd->add_option("--dec-hidden", ta.dec_hidden, "decoder hidden size");
    train_cmd->add_option("--dropout", ta.dropout, "standard dropout rate");
    train_cmd->add_option("--seed", ta.seed, "random seed");
    train_cmd->add_option("--history", ta.history_path, "write per-epoch TSV here");
    train_cmd->add_option("--config", ta.config_path, "key=value training config file");

    // predict
    std::string p_model, p_in, p_out, p_provider = "none";
    auto* predict_cmd = app.add_subcommand("predict", "lemmatize a corpus");
    predict_cmd->add_option("--model", p_model, "model file")->required();
    predict_cmd->add_option("--in", p_in, "input corpus (CoNLL-U)")->required();
    predict_cmd->add_option("--out", p_out, "output corpus (CoNLL-U)")->required();
    predict_cmd->add_option("--provider", p_provider, "candidate provider spec");

    // evaluate
    std::string e_gold, e_pred, e_train, e_log, e_provider;
    auto* eval_cmd = app.add_subcommand("evaluate", "score predictions against gold");
    eval_cmd->add_option("--gold", e_gold, "gold corpus")->required();
    eval_cmd->add_option("--pred", e_pred, "predicted corpus")->required();
    eval_cmd->add_option("--train-vocab", e_train, "training corpus for the OOV form set")
        ->required();
    eval_cmd->add_option("--log", e_log, "per-token prediction log TSV");
    eval_cmd->add_option("--provider", e_provider, "provider for the log's candidate column");

    // build-lexicon
    std::string bl_train, bl_out;
    auto* bl_cmd = app.add_subcommand("build-lexicon", "extract the training-set lexicon");
    bl_cmd->add_option("--train", bl_train, "training corpus")->required();
    bl_cmd->add_option("--out", bl_out, "output TSV")->required();

    // candidates
    std::string c_provider, c_in;
    auto* cand_cmd = app.add_subcommand("candidates", "query candidate lists for a word file");
    cand_cmd->add_option("--provider", c_provider, "candidate provider spec")->required();
    cand_cmd->add_option("--in", c_in, "word list (word or word<TAB>pos per line)")->required();

    // augment
    std::string a_freq, a_train, a_provider, a_out, a_log, a_freq_mode = "tsv";
    size_t a_k = 8000;
    auto* aug_cmd = app.add_subcommand("augment", "append unseen unambiguous analyses");
    aug_cmd->add_option("--freq", a_freq, "frequency list file")->required();
    aug_cmd->add_option("--freq-mode", a_freq_mode, "tsv | raw");
    aug_cmd->add_option("--train", a_train, "training corpus")->required();
    aug_cmd->add_option("--provider", a_provider, "analysis:FILE or candidate provider spec")
        ->required();
    aug_cmd->add_option("--k", a_k, "number of words to add");
    aug_cmd->add_option("--out", a_out, "augmented corpus output")->required();
    aug_cmd->add_option("--log", a_log, "selection log TSV");

    // gradcheck
    int g_seeds = 20;
    auto* grad_cmd = app.add_subcommand("gradcheck", "run the gradient checking suite");
    grad_cmd->add_option("--seeds", g_seeds, "number of random seeds");

    std::vector<const char*> argv;
    argv.push_back("lemmaforge");
    for (auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*train_cmd) return detail_cli::cmd_train(ta);

        if (*predict_cmd) {
            std::cout << "command=predict model=" << p_model << " in=" << p_in
                      << " provider=" << p_provider << " out=" << p_out << "\n";
            auto model = EnhancedLemmatizer::load(p_model);
            Corpus in = parse_conllu(io::read_file(p_in), p_in);
            auto provider = make_provider(p_provider, nullptr);
            Corpus out = predict_corpus(model, in, *provider, decode_threads());
            io::atomic_write_file(p_out, write_conllu(out));
            return kOk;
        }

        if (*eval_cmd) {
            std::cout << "command=evaluate gold=" << e_gold << " pred=" << e_pred
                      << " train-vocab=" << e_train << "\n";
            Corpus gold = parse_conllu(io::read_file(e_gold), e_gold);
            Corpus pred = parse_conllu(io::read_file(e_pred), e_pred);
            auto forms = collect_forms(parse_conllu(io::read_file(e_train), e_train));
            std::vector<PredictionLogEntry> log;
            EvalReport report = evaluate(pred, gold, forms, e_log.empty() ? nullptr : &log);
            std::cout << format_report(report);
            if (!e_log.empty()) {
                std::shared_ptr<CandidateProvider> provider;
                if (!e_provider.empty()) provider = make_provider(e_provider, nullptr);
                std::string tsv = "form\tupos\tgold\tpred\toov\tcandidates\n";
                for (auto& entry : log) {
                    std::string cands = "-";
                    if (provider) {
                        auto cs = provider->get(entry.form, entry.upos);
                        if (!cs.empty()) {
                            cands.clear();
                            for (size_t i = 0; i < cs.size(); ++i) {
                                if (i) cands += ',';
                                cands += cs[i];
                            }
                        }
                    }
                    tsv += entry.form + "\t" + entry.upos + "\t" + entry.gold + "\t" + entry.pred +
                           "\t" + (entry.oov ? "1" : "0") + "\t" + cands + "\n";
                }
                io::atomic_write_file(e_log, tsv);
            }
            return kOk;
        }

        if (*bl_cmd) {
            std::cout << "command=build-lexicon train=" << bl_train << " out=" << bl_out << "\n";
            Corpus train_c = parse_conllu(io::read_file(bl_train), bl_train);
            io::atomic_write_file(bl_out, build_training_lexicon(train_c).to_tsv());
            return kOk;
        }

        if (*cand_cmd) {
            std::cout << "command=candidates provider=" << c_provider << " in=" << c_in << "\n";
            auto provider = make_provider(c_provider, nullptr);
            std::istringstream in{io::read_file(c_in)};
            std::string line;
            size_t total = 0, covered = 0, cand_count = 0;
            while (std::getline(in, line)) {
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (line.empty()) continue;
                auto cols = detail::split(line, '\t');
                std::string pos = cols.size() > 1 ? cols[1] : "";
                auto cands = provider->get(cols[0], pos);
                ++total;
                cand_count += cands.size();
                if (!cands.empty()) ++covered;
                std::cout << cols[0] << '\t' << (pos.empty() ? "-" : pos) << '\t';
                if (cands.empty()) std::cout << "-";
                for (size_t i = 0; i < cands.size(); ++i)
                    std::cout << (i ? "," : "") << cands[i];
                std::cout << "\n";
            }
            if (total > 0)
                std::cout << "stats: words=" << total << " coverage=" << double(covered) / total
                          << " mean-candidates=" << double(cand_count) / total
                          << " mean-over-covered="
                          << (covered ? double(cand_count) / covered : 0.0) << "\n";
            return kOk;
        }

        if (*aug_cmd) {
            std::cout << "command=augment freq=" << a_freq << " mode=" << a_freq_mode
                      << " train=" << a_train << " provider=" << a_provider << " k=" << a_k
                      << " out=" << a_out << "\n";
            if (a_freq_mode != "tsv" && a_freq_mode != "raw")
                throw std::invalid_argument("--freq-mode must be tsv or raw");
            FreqList freq = parse_freq_list(io::read_file(a_freq), a_freq_mode == "tsv"
                                                                       ? FreqMode::Tsv
                                                                       : FreqMode::RawText);
            Corpus train_c = parse_conllu(io::read_file(a_train), a_train);
            std::unique_ptr<AnalysisProvider> analyses;
            if (a_provider.rfind("analysis:", 0) == 0) {
                analyses = std::make_unique<AnalysisFileProvider>(
                    AnalysisFileProvider::parse(io::read_file(a_provider.substr(9))));
            } else {
                analyses = std::make_unique<LemmaOnlyAnalysisProvider>(
                    make_provider(a_provider, &train_c));
            }
            AugmentConfig cfg;
            cfg.k = a_k;
            AugmentResult result = augment(freq, train_c, *analyses, cfg);
            std::cout << "selected " << result.selected << " of " << a_k << " requested\n";
            io::atomic_write_file(a_out, write_conllu(result.corpus));
            if (!a_log.empty()) io::atomic_write_file(a_log, result.log_tsv());
            return kOk;
        }

        if (*grad_cmd) {
            std::cout << "command=gradcheck seeds=" << g_seeds << "\n";
            GradSuiteReport report = run_gradient_suite(g_seeds);
            for (auto& e : report.entries)
                std::cout << (e.ok() ? "ok   " : "FAIL ") << e.name << " max_rel_error "
                          << e.max_rel_error << " (tolerance " << e.tolerance << ")\n";
            return report.all_ok() ? kOk : kInternal;
        }
    } catch (const ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const io::SerializationError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::runtime_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}

}  // namespace lemma::cli

#endif
