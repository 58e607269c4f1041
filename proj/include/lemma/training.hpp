#ifndef LEMMA_TRAINING_HPP
#define LEMMA_TRAINING_HPP

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lemma/model.hpp"

namespace lemma {

struct TrainConfig {
    int max_epochs = 60;
    int patience = 10;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double grad_clip = 5.0;
    uint64_t shuffle_seed = 12345;
    std::string checkpoint_dir;  // optional; best.bin / last.bin when set

    void validate() const {
        if (max_epochs < 1 || patience < 1 || batch_size < 1)
            throw std::invalid_argument("bad training config");
        if (patience > max_epochs) throw std::invalid_argument("patience exceeds max epochs");
    }

    // key=value lines; '#' comments allowed.
    static TrainConfig from_kv(std::string_view text) {
        TrainConfig cfg;
        std::istringstream in{std::string(text)};
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError("config line without '=': " + line);
            std::string key = line.substr(0, eq), val = line.substr(eq + 1);
            if (key == "max_epochs") cfg.max_epochs = std::stoi(val);
            else if (key == "patience") cfg.patience = std::stoi(val);
            else if (key == "batch_size") cfg.batch_size = std::stoi(val);
            else if (key == "learning_rate") cfg.learning_rate = std::stod(val);
            else if (key == "grad_clip") cfg.grad_clip = std::stod(val);
            else if (key == "shuffle_seed") cfg.shuffle_seed = std::stoull(val);
            else if (key == "checkpoint_dir") cfg.checkpoint_dir = val;
            else throw ParseError("unknown config key: " + key);
        }
        return cfg;
    }
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double dev_accuracy = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    int best_epoch = 0;  // 1-based; first occurrence of the maximal dev accuracy
    std::string stop_reason;  // "max-epochs" or "early-stop"

    std::string to_tsv() const {
        std::string out = "epoch\tloss\tdev_acc\n";
        char buf[96];
        for (auto& e : epochs) {
            std::snprintf(buf, sizeof(buf), "%d\t%.6f\t%.6f\n", e.epoch, e.train_loss,
                          e.dev_accuracy);
            out += buf;
        }
        return out;
    }
};

// Shuffle, then group by similar source length, then shuffle batch order.
// Every instance appears exactly once; same seed gives identical batching.
inline std::vector<std::vector<Instance>> make_batches(std::vector<Instance> instances,
                                                       int batch_size, std::mt19937_64& rng) {
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    std::shuffle(instances.begin(), instances.end(), rng);
    std::stable_sort(instances.begin(), instances.end(),
                     [](const Instance& a, const Instance& b) {
                         return a.source.size() < b.source.size();
                     });
    std::vector<std::vector<Instance>> batches;
    for (size_t i = 0; i < instances.size(); i += static_cast<size_t>(batch_size)) {
        size_t end = std::min(instances.size(), i + static_cast<size_t>(batch_size));
        batches.emplace_back(instances.begin() + static_cast<long>(i),
                             instances.begin() + static_cast<long>(end));
    }
    std::shuffle(batches.begin(), batches.end(), rng);
    return batches;
}

inline std::vector<Instance> build_instances(const Corpus& corpus,
                                             const CandidateProvider& provider,
                                             const EnhancedLemmatizer& model) {
    std::vector<Instance> out;
    for (auto& sent : corpus.sentences)
        for (auto& tok : sent.tokens) out.push_back(model.make_instance(tok, provider));
    return out;
}

// Pure early-stopping rule over a dev-accuracy trace: returns (stop_epoch,
// best_epoch, reason). Training runs through epoch e as long as fewer than
// `patience` epochs have passed since the best epoch.
struct StoppingDecision {
    int stop_epoch = 0;
    int best_epoch = 0;
    std::string reason;
};

inline StoppingDecision stopping_epoch(const std::vector<double>& dev_trace, int max_epochs,
                                       int patience) {
    StoppingDecision d;
    double best = -1.0;
    for (int e = 1; e <= max_epochs && e <= static_cast<int>(dev_trace.size()); ++e) {
        double acc = dev_trace[static_cast<size_t>(e - 1)];
        if (acc > best) {
            best = acc;
            d.best_epoch = e;
        }
        d.stop_epoch = e;
        if (e - d.best_epoch >= patience) {
            d.reason = "early-stop";
            return d;
        }
    }
    d.reason = "max-epochs";
    return d;
}

inline double dev_accuracy(const EnhancedLemmatizer& model, const Corpus& dev,
                           const CandidateProvider& provider) {
    size_t total = 0, correct = 0;
    for (auto& sent : dev.sentences)
        for (auto& tok : sent.tokens) {
            ++total;
            if (model.lemmatize(tok, provider) == tok.lemma) ++correct;
        }
    return total == 0 ? 0.0 : double(correct) / double(total);
}

// Trains in place; the model ends with the parameters of the best dev epoch.
inline TrainHistory train(EnhancedLemmatizer& model, const Corpus& train_corpus,
                          const Corpus& dev_corpus, const CandidateProvider& provider,
                          const TrainConfig& cfg) {
    cfg.validate();
    if (train_corpus.token_count() == 0) throw std::invalid_argument("empty training corpus");
    if (dev_corpus.token_count() == 0) throw std::invalid_argument("empty dev corpus");

    auto instances = build_instances(train_corpus, provider, model);
    auto params = model.params();
    nn::Adam opt(cfg.learning_rate);
    std::mt19937_64 shuffle_rng(cfg.shuffle_seed);
    std::mt19937_64 drop_rng(cfg.shuffle_seed ^ 0x9e3779b97f4a7c15ull);
    std::mt19937_64 train_rng(cfg.shuffle_seed ^ 0xc2b2ae3d27d4eb4full);
    double p = model.config().encoder_dropout_p;

    TrainHistory history;
    double best_acc = -1.0;
    std::vector<std::vector<double>> best_params;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        auto batches = make_batches(instances, cfg.batch_size, shuffle_rng);
        double loss_sum = 0.0;
        size_t loss_count = 0;
        for (auto& batch : batches) {
            apply_encoder_dropout(batch, p, drop_rng);
            nn::Graph g;
            nn::Var loss = model.forward_loss_var(g, batch, &train_rng);
            loss_sum += g.value(loss)(0);
            ++loss_count;
            g.backward(loss);
            nn::clip_grad_norm(params, cfg.grad_clip);
            opt.step(params);
        }
        double acc = dev_accuracy(model, dev_corpus, provider);
        history.epochs.push_back({epoch, loss_sum / double(loss_count), acc});
        if (acc > best_acc) {
            best_acc = acc;
            history.best_epoch = epoch;
            best_params.clear();
            for (auto* pr : params) best_params.push_back(pr->value.data);
            if (!cfg.checkpoint_dir.empty()) model.save(cfg.checkpoint_dir + "/best.bin");
        }
        if (!cfg.checkpoint_dir.empty() && epoch == cfg.max_epochs)
            model.save(cfg.checkpoint_dir + "/last.bin");
        if (epoch - history.best_epoch >= cfg.patience) {
            history.stop_reason = "early-stop";
            break;
        }
    }
    if (history.stop_reason.empty()) history.stop_reason = "max-epochs";

    if (!cfg.checkpoint_dir.empty() &&
        history.epochs.back().epoch != cfg.max_epochs)
        model.save(cfg.checkpoint_dir + "/last.bin");

    for (size_t i = 0; i < params.size(); ++i) params[i]->value.data = best_params[i];
    return history;
}

}  // namespace lemma

#endif
