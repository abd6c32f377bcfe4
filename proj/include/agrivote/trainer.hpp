#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "agrivote/errors.hpp"
#include "agrivote/models.hpp"
#include "agrivote/util.hpp"

namespace agrivote {

enum class CheckpointPolicy { BestVal, FinalEpoch };

inline const char* policy_name(CheckpointPolicy policy) {
    return policy == CheckpointPolicy::BestVal ? "bestval" : "final";
}

inline CheckpointPolicy policy_from_string(std::string_view text) {
    if (text == "bestval") return CheckpointPolicy::BestVal;
    if (text == "final") return CheckpointPolicy::FinalEpoch;
    raise(ErrorCode::ParseError, "unknown checkpoint policy '" + std::string(text) + "'");
}

/// Fixed training recipe: Adam, cross-entropy, head-only updates. Adam's
/// beta/epsilon stay at the canonical defaults.
struct TrainConfig {
    double learning_rate = 0.001;
    int batch_size = 32;
    int epochs = 10;
    CheckpointPolicy checkpoint_policy = CheckpointPolicy::BestVal;

    void validate() const {
        require(learning_rate > 0.0, ErrorCode::InvalidArgument, "learning rate must be > 0");
        require(batch_size >= 1, ErrorCode::InvalidArgument, "batch size must be >= 1");
        require(epochs >= 1, ErrorCode::InvalidArgument, "epochs must be >= 1");
    }
};

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    double best_val_accuracy = 0.0;
    int best_epoch = 0;  // 1-indexed
};

/// Features are extracted once (the backbone is frozen) and the head trains
/// on them; rows align with labels and image ids.
struct FeatureDataset {
    Eigen::MatrixXd features;  // N x D
    std::vector<int> labels;
    std::vector<std::string> image_ids;

    Eigen::Index size() const { return features.rows(); }
};

inline FeatureDataset extract_features(const AdaptedModel& model,
                                       const std::vector<Tensor3>& inputs,
                                       const std::vector<int>& labels,
                                       const std::vector<std::string>& image_ids) {
    require(inputs.size() == labels.size() && inputs.size() == image_ids.size(),
            ErrorCode::LengthMismatch, "inputs, labels, and ids must align");
    FeatureDataset ds;
    ds.labels = labels;
    ds.image_ids = image_ids;
    ds.features.resize(static_cast<Eigen::Index>(inputs.size()),
                       model.backbone.projection.rows());
    for (std::size_t i = 0; i < inputs.size(); ++i)
        ds.features.row(static_cast<Eigen::Index>(i)) = features(model, inputs[i]).transpose();
    return ds;
}

// ---------------------------------------------------------------------------
// Loss and evaluation
// ---------------------------------------------------------------------------

namespace detail {

/// Mean cross-entropy over rows of logits via log-sum-exp.
inline double cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& targets,
                            Eigen::Index offset, Eigen::Index count) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < count; ++i) {
        const Eigen::Index row = offset + i;
        const double max_logit = logits.row(row).maxCoeff();
        const double log_sum =
            max_logit + std::log((logits.row(row).array() - max_logit).exp().sum());
        total += log_sum - logits(row, targets[static_cast<std::size_t>(row)]);
    }
    return total / static_cast<double>(count);
}

}  // namespace detail

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;
};

inline EvalResult evaluate_head(const AdaptedModel& model, const FeatureDataset& data) {
    require(data.size() >= 1, ErrorCode::EmptySplit, "evaluation split is empty");
    const Eigen::MatrixXd logits =
        (data.features * model.head_weight.transpose()).rowwise() + model.head_bias.transpose();
    EvalResult result;
    result.loss = detail::cross_entropy(logits, data.labels, 0, logits.rows());
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        Eigen::Index argmax = 0;
        logits.row(i).maxCoeff(&argmax);
        // maxCoeff returns the first maximum, matching the low-index tie rule
        if (static_cast<int>(argmax) == data.labels[static_cast<std::size_t>(i)]) ++correct;
    }
    result.accuracy = static_cast<double>(correct) / static_cast<double>(logits.rows());
    return result;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

namespace detail {

struct AdamState {
    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double epsilon = 1e-8;

    Eigen::MatrixXd m_weight, v_weight;
    Eigen::VectorXd m_bias, v_bias;
    long step = 0;

    AdamState(Eigen::Index rows, Eigen::Index cols)
        : m_weight(Eigen::MatrixXd::Zero(rows, cols)),
          v_weight(Eigen::MatrixXd::Zero(rows, cols)),
          m_bias(Eigen::VectorXd::Zero(rows)),
          v_bias(Eigen::VectorXd::Zero(rows)) {}

    void update(AdaptedModel& model, const Eigen::MatrixXd& grad_weight,
                const Eigen::VectorXd& grad_bias, double lr) {
        ++step;
        const double bias1 = 1.0 - std::pow(beta1, step);
        const double bias2 = 1.0 - std::pow(beta2, step);
        m_weight = beta1 * m_weight + (1.0 - beta1) * grad_weight;
        v_weight = beta2 * v_weight + (1.0 - beta2) * grad_weight.cwiseProduct(grad_weight);
        m_bias = beta1 * m_bias + (1.0 - beta1) * grad_bias;
        v_bias = beta2 * v_bias + (1.0 - beta2) * grad_bias.cwiseProduct(grad_bias);
        model.head_weight.array() -=
            lr * (m_weight.array() / bias1) / ((v_weight.array() / bias2).sqrt() + epsilon);
        model.head_bias.array() -=
            lr * (m_bias.array() / bias1) / ((v_bias.array() / bias2).sqrt() + epsilon);
    }
};

}  // namespace detail

/// Trains the head on the train split, evaluates on val each epoch, and
/// leaves the model at the checkpoint selected by the policy. Epoch order is
/// reshuffled from a stream seeded by (head_seed, epoch).
inline TrainHistory train(AdaptedModel& model, const FeatureDataset& train_set,
                          const FeatureDataset& val_set, const TrainConfig& cfg) {
    cfg.validate();
    require(train_set.size() >= 1, ErrorCode::EmptySplit, "train split is empty");
    require(val_set.size() >= 1, ErrorCode::EmptySplit, "val split is empty");
    const Eigen::Index n = train_set.size();
    for (int label : train_set.labels)
        require(label >= 0 && label < model.spec.num_classes, ErrorCode::UnknownClass,
                "train label out of range");

    detail::AdamState adam(model.head_weight.rows(), model.head_weight.cols());
    TrainHistory history;
    Eigen::MatrixXd best_weight = model.head_weight;
    Eigen::VectorXd best_bias = model.head_bias;

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        Rng rng(mix_seed(model.head_seed, static_cast<std::uint64_t>(epoch)));
        deterministic_shuffle(order, rng);

        double loss_sum = 0.0;
        for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
            const Eigen::Index count = std::min<Eigen::Index>(cfg.batch_size, n - start);
            Eigen::MatrixXd batch(count, train_set.features.cols());
            std::vector<int> targets(static_cast<std::size_t>(count));
            for (Eigen::Index i = 0; i < count; ++i) {
                batch.row(i) = train_set.features.row(order[static_cast<std::size_t>(start + i)]);
                targets[static_cast<std::size_t>(i)] =
                    train_set.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(start + i)])];
            }

            Eigen::MatrixXd logits =
                (batch * model.head_weight.transpose()).rowwise() + model.head_bias.transpose();
            const double batch_loss = detail::cross_entropy(logits, targets, 0, count);
            if (!std::isfinite(batch_loss))
                raise(ErrorCode::DivergedTraining,
                      "non-finite loss at epoch " + std::to_string(epoch));
            loss_sum += batch_loss * static_cast<double>(count);

            // dL/dlogits = (softmax - onehot) / batch
            Eigen::MatrixXd grad_logits(count, model.spec.num_classes);
            for (Eigen::Index i = 0; i < count; ++i) {
                const double max_logit = logits.row(i).maxCoeff();
                Eigen::VectorXd p = (logits.row(i).array() - max_logit).exp();
                p /= p.sum();
                p(targets[static_cast<std::size_t>(i)]) -= 1.0;
                grad_logits.row(i) = p.transpose() / static_cast<double>(count);
            }
            const Eigen::MatrixXd grad_weight = grad_logits.transpose() * batch;
            const Eigen::VectorXd grad_bias = grad_logits.colwise().sum().transpose();
            adam.update(model, grad_weight, grad_bias, cfg.learning_rate);
        }

        EpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(n);
        const EvalResult val = evaluate_head(model, val_set);
        stats.val_loss = val.loss;
        stats.val_accuracy = val.accuracy;
        history.epochs.push_back(stats);

        if (history.best_epoch == 0 || val.accuracy > history.best_val_accuracy) {
            history.best_val_accuracy = val.accuracy;
            history.best_epoch = epoch;
            best_weight = model.head_weight;
            best_bias = model.head_bias;
        }
    }

    if (cfg.checkpoint_policy == CheckpointPolicy::BestVal) {
        model.head_weight = best_weight;
        model.head_bias = best_bias;
    }
    return history;
}

// ---------------------------------------------------------------------------
// History CSV: epoch,train_loss,val_loss,val_acc
// ---------------------------------------------------------------------------

inline std::string history_to_csv(const TrainHistory& history) {
    std::string out = "epoch,train_loss,val_loss,val_acc\n";
    for (std::size_t i = 0; i < history.epochs.size(); ++i) {
        const EpochStats& e = history.epochs[i];
        out += std::to_string(i + 1) + "," + format_double(e.train_loss) + "," +
               format_double(e.val_loss) + "," + format_double(e.val_accuracy) + "\n";
    }
    return out;
}

inline TrainHistory parse_history_csv(std::string_view text) {
    const std::vector<std::string> lines = split_lines(text);
    require(!lines.empty() && lines[0] == "epoch,train_loss,val_loss,val_acc",
            ErrorCode::ParseError, "history CSV header missing");
    TrainHistory history;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_string(lines[i], ',');
        require(fields.size() == 4, ErrorCode::ParseError, "bad history row: " + lines[i]);
        require(parse_int(fields[0], "history epoch") == static_cast<long long>(i),
                ErrorCode::ParseError, "history epochs out of order");
        EpochStats stats;
        stats.train_loss = parse_double(fields[1], "history");
        stats.val_loss = parse_double(fields[2], "history");
        stats.val_accuracy = parse_double(fields[3], "history");
        history.epochs.push_back(stats);
        if (history.best_epoch == 0 || stats.val_accuracy > history.best_val_accuracy) {
            history.best_val_accuracy = stats.val_accuracy;
            history.best_epoch = static_cast<int>(i);
        }
    }
    return history;
}

// ---------------------------------------------------------------------------
// Checkpoint container (JSON). Backbone weights are not stored; the provider
// descriptor and checksum let the loader re-fetch and verify them.
// ---------------------------------------------------------------------------

inline void save_checkpoint(const AdaptedModel& model, const TrainHistory& history,
                            CheckpointPolicy policy, const std::filesystem::path& path) {
    nlohmann::json j;
    j["format"] = "agrivote-checkpoint-v1";
    j["tool_version"] = kToolVersion;
    j["arch"] = arch_name(model.spec.arch);
    j["num_classes"] = model.spec.num_classes;
    j["pretrained"] = model.spec.pretrained;
    j["provider"] = model.provider;
    j["backbone_checksum"] = model.checksum;
    j["head_seed"] = model.head_seed;
    j["checkpoint_policy"] = policy_name(policy);

    nlohmann::json weight = nlohmann::json::array();
    for (Eigen::Index r = 0; r < model.head_weight.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < model.head_weight.cols(); ++c)
            row.push_back(model.head_weight(r, c));
        weight.push_back(std::move(row));
    }
    j["head_weight"] = std::move(weight);
    nlohmann::json bias = nlohmann::json::array();
    for (Eigen::Index r = 0; r < model.head_bias.size(); ++r) bias.push_back(model.head_bias(r));
    j["head_bias"] = std::move(bias);

    nlohmann::json hist;
    hist["best_epoch"] = history.best_epoch;
    hist["best_val_accuracy"] = history.best_val_accuracy;
    nlohmann::json epochs = nlohmann::json::array();
    for (const EpochStats& e : history.epochs)
        epochs.push_back({{"train_loss", e.train_loss},
                          {"val_loss", e.val_loss},
                          {"val_accuracy", e.val_accuracy}});
    hist["epochs"] = std::move(epochs);
    j["history"] = std::move(hist);

    write_file(path, j.dump(2) + "\n");
}

struct Checkpoint {
    AdaptedModel model;
    TrainHistory history;
    CheckpointPolicy policy = CheckpointPolicy::BestVal;
};

/// Re-fetches the backbone via the stored provider descriptor (or an
/// override) and verifies it against the recorded checksum.
inline Checkpoint load_checkpoint(const std::filesystem::path& path,
                                  const WeightProvider* provider_override = nullptr) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::ParseError, "bad checkpoint JSON in " + path.string() + ": " + e.what());
    }
    require(j.value("format", "") == "agrivote-checkpoint-v1", ErrorCode::ParseError,
            "unknown checkpoint format in " + path.string());

    Checkpoint ckpt;
    ckpt.model.spec.arch = arch_from_string(j.at("arch").get<std::string>());
    ckpt.model.spec.num_classes = j.at("num_classes").get<int>();
    ckpt.model.spec.pretrained = j.at("pretrained").get<bool>();
    ckpt.model.provider = j.at("provider").get<std::string>();
    ckpt.model.head_seed = j.at("head_seed").get<std::uint64_t>();
    ckpt.policy = policy_from_string(j.at("checkpoint_policy").get<std::string>());

    std::unique_ptr<WeightProvider> owned;
    const WeightProvider* provider = provider_override;
    if (provider == nullptr) {
        owned = make_provider(ckpt.model.provider);
        provider = owned.get();
    }
    ckpt.model.backbone = provider->fetch(ckpt.model.spec.arch);
    ckpt.model.checksum = backbone_checksum(ckpt.model.backbone);
    const std::string recorded = j.at("backbone_checksum").get<std::string>();
    require(ckpt.model.checksum == recorded, ErrorCode::CheckpointMismatch,
            "backbone checksum mismatch: provider gives " + ckpt.model.checksum +
                ", checkpoint records " + recorded);

    const auto& weight = j.at("head_weight");
    const Eigen::Index rows = static_cast<Eigen::Index>(weight.size());
    require(rows == ckpt.model.spec.num_classes, ErrorCode::ParseError,
            "head weight rows do not match num_classes");
    const Eigen::Index cols = static_cast<Eigen::Index>(weight.at(0).size());
    ckpt.model.head_weight.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            ckpt.model.head_weight(r, c) = weight.at(r).at(c).get<double>();
    const auto& bias = j.at("head_bias");
    require(static_cast<Eigen::Index>(bias.size()) == rows, ErrorCode::ParseError,
            "head bias size mismatch");
    ckpt.model.head_bias.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) ckpt.model.head_bias(r) = bias.at(r).get<double>();

    const auto& hist = j.at("history");
    ckpt.history.best_epoch = hist.at("best_epoch").get<int>();
    ckpt.history.best_val_accuracy = hist.at("best_val_accuracy").get<double>();
    for (const auto& e : hist.at("epochs"))
        ckpt.history.epochs.push_back({e.at("train_loss").get<double>(),
                                       e.at("val_loss").get<double>(),
                                       e.at("val_accuracy").get<double>()});
    return ckpt;
}

}  // namespace agrivote
