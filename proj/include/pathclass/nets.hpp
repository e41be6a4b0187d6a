#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "pathclass/featurize.hpp"

namespace pathclass {

// Low-level character-level networks operating on a flat parameter vector.
// Exposed separately from TrainedModel so gradient verification and training
// can work directly with loss/gradient evaluations.
class NetCore {
public:
    virtual ~NetCore() = default;

    virtual size_t n_params() const = 0;

    // Deterministic initialization into `params`.
    virtual void init_params(std::vector<double>& params, uint64_t seed) const = 0;

    // Mean binary cross-entropy over the batch.
    virtual double loss(const std::vector<double>& params,
                        const std::vector<CharSequence>& batch,
                        const std::vector<int>& labels) const = 0;

    // Loss plus gradient with respect to every parameter.
    virtual double loss_and_grad(const std::vector<double>& params,
                                 const std::vector<CharSequence>& batch,
                                 const std::vector<int>& labels,
                                 std::vector<double>& grad) const = 0;

    // Pre-sigmoid outputs, one per sequence.
    virtual std::vector<double> logits(const std::vector<double>& params,
                                       const std::vector<CharSequence>& batch) const = 0;
};

struct CnnShape {
    int m = 0;           // alphabet size; indices are in [0, m]
    int l = 0;           // sequence length
    int embed_dim = 32;
    int conv1_filters = 64;
    int conv1_width = 5;
    int pool_width = 3;
    int conv2_filters = 64;
    int conv2_width = 3;
    int dense_units = 64;
};

struct LstmShape {
    int m = 0;
    int l = 0;
    int embed_dim = 32;
    int hidden = 64;
};

// embedding -> conv/ReLU -> max-pool -> conv/ReLU -> global max pool ->
// dense/ReLU -> dense/sigmoid. Index 0 embeds to the zero vector.
std::unique_ptr<NetCore> make_char_cnn(const CnnShape& shape);

// embedding -> single vanilla LSTM -> final hidden state -> dense/sigmoid.
std::unique_ptr<NetCore> make_char_lstm(const LstmShape& shape);

struct NetTrainOptions {
    int epochs = 15;
    int batch = 64;
    double lr = 1e-3;
    int patience = 3;          // early stop on validation AUC
    double val_fraction = 0.1; // carved from the training set
    uint64_t seed = 0;
};

struct NetTrainResult {
    std::vector<double> params;
    int epochs_run = 0;
    double final_train_loss = 0.0;
    bool early_stopped = false;
};

// Adam-style adaptive updates; deterministic given the seed.
NetTrainResult train_net(const NetCore& net, const std::vector<CharSequence>& inputs,
                         const std::vector<int>& labels, const NetTrainOptions& options);

}  // namespace pathclass
