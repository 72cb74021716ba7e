/*
 * Copyright 2026 the tagsem authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file
 * except in compliance with the License. You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under the
 * License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND,
 * either express or implied. See the License for the specific language governing permissions
 * and limitations under the License.
 */

#ifndef TAGSEM_NETWORK_HPP
#define TAGSEM_NETWORK_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "matrix.hpp"
#include "rng.hpp"

namespace tagsem {

struct HyperParams {
  double lambda = 0.5;          // KL sensitivity in the context similarity
  double beta = 3.0;            // spread scale of the embedding space
  double rho = 0.5;             // negative-pair importance, in [0, 1)
  double alpha = 0.5;           // trade-off between prediction and distance loss
  double learning_rate = 0.01;
  double momentum = 0.9;
  int batch_size = 32;          // prediction-stage mini-batch
  int pair_batch_size = 100;    // siamese-stage pairs per update
  int max_epochs = 200;
  int patience = 10;            // epochs without validation improvement
  double output_clamp = 1e-6;   // epsilon keeping log arguments away from 0
  int pretrain_epochs = 10;
  double sparsity_weight = 1e-4;
  bool swap_kappa = false;      // experimental: swap the kappa weighting
  uint64_t rng_seed = 42;

  void validate() const;
};

struct Layer {
  Matrix w;   // out x in
  Vector b;

  bool operator==(const Layer&) const = default;
};

/// Feed-forward stack of tanh layers. Activations index 0..H where 0 is the
/// raw input, H-1 the contextual embedding and H the prediction.
struct Network {
  std::vector<Layer> layers;

  int input_size() const { return layers.empty() ? 0 : layers.front().w.cols(); }
  int output_size() const { return layers.empty() ? 0 : layers.back().w.rows(); }
  int embedding_size() const {
    return layers.size() < 2 ? 0 : layers[layers.size() - 2].w.rows();
  }

  std::vector<Vector> forward(const Vector& x) const;

  bool operator==(const Network&) const = default;
};

/// Seeded uniform initialization, each layer in (-1/sqrt(fan_in), 1/sqrt(fan_in)).
Network make_network(int input_size, const std::vector<int>& hidden_sizes, int output_size,
                     Rng& rng);

struct LayerGrad {
  Matrix w;
  Vector b;
};
using Gradients = std::vector<LayerGrad>;

Gradients zero_gradients(const Network& net);

/// One synthesized example: a focused tag with the shared local context of a
/// source document. Positive examples focus a tag of the document and target
/// its bag-of-words; negatives focus an outside tag and target the complement.
struct TrainingExample {
  int tag_index = -1;
  std::shared_ptr<const std::vector<int>> doc_tags;   // sorted vocab indices
  std::shared_ptr<const Vector> context;
  std::string doc_id;
  bool positive = true;
  double kappa = 0.0;   // fraction of +1 entries in the target
};

/// m positive plus up to m negative examples for one document; negatives are
/// drawn uniformly without replacement from the tags outside the document.
std::vector<TrainingExample> make_training_examples(
    const std::vector<int>& doc_tag_indices, const std::string& doc_id,
    std::shared_ptr<const Vector> context, int vocab_size, Rng& rng);

/// The +-1 target vector of an example over the vocabulary.
Vector example_target(const TrainingExample& example, int vocab_size);

/// Fully assembled network example (inputs precomputed for the hot loops).
struct NetInput {
  Vector x;
  Vector target;    // +-1 coded
  double kappa = 0.0;
  bool positive = true;
  Vector context;   // raw topic mixture, used for pair similarity
};

/// Cross-entropy-style prediction loss over a batch:
///   -(1/(2K|G|)) sum_k sum_j [k_k (1+y) ln(1+yhat) + (1-k_k)(1-y) ln(1-yhat)]
/// with yhat clamped to +-(1 - output_clamp) inside the logs.
double prediction_loss(const Network& net, const std::vector<const NetInput*>& batch,
                       const HyperParams& hyper);

struct LossGrad {
  double loss = 0.0;
  Gradients grads;
};

/// Loss plus full parameter gradient by backpropagation. Throws a numeric
/// error naming the layer if the forward pass produces non-finite values.
LossGrad prediction_loss_and_grad(const Network& net, const std::vector<const NetInput*>& batch,
                                  const HyperParams& hyper);

/// One Eq.4 summand for a pair with embedding distance e and context
/// similarity s: positive-positive (e - beta(1-s))^2, negative-negative
/// rho (e - beta(1-s))^2, mixed (e - beta)^2 s.
double pair_term(double e, double s, bool positive1, bool positive2, const HyperParams& hyper);
double pair_term_grad_e(double e, double s, bool positive1, bool positive2,
                        const HyperParams& hyper);

/// Context similarity S = exp(-lambda * sym_kl(context1, context2)).
double context_similarity(const Vector& context1, const Vector& context2, double lambda);

struct SiameseEval {
  double total = 0.0;        // Eq.5
  double prediction1 = 0.0;  // Eq.3 on the first twin's batch
  double prediction2 = 0.0;
  double siamese = 0.0;      // Eq.4 average over pairs
  Gradients grad1;           // d total / d twin1 parameters
  Gradients grad2;
};

/// Multi-objective loss over N pairs: L_p(X1) + L_p(X2) + alpha L_s(X1, X2),
/// with per-twin gradients. When the twins share parameters the gradient of
/// the shared set is grad1 + grad2.
SiameseEval siamese_loss_and_grad(const Network& twin1, const Network& twin2,
                                  const std::vector<const NetInput*>& batch1,
                                  const std::vector<const NetInput*>& batch2,
                                  const HyperParams& hyper);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double validation_p2 = 0.0;
};

struct TrainOutcome {
  Network network;
  std::vector<EpochLog> history;
  bool diverged = false;
  int best_epoch = -1;
  double best_validation = 0.0;
};

/// Validation hook: returns the validation P@2 of a candidate network.
using ValidationFn = std::function<double(const Network&)>;

/// Mini-batch stochastic backpropagation on the prediction loss with
/// momentum, shuffling examples every epoch. Stops early when validation P@2
/// has not improved for `patience` epochs and restores the best checkpoint.
TrainOutcome train_prediction(const Network& init, const std::vector<NetInput>& data,
                              const HyperParams& hyper, uint64_t seed,
                              const ValidationFn& validation);

/// Siamese fine-tuning: per update, draws pair_batch_size random example
/// pairs, updates both twins on the multi-objective loss, then resets both
/// parameter sets to their elementwise average. `after_update` (if given)
/// observes the twins after every averaging step.
TrainOutcome train_siamese(const Network& init, const std::vector<NetInput>& data,
                           const HyperParams& hyper, uint64_t seed,
                           const ValidationFn& validation,
                           const std::function<void(const Network&, const Network&)>&
                               after_update = nullptr);

/// One trained autoencoder layer: tanh encoder with a linear decoder.
struct Autoencoder {
  Layer encoder;
  Layer decoder;

  Vector encode(const Vector& x) const;
  Vector reconstruct(const Vector& x) const;
};

/// Trains a single autoencoder (squared reconstruction error plus an L1
/// activity penalty on the code) with mini-batch SGD.
Autoencoder train_autoencoder(const std::vector<Vector>& inputs, int hidden_size,
                              const HyperParams& hyper, Rng& rng);

/// Greedy layer-wise initialization: every hidden layer is trained as a tanh
/// autoencoder on the previous layer's activations; decoders are discarded
/// and the output layer keeps its seeded random initialization.
Network pretrain_autoencoders(int input_size, const std::vector<int>& hidden_sizes,
                              int output_size, const std::vector<Vector>& inputs,
                              const HyperParams& hyper, uint64_t seed);

}  // namespace tagsem

#endif  // TAGSEM_NETWORK_HPP
