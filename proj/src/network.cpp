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

#include "network.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "topics.hpp"

namespace tagsem {

void HyperParams::validate() const {
  if (!(lambda > 0.0)) throw Error(ErrorCode::kConfig, "lambda must be > 0");
  if (!(beta > 0.0)) throw Error(ErrorCode::kConfig, "beta must be > 0");
  if (!(rho >= 0.0 && rho < 1.0)) throw Error(ErrorCode::kConfig, "rho must be in [0, 1)");
  if (!(alpha > 0.0)) throw Error(ErrorCode::kConfig, "alpha must be > 0");
  if (!(output_clamp > 0.0 && output_clamp < 0.1)) {
    throw Error(ErrorCode::kConfig, "output clamp must be in (0, 0.1)");
  }
  if (batch_size < 1 || pair_batch_size < 1) {
    throw Error(ErrorCode::kConfig, "batch sizes must be >= 1");
  }
  if (max_epochs < 0 || patience < 1) {
    throw Error(ErrorCode::kConfig, "epoch and patience settings must be positive");
  }
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kConfig, "learning rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw Error(ErrorCode::kConfig, "momentum must be in [0, 1)");
  }
}

std::vector<Vector> Network::forward(const Vector& x) const {
  if (static_cast<int>(x.size()) != input_size()) {
    throw Error(ErrorCode::kInvalidArgument, "input width mismatch: expected " +
                                                 std::to_string(input_size()) + ", got " +
                                                 std::to_string(x.size()));
  }
  std::vector<Vector> acts;
  acts.reserve(layers.size() + 1);
  acts.push_back(x);
  for (const auto& layer : layers) {
    const Vector& prev = acts.back();
    Vector z(static_cast<size_t>(layer.w.rows()));
    for (int i = 0; i < layer.w.rows(); ++i) {
      const double* row = layer.w.row(i);
      double a = layer.b[static_cast<size_t>(i)];
      for (int j = 0; j < layer.w.cols(); ++j) a += row[j] * prev[static_cast<size_t>(j)];
      z[static_cast<size_t>(i)] = std::tanh(a);
    }
    acts.push_back(std::move(z));
  }
  return acts;
}

Network make_network(int input_size, const std::vector<int>& hidden_sizes, int output_size,
                     Rng& rng) {
  std::vector<int> sizes;
  sizes.push_back(input_size);
  sizes.insert(sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
  sizes.push_back(output_size);

  Network net;
  for (size_t h = 1; h < sizes.size(); ++h) {
    const int in = sizes[h - 1];
    const int out = sizes[h];
    if (in < 1 || out < 1) throw Error(ErrorCode::kConfig, "layer sizes must be >= 1");
    Layer layer;
    layer.w = Matrix(out, in);
    layer.b.assign(static_cast<size_t>(out), 0.0);
    const double r = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& v : layer.w.data()) v = (2.0 * rng.uniform01() - 1.0) * r;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

Gradients zero_gradients(const Network& net) {
  Gradients grads;
  grads.reserve(net.layers.size());
  for (const auto& layer : net.layers) {
    grads.push_back({Matrix(layer.w.rows(), layer.w.cols(), 0.0),
                     Vector(layer.b.size(), 0.0)});
  }
  return grads;
}

std::vector<TrainingExample> make_training_examples(
    const std::vector<int>& doc_tag_indices, const std::string& doc_id,
    std::shared_ptr<const Vector> context, int vocab_size, Rng& rng) {
  const int m = static_cast<int>(doc_tag_indices.size());
  if (m < 1) {
    throw Error(ErrorCode::kValidation, "document has no in-vocabulary tags: " + doc_id);
  }
  auto shared_tags = std::make_shared<const std::vector<int>>(doc_tag_indices);
  const double kappa_pos = static_cast<double>(m) / vocab_size;

  std::vector<TrainingExample> examples;
  examples.reserve(static_cast<size_t>(2 * m));
  for (const int tag : doc_tag_indices) {
    examples.push_back({tag, shared_tags, context, doc_id, true, kappa_pos});
  }

  // Negative candidates: the vocabulary minus the document's tags.
  std::vector<int> outside;
  outside.reserve(static_cast<size_t>(vocab_size - m));
  size_t cursor = 0;
  for (int j = 0; j < vocab_size; ++j) {
    if (cursor < doc_tag_indices.size() && doc_tag_indices[cursor] == j) {
      ++cursor;
      continue;
    }
    outside.push_back(j);
  }
  if (outside.empty()) {
    throw Error(ErrorCode::kValidation,
                "no tags left to synthesize negatives for document " + doc_id);
  }
  const int negatives = std::min<int>(m, static_cast<int>(outside.size()));
  const double kappa_neg = static_cast<double>(vocab_size - m) / vocab_size;
  const std::vector<int> picks =
      rng.sample_without_replacement(static_cast<int>(outside.size()), negatives);
  for (const int pick : picks) {
    examples.push_back({outside[static_cast<size_t>(pick)], shared_tags, context, doc_id,
                        false, kappa_neg});
  }
  return examples;
}

Vector example_target(const TrainingExample& example, int vocab_size) {
  Vector target(static_cast<size_t>(vocab_size), example.positive ? -1.0 : 1.0);
  for (const int idx : *example.doc_tags) {
    target[static_cast<size_t>(idx)] = example.positive ? 1.0 : -1.0;
  }
  return target;
}

namespace {

void check_finite(const std::vector<Vector>& acts) {
  for (size_t h = 1; h < acts.size(); ++h) {
    for (const double v : acts[h]) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kNumeric,
                    "non-finite activation in layer " + std::to_string(h));
      }
    }
  }
}

/// Per-example Eq.3 inner sum and its derivative w.r.t. the raw output.
/// `scale` carries the -(1/(2K|G|)) factor.
double prediction_terms(const Vector& output, const NetInput& ex, const HyperParams& hyper,
                        double scale, Vector* dloss_doutput) {
  const double clamp = 1.0 - hyper.output_clamp;
  const double k_pos = hyper.swap_kappa ? 1.0 - ex.kappa : ex.kappa;
  const double k_neg = 1.0 - k_pos;
  double sum = 0.0;
  for (size_t j = 0; j < output.size(); ++j) {
    const double y = ex.target[j];
    const double raw = output[j];
    const double yhat = std::clamp(raw, -clamp, clamp);
    const bool clamped = raw != yhat;
    if (y > 0.0) {
      sum += k_pos * 2.0 * std::log1p(yhat);
      if (dloss_doutput) {
        (*dloss_doutput)[j] = clamped ? 0.0 : scale * k_pos * 2.0 / (1.0 + yhat);
      }
    } else {
      sum += k_neg * 2.0 * std::log1p(-yhat);
      if (dloss_doutput) {
        (*dloss_doutput)[j] = clamped ? 0.0 : -scale * k_neg * 2.0 / (1.0 - yhat);
      }
    }
  }
  return sum;
}

/// Backpropagates dL/dz_H (post-activation) through the stack; `extra_ce`
/// is an additional dL/dz_{H-1} term injected at the penultimate layer.
void accumulate_backward(const Network& net, const std::vector<Vector>& acts,
                         Vector grad_output, const Vector* extra_ce, Gradients& grads) {
  const size_t depth = net.layers.size();
  Vector g = std::move(grad_output);
  for (size_t h = depth; h >= 1; --h) {
    const Layer& layer = net.layers[h - 1];
    const Vector& z = acts[h];
    const Vector& prev = acts[h - 1];
    Vector delta(z.size());
    for (size_t i = 0; i < z.size(); ++i) delta[i] = g[i] * (1.0 - z[i] * z[i]);

    LayerGrad& lg = grads[h - 1];
    for (int i = 0; i < layer.w.rows(); ++i) {
      const double d = delta[static_cast<size_t>(i)];
      double* grow = lg.w.row(i);
      for (int j = 0; j < layer.w.cols(); ++j) grow[j] += d * prev[static_cast<size_t>(j)];
      lg.b[static_cast<size_t>(i)] += d;
    }
    if (h == 1) break;

    Vector g_prev(prev.size(), 0.0);
    for (int i = 0; i < layer.w.rows(); ++i) {
      const double d = delta[static_cast<size_t>(i)];
      const double* row = layer.w.row(i);
      for (int j = 0; j < layer.w.cols(); ++j) g_prev[static_cast<size_t>(j)] += row[j] * d;
    }
    if (h == depth && extra_ce) {
      for (size_t j = 0; j < g_prev.size(); ++j) g_prev[j] += (*extra_ce)[j];
    }
    g = std::move(g_prev);
  }
}

}  // namespace

double prediction_loss(const Network& net, const std::vector<const NetInput*>& batch,
                       const HyperParams& hyper) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  const double scale =
      -1.0 / (2.0 * static_cast<double>(batch.size()) * net.output_size());
  double sum = 0.0;
  for (const NetInput* ex : batch) {
    const auto acts = net.forward(ex->x);
    sum += prediction_terms(acts.back(), *ex, hyper, scale, nullptr);
  }
  return scale * sum;
}

LossGrad prediction_loss_and_grad(const Network& net,
                                  const std::vector<const NetInput*>& batch,
                                  const HyperParams& hyper) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidArgument, "empty batch");
  const double scale =
      -1.0 / (2.0 * static_cast<double>(batch.size()) * net.output_size());

  LossGrad result;
  result.grads = zero_gradients(net);
  double sum = 0.0;
  Vector grad_output(static_cast<size_t>(net.output_size()));
  for (const NetInput* ex : batch) {
    const auto acts = net.forward(ex->x);
    check_finite(acts);
    sum += prediction_terms(acts.back(), *ex, hyper, scale, &grad_output);
    accumulate_backward(net, acts, grad_output, nullptr, result.grads);
  }
  result.loss = scale * sum;
  return result;
}

double pair_term(double e, double s, bool positive1, bool positive2,
                 const HyperParams& hyper) {
  if (positive1 && positive2) {
    const double diff = e - hyper.beta * (1.0 - s);
    return diff * diff;
  }
  if (!positive1 && !positive2) {
    const double diff = e - hyper.beta * (1.0 - s);
    return hyper.rho * diff * diff;
  }
  const double diff = e - hyper.beta;
  return diff * diff * s;
}

double pair_term_grad_e(double e, double s, bool positive1, bool positive2,
                        const HyperParams& hyper) {
  if (positive1 && positive2) return 2.0 * (e - hyper.beta * (1.0 - s));
  if (!positive1 && !positive2) return 2.0 * hyper.rho * (e - hyper.beta * (1.0 - s));
  return 2.0 * (e - hyper.beta) * s;
}

double context_similarity(const Vector& context1, const Vector& context2, double lambda) {
  return std::exp(-lambda * sym_kl(context1, context2));
}

SiameseEval siamese_loss_and_grad(const Network& twin1, const Network& twin2,
                                  const std::vector<const NetInput*>& batch1,
                                  const std::vector<const NetInput*>& batch2,
                                  const HyperParams& hyper) {
  if (batch1.empty() || batch1.size() != batch2.size()) {
    throw Error(ErrorCode::kInvalidArgument, "pair batches must be equal-sized and nonempty");
  }
  const size_t n = batch1.size();
  const double pred_scale1 =
      -1.0 / (2.0 * static_cast<double>(n) * twin1.output_size());
  const double pred_scale2 =
      -1.0 / (2.0 * static_cast<double>(n) * twin2.output_size());
  const double pair_scale = hyper.alpha / static_cast<double>(n);

  SiameseEval eval;
  eval.grad1 = zero_gradients(twin1);
  eval.grad2 = zero_gradients(twin2);

  double pred_sum1 = 0.0;
  double pred_sum2 = 0.0;
  Vector grad_out1(static_cast<size_t>(twin1.output_size()));
  Vector grad_out2(static_cast<size_t>(twin2.output_size()));
  const int ce_dim = twin1.embedding_size();
  Vector ce_grad1(static_cast<size_t>(ce_dim));
  Vector ce_grad2(static_cast<size_t>(ce_dim));

  for (size_t i = 0; i < n; ++i) {
    const NetInput& a = *batch1[i];
    const NetInput& b = *batch2[i];
    const auto acts1 = twin1.forward(a.x);
    const auto acts2 = twin2.forward(b.x);
    check_finite(acts1);
    check_finite(acts2);

    pred_sum1 += prediction_terms(acts1.back(), a, hyper, pred_scale1, &grad_out1);
    pred_sum2 += prediction_terms(acts2.back(), b, hyper, pred_scale2, &grad_out2);

    const Vector& ce1 = acts1[acts1.size() - 2];
    const Vector& ce2 = acts2[acts2.size() - 2];
    double dist2 = 0.0;
    for (int j = 0; j < ce_dim; ++j) {
      const double d = ce1[static_cast<size_t>(j)] - ce2[static_cast<size_t>(j)];
      dist2 += d * d;
    }
    const double e = std::sqrt(dist2);
    const double s = context_similarity(a.context, b.context, hyper.lambda);
    eval.siamese += pair_term(e, s, a.positive, b.positive, hyper);

    const double de = pair_term_grad_e(e, s, a.positive, b.positive, hyper);
    if (e > 1e-300) {
      const double factor = pair_scale * de / e;
      for (int j = 0; j < ce_dim; ++j) {
        const double diff = ce1[static_cast<size_t>(j)] - ce2[static_cast<size_t>(j)];
        ce_grad1[static_cast<size_t>(j)] = factor * diff;
        ce_grad2[static_cast<size_t>(j)] = -factor * diff;
      }
    } else {
      std::fill(ce_grad1.begin(), ce_grad1.end(), 0.0);
      std::fill(ce_grad2.begin(), ce_grad2.end(), 0.0);
    }

    accumulate_backward(twin1, acts1, grad_out1, &ce_grad1, eval.grad1);
    accumulate_backward(twin2, acts2, grad_out2, &ce_grad2, eval.grad2);
  }

  eval.prediction1 = pred_scale1 * pred_sum1;
  eval.prediction2 = pred_scale2 * pred_sum2;
  eval.siamese /= static_cast<double>(n);
  eval.total = eval.prediction1 + eval.prediction2 + hyper.alpha * eval.siamese;
  return eval;
}

namespace {

struct MomentumState {
  Gradients velocity;
};

void sgd_update(Network& net, const Gradients& grads, MomentumState& state,
                const HyperParams& hyper) {
  for (size_t h = 0; h < net.layers.size(); ++h) {
    auto& vw = state.velocity[h].w.data();
    auto& wb = net.layers[h].w.data();
    const auto& gw = grads[h].w.data();
    for (size_t i = 0; i < wb.size(); ++i) {
      vw[i] = hyper.momentum * vw[i] - hyper.learning_rate * gw[i];
      wb[i] += vw[i];
    }
    auto& vb = state.velocity[h].b;
    auto& bb = net.layers[h].b;
    const auto& gb = grads[h].b;
    for (size_t i = 0; i < bb.size(); ++i) {
      vb[i] = hyper.momentum * vb[i] - hyper.learning_rate * gb[i];
      bb[i] += vb[i];
    }
  }
}

void average_into_both(Network& twin1, Network& twin2) {
  for (size_t h = 0; h < twin1.layers.size(); ++h) {
    auto& w1 = twin1.layers[h].w.data();
    auto& w2 = twin2.layers[h].w.data();
    for (size_t i = 0; i < w1.size(); ++i) {
      const double avg = 0.5 * (w1[i] + w2[i]);
      w1[i] = avg;
      w2[i] = avg;
    }
    auto& b1 = twin1.layers[h].b;
    auto& b2 = twin2.layers[h].b;
    for (size_t i = 0; i < b1.size(); ++i) {
      const double avg = 0.5 * (b1[i] + b2[i]);
      b1[i] = avg;
      b2[i] = avg;
    }
  }
}

void average_states(MomentumState& s1, MomentumState& s2) {
  for (size_t h = 0; h < s1.velocity.size(); ++h) {
    auto& v1 = s1.velocity[h].w.data();
    auto& v2 = s2.velocity[h].w.data();
    for (size_t i = 0; i < v1.size(); ++i) {
      const double avg = 0.5 * (v1[i] + v2[i]);
      v1[i] = avg;
      v2[i] = avg;
    }
    auto& b1 = s1.velocity[h].b;
    auto& b2 = s2.velocity[h].b;
    for (size_t i = 0; i < b1.size(); ++i) {
      const double avg = 0.5 * (b1[i] + b2[i]);
      b1[i] = avg;
      b2[i] = avg;
    }
  }
}

/// Shared early-stopping bookkeeping over epochs.
struct EarlyStopper {
  explicit EarlyStopper(int patience) : patience(patience) {}

  // Returns true when training should stop.
  bool observe(double validation, const Network& net, int epoch) {
    if (validation > best + 1e-12) {
      best = validation;
      best_epoch = epoch;
      best_net = net;
      stale = 0;
      return false;
    }
    return ++stale >= patience;
  }

  int patience;
  int stale = 0;
  double best = -1.0;
  int best_epoch = -1;
  Network best_net;
};

}  // namespace

TrainOutcome train_prediction(const Network& init, const std::vector<NetInput>& data,
                              const HyperParams& hyper, uint64_t seed,
                              const ValidationFn& validation) {
  if (data.empty()) throw Error(ErrorCode::kValidation, "no training examples");
  hyper.validate();

  TrainOutcome outcome;
  outcome.network = init;
  Network& net = outcome.network;
  MomentumState momentum{zero_gradients(net)};
  Rng rng(seed);
  EarlyStopper stopper(hyper.patience);

  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    const Network epoch_start = net;
    rng.shuffle(order);
    double epoch_loss = 0.0;
    size_t batches = 0;
    bool finite = true;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(hyper.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(hyper.batch_size));
      std::vector<const NetInput*> batch;
      batch.reserve(end - start);
      for (size_t i = start; i < end; ++i) batch.push_back(&data[order[i]]);
      LossGrad lg;
      try {
        lg = prediction_loss_and_grad(net, batch, hyper);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kNumeric) {
          finite = false;
          break;
        }
        throw;
      }
      if (!std::isfinite(lg.loss)) {
        finite = false;
        break;
      }
      sgd_update(net, lg.grads, momentum, hyper);
      epoch_loss += lg.loss;
      ++batches;
    }
    if (!finite) {
      outcome.diverged = true;
      net = stopper.best_epoch >= 0 ? stopper.best_net : epoch_start;
      break;
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = batches > 0 ? epoch_loss / static_cast<double>(batches) : 0.0;
    if (validation) {
      log.validation_p2 = validation(net);
      outcome.history.push_back(log);
      if (stopper.observe(log.validation_p2, net, epoch)) break;
    } else {
      outcome.history.push_back(log);
    }
  }

  if (stopper.best_epoch >= 0) {
    outcome.network = stopper.best_net;
    outcome.best_epoch = stopper.best_epoch;
    outcome.best_validation = stopper.best;
  }
  return outcome;
}

TrainOutcome train_siamese(const Network& init, const std::vector<NetInput>& data,
                           const HyperParams& hyper, uint64_t seed,
                           const ValidationFn& validation,
                           const std::function<void(const Network&, const Network&)>&
                               after_update) {
  if (data.empty()) throw Error(ErrorCode::kValidation, "no training examples");
  hyper.validate();

  Network twin1 = init;
  Network twin2 = init;
  MomentumState momentum1{zero_gradients(twin1)};
  MomentumState momentum2{zero_gradients(twin2)};
  Rng rng(seed);
  EarlyStopper stopper(hyper.patience);

  TrainOutcome outcome;
  const size_t updates_per_epoch = std::max<size_t>(
      1, (data.size() + static_cast<size_t>(hyper.pair_batch_size) - 1) /
             static_cast<size_t>(hyper.pair_batch_size));

  for (int epoch = 1; epoch <= hyper.max_epochs; ++epoch) {
    const Network epoch_start = twin1;
    double epoch_loss = 0.0;
    bool finite = true;
    for (size_t update = 0; update < updates_per_epoch; ++update) {
      std::vector<const NetInput*> batch1;
      std::vector<const NetInput*> batch2;
      batch1.reserve(static_cast<size_t>(hyper.pair_batch_size));
      batch2.reserve(static_cast<size_t>(hyper.pair_batch_size));
      for (int i = 0; i < hyper.pair_batch_size; ++i) {
        batch1.push_back(&data[rng.uniform_int(data.size())]);
        batch2.push_back(&data[rng.uniform_int(data.size())]);
      }
      SiameseEval eval;
      try {
        eval = siamese_loss_and_grad(twin1, twin2, batch1, batch2, hyper);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kNumeric) {
          finite = false;
          break;
        }
        throw;
      }
      if (!std::isfinite(eval.total)) {
        finite = false;
        break;
      }
      sgd_update(twin1, eval.grad1, momentum1, hyper);
      sgd_update(twin2, eval.grad2, momentum2, hyper);
      average_into_both(twin1, twin2);
      average_states(momentum1, momentum2);
      if (after_update) after_update(twin1, twin2);
      epoch_loss += eval.total;
    }
    if (!finite) {
      outcome.diverged = true;
      twin1 = stopper.best_epoch >= 0 ? stopper.best_net : epoch_start;
      twin2 = twin1;
      break;
    }

    EpochLog log;
    log.epoch = epoch;
    log.train_loss = epoch_loss / static_cast<double>(updates_per_epoch);
    if (validation) {
      log.validation_p2 = validation(twin1);
      outcome.history.push_back(log);
      if (stopper.observe(log.validation_p2, twin1, epoch)) break;
    } else {
      outcome.history.push_back(log);
    }
  }

  outcome.network = stopper.best_epoch >= 0 ? stopper.best_net : twin1;
  outcome.best_epoch = stopper.best_epoch;
  outcome.best_validation = stopper.best;
  return outcome;
}

namespace {

Vector affine(const Layer& layer, const Vector& x, bool apply_tanh) {
  Vector out(static_cast<size_t>(layer.w.rows()));
  for (int i = 0; i < layer.w.rows(); ++i) {
    const double* row = layer.w.row(i);
    double a = layer.b[static_cast<size_t>(i)];
    for (int j = 0; j < layer.w.cols(); ++j) a += row[j] * x[static_cast<size_t>(j)];
    out[static_cast<size_t>(i)] = apply_tanh ? std::tanh(a) : a;
  }
  return out;
}

}  // namespace

Vector Autoencoder::encode(const Vector& x) const { return affine(encoder, x, true); }

Vector Autoencoder::reconstruct(const Vector& x) const {
  return affine(decoder, encode(x), false);
}

Autoencoder train_autoencoder(const std::vector<Vector>& inputs, int hidden_size,
                              const HyperParams& hyper, Rng& rng) {
  if (inputs.empty()) throw Error(ErrorCode::kInvalidArgument, "no autoencoder inputs");
  const int in = static_cast<int>(inputs.front().size());
  const int out = hidden_size;

  Autoencoder ae;
  ae.encoder.w = Matrix(out, in);
  ae.encoder.b.assign(static_cast<size_t>(out), 0.0);
  const double re = 1.0 / std::sqrt(static_cast<double>(in));
  for (double& v : ae.encoder.w.data()) v = (2.0 * rng.uniform01() - 1.0) * re;
  ae.decoder.w = Matrix(in, out);
  ae.decoder.b.assign(static_cast<size_t>(in), 0.0);
  const double rd = 1.0 / std::sqrt(static_cast<double>(out));
  for (double& v : ae.decoder.w.data()) v = (2.0 * rng.uniform01() - 1.0) * rd;

  MomentumState enc_state{{LayerGrad{Matrix(out, in, 0.0), Vector(static_cast<size_t>(out), 0.0)}}};
  MomentumState dec_state{{LayerGrad{Matrix(in, out, 0.0), Vector(static_cast<size_t>(in), 0.0)}}};

  std::vector<size_t> order(inputs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < hyper.pretrain_epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(hyper.batch_size)) {
      const size_t end =
          std::min(order.size(), start + static_cast<size_t>(hyper.batch_size));
      const double inv_batch = 1.0 / static_cast<double>(end - start);

      Gradients enc_grad{LayerGrad{Matrix(out, in, 0.0), Vector(static_cast<size_t>(out), 0.0)}};
      Gradients dec_grad{LayerGrad{Matrix(in, out, 0.0), Vector(static_cast<size_t>(in), 0.0)}};

      for (size_t i = start; i < end; ++i) {
        const Vector& x = inputs[order[i]];
        const Vector z = affine(ae.encoder, x, true);
        const Vector xhat = affine(ae.decoder, z, false);

        // Squared error + L1 activity penalty.
        Vector dxhat(static_cast<size_t>(in));
        for (int j = 0; j < in; ++j) {
          dxhat[static_cast<size_t>(j)] =
              (xhat[static_cast<size_t>(j)] - x[static_cast<size_t>(j)]) * inv_batch;
        }
        for (int j = 0; j < in; ++j) {
          const double d = dxhat[static_cast<size_t>(j)];
          double* grow = dec_grad[0].w.row(j);
          for (int u = 0; u < out; ++u) grow[u] += d * z[static_cast<size_t>(u)];
          dec_grad[0].b[static_cast<size_t>(j)] += d;
        }
        Vector dz(static_cast<size_t>(out), 0.0);
        for (int j = 0; j < in; ++j) {
          const double d = dxhat[static_cast<size_t>(j)];
          const double* row = ae.decoder.w.row(j);
          for (int u = 0; u < out; ++u) dz[static_cast<size_t>(u)] += row[u] * d;
        }
        for (int u = 0; u < out; ++u) {
          const double zu = z[static_cast<size_t>(u)];
          dz[static_cast<size_t>(u)] += hyper.sparsity_weight * inv_batch *
                                        (zu > 0.0 ? 1.0 : (zu < 0.0 ? -1.0 : 0.0));
          const double delta = dz[static_cast<size_t>(u)] * (1.0 - zu * zu);
          double* grow = enc_grad[0].w.row(u);
          for (int j = 0; j < in; ++j) grow[j] += delta * x[static_cast<size_t>(j)];
          enc_grad[0].b[static_cast<size_t>(u)] += delta;
        }
      }

      Network enc_view{{ae.encoder}};
      sgd_update(enc_view, enc_grad, enc_state, hyper);
      ae.encoder = enc_view.layers[0];
      Network dec_view{{ae.decoder}};
      sgd_update(dec_view, dec_grad, dec_state, hyper);
      ae.decoder = dec_view.layers[0];
    }
  }
  return ae;
}

Network pretrain_autoencoders(int input_size, const std::vector<int>& hidden_sizes,
                              int output_size, const std::vector<Vector>& inputs,
                              const HyperParams& hyper, uint64_t seed) {
  Rng rng(seed);
  Network net = make_network(input_size, hidden_sizes, output_size, rng);
  if (hyper.pretrain_epochs <= 0 || inputs.empty()) return net;

  std::vector<Vector> current = inputs;
  for (size_t h = 0; h + 1 < net.layers.size(); ++h) {
    const int out = net.layers[h].w.rows();
    const Autoencoder ae = train_autoencoder(current, out, hyper, rng);
    net.layers[h] = ae.encoder;

    std::vector<Vector> next;
    next.reserve(current.size());
    for (const Vector& x : current) next.push_back(ae.encode(x));
    current = std::move(next);
  }
  return net;
}

}  // namespace tagsem
