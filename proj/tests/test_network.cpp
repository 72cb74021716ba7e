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

#include <doctest.h>

#include <cmath>
#include <cstring>

#include "error.hpp"
#include "network.hpp"
#include "rng.hpp"
#include "topics.hpp"

using namespace tagsem;

namespace {

std::vector<double*> parameter_view(Network& net) {
  std::vector<double*> params;
  for (auto& layer : net.layers) {
    for (auto& v : layer.w.data()) params.push_back(&v);
    for (auto& v : layer.b) params.push_back(&v);
  }
  return params;
}

Vector flatten(const Gradients& grads) {
  Vector flat;
  for (const auto& layer : grads) {
    flat.insert(flat.end(), layer.w.data().begin(), layer.w.data().end());
    flat.insert(flat.end(), layer.b.begin(), layer.b.end());
  }
  return flat;
}

NetInput random_example(int input_size, int output_size, int context_dim, Rng& rng) {
  NetInput ex;
  ex.x.resize(static_cast<size_t>(input_size));
  for (auto& v : ex.x) v = 2.0 * rng.uniform01() - 1.0;
  ex.target.resize(static_cast<size_t>(output_size));
  int positives = 0;
  for (auto& v : ex.target) {
    v = rng.uniform01() < 0.4 ? 1.0 : -1.0;
    if (v > 0.0) ++positives;
  }
  ex.kappa = static_cast<double>(positives) / output_size;
  ex.positive = rng.uniform01() < 0.5;
  ex.context = rng.dirichlet(0.8, context_dim);
  return ex;
}

std::vector<const NetInput*> batch_view(const std::vector<NetInput>& data, size_t begin,
                                        size_t end) {
  std::vector<const NetInput*> view;
  for (size_t i = begin; i < end && i < data.size(); ++i) view.push_back(&data[i]);
  return view;
}

bool bitwise_equal(const Network& a, const Network& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (size_t h = 0; h < a.layers.size(); ++h) {
    const auto& wa = a.layers[h].w.data();
    const auto& wb = b.layers[h].w.data();
    if (wa.size() != wb.size()) return false;
    if (std::memcmp(wa.data(), wb.data(), wa.size() * sizeof(double)) != 0) return false;
    if (a.layers[h].b.size() != b.layers[h].b.size()) return false;
    if (std::memcmp(a.layers[h].b.data(), b.layers[h].b.data(),
                    a.layers[h].b.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

}  // namespace

TEST_SUITE_BEGIN("network");

TEST_CASE("forward with zero parameters produces zero activations") {
  Network net;
  net.layers.push_back({Matrix(3, 4, 0.0), Vector(3, 0.0)});
  net.layers.push_back({Matrix(2, 3, 0.0), Vector(2, 0.0)});
  const auto acts = net.forward({0.3, -0.2, 0.9, 0.1});
  for (size_t h = 1; h < acts.size(); ++h) {
    for (const double v : acts[h]) CHECK(v == 0.0);
  }
}

TEST_CASE("forward matches the scalar tanh oracle") {
  Network net;
  net.layers.push_back({Matrix(1, 1, 1.0), Vector(1, 0.0)});
  const auto acts = net.forward({0.5});
  CHECK(acts[1][0] == doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
  CHECK(acts[1][0] == doctest::Approx(0.4621).epsilon(1e-3));
}

TEST_CASE("forward rejects width mismatches") {
  Rng rng(3);
  Network net = make_network(4, {3}, 2, rng);
  CHECK_THROWS_AS(net.forward({1.0, 2.0}), Error);
}

TEST_CASE("activations stay strictly inside (-1, 1)") {
  Rng rng(11);
  Network net = make_network(6, {5, 4}, 3, rng);
  for (int trial = 0; trial < 50; ++trial) {
    Vector x(6);
    for (auto& v : x) v = 20.0 * (rng.uniform01() - 0.5);
    const auto acts = net.forward(x);
    for (size_t h = 1; h < acts.size(); ++h) {
      for (const double v : acts[h]) {
        CHECK(v > -1.0);
        CHECK(v < 1.0);
      }
    }
  }
}

TEST_CASE("make_training_examples encodes targets and kappa per the contract") {
  Rng rng(5);
  auto context = std::make_shared<const Vector>(Vector{0.5, 0.5});

  // Document {a} over a two-tag vocabulary: indices {0} of 2.
  const auto examples = make_training_examples({0}, "d1", context, 2, rng);
  REQUIRE(examples.size() == 2);
  CHECK(examples[0].positive);
  CHECK(examples[0].tag_index == 0);
  CHECK(example_target(examples[0], 2) == Vector{1.0, -1.0});
  CHECK(examples[0].kappa == 0.5);
  CHECK_FALSE(examples[1].positive);
  CHECK(examples[1].tag_index == 1);  // the only tag outside the document
  CHECK(example_target(examples[1], 2) == Vector{-1.0, 1.0});
  CHECK(examples[1].kappa == 0.5);
}

TEST_CASE("a 25-tag document over 158 tags yields 50 examples with the paper's kappa") {
  Rng rng(7);
  auto context = std::make_shared<const Vector>(Vector{1.0});
  std::vector<int> doc_tags;
  for (int i = 0; i < 25; ++i) doc_tags.push_back(i * 3);
  const auto examples = make_training_examples(doc_tags, "d", context, 158, rng);
  REQUIRE(examples.size() == 50);
  for (size_t i = 0; i < 25; ++i) {
    CHECK(examples[i].positive);
    CHECK(examples[i].kappa == doctest::Approx(25.0 / 158.0).epsilon(1e-15));
    const Vector target = example_target(examples[i], 158);
    int positives = 0;
    for (const double v : target) positives += v > 0.0 ? 1 : 0;
    CHECK(positives == 25);
  }
  for (size_t i = 25; i < 50; ++i) {
    CHECK_FALSE(examples[i].positive);
    CHECK(examples[i].kappa == doctest::Approx(133.0 / 158.0).epsilon(1e-15));
    const Vector target = example_target(examples[i], 158);
    int positives = 0;
    for (const double v : target) positives += v > 0.0 ? 1 : 0;
    CHECK(positives == 133);
  }

  // Negative focus tags are distinct and outside the document.
  for (size_t i = 25; i < 50; ++i) {
    CHECK(std::find(doc_tags.begin(), doc_tags.end(), examples[i].tag_index) == doc_tags.end());
    for (size_t j = i + 1; j < 50; ++j) CHECK(examples[i].tag_index != examples[j].tag_index);
  }
}

TEST_CASE("negative draws are deterministic given the seed") {
  auto context = std::make_shared<const Vector>(Vector{1.0});
  Rng rng_a(99);
  Rng rng_b(99);
  const auto a = make_training_examples({0, 2, 4}, "d", context, 20, rng_a);
  const auto b = make_training_examples({0, 2, 4}, "d", context, 20, rng_b);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].tag_index == b[i].tag_index);
}

TEST_CASE("documents covering the whole vocabulary cannot synthesize negatives") {
  auto context = std::make_shared<const Vector>(Vector{1.0});
  Rng rng(1);
  CHECK_THROWS_AS(make_training_examples({0, 1, 2}, "d", context, 3, rng), Error);

  // Fewer outside tags than document tags: draw as many as available.
  Rng rng2(1);
  const auto examples = make_training_examples({0, 1, 2}, "d", context, 4, rng2);
  CHECK(examples.size() == 4);  // 3 positives + 1 available negative
}

TEST_CASE("prediction loss reproduces the hand-computed value") {
  // One layer producing exactly (0.5, -0.5) for a zero input.
  Network net;
  net.layers.push_back(
      {Matrix(2, 2, 0.0), Vector{std::atanh(0.5), std::atanh(-0.5)}});
  NetInput ex;
  ex.x = {0.0, 0.0};
  ex.target = {1.0, -1.0};
  ex.kappa = 0.5;
  HyperParams hyper;

  const double loss = prediction_loss(net, {&ex}, hyper);
  CHECK(loss == doctest::Approx(-0.5 * std::log(1.5)).epsilon(1e-12));
  CHECK(loss == doctest::Approx(-0.2027).epsilon(1e-3));
}

TEST_CASE("zero outputs contribute zero loss") {
  Network net;
  net.layers.push_back({Matrix(2, 2, 0.0), Vector(2, 0.0)});
  NetInput ex;
  ex.x = {0.0, 0.0};
  ex.target = {1.0, -1.0};
  ex.kappa = 0.5;
  HyperParams hyper;
  CHECK(prediction_loss(net, {&ex}, hyper) == 0.0);
}

TEST_CASE("non-finite activations raise a numeric error naming the layer") {
  Network net;
  net.layers.push_back({Matrix(2, 2, 0.0), Vector(2, 0.0)});
  net.layers.push_back({Matrix(2, 2, 0.0), Vector(2, 0.0)});
  net.layers[0].w(0, 0) = std::numeric_limits<double>::quiet_NaN();
  NetInput ex;
  ex.x = {1.0, 1.0};
  ex.target = {1.0, -1.0};
  ex.kappa = 0.5;
  HyperParams hyper;
  CHECK_THROWS_WITH_AS(prediction_loss_and_grad(net, {&ex}, hyper),
                       doctest::Contains("layer 1"), Error);
}

TEST_CASE("analytic Eq.3 gradients match central finite differences") {
  Rng rng(2024);
  Network net = make_network(8, {5, 4, 3}, 8, rng);
  HyperParams hyper;
  const double h = 1e-5;

  double max_rel = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<NetInput> data;
    for (int i = 0; i < 4; ++i) data.push_back(random_example(8, 8, 3, rng));
    const auto batch = batch_view(data, 0, data.size());

    const LossGrad analytic = prediction_loss_and_grad(net, batch, hyper);
    const Vector flat = flatten(analytic.grads);
    auto params = parameter_view(net);
    REQUIRE(params.size() == flat.size());

    for (size_t p = 0; p < params.size(); ++p) {
      const double saved = *params[p];
      *params[p] = saved + h;
      const double plus = prediction_loss(net, batch, hyper);
      *params[p] = saved - h;
      const double minus = prediction_loss(net, batch, hyper);
      *params[p] = saved;
      const double fd = (plus - minus) / (2.0 * h);
      max_rel = std::max(max_rel, relative_error(fd, flat[p]));
    }
  }
  CHECK(max_rel < 1e-4);
}

TEST_CASE("pair term worked examples") {
  HyperParams hyper;   // lambda 0.5, beta 3, rho 0.5

  // Mixed pair at the spread scale costs nothing.
  CHECK(pair_term(3.0, 0.7, true, false, hyper) == 0.0);

  // Both positive with identical contexts: target distance 0.
  CHECK(pair_term(1.2, 1.0, true, true, hyper) == doctest::Approx(1.44).epsilon(1e-12));

  // Both negative, similarity from the sym_kl worked example.
  const double s = std::exp(-hyper.lambda * sym_kl({0.5, 0.5}, {0.25, 0.75}));
  CHECK(s == doctest::Approx(0.8717).epsilon(1e-3));
  const double target = hyper.beta * (1.0 - s);
  const double expected = hyper.rho * (1.0 - target) * (1.0 - target);
  CHECK(expected == doctest::Approx(0.1892).epsilon(1e-3));
  CHECK(pair_term(1.0, s, false, false, hyper) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("pair term is non-negative and similarity lies in (0, 1]") {
  Rng rng(55);
  HyperParams hyper;
  for (int trial = 0; trial < 500; ++trial) {
    const double e = 5.0 * rng.uniform01();
    const Vector c1 = rng.dirichlet(0.5, 4);
    const Vector c2 = rng.uniform01() < 0.2 ? c1 : rng.dirichlet(0.5, 4);
    const double s = context_similarity(c1, c2, hyper.lambda);
    CHECK(s > 0.0);
    CHECK(s <= 1.0);
    if (c1 == c2) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    for (const bool p1 : {false, true}) {
      for (const bool p2 : {false, true}) {
        CHECK(pair_term(e, s, p1, p2, hyper) >= 0.0);
      }
    }
  }
}

TEST_CASE("embedding distance is a metric on CE vectors") {
  Rng rng(77);
  Network net = make_network(6, {5, 3}, 4, rng);
  const auto ce_of = [&](const Vector& x) {
    const auto acts = net.forward(x);
    return acts[acts.size() - 2];
  };
  const auto dist = [](const Vector& a, const Vector& b) {
    double d2 = 0.0;
    for (size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(d2);
  };
  for (int trial = 0; trial < 200; ++trial) {
    Vector x(6), y(6), z(6);
    for (auto& v : x) v = 2.0 * rng.uniform01() - 1.0;
    for (auto& v : y) v = 2.0 * rng.uniform01() - 1.0;
    for (auto& v : z) v = 2.0 * rng.uniform01() - 1.0;
    const Vector cx = ce_of(x), cy = ce_of(y), cz = ce_of(z);
    CHECK(dist(cx, cy) >= 0.0);
    CHECK(dist(cx, cy) == doctest::Approx(dist(cy, cx)).epsilon(1e-15));
    CHECK(dist(cx, cz) <= dist(cx, cy) + dist(cy, cz) + 1e-12);
    CHECK(dist(cx, cx) == 0.0);
  }
}

TEST_CASE("analytic Eq.5 gradients match central finite differences") {
  Rng rng(4096);
  Network net = make_network(8, {5, 4, 3}, 8, rng);
  HyperParams hyper;
  const double h = 1e-5;

  double max_rel = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<NetInput> data1;
    std::vector<NetInput> data2;
    for (int i = 0; i < 3; ++i) {
      data1.push_back(random_example(8, 8, 3, rng));
      data2.push_back(random_example(8, 8, 3, rng));
    }
    const auto batch1 = batch_view(data1, 0, data1.size());
    const auto batch2 = batch_view(data2, 0, data2.size());

    // Shared parameters: the gradient is the sum over both twin roles.
    const SiameseEval eval = siamese_loss_and_grad(net, net, batch1, batch2, hyper);
    const Vector flat1 = flatten(eval.grad1);
    const Vector flat2 = flatten(eval.grad2);
    auto params = parameter_view(net);

    for (size_t p = 0; p < params.size(); ++p) {
      const double saved = *params[p];
      *params[p] = saved + h;
      const double plus = siamese_loss_and_grad(net, net, batch1, batch2, hyper).total;
      *params[p] = saved - h;
      const double minus = siamese_loss_and_grad(net, net, batch1, batch2, hyper).total;
      *params[p] = saved;
      const double fd = (plus - minus) / (2.0 * h);
      max_rel = std::max(max_rel, relative_error(fd, flat1[p] + flat2[p]));
    }
  }
  CHECK(max_rel < 1e-4);
}

TEST_CASE("alpha = 0 degenerates Eq.5 to pure prediction training on paired batches") {
  Rng rng(31);
  Network net = make_network(6, {4, 3}, 5, rng);
  HyperParams hyper;
  hyper.alpha = 0.0;

  std::vector<NetInput> data1, data2;
  for (int i = 0; i < 4; ++i) {
    data1.push_back(random_example(6, 5, 2, rng));
    data2.push_back(random_example(6, 5, 2, rng));
  }
  const auto batch1 = batch_view(data1, 0, data1.size());
  const auto batch2 = batch_view(data2, 0, data2.size());

  const SiameseEval eval = siamese_loss_and_grad(net, net, batch1, batch2, hyper);
  CHECK(eval.total == doctest::Approx(eval.prediction1 + eval.prediction2).epsilon(1e-15));

  const LossGrad pure1 = prediction_loss_and_grad(net, batch1, hyper);
  const LossGrad pure2 = prediction_loss_and_grad(net, batch2, hyper);
  const Vector eval_flat1 = flatten(eval.grad1);
  const Vector pure_flat1 = flatten(pure1.grads);
  const Vector eval_flat2 = flatten(eval.grad2);
  const Vector pure_flat2 = flatten(pure2.grads);
  for (size_t p = 0; p < eval_flat1.size(); ++p) {
    CHECK(eval_flat1[p] == doctest::Approx(pure_flat1[p]).epsilon(1e-12));
    CHECK(eval_flat2[p] == doctest::Approx(pure_flat2[p]).epsilon(1e-12));
  }
}

TEST_CASE("twins are bit-identical after every siamese update") {
  Rng rng(8);
  Network init = make_network(6, {4, 3}, 5, rng);
  std::vector<NetInput> data;
  for (int i = 0; i < 40; ++i) data.push_back(random_example(6, 5, 2, rng));

  HyperParams hyper;
  hyper.pair_batch_size = 8;
  hyper.max_epochs = 2;

  int updates = 0;
  const auto outcome = train_siamese(init, data, hyper, 7, nullptr,
                                     [&](const Network& twin1, const Network& twin2) {
                                       ++updates;
                                       REQUIRE(bitwise_equal(twin1, twin2));
                                     });
  CHECK(updates == 10);  // ceil(40/8) updates per epoch, 2 epochs
  CHECK_FALSE(outcome.diverged);
}

TEST_CASE("training stages are deterministic given seeds") {
  Rng rng(12);
  Network init = make_network(5, {4, 3}, 4, rng);
  std::vector<NetInput> data;
  for (int i = 0; i < 30; ++i) data.push_back(random_example(5, 4, 2, rng));

  HyperParams hyper;
  hyper.max_epochs = 3;
  hyper.batch_size = 8;
  hyper.pair_batch_size = 8;

  const auto a = train_prediction(init, data, hyper, 5, nullptr);
  const auto b = train_prediction(init, data, hyper, 5, nullptr);
  CHECK(bitwise_equal(a.network, b.network));

  const auto c = train_siamese(init, data, hyper, 5, nullptr);
  const auto d = train_siamese(init, data, hyper, 5, nullptr);
  CHECK(bitwise_equal(c.network, d.network));
}

TEST_CASE("early stopping restores the best validation checkpoint") {
  Rng rng(21);
  Network init = make_network(5, {3}, 4, rng);
  std::vector<NetInput> data;
  for (int i = 0; i < 24; ++i) data.push_back(random_example(5, 4, 2, rng));

  HyperParams hyper;
  hyper.max_epochs = 50;
  hyper.patience = 3;

  // A validation score that peaks at epoch 4 and declines afterwards.
  int epoch_counter = 0;
  Network snapshot;
  const ValidationFn validation = [&](const Network& net) {
    ++epoch_counter;
    if (epoch_counter == 4) snapshot = net;
    return epoch_counter <= 4 ? 0.1 * epoch_counter : 0.05;
  };
  const auto outcome = train_prediction(init, data, hyper, 9, validation);
  CHECK(outcome.best_epoch == 4);
  CHECK(outcome.best_validation == doctest::Approx(0.4));
  CHECK(outcome.history.size() == 7);  // stopped after patience ran out
  CHECK(bitwise_equal(outcome.network, snapshot));
}

TEST_CASE("divergent training aborts with a finite checkpoint") {
  Rng rng(33);
  Network init = make_network(5, {4}, 4, rng);
  std::vector<NetInput> data;
  for (int i = 0; i < 16; ++i) data.push_back(random_example(5, 4, 2, rng));

  // An infinite step drives the weights to +-inf, so the next forward pass
  // produces NaN from mixed-sign infinite sums.
  HyperParams hyper;
  hyper.learning_rate = std::numeric_limits<double>::infinity();
  hyper.batch_size = 8;
  hyper.max_epochs = 5;

  const auto outcome = train_prediction(init, data, hyper, 3, nullptr);
  CHECK(outcome.diverged);
  for (const auto& layer : outcome.network.layers) {
    for (const double v : layer.w.data()) CHECK(std::isfinite(v));
    for (const double v : layer.b) CHECK(std::isfinite(v));
  }
}

TEST_CASE("autoencoder beats the mean predictor on rank-1 inputs") {
  Rng rng(64);
  Vector direction(8);
  for (auto& v : direction) v = 2.0 * rng.uniform01() - 1.0;
  std::vector<Vector> inputs;
  for (int i = 0; i < 100; ++i) {
    const double t = 2.0 * rng.uniform01() - 1.0;
    Vector x(8);
    for (size_t j = 0; j < 8; ++j) x[j] = t * direction[j];
    inputs.push_back(std::move(x));
  }

  HyperParams hyper;
  hyper.pretrain_epochs = 60;
  hyper.batch_size = 10;
  Rng train_rng(5);
  const Autoencoder ae = train_autoencoder(inputs, 3, hyper, train_rng);

  // Mean-predictor baseline: predict the per-coordinate mean of the inputs.
  Vector mean(8, 0.0);
  for (const auto& x : inputs) {
    for (size_t j = 0; j < 8; ++j) mean[j] += x[j];
  }
  for (auto& v : mean) v /= static_cast<double>(inputs.size());

  double mse_model = 0.0;
  double mse_mean = 0.0;
  for (const auto& x : inputs) {
    const Vector xhat = ae.reconstruct(x);
    for (size_t j = 0; j < 8; ++j) {
      mse_model += (xhat[j] - x[j]) * (xhat[j] - x[j]);
      mse_mean += (mean[j] - x[j]) * (mean[j] - x[j]);
    }
  }
  CHECK(mse_model < mse_mean);
}

TEST_CASE("zero pretraining epochs keeps the seeded initialization") {
  HyperParams hyper;
  hyper.pretrain_epochs = 0;
  std::vector<Vector> inputs(4, Vector(6, 0.5));
  const Network pretrained = pretrain_autoencoders(6, {4, 3}, 5, inputs, hyper, 42);
  Rng rng(42);
  const Network raw = make_network(6, {4, 3}, 5, rng);
  CHECK(bitwise_equal(pretrained, raw));
}

TEST_CASE("pretraining is deterministic given seed and data") {
  HyperParams hyper;
  hyper.pretrain_epochs = 5;
  Rng data_rng(9);
  std::vector<Vector> inputs;
  for (int i = 0; i < 30; ++i) {
    Vector x(6);
    for (auto& v : x) v = 2.0 * data_rng.uniform01() - 1.0;
    inputs.push_back(std::move(x));
  }
  const Network a = pretrain_autoencoders(6, {4, 3}, 5, inputs, hyper, 11);
  const Network b = pretrain_autoencoders(6, {4, 3}, 5, inputs, hyper, 11);
  CHECK(bitwise_equal(a, b));
}

TEST_CASE("hyperparameter invariants are enforced") {
  HyperParams hyper;
  CHECK_NOTHROW(hyper.validate());
  hyper.rho = 1.0;
  CHECK_THROWS_AS(hyper.validate(), Error);
  hyper = HyperParams{};
  hyper.lambda = 0.0;
  CHECK_THROWS_AS(hyper.validate(), Error);
  hyper = HyperParams{};
  hyper.output_clamp = 0.5;
  CHECK_THROWS_AS(hyper.validate(), Error);
  hyper = HyperParams{};
  hyper.alpha = -0.1;
  CHECK_THROWS_AS(hyper.validate(), Error);
}

TEST_SUITE_END();
