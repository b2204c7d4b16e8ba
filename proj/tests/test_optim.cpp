#include <gtest/gtest.h>

#include <cmath>

#include "evload/optim.hpp"

using namespace evload;
using namespace evload::optim;

namespace {

model::FeatureVector features(std::size_t category, double z = 0.0) {
  return model::FeatureVector::from_parts(category, {z, -z, 0.5 * z});
}

Dataset small_dataset(std::size_t n) {
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.features = features(i % kCategoryCount, 0.1 * static_cast<double>(i));
    s.target.assign(24, 0.0);
    s.target[(3 * i) % 24] = 2.0;
    s.target[(3 * i + 1) % 24] = 1.0;
    s.charger_id = "C" + std::to_string(i);
    s.bucket = "all";
    d.push_back(s);
  }
  return d;
}

}  // namespace

TEST(TrainConfig, DefaultHyperparameters) {
  const TrainConfig c;
  EXPECT_EQ(c.granularity, 24u);
  EXPECT_EQ(c.hidden_f, 128u);
  EXPECT_EQ(c.hidden_g, 64u);
  EXPECT_EQ(c.k, 4u);
  EXPECT_EQ(c.learning_rate, 0.0004);
  EXPECT_EQ(c.epochs, 150u);
  EXPECT_EQ(c.beta1, 0.9);
  EXPECT_EQ(c.beta2, 0.999);
  EXPECT_EQ(c.epsilon, 1e-8);
}

TEST(TrainConfig, JsonRoundTripAndValidation) {
  TrainConfig c;
  c.seed = 9;
  c.batch_size = 16;
  c.epochs = 3;
  const auto back = train_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(train_config_from_json({{"learning_rat", 0.1}}), Error);
  EXPECT_THROW(train_config_from_json({{"learning_rate", -1.0}}), Error);
  EXPECT_THROW(train_config_from_json({{"epochs", 0}}), Error);
}

// Oracle: the Adam recurrences evaluated by hand for a scalar.
TEST(AdamUpdate, FirstStepHandValue) {
  std::vector<double> theta{0.0}, g{2.0}, m{0.0}, v{0.0};
  const AdamHyper h;
  adam_update(theta, g, m, v, 1, h);
  EXPECT_DOUBLE_EQ(m[0], 0.2);
  EXPECT_NEAR(v[0], 0.004, 1e-15);
  EXPECT_NEAR(theta[0], -0.0004 * 2.0 / (2.0 + 1e-8), 1e-18);
  EXPECT_NEAR(theta[0], -0.0004, 1e-11);
}

TEST(AdamUpdate, SecondStepNoLargerThanFirst) {
  std::vector<double> theta{0.0}, g{2.0}, m{0.0}, v{0.0};
  const AdamHyper h;
  adam_update(theta, g, m, v, 1, h);
  const double first = std::abs(theta[0]);
  const double before = theta[0];
  adam_update(theta, g, m, v, 2, h);
  EXPECT_LE(std::abs(theta[0] - before), first + 1e-12);
}

TEST(AdamStep, ZeroGradientsLeaveParamsUnchanged) {
  auto p = model::initialize({}, 3);
  const auto before = p;
  model::Gradients g(p.shape());
  AdamState state(p.shape());
  adam_step(p, g, state, AdamHyper{});
  EXPECT_TRUE(p == before);
  EXPECT_EQ(state.t, 1u);
}

TEST(AdamStep, RejectsShapeMismatchAndNonFinite) {
  auto p = model::initialize({}, 3);
  AdamState state(p.shape());
  model::Gradients wrong(model::ModelShape{kFeatureDim, 8, 8, 4, 24});
  try {
    adam_step(p, wrong, state, AdamHyper{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Dimension);
  }
  model::Gradients g(p.shape());
  g.latent.logits()(1, 1) = std::nan("");
  try {
    adam_step(p, g, state, AdamHyper{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Numeric);
  }
}

TEST(Train, SingleReachableSampleDescends) {
  auto data = small_dataset(1);
  TrainConfig c;
  c.epochs = 200;
  c.learning_rate = 0.01;
  const auto r = train(data, c);
  ASSERT_EQ(r.loss_trace.size(), 200u);
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front());
  EXPECT_LT(r.loss_trace.back(), 0.5 * r.loss_trace.front());
}

TEST(Train, DeterministicGivenSeed) {
  const auto data = small_dataset(20);
  TrainConfig c;
  c.epochs = 5;
  c.batch_size = 4;
  c.seed = 5;
  const auto a = train(data, c), b = train(data, c);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
  EXPECT_TRUE(a.params == b.params);
  c.seed = 6;
  EXPECT_NE(train(data, c).loss_trace, a.loss_trace);
}

TEST(Train, FullBatchWhenBatchSizeZero) {
  const auto data = small_dataset(6);
  TrainConfig c;
  c.epochs = 3;
  c.batch_size = 0;
  const auto a = train(data, c);
  c.batch_size = 100;  // larger than the dataset is also one step per epoch
  const auto b = train(data, c);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
}

TEST(Train, EpochCallbackSeesEveryEpoch) {
  TrainConfig c;
  c.epochs = 4;
  std::vector<std::size_t> seen;
  train(small_dataset(3), c, [&](std::size_t e, double loss) {
    seen.push_back(e);
    EXPECT_TRUE(std::isfinite(loss));
  });
  EXPECT_EQ(seen, (std::vector<std::size_t>{1, 2, 3, 4}));
}

TEST(Train, Errors) {
  TrainConfig c;
  EXPECT_THROW(train({}, c), Error);
  auto data = small_dataset(2);
  data[1].target.resize(23);
  try {
    train(data, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Dimension);
  }
  data = small_dataset(2);
  data[0].target[0] = 1e300;
  c.epochs = 2;
  try {
    train(data, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Numeric);
  }
}

TEST(GradCheck, CorrectGradientsPass) {
  auto p = model::initialize({}, 41);
  for (auto& b : p.f_output.bias) b = 0.3;
  std::vector<double> target(24, 0.02);
  const auto r = grad_check(p, features(4, 0.7), target);
  EXPECT_LE(r.max_relative_error, 1e-4);
}

TEST(GradCheck, InjectedFaultIsDetected) {
  const auto p = model::initialize({}, 42);
  std::vector<double> target(24, 0.02);
  const auto r = grad_check(p, features(2, -0.3), target, 1e-5, 2.0);
  EXPECT_GE(r.max_relative_error, 0.3);
}

TEST(GradCheck, ExactFitHasNegligibleError) {
  const auto p = model::initialize(model::ModelShape{kFeatureDim, 6, 5, 4, 24}, 43);
  const auto x = features(1, 0.2);
  const auto target = model::forward(p, x).load;
  const auto analytic = model::backward(p, x, target);
  for (auto t : analytic.tensors())
    for (double v : t) EXPECT_EQ(v, 0.0);
  const auto r = grad_check(p, x, target);
  EXPECT_LE(std::abs(r.worst_analytic - r.worst_numeric), 1e-6);
}
