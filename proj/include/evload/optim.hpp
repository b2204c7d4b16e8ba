#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "evload/dataset.hpp"
#include "evload/error.hpp"
#include "evload/model.hpp"
#include "evload/rng.hpp"

namespace evload::optim {

struct TrainConfig {
  std::size_t granularity = 24;
  std::size_t hidden_f = 128;
  std::size_t hidden_g = 64;
  std::size_t k = 4;
  double learning_rate = 0.0004;
  std::size_t epochs = 150;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  /// Samples per Adam step; 0 means full batch.
  std::size_t batch_size = 0;

  model::ModelShape model_shape() const {
    return {kFeatureDim, hidden_f, hidden_g, k, granularity};
  }

  void validate() const {
    require(learning_rate > 0.0 && std::isfinite(learning_rate), ErrorKind::Input,
            "learning_rate must be > 0");
    require(epochs >= 1, ErrorKind::Input, "epochs must be >= 1");
    require(k >= 1, ErrorKind::Input, "k must be >= 1");
    require(granularity >= 1, ErrorKind::Input, "granularity must be >= 1");
    require(hidden_f >= 1 && hidden_g >= 1, ErrorKind::Input,
            "hidden sizes must be >= 1");
    require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
            ErrorKind::Input, "Adam betas must lie in [0, 1)");
    require(epsilon > 0.0, ErrorKind::Input, "epsilon must be > 0");
  }
};

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"granularity", c.granularity}, {"hidden_f", c.hidden_f},
          {"hidden_g", c.hidden_g},       {"k", c.k},
          {"learning_rate", c.learning_rate}, {"epochs", c.epochs},
          {"beta1", c.beta1},             {"beta2", c.beta2},
          {"epsilon", c.epsilon},         {"seed", c.seed},
          {"batch_size", c.batch_size}};
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorKind::Format, "train config must be a JSON object");
  TrainConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "granularity") c.granularity = value.get<std::size_t>();
      else if (key == "hidden_f") c.hidden_f = value.get<std::size_t>();
      else if (key == "hidden_g") c.hidden_g = value.get<std::size_t>();
      else if (key == "k") c.k = value.get<std::size_t>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "epochs") c.epochs = value.get<std::size_t>();
      else if (key == "beta1") c.beta1 = value.get<double>();
      else if (key == "beta2") c.beta2 = value.get<double>();
      else if (key == "epsilon") c.epsilon = value.get<double>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "bucket") continue;  // consumed by the dataset builder
      else fail(ErrorKind::Input, "unknown train config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Adam

struct AdamHyper {
  double learning_rate = 0.0004;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamHyper from(const TrainConfig& c) {
    return {c.learning_rate, c.beta1, c.beta2, c.epsilon};
  }
};

/// One Adam update on flat buffers. `t` is the 1-based step index.
inline void adam_update(std::span<double> params, std::span<const double> grads,
                        std::span<double> m, std::span<double> v, std::uint64_t t,
                        const AdamHyper& h) {
  require(grads.size() == params.size() && m.size() == params.size() &&
              v.size() == params.size(),
          ErrorKind::Dimension, "Adam buffers must have identical shapes");
  require(t >= 1, ErrorKind::Input, "Adam step index starts at 1");
  const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g;
    v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    params[i] -= h.learning_rate * m_hat / (std::sqrt(v_hat) + h.epsilon);
  }
}

struct AdamState {
  model::ModelParams m;
  model::ModelParams v;
  std::uint64_t t = 0;

  AdamState() = default;
  explicit AdamState(const model::ModelShape& shape) : m(shape), v(shape) {}
};

inline void adam_step(model::ModelParams& params, const model::Gradients& grads,
                      AdamState& state, const AdamHyper& h) {
  require(grads.shape() == params.shape() && state.m.shape() == params.shape() &&
              state.v.shape() == params.shape(),
          ErrorKind::Dimension, "gradient/optimizer shapes do not match parameters");
  if (!grads.all_finite()) fail(ErrorKind::Numeric, "non-finite gradient in adam_step");
  ++state.t;
  auto p = params.tensors();
  auto g = grads.tensors();
  auto m = state.m.tensors();
  auto v = state.v.tensors();
  for (std::size_t i = 0; i < p.size(); ++i) adam_update(p[i], g[i], m[i], v[i], state.t, h);
}

// ---------------------------------------------------------------------------
// Training

struct TrainResult {
  model::ModelParams params;
  std::vector<double> loss_trace;  // mean per-sample MSE of each epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Minibatch Adam on the mean-squared error. Samples are visited in a fresh
/// seeded shuffle each epoch; per-sample gradients are reduced in visit order,
/// so the result depends only on (dataset, config).
inline TrainResult train(const Dataset& data, const TrainConfig& config,
                         const EpochCallback& on_epoch = {}) {
  config.validate();
  require(!data.empty(), ErrorKind::Input, "training dataset is empty");
  for (const auto& s : data)
    require(s.target.size() == config.granularity, ErrorKind::Dimension,
            "sample target length " + std::to_string(s.target.size()) +
                " does not match granularity " + std::to_string(config.granularity));

  const auto shape = config.model_shape();
  TrainResult result{model::initialize(shape, derive_seed(config.seed, 0)), {}};
  AdamState state(shape);
  const auto hyper = AdamHyper::from(config);
  Rng shuffle_rng(derive_seed(config.seed, 1));

  const std::size_t n = data.size();
  const std::size_t batch =
      config.batch_size == 0 || config.batch_size > n ? n : config.batch_size;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  model::Gradients grads(shape);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (batch < n) {
      for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(
            shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i)));
        std::swap(order[i], order[j]);
      }
    }
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < n; begin += batch) {
      const std::size_t end = std::min(n, begin + batch);
      const double scale = 1.0 / static_cast<double>(end - begin);
      grads.fill(0.0);
      for (std::size_t i = begin; i < end; ++i) {
        const auto& s = data[order[i]];
        epoch_loss += model::accumulate_gradients(result.params, s.features, s.target,
                                                  grads, scale);
      }
      adam_step(result.params, grads, state, hyper);
    }
    const double mean_loss = epoch_loss / static_cast<double>(n);
    if (!std::isfinite(mean_loss))
      fail(ErrorKind::Numeric, "non-finite training loss at epoch " +
                                   std::to_string(epoch + 1));
    result.loss_trace.push_back(mean_loss);
    if (on_epoch) on_epoch(epoch + 1, mean_loss);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Finite-difference gradient check

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_tensor = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compares the analytic gradient (multiplied by `fault_scale`, which is 1
/// except for fault-injection runs) with central differences of the loss.
/// Relative error is |a - n| / max(|a|, |n|, 1e-8).
inline GradCheckResult grad_check(const model::ModelParams& params,
                                  const model::FeatureVector& x,
                                  std::span<const double> target, double step = 1e-5,
                                  double fault_scale = 1.0) {
  const model::Gradients analytic = model::backward(params, x, target);
  model::ModelParams probe = params;
  auto probe_tensors = probe.tensors();
  const auto grad_tensors = analytic.tensors();

  auto loss_at = [&]() { return model::mse_loss(model::forward(probe, x), target); };

  GradCheckResult result;
  for (std::size_t t = 0; t < probe_tensors.size(); ++t) {
    auto tensor = probe_tensors[t];
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double saved = tensor[i];
      tensor[i] = saved + step;
      const double up = loss_at();
      tensor[i] = saved - step;
      const double down = loss_at();
      tensor[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double a = fault_scale * grad_tensors[t][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      if (rel > result.max_relative_error) {
        result = {rel, t, i, a, numeric};
      }
    }
  }
  return result;
}

}  // namespace evload::optim
