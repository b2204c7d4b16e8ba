#pragma once

// Latent-profile mixture model for daily charging load curves.
//
// A location feature vector x is mapped to
//   weights = softmax(f(x))                 mixture over K latent profiles
//   shape   = sum_k weights_k * profile_k   profile_k = softmax(logits_k)
//   peak    = softplus(g(x))                daily energy scale
//   load    = peak * shape
// where f and g are one-hidden-layer tanh MLPs.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "evload/error.hpp"
#include "evload/numeric.hpp"
#include "evload/rng.hpp"

namespace evload {

inline constexpr std::size_t kCategoryCount = 12;
inline constexpr std::size_t kScalarFeatureCount = 3;
inline constexpr std::size_t kFeatureDim = kCategoryCount + kScalarFeatureCount;
inline constexpr std::size_t kHoursPerDay = 24;

}  // namespace evload

namespace evload::model {

/// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[r * cols + c];
  }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// 15 model inputs: one-hot ZSJ category followed by three standardized
/// scalars (population density, address count, commuter inflow).
class FeatureVector {
 public:
  static FeatureVector from_values(std::span<const double> values) {
    require(values.size() == kFeatureDim, ErrorKind::Dimension,
            "feature vector must have " + std::to_string(kFeatureDim) +
                " entries, got " + std::to_string(values.size()));
    require(all_finite(values), ErrorKind::Input,
            "feature vector contains non-finite values");
    int ones = 0;
    for (std::size_t i = 0; i < kCategoryCount; ++i) {
      if (values[i] == 1.0) {
        ++ones;
      } else {
        require(values[i] == 0.0, ErrorKind::Input,
                "category slot " + std::to_string(i) + " is neither 0 nor 1");
      }
    }
    require(ones == 1, ErrorKind::Input,
            "feature vector needs exactly one active category slot");
    FeatureVector fv;
    std::copy(values.begin(), values.end(), fv.values_.begin());
    return fv;
  }

  static FeatureVector from_parts(std::size_t category,
                                  std::array<double, kScalarFeatureCount> z) {
    require(category < kCategoryCount, ErrorKind::Input,
            "category index out of range");
    std::array<double, kFeatureDim> v{};
    v[category] = 1.0;
    std::copy(z.begin(), z.end(), v.begin() + kCategoryCount);
    return from_values(v);
  }

  std::span<const double> values() const { return values_; }
  std::size_t category() const {
    return static_cast<std::size_t>(
        std::find(values_.begin(), values_.begin() + kCategoryCount, 1.0) -
        values_.begin());
  }

 private:
  std::array<double, kFeatureDim> values_{};
};

struct Dense {
  Matrix weight;  // out x in
  std::vector<double> bias;

  Dense() = default;
  Dense(std::size_t in, std::size_t out) : weight(out, in), bias(out, 0.0) {}

  std::size_t in() const { return weight.cols; }
  std::size_t out() const { return weight.rows; }

  void apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t o = 0; o < out(); ++o) {
      const auto w = weight.row(o);
      double acc = bias[o];
      for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * x[i];
      y[o] = acc;
    }
  }

  friend bool operator==(const Dense&, const Dense&) = default;
};

/// K x G free logits; each row is mapped onto the probability simplex by
/// softmax.
class LatentProfileBank {
 public:
  LatentProfileBank() = default;
  LatentProfileBank(std::size_t k, std::size_t granularity)
      : logits_(k, granularity) {}
  explicit LatentProfileBank(Matrix logits) : logits_(std::move(logits)) {}

  std::size_t k() const { return logits_.rows; }
  std::size_t granularity() const { return logits_.cols; }

  Matrix& logits() { return logits_; }
  const Matrix& logits() const { return logits_; }

  Matrix distributions() const {
    Matrix out(k(), granularity());
    for (std::size_t r = 0; r < k(); ++r) softmax(logits_.row(r), out.row(r));
    return out;
  }

  friend bool operator==(const LatentProfileBank&,
                         const LatentProfileBank&) = default;

 private:
  Matrix logits_;
};

struct ModelShape {
  std::size_t input_dim = kFeatureDim;
  std::size_t hidden_f = 128;
  std::size_t hidden_g = 64;
  std::size_t k = 4;
  std::size_t granularity = kHoursPerDay;

  std::size_t parameter_count() const {
    return (input_dim + 1) * hidden_f + (hidden_f + 1) * k +
           (input_dim + 1) * hidden_g + (hidden_g + 1) + k * granularity;
  }

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// All trainable parameters. Gradients and optimizer moments share this type.
struct ModelParams {
  Dense f_hidden;
  Dense f_output;
  Dense g_hidden;
  Dense g_output;
  LatentProfileBank latent;

  ModelParams() = default;
  explicit ModelParams(const ModelShape& s)
      : f_hidden(s.input_dim, s.hidden_f),
        f_output(s.hidden_f, s.k),
        g_hidden(s.input_dim, s.hidden_g),
        g_output(s.hidden_g, 1),
        latent(s.k, s.granularity) {}

  ModelShape shape() const {
    return {f_hidden.in(), f_hidden.out(), g_hidden.out(), latent.k(),
            latent.granularity()};
  }
  std::size_t k() const { return latent.k(); }
  std::size_t granularity() const { return latent.granularity(); }

  static constexpr std::size_t kTensorCount = 9;

  std::array<std::span<double>, kTensorCount> tensors() {
    return {f_hidden.weight.data, f_hidden.bias, f_output.weight.data,
            f_output.bias,        g_hidden.weight.data, g_hidden.bias,
            g_output.weight.data, g_output.bias,        latent.logits().data};
  }
  std::array<std::span<const double>, kTensorCount> tensors() const {
    return {f_hidden.weight.data, f_hidden.bias, f_output.weight.data,
            f_output.bias,        g_hidden.weight.data, g_hidden.bias,
            g_output.weight.data, g_output.bias,        latent.logits().data};
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (auto t : tensors()) n += t.size();
    return n;
  }

  void fill(double value) {
    for (auto t : tensors()) std::fill(t.begin(), t.end(), value);
  }

  bool all_finite() const {
    for (auto t : tensors())
      if (!evload::all_finite(t)) return false;
    return true;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

using Gradients = ModelParams;

/// Glorot-uniform weights, zero biases, zero latent logits.
inline ModelParams initialize(const ModelShape& shape, std::uint64_t seed) {
  require(shape.input_dim >= 1 && shape.hidden_f >= 1 && shape.hidden_g >= 1 &&
              shape.k >= 1 && shape.granularity >= 1,
          ErrorKind::Input, "model dimensions must all be >= 1");
  ModelParams p(shape);
  Rng rng(seed);
  for (Dense* layer : {&p.f_hidden, &p.f_output, &p.g_hidden, &p.g_output}) {
    const double a = std::sqrt(6.0 / static_cast<double>(layer->in() + layer->out()));
    for (auto& w : layer->weight.data) w = rng.uniform(-a, a);
  }
  return p;
}

struct PredictedCurve {
  double peak_scale = 0.0;
  std::vector<double> mixture_weights;
  std::vector<double> shape;
  std::vector<double> load;
};

/// Intermediate activations kept for the backward pass.
struct ForwardPass {
  std::vector<double> f_hidden;  // post-tanh
  std::vector<double> f_logits;
  std::vector<double> g_hidden;  // post-tanh
  double g_raw = 0.0;
  Matrix profiles;
  PredictedCurve curve;
};

/// shape = weights^T * profiles. Exposed separately so that degenerate
/// (one-hot) mixtures can be exercised directly.
inline std::vector<double> mix(std::span<const double> weights,
                               const Matrix& profiles) {
  require(weights.size() == profiles.rows, ErrorKind::Dimension,
          "mixture weight count does not match profile count");
  std::vector<double> shape(profiles.cols, 0.0);
  for (std::size_t k = 0; k < profiles.rows; ++k) {
    if (weights[k] == 0.0) continue;
    const auto row = profiles.row(k);
    for (std::size_t j = 0; j < shape.size(); ++j) shape[j] += weights[k] * row[j];
  }
  return shape;
}

namespace detail {
inline void check_layer(std::span<const double> values, const char* layer) {
  if (!all_finite(values))
    fail(ErrorKind::Numeric, std::string("non-finite value in layer ") + layer);
}
}  // namespace detail

inline ForwardPass forward_pass(const ModelParams& params, const FeatureVector& x) {
  const auto in = x.values();
  require(in.size() == params.f_hidden.in(), ErrorKind::Dimension,
          "feature dimension does not match model input");
  ForwardPass fp;

  fp.f_hidden.resize(params.f_hidden.out());
  params.f_hidden.apply(in, fp.f_hidden);
  for (auto& h : fp.f_hidden) h = std::tanh(h);
  detail::check_layer(fp.f_hidden, "f.hidden");

  fp.f_logits.resize(params.f_output.out());
  params.f_output.apply(fp.f_hidden, fp.f_logits);
  detail::check_layer(fp.f_logits, "f.output");
  fp.curve.mixture_weights = softmax(fp.f_logits);

  fp.g_hidden.resize(params.g_hidden.out());
  params.g_hidden.apply(in, fp.g_hidden);
  for (auto& h : fp.g_hidden) h = std::tanh(h);
  detail::check_layer(fp.g_hidden, "g.hidden");

  params.g_output.apply(fp.g_hidden, std::span<double>(&fp.g_raw, 1));
  detail::check_layer(std::span<const double>(&fp.g_raw, 1), "g.output");

  detail::check_layer(params.latent.logits().data, "latent_bank");
  fp.profiles = params.latent.distributions();
  detail::check_layer(fp.profiles.data, "latent_bank");

  fp.curve.shape = mix(fp.curve.mixture_weights, fp.profiles);
  fp.curve.peak_scale = softplus(fp.g_raw);
  if (!(fp.curve.peak_scale > 0.0) || !std::isfinite(fp.curve.peak_scale))
    fail(ErrorKind::Numeric, "non-finite or zero value in layer peak_scale");
  fp.curve.load.resize(fp.curve.shape.size());
  for (std::size_t j = 0; j < fp.curve.shape.size(); ++j)
    fp.curve.load[j] = fp.curve.peak_scale * fp.curve.shape[j];
  detail::check_layer(fp.curve.load, "load");
  return fp;
}

inline PredictedCurve forward(const ModelParams& params, const FeatureVector& x) {
  return forward_pass(params, x).curve;
}

/// Mean over bins of squared differences.
inline double mse_loss(std::span<const double> load, std::span<const double> target) {
  require(load.size() == target.size(), ErrorKind::Dimension,
          "prediction has " + std::to_string(load.size()) + " bins, target has " +
              std::to_string(target.size()));
  require(!load.empty(), ErrorKind::Dimension, "empty load curve");
  double acc = 0.0;
  for (std::size_t j = 0; j < load.size(); ++j) {
    const double d = load[j] - target[j];
    acc += d * d;
  }
  return acc / static_cast<double>(load.size());
}

inline double mse_loss(const PredictedCurve& pred, std::span<const double> target) {
  return mse_loss(pred.load, target);
}

/// Adds scale * d(loss)/d(params) into `grads` and returns the loss.
inline double accumulate_gradients(const ModelParams& params, const FeatureVector& x,
                                   std::span<const double> target, Gradients& grads,
                                   double scale = 1.0) {
  const ForwardPass fp = forward_pass(params, x);
  const auto& c = fp.curve;
  const double loss = mse_loss(c.load, target);
  const std::size_t G = c.load.size();
  const std::size_t K = c.mixture_weights.size();
  const auto in = x.values();

  std::vector<double> d_load(G);
  for (std::size_t j = 0; j < G; ++j)
    d_load[j] = scale * 2.0 * (c.load[j] - target[j]) / static_cast<double>(G);

  // load = peak * shape
  double d_peak = 0.0;
  std::vector<double> d_shape(G);
  for (std::size_t j = 0; j < G; ++j) {
    d_peak += d_load[j] * c.shape[j];
    d_shape[j] = c.peak_scale * d_load[j];
  }

  // shape = sum_k w_k P_k
  std::vector<double> d_weights(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const auto prow = fp.profiles.row(k);
    auto lrow = grads.latent.logits().row(k);
    const double w = c.mixture_weights[k];
    double acc = 0.0, inner = 0.0;
    for (std::size_t j = 0; j < G; ++j) {
      acc += d_shape[j] * prow[j];
      inner += prow[j] * w * d_shape[j];
    }
    d_weights[k] = acc;
    if (w == 0.0) continue;
    // softmax row Jacobian: dL = P * (dP - <P, dP>), with dP = w * d_shape
    for (std::size_t j = 0; j < G; ++j)
      lrow[j] += prow[j] * (w * d_shape[j] - inner);
  }

  // weights = softmax(f_logits)
  double wdot = 0.0;
  for (std::size_t k = 0; k < K; ++k) wdot += c.mixture_weights[k] * d_weights[k];
  std::vector<double> d_flogits(K);
  for (std::size_t k = 0; k < K; ++k)
    d_flogits[k] = c.mixture_weights[k] * (d_weights[k] - wdot);

  auto dense_backward = [](const Dense& layer, Dense& grad, std::span<const double> input,
                           std::span<const double> d_out, std::span<double> d_in) {
    std::fill(d_in.begin(), d_in.end(), 0.0);
    for (std::size_t o = 0; o < layer.out(); ++o) {
      const double d = d_out[o];
      grad.bias[o] += d;
      if (d == 0.0) continue;
      auto grow = grad.weight.row(o);
      const auto wrow = layer.weight.row(o);
      for (std::size_t i = 0; i < input.size(); ++i) {
        grow[i] += d * input[i];
        d_in[i] += d * wrow[i];
      }
    }
  };

  std::vector<double> d_fh(params.f_hidden.out());
  dense_backward(params.f_output, grads.f_output, fp.f_hidden, d_flogits, d_fh);
  for (std::size_t h = 0; h < d_fh.size(); ++h)
    d_fh[h] *= 1.0 - fp.f_hidden[h] * fp.f_hidden[h];
  std::vector<double> d_in(in.size());
  dense_backward(params.f_hidden, grads.f_hidden, in, d_fh, d_in);

  // peak = softplus(g_raw)
  const double d_graw = d_peak * sigmoid(fp.g_raw);
  std::vector<double> d_gh(params.g_hidden.out());
  dense_backward(params.g_output, grads.g_output, fp.g_hidden,
                 std::span<const double>(&d_graw, 1), d_gh);
  for (std::size_t h = 0; h < d_gh.size(); ++h)
    d_gh[h] *= 1.0 - fp.g_hidden[h] * fp.g_hidden[h];
  dense_backward(params.g_hidden, grads.g_hidden, in, d_gh, d_in);

  return loss;
}

inline Gradients backward(const ModelParams& params, const FeatureVector& x,
                          std::span<const double> target) {
  Gradients grads(params.shape());
  accumulate_gradients(params, x, target, grads);
  return grads;
}

// ---------------------------------------------------------------------------
// Latent archetype matching

struct MatchResult {
  /// permutation[j] is the latent row assigned to reference archetype j.
  std::vector<std::size_t> permutation;
  std::vector<double> similarities;
  double mean_similarity = 0.0;
};

/// Exhaustive search over all K! assignments for the one maximizing mean
/// cosine similarity. Ties resolve to the lexicographically smallest
/// permutation.
inline MatchResult match_latents(const Matrix& profiles,
                                 const std::vector<std::vector<double>>& archetypes) {
  const std::size_t K = profiles.rows;
  require(archetypes.size() == K, ErrorKind::Dimension,
          "model has " + std::to_string(K) + " latent profiles but " +
              std::to_string(archetypes.size()) + " archetypes were given");
  require(K >= 1 && K <= 10, ErrorKind::Input,
          "exhaustive matching supports 1..10 profiles");
  for (const auto& a : archetypes)
    require(a.size() == profiles.cols, ErrorKind::Dimension,
            "archetype length does not match profile granularity");

  Matrix sim(K, K);
  for (std::size_t r = 0; r < K; ++r)
    for (std::size_t j = 0; j < K; ++j)
      sim(r, j) = cosine_similarity(profiles.row(r), archetypes[j]);

  std::vector<std::size_t> perm(K);
  std::iota(perm.begin(), perm.end(), 0);
  MatchResult best;
  double best_total = -std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t j = 0; j < K; ++j) total += sim(perm[j], j);
    if (total > best_total + 1e-12) {
      best_total = total;
      best.permutation = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  for (std::size_t j = 0; j < K; ++j)
    best.similarities.push_back(sim(best.permutation[j], j));
  best.mean_similarity = best_total / static_cast<double>(K);
  return best;
}

inline MatchResult match_latents(const LatentProfileBank& bank,
                                 const std::vector<std::vector<double>>& archetypes) {
  return match_latents(bank.distributions(), archetypes);
}

// ---------------------------------------------------------------------------
// JSON serialization

inline constexpr int kModelFormatVersion = 1;

namespace detail {
inline nlohmann::json matrix_to_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows; ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j, std::size_t rows,
                               std::size_t cols, const std::string& name) {
  require(j.is_array() && j.size() == rows, ErrorKind::Format,
          name + ": expected " + std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    require(j[r].is_array() && j[r].size() == cols, ErrorKind::Format,
            name + ": expected " + std::to_string(cols) + " columns in row " +
                std::to_string(r));
    for (std::size_t c = 0; c < cols; ++c) {
      require(j[r][c].is_number(), ErrorKind::Format, name + ": non-numeric entry");
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

inline nlohmann::json dense_to_json(const Dense& d) {
  return {{"weight", matrix_to_json(d.weight)}, {"bias", d.bias}};
}

inline Dense dense_from_json(const nlohmann::json& j, std::size_t in, std::size_t out,
                             const std::string& name) {
  require(j.is_object() && j.contains("weight") && j.contains("bias"),
          ErrorKind::Format, name + ": missing weight/bias");
  Dense d(in, out);
  d.weight = matrix_from_json(j["weight"], out, in, name + ".weight");
  const auto& b = j["bias"];
  require(b.is_array() && b.size() == out, ErrorKind::Format,
          name + ".bias: expected " + std::to_string(out) + " entries");
  for (std::size_t o = 0; o < out; ++o) {
    require(b[o].is_number(), ErrorKind::Format, name + ".bias: non-numeric entry");
    d.bias[o] = b[o].get<double>();
  }
  return d;
}
}  // namespace detail

inline nlohmann::json to_json(const ModelParams& p) {
  const auto s = p.shape();
  return {{"version", kModelFormatVersion},
          {"granularity", s.granularity},
          {"k", s.k},
          {"input_dim", s.input_dim},
          {"f",
           {{"hidden", detail::dense_to_json(p.f_hidden)},
            {"output", detail::dense_to_json(p.f_output)}}},
          {"g",
           {{"hidden", detail::dense_to_json(p.g_hidden)},
            {"output", detail::dense_to_json(p.g_output)}}},
          {"latent_logits", detail::matrix_to_json(p.latent.logits())}};
}

inline ModelParams params_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorKind::Format, "model document must be a JSON object");
  require(j.value("version", 0) == kModelFormatVersion, ErrorKind::Format,
          "unsupported model format version");
  for (const char* key : {"granularity", "k", "f", "g", "latent_logits"})
    require(j.contains(key), ErrorKind::Format, std::string("model: missing '") + key + "'");
  ModelShape s;
  s.granularity = j["granularity"].get<std::size_t>();
  s.k = j["k"].get<std::size_t>();
  s.input_dim = j.value("input_dim", kFeatureDim);
  const auto& f = j["f"];
  const auto& g = j["g"];
  require(f.contains("hidden") && f.contains("output") && g.contains("hidden") &&
              g.contains("output"),
          ErrorKind::Format, "model: f/g need 'hidden' and 'output' layers");
  require(f["hidden"].contains("bias") && g["hidden"].contains("bias"),
          ErrorKind::Format, "model: hidden layers need 'bias'");
  s.hidden_f = f["hidden"]["bias"].size();
  s.hidden_g = g["hidden"]["bias"].size();
  ModelParams p;
  p.f_hidden = detail::dense_from_json(f["hidden"], s.input_dim, s.hidden_f, "f.hidden");
  p.f_output = detail::dense_from_json(f["output"], s.hidden_f, s.k, "f.output");
  p.g_hidden = detail::dense_from_json(g["hidden"], s.input_dim, s.hidden_g, "g.hidden");
  p.g_output = detail::dense_from_json(g["output"], s.hidden_g, 1, "g.output");
  p.latent = LatentProfileBank(
      detail::matrix_from_json(j["latent_logits"], s.k, s.granularity, "latent_logits"));
  require(p.all_finite(), ErrorKind::Format, "model contains non-finite weights");
  return p;
}

}  // namespace evload::model
