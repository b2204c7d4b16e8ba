#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "evload/model.hpp"
#include "evload/rng.hpp"

using namespace evload;
using namespace evload::model;

namespace {

std::vector<double> random_features(Rng& rng) {
  std::vector<double> x(kFeatureDim, 0.0);
  x[static_cast<std::size_t>(rng.uniform_int(0, kCategoryCount - 1))] = 1.0;
  for (std::size_t i = kCategoryCount; i < kFeatureDim; ++i) x[i] = rng.normal();
  return x;
}

ModelParams random_params(std::uint64_t seed, ModelShape shape = {}) {
  Rng rng(seed);
  auto p = initialize(shape, rng());
  for (auto t : p.tensors())
    for (auto& v : t) v += 0.5 * rng.normal();
  return p;
}

// Straight transcription of the model equations, sharing no code with forward().
std::vector<double> oracle_load(const ModelParams& p, const std::vector<double>& x) {
  auto dense = [](const Dense& d, const std::vector<double>& in) {
    std::vector<double> out(d.out());
    for (std::size_t o = 0; o < d.out(); ++o) {
      long double acc = d.bias[o];
      for (std::size_t i = 0; i < d.in(); ++i) acc += d.weight(o, i) * in[i];
      out[o] = static_cast<double>(acc);
    }
    return out;
  };
  auto hf = dense(p.f_hidden, x);
  for (auto& v : hf) v = std::tanh(v);
  auto logits = dense(p.f_output, hf);
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0;
  for (auto& v : logits) z += (v = std::exp(v - mx));
  for (auto& v : logits) v /= z;
  auto hg = dense(p.g_hidden, x);
  for (auto& v : hg) v = std::tanh(v);
  const double raw = dense(p.g_output, hg)[0];
  const double peak = std::log1p(std::exp(raw));
  std::vector<double> load(p.granularity(), 0.0);
  for (std::size_t k = 0; k < p.k(); ++k) {
    const auto row = p.latent.logits().row(k);
    double zr = 0;
    for (double v : row) zr += std::exp(v);
    for (std::size_t j = 0; j < load.size(); ++j) load[j] += logits[k] * std::exp(row[j]) / zr;
  }
  for (auto& v : load) v *= peak;
  return load;
}

}  // namespace

TEST(ModelShape, DefaultArchitecture) {
  const ModelShape s;
  EXPECT_EQ(s.input_dim, 15u);
  EXPECT_EQ(s.hidden_f, 128u);
  EXPECT_EQ(s.hidden_g, 64u);
  EXPECT_EQ(s.k, 4u);
  EXPECT_EQ(s.granularity, 24u);
  EXPECT_EQ(ModelParams(s).parameter_count(), s.parameter_count());
}

TEST(FeatureVector, ValidatesOneHotSlots) {
  std::vector<double> x(kFeatureDim, 0.0);
  EXPECT_THROW(FeatureVector::from_values(x), Error);  // all zero
  x[3] = 1.0;
  EXPECT_NO_THROW(FeatureVector::from_values(x));
  EXPECT_EQ(FeatureVector::from_values(x).category(), 3u);
  x[4] = 1.0;
  EXPECT_THROW(FeatureVector::from_values(x), Error);
  x[4] = 0.5;
  EXPECT_THROW(FeatureVector::from_values(x), Error);
  EXPECT_THROW(FeatureVector::from_values(std::vector<double>(14, 0.0)), Error);
  x[4] = 0.0;
  x[13] = std::nan("");
  EXPECT_THROW(FeatureVector::from_values(x), Error);
}

TEST(Initialize, GlorotBoundsZeroBiasesAndDeterminism) {
  const auto a = initialize({}, 17), b = initialize({}, 17), c = initialize({}, 18);
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  const double bound = std::sqrt(6.0 / (15.0 + 128.0));
  for (double w : a.f_hidden.weight.data) EXPECT_LE(std::abs(w), bound);
  for (double v : a.f_hidden.bias) EXPECT_EQ(v, 0.0);
  for (double v : a.latent.logits().data) EXPECT_EQ(v, 0.0);
}

TEST(Forward, MatchesIndependentOracle) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto p = random_params(100 + t);
    const auto x = random_features(rng);
    const auto pred = forward(p, FeatureVector::from_values(x));
    const auto expect = oracle_load(p, x);
    for (std::size_t j = 0; j < 24; ++j) EXPECT_NEAR(pred.load[j], expect[j], 1e-12 * (1 + expect[j]));
  }
}

TEST(Forward, EqualLogitsGiveUniformWeights) {
  auto p = random_params(3);
  std::fill(p.f_output.weight.data.begin(), p.f_output.weight.data.end(), 0.0);
  std::fill(p.f_output.bias.begin(), p.f_output.bias.end(), 1.5);
  Rng rng(2);
  const auto pred = forward(p, FeatureVector::from_values(random_features(rng)));
  for (double w : pred.mixture_weights) EXPECT_DOUBLE_EQ(w, 0.25);
}

TEST(Mix, OneHotWeightsSelectRowExactly) {
  const auto profiles = random_params(4).latent.distributions();
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<double> w(4, 0.0);
    w[k] = 1.0;
    const auto shape = mix(w, profiles);
    for (std::size_t j = 0; j < 24; ++j) EXPECT_EQ(shape[j], profiles(k, j));
  }
  EXPECT_THROW(mix(std::vector<double>{1.0}, profiles), Error);
}

TEST(ForwardProperty, SimplexAndPositivePeak) {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto p = random_params(rng());
    const auto pred = forward(p, FeatureVector::from_values(random_features(rng)));
    ASSERT_EQ(pred.shape.size(), 24u);
    EXPECT_NEAR(sum(pred.shape), 1.0, 1e-9);
    EXPECT_NEAR(sum(pred.mixture_weights), 1.0, 1e-9);
    EXPECT_GT(pred.peak_scale, 0.0);
    for (double v : pred.shape) EXPECT_GT(v, 0.0);
  }
}

TEST(ForwardProperty, MixingIsConvex) {
  Rng rng(6);
  for (int t = 0; t < 200; ++t) {
    const auto p = random_params(rng());
    const auto rows = p.latent.distributions();
    const auto pred = forward(p, FeatureVector::from_values(random_features(rng)));
    for (std::size_t j = 0; j < 24; ++j) {
      double lo = 1.0, hi = 0.0;
      for (std::size_t k = 0; k < 4; ++k) {
        lo = std::min(lo, rows(k, j));
        hi = std::max(hi, rows(k, j));
      }
      EXPECT_GE(pred.shape[j], lo - 1e-15);
      EXPECT_LE(pred.shape[j], hi + 1e-15);
    }
  }
}

TEST(ForwardProperty, PermutationEquivariance) {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const auto p = random_params(rng());
    std::vector<std::size_t> perm = {0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), rng);
    ModelParams q = p;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto src = p.latent.logits().row(perm[k]);
      std::copy(src.begin(), src.end(), q.latent.logits().row(k).begin());
      const auto w = p.f_output.weight.row(perm[k]);
      std::copy(w.begin(), w.end(), q.f_output.weight.row(k).begin());
      q.f_output.bias[k] = p.f_output.bias[perm[k]];
    }
    const auto x = FeatureVector::from_values(random_features(rng));
    const auto a = forward(p, x), b = forward(q, x);
    for (std::size_t j = 0; j < 24; ++j) EXPECT_NEAR(a.load[j], b.load[j], 1e-12);
  }
}

TEST(Forward, NonFiniteNamesLayer) {
  Rng rng(8);
  const auto x = FeatureVector::from_values(random_features(rng));
  auto expect_layer = [&](ModelParams p, const std::string& layer) {
    try {
      forward(p, x);
      FAIL() << "expected numeric fault";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Numeric);
      EXPECT_NE(std::string(e.what()).find(layer), std::string::npos) << e.what();
    }
  };
  auto p = random_params(9);
  auto q = p;
  q.f_hidden.bias[0] = std::nan("");
  expect_layer(q, "f.hidden");
  q = p;
  q.f_output.bias[1] = std::numeric_limits<double>::infinity();
  expect_layer(q, "f.output");
  q = p;
  q.g_hidden.bias[2] = std::nan("");
  expect_layer(q, "g.hidden");
  q = p;
  q.latent.logits()(0, 0) = std::nan("");
  expect_layer(q, "latent_bank");
}

TEST(MseLoss, HandValues) {
  std::vector<double> zero(24, 0.0), ones(24, 1.0), three(24, 0.0);
  three[0] = 3.0;
  EXPECT_EQ(mse_loss(ones, ones), 0.0);
  EXPECT_DOUBLE_EQ(mse_loss(ones, zero), 1.0);
  EXPECT_DOUBLE_EQ(mse_loss(three, zero), 0.375);
  EXPECT_THROW(mse_loss(ones, std::vector<double>(23, 0.0)), Error);
  try {
    mse_loss(ones, std::vector<double>(23, 0.0));
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Dimension);
  }
}

TEST(Backward, MatchesFiniteDifferencesOnSmallModel) {
  const ModelShape small{kFeatureDim, 5, 4, 3, 24};
  Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    auto p = random_params(rng(), small);
    const auto x = FeatureVector::from_values(random_features(rng));
    std::vector<double> target(24);
    for (auto& v : target) v = rng.uniform(0, 0.2);
    const auto g = backward(p, x, target);
    auto tensors = p.tensors();
    const auto gt = g.tensors();
    for (std::size_t ti = 0; ti < tensors.size(); ++ti)
      for (std::size_t i = 0; i < tensors[ti].size(); ++i) {
        const double saved = tensors[ti][i];
        const double h = 1e-6;
        tensors[ti][i] = saved + h;
        const double up = mse_loss(forward(p, x), target);
        tensors[ti][i] = saved - h;
        const double down = mse_loss(forward(p, x), target);
        tensors[ti][i] = saved;
        const double numeric = (up - down) / (2 * h);
        EXPECT_NEAR(gt[ti][i], numeric, 1e-7 + 1e-5 * std::abs(numeric)) << ti << ":" << i;
      }
  }
}

TEST(Backward, ZeroAtExactFit) {
  const auto p = random_params(11);
  Rng rng(12);
  const auto x = FeatureVector::from_values(random_features(rng));
  const auto target = forward(p, x).load;
  const auto g = backward(p, x, target);
  for (auto t : g.tensors())
    for (double v : t) EXPECT_EQ(v, 0.0);
}

TEST(Backward, UnusedLatentRowGetsZeroGradient) {
  auto p = random_params(13);
  // Force weight on row 2 to underflow to exactly zero.
  std::fill(p.f_output.weight.row(2).begin(), p.f_output.weight.row(2).end(), 0.0);
  p.f_output.bias[2] = -1e4;
  Rng rng(14);
  const auto x = FeatureVector::from_values(random_features(rng));
  ASSERT_EQ(forward(p, x).mixture_weights[2], 0.0);
  std::vector<double> target(24, 0.1);
  const auto g = backward(p, x, target);
  for (double v : g.latent.logits().row(2)) EXPECT_EQ(v, 0.0);
  double other = 0.0;
  for (double v : g.latent.logits().row(0)) other += std::abs(v);
  EXPECT_GT(other, 0.0);
}

TEST(Backward, AccumulateScalesAndAdds) {
  const auto p = random_params(15);
  Rng rng(16);
  const auto x = FeatureVector::from_values(random_features(rng));
  std::vector<double> target(24, 0.05);
  const auto g = backward(p, x, target);
  Gradients acc(p.shape());
  accumulate_gradients(p, x, target, acc, 0.5);
  accumulate_gradients(p, x, target, acc, 0.5);
  const auto a = acc.tensors();
  const auto b = g.tensors();
  for (std::size_t t = 0; t < a.size(); ++t)
    for (std::size_t i = 0; i < a[t].size(); ++i) EXPECT_NEAR(a[t][i], b[t][i], 1e-15 + 1e-13 * std::abs(b[t][i]));
}

// ---------------------------------------------------------------------------
// Matching

namespace {

std::vector<std::vector<double>> peaked_shapes(std::size_t k) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> s(24, 0.01);
    s[3 + 5 * i] = 1.0;
    const double z = sum(s);
    for (auto& v : s) v /= z;
    out.push_back(s);
  }
  return out;
}

Matrix rows_of(const std::vector<std::vector<double>>& shapes) {
  Matrix m(shapes.size(), shapes.front().size());
  for (std::size_t r = 0; r < shapes.size(); ++r) std::copy(shapes[r].begin(), shapes[r].end(), m.row(r).begin());
  return m;
}

// Recursive enumeration oracle, independent of std::next_permutation.
std::vector<std::size_t> brute_force_best(const Matrix& profiles, const std::vector<std::vector<double>>& refs) {
  const std::size_t K = refs.size();
  std::vector<std::size_t> cur, best;
  std::vector<bool> used(K, false);
  double best_total = -1e300;
  std::function<void(double)> rec = [&](double total) {
    if (cur.size() == K) {
      if (total > best_total + 1e-12) {
        best_total = total;
        best = cur;
      }
      return;
    }
    const std::size_t j = cur.size();
    for (std::size_t r = 0; r < K; ++r) {
      if (used[r]) continue;
      used[r] = true;
      cur.push_back(r);
      rec(total + cosine_similarity(profiles.row(r), refs[j]));
      cur.pop_back();
      used[r] = false;
    }
  };
  rec(0.0);
  return best;
}

}  // namespace

TEST(MatchLatents, IdentityOrder) {
  const auto refs = peaked_shapes(4);
  const auto m = match_latents(rows_of(refs), refs);
  EXPECT_EQ(m.permutation, (std::vector<std::size_t>{0, 1, 2, 3}));
  for (double s : m.similarities) EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(MatchLatents, ReversedOrder) {
  const auto refs = peaked_shapes(4);
  auto rev = refs;
  std::reverse(rev.begin(), rev.end());
  const auto m = match_latents(rows_of(rev), refs);
  EXPECT_EQ(m.permutation, (std::vector<std::size_t>{3, 2, 1, 0}));
  for (double s : m.similarities) EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(MatchLatents, UniformRowsTieBreakToIdentity) {
  const auto refs = peaked_shapes(4);
  const Matrix uniform(4, 24, 1.0 / 24.0);
  const auto m = match_latents(uniform, refs);
  EXPECT_EQ(m.permutation, (std::vector<std::size_t>{0, 1, 2, 3}));
  for (double s : m.similarities) EXPECT_NEAR(s, m.similarities[0], 1e-15);
}

TEST(MatchLatents, AgreesWithBruteForceOracle) {
  Rng rng(21);
  for (int t = 0; t < 100; ++t) {
    const std::size_t K = static_cast<std::size_t>(rng.uniform_int(1, 5));
    std::vector<std::vector<double>> refs(K, std::vector<double>(24));
    Matrix profiles(K, 24);
    for (std::size_t k = 0; k < K; ++k)
      for (std::size_t j = 0; j < 24; ++j) {
        refs[k][j] = rng.uniform();
        profiles(k, j) = rng.uniform();
      }
    const auto m = match_latents(profiles, refs);
    EXPECT_EQ(m.permutation, brute_force_best(profiles, refs));
  }
}

TEST(MatchLatents, KMismatchIsDimensionError) {
  const auto refs = peaked_shapes(3);
  try {
    match_latents(rows_of(peaked_shapes(4)), refs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Dimension);
  }
}

TEST(ModelJson, RoundTripIsExact) {
  const auto p = random_params(31);
  const auto text = to_json(p).dump();
  const auto q = params_from_json(nlohmann::json::parse(text));
  EXPECT_TRUE(p == q);
  EXPECT_EQ(to_json(q).dump(), text);
}

TEST(ModelJson, RejectsMalformedDocuments) {
  auto j = to_json(random_params(32));
  auto bad = j;
  bad["version"] = 99;
  EXPECT_THROW(params_from_json(bad), Error);
  bad = j;
  bad.erase("latent_logits");
  EXPECT_THROW(params_from_json(bad), Error);
  bad = j;
  bad["k"] = 5;
  EXPECT_THROW(params_from_json(bad), Error);
  EXPECT_THROW(params_from_json(nlohmann::json::array()), Error);
}
