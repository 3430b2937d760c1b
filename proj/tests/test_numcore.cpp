#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "embedkit/common/errors.hpp"
#include "embedkit/common/jsonl.hpp"
#include "embedkit/common/rng.hpp"
#include "embedkit/numcore/adamw.hpp"
#include "embedkit/numcore/checkpoint.hpp"
#include "embedkit/numcore/ops.hpp"
#include "embedkit/numcore/params.hpp"
#include "embedkit/numcore/precision.hpp"
#include "embedkit/numcore/tensor.hpp"
#include "oracles/finite_diff.hpp"

using namespace embedkit;
using namespace embedkit::numcore;

namespace {

Tensor make_randn(Shape shape, Rng& rng, bool requires_grad = true,
                  double stdev = 1.0) {
  return Tensor::randn(std::move(shape), rng, stdev, requires_grad);
}

}  // namespace

TEST_CASE("softmax of uniform logits is uniform") {
  auto t = Tensor::from_data({1, 3}, {0.0, 0.0, 0.0});
  auto s = softmax_rows(t);
  for (double v : s.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("softmax rows sum to one") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t rows = 1 + rng.uniform_int(6), cols = 2 + rng.uniform_int(12);
    auto x = make_randn({rows, cols}, rng, false, 5.0);
    auto s = softmax_rows(x);
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < cols; ++c) sum += s.data()[r * cols + c];
      CHECK(std::abs(sum - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("matmul by identity returns the input") {
  Rng rng(11);
  auto a = make_randn({3, 3}, rng, false);
  std::vector<double> id(9, 0.0);
  id[0] = id[4] = id[8] = 1.0;
  auto eye = Tensor::from_data({3, 3}, id);
  auto out = matmul(eye, a);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(out.data()[i] == doctest::Approx(a.data()[i]).epsilon(1e-15));
  }
}

TEST_CASE("matmul shape mismatch names the op and both shapes") {
  auto a = Tensor::zeros({2, 3});
  auto b = Tensor::zeros({2, 3});
  try {
    matmul(a, b);
    FAIL("expected an error");
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find("matmul") != std::string::npos);
    CHECK(msg.find("(2,3)") != std::string::npos);
  }
}

TEST_CASE("cross entropy of uniform two-class logits is ln 2") {
  auto logits = Tensor::from_data({1, 2}, {0.0, 0.0});
  auto loss = cross_entropy_rows(logits, {0});
  CHECK(loss.item() == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy errors when every row is ignored") {
  auto logits = Tensor::from_data({2, 3}, {0, 0, 0, 0, 0, 0});
  CHECK_THROWS_AS(cross_entropy_rows(logits, {-100, -100}), Error);
}

TEST_CASE("backward of sum of squares") {
  auto x = Tensor::from_data({2}, {1.0, 2.0}, true);
  auto loss = sum_all(mul(x, x));
  backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(2.0));
  CHECK(x.grad()[1] == doctest::Approx(4.0));

  SUBCASE("second backward without zeroing doubles the gradient") {
    backward(loss);
    CHECK(x.grad()[0] == doctest::Approx(4.0));
    CHECK(x.grad()[1] == doctest::Approx(8.0));
  }
}

TEST_CASE("backward requires a scalar loss") {
  auto x = Tensor::from_data({2}, {1.0, 2.0}, true);
  auto y = mul(x, x);
  CHECK_THROWS_AS(backward(y), Error);
}

TEST_CASE("layer norm output is standardized before affine") {
  Rng rng(3);
  std::size_t rows = 5, cols = 16;
  auto x = make_randn({rows, cols}, rng, false, 3.0);
  auto gamma = Tensor::full({cols}, 1.0);
  auto beta = Tensor::zeros({cols});
  auto y = layer_norm_rows(x, gamma, beta);
  for (std::size_t r = 0; r < rows; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < cols; ++c) mean += y.data()[r * cols + c];
    mean /= double(cols);
    double var = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      double d = y.data()[r * cols + c] - mean;
      var += d * d;
    }
    var /= double(cols);
    CHECK(std::abs(mean) < 1e-10);
    CHECK(std::abs(var - 1.0) < 1e-8);
  }
}

TEST_CASE("gelu uses the exact erf formulation") {
  auto x = Tensor::from_data({3}, {-1.0, 0.0, 2.0});
  auto y = gelu(x);
  auto expect = [](double v) {
    return 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2));
  };
  CHECK(y.data()[0] == doctest::Approx(expect(-1.0)).epsilon(1e-15));
  CHECK(y.data()[1] == doctest::Approx(0.0));
  CHECK(y.data()[2] == doctest::Approx(expect(2.0)).epsilon(1e-15));
}

namespace {

// Composite graphs covering every differentiable op; used by the
// finite-difference property below.
double run_builder(int which, std::vector<std::pair<std::string, Tensor>>& leaves,
                   Tensor* loss_out) {
  auto& X = leaves[0].second;
  auto& W1 = leaves[1].second;
  auto& b1 = leaves[2].second;
  auto& W2 = leaves[3].second;
  auto& gamma = leaves[4].second;
  auto& beta = leaves[5].second;

  Tensor loss;
  switch (which) {
    case 0: {
      auto h = gelu(add_rowwise(matmul(X, W1), b1));
      auto logits = matmul(h, W2);
      loss = cross_entropy_rows(logits, {1, 0, 2, 1});
      break;
    }
    case 1: {
      auto h = layer_norm_rows(matmul(X, W1), gamma, beta);
      auto s = softmax_rows(h);
      loss = mean_all(mul(s, h));
      break;
    }
    case 2: {
      auto h = add_rowwise(matmul(X, W1), b1);
      auto t = transpose(h);
      auto left = slice_cols(h, 0, 2);
      auto right = slice_cols(h, 2, h.shape()[1] - 2);
      auto joined = concat_cols({left, right});
      auto stacked = concat_rows({joined, scale(joined, 0.5)});
      loss = add(sum_all(mul(stacked, stacked)), mean_all(t));
      break;
    }
    case 3: {
      auto q = l2_normalize(row(matmul(X, W1), 0));
      auto d = l2_normalize(row(matmul(X, W1), 1));
      auto pooled = max_over_rows(gelu(matmul(X, W2)));
      loss = add(dot(q, d), mean_all(reshape(pooled, {1, pooled.shape()[0]})));
      break;
    }
    default: {
      auto rows = stack_rows({row(X, 0), row(X, 1), row(X, 2)});
      auto h = layer_norm_rows(matmul(rows, W1), gamma, beta);
      loss = sub(sum_all(h), scale(mean_all(mul(h, h)), 2.0));
      break;
    }
  }
  if (loss_out) *loss_out = loss;
  return loss.item();
}

}  // namespace

TEST_CASE("analytic gradients match central finite differences on 20+ graphs") {
  std::size_t total_checked = 0;
  for (int seed = 0; seed < 24; ++seed) {
    Rng rng(1000 + seed);
    const std::size_t m = 4, k = 4, n = 4;
    std::vector<std::pair<std::string, Tensor>> leaves;
    leaves.emplace_back("X", make_randn({m, k}, rng));
    leaves.emplace_back("W1", make_randn({k, n}, rng, true, 0.7));
    leaves.emplace_back("b1", make_randn({n}, rng, true, 0.3));
    leaves.emplace_back("W2", make_randn({n, 3 + k}, rng, true, 0.7));
    leaves.emplace_back("gamma", make_randn({n}, rng, true, 0.2));
    leaves.emplace_back("beta", make_randn({n}, rng, true, 0.2));
    // keep gamma away from zero so layer-norm gradients are well conditioned
    for (auto v : leaves[4].second.mutable_data()) (void)v;
    {
      auto g = leaves[4].second.mutable_data();
      for (auto& v : g) v += 1.0;
    }

    const int which = seed % 5;
    Tensor loss;
    run_builder(which, leaves, &loss);
    backward(loss);

    auto value = [&]() {
      return run_builder(which, leaves, nullptr);
    };
    auto report = oracles::check_gradients(leaves, value, rng, 1e-4, 6);
    CAPTURE(seed);
    CAPTURE(report.worst_at);
    CHECK(report.failures == 0);
    total_checked += report.checked;
  }
  CHECK(total_checked > 400);
}

TEST_CASE("embedding lookup scatters gradients into the table") {
  auto table = Tensor::from_data({3, 2}, {1, 2, 3, 4, 5, 6}, true);
  auto out = embedding_rows(table, {2, 0, 2});
  CHECK(out.data()[0] == 5.0);
  auto loss = sum_all(out);
  backward(loss);
  CHECK(table.grad()[0] == doctest::Approx(1.0));  // row 0 hit once
  CHECK(table.grad()[2] == doctest::Approx(0.0));  // row 1 never
  CHECK(table.grad()[4] == doctest::Approx(2.0));  // row 2 hit twice
}

TEST_CASE("embedding lookup rejects out-of-range ids") {
  auto table = Tensor::zeros({3, 2});
  CHECK_THROWS_AS(embedding_rows(table, {3}), Error);
}

TEST_CASE("adamw first step matches the hand-evaluated recurrence") {
  ParamSet params;
  params.add("p", Tensor::from_data({1}, {1.0}, true));
  auto& p = params.at("p");
  p.zero_grad();
  p.node()->grad[0] = 1.0;

  AdamW opt(params, AdamWConfig{});
  opt.step(params, 0.1);
  // mhat = vhat = 1 at step 1, so p = 1 - 0.1 / (1 + 1e-8)
  CHECK(p.data()[0] == doctest::Approx(1.0 - 0.1 / (1.0 + 1e-8)).epsilon(1e-12));
  CHECK(opt.step_count() == 1);
}

TEST_CASE("adamw leaves parameters unchanged under zero gradients") {
  ParamSet params;
  params.add("w", Tensor::from_data({3}, {0.5, -0.25, 2.0}, true));
  params.zero_grad();
  AdamW opt(params, AdamWConfig{});
  opt.step(params, 0.05);
  CHECK(params.at("w").data()[0] == 0.5);
  CHECK(params.at("w").data()[1] == -0.25);
  CHECK(params.at("w").data()[2] == 2.0);
}

TEST_CASE("adamw errors on a missing gradient, naming the parameter") {
  ParamSet params;
  params.add("w", Tensor::from_data({2}, {1.0, 1.0}, true));
  params.at("w").node()->grad.clear();
  AdamW opt(params, AdamWConfig{});
  try {
    opt.step(params, 0.1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("w") != std::string::npos);
  }
}

namespace {

std::vector<double> run_training(std::uint64_t seed, int steps) {
  Rng rng(seed);
  ParamSet params;
  params.add("W", make_randn({4, 4}, rng, true, 0.5));
  params.add("b", make_randn({4}, rng, true, 0.1));
  AdamW opt(params, AdamWConfig{});
  for (int s = 0; s < steps; ++s) {
    params.zero_grad();
    auto x = make_randn({4, 4}, rng, false);
    auto loss = mean_all(mul(add_rowwise(matmul(x, params.at("W")), params.at("b")),
                             x));
    backward(loss);
    opt.step(params, 1e-2);
  }
  std::vector<double> out;
  for (const auto& [name, t] : params.items()) {
    out.insert(out.end(), t.data().begin(), t.data().end());
  }
  return out;
}

}  // namespace

TEST_CASE("optimization is bit-identical across reruns with the same seed") {
  auto a = run_training(42, 25);
  auto b = run_training(42, 25);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("warmup schedule shape") {
  WarmupSchedule s{5e-5, 1000, 2000};
  CHECK(lr_at(s, 0) == 0.0);
  CHECK(lr_at(s, 1000) == doctest::Approx(5e-5).epsilon(1e-15));
  CHECK(lr_at(s, 1500) == doctest::Approx(2.5e-5).epsilon(1e-12));
  CHECK(lr_at(s, 2000) == doctest::Approx(0.0));
  CHECK_THROWS_AS(lr_at(s, 2001), Error);
  CHECK_THROWS_AS(lr_at(s, -1), Error);
}

TEST_CASE("tensor file round trip is bit exact") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "embedkit_test_ckpt";
  fs::create_directories(dir);
  auto path = dir / "roundtrip.ektf";

  Rng rng(5);
  TensorMap m;
  m["alpha"] = {{2, 3}, {1.0f, -2.5f, 3.25f, 0.0f, 1e-7f, -1e7f}};
  std::vector<double> big(64);
  for (auto& v : big) v = double(float(rng.normal()));
  m["beta/weights"] = {{8, 8}, big};

  save_tensor_file(path, m, Dtype::f32);
  auto loaded = load_tensor_file(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded["alpha"].shape == Shape{2, 3});
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(loaded["alpha"].values[i] == m["alpha"].values[i]);
  }
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(loaded["beta/weights"].values[i] == big[i]);
  }

  // A second save of the loaded map reproduces the file byte for byte.
  auto path2 = dir / "roundtrip2.ektf";
  save_tensor_file(path2, loaded, Dtype::f32);
  CHECK(read_file(path) == read_file(path2));
  fs::remove_all(dir);
}

TEST_CASE("restored adamw state continues bit-identically") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "embedkit_test_opt";
  fs::create_directories(dir);
  auto path = dir / "opt.state";

  auto make_params = [](ParamSet& params, Rng& rng) {
    params.add("W", make_randn({3, 3}, rng, true, 0.5));
  };
  auto do_step = [](ParamSet& params, AdamW& opt, Rng& rng) {
    params.zero_grad();
    auto x = make_randn({3, 3}, rng, false);
    auto loss = sum_all(mul(matmul(x, params.at("W")), x));
    backward(loss);
    opt.step(params, 1e-3);
  };

  // Continuous run
  Rng rng1(9);
  ParamSet p1;
  make_params(p1, rng1);
  AdamW o1(p1, AdamWConfig{});
  for (int i = 0; i < 10; ++i) do_step(p1, o1, rng1);

  // Interrupted run: save at step 5, restore into a fresh optimizer
  Rng rng2(9);
  ParamSet p2;
  make_params(p2, rng2);
  AdamW o2(p2, AdamWConfig{});
  for (int i = 0; i < 5; ++i) do_step(p2, o2, rng2);
  o2.save_state(path);
  AdamW o3(p2, AdamWConfig{});
  o3.load_state(path, p2);
  CHECK(o3.step_count() == 5);
  for (int i = 0; i < 5; ++i) do_step(p2, o3, rng2);

  for (std::size_t i = 0; i < p1.at("W").numel(); ++i) {
    CHECK(p1.at("W").data()[i] == p2.at("W").data()[i]);
  }
  fs::remove_all(dir);
}

TEST_CASE("f32 mode quantizes op outputs") {
  set_precision(Precision::f32);
  auto x = Tensor::from_data({2}, {1.0 / 3.0, 2.0 / 3.0});
  for (double v : x.data()) CHECK(v == double(float(v)));
  auto y = scale(x, 1.0 / 7.0);
  for (double v : y.data()) CHECK(v == double(float(v)));
  set_precision(Precision::f64);
}
