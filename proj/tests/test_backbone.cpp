#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "adasparse/backbone.hpp"
#include "adasparse/rng.hpp"

using namespace adasparse;

namespace {

BackboneState random_net(std::size_t input, std::vector<std::int32_t> hidden,
                         std::uint64_t seed) {
  Rng rng(seed);
  return make_backbone(input, hidden, rng);
}

std::vector<Vec> ones_factors(const BackboneState& net) {
  std::vector<Vec> factors;
  for (std::size_t l = 0; l < net.gate_count(); ++l) {
    factors.emplace_back(net.gate_width(l), 1.0);
  }
  return factors;
}

}  // namespace

TEST_CASE("all-ones gating is bit-exact identity on forward") {
  const BackboneState net = random_net(6, {5, 3}, 101);
  const Vec e_d{0.3, -0.2, 0.9};
  const Vec e_a{0.1, 0.4, -0.8};
  const ForwardCache plain = backbone_forward(net, e_d, e_a);
  const ForwardCache gated = backbone_forward(net, e_d, e_a, ones_factors(net));
  CHECK(gated.logit == plain.logit);
  CHECK(gated.pctr == plain.pctr);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    CHECK(gated.gated[l] == plain.gated[l]);
  }
}

TEST_CASE("all-zero factors at the first gate annihilate the input") {
  BackboneState net = random_net(4, {3}, 7);
  net.biases[0] = {0.5, -0.25, 1.0};
  std::vector<Vec> factors = ones_factors(net);
  factors[0].assign(factors[0].size(), 0.0);

  const ForwardCache cache = backbone_forward(net, Vec{1.0, 2.0}, Vec{3.0, 4.0}, factors);
  // Layer 1's input is tanh(bias) exactly.
  for (std::size_t i = 0; i < net.biases[0].size(); ++i) {
    CHECK(cache.pre_gate[1][i] == std::tanh(net.biases[0][i]));
  }
}

TEST_CASE("one-layer forward matches a hand computation") {
  BackboneState net = random_net(2, {2}, 1);
  net.weights[0].data = {0.5, -1.0, 0.25, 0.75};  // 2x2
  net.biases[0] = {0.1, -0.2};
  net.weights[1].data = {2.0, -3.0};  // head 1x2
  net.biases[1] = {0.05};

  const Vec e_d{0.4};
  const Vec e_a{-0.6};
  const ForwardCache cache = backbone_forward(net, e_d, e_a);

  const double h1 = std::tanh(0.5 * 0.4 + (-1.0) * (-0.6) + 0.1);
  const double h2 = std::tanh(0.25 * 0.4 + 0.75 * (-0.6) + (-0.2));
  const double logit = 2.0 * h1 - 3.0 * h2 + 0.05;
  CHECK(cache.logit == doctest::Approx(logit).epsilon(1e-12));
  CHECK(cache.pctr == doctest::Approx(1.0 / (1.0 + std::exp(-logit))).epsilon(1e-12));
}

TEST_CASE("zero upstream gradient yields zero grads") {
  const BackboneState net = random_net(4, {3}, 21);
  ForwardCache cache = backbone_forward(net, Vec{1.0, 2.0}, Vec{0.5, -0.5});
  const BackboneGrads grads = backbone_backward(net, cache, 0.0, 2);
  for (const Matrix& dw : grads.d_weights) {
    for (double x : dw.data) CHECK(x == 0.0);
  }
  for (const Vec& db : grads.d_biases) {
    for (double x : db) CHECK(x == 0.0);
  }
  for (double x : grads.d_e_d) CHECK(x == 0.0);
  for (double x : grads.d_e_a) CHECK(x == 0.0);
}

TEST_CASE("all-ones gating is transparent to the backward pass") {
  const BackboneState net = random_net(5, {4, 3}, 33);
  const Vec e_d{0.2, -0.1};
  const Vec e_a{0.7, 0.3, -0.9};

  ForwardCache plain = backbone_forward(net, e_d, e_a);
  ForwardCache gated = backbone_forward(net, e_d, e_a, ones_factors(net));
  const BackboneGrads g_plain = backbone_backward(net, plain, 1.25, e_d.size());
  const BackboneGrads g_gated = backbone_backward(net, gated, 1.25, e_d.size());

  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    CHECK(g_plain.d_weights[l].data == g_gated.d_weights[l].data);
    CHECK(g_plain.d_biases[l] == g_gated.d_biases[l]);
  }
  CHECK(g_plain.d_e_d == g_gated.d_e_d);
  CHECK(g_plain.d_e_a == g_gated.d_e_a);
}

TEST_CASE("zeroed neurons get no input gradient through the gate") {
  const BackboneState net = random_net(4, {3}, 55);
  std::vector<Vec> factors = ones_factors(net);
  factors[0][1] = 0.0;  // prune one input neuron

  ForwardCache cache = backbone_forward(net, Vec{1.0, -1.0}, Vec{0.5, 0.25}, factors);
  const BackboneGrads grads = backbone_backward(net, cache, 1.0, 2);
  CHECK(grads.d_e_d[1] == 0.0);
  CHECK(grads.d_e_d[0] != 0.0);
}

TEST_CASE("backbone gradients match finite differences") {
  BackboneState net = random_net(5, {4, 3}, 77);
  const Vec e_d{0.3, -0.4};
  const Vec e_a{0.8, -0.2, 0.6};
  Rng rng(78);
  std::vector<Vec> factors;
  for (std::size_t l = 0; l < net.gate_count(); ++l) {
    Vec f(net.gate_width(l));
    for (auto& x : f) x = rng.uniform(0.2, 1.5);
    factors.push_back(f);
  }

  for (const bool use_gates : {false, true}) {
    std::span<const Vec> fspan =
        use_gates ? std::span<const Vec>(factors) : std::span<const Vec>{};
    ForwardCache cache = backbone_forward(net, e_d, e_a, fspan);
    const BackboneGrads analytic = backbone_backward(net, cache, 1.0, e_d.size());

    std::vector<ParamCheck> params;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
      params.push_back({std::span<double>(net.weights[l].data),
                        std::span<const double>(analytic.d_weights[l].data)});
      params.push_back({std::span<double>(net.biases[l]),
                        std::span<const double>(analytic.d_biases[l])});
    }
    const double err = grad_check(
        [&] { return backbone_forward(net, e_d, e_a, fspan).logit; }, params, 1e-6);
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("factor gradients from the backward pass match finite differences") {
  BackboneState net = random_net(4, {3}, 99);
  const Vec e_d{0.5};
  const Vec e_a{-0.3, 0.2, 0.9};
  Rng rng(100);
  std::vector<Vec> factors;
  for (std::size_t l = 0; l < net.gate_count(); ++l) {
    Vec f(net.gate_width(l));
    for (auto& x : f) x = rng.uniform(0.2, 1.5);
    factors.push_back(f);
  }

  ForwardCache cache = backbone_forward(net, e_d, e_a, factors);
  const BackboneGrads analytic = backbone_backward(net, cache, 1.0, e_d.size());

  std::vector<ParamCheck> params;
  for (std::size_t l = 0; l < factors.size(); ++l) {
    params.push_back({std::span<double>(factors[l]),
                      std::span<const double>(analytic.d_factors[l])});
  }
  const double err = grad_check(
      [&] { return backbone_forward(net, e_d, e_a, factors).logit; }, params, 1e-6);
  CHECK(err <= 1e-4);
}

TEST_CASE("shape and state errors") {
  const BackboneState net = random_net(4, {3}, 5);
  CHECK_THROWS_AS(backbone_forward(net, Vec{1.0}, Vec{1.0}), ShapeError);

  std::vector<Vec> bad_factors{{1.0}, {1.0, 1.0, 1.0}};
  CHECK_THROWS_AS(backbone_forward(net, Vec{1.0, 2.0}, Vec{3.0, 4.0}, bad_factors),
                  ShapeError);

  ForwardCache cache = backbone_forward(net, Vec{1.0, 2.0}, Vec{3.0, 4.0});
  backbone_backward(net, cache, 1.0, 2);
  CHECK_THROWS_AS(backbone_backward(net, cache, 1.0, 2), StateError);
}
