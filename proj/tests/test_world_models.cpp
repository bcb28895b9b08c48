#include <doctest.h>

#include <cmath>

#include "homeo/errors.hpp"
#include "homeo/world_models.hpp"

using namespace homeo;

namespace {

std::vector<ModelSample> corpus(Rng& rng, const RoomLayout& layout, int n) {
  std::vector<ModelSample> out;
  for (int i = 0; i < n; ++i) {
    const Point s = reset(layout, StartStrategy::UniformAnywhere, rng);
    const ActionVec a = random_action(rng);
    const Point next = step(layout, s, a).next;
    // Policy-consistent successor action that depends on where the agent landed.
    const ActionVec a_next = clamp_action(next.x / 4.0 - 5.0, next.y / 4.0 - 5.0);
    out.push_back({s, a, a_next, next});
  }
  return out;
}

std::vector<ModelSample> minibatch(Rng& rng, const std::vector<ModelSample>& data, int n) {
  std::vector<ModelSample> out;
  for (int i = 0; i < n; ++i) out.push_back(data[rng.below(data.size())]);
  return out;
}

}  // namespace

TEST_CASE("encoding widths and normalization map") {
  CHECK(ForwardModel::encode({0, 40}, {10, -10}).size() == 4);
  const Eigen::VectorXd k = ExtendedForwardModel::encode({20, 0}, {5, 0}, {0, -5});
  REQUIRE(k.size() == 6);
  CHECK(k(0) == 0.0);
  CHECK(k(1) == -1.0);
  CHECK(k(2) == 0.5);
  CHECK(k(5) == -0.5);
  CHECK(decode_coord(encode_coord(13.7)) == doctest::Approx(13.7));

  Rng rng(1);
  const ForwardModel f = ForwardModel::create(rng);
  const Point s{12, 31}, p = f.predict(s, {1, 2});
  const Eigen::VectorXd raw = f.net().predict(ForwardModel::encode(s, {1, 2}));
  CHECK(p.x == (raw(0) + 1.0) * 20.0);
  CHECK(p.y == (raw(1) + 1.0) * 20.0);
}

TEST_CASE("predictions are finite and pure") {
  Rng rng(2);
  const ForwardModel f = ForwardModel::create(rng);
  const ExtendedForwardModel k = ExtendedForwardModel::create(rng);
  const Point s{3, 4};
  const ActionVec a{1, -1}, b{0, 2};
  CHECK(std::isfinite(f.predict(s, a).x));
  CHECK(f.predict(s, a) == f.predict(s, a));
  CHECK(k.predict(s, a, b) == k.predict(s, a, b));
}

TEST_CASE("forward model learns the identity under zero actions") {
  Rng rng(3);
  ForwardModel f = ForwardModel::create(rng, AdamConfig{1e-3});
  const RoomLayout layout = RoomLayout::three_rooms();
  for (int it = 0; it < 3000; ++it) {
    std::vector<ModelSample> batch;
    for (int j = 0; j < 64; ++j) {
      const Point s = reset(layout, StartStrategy::UniformAnywhere, rng);
      batch.push_back({s, {0, 0}, {0, 0}, s});
    }
    f.train_step(batch);
  }
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Point s = reset(layout, StartStrategy::UniformAnywhere, rng);
    worst = std::max(worst, distance(f.predict(s, {0, 0}), s));
  }
  CHECK(worst < 0.5);
}

TEST_CASE("train_step reports pre-update loss and respects the learning rate") {
  Rng rng(4);
  const ModelSample sample{{10, 30}, {3, -2}, {1, 1}, {13, 28}};
  const std::vector<ModelSample> repeated(64, sample);

  SUBCASE("overfitting one sample drives the loss down") {
    ForwardModel f = ForwardModel::create(rng);
    ExtendedForwardModel k = ExtendedForwardModel::create(rng);
    const double f0 = f.train_step(repeated);
    const double k0 = k.train_step(repeated);
    double f_last = f0, k_last = k0;
    for (int i = 0; i < 100; ++i) {
      f_last = f.train_step(repeated);
      k_last = k.train_step(repeated);
    }
    CHECK(f_last < f0);
    CHECK(k_last < k0);
    CHECK(f_last < 1e-3);
    CHECK(k_last < 1e-3);
  }
  SUBCASE("zero learning rate") {
    ForwardModel f = ForwardModel::create(rng, AdamConfig{0.0});
    const DenseNet before = f.net();
    const double loss = f.train_step(repeated);
    CHECK(loss > 0.0);
    CHECK(f.net() == before);
    CHECK(f.train_step(repeated) == loss);
  }
  SUBCASE("a perfect predictor has zero loss") {
    // Linear 4 -> 2 net copying the encoded position: exact when a = 0 and no wall is hit.
    DenseNet net = DenseNet::zeros({4, 2}, Activation::Linear, Activation::Linear);
    net.layers()[0].weights(0, 0) = 1.0;
    net.layers()[0].weights(1, 1) = 1.0;
    ForwardModel f(std::move(net), AdamConfig{});
    const std::vector<ModelSample> still(8, ModelSample{{5, 6}, {0, 0}, {0, 0}, {5, 6}});
    CHECK(f.train_step(still) == 0.0);
  }
  SUBCASE("empty batch is a contract violation") {
    ForwardModel f = ForwardModel::create(rng);
    CHECK_THROWS_AS(f.train_step({}), ContractViolation);
  }
}

TEST_CASE("extended model beats the forward model when the next action is informative") {
  Rng rng(5);
  const RoomLayout layout = RoomLayout::three_rooms();
  const auto train = corpus(rng, layout, 4000);
  const auto held_out = corpus(rng, layout, 1000);
  ForwardModel f = ForwardModel::create(rng);
  ExtendedForwardModel k = ExtendedForwardModel::create(rng);
  for (int it = 0; it < 2000; ++it) {
    const auto batch = minibatch(rng, train, 64);
    f.train_step(batch);
    k.train_step(batch);
  }
  double ef = 0.0, ek = 0.0;
  for (const auto& m : held_out) {
    ef += distance(m.s_next, f.predict(m.s, m.a));
    ek += distance(m.s_next, k.predict(m.s, m.a, m.next_action));
  }
  MESSAGE("mean held-out error f=" << ef / held_out.size() << " k=" << ek / held_out.size());
  CHECK(ek <= ef);
}

TEST_CASE("short training reduces loss on fixed datasets in most seeded trials") {
  const RoomLayout layout = RoomLayout::three_rooms();
  int improved = 0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng(1000 + trial);
    const auto data = corpus(rng, layout, 256);
    ForwardModel f = ForwardModel::create(rng, AdamConfig{1e-3});
    const std::vector<ModelSample> all(data.begin(), data.end());
    const double first = f.train_step(all);
    double last = first;
    for (int i = 1; i < 50; ++i) last = f.train_step(all);
    if (last < first) ++improved;
  }
  CHECK(improved >= 18);
}
