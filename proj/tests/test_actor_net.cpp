#include <doctest.h>

#include <cmath>

#include "lanegcn/actor_net.hpp"
#include "lanegcn/gradcheck.hpp"
#include "lanegcn/ops.hpp"
#include "oracles.hpp"

using namespace lanegcn;

namespace {

std::vector<std::optional<Vec2>> track_of(const std::vector<Vec2>& pts) {
  std::vector<std::optional<Vec2>> out;
  for (const Vec2& p : pts) out.emplace_back(p);
  return out;
}

}  // namespace

TEST_CASE("a stationary track encodes zero displacements and a full mask") {
  std::vector<Vec2> pts(20, Vec2{5, 5});
  auto input = encode_trajectory(track_of(pts));
  REQUIRE(input.has_value());
  const Tensor& t = input->tensor;
  REQUIRE(t.shape() == Shape{3, 20});
  for (long col = 0; col < 20; ++col) {
    CHECK(t.at(0, col) == 0.0);
    CHECK(t.at(1, col) == 0.0);
    CHECK(t.at(2, col) == 1.0);
  }
  CHECK(input->position.x == 5.0);
}

TEST_CASE("constant velocity fills the displacement row after the first step") {
  std::vector<Vec2> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({static_cast<double>(i), 0.0});
  auto input = encode_trajectory(track_of(pts));
  REQUIRE(input.has_value());
  const Tensor& t = input->tensor;
  CHECK(t.at(0, 0) == 0.0);  // the earliest step has no predecessor
  for (long col = 1; col < 20; ++col) {
    CHECK(t.at(0, col) == 1.0);
    CHECK(t.at(1, col) == 0.0);
  }
}

TEST_CASE("short histories are front padded") {
  std::vector<Vec2> pts;
  for (int i = 0; i < 5; ++i) pts.push_back({static_cast<double>(i), 1.0});
  auto input = encode_trajectory(track_of(pts));
  REQUIRE(input.has_value());
  const Tensor& t = input->tensor;
  for (long col = 0; col < 15; ++col) {
    CHECK(t.at(2, col) == 0.0);
    CHECK(t.at(0, col) == 0.0);
  }
  for (long col = 15; col < 20; ++col) CHECK(t.at(2, col) == 1.0);
  CHECK(t.at(0, 15) == 0.0);
  CHECK(t.at(0, 16) == 1.0);
}

TEST_CASE("tracks with under two usable points are rejected") {
  CHECK_FALSE(encode_trajectory({}).has_value());
  CHECK_FALSE(encode_trajectory(track_of({{1, 1}})).has_value());
  // A gap right before the latest point leaves a one-point run.
  std::vector<std::optional<Vec2>> gap = {Vec2{0, 0}, std::nullopt, Vec2{2, 0}};
  CHECK_FALSE(encode_trajectory(gap).has_value());
  // Missing latest observation.
  std::vector<std::optional<Vec2>> tail = {Vec2{0, 0}, Vec2{1, 0}, std::nullopt};
  CHECK_FALSE(encode_trajectory(tail).has_value());
}

TEST_CASE("a gap only truncates the usable run") {
  std::vector<std::optional<Vec2>> obs(20, std::nullopt);
  obs[4] = Vec2{100, 0};  // disconnected early observation
  for (int i = 10; i < 20; ++i) obs[i] = Vec2{static_cast<double>(i), 0};
  auto input = encode_trajectory(obs);
  REQUIRE(input.has_value());
  const Tensor& t = input->tensor;
  for (long col = 0; col < 10; ++col) CHECK(t.at(2, col) == 0.0);
  for (long col = 10; col < 20; ++col) CHECK(t.at(2, col) == 1.0);
}

TEST_CASE("zero parameters produce zero actor features") {
  ParameterStore store(1);
  ActorNet net(store, "net", ActorNetConfig{8, 3, 2, 20});
  for (const auto& [name, t] : store.entries()) {
    Tensor handle = t;
    std::fill(handle.mutable_data(), handle.mutable_data() + handle.size(),
              0.0);
  }
  std::vector<Vec2> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({0.5 * i, 0.1 * i});
  auto input = encode_trajectory(track_of(pts));
  Tensor feats = net.forward({*input, *input});
  REQUIRE(feats.shape() == Shape{2, 8});
  for (long i = 0; i < feats.size(); ++i) CHECK(feats.at(i) == 0.0);
}

TEST_CASE("identical actors produce identical feature rows") {
  ParameterStore store(2);
  ActorNet net(store, "net", ActorNetConfig{8, 3, 2, 20});
  oracle::Rng rng(5);
  std::vector<Vec2> pts;
  Vec2 p{0, 0};
  for (int i = 0; i < 20; ++i) {
    p = p + Vec2{rng.uniform(0, 2), rng.uniform(-1, 1)};
    pts.push_back(p);
  }
  auto input = encode_trajectory(track_of(pts));
  Tensor feats = net.forward({*input, *input});
  for (long c = 0; c < 8; ++c) {
    CHECK(feats.at(0, c) == feats.at(1, c));
  }
}

TEST_CASE("actors do not mix and batch order permutes rows") {
  ParameterStore store(3);
  ActorNet net(store, "net", ActorNetConfig{8, 3, 2, 20});
  oracle::Rng rng(7);
  std::vector<ActorInput> inputs;
  for (int a = 0; a < 3; ++a) {
    std::vector<Vec2> pts;
    Vec2 p{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    for (int i = 0; i < 20; ++i) {
      p = p + Vec2{rng.uniform(0, 2), rng.uniform(-1, 1)};
      pts.push_back(p);
    }
    inputs.push_back(*encode_trajectory(track_of(pts)));
  }
  Tensor abc = net.forward(inputs);
  Tensor cab = net.forward({inputs[2], inputs[0], inputs[1]});
  for (long c = 0; c < 8; ++c) {
    CHECK(abc.at(0, c) == cab.at(1, c));
    CHECK(abc.at(1, c) == cab.at(2, c));
    CHECK(abc.at(2, c) == cab.at(0, c));
  }
  // Single-actor run matches its batched row exactly.
  Tensor solo = net.forward({inputs[1]});
  for (long c = 0; c < 8; ++c) CHECK(solo.at(0, c) == abc.at(1, c));
}

TEST_CASE("feature extraction passes a finite-difference gradient check") {
  ParameterStore store(4);
  ActorNet net(store, "net", ActorNetConfig{4, 3, 2, 20});
  oracle::Rng rng(11);
  std::vector<Vec2> pts;
  Vec2 p{0, 0};
  for (int i = 0; i < 20; ++i) {
    p = p + Vec2{rng.uniform(0.5, 1.5), rng.uniform(-0.5, 0.5)};
    pts.push_back(p);
  }
  ActorInput input = *encode_trajectory(track_of(pts));
  Tensor target = rng.tensor({1, 4});
  auto loss = [&] {
    Tensor d = sub(net.forward({input}), target);
    return mean(matmul(d, transpose(d)));
  };
  GradCheckReport report = check_gradients(store.entries(), loss, 0, 1e-5, 3);
  INFO("worst: " << report.worst);
  CHECK(report.max_rel_error <= 1e-5);
}

TEST_CASE("stride-2 groups chain the temporal lengths 20 -> 10 -> 5 -> 3") {
  ParameterStore store(5);
  std::vector<long> lengths;
  long t = 20;
  long c_in = 3;
  for (int g = 0; g < 3; ++g) {
    Res1d first(store, "len.g" + std::to_string(g) + "a", c_in, 4, 2);
    Res1d second(store, "len.g" + std::to_string(g) + "b", 4, 4, 1);
    Tensor x = Tensor::zeros({c_in, t});
    Tensor y = second.forward(first.forward(x));
    t = y.dim(1);
    c_in = 4;
    lengths.push_back(t);
  }
  CHECK(lengths == std::vector<long>{10, 5, 3});
}
