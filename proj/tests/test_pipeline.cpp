#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lanegcn/checkpoint.hpp"
#include "lanegcn/metrics.hpp"
#include "lanegcn/model.hpp"
#include "lanegcn/normalize.hpp"
#include "lanegcn/scenario.hpp"
#include "lanegcn/synth.hpp"
#include "lanegcn/train.hpp"
#include "oracles.hpp"

using namespace lanegcn;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = (std::filesystem::temp_directory_path() / name).string();
  }
  ~TempFile() { std::remove(path.c_str()); }
};

bool same_point(const Vec2& a, const Vec2& b, double tol = 0.0) {
  return std::fabs(a.x - b.x) <= tol && std::fabs(a.y - b.y) <= tol;
}

}  // namespace

TEST_CASE("an empty scenario file loads as an empty corpus") {
  TempFile f("lanegcn_empty.jsonl");
  std::ofstream(f.path).close();
  CHECK(load_scenarios(f.path).empty());
}

TEST_CASE("scenario records survive a save/load round trip") {
  SynthSpec spec;
  spec.count = 4;
  spec.seed = 99;
  spec.topology = Topology::kFork;
  std::vector<Scenario> corpus = synth_corpus(spec);

  TempFile f("lanegcn_roundtrip.jsonl");
  save_scenarios(f.path, corpus);
  std::vector<Scenario> loaded = load_scenarios(f.path);
  REQUIRE(loaded.size() == corpus.size());
  for (size_t i = 0; i < corpus.size(); ++i) {
    const Scenario& a = corpus[i];
    const Scenario& b = loaded[i];
    CHECK(a.id == b.id);
    CHECK(a.agent_id == b.agent_id);
    REQUIRE(a.actors.size() == b.actors.size());
    for (size_t j = 0; j < a.actors.size(); ++j) {
      CHECK(a.actors[j].id == b.actors[j].id);
      REQUIRE(a.actors[j].observed.size() == b.actors[j].observed.size());
      for (size_t t = 0; t < a.actors[j].observed.size(); ++t) {
        CHECK(a.actors[j].observed[t].has_value() ==
              b.actors[j].observed[t].has_value());
        if (a.actors[j].observed[t]) {
          CHECK(same_point(*a.actors[j].observed[t], *b.actors[j].observed[t]));
        }
      }
    }
    REQUIRE(a.lanes.size() == b.lanes.size());
    for (size_t l = 0; l < a.lanes.size(); ++l) {
      CHECK(a.lanes[l].id == b.lanes[l].id);
      CHECK(a.lanes[l].left == b.lanes[l].left);
      CHECK(a.lanes[l].right == b.lanes[l].right);
      CHECK(a.lanes[l].predecessors == b.lanes[l].predecessors);
      CHECK(a.lanes[l].successors == b.lanes[l].successors);
      REQUIRE(a.lanes[l].centerline.size() == b.lanes[l].centerline.size());
      for (size_t p = 0; p < a.lanes[l].centerline.size(); ++p) {
        CHECK(same_point(a.lanes[l].centerline[p], b.lanes[l].centerline[p]));
      }
    }
    REQUIRE(a.futures.size() == b.futures.size());
    for (const auto& [id, traj] : a.futures) {
      REQUIRE(b.futures.count(id) == 1);
      for (size_t t = 0; t < traj.size(); ++t) {
        CHECK(same_point(traj[t], b.futures.at(id)[t]));
      }
    }
  }
}

TEST_CASE("a hand-written fixture parses to known counts") {
  TempFile f("lanegcn_fixture.jsonl");
  {
    std::ofstream out(f.path);
    out << R"({"id":"fx","agent_id":"a0","actors":[)"
        << R"({"id":"a0","observed":[null,null,null,null,null,null,null,null,null,null,null,null,null,null,null,null,null,null,[0,0],[1,0]]},)"
        << R"({"id":"a1","observed":[null,null,null,null,null,null,null,null,null,null,null,null,null,null,null,null,null,null,null,[5,5]]}],)"
        << R"("map":{"lanes":[)"
        << R"({"id":"l0","centerline":[[0,0],[2,0],[4,0]],"predecessors":[],"successors":["l1"],"left":null,"right":null},)"
        << R"({"id":"l1","centerline":[[4,0],[6,0]],"predecessors":["l0"],"successors":[],"left":null,"right":null}]}})"
        << "\n";
  }
  std::vector<Scenario> loaded = load_scenarios(f.path);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].actors.size() == 2);
  CHECK(loaded[0].lanes.size() == 2);
  LaneGraph g = build_lane_graph(loaded[0].lanes);
  CHECK(g.num_nodes() == 3);  // 2 segments + 1 segment
  CHECK(g.adj(AdjType::kSuc).nnz() == 2);
}

TEST_CASE("malformed records report the line and field") {
  TempFile f("lanegcn_bad.jsonl");
  {
    std::ofstream out(f.path);
    out << R"({"id":"ok","agent_id":"a","actors":[],"map":{"lanes":[]}})" << "\n";
    out << R"({"id":"bad","agent_id":"a","actors":[{"id":"a","observed":[[1,2]]}],"map":{"lanes":[]}})"
        << "\n";
  }
  CHECK_THROWS_WITH_AS(load_scenarios(f.path), doctest::Contains(":2:"),
                       ParseError);
  CHECK_THROWS_WITH_AS(load_scenarios(f.path), doctest::Contains("observed"),
                       ParseError);
}

namespace {

Scenario simple_scenario(Vec2 agent_end, Vec2 heading_step) {
  Scenario s;
  s.id = "simple";
  s.agent_id = "a";
  ActorTrack agent;
  agent.id = "a";
  for (int t = 0; t < kHistorySteps; ++t) {
    const double back = static_cast<double>(kHistorySteps - 1 - t);
    agent.observed.push_back(
        Vec2{agent_end.x - heading_step.x * back,
             agent_end.y - heading_step.y * back});
  }
  s.actors.push_back(agent);
  Lane lane;
  lane.id = "l";
  for (int i = 0; i < 6; ++i) {
    lane.centerline.push_back({agent_end.x + 2.0 * i, agent_end.y});
  }
  s.lanes.push_back(lane);
  std::vector<Vec2> future;
  for (int t = 1; t <= kFutureSteps; ++t) {
    future.push_back({agent_end.x + heading_step.x * t,
                      agent_end.y + heading_step.y * t});
  }
  s.futures["a"] = future;
  return s;
}

}  // namespace

TEST_CASE("normalization centers the agent and aligns its heading") {
  Scenario s = simple_scenario({10, 5}, {0.5, 0.5});
  NormalizedScenario norm = normalize(s);
  const ActorTrack* agent = norm.scenario.find_actor("a");
  REQUIRE(agent != nullptr);
  CHECK(same_point(*agent->observed.back(), {0, 0}, 1e-12));
  // Previous step lies behind the origin on the x axis.
  CHECK((*agent->observed[kHistorySteps - 2]).x ==
        doctest::Approx(-std::hypot(0.5, 0.5)).epsilon(1e-12));
  CHECK(std::fabs((*agent->observed[kHistorySteps - 2]).y) < 1e-12);
  // Rotation is orthonormal with determinant +1.
  const Rot2 r = norm.frame.rotation;
  CHECK(r.c * r.c + r.s * r.s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("an axis-aligned heading keeps lateral offsets") {
  Scenario s = simple_scenario({0, 0}, {1, 0});
  s.lanes[0].centerline = {{0, 1}, {2, 1}, {4, 1}};
  NormalizedScenario norm = normalize(s);
  CHECK(same_point(norm.scenario.lanes[0].centerline[0], {0, 1}, 1e-12));
}

TEST_CASE("a stationary agent falls back to the identity rotation") {
  Scenario s = simple_scenario({3, 4}, {0, 0});
  NormalizedScenario norm = normalize(s);
  CHECK(norm.frame.rotation.c == 1.0);
  CHECK(norm.frame.rotation.s == 0.0);
  const ActorTrack* agent = norm.scenario.find_actor("a");
  CHECK(same_point(*agent->observed.back(), {0, 0}, 1e-12));
}

TEST_CASE("normalization is invariant under rigid transforms of the world") {
  SynthSpec spec;
  spec.count = 6;
  spec.seed = 5;
  spec.topology = Topology::kFork;
  std::vector<Scenario> corpus = synth_corpus(spec);
  const Rot2 rot = Rot2::from_angle(0.73);
  const Vec2 shift{-210.0, 45.0};

  for (const Scenario& s : corpus) {
    Scenario moved = s;
    auto map_point = [&](const Vec2& p) { return rot.to_world(p) + shift; };
    for (ActorTrack& a : moved.actors) {
      for (auto& o : a.observed) {
        if (o) o = map_point(*o);
      }
    }
    for (Lane& l : moved.lanes) {
      for (Vec2& p : l.centerline) p = map_point(p);
    }
    for (auto& [id, fut] : moved.futures) {
      for (Vec2& p : fut) p = map_point(p);
    }
    NormalizedScenario a = normalize(s);
    NormalizedScenario b = normalize(moved);
    REQUIRE(a.scenario.actors.size() == b.scenario.actors.size());
    for (size_t i = 0; i < a.scenario.actors.size(); ++i) {
      for (size_t t = 0; t < a.scenario.actors[i].observed.size(); ++t) {
        const auto& pa = a.scenario.actors[i].observed[t];
        const auto& pb = b.scenario.actors[i].observed[t];
        REQUIRE(pa.has_value() == pb.has_value());
        if (pa) CHECK(same_point(*pa, *pb, 1e-9));
      }
    }
    REQUIRE(a.scenario.lanes.size() == b.scenario.lanes.size());
    for (size_t l = 0; l < a.scenario.lanes.size(); ++l) {
      for (size_t p = 0; p < a.scenario.lanes[l].centerline.size(); ++p) {
        CHECK(same_point(a.scenario.lanes[l].centerline[p],
                         b.scenario.lanes[l].centerline[p], 1e-9));
      }
    }
  }
}

TEST_CASE("normalization drops far actors and lanes and prunes references") {
  Scenario s = simple_scenario({0, 0}, {1, 0});
  ActorTrack far;
  far.id = "far";
  far.observed.assign(kHistorySteps, std::nullopt);
  far.observed[18] = Vec2{150, 0};
  far.observed[19] = Vec2{151, 0};
  s.actors.push_back(far);
  Lane distant;
  distant.id = "distant";
  distant.centerline = {{200, 0}, {202, 0}};
  s.lanes[0].successors.push_back("distant");
  distant.predecessors.push_back("l");
  s.lanes.push_back(distant);

  NormalizedScenario norm = normalize(s);
  CHECK(norm.scenario.find_actor("far") == nullptr);
  CHECK(norm.scenario.lanes.size() == 1);
  CHECK(norm.scenario.lanes[0].successors.empty());
  // The pruned map still builds.
  build_lane_graph(norm.scenario.lanes);
}

TEST_CASE("denormalization inverts normalization to round-trip precision") {
  Scenario s = simple_scenario({12, -7}, {0.8, -0.3});
  NormalizedScenario norm = normalize(s);
  AgentForecast f;
  f.scenario_id = "simple";
  oracle::Rng rng(61);
  for (int k = 0; k < 3; ++k) {
    std::vector<Vec2> traj;
    for (int t = 0; t < kFutureSteps; ++t) {
      traj.push_back({rng.uniform(-40, 40), rng.uniform(-40, 40)});
    }
    f.trajectories.push_back(traj);
    f.scores.push_back(rng.uniform(-1, 1));
  }
  AgentForecast world = denormalize_forecast(f, norm.frame);
  // Map world back into the frame.
  for (size_t k = 0; k < f.trajectories.size(); ++k) {
    for (int t = 0; t < kFutureSteps; ++t) {
      const Vec2 back = norm.frame.to_frame(world.trajectories[k][t]);
      CHECK(same_point(back, f.trajectories[k][t], 1e-9));
    }
  }
}

TEST_CASE("straight corpora advance the agent at its sampled speed") {
  SynthSpec spec;
  spec.count = 5;
  spec.seed = 11;
  spec.speed_min = 10.0;
  spec.speed_max = 10.0;
  std::vector<Scenario> corpus = synth_corpus(spec);
  for (const Scenario& s : corpus) {
    const auto& future = s.futures.at("agent");
    REQUIRE(future.size() == kFutureSteps);
    for (size_t t = 1; t < future.size(); ++t) {
      CHECK(distance(future[t], future[t - 1]) ==
            doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("generation is reproducible for a fixed seed") {
  SynthSpec spec;
  spec.count = 8;
  spec.seed = 321;
  spec.topology = Topology::kMerge;
  std::vector<Scenario> a = synth_corpus(spec);
  std::vector<Scenario> b = synth_corpus(spec);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(scenario_to_json(a[i]) == scenario_to_json(b[i]));
  }
}

TEST_CASE("fork corpora realize both branches about evenly") {
  SynthSpec spec;
  spec.count = 1000;
  spec.seed = 7;
  spec.topology = Topology::kFork;
  std::vector<SynthScenario> corpus = synth_scenarios(spec);
  long turns = 0;
  for (const SynthScenario& s : corpus) {
    REQUIRE(s.agent_alternatives.size() == 2);
    const auto& realized = s.scenario.futures.at("agent");
    // Which alternative matches the realized future?
    const double d_keep = distance(realized.back(),
                                   s.agent_alternatives[0].back());
    const double d_turn = distance(realized.back(),
                                   s.agent_alternatives[1].back());
    REQUIRE(std::min(d_keep, d_turn) < 1e-9);
    if (d_turn < d_keep) ++turns;
  }
  const double freq = static_cast<double>(turns) / 1000.0;
  CHECK(freq > 0.45);
  CHECK(freq < 0.55);
}

TEST_CASE("every topology compiles into a scene") {
  for (Topology t : {Topology::kStraight, Topology::kCurve, Topology::kFork,
                     Topology::kMerge, Topology::kParallel}) {
    SynthSpec spec;
    spec.count = 3;
    spec.seed = 17;
    spec.topology = t;
    for (const Scenario& s : synth_corpus(spec)) {
      CompiledScene scene = compile_scene(s, ModelConfig::reduced());
      CHECK(scene.agent_index >= 0);
      CHECK(scene.graph.num_nodes() > 0);
    }
  }
}

TEST_CASE("metrics: a perfect mode zeroes every error") {
  Scenario s = simple_scenario({0, 0}, {1, 0});
  AgentForecast f;
  f.scenario_id = "simple";
  f.trajectories.assign(6, s.futures.at("a"));
  oracle::Rng rng(67);
  // Corrupt all but mode 3.
  for (int k = 0; k < 6; ++k) {
    if (k == 3) continue;
    for (Vec2& p : f.trajectories[k]) {
      p.x += rng.uniform(3, 9);
      p.y += rng.uniform(3, 9);
    }
  }
  f.scores = {0.5, 0.4, 0.3, 0.2, 0.1, 0.0};
  MetricsReport r = evaluate({f}, {s});
  CHECK(r.evaluated == 1);
  CHECK(r.min_ade_k6 == doctest::Approx(0.0));
  CHECK(r.min_fde_k6 == doctest::Approx(0.0));
  CHECK(r.miss_rate_k6 == 0.0);
  CHECK(r.min_fde_k1 > 2.0);  // the top-scored mode is corrupted
  CHECK(r.miss_rate_k1 == 1.0);
}

TEST_CASE("metrics: top-2 selection, worked example") {
  Scenario s = simple_scenario({0, 0}, {1, 0});
  const auto& gt = s.futures.at("a");
  AgentForecast f;
  f.scenario_id = "simple";
  std::vector<Vec2> off3 = gt, off1 = gt;
  off3.back().y += 3.0;
  off1.back().y += 1.0;
  f.trajectories = {off3, off1};
  f.scores = {1.0, 0.5};
  CHECK(min_fde_at(f, gt, 2) == doctest::Approx(1.0));
  CHECK(min_fde_at(f, gt, 1) == doctest::Approx(3.0));
}

TEST_CASE("metrics match a brute-force recomputation on random forecasts") {
  oracle::Rng rng(71);
  Scenario s = simple_scenario({0, 0}, {1, 0});
  const auto& gt = s.futures.at("a");
  for (int trial = 0; trial < 200; ++trial) {
    AgentForecast f;
    f.scenario_id = "simple";
    for (int k = 0; k < 6; ++k) {
      std::vector<Vec2> traj;
      for (int t = 0; t < kFutureSteps; ++t) {
        traj.push_back({rng.uniform(-30, 30), rng.uniform(-30, 30)});
      }
      f.trajectories.push_back(traj);
      f.scores.push_back(rng.uniform(-1, 1));
    }
    for (int k : {1, 6}) {
      // Reference: sort indices by score, take k, scan errors.
      std::vector<int> idx = {0, 1, 2, 3, 4, 5};
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return f.scores[a] > f.scores[b];
      });
      double best_ade = 1e300, best_fde = 1e300;
      for (int i = 0; i < k; ++i) {
        double acc = 0.0;
        for (int t = 0; t < kFutureSteps; ++t) {
          acc += distance(f.trajectories[idx[i]][t], gt[t]);
        }
        best_ade = std::min(best_ade, acc / kFutureSteps);
        best_fde =
            std::min(best_fde, distance(f.trajectories[idx[i]].back(),
                                        gt.back()));
      }
      CHECK(min_ade_at(f, gt, k) == best_ade);
      CHECK(min_fde_at(f, gt, k) == best_fde);
    }
    CHECK(min_fde_at(f, gt, 6) <= min_fde_at(f, gt, 1));
  }
}

TEST_CASE("scenarios without agent futures are counted as skipped") {
  Scenario s = simple_scenario({0, 0}, {1, 0});
  s.futures.clear();
  AgentForecast f;
  f.scenario_id = "simple";
  f.trajectories.assign(6, std::vector<Vec2>(kFutureSteps, Vec2{0, 0}));
  f.scores.assign(6, 0.0);
  MetricsReport r = evaluate({f}, {s});
  CHECK(r.evaluated == 0);
  CHECK(r.skipped == 1);
}

TEST_CASE("checkpoints restore parameters exactly") {
  ModelConfig cfg = ModelConfig::reduced();
  cfg.channels = 8;
  cfg.dilations = {1, 2};
  ForecastModel a(cfg, 123);
  TempFile f("lanegcn_ckpt.bin");
  save_checkpoint(f.path, a.params());

  ForecastModel b(cfg, 456);  // different init
  load_checkpoint(f.path, b.params());
  REQUIRE(a.params().count() == b.params().count());
  for (const auto& [name, t] : a.params().entries()) {
    const Tensor& other = b.params().get(name);
    for (long i = 0; i < t.size(); ++i) {
      CHECK(t.at(i) == other.at(i));  // bit exact
    }
  }
}

TEST_CASE("checkpoints reject mismatched models") {
  ModelConfig small = ModelConfig::reduced();
  small.channels = 8;
  small.dilations = {1, 2};
  ForecastModel a(small, 1);
  TempFile f("lanegcn_ckpt_mismatch.bin");
  save_checkpoint(f.path, a.params());
  ModelConfig other = small;
  other.channels = 16;
  ForecastModel b(other, 1);
  CHECK_THROWS(load_checkpoint(f.path, b.params()));
}

TEST_CASE("batched forward keeps the agent forecast stable under actor order") {
  SynthSpec spec;
  spec.count = 2;
  spec.seed = 23;
  spec.topology = Topology::kParallel;
  std::vector<Scenario> corpus = synth_corpus(spec);
  // Ensure the scenario has a companion actor to permute.
  Scenario& s = corpus[0];
  if (s.actors.size() < 2) s = corpus[1];
  REQUIRE(s.actors.size() >= 2);

  ModelConfig cfg = ModelConfig::reduced();
  cfg.channels = 8;
  cfg.dilations = {1, 2};
  ForecastModel model(cfg, 77);

  CompiledScene base = compile_scene(s, cfg);
  Scenario swapped = s;
  std::swap(swapped.actors[0], swapped.actors[swapped.actors.size() - 1]);
  CompiledScene perm = compile_scene(swapped, cfg);

  SceneBatch b1 = SceneBatch::pack({&base});
  SceneBatch b2 = SceneBatch::pack({&perm});
  auto f1 = model.agent_forecasts(model.forward(b1), b1);
  auto f2 = model.agent_forecasts(model.forward(b2), b2);
  REQUIRE(f1.size() == 1);
  REQUIRE(f2.size() == 1);
  for (size_t k = 0; k < f1[0].trajectories.size(); ++k) {
    for (int t = 0; t < kFutureSteps; ++t) {
      CHECK(same_point(f1[0].trajectories[k][t], f2[0].trajectories[k][t],
                       1e-9));
    }
  }
}

TEST_CASE("training on one scenario drives the loss down") {
  SynthSpec spec;
  spec.count = 1;
  spec.seed = 31;
  std::vector<Scenario> corpus = synth_corpus(spec);

  ModelConfig cfg = ModelConfig::reduced();
  cfg.channels = 8;
  cfg.dilations = {1, 2};
  ForecastModel model(cfg, 5);

  TrainConfig tc;
  tc.batch_size = 1;
  tc.epochs = 200;
  tc.decay_epoch = 199;
  tc.max_steps = 200;
  tc.seed = 5;
  TrainResult result = train(corpus, model, tc);
  REQUIRE(result.steps == 200);
  CHECK(result.final_loss < result.loss_curve.front());
}

TEST_CASE("training is reproducible for a fixed seed") {
  SynthSpec spec;
  spec.count = 4;
  spec.seed = 37;
  std::vector<Scenario> corpus = synth_corpus(spec);
  auto run = [&] {
    ModelConfig cfg = ModelConfig::reduced();
    cfg.channels = 8;
    cfg.dilations = {1, 2};
    ForecastModel model(cfg, 9);
    TrainConfig tc;
    tc.batch_size = 2;
    tc.epochs = 10;
    tc.decay_epoch = 8;
    tc.seed = 9;
    return train(corpus, model, tc).final_loss;
  };
  const double a = run();
  const double b = run();
  CHECK(std::fabs(a - b) <= 1e-9);
}

TEST_CASE("training aborts on a non-finite loss naming the batch") {
  SynthSpec spec;
  spec.count = 2;
  spec.seed = 41;
  std::vector<Scenario> corpus = synth_corpus(spec);
  ModelConfig cfg = ModelConfig::reduced();
  cfg.channels = 8;
  cfg.dilations = {1, 2};
  ForecastModel model(cfg, 3);
  {
    Tensor b = model.params().get("header.reg_out.bias");
    std::fill(b.mutable_data(), b.mutable_data() + b.size(),
              std::numeric_limits<double>::infinity());
  }
  TrainConfig tc;
  tc.batch_size = 2;
  tc.epochs = 1;
  tc.decay_epoch = 0;
  CHECK_THROWS_WITH_AS(train(corpus, model, tc),
                       doctest::Contains("non-finite"), TrainError);
}

TEST_CASE("training validates its schedule and corpus") {
  ModelConfig cfg = ModelConfig::reduced();
  ForecastModel model(cfg, 1);
  TrainConfig bad;
  bad.epochs = 10;
  bad.decay_epoch = 10;
  SynthSpec spec;
  spec.count = 1;
  CHECK_THROWS_AS(train(synth_corpus(spec), model, bad), TrainError);
  TrainConfig ok;
  CHECK_THROWS_AS(train({}, model, ok), TrainError);

  // A corpus whose scenarios carry no futures cannot supervise anything.
  std::vector<Scenario> corpus = synth_corpus(spec);
  for (Scenario& s : corpus) s.futures.clear();
  CHECK_THROWS_AS(train(corpus, model, ok), TrainError);
}
