// Command line front end: synthetic corpora, training, prediction,
// evaluation, gradient checking, ablation sweeps and scene plots.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lanegcn/checkpoint.hpp"
#include "lanegcn/gradcheck.hpp"
#include "lanegcn/losses.hpp"
#include "lanegcn/metrics.hpp"
#include "lanegcn/model.hpp"
#include "lanegcn/ops.hpp"
#include "lanegcn/synth.hpp"
#include "lanegcn/train.hpp"

using namespace lanegcn;

namespace {

// key=value text, one per line, '#' starts a comment.
std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    if (strip(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected key=value");
    }
    out[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
  }
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw std::runtime_error("config key '" + key +
                           "': expected a boolean, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

struct RunConfig {
  ModelConfig model = ModelConfig::reduced();
  TrainConfig training;
};

void apply_config(RunConfig& cfg,
                  const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "profile") {
      if (value == "reduced") {
        cfg.model = ModelConfig::reduced();
      } else if (value == "full") {
        cfg.model = ModelConfig{};
      } else {
        throw std::runtime_error("unknown profile '" + value + "'");
      }
    } else if (key == "channels") {
      cfg.model.channels = std::stol(value);
    } else if (key == "dilations") {
      cfg.model.dilations = parse_int_list(value);
    } else if (key == "modes") {
      cfg.model.modes = std::stoi(value);
    } else if (key == "a2l_radius") {
      cfg.model.a2l_radius = std::stod(value);
    } else if (key == "l2a_radius") {
      cfg.model.l2a_radius = std::stod(value);
    } else if (key == "a2a_radius") {
      cfg.model.a2a_radius = std::stod(value);
    } else if (key == "region_radius") {
      cfg.model.region_radius = std::stod(value);
    } else if (key == "use_map") {
      cfg.model.use_map = parse_bool(value, key);
    } else if (key == "a2l") {
      cfg.model.a2l = parse_bool(value, key);
    } else if (key == "l2l") {
      cfg.model.l2l = parse_bool(value, key);
    } else if (key == "l2a") {
      cfg.model.l2a = parse_bool(value, key);
    } else if (key == "a2a") {
      cfg.model.a2a = parse_bool(value, key);
    } else if (key == "multi_type") {
      cfg.model.multi_type = parse_bool(value, key);
    } else if (key == "dilated") {
      cfg.model.dilated = parse_bool(value, key);
    } else if (key == "residual") {
      cfg.model.residual = parse_bool(value, key);
    } else if (key == "graphconv_baseline") {
      cfg.model.graphconv_baseline = parse_bool(value, key);
    } else if (key == "alpha") {
      cfg.model.alpha = std::stod(value);
    } else if (key == "margin") {
      cfg.model.margin = std::stod(value);
    } else if (key == "batch_size") {
      cfg.training.batch_size = std::stoi(value);
    } else if (key == "epochs") {
      cfg.training.epochs = std::stoi(value);
    } else if (key == "decay_epoch") {
      cfg.training.decay_epoch = std::stoi(value);
    } else if (key == "lr") {
      cfg.training.lr = std::stod(value);
    } else if (key == "lr_decayed") {
      cfg.training.lr_after_decay = std::stod(value);
    } else if (key == "max_steps") {
      cfg.training.max_steps = std::stol(value);
    } else {
      throw std::runtime_error("unknown config key '" + key + "'");
    }
  }
}

void print_report(const MetricsReport& r, std::ostream& out) {
  out << std::fixed << std::setprecision(4);
  out << "evaluated " << r.evaluated << " scenarios";
  if (r.skipped > 0) out << " (" << r.skipped << " without agent future)";
  out << "\n";
  out << "  K=1  minADE " << r.min_ade_k1 << "  minFDE " << r.min_fde_k1
      << "  MR " << r.miss_rate_k1 << "\n";
  out << "  K=6  minADE " << r.min_ade_k6 << "  minFDE " << r.min_fde_k6
      << "  MR " << r.miss_rate_k6 << "\n";
}

std::vector<AgentForecast> predict_corpus(const ForecastModel& model,
                                          const std::vector<Scenario>& corpus,
                                          int batch_size) {
  std::vector<AgentForecast> out;
  std::vector<CompiledScene> scenes;
  scenes.reserve(corpus.size());
  for (const Scenario& s : corpus) {
    scenes.push_back(compile_scene(s, model.config()));
  }
  for (size_t start = 0; start < scenes.size();
       start += static_cast<size_t>(batch_size)) {
    std::vector<const CompiledScene*> members;
    for (size_t i = start;
         i < std::min(scenes.size(), start + static_cast<size_t>(batch_size));
         ++i) {
      members.push_back(&scenes[i]);
    }
    SceneBatch batch = SceneBatch::pack(members);
    auto forecasts = model.agent_forecasts(model.forward(batch), batch);
    out.insert(out.end(), forecasts.begin(), forecasts.end());
  }
  return out;
}

// ---------------------------------------------------------------- plotting

std::string svg_path(const std::vector<Vec2>& pts) {
  std::ostringstream out;
  for (size_t i = 0; i < pts.size(); ++i) {
    out << (i == 0 ? "M" : "L") << pts[i].x << " " << -pts[i].y << " ";
  }
  return out.str();
}

void write_scene_svg(const std::string& path, const Scenario& s,
                     const AgentForecast* forecast) {
  double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
  auto grow = [&](const Vec2& p) {
    lo_x = std::min(lo_x, p.x);
    hi_x = std::max(hi_x, p.x);
    lo_y = std::min(lo_y, -p.y);
    hi_y = std::max(hi_y, -p.y);
  };
  for (const Lane& lane : s.lanes) {
    for (const Vec2& p : lane.centerline) grow(p);
  }
  for (const ActorTrack& a : s.actors) {
    for (const auto& p : a.observed) {
      if (p) grow(*p);
    }
  }
  for (const auto& [id, fut] : s.futures) {
    for (const Vec2& p : fut) grow(p);
  }
  if (forecast) {
    for (const auto& traj : forecast->trajectories) {
      for (const Vec2& p : traj) grow(p);
    }
  }
  const double pad = 8.0;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << lo_x - pad
      << " " << lo_y - pad << " " << (hi_x - lo_x + 2 * pad) << " "
      << (hi_y - lo_y + 2 * pad) << "\">\n";
  out << "<rect x=\"" << lo_x - pad << "\" y=\"" << lo_y - pad << "\" width=\""
      << (hi_x - lo_x + 2 * pad) << "\" height=\"" << (hi_y - lo_y + 2 * pad)
      << "\" fill=\"white\"/>\n";
  for (const Lane& lane : s.lanes) {
    out << "<path d=\"" << svg_path(lane.centerline)
        << "\" fill=\"none\" stroke=\"#b8b8b8\" stroke-width=\"1.2\"/>\n";
  }
  for (const ActorTrack& a : s.actors) {
    std::vector<Vec2> pts;
    for (const auto& p : a.observed) {
      if (p) pts.push_back(*p);
    }
    if (pts.size() < 2) continue;
    const bool agent = a.id == s.agent_id;
    out << "<path d=\"" << svg_path(pts) << "\" fill=\"none\" stroke=\""
        << (agent ? "#1f77b4" : "#7f7f7f") << "\" stroke-width=\"0.8\"/>\n";
    out << "<circle cx=\"" << pts.back().x << "\" cy=\"" << -pts.back().y
        << "\" r=\"1.0\" fill=\"" << (agent ? "#1f77b4" : "#7f7f7f")
        << "\"/>\n";
  }
  auto agent_future = s.futures.find(s.agent_id);
  if (agent_future != s.futures.end()) {
    out << "<path d=\"" << svg_path(agent_future->second)
        << "\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"0.8\" "
           "stroke-dasharray=\"2 1\"/>\n";
  }
  if (forecast) {
    const std::vector<long> order = rank_modes(forecast->scores);
    for (size_t rank = 0; rank < order.size(); ++rank) {
      const double fade =
          0.25 + 0.75 * (1.0 - static_cast<double>(rank) / order.size());
      out << "<path d=\"" << svg_path(forecast->trajectories[order[rank]])
          << "\" fill=\"none\" stroke=\"#d62728\" stroke-opacity=\"" << fade
          << "\" stroke-width=\"0.7\"/>\n";
    }
  }
  out << "</svg>\n";
}

// ---------------------------------------------------------------- commands

int cmd_synth(const std::string& topology, int count, std::uint64_t seed,
              double speed_min, double speed_max, const std::string& out) {
  SynthSpec spec;
  spec.topology = topology_from_name(topology);
  spec.count = count;
  spec.seed = seed;
  spec.speed_min = speed_min;
  spec.speed_max = speed_max;
  save_scenarios(out, synth_corpus(spec));
  std::cout << "wrote " << count << " " << topology << " scenarios to " << out
            << "\n";
  return 0;
}

int cmd_train(const RunConfig& run, const std::string& data,
              std::uint64_t seed, const std::string& out, bool quiet) {
  std::vector<Scenario> corpus = load_scenarios(data);
  ForecastModel model(run.model, seed);
  TrainConfig tc = run.training;
  tc.seed = seed;
  tc.checkpoint_path = out;
  const long report_every =
      std::max<long>(1, tc.max_steps > 0 ? tc.max_steps / 10 : 50);
  TrainResult result = train(corpus, model, tc, [&](long step, double loss) {
    if (!quiet && step % report_every == 0) {
      std::cout << "step " << std::setw(6) << step << "  loss " << loss
                << "\n";
    }
  });
  std::cout << "trained " << result.steps << " steps, final loss "
            << result.final_loss << ", parameters "
            << model.params().total_size() << "\n";
  if (!out.empty()) std::cout << "checkpoint written to " << out << "\n";
  return 0;
}

int cmd_predict(const RunConfig& run, const std::string& data,
                const std::string& model_path, std::uint64_t seed,
                const std::string& out, int batch_size) {
  std::vector<Scenario> corpus = load_scenarios(data);
  ForecastModel model(run.model, seed);
  if (!model_path.empty()) load_checkpoint(model_path, model.params());
  save_forecasts(out, predict_corpus(model, corpus, batch_size));
  std::cout << "wrote forecasts for " << corpus.size() << " scenarios to "
            << out << "\n";
  return 0;
}

int cmd_eval(const std::string& data, const std::string& forecasts) {
  MetricsReport report =
      evaluate(load_forecasts(forecasts), load_scenarios(data));
  print_report(report, std::cout);
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, long samples, double tolerance) {
  ModelConfig cfg = ModelConfig::reduced();
  cfg.channels = 8;
  cfg.dilations = {1, 2};
  ForecastModel model(cfg, seed);
  // Check at a generic point: fresh norm biases sit exactly on relu kinks
  // wherever histories are zero padded.
  jitter_parameters(model.params().entries(), 0.05, seed + 17);

  SynthSpec spec;
  spec.count = 2;
  spec.seed = seed + 1;
  spec.topology = Topology::kFork;
  std::vector<Scenario> corpus = synth_corpus(spec);
  std::vector<CompiledScene> scenes;
  for (const Scenario& s : corpus) scenes.push_back(compile_scene(s, cfg));
  SceneBatch batch = SceneBatch::pack({&scenes[0], &scenes[1]});

  // Two smooth readouts split at the scoring branch's stop-gradient; the
  // objective layer itself is differentiated over fixed forecast leaves.
  std::vector<std::pair<std::string, Tensor>> trunk, scoring;
  for (const auto& entry : model.params().entries()) {
    if (entry.first.rfind("header.dist", 0) == 0 ||
        entry.first.rfind("header.cls", 0) == 0) {
      scoring.push_back(entry);
    } else {
      trunk.push_back(entry);
    }
  }
  auto traj_loss = [&] {
    Forecast f = model.forward(batch);
    Tensor flat = reshape(f.trajectories, {f.trajectories.size() / 2, 2});
    return mean(matmul(transpose(flat), flat));
  };
  auto score_loss = [&] {
    Forecast f = model.forward(batch);
    return mean(matmul(transpose(f.scores), f.scores));
  };
  GradCheckReport report =
      check_gradients(trunk, traj_loss, samples, 1e-5, seed);
  GradCheckReport score_report =
      check_gradients(scoring, score_loss, samples, 1e-5, seed + 1);
  if (score_report.max_rel_error > report.max_rel_error) {
    report.max_rel_error = score_report.max_rel_error;
    report.worst = score_report.worst;
  }
  report.checked += score_report.checked;

  Forecast fixed;
  {
    std::mt19937_64 rng(seed + 2);
    std::uniform_real_distribution<double> dist(-6.0, 6.0);
    fixed.trajectories = Tensor::zeros({3, 6, 8, 2});
    fixed.scores = Tensor::zeros({3, 6});
    for (long i = 0; i < fixed.trajectories.size(); ++i) {
      fixed.trajectories.mutable_data()[i] = dist(rng);
    }
    for (long i = 0; i < fixed.scores.size(); ++i) {
      fixed.scores.mutable_data()[i] = dist(rng) / 6.0;
    }
  }
  std::vector<std::optional<std::vector<Vec2>>> futures;
  {
    std::mt19937_64 rng(seed + 3);
    std::uniform_real_distribution<double> dist(-6.0, 6.0);
    for (int a = 0; a < 3; ++a) {
      std::vector<Vec2> fut;
      for (int t = 0; t < 8; ++t) fut.push_back({dist(rng), dist(rng)});
      futures.emplace_back(std::move(fut));
    }
  }
  GradCheckReport obj_report = check_gradients(
      {{"trajectories", fixed.trajectories}, {"scores", fixed.scores}},
      [&] { return total_loss(fixed, futures, LossConfig{}).total; }, 0, 1e-6,
      seed + 4);
  if (obj_report.max_rel_error > report.max_rel_error) {
    report.max_rel_error = obj_report.max_rel_error;
    report.worst = obj_report.worst;
  }
  report.checked += obj_report.checked;

  std::cout << std::scientific << std::setprecision(3);
  std::cout << "checked " << report.checked << " parameter entries, max "
            << "relative error " << report.max_rel_error << " (worst "
            << report.worst << ")\n";
  return report.passed(tolerance) ? 0 : 1;
}

int cmd_ablate(const RunConfig& base, const std::string& axis,
               const std::string& data, const std::string& test_data,
               std::uint64_t seed) {
  std::vector<Scenario> corpus = load_scenarios(data);
  std::vector<Scenario> held =
      test_data.empty() ? corpus : load_scenarios(test_data);

  struct Variant {
    std::string name;
    ModelConfig cfg;
  };
  std::vector<Variant> variants;
  if (axis == "fusion") {
    auto stages = [&](bool a2l, bool l2l, bool l2a, bool a2a, bool map) {
      ModelConfig m = base.model;
      m.a2l = a2l;
      m.l2l = l2l;
      m.l2a = l2a;
      m.a2a = a2a;
      m.use_map = map;
      return m;
    };
    variants = {
        {"actors_only", stages(false, false, false, false, false)},
        {"a2a", stages(false, false, false, true, false)},
        {"map+l2a", stages(false, false, true, false, true)},
        {"a2l+l2l+l2a", stages(true, true, true, false, true)},
        {"all_stages", stages(true, true, true, true, true)},
    };
  } else if (axis == "operator") {
    auto op = [&](bool graph, bool residual, bool multi, bool dilate) {
      ModelConfig m = base.model;
      m.graphconv_baseline = graph;
      m.residual = residual;
      m.multi_type = multi;
      m.dilated = dilate;
      return m;
    };
    variants = {
        {"graphconv", op(true, false, false, false)},
        {"graphconv+residual", op(true, true, false, false)},
        {"multi_type", op(false, false, true, false)},
        {"dilate", op(false, false, false, true)},
        {"multi_type+residual", op(false, true, true, false)},
        {"dilate+residual", op(false, true, false, true)},
        {"laneconv_full", op(false, true, true, true)},
    };
  } else {
    std::cerr << "unknown ablation axis '" << axis
              << "' (expected fusion or operator)\n";
    return 2;
  }

  std::cout << std::left << std::setw(22) << "variant" << std::right
            << std::setw(12) << "map params" << std::setw(10) << "minADE6"
            << std::setw(10) << "minFDE6" << std::setw(8) << "MR6" << "\n";
  for (const Variant& v : variants) {
    ForecastModel model(v.cfg, seed);
    TrainConfig tc = base.training;
    tc.seed = seed;
    train(corpus, model, tc);
    MetricsReport r =
        evaluate(predict_corpus(model, held, base.training.batch_size), held);
    std::cout << std::left << std::setw(22) << v.name << std::right
              << std::setw(12) << model.parameter_count("map_net.")
              << std::fixed << std::setprecision(4) << std::setw(10)
              << r.min_ade_k6 << std::setw(10) << r.min_fde_k6 << std::setw(8)
              << std::setprecision(3) << r.miss_rate_k6 << "\n";
  }
  return 0;
}

int cmd_plot(const std::string& data, const std::string& forecasts,
             const std::string& out_dir, long limit) {
  std::vector<Scenario> corpus = load_scenarios(data);
  std::map<std::string, AgentForecast> by_id;
  if (!forecasts.empty()) {
    for (AgentForecast& f : load_forecasts(forecasts)) {
      by_id.emplace(f.scenario_id, std::move(f));
    }
  }
  std::filesystem::create_directories(out_dir);
  long written = 0;
  for (const Scenario& s : corpus) {
    if (limit > 0 && written >= limit) break;
    auto it = by_id.find(s.id);
    write_scene_svg(out_dir + "/" + s.id + ".svg", s,
                    it == by_id.end() ? nullptr : &it->second);
    ++written;
  }
  std::cout << "wrote " << written << " scene plots to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lane-graph motion forecasting toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--seed", seed, "random seed");

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  std::string topology = "straight", out_path = "corpus.jsonl";
  int count = 100;
  double speed_min = 5.0, speed_max = 15.0;
  synth->add_option("--topology", topology,
                    "straight|curve|fork|merge|parallel");
  synth->add_option("--count", count, "number of scenarios");
  synth->add_option("--speed-min", speed_min, "minimum speed, m/s");
  synth->add_option("--speed-max", speed_max, "maximum speed, m/s");
  synth->add_option("--out", out_path, "output scenario file");

  auto* train_cmd = app.add_subcommand("train", "train a model");
  std::string data_path, ckpt_out = "model.ckpt";
  bool quiet = false;
  int epochs_flag = -1;
  long max_steps_flag = -1;
  int batch_flag = -1;
  train_cmd->add_option("--data", data_path, "scenario file")->required();
  train_cmd->add_option("--out", ckpt_out, "checkpoint output path");
  train_cmd->add_option("--epochs", epochs_flag, "override epoch count");
  train_cmd->add_option("--max-steps", max_steps_flag,
                        "cap on optimizer steps");
  train_cmd->add_option("--batch-size", batch_flag, "override batch size");
  train_cmd->add_flag("--quiet", quiet, "suppress per-step output");

  auto* predict = app.add_subcommand("predict", "write agent forecasts");
  std::string model_path, forecast_out = "forecasts.jsonl";
  predict->add_option("--data", data_path, "scenario file")->required();
  predict->add_option("--model", model_path, "checkpoint to load");
  predict->add_option("--out", forecast_out, "forecast output path");

  auto* eval_cmd = app.add_subcommand("eval", "score forecasts");
  std::string forecast_path;
  eval_cmd->add_option("--data", data_path, "scenario file")->required();
  eval_cmd->add_option("--forecasts", forecast_path, "forecast file")
      ->required();

  auto* gradcheck = app.add_subcommand(
      "gradcheck", "finite-difference check of the bundled tiny model");
  long samples = 4;
  double tolerance = 1e-5;
  gradcheck->add_option("--samples", samples,
                        "entries checked per parameter (0 = all)");
  gradcheck->add_option("--tolerance", tolerance, "maximum relative error");

  auto* ablate = app.add_subcommand("ablate", "train and score variants");
  std::string axis = "operator", test_data;
  ablate->add_option("--axis", axis, "fusion|operator");
  ablate->add_option("--data", data_path, "training scenario file")
      ->required();
  ablate->add_option("--test-data", test_data, "held-out scenario file");
  ablate->add_option("--epochs", epochs_flag, "override epoch count");
  ablate->add_option("--max-steps", max_steps_flag, "cap on optimizer steps");
  ablate->add_option("--batch-size", batch_flag, "override batch size");

  auto* plot = app.add_subcommand("plot", "write scene SVG images");
  std::string plot_dir = "plots";
  long plot_limit = 0;
  plot->add_option("--data", data_path, "scenario file")->required();
  plot->add_option("--forecasts", forecast_path, "forecast file to overlay");
  plot->add_option("--out", plot_dir, "output directory");
  plot->add_option("--limit", plot_limit, "plot at most this many scenes");

  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig run;
    if (!config_path.empty()) {
      apply_config(run, parse_config_file(config_path));
    }
    if (epochs_flag >= 0) {
      run.training.epochs = epochs_flag;
      run.training.decay_epoch =
          std::min(run.training.decay_epoch, epochs_flag - 1);
    }
    if (max_steps_flag >= 0) run.training.max_steps = max_steps_flag;
    if (batch_flag > 0) run.training.batch_size = batch_flag;

    if (synth->parsed()) {
      return cmd_synth(topology, count, seed, speed_min, speed_max, out_path);
    }
    if (train_cmd->parsed()) {
      return cmd_train(run, data_path, seed, ckpt_out, quiet);
    }
    if (predict->parsed()) {
      return cmd_predict(run, data_path, model_path, seed, forecast_out,
                         run.training.batch_size);
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(data_path, forecast_path);
    }
    if (gradcheck->parsed()) {
      return cmd_gradcheck(seed, samples, tolerance);
    }
    if (ablate->parsed()) {
      return cmd_ablate(run, axis, data_path, test_data, seed);
    }
    if (plot->parsed()) {
      return cmd_plot(data_path, forecast_path, plot_dir, plot_limit);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
