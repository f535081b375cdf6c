// cmc: command-line driver for the candidate multi-cut pipeline.

#include <CLI11.hpp>

#include <filesystem>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "cmc/costmodel.hpp"
#include "cmc/error.hpp"
#include "cmc/eval.hpp"
#include "cmc/features.hpp"
#include "cmc/hierarchy.hpp"
#include "cmc/pipeline.hpp"
#include "cmc/serialization.hpp"
#include "cmc/solver.hpp"
#include "cmc/synthetic.hpp"

namespace fs = std::filesystem;
using namespace cmc;

namespace {

constexpr int kExitTimeLimit = 2;

std::string indexed_name(const std::string& stem, int index) {
  std::ostringstream name;
  name << stem << "_" << std::setw(3) << std::setfill('0') << index << ".pgm";
  return name.str();
}

// Image sets on disk follow the synth layout: raw_NNN.pgm, boundary_NNN.pgm, gt_NNN.pgm.
std::vector<std::string> list_image_ids(const std::string& dir) {
  std::vector<std::string> ids;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "not a directory: " + dir);
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("boundary_", 0) == 0 && entry.path().extension() == ".pgm") {
      ids.push_back(name.substr(9, name.size() - 9 - 4));
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

ImageInputs load_set_member(const std::string& dir, const std::string& id, bool require_gt) {
  const fs::path base(dir);
  const auto gt = base / ("gt_" + id + ".pgm");
  const bool have_gt = fs::exists(gt);
  if (require_gt && !have_gt) throw Error(ErrorCode::Io, "ground truth: missing " + gt.string());
  const auto sp = base / ("superpixels_" + id + ".pgm");
  return load_inputs((base / ("raw_" + id + ".pgm")).string(), (base / ("boundary_" + id + ".pgm")).string(),
                     have_gt ? gt.string() : "", fs::exists(sp) ? sp.string() : "");
}

Json forest_costs(const CostModel& model, const Json& features) {
  if (features.at("schema").at("node").get<std::vector<std::string>>() != model.node_schema ||
      features.at("schema").at("edge").get<std::vector<std::string>>() != model.edge_schema) {
    throw Error(ErrorCode::SchemaMismatch, "feature schema differs from the trained model");
  }
  Json f = Json::object(), g = Json::object();
  for (const auto& [key, row] : features.at("nodes").items()) {
    f[key] = probability_to_cost(model.node_forest.predict_proba(row.get<FeatureVector>()));
  }
  for (const auto& [key, row] : features.at("edges").items()) {
    g[key] = probability_to_cost(model.edge_forest.predict_proba(row.get<FeatureVector>()));
  }
  return Json{{"f", std::move(f)}, {"g", std::move(g)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Candidate multi-cut segmentation"};
  app.require_subcommand(1);

  // build-crag
  std::string boundary_path, superpixel_path, out_path;
  int max_merges = 5;
  double seed_threshold = 0.3;
  std::optional<double> score_threshold;
  auto* build = app.add_subcommand("build-crag", "Superpixels, merge tree and CRAG from a boundary map");
  build->add_option("--boundary", boundary_path, "Boundary map (PGM)")->required();
  build->add_option("--superpixels", superpixel_path, "Precomputed superpixels (PGM); watershed otherwise");
  build->add_option("--max-merges", max_merges, "Deepest merge chain of included candidates")->capture_default_str();
  build->add_option("--seed-threshold", seed_threshold, "Watershed seed threshold")->capture_default_str();
  build->add_option("--score-threshold", score_threshold, "Drop merged candidates above this merge score");
  build->add_option("--out", out_path, "CRAG JSON")->required();

  // features
  std::string crag_path, raw_path, features_path;
  auto* features = app.add_subcommand("features", "Node and edge features for a CRAG");
  features->add_option("--crag", crag_path)->required();
  features->add_option("--raw", raw_path)->required();
  features->add_option("--boundary", boundary_path)->required();
  features->add_option("--out", out_path)->required();

  // train
  std::vector<std::string> crag_paths, feature_paths, gt_paths;
  std::uint64_t seed = 42;
  int n_trees = 100;
  auto* train = app.add_subcommand("train", "Train node and edge forests from best-effort labels");
  train->add_option("--crag", crag_paths, "CRAG JSON (repeatable)")->required();
  train->add_option("--features", feature_paths, "Features JSON (repeatable, same order)")->required();
  train->add_option("--gt", gt_paths, "Ground truth PGM (repeatable, same order)")->required();
  train->add_option("--seed", seed)->capture_default_str();
  train->add_option("--n-trees", n_trees)->capture_default_str();
  train->add_option("--out", out_path)->required();

  // costs
  std::string model_path;
  auto* costs = app.add_subcommand("costs", "Selection and merge costs from a trained model");
  costs->add_option("--model", model_path)->required();
  costs->add_option("--features", features_path)->required();
  costs->add_option("--out", out_path)->required();

  // solve
  std::string costs_path, seg_path, mode_name = "full";
  double time_limit = 300.0;
  auto* solve_cmd = app.add_subcommand("solve", "Exact candidate multi-cut");
  solve_cmd->add_option("--crag", crag_path)->required();
  solve_cmd->add_option("--costs", costs_path)->required();
  solve_cmd->add_option("--mode", mode_name, "full | mt | mc")->capture_default_str();
  solve_cmd->add_option("--time-limit", time_limit, "Seconds")->capture_default_str();
  solve_cmd->add_option("--out", out_path)->required();
  solve_cmd->add_option("--seg", seg_path, "Segmentation PGM");

  // eval
  std::string pred_path, gt_path;
  bool ignore_background = false;
  auto* eval_cmd = app.add_subcommand("eval", "VOI, Rand index and detection score");
  eval_cmd->add_option("--pred", pred_path)->required();
  eval_cmd->add_option("--gt", gt_path)->required();
  eval_cmd->add_flag("--ignore-background", ignore_background);
  eval_cmd->add_option("--out", out_path)->required();

  // best-effort
  auto* best_cmd = app.add_subcommand("best-effort", "Feasible assignment closest to ground truth");
  best_cmd->add_option("--crag", crag_path)->required();
  best_cmd->add_option("--gt", gt_path)->required();
  best_cmd->add_option("--mode", mode_name, "full | mt | mc")->capture_default_str();
  best_cmd->add_option("--out", out_path)->required();
  best_cmd->add_option("--seg", seg_path, "Segmentation PGM");

  // synth
  SyntheticParams synth_params;
  int n_images = 10;
  std::string out_dir;
  auto* synth = app.add_subcommand("synth", "Generate synthetic raw/boundary/gt triples");
  synth->add_option("--n-images", n_images)->capture_default_str();
  synth->add_option("--n-cells", synth_params.n_cells)->capture_default_str();
  synth->add_option("--noise", synth_params.noise_level)->capture_default_str();
  synth->add_option("--seed", synth_params.seed)->capture_default_str();
  synth->add_option("--chords", synth_params.chords_per_cell, "Internal membranes per cell")->capture_default_str();
  synth->add_option("--out-dir", out_dir)->required();

  // pipeline
  std::string config_path, train_dir, test_dir;
  int jobs = 1;
  auto* pipeline = app.add_subcommand("pipeline", "Train and/or run the full pipeline over image directories");
  pipeline->add_option("--config", config_path, "PipelineConfig JSON");
  auto* p_seed_threshold = pipeline->add_option("--seed-threshold", seed_threshold);
  auto* p_max_merges = pipeline->add_option("--max-merges", max_merges);
  auto* p_score_threshold = pipeline->add_option("--score-threshold", score_threshold);
  auto* p_n_trees = pipeline->add_option("--n-trees", n_trees);
  auto* p_seed = pipeline->add_option("--seed", seed);
  auto* p_mode = pipeline->add_option("--mode", mode_name);
  auto* p_time = pipeline->add_option("--time-limit", time_limit);
  auto* p_ignore = pipeline->add_option("--ignore-background", ignore_background, "true | false");
  pipeline->add_option("--train-dir", train_dir, "Training images (raw_/boundary_/gt_NNN.pgm)");
  pipeline->add_option("--model", model_path, "Trained model JSON (instead of --train-dir)");
  pipeline->add_option("--test-dir", test_dir, "Images to segment");
  pipeline->add_option("--jobs", jobs, "Images processed in parallel")->capture_default_str();
  pipeline->add_option("--out-dir", out_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) {
      const auto boundary = read_real_pgm(boundary_path);
      const auto sp = superpixel_path.empty() ? seeded_watershed(boundary, seed_threshold) : read_label_pgm(superpixel_path);
      const auto crag = extract_candidates(build_merge_tree(sp, boundary), max_merges, score_threshold);
      write_json_file(out_path, crag_to_json(crag));
      std::cout << crag.num_candidates() << " candidates, " << crag.num_edges() << " adjacency edges\n";
    } else if (features->parsed()) {
      const auto crag = crag_from_json(read_json_file(crag_path));
      const auto set = compute_features(crag, read_real_pgm(raw_path), read_real_pgm(boundary_path));
      write_json_file(out_path, features_to_json(crag, set));
    } else if (train->parsed()) {
      if (crag_paths.size() != feature_paths.size() || crag_paths.size() != gt_paths.size()) {
        throw Error(ErrorCode::InvalidArgument, "--crag, --features and --gt must be given equally often");
      }
      TrainingSamples all;
      for (std::size_t k = 0; k < crag_paths.size(); ++k) {
        const auto crag = crag_from_json(read_json_file(crag_paths[k]));
        const auto set = features_from_json(crag, read_json_file(feature_paths[k]));
        if (set.node_schema != node_feature_schema() || set.edge_schema != edge_feature_schema()) {
          throw Error(ErrorCode::SchemaMismatch, feature_paths[k] + ": unexpected feature schema");
        }
        const auto samples = label_instances(crag, best_effort(crag, read_label_pgm(gt_paths[k])), set);
        for (auto [dst, src] : {std::pair{&all.nodes, &samples.nodes}, std::pair{&all.edges, &samples.edges}}) {
          dst->features.insert(dst->features.end(), src->features.begin(), src->features.end());
          dst->labels.insert(dst->labels.end(), src->labels.begin(), src->labels.end());
        }
      }
      const auto model = train_cost_model(all, node_feature_schema(), edge_feature_schema(),
                                          ForestParams{n_trees, seed, 1});
      write_json_file(out_path, model_to_json(model));
    } else if (costs->parsed()) {
      write_json_file(out_path, forest_costs(model_from_json(read_json_file(model_path)), read_json_file(features_path)));
    } else if (solve_cmd->parsed()) {
      const auto crag = crag_from_json(read_json_file(crag_path));
      const auto table = costs_from_json(crag, read_json_file(costs_path));
      const auto result = solve(crag, table, SolveOptions{parse_solve_mode(mode_name), time_limit});
      write_json_file(out_path, solution_to_json(crag, result.solution));
      if (!seg_path.empty()) write_label_pgm(seg_path, extract_segmentation(crag, result.solution));
      std::cout << "objective " << result.solution.objective << " after " << result.iterations
                << " iteration(s), " << result.path_constraints << " path constraint(s)"
                << (result.optimal ? "" : " [time limit reached]") << "\n";
      return result.optimal ? 0 : kExitTimeLimit;
    } else if (eval_cmd->parsed()) {
      const auto metrics = evaluate(read_label_pgm(pred_path), read_label_pgm(gt_path), ignore_background);
      write_json_file(out_path, metrics.to_json());
      std::cout << metrics.to_json().dump() << "\n";
    } else if (best_cmd->parsed()) {
      const auto crag = crag_from_json(read_json_file(crag_path));
      auto solution = best_effort(crag, read_label_pgm(gt_path), parse_solve_mode(mode_name));
      write_json_file(out_path, solution_to_json(crag, solution));
      if (!seg_path.empty()) write_label_pgm(seg_path, extract_segmentation(crag, solution));
    } else if (synth->parsed()) {
      fs::create_directories(out_dir);
      const auto images = generate_synthetic(n_images, synth_params);
      for (int i = 0; i < static_cast<int>(images.size()); ++i) {
        write_real_pgm((fs::path(out_dir) / indexed_name("raw", i)).string(), images[i].raw);
        write_real_pgm((fs::path(out_dir) / indexed_name("boundary", i)).string(), images[i].boundary);
        write_label_pgm((fs::path(out_dir) / indexed_name("gt", i)).string(), images[i].gt);
      }
    } else if (pipeline->parsed()) {
      PipelineConfig config;
      if (!config_path.empty()) config = PipelineConfig::from_json(read_json_file(config_path));
      if (p_seed_threshold->count()) config.seed_threshold = seed_threshold;
      if (p_max_merges->count()) config.max_merges = max_merges;
      if (p_score_threshold->count()) config.score_threshold = score_threshold;
      if (p_n_trees->count()) config.n_trees = n_trees;
      if (p_seed->count()) config.rng_seed = seed;
      if (p_mode->count()) config.mode = parse_solve_mode(mode_name);
      if (p_time->count()) config.time_limit = time_limit;
      if (p_ignore->count()) config.ignore_background = ignore_background;
      config.validate();
      if (train_dir.empty() == model_path.empty()) {
        throw Error(ErrorCode::InvalidArgument, "give exactly one of --train-dir and --model");
      }
      fs::create_directories(out_dir);
      write_json_file((fs::path(out_dir) / "config.json").string(), config.to_json());

      CostModel model;
      if (!train_dir.empty()) {
        std::vector<ImageInputs> training;
        for (const auto& id : list_image_ids(train_dir)) training.push_back(load_set_member(train_dir, id, true));
        model = train_pipeline(config, training);
        write_json_file((fs::path(out_dir) / "model.json").string(), model_to_json(model));
      } else {
        model = model_from_json(read_json_file(model_path));
      }
      if (test_dir.empty()) return 0;

      const auto ids = list_image_ids(test_dir);
      std::vector<std::optional<Metrics>> metrics(ids.size());
      std::vector<bool> optimal(ids.size(), true);
      auto process = [&](std::size_t k) {
        const auto inputs = load_set_member(test_dir, ids[k], false);
        const auto result = run_pipeline(config, model, inputs, (fs::path(out_dir) / ids[k]).string());
        metrics[k] = result.metrics;
        optimal[k] = result.solve.optimal;
      };
      for (std::size_t start = 0; start < ids.size(); start += static_cast<std::size_t>(std::max(1, jobs))) {
        std::vector<std::future<void>> batch;
        for (std::size_t k = start; k < std::min(ids.size(), start + std::max(1, jobs)); ++k) {
          batch.push_back(std::async(std::launch::async, process, k));
        }
        for (auto& f : batch) f.get();
      }

      Json summary{{"images", Json::object()}};
      std::map<std::string, double> sums;
      std::size_t evaluated = 0;
      for (std::size_t k = 0; k < ids.size(); ++k) {
        if (!metrics[k]) continue;
        const auto doc = metrics[k]->to_json();
        summary["images"][ids[k]] = doc;
        for (const auto& [key, value] : doc.items()) sums[key] += value.get<double>();
        ++evaluated;
      }
      if (evaluated > 0) {
        for (const auto& [key, value] : sums) summary["mean"][key] = value / static_cast<double>(evaluated);
        std::cout << summary["mean"].dump() << "\n";
      }
      write_json_file((fs::path(out_dir) / "summary.json").string(), summary);
      if (std::find(optimal.begin(), optimal.end(), false) != optimal.end()) return kExitTimeLimit;
    }
  } catch (const std::exception& e) {
    std::cerr << "cmc: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
