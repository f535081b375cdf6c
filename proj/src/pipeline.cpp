#include "cmc/pipeline.hpp"

#include <filesystem>
#include <set>

#include "cmc/error.hpp"
#include "cmc/hierarchy.hpp"

namespace cmc {

namespace {

// Re-throws module errors with the pipeline stage prepended.
template <class F>
auto staged(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), stage + ": " + e.message(), e.ids());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::InvalidArgument, stage + ": " + e.what());
  }
}

}  // namespace

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, "config: " + what); };
  if (!(seed_threshold >= 0.0 && seed_threshold <= 1.0)) fail("seed_threshold must lie in [0,1]");
  if (max_merges < 0) fail("max_merges must be >= 0");
  if (score_threshold && !(*score_threshold >= 0.0)) fail("score_threshold must be >= 0");
  if (n_trees < 1) fail("n_trees must be >= 1");
  if (!(time_limit > 0.0)) fail("time_limit must be positive");
}

Json PipelineConfig::to_json() const {
  Json doc{{"seed_threshold", seed_threshold},
           {"max_merges", max_merges},
           {"score_threshold", nullptr},
           {"n_trees", n_trees},
           {"rng_seed", rng_seed},
           {"mode", to_string(mode)},
           {"ignore_background", ignore_background},
           {"time_limit", time_limit}};
  if (score_threshold) doc["score_threshold"] = *score_threshold;
  return doc;
}

PipelineConfig PipelineConfig::from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "config must be a JSON object");
  static const std::set<std::string> known{"seed_threshold", "max_merges", "score_threshold", "n_trees",
                                           "rng_seed",       "mode",       "ignore_background", "time_limit"};
  PipelineConfig config;
  try {
    for (const auto& [key, value] : doc.items()) {
      if (!known.count(key)) throw Error(ErrorCode::Parse, "unknown config field '" + key + "'");
    }
    if (doc.contains("seed_threshold")) config.seed_threshold = doc.at("seed_threshold").get<double>();
    if (doc.contains("max_merges")) config.max_merges = doc.at("max_merges").get<int>();
    if (doc.contains("score_threshold") && !doc.at("score_threshold").is_null()) {
      config.score_threshold = doc.at("score_threshold").get<double>();
    }
    if (doc.contains("n_trees")) config.n_trees = doc.at("n_trees").get<int>();
    if (doc.contains("rng_seed")) config.rng_seed = doc.at("rng_seed").get<std::uint64_t>();
    if (doc.contains("mode")) config.mode = parse_solve_mode(doc.at("mode").get<std::string>());
    if (doc.contains("ignore_background")) config.ignore_background = doc.at("ignore_background").get<bool>();
    if (doc.contains("time_limit")) config.time_limit = doc.at("time_limit").get<double>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("config: ") + e.what());
  }
  config.validate();
  return config;
}

ImageInputs load_inputs(const std::string& raw, const std::string& boundary, const std::string& gt,
                        const std::string& superpixels) {
  ImageInputs inputs;
  inputs.raw = staged("raw image", [&] { return read_real_pgm(raw); });
  inputs.boundary = staged("boundary map", [&] { return read_real_pgm(boundary); });
  if (!gt.empty()) inputs.gt = staged("ground truth", [&] { return read_label_pgm(gt); });
  if (!superpixels.empty()) inputs.superpixels = staged("superpixels", [&] { return read_label_pgm(superpixels); });
  return inputs;
}

PreparedImage prepare_image(const PipelineConfig& config, const ImageInputs& inputs) {
  auto superpixels = staged("superpixels", [&] {
    if (inputs.superpixels) return *inputs.superpixels;
    return seeded_watershed(inputs.boundary, config.seed_threshold);
  });
  auto tree = staged("merge tree", [&] { return build_merge_tree(superpixels, inputs.boundary); });
  auto crag = staged("crag", [&] { return extract_candidates(tree, config.max_merges, config.score_threshold); });
  auto features = staged("features", [&] { return compute_features(crag, inputs.raw, inputs.boundary); });
  return PreparedImage{std::move(superpixels), std::move(crag), std::move(features)};
}

CostModel train_pipeline(const PipelineConfig& config, const std::vector<ImageInputs>& training) {
  config.validate();
  TrainingSamples all;
  for (std::size_t k = 0; k < training.size(); ++k) {
    const auto& inputs = training[k];
    if (!inputs.gt) throw Error(ErrorCode::InvalidArgument, "training image " + std::to_string(k) + " has no ground truth");
    const auto prepared = prepare_image(config, inputs);
    const auto target = staged("best effort", [&] { return best_effort(prepared.crag, *inputs.gt); });
    auto samples = label_instances(prepared.crag, target, prepared.features);
    for (auto* pair : {&all.nodes, &all.edges}) {
      const auto& source = pair == &all.nodes ? samples.nodes : samples.edges;
      pair->features.insert(pair->features.end(), source.features.begin(), source.features.end());
      pair->labels.insert(pair->labels.end(), source.labels.begin(), source.labels.end());
    }
  }
  return staged("train", [&] {
    return train_cost_model(all, node_feature_schema(), edge_feature_schema(),
                            ForestParams{config.n_trees, config.rng_seed, 1});
  });
}

Json Metrics::to_json() const {
  return Json{{"voi_split", voi.split},          {"voi_merge", voi.merge},         {"voi", voi.total},
              {"rand", rand},                    {"precision", detection.precision}, {"recall", detection.recall},
              {"f_score", detection.f_score}};
}

Metrics evaluate(const LabelImage& pred, const LabelImage& gt, bool ignore_background) {
  Metrics metrics;
  metrics.voi = voi(pred, gt, ignore_background);
  metrics.rand = rand_index(pred, gt, ignore_background);
  metrics.detection = detection_score(pred, gt);
  return metrics;
}

PipelineResult run_pipeline(const PipelineConfig& config, const CostModel& model, const ImageInputs& inputs,
                            const std::string& persist_dir) {
  config.validate();
  PipelineResult result{prepare_image(config, inputs), {}, {}, {}, std::nullopt};
  const auto& crag = result.prepared.crag;
  result.costs = staged("costs", [&] { return predict_costs(model, crag, result.prepared.features); });
  result.solve = staged("solve", [&] {
    return solve(crag, result.costs, SolveOptions{config.mode, config.time_limit});
  });
  result.segmentation = staged("segmentation", [&] { return extract_segmentation(crag, result.solve.solution); });
  if (inputs.gt) {
    result.metrics = staged("eval", [&] { return evaluate(result.segmentation, *inputs.gt, config.ignore_background); });
  }
  if (!persist_dir.empty()) {
    staged("persist", [&] {
      const std::filesystem::path dir(persist_dir);
      std::filesystem::create_directories(dir);
      write_label_pgm((dir / "superpixels.pgm").string(), result.prepared.superpixels);
      write_json_file((dir / "crag.json").string(), crag_to_json(crag));
      write_json_file((dir / "features.json").string(), features_to_json(crag, result.prepared.features));
      write_json_file((dir / "costs.json").string(), costs_to_json(crag, result.costs));
      write_json_file((dir / "solution.json").string(), solution_to_json(crag, result.solve.solution));
      write_label_pgm((dir / "segmentation.pgm").string(), result.segmentation);
      if (result.metrics) write_json_file((dir / "metrics.json").string(), result.metrics->to_json());
      return 0;
    });
  }
  return result;
}

}  // namespace cmc
