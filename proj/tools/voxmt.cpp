#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "voxmt/errors.hpp"
#include "voxmt/io.hpp"
#include "voxmt/kernels.hpp"
#include "voxmt/metrics.hpp"
#include "voxmt/pipeline.hpp"
#include "voxmt/selftest.hpp"

namespace {

voxmt::PipelineConfig resolve_config(const std::string& config_path, const std::string& profile) {
  if (!config_path.empty()) return voxmt::load_config(config_path);
  return voxmt::profile_config(profile);
}

int cmd_synth(uint64_t seed, int32_t objects, int32_t points, const std::string& config_path,
              const std::string& profile, const std::string& out, const std::string& labels_out,
              const std::string& boxes_out) {
  const voxmt::PipelineConfig cfg = resolve_config(config_path, profile);
  const voxmt::SynthScene scene = voxmt::synth_scene(seed, objects, points, cfg);
  voxmt::write_pcb(out, scene.cloud);
  if (!labels_out.empty()) voxmt::write_lbl(labels_out, scene.labels);
  if (!boxes_out.empty()) voxmt::write_boxes(boxes_out, scene.boxes);
  std::cout << "points=" << scene.cloud.size() << " boxes=" << scene.boxes.size() << "\n";
  return 0;
}

int cmd_init_weights(uint64_t seed, const std::string& config_path, const std::string& profile,
                     const std::string& out) {
  const voxmt::PipelineConfig cfg = resolve_config(config_path, profile);
  const voxmt::WeightStore ws = voxmt::init_weights(cfg, seed);
  ws.save(out);
  std::cout << "tensors=" << ws.size() << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& profile,
            const std::string& weights_path, const std::string& input, const std::string& out,
            const std::string& boxes_out, bool tta, const std::string& gt_labels_path,
            const std::string& gt_boxes_path) {
  const voxmt::PipelineConfig cfg = resolve_config(config_path, profile);
  const voxmt::WeightStore weights = voxmt::WeightStore::load(weights_path);
  const voxmt::PointCloud cloud = voxmt::read_pcb(input);

  voxmt::GroundTruth gt;
  const bool has_gt = !gt_labels_path.empty();
  if (has_gt) {
    gt.labels = voxmt::read_lbl(gt_labels_path);
    if (!gt_boxes_path.empty()) gt.boxes = voxmt::read_boxes(gt_boxes_path);
  }

  voxmt::PipelineResult res;
  if (tta) {
    res = voxmt::run_pipeline_tta(cloud, cfg, weights, voxmt::make_tta_set(),
                                  has_gt ? &gt : nullptr);
  } else {
    res = voxmt::run_pipeline(cloud, cfg, weights, has_gt ? &gt : nullptr);
  }

  voxmt::write_pan(out, res.panoptic);
  if (!boxes_out.empty()) voxmt::write_boxes(boxes_out, res.boxes);
  std::cout << "points=" << cloud.size() << " voxels=" << res.map.voxel_coords.size()
            << " boxes=" << res.boxes.size() << " kernels=" << voxmt::kernels::active().name
            << "\n";
  if (res.has_loss) {
    for (const auto& [key, value] : res.loss.as_key_values()) {
      std::cout << key << "=" << value << "\n";
    }
  }
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& profile, const std::string& pred,
             const std::string& gt_path) {
  const voxmt::PipelineConfig cfg = resolve_config(config_path, profile);
  const voxmt::PanopticLabel p = voxmt::read_pan(pred);
  const voxmt::LabelSet g = voxmt::read_lbl(gt_path);
  if (p.semantic.size() != g.semantic.size()) {
    throw voxmt::InputError("prediction and ground truth disagree on point count");
  }
  const voxmt::IoUReport iou = voxmt::miou(p.semantic, g.semantic, cfg.num_classes);
  voxmt::PanopticLabel gt_pan;
  gt_pan.semantic = g.semantic;
  gt_pan.instance = g.instance;
  const voxmt::PqReport pqr = voxmt::pq(p, gt_pan, cfg.thing_classes, cfg.stuff_classes());
  std::cout << "miou=" << iou.mean << "\n";
  for (std::size_t c = 0; c < iou.per_class.size(); ++c) {
    if (iou.per_class[c] >= 0.0) std::cout << "iou." << c << "=" << iou.per_class[c] << "\n";
  }
  std::cout << "pq=" << pqr.pq << "\nsq=" << pqr.sq << "\nrq=" << pqr.rq << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"voxmt: multi-task LiDAR perception pipeline"};
  app.require_subcommand(1);

  std::string config_path, profile = "toy";
  uint64_t seed = 1;
  int32_t objects = 4, points = 20000;
  std::string out, labels_out, boxes_out, weights_path, input, gt_labels, gt_boxes, pred;
  bool tta = false;

  CLI::App* synth = app.add_subcommand("synth", "generate a deterministic synthetic scene");
  synth->add_option("--seed", seed);
  synth->add_option("--objects", objects);
  synth->add_option("--points", points);
  synth->add_option("--config", config_path);
  synth->add_option("--profile", profile);
  synth->add_option("--out", out)->required();
  synth->add_option("--labels", labels_out);
  synth->add_option("--boxes", boxes_out);

  CLI::App* init = app.add_subcommand("init-weights", "write a seeded random weight store");
  init->add_option("--seed", seed);
  init->add_option("--config", config_path);
  init->add_option("--profile", profile);
  init->add_option("--out", out)->required();

  CLI::App* run = app.add_subcommand("run", "run the pipeline on a point cloud");
  run->add_option("--config", config_path);
  run->add_option("--profile", profile);
  run->add_option("--weights", weights_path)->required();
  run->add_option("--input", input)->required();
  run->add_option("--out", out)->required();
  run->add_option("--boxes", boxes_out);
  run->add_flag("--tta", tta, "average first-stage scores over the TTA set");
  run->add_option("--gt-labels", gt_labels, "enables the loss report");
  run->add_option("--gt-boxes", gt_boxes);

  CLI::App* eval = app.add_subcommand("eval", "score a panoptic prediction against labels");
  eval->add_option("--config", config_path);
  eval->add_option("--profile", profile);
  eval->add_option("--pred", pred)->required();
  eval->add_option("--gt", gt_labels)->required();

  CLI::App* selftest = app.add_subcommand("selftest", "run the built-in oracle checks");
  (void)selftest;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      return cmd_synth(seed, objects, points, config_path, profile, out, labels_out, boxes_out);
    }
    if (init->parsed()) return cmd_init_weights(seed, config_path, profile, out);
    if (run->parsed()) {
      return cmd_run(config_path, profile, weights_path, input, out, boxes_out, tta, gt_labels,
                     gt_boxes);
    }
    if (eval->parsed()) return cmd_eval(config_path, profile, pred, gt_labels);
    if (selftest->parsed()) return voxmt::run_selftest(std::cout) ? 0 : 1;
  } catch (const voxmt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const voxmt::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
