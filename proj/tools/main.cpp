// Command-line surface: chains the library modules into the depth pipeline
// and exposes the evaluation, ablation, and gradient-check harnesses.
//
// Exit codes: 0 success, 1 usage error, 2 input/format error,
// 3 validation/check failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "flowdepth/io.hpp"
#include "flowdepth/losses.hpp"
#include "flowdepth/metrics.hpp"
#include "flowdepth/pipeline.hpp"

using namespace flowdepth;

namespace {

// ---------------------------------------------------------------------------
// Shared raster plumbing.

// A stacked PFM stores channels as vertically concatenated planes. The
// channel count is recovered from the ratio of stacked to image height.
Raster<double> read_stacked_auto(const std::string& path, int image_height) {
  const Raster<double> flat = read_pfm(path);
  if (image_height < 1 || flat.height() % image_height != 0)
    throw std::invalid_argument(path + ": stacked height " +
                                std::to_string(flat.height()) +
                                " is not a multiple of the image height " +
                                std::to_string(image_height));
  const int channels = flat.height() / image_height;
  Raster<double> out(flat.width(), image_height, channels);
  for (int c = 0; c < channels; ++c)
    for (int y = 0; y < image_height; ++y)
      for (int x = 0; x < flat.width(); ++x)
        out.at(x, y, c) = flat.at(x, c * image_height + y);
  return out;
}

// Depth files carry no validity plane; finite positive values are valid.
DepthMap depth_from_pfm(const std::string& path) {
  const Raster<double> flat = read_pfm(path);
  if (flat.channels() != 1)
    throw std::invalid_argument(path + ": depth raster must be single-channel");
  DepthMap d(flat.width(), flat.height());
  for (int y = 0; y < flat.height(); ++y)
    for (int x = 0; x < flat.width(); ++x) {
      const double v = flat.at(x, y);
      const bool ok = std::isfinite(v) && v > 0.0;
      d.data.at(x, y) = ok ? v : 0.0;
      d.validity.at(x, y) = ok ? 1 : 0;
    }
  return d;
}

Raster<double> mask_to_raster(const BinaryMask& mask) {
  Raster<double> out(mask.width(), mask.height(), 1);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      out.at(x, y) = double(mask.at(x, y));
  return out;
}

Raster<double> validity_to_raster(const DepthMap& depth) {
  Raster<double> out(depth.width(), depth.height(), 1);
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x)
      out.at(x, y) = depth.valid(x, y) ? 1.0 : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// pipeline

struct PipelineArgs {
  std::string image_a, image_b;
  std::string features_a, features_b;
  std::string depth;
  std::string camera;
  std::string out_dir;
  std::string refiner_path;
  std::string flow_override_path;
  MatchingConfig matching;
  OcclusionConfig occlusion;
  TriangulationConfig triangulation;
};

int run_pipeline(const PipelineArgs& args) {
  const CameraFile cam = read_camera_file(args.camera);
  const DepthMap d_hyb = depth_from_pfm(args.depth);

  if (cam.intrinsics.width != d_hyb.width() ||
      cam.intrinsics.height != d_hyb.height())
    throw std::invalid_argument("camera extent " +
                                std::to_string(cam.intrinsics.width) + "x" +
                                std::to_string(cam.intrinsics.height) +
                                " does not match the hybrid depth");

  const ImageRaster image_a = read_ppm(args.image_a);
  const ImageRaster image_b = read_ppm(args.image_b);
  require_same_extent(image_a, d_hyb, "image A vs hybrid depth");
  require_same_extent(image_b, d_hyb, "image B vs hybrid depth");

  const FeatureMap features_a = read_stacked_auto(args.features_a, d_hyb.height());
  const FeatureMap features_b = read_stacked_auto(args.features_b, d_hyb.height());
  require_same_extent(features_a, d_hyb, "features A vs hybrid depth");
  if (!features_a.same_shape(features_b))
    throw std::invalid_argument("feature rasters disagree in shape");

  // Without a parameter file the refiner is the zero network: a pure
  // passthrough of the hybrid depth.
  const ResidualRefiner refiner = args.refiner_path.empty()
                                      ? ResidualRefiner(1)
                                      : read_refiner(args.refiner_path);

  FlowField override_flow;
  const bool has_override = !args.flow_override_path.empty();
  if (has_override) {
    const Raster<double> flow =
        read_stacked_auto(args.flow_override_path, d_hyb.height());
    if (flow.channels() != 2)
      throw std::invalid_argument(args.flow_override_path +
                                  ": flow override needs 2 channels");
    override_flow = flow;
  }

  const DepthPipelineResult result = run_depth_pipeline(
      features_a, features_b, d_hyb, cam.intrinsics, cam.transform,
      args.matching, args.occlusion, args.triangulation, refiner,
      has_override ? &override_flow : nullptr);

  const std::filesystem::path out(args.out_dir);
  std::filesystem::create_directories(out);
  write_pfm((out / "flow_depth.pfm").string(), result.d_flow.data);
  write_pfm((out / "flow_depth_validity.pfm").string(),
            validity_to_raster(result.d_flow));
  write_pfm((out / "occlusion_mask.pfm").string(), mask_to_raster(result.m_occ));
  write_pfm((out / "flow_confidence.pfm").string(), result.matching.confidence);
  write_pfm((out / "flow_probability_mask.pfm").string(), result.m_flow);
  write_pfm((out / "refined_depth.pfm").string(), result.d_refine.data);
  write_pfm((out / "refined_depth_validity.pfm").string(),
            validity_to_raster(result.d_refine));
  write_point_list((out / "centers.txt").string(),
                   unproject_depth_map(result.d_refine, cam.intrinsics));

  std::printf("pipeline outputs written to %s\n", out.string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// eval

int run_eval(const std::vector<std::string>& images,
             const std::vector<std::string>& depths, bool percent) {
  if (images.empty() == depths.empty())
    throw CLI::ValidationError("eval",
                               "pass exactly one of --images or --depths");
  if (!images.empty()) {
    const ImageRaster a = read_ppm(images[0]);
    const ImageRaster b = read_ppm(images[1]);
    std::printf("psnr=%s ssim=%s\n", format_metric(psnr(a, b)).c_str(),
                format_metric(ssim(a, b)).c_str());
    return 0;
  }
  const DepthMap pred = depth_from_pfm(depths[0]);
  const DepthMap gt = depth_from_pfm(depths[1]);
  const DepthMetricReport report = depth_metrics(pred, gt);
  const double scale = percent ? 100.0 : 1.0;
  std::printf("abs_rel=%s delta1=%s\n",
              format_metric(scale * report.abs_rel).c_str(),
              format_metric(scale * report.delta1).c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// ablate-masks

// Precision/recall treat "occluded" (mask value 0) as the positive class;
// agreement is the fraction of pixels where the mask matches the analytic
// occlusion. Undefined ratios (no predicted/true positives) print as nan.
void print_mask_row(const char* name, const BinaryMask& mask,
                    const BinaryMask& gt) {
  int tp = 0, fp = 0, fn = 0, agree = 0;
  for (int y = 0; y < gt.height(); ++y)
    for (int x = 0; x < gt.width(); ++x) {
      const bool pred_occ = mask.at(x, y) == 0;
      const bool true_occ = gt.at(x, y) == 0;
      tp += pred_occ && true_occ;
      fp += pred_occ && !true_occ;
      fn += !pred_occ && true_occ;
      agree += pred_occ == true_occ;
    }
  const double nan = std::nan("");
  const double precision = tp + fp > 0 ? double(tp) / (tp + fp) : nan;
  const double recall = tp + fn > 0 ? double(tp) / (tp + fn) : nan;
  const double agreement = double(agree) / (double(gt.width()) * gt.height());
  std::printf("mask=%s precision=%s recall=%s agreement=%s\n", name,
              format_metric(precision).c_str(), format_metric(recall).c_str(),
              format_metric(agreement).c_str());
}

int run_ablate_masks(std::uint64_t seed, double tau) {
  OccluderSceneConfig cfg;
  cfg.base.seed = seed;
  const SyntheticScene scene = make_occluder_scene(cfg);

  OcclusionConfig occlusion_cfg;
  occlusion_cfg.tau = tau;
  const WarpedFeatures warped =
      warp_features(scene.features_b, scene.depth_a, scene.intrinsics,
                    scene.view1_to_view2);
  const BinaryMask correlation = occlusion_mask(
      scene.features_a, warped.features, warped.in_bounds, occlusion_cfg);
  const BinaryMask fb =
      baseline_fb_consistency_mask(scene.flow_gt, backward_flow(cfg));
  const BinaryMask depthflow =
      baseline_depthflow_mask(scene.depth_a, scene.intrinsics,
                              scene.view1_to_view2, scene.flow_gt);

  print_mask_row("feature-correlation", correlation, scene.occlusion_gt);
  print_mask_row("fb-consistency", fb, scene.occlusion_gt);
  print_mask_row("depth-flow", depthflow, scene.occlusion_gt);
  return 0;
}

// ---------------------------------------------------------------------------
// gradcheck

double central_difference(const std::function<double()>& eval, double& entry,
                          double step = 1e-4) {
  const double saved = entry;
  entry = saved + step;
  const double up = eval();
  entry = saved - step;
  const double down = eval();
  entry = saved;
  return (up - down) / (2.0 * step);
}

// Relative deviation with an absolute floor of 1e-8 for entries near zero.
double gradient_deviation(double analytic, double numeric) {
  const double scale =
      std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / scale;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * double(rng() >> 11) * 0x1.0p-53;
}

Raster<double> random_raster(std::mt19937_64& rng, int w, int h, int c,
                             double lo, double hi) {
  Raster<double> r(w, h, c);
  for (double& v : r.data()) v = uniform(rng, lo, hi);
  return r;
}

struct TermCheck {
  const char* name;
  // Returns the worst gradient deviation over sampled entries for one trial.
  std::function<double(std::uint64_t trial_seed, double corruption)> run;
};

double check_census(std::uint64_t seed, double corruption) {
  std::mt19937_64 rng(seed);
  ImageRaster a = random_raster(rng, 9, 9, 3, 0.0, 1.0);
  ImageRaster b = random_raster(rng, 9, 9, 3, 0.0, 1.0);
  const BinaryMask valid(9, 9, 1, 1);
  const CensusResult res = census_loss(a, b, valid);
  auto value = [&]() { return census_loss(a, b, valid).value; };
  double worst = 0.0;
  std::mt19937_64 pick(seed ^ 0xabcdu);
  for (int i = 0; i < 40; ++i) {
    const int x = int(uniform(pick, 0, 9));
    const int y = int(uniform(pick, 0, 9));
    const int c = int(uniform(pick, 0, 3));
    const double bump = i == 0 ? corruption : 0.0;
    worst = std::max(worst,
                     gradient_deviation(res.grad_a.at(x, y, c) + bump,
                                        central_difference(value, a.at(x, y, c))));
    worst = std::max(worst,
                     gradient_deviation(res.grad_b.at(x, y, c),
                                        central_difference(value, b.at(x, y, c))));
  }
  return worst;
}

double check_smoothness(std::uint64_t seed, double corruption, int order) {
  std::mt19937_64 rng(seed);
  FlowField flow = random_raster(rng, 9, 9, 2, -2.0, 2.0);
  const ImageRaster image = random_raster(rng, 9, 9, 3, 0.0, 1.0);
  const SmoothnessResult res = smoothness_loss(flow, image, order);
  auto value = [&]() { return smoothness_loss(flow, image, order).value; };
  double worst = 0.0;
  std::mt19937_64 pick(seed ^ 0xf00du);
  for (int i = 0; i < 40; ++i) {
    const int x = int(uniform(pick, 0, 9));
    const int y = int(uniform(pick, 0, 9));
    const int c = int(uniform(pick, 0, 2));
    const double bump = i == 0 ? corruption : 0.0;
    worst = std::max(
        worst, gradient_deviation(res.grad_flow.at(x, y, c) + bump,
                                  central_difference(value, flow.at(x, y, c))));
  }
  return worst;
}

double check_consistency(std::uint64_t seed, double corruption) {
  std::mt19937_64 rng(seed);
  DepthMap d_ref(9, 9);
  DepthMap d_tgt(9, 9);
  for (double& v : d_ref.data.data()) v = uniform(rng, 1.0, 4.0);
  for (double& v : d_tgt.data.data()) v = uniform(rng, 1.0, 4.0);
  FlowField flow = random_raster(rng, 9, 9, 2, -0.9, 0.9);
  const ProbabilityMap m = random_raster(rng, 9, 9, 1, 0.1, 1.0);
  const ConsistencyResult res = multiview_consistency_loss(d_ref, d_tgt, flow, m);
  auto value = [&]() {
    return multiview_consistency_loss(d_ref, d_tgt, flow, m).value;
  };
  double worst = 0.0;
  std::mt19937_64 pick(seed ^ 0xbeefu);
  for (int i = 0; i < 40; ++i) {
    const int x = int(uniform(pick, 0, 9));
    const int y = int(uniform(pick, 0, 9));
    const double bump = i == 0 ? corruption : 0.0;
    worst = std::max(
        worst, gradient_deviation(res.grad_ref.at(x, y) + bump,
                                  central_difference(value, d_ref.data.at(x, y))));
    worst = std::max(
        worst, gradient_deviation(res.grad_tgt.at(x, y),
                                  central_difference(value, d_tgt.data.at(x, y))));
    const int c = int(uniform(pick, 0, 2));
    worst = std::max(
        worst, gradient_deviation(res.grad_flow.at(x, y, c),
                                  central_difference(value, flow.at(x, y, c))));
  }
  return worst;
}

double check_rendering(std::uint64_t seed, double corruption) {
  std::mt19937_64 rng(seed);
  ImageRaster render = random_raster(rng, 9, 9, 3, 0.0, 1.0);
  const ImageRaster target = random_raster(rng, 9, 9, 3, 0.0, 1.0);
  const RenderingResult res = rendering_loss({render}, {target});
  auto value = [&]() { return rendering_loss({render}, {target}).value; };
  double worst = 0.0;
  std::mt19937_64 pick(seed ^ 0xcafeu);
  for (int i = 0; i < 40; ++i) {
    const int x = int(uniform(pick, 0, 9));
    const int y = int(uniform(pick, 0, 9));
    const int c = int(uniform(pick, 0, 3));
    const double bump = i == 0 ? corruption : 0.0;
    worst = std::max(worst, gradient_deviation(
                                res.grad_renders[0].at(x, y, c) + bump,
                                central_difference(value, render.at(x, y, c))));
  }
  return worst;
}

double check_refiner(std::uint64_t seed, double corruption) {
  std::mt19937_64 rng(seed);
  ResidualRefiner r = seeded_refiner(4, seed);
  const Raster<double> input = random_raster(rng, 9, 9, 3, -1.0, 1.0);
  const Raster<double> upstream = random_raster(rng, 9, 9, 1, -1.0, 1.0);
  auto loss = [&]() {
    const RefinerActivations acts = refiner_forward(r, input);
    double total = 0.0;
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 9; ++x) total += upstream.at(x, y) * acts.output.at(x, y);
    return total;
  };
  const RefinerGradients g = refiner_gradients(r, input, upstream);
  double worst = 0.0;
  for (size_t i = 0; i < r.conv1_w.size(); ++i) {
    const double bump = i == 0 ? corruption : 0.0;
    worst = std::max(worst, gradient_deviation(
                                g.conv1_w[i] + bump,
                                central_difference(loss, r.conv1_w[i])));
  }
  for (size_t i = 0; i < r.conv1_b.size(); ++i)
    worst = std::max(worst, gradient_deviation(
                                g.conv1_b[i],
                                central_difference(loss, r.conv1_b[i])));
  for (size_t i = 0; i < r.conv2_w.size(); ++i)
    worst = std::max(worst, gradient_deviation(
                                g.conv2_w[i],
                                central_difference(loss, r.conv2_w[i])));
  worst = std::max(worst, gradient_deviation(
                              g.conv2_b, central_difference(loss, r.conv2_b)));
  return worst;
}

int run_gradcheck(std::uint64_t seed, const std::string& corrupt_term) {
  const std::vector<TermCheck> terms = {
      {"census", [](std::uint64_t s, double c) { return check_census(s, c); }},
      {"smooth1",
       [](std::uint64_t s, double c) { return check_smoothness(s, c, 1); }},
      {"smooth2",
       [](std::uint64_t s, double c) { return check_smoothness(s, c, 2); }},
      {"consistency",
       [](std::uint64_t s, double c) { return check_consistency(s, c); }},
      {"rendering",
       [](std::uint64_t s, double c) { return check_rendering(s, c); }},
      {"refiner",
       [](std::uint64_t s, double c) { return check_refiner(s, c); }},
  };

  bool known_term = corrupt_term.empty();
  for (const TermCheck& term : terms)
    known_term = known_term || corrupt_term == term.name;
  if (!known_term)
    throw CLI::ValidationError("gradcheck",
                               "unknown term for --corrupt: " + corrupt_term);

  constexpr double kTolerance = 1e-4;
  std::vector<std::string> failures;
  for (const TermCheck& term : terms) {
    const double corruption = corrupt_term == term.name ? 0.05 : 0.0;
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial)
      worst = std::max(worst,
                       term.run(seed + std::uint64_t(trial) * 1009u, corruption));
    const bool ok = worst < kTolerance;
    std::printf("term=%s max_deviation=%s status=%s\n", term.name,
                format_metric(worst).c_str(), ok ? "ok" : "FAIL");
    if (!ok) failures.push_back(term.name);
  }
  if (!failures.empty()) {
    std::string joined;
    for (const std::string& f : failures)
      joined += (joined.empty() ? "" : ", ") + f;
    throw std::invalid_argument("gradient check failed: " + joined);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// synth-export

int run_synth_export(const std::string& out_dir, const PlaneSceneConfig& base,
                     bool occluder) {
  SyntheticScene scene;
  if (occluder) {
    OccluderSceneConfig cfg;
    cfg.base = base;
    scene = make_occluder_scene(cfg);
  } else {
    scene = make_plane_scene(base);
  }

  const std::filesystem::path out(out_dir);
  std::filesystem::create_directories(out);
  write_ppm((out / "image_a.ppm").string(), scene.image_a);
  write_ppm((out / "image_b.ppm").string(), scene.image_b);
  write_pfm_stacked((out / "features_a.pfm").string(), scene.features_a);
  write_pfm_stacked((out / "features_b.pfm").string(), scene.features_b);
  write_pfm((out / "depth_gt_a.pfm").string(), scene.depth_a.data);
  write_pfm((out / "depth_gt_b.pfm").string(), scene.depth_b.data);
  write_pfm_stacked((out / "flow_gt.pfm").string(), scene.flow_gt);
  write_pfm((out / "occlusion_gt.pfm").string(),
            mask_to_raster(scene.occlusion_gt));
  const DepthMap hybrid =
      corrupt_depth(scene.depth_a, 0.1, scene.seed ^ 0x5bf03595ull);
  write_pfm((out / "hybrid_depth.pfm").string(), hybrid.data);
  write_camera_file((out / "camera.txt").string(), scene.intrinsics,
                    scene.view1_to_view2);

  std::printf("scene exported to %s\n", out.string().c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// fit-refiner

int run_fit_refiner(const std::string& out_path, std::uint64_t bench_seed,
                    std::uint64_t init_seed, int hidden, int steps, double lr,
                    int scene_count, int extent) {
  const std::vector<RefinerSample> bench =
      make_refiner_benchmark(bench_seed, scene_count, extent);
  const double baseline = refiner_mae(ResidualRefiner(hidden), bench);
  const FitResult fit =
      fit_refiner(seeded_refiner(hidden, init_seed), bench, steps, lr);
  const double fitted = refiner_mae(fit.refiner, bench);
  write_refiner(out_path, fit.refiner);
  std::printf("baseline_mae=%s fitted_mae=%s ratio=%s\n",
              format_metric(baseline).c_str(), format_metric(fitted).c_str(),
              format_metric(baseline > 0.0 ? fitted / baseline : 0.0).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "flowdepth: probabilistic flow/depth fusion on calibrated image pairs"};
  app.require_subcommand(1);

  // pipeline ----------------------------------------------------------------
  PipelineArgs pa;
  CLI::App* pipeline = app.add_subcommand(
      "pipeline",
      "Run matching, occlusion masking, triangulation, and residual depth\n"
      "refinement on a calibrated image pair. Writes the triangulated depth\n"
      "with its validity raster, the occlusion and flow-probability masks,\n"
      "the matching confidence, the refined depth, and the back-projected\n"
      "point centers (centers.txt, one \"x y z\" line per valid pixel).\n"
      "Point attributes beyond centers (opacity, covariance, color) are not\n"
      "produced by this tool.");
  pipeline->add_option("--image-a", pa.image_a, "Reference image (PPM)")->required();
  pipeline->add_option("--image-b", pa.image_b, "Target image (PPM)")->required();
  pipeline->add_option("--features-a", pa.features_a,
                       "Reference features (stacked PFM)")->required();
  pipeline->add_option("--features-b", pa.features_b,
                       "Target features (stacked PFM)")->required();
  pipeline->add_option("--depth", pa.depth, "Hybrid input depth (PFM)")->required();
  pipeline->add_option("--camera", pa.camera,
                       "Camera file: intrinsics + view1->view2 [R|t]")->required();
  pipeline->add_option("--out", pa.out_dir, "Output directory")->required();
  pipeline->add_option("--refiner", pa.refiner_path,
                       "Refiner parameter file (default: zero refiner, a "
                       "passthrough of the hybrid depth)");
  pipeline->add_option("--flow-override", pa.flow_override_path,
                       "Stacked 2-channel PFM replacing the matched flow for "
                       "triangulation (masks and confidence still come from "
                       "matching)");
  pipeline->add_option("--r-min", pa.matching.r_min, "Minimum search radius")->capture_default_str();
  pipeline->add_option("--r-max", pa.matching.r_max, "Maximum search radius")->capture_default_str();
  pipeline->add_option("--epsilon", pa.matching.epsilon,
                       "Numerical floor of depth normalization")->capture_default_str();
  pipeline->add_option("--tau", pa.occlusion.tau,
                       "Occlusion threshold on the feature correlation")->capture_default_str();
  pipeline->add_option("--min-denominator", pa.triangulation.min_denominator,
                       "Triangulation degeneracy threshold")->capture_default_str();
  pipeline->add_option("--min-depth", pa.triangulation.min_depth,
                       "Lower plausible-depth bound (m)")->capture_default_str();
  pipeline->add_option("--max-depth", pa.triangulation.max_depth,
                       "Upper plausible-depth bound (m)")->capture_default_str();

  // eval ---------------------------------------------------------------------
  std::vector<std::string> eval_images, eval_depths;
  bool eval_percent = false;
  CLI::App* eval = app.add_subcommand(
      "eval",
      "Compare a prediction against ground truth: PSNR/SSIM for image pairs "
      "(PPM), absolute relative error and the delta<1.25 inlier ratio for "
      "depth pairs (PFM).");
  eval->add_option("--images", eval_images, "Predicted and reference image")
      ->expected(2);
  eval->add_option("--depths", eval_depths, "Predicted and reference depth")
      ->expected(2);
  eval->add_flag("--percent", eval_percent,
                 "Report depth metrics scaled by 100");

  // ablate-masks ---------------------------------------------------------------
  std::uint64_t ablate_seed = 1;
  double ablate_tau = OcclusionConfig{}.tau;
  CLI::App* ablate = app.add_subcommand(
      "ablate-masks",
      "Score the feature-correlation occlusion mask and the two baseline "
      "masks (forward-backward flow consistency, depth-flow consistency) "
      "against the analytic occlusion of a seeded occluder scene. Precision "
      "and recall treat occluded pixels as the positive class.");
  ablate->add_option("--seed", ablate_seed, "Scene seed")->capture_default_str();
  ablate->add_option("--tau", ablate_tau,
                     "Occlusion threshold on the feature correlation")->capture_default_str();

  // gradcheck -------------------------------------------------------------------
  std::uint64_t grad_seed = 1;
  std::string grad_corrupt;
  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck",
      "Compare every analytic gradient (census, first- and second-order "
      "smoothness, depth consistency, rendering, refiner parameters) against "
      "central finite differences on seeded 9x9 instances.");
  gradcheck->add_option("--seed", grad_seed, "Instance seed")->capture_default_str();
  gradcheck->add_option("--corrupt", grad_corrupt,
                        "Self-test hook: bias the named term's analytic "
                        "gradient so the check must fail");

  // synth-export -------------------------------------------------------------
  std::string export_dir;
  PlaneSceneConfig export_cfg;
  bool export_occluder = false;
  CLI::App* synth = app.add_subcommand(
      "synth-export",
      "Render a synthetic two-view scene with analytic ground truth and "
      "write images, features, depths, flow, occlusion, a corrupted hybrid "
      "depth, and the camera file.");
  synth->add_option("--out", export_dir, "Output directory")->required();
  synth->add_option("--seed", export_cfg.seed, "Texture seed")->capture_default_str();
  synth->add_option("--width", export_cfg.width, "Frame width")->capture_default_str();
  synth->add_option("--height", export_cfg.height, "Frame height")->capture_default_str();
  synth->add_option("--focal", export_cfg.focal, "Focal length (px)")->capture_default_str();
  synth->add_option("--baseline", export_cfg.baseline,
                    "Camera baseline along +x (m)")->capture_default_str();
  synth->add_option("--plane-depth", export_cfg.plane_depth,
                    "Background plane depth (m)")->capture_default_str();
  synth->add_flag("--occluder", export_occluder,
                  "Add the default foreground rectangle");

  // fit-refiner ----------------------------------------------------------------
  std::string fit_out;
  std::uint64_t fit_bench_seed = 7, fit_init_seed = 2024;
  int fit_hidden = 8, fit_steps = 2000, fit_scenes = 3, fit_extent = 48;
  double fit_lr = 0.007;
  CLI::App* fit = app.add_subcommand(
      "fit-refiner",
      "Fit the residual refiner on the deterministic structured-error "
      "benchmark and write its parameter file.");
  fit->add_option("--out", fit_out, "Refiner parameter output path")->required();
  fit->add_option("--bench-seed", fit_bench_seed, "Benchmark scene seed")->capture_default_str();
  fit->add_option("--init-seed", fit_init_seed, "Parameter init seed")->capture_default_str();
  fit->add_option("--hidden", fit_hidden, "Hidden channel count")->capture_default_str();
  fit->add_option("--steps", fit_steps, "Gradient descent steps")->capture_default_str();
  fit->add_option("--lr", fit_lr, "Learning rate")->capture_default_str();
  fit->add_option("--scenes", fit_scenes, "Benchmark scene count")->capture_default_str();
  fit->add_option("--extent", fit_extent, "Benchmark frame extent")->capture_default_str();

  try {
    app.parse(argc, argv);
    if (pipeline->parsed()) return run_pipeline(pa);
    if (eval->parsed()) return run_eval(eval_images, eval_depths, eval_percent);
    if (ablate->parsed()) return run_ablate_masks(ablate_seed, ablate_tau);
    if (gradcheck->parsed()) return run_gradcheck(grad_seed, grad_corrupt);
    if (synth->parsed())
      return run_synth_export(export_dir, export_cfg, export_occluder);
    if (fit->parsed())
      return run_fit_refiner(fit_out, fit_bench_seed, fit_init_seed, fit_hidden,
                             fit_steps, fit_lr, fit_scenes, fit_extent);
    return 1;
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::logic_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
