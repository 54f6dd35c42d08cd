// Release acceptance harness. Runs the ten acceptance checks and prints one
// [PASS]/[FAIL] line each; the process exits nonzero if any check fails.
//
// Usage: flowdepth_acceptance <path-to-cli-binary>
// The CLI path drives the end-to-end pipeline check (criterion 8).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flowdepth/io.hpp"
#include "flowdepth/losses.hpp"
#include "flowdepth/metrics.hpp"
#include "flowdepth/pipeline.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace flowdepth;
namespace fs = std::filesystem;

namespace {

std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1fs", s);
  return buf;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.empty() ? std::nan("") : v[v.size() / 2];
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ProbabilityMap mask_to_prob(const BinaryMask& m) {
  ProbabilityMap p(m.width(), m.height(), 1, 0.0);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) p.at(x, y) = m.at(x, y) ? 1.0 : 0.0;
  return p;
}

PlaneSceneConfig exact_plane_config() {
  PlaneSceneConfig cfg;
  cfg.focal = 64.0;
  cfg.baseline = 0.25;  // disparity 64 * 0.25 / 2 = 8 px exactly
  return cfg;
}

// --------------------------------------------------------------------------
// 1. Triangulation: 1e-6 relative on random double-projection instances and
//    agreement with a dense 1-D scan of the reprojection objective.

bool check_triangulation(std::string& detail, const std::string&) {
  std::mt19937_64 rng(2026);
  const TriangulationConfig cfg;
  int accepted = 0, attempts = 0;
  double max_rel = 0.0;
  while (accepted < 1000 && attempts < 2000) {
    ++attempts;
    const CameraIntrinsics K(testutil::uniform(rng, 60, 400),
                             testutil::uniform(rng, 60, 400),
                             testutil::uniform(rng, 20, 100),
                             testutil::uniform(rng, 20, 100), 160, 160);
    const RigidTransform T = RigidTransform::from_parts(
        testutil::small_rotation(rng),
        {testutil::uniform(rng, -0.5, 0.5), testutil::uniform(rng, -0.5, 0.5),
         testutil::uniform(rng, -0.5, 0.5)});
    const Eigen::Vector2d u(testutil::uniform(rng, 0, 159),
                            testutil::uniform(rng, 0, 159));
    const double d_gt = testutil::uniform(rng, 0.5, 50);
    const Eigen::Vector3d q = transform_point(unproject(u, d_gt, K), T);
    if (q.z() < 0.05) continue;  // behind or grazing the second camera
    const Eigen::Vector2d f = project(q, K) - u;
    const TriangulatedDepth t = triangulate_pixel(u, f, K, T, cfg);
    if (!t.valid) continue;  // near-degenerate baseline direction
    ++accepted;
    max_rel = std::max(max_rel, std::abs(t.depth - d_gt) / d_gt);
  }

  int scanned = 0;
  double max_scan_gap = 0.0;
  const double step = (cfg.max_depth - cfg.min_depth) / double(100000 - 1);
  while (scanned < 10) {
    const CameraIntrinsics K(testutil::uniform(rng, 80, 300),
                             testutil::uniform(rng, 80, 300),
                             testutil::uniform(rng, 30, 90),
                             testutil::uniform(rng, 30, 90), 128, 128);
    const RigidTransform T = RigidTransform::from_parts(
        testutil::small_rotation(rng),
        {testutil::uniform(rng, -0.4, 0.4), testutil::uniform(rng, -0.4, 0.4),
         testutil::uniform(rng, -0.4, 0.4)});
    const Eigen::Vector2d u(testutil::uniform(rng, 5, 120),
                            testutil::uniform(rng, 5, 120));
    const double d_gt = testutil::uniform(rng, 1.0, 400);
    const Eigen::Vector3d q = transform_point(unproject(u, d_gt, K), T);
    if (q.z() < 0.05) continue;
    const Eigen::Vector2d f = project(q, K) - u;
    const TriangulatedDepth t = triangulate_pixel(u, f, K, T, cfg);
    if (!t.valid) continue;
    ++scanned;
    const double scan = oracle::scan_triangulation(u, f, K, T, cfg.min_depth,
                                                   cfg.max_depth, 100000);
    max_scan_gap = std::max(max_scan_gap, std::abs(scan - t.depth));
  }

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%d instances, max rel %.2e; scan gap %.2e (step %.2e)",
                accepted, max_rel, max_scan_gap, step);
  detail = buf;
  return accepted == 1000 && max_rel <= 1e-6 && max_scan_gap <= step + 1e-12;
}

// --------------------------------------------------------------------------
// 2. Matching equals the naive full-window reference bit for bit.

bool check_matching_oracle(std::string& detail, const std::string&) {
  std::mt19937_64 rng(311);
  const int configs[3][2] = {{0, 2}, {1, 4}, {1, 8}};
  int exact = 0;
  for (int i = 0; i < 20; ++i) {
    const FeatureMap fa = testutil::random_raster(rng, 16, 16, 8, -2, 2);
    const FeatureMap fb = testutil::random_raster(rng, 16, 16, 8, -2, 2);
    DepthMap d = testutil::random_depth(rng, 16, 16, 0.5, 6.0);
    d.validity.at(int(testutil::uniform(rng, 0, 16)),
                  int(testutil::uniform(rng, 0, 16))) = 0;
    d.validity.at(int(testutil::uniform(rng, 0, 16)),
                  int(testutil::uniform(rng, 0, 16))) = 0;

    MatchingConfig cfg;
    cfg.r_min = configs[i % 3][0];
    cfg.r_max = configs[i % 3][1];
    const MatchingResult res = compute_matching(fa, fb, d, cfg);
    const oracle::NaiveMatch ref =
        oracle::naive_matching(fa, fb, d, cfg.r_min, cfg.r_max, cfg.epsilon);
    exact += res.flow == ref.flow && res.confidence == ref.confidence &&
             res.radius_map == ref.radius;
  }
  detail = std::to_string(exact) + "/20 instances bit-identical";
  return exact == 20;
}

// --------------------------------------------------------------------------
// 3. Depth-normalization and radius arithmetic; confidence bounds on fuzz.

bool check_matching_arithmetic(std::string& detail, const std::string&) {
  bool ok = true;

  DepthMap constant(4, 3, 5.0);
  const Raster<double> flat = normalize_depth(constant, 1e-6);
  for (double v : flat.data()) ok = ok && v == 0.0;

  DepthMap three(3, 1);
  three.data.at(0, 0) = 1.0;
  three.data.at(1, 0) = 2.0;
  three.data.at(2, 0) = 3.0;
  const Raster<double> n = normalize_depth(three, 1e-6);
  ok = ok && n.at(0, 0) == 0.0;
  ok = ok && n.at(1, 0) == (2.0 - 1.0) / ((3.0 - 1.0) + 1e-6);
  ok = ok && n.at(2, 0) == (3.0 - 1.0) / ((3.0 - 1.0) + 1e-6);

  MatchingConfig rc;
  rc.r_min = 1;
  rc.r_max = 8;
  ok = ok && adaptive_radius(0.0, rc) == 1;
  ok = ok && adaptive_radius(1.0, rc) == 8;
  ok = ok && adaptive_radius(0.5, rc) == 4;

  // Confidence stays within [1/window, 1], window = non-excluded offsets.
  std::mt19937_64 rng(313);
  const int configs[5][2] = {{0, 2}, {1, 4}, {1, 8}, {2, 5}, {0, 8}};
  int pixels = 0, in_range = 0;
  for (int i = 0; i < 25; ++i) {
    const FeatureMap fa = testutil::random_raster(rng, 20, 20, 6, -2, 2);
    const FeatureMap fb = testutil::random_raster(rng, 20, 20, 6, -2, 2);
    const DepthMap d = testutil::random_depth(rng, 20, 20, 0.5, 8.0);
    MatchingConfig cfg;
    cfg.r_min = configs[i % 5][0];
    cfg.r_max = configs[i % 5][1];
    const MatchingResult res = compute_matching(fa, fb, d, cfg);
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 20; ++x) {
        ++pixels;
        const WindowOffsets w =
            window_offsets(res.radius_map.at(x, y), cfg.r_max);
        const OffsetScores sc = match_scores(fa, fb, x, y, w);
        const double fc = res.confidence.at(x, y);
        in_range += fc + 1e-12 >= 1.0 / double(sc.included_count) &&
                    fc <= 1.0 + 1e-12;
      }
  }
  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "hand examples exact; %d/%d fuzzed pixels within bounds",
                in_range, pixels);
  detail = buf;
  return ok && pixels >= 10000 && in_range == pixels;
}

// --------------------------------------------------------------------------
// 4. Feature-correlation occlusion mask vs analytic occlusion, with both
//    baseline masks reported.

double mask_agreement(const BinaryMask& mask, const BinaryMask& gt) {
  int agree = 0;
  for (int y = 0; y < gt.height(); ++y)
    for (int x = 0; x < gt.width(); ++x)
      agree += (mask.at(x, y) == 0) == (gt.at(x, y) == 0);
  return double(agree) / (double(gt.width()) * gt.height());
}

bool check_occlusion_masks(std::string& detail, const std::string&) {
  double corr_min = 1.0, fb_sum = 0.0, df_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    OccluderSceneConfig cfg;
    cfg.base.seed = seed;
    const SyntheticScene scene = make_occluder_scene(cfg);

    const WarpedFeatures warped =
        warp_features(scene.features_b, scene.depth_a, scene.intrinsics,
                      scene.view1_to_view2);
    const BinaryMask corr =
        occlusion_mask(scene.features_a, warped.features, warped.in_bounds,
                       OcclusionConfig{});
    corr_min = std::min(corr_min, mask_agreement(corr, scene.occlusion_gt));

    fb_sum += mask_agreement(
        baseline_fb_consistency_mask(scene.flow_gt, backward_flow(cfg)),
        scene.occlusion_gt);
    df_sum += mask_agreement(
        baseline_depthflow_mask(scene.depth_a, scene.intrinsics,
                                scene.view1_to_view2, scene.flow_gt),
        scene.occlusion_gt);
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "correlation min %.2f%%; baselines: fb-consistency %.2f%%, "
                "depth-flow %.2f%%",
                100.0 * corr_min, 10.0 * fb_sum, 10.0 * df_sum);
  detail = buf;
  return corr_min >= 0.95;
}

// --------------------------------------------------------------------------
// 5. Consistency loss: zero on exact scenes, invariant to corruptions the
//    mask excludes, and 0.5 on the constant-offset half-mask fixture.

bool check_consistency_properties(std::string& detail, const std::string&) {
  bool ok = true;

  {  // Plane scene with integer disparity: exactly consistent.
    const SyntheticScene scene = make_plane_scene(exact_plane_config());
    const ProbabilityMap m = mask_to_prob(scene.occlusion_gt);
    const double base =
        multiview_consistency_loss(scene.depth_a, scene.depth_b, scene.flow_gt, m)
            .value;
    ok = ok && base < 1e-6;

    // Make the loss informative, then corrupt only what the mask excludes.
    DepthMap ref = scene.depth_a;
    for (int y = 10; y < 20; ++y) ref.data.at(30, y) += 0.01;
    const double v1 =
        multiview_consistency_loss(ref, scene.depth_b, scene.flow_gt, m).value;
    ok = ok && v1 > 0.0;

    // Reference pixels with m_flow = 0 cannot contribute.
    DepthMap ref_masked = ref;
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x)
        if (m.at(x, y) == 0.0) ref_masked.data.at(x, y) += 17.0;
    ok = ok && multiview_consistency_loss(ref_masked, scene.depth_b,
                                          scene.flow_gt, m)
                       .value == v1;

    // Target pixels invisible from view 1 (the rightmost 8 columns) are
    // never sampled.
    DepthMap tgt = scene.depth_b;
    for (int y = 0; y < 64; ++y)
      for (int x = 56; x < 64; ++x) tgt.data.at(x, y) += 5.0;
    ok = ok &&
         multiview_consistency_loss(ref, tgt, scene.flow_gt, m).value == v1;

    // Sanity: a corruption the flow does sample must change the loss.
    DepthMap sampled = scene.depth_b;
    sampled.data.at(20, 15) += 5.0;
    ok = ok && multiview_consistency_loss(ref, sampled, scene.flow_gt, m)
                       .value != v1;
  }

  {  // Occluder scene: the disocclusion band is unseen from view 1.
    OccluderSceneConfig cfg;
    cfg.base = exact_plane_config();
    cfg.fg_depth = 1.0;  // fg disparity 16 px, bg 8 px, both exact
    const SyntheticScene scene = make_occluder_scene(cfg);
    const ProbabilityMap m = mask_to_prob(scene.occlusion_gt);
    ok = ok && multiview_consistency_loss(scene.depth_a, scene.depth_b,
                                          scene.flow_gt, m)
                       .value == 0.0;

    DepthMap ref = scene.depth_a;
    for (int y = 0; y < 10; ++y) ref.data.at(52, y) += 0.001;
    const double v1 =
        multiview_consistency_loss(ref, scene.depth_b, scene.flow_gt, m).value;
    ok = ok && v1 > 0.0;

    DepthMap tgt = scene.depth_b;
    for (int y = 17; y < 47; ++y)
      for (int x = 28; x < 36; ++x) tgt.data.at(x, y) += 7.0;
    ok = ok &&
         multiview_consistency_loss(ref, tgt, scene.flow_gt, m).value == v1;
  }

  double half = 0.0;
  {  // Constant offset of one under a constant half mask.
    const DepthMap ref(8, 8, 2.0);
    DepthMap tgt = ref;
    for (double& v : tgt.data.data()) v += 1.0;
    const FlowField zero_flow(8, 8, 2, 0.0);
    const ProbabilityMap m(8, 8, 1, 0.5);
    half = multiview_consistency_loss(ref, tgt, zero_flow, m).value;
    ok = ok && half == 0.5;
  }

  char buf[120];
  std::snprintf(buf, sizeof(buf),
                "exact scenes zero; masked corruptions invariant; half-mask "
                "fixture = %.17g",
                half);
  detail = buf;
  return ok;
}

// --------------------------------------------------------------------------
// 6. Analytic gradients vs central finite differences, five 9x9 instances
//    per term.

double gradcheck_census(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ImageRaster a = testutil::random_raster(rng, 9, 9, 3, 0.0, 1.0);
  ImageRaster b = testutil::random_raster(rng, 9, 9, 3, 0.0, 1.0);
  const BinaryMask valid(9, 9, 1, 1);
  const CensusResult res = census_loss(a, b, valid);
  auto value = [&]() { return census_loss(a, b, valid).value; };
  double worst = 0.0;
  std::mt19937_64 pick(seed ^ 0x5a5au);
  for (int i = 0; i < 40; ++i) {
    const int x = int(testutil::uniform(pick, 0, 9));
    const int y = int(testutil::uniform(pick, 0, 9));
    const int c = int(testutil::uniform(pick, 0, 3));
    worst = std::max(worst, testutil::gradient_deviation(
                                res.grad_a.at(x, y, c),
                                testutil::central_difference(value, a.at(x, y, c))));
    worst = std::max(worst, testutil::gradient_deviation(
                                res.grad_b.at(x, y, c),
                                testutil::central_difference(value, b.at(x, y, c))));
  }
  return worst;
}

double gradcheck_smoothness(std::uint64_t seed, int order) {
  std::mt19937_64 rng(seed);
  FlowField flow = testutil::random_raster(rng, 9, 9, 2, -2.0, 2.0);
  const ImageRaster image = testutil::random_raster(rng, 9, 9, 3, 0.0, 1.0);
  const SmoothnessResult res = smoothness_loss(flow, image, order);
  auto value = [&]() { return smoothness_loss(flow, image, order).value; };
  double worst = 0.0;
  std::mt19937_64 pick(seed ^ 0xa5a5u);
  for (int i = 0; i < 40; ++i) {
    const int x = int(testutil::uniform(pick, 0, 9));
    const int y = int(testutil::uniform(pick, 0, 9));
    const int c = int(testutil::uniform(pick, 0, 2));
    worst = std::max(worst, testutil::gradient_deviation(
                                res.grad_flow.at(x, y, c),
                                testutil::central_difference(value, flow.at(x, y, c))));
  }
  return worst;
}

double gradcheck_consistency(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  DepthMap d_ref = testutil::random_depth(rng, 9, 9, 1.0, 4.0);
  DepthMap d_tgt = testutil::random_depth(rng, 9, 9, 1.0, 4.0);
  FlowField flow = testutil::random_raster(rng, 9, 9, 2, -0.9, 0.9);
  const ProbabilityMap m = testutil::random_raster(rng, 9, 9, 1, 0.1, 1.0);
  const ConsistencyResult res = multiview_consistency_loss(d_ref, d_tgt, flow, m);
  auto value = [&]() {
    return multiview_consistency_loss(d_ref, d_tgt, flow, m).value;
  };
  double worst = 0.0;
  std::mt19937_64 pick(seed ^ 0x1234u);
  for (int i = 0; i < 40; ++i) {
    const int x = int(testutil::uniform(pick, 0, 9));
    const int y = int(testutil::uniform(pick, 0, 9));
    worst = std::max(worst, testutil::gradient_deviation(
                                res.grad_ref.at(x, y),
                                testutil::central_difference(value, d_ref.data.at(x, y))));
    worst = std::max(worst, testutil::gradient_deviation(
                                res.grad_tgt.at(x, y),
                                testutil::central_difference(value, d_tgt.data.at(x, y))));
    const int c = int(testutil::uniform(pick, 0, 2));
    worst = std::max(worst, testutil::gradient_deviation(
                                res.grad_flow.at(x, y, c),
                                testutil::central_difference(value, flow.at(x, y, c))));
  }
  return worst;
}

double gradcheck_rendering(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ImageRaster render = testutil::random_raster(rng, 9, 9, 3, 0.0, 1.0);
  const ImageRaster target = testutil::random_raster(rng, 9, 9, 3, 0.0, 1.0);
  const RenderingResult res = rendering_loss({render}, {target});
  auto value = [&]() { return rendering_loss({render}, {target}).value; };
  double worst = 0.0;
  std::mt19937_64 pick(seed ^ 0x4321u);
  for (int i = 0; i < 40; ++i) {
    const int x = int(testutil::uniform(pick, 0, 9));
    const int y = int(testutil::uniform(pick, 0, 9));
    const int c = int(testutil::uniform(pick, 0, 3));
    worst = std::max(worst, testutil::gradient_deviation(
                                res.grad_renders[0].at(x, y, c),
                                testutil::central_difference(value, render.at(x, y, c))));
  }
  return worst;
}

double gradcheck_refiner(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ResidualRefiner r = seeded_refiner(4, seed);
  const Raster<double> input = testutil::random_raster(rng, 9, 9, 3, -1.0, 1.0);
  const Raster<double> upstream = testutil::random_raster(rng, 9, 9, 1, -1.0, 1.0);
  auto loss = [&]() {
    const RefinerActivations acts = refiner_forward(r, input);
    double total = 0.0;
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 9; ++x)
        total += upstream.at(x, y) * acts.output.at(x, y);
    return total;
  };
  const RefinerGradients g = refiner_gradients(r, input, upstream);
  double worst = 0.0;
  for (size_t i = 0; i < r.conv1_w.size(); ++i)
    worst = std::max(worst, testutil::gradient_deviation(
                                g.conv1_w[i],
                                testutil::central_difference(loss, r.conv1_w[i])));
  for (size_t i = 0; i < r.conv1_b.size(); ++i)
    worst = std::max(worst, testutil::gradient_deviation(
                                g.conv1_b[i],
                                testutil::central_difference(loss, r.conv1_b[i])));
  for (size_t i = 0; i < r.conv2_w.size(); ++i)
    worst = std::max(worst, testutil::gradient_deviation(
                                g.conv2_w[i],
                                testutil::central_difference(loss, r.conv2_w[i])));
  worst = std::max(worst, testutil::gradient_deviation(
                              g.conv2_b,
                              testutil::central_difference(loss, r.conv2_b)));
  return worst;
}

bool check_gradients(std::string& detail, const std::string&) {
  struct Term {
    const char* name;
    std::function<double(std::uint64_t)> run;
  };
  const std::vector<Term> terms = {
      {"census", gradcheck_census},
      {"smooth1", [](std::uint64_t s) { return gradcheck_smoothness(s, 1); }},
      {"smooth2", [](std::uint64_t s) { return gradcheck_smoothness(s, 2); }},
      {"consistency", gradcheck_consistency},
      {"rendering", gradcheck_rendering},
      {"refiner", gradcheck_refiner},
  };
  double worst = 0.0;
  std::string worst_term = "none";
  for (const Term& term : terms)
    for (int trial = 0; trial < 5; ++trial) {
      const double dev = term.run(900 + std::uint64_t(trial) * 131u);
      if (dev > worst) {
        worst = dev;
        worst_term = term.name;
      }
    }
  char buf[120];
  std::snprintf(buf, sizeof(buf), "6 terms x 5 instances, worst %.2e (%s)",
                worst, worst_term.c_str());
  detail = buf;
  return worst < 1e-4;
}

// --------------------------------------------------------------------------
// 7. Fitting the refiner reduces benchmark MAE by at least 30%,
//    deterministically.

bool check_fusion_improvement(std::string& detail, const std::string&) {
  const std::vector<RefinerSample> bench = make_refiner_benchmark(7);
  const double baseline = refiner_mae(ResidualRefiner(8), bench);
  const FitResult fit = fit_refiner(seeded_refiner(8, 2024), bench, 2000, 0.007);
  const double fitted = refiner_mae(fit.refiner, bench);
  const FitResult again =
      fit_refiner(seeded_refiner(8, 2024), bench, 2000, 0.007);
  const bool deterministic = fit.refiner.conv1_w == again.refiner.conv1_w &&
                             fit.refiner.conv1_b == again.refiner.conv1_b &&
                             fit.refiner.conv2_w == again.refiner.conv2_w &&
                             fit.refiner.conv2_b == again.refiner.conv2_b;
  char buf[120];
  std::snprintf(buf, sizeof(buf), "MAE %.4f -> %.4f (%.1f%% reduction), %s",
                baseline, fitted, 100.0 * (1.0 - fitted / baseline),
                deterministic ? "deterministic" : "NON-DETERMINISTIC");
  detail = buf;
  return fitted <= 0.7 * baseline && deterministic;
}

// --------------------------------------------------------------------------
// 8. End-to-end CLI pipeline on the exported plane scene with the analytic
//    flow and the fitted refiner; rerun bitwise-identical.

bool run_command(const std::string& cmd) {
  return std::system((cmd + " > /dev/null").c_str()) == 0;
}

bool check_end_to_end(std::string& detail, const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / "flowdepth_acceptance";
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);
  const std::string scene = (dir / "scene").string();
  const std::string refiner = (dir / "refiner.bin").string();
  const std::string quoted_cli = "\"" + cli + "\"";

  if (!run_command(quoted_cli + " synth-export --out \"" + scene + "\"")) {
    detail = "synth-export failed";
    return false;
  }
  if (!run_command(quoted_cli + " fit-refiner --out \"" + refiner + "\"")) {
    detail = "fit-refiner failed";
    return false;
  }
  const std::string inputs = " --image-a \"" + scene + "/image_a.ppm\"" +
                             " --image-b \"" + scene + "/image_b.ppm\"" +
                             " --features-a \"" + scene + "/features_a.pfm\"" +
                             " --features-b \"" + scene + "/features_b.pfm\"" +
                             " --depth \"" + scene + "/hybrid_depth.pfm\"" +
                             " --camera \"" + scene + "/camera.txt\"" +
                             " --r-min 8 --r-max 8" + " --flow-override \"" +
                             scene + "/flow_gt.pfm\"" + " --refiner \"" +
                             refiner + "\"";
  const std::string run1 = (dir / "run1").string();
  const std::string run2 = (dir / "run2").string();
  if (!run_command(quoted_cli + " pipeline" + inputs + " --out \"" + run1 +
                   "\"")) {
    detail = "pipeline failed";
    return false;
  }
  if (!run_command(quoted_cli + " pipeline" + inputs + " --out \"" + run2 +
                   "\"")) {
    detail = "pipeline rerun failed";
    return false;
  }

  const Raster<double> refined = read_pfm(run1 + "/refined_depth.pfm");
  const Raster<double> gt = read_pfm(scene + "/depth_gt_a.pfm");
  std::vector<double> rels;
  for (int y = 0; y < gt.height(); ++y)
    for (int x = 0; x < gt.width(); ++x)
      rels.push_back(std::abs(refined.at(x, y) - gt.at(x, y)) / gt.at(x, y));
  const double med = median_of(rels);

  bool identical = true;
  for (const char* name :
       {"flow_depth.pfm", "flow_depth_validity.pfm", "occlusion_mask.pfm",
        "flow_confidence.pfm", "flow_probability_mask.pfm",
        "refined_depth.pfm", "centers.txt"}) {
    const std::string a = slurp(fs::path(run1) / name);
    const std::string b = slurp(fs::path(run2) / name);
    identical = identical && !a.empty() && a == b;
  }

  char buf[120];
  std::snprintf(buf, sizeof(buf), "median rel err %.3f%%; rerun %s",
                100.0 * med, identical ? "bitwise-identical" : "DIFFERS");
  detail = buf;
  return med < 0.01 && identical;
}

// --------------------------------------------------------------------------
// 9. Metric arithmetic on the documented examples.

bool check_metrics(std::string& detail, const std::string&) {
  bool ok = true;
  std::mt19937_64 rng(911);
  const ImageRaster img = testutil::random_raster(rng, 16, 12, 3, 0.0, 1.0);

  const double self_psnr = psnr(img, img);
  ok = ok && std::isinf(self_psnr) && self_psnr > 0.0;

  const ImageRaster zeros(8, 8, 3, 0.0);
  ImageRaster tenth = zeros;
  for (double& v : tenth.data()) v = 0.1;
  ok = ok && std::abs(psnr(zeros, tenth) - 20.0) <= 1e-12;

  const ImageRaster big = testutil::random_raster(rng, 16, 16, 3, 0.0, 1.0);
  const double self_ssim = ssim(big, big);
  ok = ok && std::abs(self_ssim - 1.0) <= 1e-9;
  const ImageRaster ones(16, 16, 3, 1.0);
  const ImageRaster zeros16(16, 16, 3, 0.0);
  ok = ok && ssim(zeros16, ones) < 0.05;
  const ImageRaster other = testutil::random_raster(rng, 16, 16, 3, 0.0, 1.0);
  ok = ok && std::abs(ssim(big, other) - ssim(other, big)) <= 1e-12;

  const DepthMap gt(6, 5, 1.0);
  const DepthMetricReport ident = depth_metrics(gt, gt);
  ok = ok && ident.abs_rel == 0.0 && ident.delta1 == 1.0;

  DepthMap pred12(6, 5, 1.2);
  const DepthMetricReport r12 = depth_metrics(pred12, gt);
  double rel_sum = 0.0;  // the defining mean, evaluated independently
  for (int i = 0; i < 6 * 5; ++i) rel_sum += std::abs(1.2 - 1.0) / 1.0;
  ok = ok && r12.abs_rel == rel_sum / 30.0 && r12.delta1 == 1.0;

  // The inlier threshold is strict: a ratio of exactly 1.25 is an outlier.
  const DepthMap gt2(6, 5, 2.0);
  const DepthMap pred125(6, 5, 2.5);
  const DepthMetricReport boundary = depth_metrics(pred125, gt2);
  ok = ok && boundary.delta1 == 0.0 && boundary.abs_rel == 0.25;

  detail = ok ? "psnr/ssim/abs_rel/delta1 examples exact; 1.25 ratio excluded"
              : "an example value deviated";
  return ok;
}

// --------------------------------------------------------------------------
// 10. Serialization round trips on fuzzed content.

bool check_round_trips(std::string& detail, const std::string&) {
  const fs::path dir = fs::temp_directory_path() / "flowdepth_roundtrip";
  std::error_code ec;
  fs::remove_all(dir, ec);
  fs::create_directories(dir);
  std::mt19937_64 rng(1010);
  int pfm_ok = 0, ppm_ok = 0, cam_ok = 0, ref_ok = 0;

  const std::string pfm_path = (dir / "r.pfm").string();
  for (int i = 0; i < 100; ++i) {
    const int w = 1 + int(testutil::uniform(rng, 0, 12));
    const int h = 1 + int(testutil::uniform(rng, 0, 10));
    const int c = testutil::uniform(rng) < 0.5 ? 1 : 3;
    Raster<double> r(w, h, c);
    for (double& v : r.data()) v = testutil::uniform_float32(rng, -100.0, 100.0);
    write_pfm(pfm_path, r);
    pfm_ok += read_pfm(pfm_path) == r;
  }

  const std::string ppm_path = (dir / "r.ppm").string();
  for (int i = 0; i < 100; ++i) {
    const int w = 1 + int(testutil::uniform(rng, 0, 9));
    const int h = 1 + int(testutil::uniform(rng, 0, 7));
    ImageRaster img(w, h, 3);
    for (double& v : img.data())
      v = double(int(testutil::uniform(rng, 0, 256))) / 255.0;
    write_ppm(ppm_path, img);
    const bool values_match = read_ppm(ppm_path) == img;
    const std::string bytes = slurp(ppm_path);
    write_ppm(ppm_path, read_ppm(ppm_path));
    ppm_ok += values_match && bytes == slurp(ppm_path);
  }

  const std::string cam_path = (dir / "r.cam").string();
  for (int i = 0; i < 100; ++i) {
    const CameraIntrinsics K(testutil::uniform(rng, 10, 500),
                             testutil::uniform(rng, 10, 500),
                             testutil::uniform(rng, -50, 200),
                             testutil::uniform(rng, -50, 200),
                             1 + int(testutil::uniform(rng, 0, 2000)),
                             1 + int(testutil::uniform(rng, 0, 2000)));
    const RigidTransform T = RigidTransform::from_parts(
        testutil::small_rotation(rng),
        {testutil::uniform(rng, -5, 5), testutil::uniform(rng, -5, 5),
         testutil::uniform(rng, -5, 5)});
    write_camera_file(cam_path, K, T);
    const CameraFile back = read_camera_file(cam_path);
    cam_ok += back.intrinsics.fx == K.fx && back.intrinsics.fy == K.fy &&
              back.intrinsics.cx == K.cx && back.intrinsics.cy == K.cy &&
              back.intrinsics.width == K.width &&
              back.intrinsics.height == K.height &&
              (back.transform.rotation - T.rotation).cwiseAbs().maxCoeff() ==
                  0.0 &&
              (back.transform.translation - T.translation)
                      .cwiseAbs()
                      .maxCoeff() == 0.0;
  }

  const std::string ref_path = (dir / "r.refiner").string();
  for (int i = 0; i < 100; ++i) {
    ResidualRefiner r = seeded_refiner(1 + i % 6, 5000 + std::uint64_t(i));
    // The parameter stream stores 32-bit floats; fuzz within that grid.
    for (double& v : r.conv1_w) v = double(float(v));
    for (double& v : r.conv1_b) v = double(float(v));
    for (double& v : r.conv2_w) v = double(float(v));
    r.conv2_b = double(float(r.conv2_b));
    write_refiner(ref_path, r);
    const ResidualRefiner back = read_refiner(ref_path);
    ref_ok += back.hidden == r.hidden && back.conv1_w == r.conv1_w &&
              back.conv1_b == r.conv1_b && back.conv2_w == r.conv2_w &&
              back.conv2_b == r.conv2_b;
  }

  fs::remove_all(dir, ec);
  char buf[120];
  std::snprintf(buf, sizeof(buf), "pfm %d/100, ppm %d/100, camera %d/100, refiner %d/100",
                pfm_ok, ppm_ok, cam_ok, ref_ok);
  detail = buf;
  return pfm_ok == 100 && ppm_ok == 100 && cam_ok == 100 && ref_ok == 100;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path-to-cli-binary>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];

  struct Criterion {
    const char* name;
    double time_limit;  // seconds; 0 = no limit
    bool (*run)(std::string&, const std::string&);
  };
  const Criterion criteria[] = {
      {"triangulation exactness", 5.0, check_triangulation},
      {"matching-oracle equivalence", 30.0, check_matching_oracle},
      {"depth-normalization and radius arithmetic", 0.0,
       check_matching_arithmetic},
      {"occlusion-mask fidelity", 60.0, check_occlusion_masks},
      {"consistency-loss properties", 0.0, check_consistency_properties},
      {"gradient checks", 60.0, check_gradients},
      {"fusion improvement", 120.0, check_fusion_improvement},
      {"end-to-end pipeline", 0.0, check_end_to_end},
      {"metrics sanity", 0.0, check_metrics},
      {"format round trips", 0.0, check_round_trips},
  };

  int failures = 0;
  for (size_t i = 0; i < std::size(criteria); ++i) {
    const Criterion& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    std::string d;
    bool ok = false;
    try {
      ok = c.run(d, cli);
    } catch (const std::exception& e) {
      d = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (c.time_limit > 0.0 && elapsed > c.time_limit) {
      ok = false;
      d += " [over the " + format_seconds(c.time_limit) + " budget]";
    }
    failures += !ok;
    std::printf("[%s] %zu. %s (%s; %s)\n", ok ? "PASS" : "FAIL", i + 1, c.name,
                d.c_str(), format_seconds(elapsed).c_str());
  }
  std::printf("criteria passed: %d/10\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
