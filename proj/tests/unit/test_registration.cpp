#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "usdrecon/registration/camera.hpp"
#include "usdrecon/registration/registration.hpp"
#include "usdrecon/scan_sim/lidar.hpp"
#include "usdrecon/scan_sim/procedural.hpp"
#include "support/testing.hpp"

using namespace usdrecon;
using usdrecon::testing::error_code_of;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const PointCloud& chair_cloud() {
  static const PointCloud c = [] {
    LidarConfig cfg;
    cfg.azimuth_steps = 256;
    cfg.elevation_steps = 48;
    return simulate_asset_cloud(demo_catalogue()[0].mesh, cfg);
  }();
  return c;
}

PointCloud subset(const PointCloud& c, std::mt19937_64& rng, double keep) {
  std::bernoulli_distribution b(keep);
  PointCloud out;
  for (const Vec3& p : c.points) {
    if (b(rng)) out.points.push_back(p);
  }
  return out;
}

double yaw_error(double a, double b) { return std::abs(std::remainder(a - b, 2 * std::numbers::pi)); }

CameraModel plain_camera() {
  CameraModel c;
  c.extrinsic = Pose::identity();  // camera frame == body frame
  return c;
}

}  // namespace

TEST(Coarse, IdentityPicksYawZero) {
  const RegistrationResult r = coarse_register(chair_cloud(), chair_cloud());
  EXPECT_NEAR(r.pose.yaw(), 0.0, 1e-12);
  EXPECT_LT(r.rms, 1e-9);
}

TEST(Coarse, RecoversQuarterTurnWithinGridStep) {
  const Pose truth = Pose::from_yaw(90 * kDeg);
  const RegistrationResult r = coarse_register(chair_cloud(), transform_cloud(chair_cloud(), truth));
  EXPECT_LE(yaw_error(r.pose.yaw(), 90 * kDeg), 2 * std::numbers::pi / 64 + 1e-9);
}

TEST(Coarse, RecoversTranslation) {
  const Pose truth = Pose::from_translation({2, -1, 0});
  const RegistrationResult r = coarse_register(chair_cloud(), transform_cloud(chair_cloud(), truth));
  EXPECT_VEC_NEAR(r.pose.translation, Vec3(2, -1, 0), 1e-6);
  EXPECT_NEAR(r.pose.yaw(), 0.0, 1e-12);
}

TEST(Coarse, FloorAlignment) {
  const Pose truth = Pose::from_yaw(0.3, Vec3(0.5, 0.5, 1.25));
  const RegistrationResult r = coarse_register(chair_cloud(), transform_cloud(chair_cloud(), truth));
  EXPECT_NEAR(r.pose.translation.z(), 1.25, 1e-9);
}

TEST(Coarse, CandidatesSortedOverFullGrid) {
  const auto c = coarse_candidates(chair_cloud(), transform_cloud(chair_cloud(), Pose::from_yaw(1.0)));
  ASSERT_EQ(c.size(), 64u);
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_LE(c[i - 1].rms, c[i].rms);
}

TEST(Coarse, TooFewPoints) {
  PointCloud tiny;
  for (int i = 0; i < 9; ++i) tiny.points.emplace_back(i, 0, 0);
  EXPECT_EQ(error_code_of([&] { coarse_register(tiny, chair_cloud()); }), ErrorCode::kInsufficientData);
  EXPECT_EQ(error_code_of([&] { coarse_register(chair_cloud(), tiny); }), ErrorCode::kInsufficientData);
}

TEST(Icp, IdentityConvergesImmediately) {
  const IcpResult r = icp_refine(chair_cloud(), chair_cloud(), Pose::identity());
  EXPECT_LT(r.rms, 1e-9);
  EXPECT_LE(r.iterations, 2);
  EXPECT_VEC_NEAR(r.pose.translation, Vec3::Zero(), 1e-9);
  EXPECT_NEAR(r.inlier_fraction, 1.0, 1e-12);
}

TEST(Icp, KnownTransformFromCoarse) {
  const Pose truth = Pose::from_yaw(20 * kDeg, Vec3(0.3, 0, 0));
  const PointCloud tgt = transform_cloud(chair_cloud(), truth);
  const IcpResult r = icp_refine(chair_cloud(), tgt, coarse_register(chair_cloud(), tgt).pose);
  EXPECT_VEC_NEAR(r.pose.translation, truth.translation, 1e-3);
  EXPECT_LT(rotation_angle_between(r.pose, truth), 0.1 * kDeg);
}

TEST(Icp, HalfSubsetTarget) {
  std::mt19937_64 rng(1);
  const Pose truth = Pose::from_yaw(20 * kDeg, Vec3(0.3, 0, 0));
  const PointCloud tgt = subset(transform_cloud(chair_cloud(), truth), rng, 0.5);
  const IcpResult r = icp_refine(chair_cloud(), tgt, coarse_register(chair_cloud(), tgt).pose);
  EXPECT_VEC_NEAR(r.pose.translation, truth.translation, 5e-3);
}

TEST(Icp, RandomKnownTransforms) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> yaw(-std::numbers::pi, std::numbers::pi), tr(-2.0, 2.0);
  for (int i = 0; i < 25; ++i) {
    const Pose truth = Pose::from_yaw(yaw(rng), Vec3(tr(rng), tr(rng), tr(rng) * 0.1));
    const PointCloud tgt = transform_cloud(chair_cloud(), truth);
    const IcpResult r = icp_refine(chair_cloud(), tgt, coarse_register(chair_cloud(), tgt).pose);
    EXPECT_VEC_NEAR(r.pose.translation, truth.translation, 1e-3);
    EXPECT_LT(rotation_angle_between(r.pose, truth), 0.1 * kDeg);
  }
}

TEST(Icp, RmsNeverIncreases) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> noise(0, 0.01);
  for (int i = 0; i < 10; ++i) {
    PointCloud tgt = subset(transform_cloud(chair_cloud(), Pose::from_yaw(0.2 * i, Vec3(0.1 * i, 0, 0))), rng, 0.6);
    for (Vec3& p : tgt.points) p += Vec3(noise(rng), noise(rng), noise(rng));
    const IcpResult r = icp_refine(chair_cloud(), tgt, Pose::from_translation(centroid(tgt) - centroid(chair_cloud())));
    ASSERT_GE(r.rms_history.size(), 1u);
    for (std::size_t k = 1; k < r.rms_history.size(); ++k) {
      EXPECT_LE(r.rms_history[k], r.rms_history[k - 1] + 1e-12);
    }
    EXPECT_LE(r.rms, IcpOptions{}.rejection_distance + 1e-12);
    EXPECT_GE(r.inlier_fraction, 0.0);
    EXPECT_LE(r.inlier_fraction, 1.0);
  }
}

TEST(Icp, Equivariance) {
  std::mt19937_64 rng(3);
  const Pose base = Pose::from_yaw(0.7, Vec3(0.4, -0.2, 0));
  const PointCloud tgt = transform_cloud(chair_cloud(), base);
  const IcpResult r0 = icp_refine(chair_cloud(), tgt, coarse_register(chair_cloud(), tgt).pose);
  for (int i = 0; i < 5; ++i) {
    const Pose t = usdrecon::testing::random_pose(rng, 3.0);
    const IcpResult r1 = icp_refine(chair_cloud(), transform_cloud(tgt, t), compose(t, r0.pose));
    const Pose want = compose(t, r0.pose);
    EXPECT_VEC_NEAR(r1.pose.translation, want.translation, 1e-6);
    EXPECT_LT(rotation_angle_between(r1.pose, want), 1e-6);
  }
}

TEST(Icp, DivergenceCarriesLastPose) {
  const Pose far = Pose::from_translation({50, 0, 0});
  try {
    icp_refine(chair_cloud(), chair_cloud(), far);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDivergence);
    EXPECT_VEC_NEAR(e.last_pose().translation, far.translation, 1e-12);
  }
}

TEST(Icp, EmptyCloudsRejected) {
  EXPECT_EQ(error_code_of([] { icp_refine(PointCloud{}, chair_cloud(), Pose::identity()); }), ErrorCode::kEmptyCloud);
  EXPECT_EQ(error_code_of([] { icp_refine(chair_cloud(), PointCloud{}, Pose::identity()); }), ErrorCode::kEmptyCloud);
}

TEST(Icp, ScaleSearchRecoversScale) {
  const PointCloud grown = [] {
    // Grown about the centroid, as after coarse alignment.
    PointCloud c = chair_cloud();
    const Vec3 mid = centroid(c);
    for (Vec3& p : c.points) p = mid + 1.05 * (p - mid);
    return c;
  }();
  IcpOptions opts;
  const IcpResult rigid = icp_refine(chair_cloud(), grown, Pose::identity(), opts);
  opts.scale_search = true;
  opts.tolerance = 1e-9;
  opts.max_iterations = 500;
  const IcpResult scaled = icp_refine(chair_cloud(), grown, Pose::identity(), opts);
  EXPECT_NEAR(scaled.scale, 1.05, 5e-3) << scaled.iterations << " " << scaled.rms;
  EXPECT_LT(scaled.rms, rigid.rms);
  EXPECT_EQ(rigid.scale, 1.0);
}

TEST(Fit, ExactRigidAndSimilarity) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec3> src(30);
  for (Vec3& p : src) p = Vec3(u(rng), u(rng), u(rng));
  const Pose truth = usdrecon::testing::random_pose(rng);
  std::vector<Vec3> tgt, scaled;
  for (const Vec3& p : src) {
    tgt.push_back(truth.apply(p));
    scaled.push_back(truth.rotation * (2.0 * p) + truth.translation);
  }
  const SimilarityFit rigid = fit_rigid(src, tgt);
  EXPECT_VEC_NEAR(rigid.pose.translation, truth.translation, 1e-9);
  EXPECT_LT(rotation_angle_between(rigid.pose, truth), 1e-9);
  const SimilarityFit sim = fit_rigid(src, scaled, true);
  EXPECT_NEAR(sim.scale, 2.0, 1e-9);
  EXPECT_LT(rotation_angle_between(sim.pose, truth), 1e-9);

  const Pose flat = Pose::from_yaw(1.2, Vec3(1, 2, 3));
  std::vector<Vec3> flat_tgt;
  for (const Vec3& p : src) flat_tgt.push_back(flat.apply(p));
  const SimilarityFit y = fit_yaw_translation(src, flat_tgt);
  EXPECT_NEAR(y.pose.yaw(), 1.2, 1e-9);
  EXPECT_VEC_NEAR(y.pose.translation, flat.translation, 1e-9);
}

TEST(Fit, ReflectionGuard) {
  // Mirror-image target: the best proper rotation must still have det +1.
  std::vector<Vec3> src = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  std::vector<Vec3> tgt;
  for (const Vec3& p : src) tgt.emplace_back(-p.x(), p.y(), p.z());
  const SimilarityFit f = fit_rigid(src, tgt);
  EXPECT_NEAR(f.pose.rotation.toRotationMatrix().determinant(), 1.0, 1e-9);
}

TEST(Camera, OpticalAxisProjectsToPrincipalPoint) {
  const CameraModel cam = plain_camera();
  const auto px = cam.project(Vec3(0, 0, 1));
  ASSERT_TRUE(px);
  EXPECT_VEC_NEAR(*px, Vec2(cam.cx, cam.cy), 1e-12);
  EXPECT_FALSE(cam.project(Vec3(0, 0, -1)));
  EXPECT_FALSE(cam.project(Vec3(0, 0, 0)));
}

TEST(Camera, OpticalMountLooksForward) {
  CameraModel cam;
  cam.extrinsic = optical_mount();
  // A point straight ahead of the body lands on the principal point.
  const Vec3 p_cam = cam.world_to_camera(Pose::identity()).apply(Vec3(3, 0, 0));
  EXPECT_VEC_NEAR(p_cam, Vec3(0, 0, 3), 1e-12);
  // Left of the body is left in the image; up is up.
  EXPECT_LT(cam.project(cam.world_to_camera(Pose::identity()).apply(Vec3(3, 1, 0)))->x(), cam.cx);
  EXPECT_LT(cam.project(cam.world_to_camera(Pose::identity()).apply(Vec3(3, 0, 1)))->y(), cam.cy);
}

TEST(Camera, FullImageMaskKeepsAxisPoint) {
  const CameraModel cam = plain_camera();
  PointCloud c;
  c.points = {Vec3(0, 0, 1), Vec3(0, 0, -1)};
  const Polygon2 full = {Vec2(0, 0), Vec2(640, 0), Vec2(640, 480), Vec2(0, 480)};
  EXPECT_EQ(masked_point_indices(c, cam, Pose::identity(), full), (std::vector<std::size_t>{0}));
}

TEST(Camera, LeftHalfMaskGrid) {
  const CameraModel cam = plain_camera();
  PointCloud grid;
  for (double x : {-0.5, 0.0, 0.5}) {
    for (double y : {-0.5, 0.0, 0.5}) grid.points.emplace_back(x, y, 2.0);
  }
  const Polygon2 left = {Vec2(0, 0), Vec2(cam.cx, 0), Vec2(cam.cx, 480), Vec2(0, 480)};
  std::vector<std::size_t> want;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Vec3& p = grid.points[i];
    const double u = cam.fx * p.x() / p.z() + cam.cx;
    if (u < cam.cx) want.push_back(i);
  }
  ASSERT_EQ(want.size(), 3u);
  EXPECT_EQ(masked_point_indices(grid, cam, Pose::identity(), left), want);
  EXPECT_EQ(extract_masked_points(grid, cam, Pose::identity(), left).size(), 3u);
}

TEST(Camera, MaskedPointsAreASubset) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5, 5);
  PointCloud c;
  for (int i = 0; i < 2000; ++i) c.points.emplace_back(u(rng), u(rng), u(rng));
  CameraModel cam;
  const Pose robot = Pose::from_yaw(0.4, Vec3(-1, 0.5, 0));
  const Polygon2 mask = {Vec2(100, 50), Vec2(500, 120), Vec2(420, 400), Vec2(150, 300)};
  const PointCloud out = extract_masked_points(c, cam, robot, mask);
  const auto idx = masked_point_indices(c, cam, robot, mask);
  ASSERT_EQ(out.size(), idx.size());
  EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    EXPECT_EQ(out.points[k], c.points[idx[k]]);
    const Vec3 pc = cam.world_to_camera(robot).apply(c.points[idx[k]]);
    EXPECT_GT(pc.z(), 0.0);
    EXPECT_TRUE(point_in_polygon(mask, *cam.project(pc)));
  }
}

TEST(Camera, MaskValidation) {
  const CameraModel cam = plain_camera();
  PointCloud c;
  c.points = {Vec3(0, 0, 1)};
  const Polygon2 two = {Vec2(0, 0), Vec2(1, 1)};
  const Polygon2 flat = {Vec2(0, 0), Vec2(1, 1), Vec2(2, 2)};
  const Polygon2 nan_poly = {Vec2(0, 0), Vec2(std::nan(""), 1), Vec2(2, 0)};
  for (const Polygon2& bad : {two, flat, nan_poly}) {
    EXPECT_EQ(error_code_of([&] { extract_masked_points(c, cam, Pose::identity(), bad); }), ErrorCode::kInvalidMask);
  }
  Detection d;
  d.mask = {Vec2(10, 10), Vec2(700, 10), Vec2(10, 100)};
  EXPECT_EQ(error_code_of([&] { validate_detection(d, cam); }), ErrorCode::kInvalidMask);
  d.mask = {Vec2(10, 10), Vec2(600, 10), Vec2(10, 100)};
  EXPECT_NO_THROW(validate_detection(d, cam));
  d.confidence = std::nan("");
  EXPECT_ANY_THROW(validate_detection(d, cam));
}

TEST(Camera, PolygonHelpers) {
  const Polygon2 sq = {Vec2(0, 0), Vec2(2, 0), Vec2(2, 2), Vec2(0, 2)};
  EXPECT_DOUBLE_EQ(std::abs(polygon_area(sq)), 4.0);
  EXPECT_TRUE(point_in_polygon(sq, Vec2(1, 1)));
  EXPECT_FALSE(point_in_polygon(sq, Vec2(2, 1)));  // on an edge
  EXPECT_FALSE(point_in_polygon(sq, Vec2(3, 1)));
  const Polygon2 hull = convex_hull_2d({Vec2(0, 0), Vec2(2, 0), Vec2(1, 0), Vec2(2, 2), Vec2(0, 2), Vec2(1, 1)});
  EXPECT_EQ(hull.size(), 4u);
  EXPECT_GT(polygon_area(hull), 0.0);  // counter-clockwise
}
