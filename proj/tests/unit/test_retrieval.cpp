#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "usdrecon/retrieval/embedding_index.hpp"
#include "usdrecon/retrieval/labels.hpp"
#include "usdrecon/retrieval/manifest.hpp"
#include "support/testing.hpp"

using namespace usdrecon;
using usdrecon::testing::error_code_of;
using usdrecon::testing::spit;
using usdrecon::testing::TempDir;

namespace {

AssetRecord record(std::string id, std::vector<std::string> labels,
                   std::vector<std::vector<double>> embeddings) {
  AssetRecord r;
  r.id = std::move(id);
  r.labels = std::move(labels);
  r.embeddings = std::move(embeddings);
  return r;
}

// Independent oracle: long-double cosine.
double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  long double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<long double>(a[i]) * b[i];
    aa += static_cast<long double>(a[i]) * a[i];
    bb += static_cast<long double>(b[i]) * b[i];
  }
  return static_cast<double>(ab / std::sqrt(aa * bb));
}

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t d) {
  std::normal_distribution<double> n(0, 1);
  std::vector<double> v(d);
  for (double& x : v) x = n(rng);
  return v;
}

std::vector<AssetRecord> random_assets(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  const char* labels[] = {"chair", "table", "couch"};
  std::vector<AssetRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::vector<double>> views;
    const std::size_t n_views = 4 + i % 3;
    for (std::size_t v = 0; v < n_views; ++v) views.push_back(gaussian(rng, d));
    out.push_back(record("a" + std::to_string(i), {labels[i % 3]}, views));
  }
  return out;
}

}  // namespace

TEST(Index, EmptyIndexEmptyResult) {
  const EmbeddingIndex idx = build_index({});
  EXPECT_TRUE(idx.empty());
  const std::vector<double> q = {1, 0};
  EXPECT_TRUE(query_similar(idx, q).empty());
}

TEST(Index, CountsEveryView) {
  std::mt19937_64 rng(1);
  std::vector<AssetRecord> a;
  for (int i = 0; i < 3; ++i) {
    a.push_back(record("x" + std::to_string(i), {"chair"},
                       {gaussian(rng, 8), gaussian(rng, 8), gaussian(rng, 8), gaussian(rng, 8)}));
  }
  const EmbeddingIndex idx = build_index(a);
  EXPECT_EQ(idx.size(), 12u);
  EXPECT_EQ(idx.asset_count(), 3u);
  EXPECT_EQ(idx.dimension(), 8u);
}

TEST(Index, BuildErrors) {
  std::vector<AssetRecord> dup = {record("a", {"chair"}, {{1, 0}}), record("a", {"chair"}, {{0, 1}})};
  EXPECT_EQ(error_code_of([&] { build_index(dup); }), ErrorCode::kDuplicateId);

  std::vector<AssetRecord> mixed = {record("a", {"chair"}, {{1, 0}}), record("b", {"chair"}, {{0, 1, 0}})};
  EXPECT_EQ(error_code_of([&] { build_index(mixed); }), ErrorCode::kSchema);

  std::vector<AssetRecord> zero = {record("a", {"chair"}, {{0, 0}})};
  EXPECT_EQ(error_code_of([&] { build_index(zero); }), ErrorCode::kInvalidEmbedding);

  std::vector<AssetRecord> none = {record("a", {"chair"}, {})};
  EXPECT_EQ(error_code_of([&] { build_index(none); }), ErrorCode::kSchema);
}

TEST(Index, HandComputed2d) {
  const std::vector<AssetRecord> a = {record("e1", {"chair"}, {{1, 0}}), record("e2", {"chair"}, {{0, 1}}),
                                      record("e3", {"chair"}, {{0.6, 0.8}})};
  const EmbeddingIndex idx = build_index(a);
  const std::vector<double> q = {1, 0};
  const auto r = query_similar(idx, q, std::nullopt, 2);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].asset_id, "e1");
  EXPECT_NEAR(r[0].score, 1.0, 1e-12);
  EXPECT_EQ(r[1].asset_id, "e3");
  EXPECT_NEAR(r[1].score, 0.6, 1e-12);
}

TEST(Index, SelfQueryAndOrthogonal) {
  std::mt19937_64 rng(2);
  const auto assets = random_assets(rng, 20, 16);
  const EmbeddingIndex idx = build_index(assets);
  for (const AssetRecord& a : assets) {
    for (std::size_t v = 0; v < a.embeddings.size(); ++v) {
      const auto r = query_similar(idx, a.embeddings[v]);
      ASSERT_EQ(r.size(), 1u);
      EXPECT_EQ(r[0].asset_id, a.id);
      EXPECT_EQ(r[0].view_index, v);
      EXPECT_NEAR(r[0].score, 1.0, 1e-6);
    }
  }

  std::vector<AssetRecord> axes = {record("x", {"chair"}, {{1, 0, 0, 0}}), record("y", {"chair"}, {{0, 1, 0, 0}})};
  const std::vector<double> q = {0, 0, 3, -4};
  for (const QueryResult& r : query_similar(build_index(axes), q, std::nullopt, 5)) EXPECT_NEAR(r.score, 0.0, 1e-6);
}

TEST(Index, Top1MatchesBruteForce) {
  std::mt19937_64 rng(3);
  const auto assets = random_assets(rng, 200, 32);
  const EmbeddingIndex idx = build_index(assets);
  for (int t = 0; t < 500; ++t) {
    const auto q = gaussian(rng, 32);
    double best = -2;
    std::string best_id;
    for (const AssetRecord& a : assets) {
      for (const auto& e : a.embeddings) {
        const double c = oracle_cosine(q, e);
        if (c > best) {
          best = c;
          best_id = a.id;
        }
      }
    }
    const auto r = query_similar(idx, q);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].asset_id, best_id);
    EXPECT_NEAR(r[0].score, best, 1e-12);
  }
}

TEST(Index, RankingSortedDistinctAndScaleInvariant) {
  std::mt19937_64 rng(4);
  const auto assets = random_assets(rng, 40, 12);
  const EmbeddingIndex idx = build_index(assets);
  for (int t = 0; t < 100; ++t) {
    auto q = gaussian(rng, 12);
    const auto r = query_similar(idx, q, std::nullopt, 10);
    ASSERT_EQ(r.size(), 10u);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_TRUE(ids.insert(r[i].asset_id).second);
      if (i) {
        EXPECT_GE(r[i - 1].score, r[i].score);
      }
      EXPECT_GE(r[i].score, -1.0);
      EXPECT_LE(r[i].score, 1.0);
    }
    for (double& x : q) x *= 37.5;
    const auto scaled = query_similar(idx, q, std::nullopt, 10);
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_EQ(scaled[i].asset_id, r[i].asset_id);
  }
}

TEST(Index, LabelFilterIsSound) {
  std::mt19937_64 rng(5);
  const auto assets = random_assets(rng, 30, 8);
  const EmbeddingIndex idx = build_index(assets);
  for (int t = 0; t < 50; ++t) {
    const auto q = gaussian(rng, 8);
    const auto r = query_similar(idx, q, "table", 30);
    EXPECT_EQ(r.size(), 10u);
    for (const QueryResult& x : r) {
      const auto it = std::find_if(assets.begin(), assets.end(), [&](const AssetRecord& a) { return a.id == x.asset_id; });
      ASSERT_NE(it, assets.end());
      EXPECT_TRUE(it->has_label("table"));
    }
  }
  const std::vector<double> q = gaussian(rng, 8);
  EXPECT_TRUE(query_similar(idx, q, "piano", 3).empty());
}

TEST(Index, QueryErrors) {
  const EmbeddingIndex idx = build_index(std::vector<AssetRecord>{record("a", {"chair"}, {{1, 0}})});
  const std::vector<double> nan_q = {std::nan(""), 1};
  EXPECT_EQ(error_code_of([&] { query_similar(idx, nan_q); }), ErrorCode::kInvalidInput);
  const std::vector<double> wrong_dim = {1, 0, 0};
  EXPECT_EQ(error_code_of([&] { query_similar(idx, wrong_dim); }), ErrorCode::kSchema);
  const std::vector<double> ok = {1, 0};
  EXPECT_EQ(error_code_of([&] { query_similar(idx, ok, std::nullopt, 0); }), ErrorCode::kInvalidInput);
}

TEST(Labels, Canonicalization) {
  const LabelCanonicalizer c = LabelCanonicalizer::from_json_text(R"({"Church Bench": "chair", "sofa": "couch"})");
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c.canonical("church bench"), "chair");
  EXPECT_EQ(c.canonical("  CHURCH BENCH "), "chair");
  EXPECT_EQ(c.canonical("Sofa"), "couch");
  EXPECT_EQ(c.canonical(" Table"), "table");
  EXPECT_EQ(error_code_of([] { LabelCanonicalizer::from_json_text("[1,2]"); }), ErrorCode::kSchema);
}

TEST(Manifest, RoundTripAndRelativePaths) {
  TempDir dir;
  std::vector<AssetRecord> recs = {record("chair_a", {"chair"}, {{1, 0, 0}, {0, 1, 0}}),
                                   record("table_b", {"table", "desk"}, {{0, 0, 1}})};
  recs[0].mesh_path = dir / "chair.obj";
  recs[1].mesh_path = dir / "table.obj";
  write_asset_manifest(dir / "assets.json", recs);
  const auto back = read_asset_manifest(dir / "assets.json");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].labels, recs[1].labels);
  EXPECT_EQ(back[0].embeddings, recs[0].embeddings);
  EXPECT_EQ(std::filesystem::weakly_canonical(back[0].mesh_path), std::filesystem::weakly_canonical(recs[0].mesh_path));

  spit(dir / "rel.json", R"([{"id":"x","labels":["chair"],"mesh":"m/x.obj","embeddings":[[1,2]]}])");
  EXPECT_EQ(read_asset_manifest(dir / "rel.json")[0].mesh_path, dir / "m/x.obj");
}

TEST(Manifest, Errors) {
  TempDir dir;
  spit(dir / "dup.json", R"([{"id":"x","labels":["chair"],"mesh":"x.obj","embeddings":[[1,2]]},
                            {"id":"x","labels":["chair"],"mesh":"y.obj","embeddings":[[2,1]]}])");
  EXPECT_EQ(error_code_of([&] { read_asset_manifest(dir / "dup.json"); }), ErrorCode::kDuplicateId);
  spit(dir / "nolabels.json", R"([{"id":"x","mesh":"x.obj","embeddings":[[1,2]]}])");
  EXPECT_EQ(error_code_of([&] { read_asset_manifest(dir / "nolabels.json"); }), ErrorCode::kSchema);
  spit(dir / "notjson.json", "{oops");
  EXPECT_EQ(error_code_of([&] { read_asset_manifest(dir / "notjson.json"); }), ErrorCode::kSchema);
  EXPECT_EQ(error_code_of([&] { read_asset_manifest(dir / "missing.json"); }), ErrorCode::kIo);
}
