#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "glmmsel/dataset.hpp"
#include "glmmsel/errors.hpp"
#include "support/instances.hpp"
#include "support/temp_dir.hpp"

using namespace glmmsel;

namespace {

ClusterData make_cluster(std::string id, Eigen::MatrixXd X, Eigen::VectorXd y) {
  ClusterData c;
  c.id = std::move(id);
  c.w = Eigen::VectorXd::Ones(y.size());
  c.X = std::move(X);
  c.y = std::move(y);
  return c;
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Io;
}

}  // namespace

TEST(Standardize, DividesByColumnNorm) {
  Eigen::MatrixXd X(2, 1);
  X << 3, 4;
  Dataset raw({make_cluster("a", X, Eigen::Vector2d(1, 2))}, Family::Gaussian);
  const Dataset s = standardize(raw);
  EXPECT_NEAR(s.cluster(0).X(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(s.cluster(0).X(1, 0), 0.8, 1e-15);
  EXPECT_DOUBLE_EQ(s.scales()[0], 5.0);
}

TEST(Standardize, UnitColumnUnchanged) {
  Eigen::MatrixXd X(2, 1);
  X << 0.6, 0.8;
  const Dataset s = standardize(Dataset({make_cluster("a", X, Eigen::Vector2d(1, 2))}, Family::Gaussian));
  EXPECT_NEAR(s.scales()[0], 1.0, 1e-15);
  EXPECT_NEAR(s.cluster(0).X(0, 0), 0.6, 1e-15);
}

TEST(Standardize, ZeroColumnRejected) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(2, 2);
  X(0, 0) = 1.0;
  Dataset raw({make_cluster("a", X, Eigen::Vector2d(1, 2))}, Family::Gaussian);
  EXPECT_EQ(kind_of([&] { standardize(raw); }), ErrorKind::ZeroVarianceColumn);
}

TEST(Standardize, ColumnsHaveUnitNormAcrossClusters) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    support::InstanceShape shape;
    shape.p = 5;
    const Dataset d = support::random_dataset(rng, shape);
    for (Index k = 0; k < d.p(); ++k) {
      double ss = 0.0;
      for (const auto& c : d.clusters()) ss += c.X.col(k).squaredNorm();
      EXPECT_NEAR(std::sqrt(ss), 1.0, 1e-10);
    }
  }
}

TEST(Standardize, ScaleRoundTrip) {
  std::mt19937_64 rng(5);
  const Eigen::VectorXd scales = support::random_vector(rng, 6).cwiseAbs().array() + 0.1;
  Coefficients c{support::random_vector(rng, 6), support::random_gamma(rng, 6)};
  const Coefficients back = to_standardized_scale(to_original_scale(c, scales), scales);
  EXPECT_LT((back.beta - c.beta).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((back.gamma - c.gamma).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Standardize, ApplyScalesMatchesTraining) {
  std::mt19937_64 rng(3);
  support::InstanceShape shape;
  shape.standardized = false;
  const Dataset raw = support::random_dataset(rng, shape);
  const Dataset s = standardize(raw);
  const Dataset again = apply_scales(raw, s.scales());
  for (Index i = 0; i < raw.m(); ++i) EXPECT_EQ(again.cluster(i).X, s.cluster(i).X);
}

TEST(Dataset, RejectsNonPositiveWeights) {
  auto c = make_cluster("a", Eigen::MatrixXd::Ones(2, 1), Eigen::Vector2d(1, 2));
  c.w[1] = 0.0;
  EXPECT_EQ(kind_of([&] { Dataset({c}, Family::Gaussian); }), ErrorKind::InvalidConfig);
}

TEST(Dataset, RejectsEmptyInput) {
  EXPECT_EQ(kind_of([] { Dataset({}, Family::Gaussian); }), ErrorKind::EmptyDataset);
  auto c = make_cluster("a", Eigen::MatrixXd(0, 1), Eigen::VectorXd(0));
  EXPECT_EQ(kind_of([&] { Dataset({c}, Family::Gaussian); }), ErrorKind::EmptyCluster);
}

TEST(Dataset, BernoulliNeedsBinaryResponse) {
  auto c = make_cluster("a", Eigen::MatrixXd::Ones(2, 1), Eigen::Vector2d(1, 2));
  EXPECT_EQ(kind_of([&] { Dataset({c}, Family::Bernoulli); }), ErrorKind::NonBinaryResponse);
  c.y << 0, 1;
  EXPECT_NO_THROW(Dataset({c}, Family::Bernoulli));
}

TEST(Dataset, FindCluster) {
  Dataset d({make_cluster("a", Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1)),
             make_cluster("b", Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1))},
            Family::Gaussian);
  EXPECT_EQ(d.find_cluster("b"), 1);
  EXPECT_EQ(d.find_cluster("z"), -1);
  EXPECT_EQ(d.n_total(), 2);
}

TEST(Simulate, ClusterCountAndSupport) {
  SimConfig cfg;
  cfg.n_total = 1000;
  cfg.p = 1000;
  cfg.seed = 7;
  const SyntheticData s = generate_synthetic(cfg);
  EXPECT_EQ(s.data.m(), 100);
  EXPECT_EQ(s.data.n_total(), 1000);
  EXPECT_EQ((s.truth.beta0.array() != 0.0).count(), 5);
  EXPECT_EQ((s.truth.gamma0.array() != 0.0).count(), 3);
  for (Index k = 0; k < cfg.p; ++k) {
    if (s.truth.gamma0[k] != 0.0) EXPECT_NE(s.truth.beta0[k], 0.0);
  }
  for (const auto& c : s.data.clusters()) EXPECT_GE(c.size(), 1);
}

TEST(Simulate, SameSeedIsBitIdentical) {
  SimConfig cfg;
  cfg.n_total = 200;
  cfg.p = 30;
  cfg.seed = 42;
  const SyntheticData a = generate_synthetic(cfg);
  const SyntheticData b = generate_synthetic(cfg);
  ASSERT_EQ(a.data.m(), b.data.m());
  for (Index i = 0; i < a.data.m(); ++i) {
    EXPECT_EQ(a.data.cluster(i).X, b.data.cluster(i).X);
    EXPECT_EQ(a.data.cluster(i).y, b.data.cluster(i).y);
  }
  EXPECT_EQ(a.truth.beta0, b.truth.beta0);
  cfg.seed = 43;
  const SyntheticData c = generate_synthetic(cfg);
  EXPECT_NE(a.data.cluster(0).y, c.data.cluster(0).y);
}

TEST(Simulate, UncorrelatedDesignHasSmallCorrelation) {
  SimConfig cfg;
  cfg.n_total = 5000;
  cfg.p = 4;
  cfg.s_fixed = 2;
  cfg.s_random = 1;
  cfg.rho = 0.0;
  const Dataset d = generate_synthetic(cfg).data;
  Eigen::MatrixXd all(d.n_total(), d.p());
  Index row = 0;
  for (const auto& c : d.clusters()) {
    all.middleRows(row, c.size()) = c.X;
    row += c.size();
  }
  const Eigen::MatrixXd centered = all.rowwise() - all.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(d.n_total() - 1);
  for (Index a = 0; a < 4; ++a) {
    for (Index b = a + 1; b < 4; ++b) {
      EXPECT_LT(std::abs(cov(a, b) / std::sqrt(cov(a, a) * cov(b, b))), 0.05);
    }
  }
}

TEST(Simulate, Ar1CorrelationMatchesRho) {
  SimConfig cfg;
  cfg.n_total = 20000;
  cfg.p = 3;
  cfg.s_fixed = 1;
  cfg.s_random = 0;
  cfg.rho = 0.5;
  const Dataset d = generate_synthetic(cfg).data;
  double s01 = 0, s00 = 0, s11 = 0, s02 = 0, s22 = 0;
  for (const auto& c : d.clusters()) {
    s01 += c.X.col(0).dot(c.X.col(1));
    s02 += c.X.col(0).dot(c.X.col(2));
    s00 += c.X.col(0).squaredNorm();
    s11 += c.X.col(1).squaredNorm();
    s22 += c.X.col(2).squaredNorm();
  }
  EXPECT_NEAR(s01 / std::sqrt(s00 * s11), 0.5, 0.03);
  EXPECT_NEAR(s02 / std::sqrt(s00 * s22), 0.25, 0.03);
}

TEST(Simulate, SignalToNoiseIsOne) {
  SimConfig cfg;
  cfg.n_total = 10000;
  cfg.p = 20;
  const SyntheticData s = generate_synthetic(cfg);
  const auto eta = true_linear_predictor(s.data, s.truth);
  double sum = 0.0, ss = 0.0;
  for (const auto& e : eta) {
    sum += e.sum();
    ss += e.squaredNorm();
  }
  const double n = static_cast<double>(s.data.n_total());
  const double var = (ss - sum * sum / n) / (n - 1);
  EXPECT_NEAR(var / s.truth.sigma2, 1.0, 0.1);
}

TEST(Simulate, BernoulliResponsesAreBinary) {
  SimConfig cfg;
  cfg.n_total = 300;
  cfg.p = 10;
  cfg.family = Family::Bernoulli;
  const SyntheticData s = generate_synthetic(cfg);
  for (const auto& c : s.data.clusters()) {
    EXPECT_TRUE(((c.y.array() == 0.0) || (c.y.array() == 1.0)).all());
  }
}

TEST(Simulate, StudySharesTruthAndClusters) {
  SimConfig cfg;
  cfg.n_total = 100;
  cfg.p = 10;
  const SyntheticStudy s = generate_study(cfg);
  EXPECT_EQ(s.train.m(), s.validation.m());
  EXPECT_EQ(s.train.m(), s.test.m());
  EXPECT_EQ(s.train.cluster(3).id, s.test.cluster(3).id);
  EXPECT_NE(s.train.cluster(0).y, s.validation.cluster(0).y);
}

TEST(Simulate, InvalidConfigs) {
  SimConfig cfg;
  cfg.p = 10;
  cfg.s_fixed = 5;
  cfg.s_random = 6;
  EXPECT_EQ(kind_of([&] { generate_synthetic(cfg); }), ErrorKind::InvalidConfig);
  cfg.s_random = 3;
  cfg.rho = 1.0;
  EXPECT_EQ(kind_of([&] { generate_synthetic(cfg); }), ErrorKind::InvalidConfig);
  cfg.rho = 0.5;
  cfg.s_fixed = 11;
  EXPECT_EQ(kind_of([&] { generate_synthetic(cfg); }), ErrorKind::InvalidConfig);
  cfg.s_fixed = 5;
  cfg.family = Family::Poisson;
  EXPECT_EQ(kind_of([&] { generate_synthetic(cfg); }), ErrorKind::Unsupported);
}

TEST(Simulate, TruthOnStandardizedPredictors) {
  SimConfig cfg;
  cfg.n_total = 200;
  cfg.p = 8;
  const SyntheticData s = generate_synthetic(cfg);
  const Dataset st = standardize(s.data);
  const auto raw_eta = true_linear_predictor(s.data, s.truth);
  const auto std_eta = true_linear_predictor(st, s.truth);
  for (std::size_t i = 0; i < raw_eta.size(); ++i) {
    EXPECT_LT((raw_eta[i] - std_eta[i]).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Csv, LoadsTwoClusters) {
  support::TempDir dir;
  const auto path = dir.file("d.csv");
  support::write_text(path, "g,y,x1,x2\na,1,0.5,1\na,2,1.5,0\nb,3,2,1\nb,4,1,1\n");
  const Dataset d = load_csv(path, {"g", "y", {}});
  EXPECT_EQ(d.m(), 2);
  EXPECT_EQ(d.p(), 2);
  EXPECT_EQ(d.n_total(), 4);
  EXPECT_EQ(d.cluster(1).id, "b");
  EXPECT_DOUBLE_EQ(d.cluster(0).X(1, 0), 1.5);
}

TEST(Csv, SelectsPredictors) {
  support::TempDir dir;
  const auto path = dir.file("d.csv");
  support::write_text(path, "g,y,x1,x2\na,1,0.5,1\nb,3,2,1\n");
  const Dataset d = load_csv(path, {"g", "y", {"x2"}});
  EXPECT_EQ(d.p(), 1);
  EXPECT_DOUBLE_EQ(d.cluster(0).X(0, 0), 1.0);
}

TEST(Csv, NonNumericResponseNamesLine) {
  support::TempDir dir;
  const auto path = dir.file("d.csv");
  support::write_text(path, "g,y,x1\na,1,0.5\na,abc,1\n");
  try {
    load_csv(path, {"g", "y", {}});
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
}

TEST(Csv, ErrorKinds) {
  support::TempDir dir;
  const auto header_only = dir.file("h.csv");
  support::write_text(header_only, "g,y,x1\n");
  EXPECT_EQ(kind_of([&] { load_csv(header_only, {"g", "y", {}}); }), ErrorKind::EmptyDataset);

  const auto missing = dir.file("m.csv");
  support::write_text(missing, "g,y,x1\na,1,2\n");
  EXPECT_EQ(kind_of([&] { load_csv(missing, {"g", "response", {}}); }), ErrorKind::MissingColumn);
  EXPECT_EQ(kind_of([&] { load_csv(missing, {"g", "y", {"x9"}}); }), ErrorKind::MissingColumn);

  const auto blank_id = dir.file("b.csv");
  support::write_text(blank_id, "g,y,x1\n,1,2\n");
  EXPECT_EQ(kind_of([&] { load_csv(blank_id, {"g", "y", {}}); }), ErrorKind::EmptyCluster);

  const auto nonbinary = dir.file("n.csv");
  support::write_text(nonbinary, "g,y,x1\na,2,2\na,0,1\n");
  EXPECT_EQ(kind_of([&] { load_csv(nonbinary, {"g", "y", {}}, Family::Bernoulli); }),
            ErrorKind::NonBinaryResponse);

  EXPECT_EQ(kind_of([&] { load_csv(dir.file("absent.csv"), {"g", "y", {}}); }), ErrorKind::Io);
}

TEST(Csv, WriteLoadRoundTrip) {
  support::TempDir dir;
  std::mt19937_64 rng(9);
  support::InstanceShape shape;
  shape.standardized = false;
  const Dataset d = support::random_dataset(rng, shape);
  const auto path = dir.file("rt.csv");
  write_csv(path, d);
  const Dataset back = load_csv(path, {"cluster", "y", {}});
  ASSERT_EQ(back.m(), d.m());
  for (Index i = 0; i < d.m(); ++i) {
    EXPECT_EQ(back.cluster(i).id, d.cluster(i).id);
    EXPECT_EQ(back.cluster(i).X, d.cluster(i).X);
    EXPECT_EQ(back.cluster(i).y, d.cluster(i).y);
  }
}
