#include <doctest.h>

#include <cmath>

#include "bbo/gp.hpp"
#include "dense_oracle.hpp"
#include "test_instances.hpp"
#include "test_util.hpp"

using namespace bbo;

namespace {

// 1-D SE model with a single observation (x=0, y=2), unit scale, no noise.
GPModel one_point_model() {
  Domain d({VariableSpec::euclidean("x", -5, 5)});
  KernelSpec spec = KernelSpec::for_domain(KernelKind::SquaredExp, d);
  KernelHyperparams hp = KernelHyperparams::ones(1);
  hp.noise_var = 0.0;
  Eigen::VectorXd y(1);
  y(0) = 2.0;
  return GPModel::fit(spec, hp, {Point::real({0.0})}, y);
}

}  // namespace

TEST_CASE("empty model predicts the prior") {
  Domain d({VariableSpec::euclidean("x", 0, 1)});
  KernelSpec spec = KernelSpec::for_domain(KernelKind::SquaredExp, d);
  KernelHyperparams hp = KernelHyperparams::ones(1);
  hp.scale = 2.5;
  GPModel gp = GPModel::fit(spec, hp, {}, Eigen::VectorXd());
  Posterior post = gp.posterior(Point::real({0.7}));
  CHECK(post.mean == doctest::Approx(0.0));
  CHECK(post.sigma == doctest::Approx(std::sqrt(2.5)));
}

TEST_CASE("single observation solves the 1x1 system") {
  GPModel gp = one_point_model();
  // alpha = (K + eta^2 I)^{-1} Y = [2] since K = [1]
  Eigen::VectorXd alpha =
      gp.factor().transpose().triangularView<Eigen::Upper>().solve(gp.whitened());
  REQUIRE(alpha.size() == 1);
  CHECK(alpha(0) == doctest::Approx(2.0).epsilon(1e-9));

  Posterior at_obs = gp.posterior(Point::real({0.0}));
  CHECK(at_obs.mean == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(at_obs.sigma == doctest::Approx(0.0).epsilon(1e-6));

  Posterior away = gp.posterior(Point::real({1.0}));
  CHECK(away.mean == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-9));      // 1.21306
  CHECK(away.sigma == doctest::Approx(std::sqrt(1.0 - std::exp(-1.0))).epsilon(1e-9));
  CHECK(away.mean == doctest::Approx(1.2130613194252668).epsilon(1e-9));
  CHECK(away.sigma * away.sigma == doctest::Approx(0.6321205588285577).epsilon(1e-9));
}

TEST_CASE("duplicate points without noise are jitter-rescued or rejected") {
  Domain d({VariableSpec::euclidean("x", 0, 1)});
  KernelSpec spec = KernelSpec::for_domain(KernelKind::SquaredExp, d);
  KernelHyperparams hp = KernelHyperparams::ones(1);
  hp.noise_var = 0.0;
  Eigen::VectorXd y(2);
  y << 1.0, 1.0;
  std::vector<GPInput> pts = {Point::real({0.5}), Point::real({0.5})};
  try {
    GPModel gp = GPModel::fit(spec, hp, pts, y);
    CHECK(gp.jitter() > 0.0);
    CHECK(std::isfinite(gp.posterior(Point::real({0.2})).mean));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularGram);
  }
}

TEST_CASE("factor invariant holds after fit") {
  Rng rng = make_rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = bbo_test::random_gp_instance(rng, 30);
    GPModel gp = GPModel::fit(inst.spec, inst.hp, inst.inputs, inst.y);
    Eigen::MatrixXd k = gram_matrix(inst.spec, inst.hp, inst.inputs);
    k.diagonal().array() += inst.hp.noise_var + gp.jitter();
    const Eigen::MatrixXd recon = gp.factor() * gp.factor().transpose();
    CHECK((recon - k).norm() <= 1e-8 * std::max(1.0, k.norm()));
  }
}

TEST_CASE("refit is deterministic") {
  Rng rng = make_rng(5);
  auto inst = bbo_test::random_gp_instance(rng, 20);
  GPModel a = GPModel::fit(inst.spec, inst.hp, inst.inputs, inst.y);
  GPModel b = GPModel::fit(inst.spec, inst.hp, inst.inputs, inst.y);
  GPInput probe(inst.domain.uniform_point(rng));
  if (inst.fidelity) probe.fid = inst.fidelity->z_hf();
  CHECK(a.posterior(probe).mean == b.posterior(probe).mean);
  CHECK(a.posterior(probe).sigma == b.posterior(probe).sigma);
}

TEST_CASE("posterior matches the dense oracle") {
  Rng rng = make_rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = bbo_test::random_gp_instance(rng, 40);
    GPModel gp = GPModel::fit(inst.spec, inst.hp, inst.inputs, inst.y);
    auto oracle = bbo_test::DenseOracle::of(gp);
    for (int probe = 0; probe < 5; ++probe) {
      GPInput q(inst.domain.uniform_point(rng));
      if (inst.fidelity) {
        Point z;
        for (int k = 0; k < inst.fidelity->dim(); ++k) z.coords.emplace_back(uniform01(rng));
        q.fid = std::move(z);
      }
      const Posterior post = gp.posterior(q);
      const auto [mean, var] = oracle.posterior_mean_var(q);
      CHECK(post.mean == doctest::Approx(mean).epsilon(1e-8));
      CHECK(post.var_raw == doctest::Approx(var).epsilon(1e-8).scale(1.0));
    }
  }
}

TEST_CASE("marginal likelihood scalar cases") {
  Domain d({VariableSpec::euclidean("x", 0, 1)});
  KernelSpec spec = KernelSpec::for_domain(KernelKind::SquaredExp, d);
  KernelHyperparams hp = KernelHyperparams::ones(1);
  hp.noise_var = 0.0;

  Eigen::VectorXd y0(1), y1(1);
  y0 << 0.0;
  y1 << 1.0;
  GPModel gp0 = GPModel::fit(spec, hp, {Point::real({0.3})}, y0);
  GPModel gp1 = GPModel::fit(spec, hp, {Point::real({0.3})}, y1);
  CHECK(gp0.log_marginal_likelihood() == doctest::Approx(-0.9189385332046727).epsilon(1e-10));
  CHECK(gp1.log_marginal_likelihood() == doctest::Approx(-1.4189385332046727).epsilon(1e-10));

  GPModel empty = GPModel::fit(spec, hp, {}, Eigen::VectorXd());
  CHECK(bbo_test::error_code_of([&] { empty.log_marginal_likelihood(); }) ==
        ErrorCode::EmptyData);
}

TEST_CASE("marginal likelihood matches the dense oracle") {
  Rng rng = make_rng(404);
  for (int trial = 0; trial < 25; ++trial) {
    auto inst = bbo_test::random_gp_instance(rng, 35);
    GPModel gp = GPModel::fit(inst.spec, inst.hp, inst.inputs, inst.y);
    auto oracle = bbo_test::DenseOracle::of(gp);
    const double mll = gp.log_marginal_likelihood();
    CHECK(mll == doctest::Approx(oracle.log_marginal_likelihood()).epsilon(1e-6));
  }
}

TEST_CASE("additive component posterior") {
  Rng rng = make_rng(88);
  Domain d({VariableSpec::euclidean("a", 0, 1), VariableSpec::euclidean("b", 0, 1)});
  Decomposition dec;
  dec.groups = {{0}, {1}};
  dec.max_group_size = 1;
  KernelSpec spec = KernelSpec::additive(KernelKind::SquaredExp, d, dec);
  KernelHyperparams hp = KernelHyperparams::ones(2);
  hp.noise_var = 1e-3;

  SUBCASE("prior component") {
    GPModel gp = GPModel::fit(spec, hp, {}, Eigen::VectorXd());
    Posterior post = gp.posterior_component(0, Point::real({0.5}));
    CHECK(post.mean == doctest::Approx(0.0));
    CHECK(post.sigma == doctest::Approx(std::sqrt(0.5)));  // per-group unit mass is 1/M
  }

  SUBCASE("component means sum to the joint mean") {
    std::vector<GPInput> pts;
    Eigen::VectorXd y(3);
    for (int i = 0; i < 3; ++i) {
      pts.emplace_back(d.uniform_point(rng));
      y(i) = standard_normal(rng);
    }
    GPModel gp = GPModel::fit(spec, hp, pts, y);
    for (int probe = 0; probe < 10; ++probe) {
      Point x = d.uniform_point(rng);
      double sum = 0.0;
      for (int j = 0; j < 2; ++j) {
        Point xj;
        xj.coords = {x[static_cast<std::size_t>(j)]};
        sum += gp.posterior_component(j, xj).mean;
      }
      CHECK(sum == doctest::Approx(gp.posterior(x).mean).epsilon(1e-10));
    }
  }

  SUBCASE("component moments match the brute-force oracle") {
    std::vector<GPInput> pts;
    Eigen::VectorXd y(3);
    int i = 0;
    for (double a : {0.1, 0.5, 0.9}) {
      pts.emplace_back(Point::real({a, 1.0 - a}));
      y(i++) = std::sin(6 * a);
    }
    GPModel gp = GPModel::fit(spec, hp, pts, y);
    auto oracle = bbo_test::DenseOracle::of(gp);
    for (int j = 0; j < 2; ++j) {
      for (double xv : {0.0, 0.33, 0.71}) {
        Point xj = Point::real({xv});
        Posterior post = gp.posterior_component(j, xj);
        const auto [mean, var] = oracle.component_mean_var(j, xj, std::nullopt);
        CHECK(post.mean == doctest::Approx(mean).epsilon(1e-8));
        CHECK(post.var_raw == doctest::Approx(var).epsilon(1e-8).scale(1.0));
      }
    }
  }

  SUBCASE("non-additive kernels reject component queries") {
    KernelSpec plain = KernelSpec::for_domain(KernelKind::SquaredExp, d);
    GPModel gp = GPModel::fit(plain, hp, {}, Eigen::VectorXd());
    CHECK(bbo_test::error_code_of([&] { gp.posterior_component(0, Point::real({0.5})); }) ==
          ErrorCode::NotAdditive);
    GPModel add = GPModel::fit(spec, hp, {}, Eigen::VectorXd());
    CHECK(bbo_test::error_code_of([&] { add.posterior_component(7, Point::real({0.5})); }) ==
          ErrorCode::BadGroupIndex);
  }
}

TEST_CASE("joint samples follow the posterior") {
  GPModel gp = one_point_model();

  SUBCASE("observed point reproduces exactly") {
    Rng rng = make_rng(11);
    for (int i = 0; i < 20; ++i) {
      Eigen::VectorXd s = gp.joint_sample({Point::real({0.0})}, rng);
      CHECK(s(0) == doctest::Approx(2.0).epsilon(1e-7));
    }
  }

  SUBCASE("single point empirical mean") {
    Rng rng = make_rng(12);
    const GPInput q(Point::real({0.8}));
    const Posterior post = gp.posterior(q);
    double total = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) total += gp.joint_sample({q}, rng)(0);
    const double mc_mean = total / n;
    CHECK(std::fabs(mc_mean - post.mean) <= 4.0 * post.sigma / std::sqrt(n));
  }

  SUBCASE("perfectly correlated points sample identically") {
    Rng rng = make_rng(13);
    std::vector<GPInput> pts = {Point::real({0.4}), Point::real({0.4})};
    Eigen::VectorXd s = gp.joint_sample(pts, rng);
    CHECK(s(0) == doctest::Approx(s(1)).epsilon(1e-7));
  }
}

TEST_CASE("hallucination preserves means and shrinks variance") {
  SUBCASE("no pending points is a no-op") {
    GPModel gp = one_point_model();
    GPModel h = gp.hallucinate({});
    GPInput q(Point::real({0.6}));
    CHECK(h.posterior(q).mean == gp.posterior(q).mean);
    CHECK(h.posterior(q).sigma == gp.posterior(q).sigma);
  }

  SUBCASE("noiseless pending point pins its own variance") {
    GPModel gp = one_point_model();
    const GPInput pending(Point::real({1.5}));
    GPModel h = gp.hallucinate({pending});
    CHECK(h.posterior(pending).sigma == doctest::Approx(0.0).epsilon(1e-6));
    for (double x : {-1.0, 0.0, 0.5, 1.5, 3.0}) {
      const GPInput q(Point::real({x}));
      CHECK(h.posterior(q).mean == doctest::Approx(gp.posterior(q).mean).epsilon(1e-9));
      CHECK(h.posterior(q).sigma <= gp.posterior(q).sigma + 1e-9);
    }
  }

  SUBCASE("random models, several pending points") {
    Rng rng = make_rng(314);
    for (int trial = 0; trial < 10; ++trial) {
      auto inst = bbo_test::random_gp_instance(rng, 25, true, false);
      GPModel gp = GPModel::fit(inst.spec, inst.hp, inst.inputs, inst.y);
      std::vector<GPInput> pending = {GPInput(inst.domain.uniform_point(rng)),
                                      GPInput(inst.domain.uniform_point(rng))};
      GPModel h = gp.hallucinate(pending);
      for (int probe = 0; probe < 50; ++probe) {
        const GPInput q(inst.domain.uniform_point(rng));
        CHECK(std::fabs(h.posterior(q).mean - gp.posterior(q).mean) <= 1e-6);
        CHECK(h.posterior(q).sigma <= gp.posterior(q).sigma + 1e-8);
      }
    }
  }
}

TEST_CASE("adding observations never increases posterior sigma") {
  Rng rng = make_rng(55);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = bbo_test::random_gp_instance(rng, 15, true, false);
    GPModel gp = GPModel::fit(inst.spec, inst.hp, inst.inputs, inst.y);
    Eigen::VectorXd extra(1);
    extra(0) = standard_normal(rng);
    GPModel bigger = gp.extended({GPInput(inst.domain.uniform_point(rng))}, extra,
                                 inst.hp.noise_var);
    for (int probe = 0; probe < 20; ++probe) {
      const GPInput q(inst.domain.uniform_point(rng));
      CHECK(bigger.posterior(q).sigma <= gp.posterior(q).sigma + 1e-8);
    }
  }
}

TEST_CASE("posterior variance clamp never hides large negatives") {
  Rng rng = make_rng(606);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = bbo_test::random_gp_instance(rng, 40);
    GPModel gp = GPModel::fit(inst.spec, inst.hp, inst.inputs, inst.y);
    for (int probe = 0; probe < 10; ++probe) {
      GPInput q(inst.domain.uniform_point(rng));
      if (inst.fidelity) q.fid = inst.fidelity->z_hf();
      CHECK(gp.posterior(q).var_raw >= -1e-6 * inst.hp.scale);
    }
  }
}

TEST_CASE("thompson sample paths are self-consistent") {
  GPModel gp = one_point_model();
  Rng rng = make_rng(2718);
  ThompsonSample ts(gp, rng);
  const GPInput a(Point::real({0.5}));
  const GPInput b(Point::real({2.0}));
  const double va = ts.value(a);
  const double vb = ts.value(b);
  // revisiting a point returns the same path value
  CHECK(ts.value(a) == va);
  CHECK(ts.value(b) == vb);
  // at the observed point the path equals the observation
  CHECK(ts.value(GPInput(Point::real({0.0}))) == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("mll grid is maximized near the generating lengthscale") {
  // Data drawn from a known SE GP (l = 0.5); the MLL over a lengthscale grid
  // should pick a neighbor of the truth in most seeds.
  Domain d({VariableSpec::euclidean("x", 0, 1)});
  KernelSpec spec = KernelSpec::for_domain(KernelKind::SquaredExp, d);
  const std::vector<double> grid = {0.125, 0.25, 0.5, 1.0, 2.0};
  int hits = 0;
  for (int seed = 0; seed < 10; ++seed) {
    Rng rng = make_rng(9000 + seed);
    KernelHyperparams gen = KernelHyperparams::ones(1);
    gen.lengthscales[0] = 0.5;
    gen.noise_var = 1e-6;
    GPModel prior = GPModel::fit(spec, gen, {}, Eigen::VectorXd());
    std::vector<GPInput> pts;
    for (int i = 0; i < 25; ++i) pts.emplace_back(Point::real({i / 24.0}));
    Eigen::VectorXd y = prior.joint_sample(pts, rng);

    double best_l = 0.0, best_mll = -1e300;
    for (double l : grid) {
      KernelHyperparams hp = gen;
      hp.lengthscales[0] = l;
      const double mll = GPModel::fit(spec, hp, pts, y).log_marginal_likelihood();
      if (mll > best_mll) {
        best_mll = mll;
        best_l = l;
      }
    }
    if (best_l >= 0.25 && best_l <= 1.0) ++hits;
  }
  CHECK(hits >= 8);
}
