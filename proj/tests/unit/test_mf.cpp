#include <doctest.h>

#include <cmath>

#include "bbo/multi_fidelity.hpp"
#include "test_util.hpp"

using namespace bbo;

namespace {

FidelitySpace line_space(double z_hf = 1.0) {
  return FidelitySpace({VariableSpec::euclidean("z", 0, 1)}, Point::real({z_hf}),
                       [](const FidelityPoint& z) { return numeric(z[0]) + 0.1; });
}

FidelitySpace plane_space() {
  return FidelitySpace({VariableSpec::euclidean("z1", 0, 1), VariableSpec::euclidean("z2", 0, 1)},
                       Point::real({1.0, 1.0}),
                       [](const FidelityPoint& z) { return numeric(z[0]) + numeric(z[1]) + 0.1; });
}

GPModel joint_model(const FidelitySpace& space, const Domain& domain, int n, Rng& rng,
                    double noise = 1e-3) {
  KernelSpec spec = KernelSpec::product(KernelSpec::fidelity(KernelKind::ExpDecay, space),
                                        KernelSpec::for_domain(KernelKind::SquaredExp, domain));
  KernelHyperparams hp = KernelHyperparams::ones(domain.dim(), space.dim());
  hp.noise_var = noise;
  std::vector<GPInput> pts;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    Point z;
    for (int k = 0; k < space.dim(); ++k) z.coords.emplace_back(uniform01(rng));
    pts.emplace_back(GPInput(z, domain.uniform_point(rng)));
    y(i) = standard_normal(rng);
  }
  return GPModel::fit(spec, hp, pts, y);
}

}  // namespace

TEST_CASE("information gap hand values") {
  FidelitySpace line = line_space();
  CHECK(information_gap(line, line.z_hf()) == doctest::Approx(0.0));
  CHECK(information_gap(line, Point::real({0.0})) == doctest::Approx(1.0));

  FidelitySpace plane = plane_space();
  // normalized offset (0.3, 0.4): ||.||/sqrt(2) = 0.5/sqrt(2)
  CHECK(information_gap(plane, Point::real({0.7, 0.6})) ==
        doctest::Approx(0.35355339059327373).epsilon(1e-12));

  CHECK(bbo_test::error_code_of([&] { information_gap(line, Point::real({2.0})); }) ==
        ErrorCode::OutOfSpace);
}

TEST_CASE("candidate fidelities follow the variance threshold") {
  Rng rng = make_rng(42);
  Domain d({VariableSpec::euclidean("x", 0, 1)});
  FidelitySpace space = line_space();
  const Point x_t = Point::real({0.5});

  SUBCASE("grid of only z_hf") {
    GPModel gp = joint_model(space, d, 5, rng);
    FidelityFilter filter = FidelityFilter::for_gp(gp, space);
    auto cands = candidate_fidelities(gp, x_t, space, filter, {space.z_hf()});
    REQUIRE(cands.size() == 1);
    CHECK(cands[0] == space.z_hf());
  }

  SUBCASE("missing z_hf in the grid is an error") {
    GPModel gp = joint_model(space, d, 5, rng);
    FidelityFilter filter = FidelityFilter::for_gp(gp, space);
    CHECK(bbo_test::error_code_of([&] {
            candidate_fidelities(gp, x_t, space, filter, {Point::real({0.0})});
          }) == ErrorCode::GridMissingZhf);
  }

  SUBCASE("empty-data inclusion matches a hand evaluation of the rule") {
    KernelSpec spec =
        KernelSpec::product(KernelSpec::fidelity(KernelKind::ExpDecay, space),
                            KernelSpec::for_domain(KernelKind::SquaredExp, d));
    KernelHyperparams hp = KernelHyperparams::ones(1, 1);
    hp.scale = 2.0;
    GPModel gp = GPModel::fit(spec, hp, {}, Eigen::VectorXd());
    FidelityFilter filter = FidelityFilter::for_gp(gp, space);

    const std::vector<FidelityPoint> grid = {Point::real({0.0}), Point::real({0.5}),
                                             space.z_hf()};
    auto cands = candidate_fidelities(gp, x_t, space, filter, grid);
    // Prior tau at (z, x): sqrt(kappa0 / (2u+1)^alpha) with u = |z - 1|.
    for (const FidelityPoint& z : grid) {
      const double u = std::fabs(numeric(z[0]) - 1.0);
      const double tau = std::sqrt(2.0 / (2.0 * u + 1.0));
      const double xi = information_gap(space, z);
      const double threshold =
          std::sqrt(2.0) * xi * std::sqrt(space.cost(z) / space.cost(space.z_hf()));
      const bool expected = z == space.z_hf() || tau > threshold;
      const bool included = std::find(cands.begin(), cands.end(), z) != cands.end();
      CHECK(included == expected);
    }
  }

  SUBCASE("fidelities at or above the top cost are excluded") {
    FidelitySpace costly(
        {VariableSpec::euclidean("z", 0, 1)}, Point::real({0.5}),
        [](const FidelityPoint&) { return 1.0; });  // constant cost
    GPModel gp = joint_model(costly, d, 3, rng);
    FidelityFilter filter = FidelityFilter::for_gp(gp, costly);
    auto cands = candidate_fidelities(gp, x_t, costly, filter, costly.candidate_grid());
    REQUIRE(cands.size() == 1);  // nothing is strictly cheaper than z_hf
    CHECK(cands[0] == costly.z_hf());
  }
}

TEST_CASE("hallucinating at a fidelity can only remove it from the candidate set") {
  Rng rng = make_rng(7);
  Domain d({VariableSpec::euclidean("x", 0, 1)});
  FidelitySpace space = line_space();
  const Point x_t = Point::real({0.25});
  GPModel gp = joint_model(space, d, 8, rng, 1e-4);
  FidelityFilter filter = FidelityFilter::for_gp(gp, space);
  const auto grid = space.candidate_grid();
  const auto before = candidate_fidelities(gp, x_t, space, filter, grid);
  const FidelityPoint probe = Point::real({0.3});
  GPModel shrunk = gp.hallucinate({GPInput(probe, x_t)});
  const auto after = candidate_fidelities(shrunk, x_t, space, filter, grid);
  for (const auto& z : after) {
    CHECK(std::find(before.begin(), before.end(), z) != before.end());
  }
}

TEST_CASE("select_fidelity prefers cheap, ties broken by larger gap") {
  FidelitySpace space = line_space();
  FidelityFilter filter;
  filter.kernel_scale = 1.0;

  CHECK(select_fidelity({space.z_hf()}, space, filter) == space.z_hf());
  CHECK(select_fidelity({space.z_hf(), Point::real({0.2})}, space, filter) ==
        Point::real({0.2}));
  CHECK(bbo_test::error_code_of([&] { select_fidelity({}, space, filter); }) ==
        ErrorCode::EmptySet);

  // Constant-cost space: the tie-break picks the larger information gap.
  FidelitySpace flat({VariableSpec::euclidean("z", 0, 1)}, Point::real({1.0}),
                     [](const FidelityPoint&) { return 1.0; });
  FidelityFilter flat_filter;
  flat_filter.kernel_scale = 1.0;
  CHECK(select_fidelity({Point::real({0.6}), Point::real({0.2})}, flat, flat_filter) ==
        Point::real({0.2}));
}

TEST_CASE("an infinite gap reduces the rule to single fidelity") {
  Rng rng = make_rng(12);
  Domain d({VariableSpec::euclidean("x", 0, 1)});
  FidelitySpace space = line_space();
  GPModel gp = joint_model(space, d, 4, rng);
  FidelityFilter filter = FidelityFilter::for_gp(gp, space);
  filter.gap = [&space](const FidelityPoint& z) {
    return z == space.z_hf() ? 0.0 : std::numeric_limits<double>::infinity();
  };
  for (double xv : {0.0, 0.3, 0.9}) {
    auto cands = candidate_fidelities(gp, Point::real({xv}), space, filter,
                                      space.candidate_grid());
    REQUIRE(cands.size() == 1);
    CHECK(cands[0] == space.z_hf());
  }
}

TEST_CASE("two-step selection") {
  Rng rng = make_rng(2024);
  Domain d({VariableSpec::euclidean("x", 0, 1)});
  FidelitySpace space = line_space();
  AcqOptPolicy policy;
  policy.budget = 200;

  SUBCASE("degenerate fidelity space always queries z_hf") {
    FidelitySpace degenerate({VariableSpec::discrete_numeric("z", {1.0})}, Point::real({1.0}),
                             [](const FidelityPoint&) { return 1.0; });
    KernelSpec spec =
        KernelSpec::product(KernelSpec::fidelity(KernelKind::ExpDecay, degenerate),
                            KernelSpec::for_domain(KernelKind::SquaredExp, d));
    KernelHyperparams hp = KernelHyperparams::ones(1, 1);
    hp.noise_var = 1e-4;
    std::vector<GPInput> pts = {GPInput(Point::real({1.0}), Point::real({0.4}))};
    Eigen::VectorXd y(1);
    y << 1.0;
    GPModel gp = GPModel::fit(spec, hp, pts, y);
    AcqState state = AcqState::make({AcqKind::Ucb});
    state.step = 2;
    MfQuery q = mf_point_and_fidelity(gp, d, degenerate, AcqKind::Ucb, state, policy, rng);
    CHECK(q.z == degenerate.z_hf());
    CHECK(d.validate_point(q.x));
  }

  SUBCASE("empty data with a cheap passing fidelity picks it") {
    KernelSpec spec = KernelSpec::product(KernelSpec::fidelity(KernelKind::ExpDecay, space),
                                          KernelSpec::for_domain(KernelKind::SquaredExp, d));
    KernelHyperparams hp = KernelHyperparams::ones(1, 1);
    GPModel gp = GPModel::fit(spec, hp, {}, Eigen::VectorXd());
    AcqState state = AcqState::make({AcqKind::Ucb});
    state.step = 1;
    MfQuery q = mf_point_and_fidelity(gp, d, space, AcqKind::Ucb, state, policy, rng);
    // By the hand evaluation above, z = 0 passes at the prior and is cheapest.
    CHECK(numeric(q.z[0]) == doctest::Approx(0.0));
  }

  SUBCASE("plain kernels are rejected") {
    KernelSpec plain = KernelSpec::for_domain(KernelKind::SquaredExp, d);
    GPModel gp = GPModel::fit(plain, KernelHyperparams::ones(1), {}, Eigen::VectorXd());
    AcqState state = AcqState::make({AcqKind::Ucb});
    CHECK(bbo_test::error_code_of([&] {
            mf_point_and_fidelity(gp, d, space, AcqKind::Ucb, state, policy, rng);
          }) == ErrorCode::NotProductKernel);
  }
}

TEST_CASE("additive slice selection matches a joint grid search") {
  Rng rng = make_rng(31);
  std::vector<double> items;
  for (int i = 0; i < 5; ++i) items.push_back(i / 4.0);
  Domain d({VariableSpec::discrete_numeric("a", items),
            VariableSpec::discrete_numeric("b", items)});
  FidelitySpace space = line_space();
  Decomposition dec;
  dec.groups = {{0}, {1}};
  dec.max_group_size = 1;
  KernelSpec spec = KernelSpec::product(KernelSpec::fidelity(KernelKind::ExpDecay, space),
                                        KernelSpec::additive(KernelKind::SquaredExp, d, dec));
  KernelHyperparams hp = KernelHyperparams::ones(2, 1);
  hp.lengthscales = {0.4, 0.4};
  hp.noise_var = 1e-4;
  std::vector<GPInput> pts;
  Eigen::VectorXd y(7);
  for (int i = 0; i < 7; ++i) {
    Point z;
    z.coords.emplace_back(uniform01(rng));
    Point x = d.uniform_point(rng);
    y(i) = std::sin(5 * numeric(x[0])) - numeric(x[1]);
    pts.emplace_back(GPInput(z, x));
  }
  GPModel gp = GPModel::fit(spec, hp, pts, y);
  AcqState state = AcqState::make({AcqKind::AddUcb});
  state.step = 8;
  AcqOptPolicy policy;
  MfQuery q = mf_point_and_fidelity(gp, d, space, AcqKind::AddUcb, state, policy, rng);

  // Brute-force slice maximization of the summed component bounds at z_hf.
  const double root_beta = std::sqrt(ucb_beta(state.step, 2));
  double best = -1e300;
  Point best_point;
  for (const Point& p : d.enumerate(100)) {
    double total = 0.0;
    for (int j = 0; j < 2; ++j) {
      Point xj;
      xj.coords = {p[static_cast<std::size_t>(j)]};
      const Posterior post = gp.posterior_component(j, xj, space.z_hf());
      total += post.mean + root_beta * post.sigma;
    }
    if (total > best) {
      best = total;
      best_point = p;
    }
  }
  CHECK(q.x == best_point);
}
