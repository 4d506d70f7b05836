#include <gtest/gtest.h>

#include "equizeta/testing/selftest.hpp"

using namespace equizeta;

namespace {

EuclideanLatticeModel third_turn(cplx alpha = 0.0) { return make_euclidean_model(3, 1.0, two_pi / 3, 3, alpha); }

void expect_list(const std::vector<double>& got, const std::vector<double>& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "index " << i;
}

}  // namespace

TEST(LengthSpectrum, Examples) {
  expect_list(length_spectrum(LineModel{}, LineElement{2.0}, 10.0), {2.0}, 0.0);
  expect_list(length_spectrum(CircleModel{}, CircleElement{0.25}, 2.5), {-1.75, -0.75, 0.25, 1.25, 2.25}, 1e-15);
  expect_list(length_spectrum(Sphere2Model{}, Sphere2Element{1.0}, 8.0),
              {-1.0 - two_pi, 1.0 - two_pi, -1.0, 1.0, two_pi - 1.0, two_pi + 1.0}, 1e-12);
  expect_list(length_spectrum(CircleModel{}, CircleElement{0.0}, 2.5), {-2.0, -1.0, 1.0, 2.0}, 0.0);
  EXPECT_TRUE(length_spectrum(LineModel{}, LineElement{0.0}, 10.0).empty());
  expect_list(length_spectrum(IntegerLatticeModel{}, LatticeElement{-3}, 5.0), {-3.0}, 0.0);
  expect_list(length_spectrum(third_turn(), EuclideanElement{2, {}, 1}, 10.0), {-2.0, 2.0}, 1e-14);
}

TEST(LengthSpectrum, Sphere3MergesFamiliesAndReportsCollisions) {
  auto generic = length_spectrum_detail(Sphere3Model{}, Sphere3Element{1.0, std::numbers::sqrt2}, 7.0);
  EXPECT_EQ(generic.collisions, 0);
  EXPECT_EQ(generic.values.size(), 8u);
  auto coincident = length_spectrum_detail(Sphere3Model{}, Sphere3Element{1.0, 1.0}, 7.0);
  EXPECT_GT(coincident.collisions, 0);
  EXPECT_EQ(coincident.values.size(), 4u);
}

TEST(LengthSpectrum, InadmissibleElements) {
  EXPECT_THROW(length_spectrum(third_turn(), EuclideanElement{0, {}, 1}, 10.0), Error);
  EXPECT_THROW(length_spectrum(CircleModel{}, LineElement{1.0}, 10.0), Error);
}

TEST(OrbitContributions, Examples) {
  cplx i(0.0, 1.0);
  auto line = orbit_contributions(LineModel{i}, LineElement{2.0}, 2.0);
  ASSERT_EQ(line.size(), 1u);
  EXPECT_EQ(line[0].sign, 1);
  EXPECT_NEAR(std::abs(line[0].holonomy - std::exp(2.0 * i)), 0.0, 1e-15);
  EXPECT_EQ(line[0].period, 1.0);

  cplx av(0.0, 0.3);
  auto eu = orbit_contributions(third_turn(av), EuclideanElement{1, {}, 1}, 1.0);
  ASSERT_EQ(eu.size(), 1u);
  EXPECT_EQ(eu[0].sign, 1);
  EXPECT_NEAR(std::abs(eu[0].holonomy - std::exp(av)), 0.0, 1e-15);
  EXPECT_NEAR(eu[0].period, 1.0 / 3.0, 1e-15);

  auto s2 = orbit_contributions(Sphere2Model{}, Sphere2Element{1.0}, 1.0);
  ASSERT_EQ(s2.size(), 1u);
  // half of sign * holonomy * period is the coefficient pi in front of e^{-|l| sigma} / |l|
  EXPECT_NEAR(0.5 * s2[0].sign * std::abs(s2[0].holonomy) * s2[0].period, pi, 1e-15);
}

TEST(ChiPeriod, Examples) {
  CutoffProfile gauss;
  gauss.kind = CutoffKind::gaussian;
  EXPECT_NEAR(chi_primitive_period_numeric(LineModel{}, LineElement{2.0}, 0, gauss), 1.0, 1e-8);

  CutoffProfile flat;
  flat.kind = CutoffKind::constant;
  EXPECT_NEAR(chi_primitive_period_numeric(CircleModel{}, CircleElement{0.25}, 0, flat), 1.0, 1e-12);
  EXPECT_NEAR(chi_primitive_period_numeric(Sphere2Model{}, Sphere2Element{1.0}, 0, flat), two_pi, 1e-12);

  CutoffProfile smooth, cosine;
  smooth.kind = CutoffKind::smoothed_indicator;
  cosine.kind = CutoffKind::raised_cosine;
  for (int orbit : {0, 1}) {
    EXPECT_NEAR(chi_primitive_period_numeric(third_turn(), EuclideanElement{1, {}, 1}, orbit, smooth), 1.0 / 3.0, 1e-6);
    EXPECT_NEAR(chi_primitive_period_numeric(third_turn(), EuclideanElement{1, {}, 1}, orbit, cosine), 1.0 / 3.0, 1e-6);
  }
}

TEST(ChiPeriod, ScalesWithTranslationLengthAndOrder) {
  CutoffProfile smooth;
  smooth.kind = CutoffKind::smoothed_indicator;
  auto quarter = make_euclidean_model(3, 2.0, pi / 2, 4, 0.0);
  Eigen::Vector3d wp(1.0, 0.0, 0.0);
  EXPECT_NEAR(chi_primitive_period_numeric(quarter, EuclideanElement{1, wp, 1}, 0, smooth), 0.5, 1e-6);
}

TEST(ValidateModel, Examples) {
  EXPECT_TRUE(validate_model(third_turn(), EuclideanElement{1, {}, 1}).nondegenerate);
  ModelDiagnostics id = validate_model(make_euclidean_model(3, 1.0, 0.0, 1, 0.0), EuclideanElement{1, {}, 1});
  EXPECT_FALSE(id.nondegenerate);
  EXPECT_EQ(id.kernel_dim, 3);
  ModelDiagnostics circ = validate_model(CircleModel{0.0}, CircleElement{0.5});
  EXPECT_FALSE(circ.continuation_available);
  EXPECT_TRUE(circ.laplacian_kernel_nonzero);
  EXPECT_TRUE(validate_model(CircleModel{cplx(0.0, 1.0)}, CircleElement{0.5}).continuation_available);
}

TEST(ValidateModel, RationalAngleDiagnostics) {
  ModelDiagnostics rational = validate_model(Sphere2Model{}, Sphere2Element{two_pi / 5});
  EXPECT_FALSE(rational.dense_powers_ok);
  ASSERT_FALSE(rational.rational_hits.empty());
  EXPECT_EQ(rational.rational_hits[0].q, 5);
  EXPECT_TRUE(validate_model(Sphere2Model{}, Sphere2Element{1.0}).dense_powers_ok);
  EXPECT_FALSE(validate_model(Sphere2Model{}, Sphere2Element{two_pi}).nondegenerate);
}

TEST(EuclideanModel, ConstructionChecks) {
  EXPECT_THROW(make_euclidean_model(4, 1.0, pi, 2, 0.0), Error);
  EXPECT_THROW(make_euclidean_model(3, 1.0, two_pi / 3, 6, 0.0), Error);
  EXPECT_THROW(make_euclidean_model(3, 1.0, 1.0, 3, 0.0), Error);
  EXPECT_THROW(make_euclidean_model(3, -1.0, pi, 2, 0.0), Error);
  // inputs given to a few digits are snapped onto 2 pi p / order
  auto snapped = make_euclidean_model(3, 1.0, 2.0943951, 3, 0.0);
  EXPECT_NEAR(snapped.rotation.matrix(0, 0), std::cos(two_pi / 3), 1e-15);
  auto five = make_euclidean_model(5, 1.0, two_pi / 3, 3, 0.0);
  EXPECT_EQ(axis_and_kernel(five.rotation.matrix).kernel_dim, 1);
}

TEST(Params, ParseAndBuild) {
  EXPECT_EQ(parse_complex("0+1i"), cplx(0.0, 1.0));
  EXPECT_EQ(parse_complex("-2.5-3i"), cplx(-2.5, -3.0));
  EXPECT_EQ(parse_complex("i"), cplx(0.0, 1.0));
  EXPECT_EQ(parse_complex("1e-3"), cplx(1e-3, 0.0));
  EXPECT_THROW(parse_complex("abc"), Error);

  ParamMap m = parse_params("g=2, alpha=0+1i");
  EXPECT_EQ(m.at("g"), "2");
  EXPECT_EQ(m.at("alpha"), "0+1i");
  EXPECT_EQ(parse_params("# comment\nr0=0.25\nalpha=1i\n").size(), 2u);

  Problem p = build_problem("euclid", parse_params("n=3,a=1,theta=2.0943951,order=3,l0=1,alpha_v0=0"));
  EXPECT_TRUE(std::holds_alternative<EuclideanLatticeModel>(p.model));
  Problem q = build_problem("euclid", parse_params("theta=3.141592653589793,order=2,w_prime=1;0;0"));
  EXPECT_EQ(std::get<EuclideanElement>(q.element).w_prime.size(), 3);

  auto code = [](const std::string& model, const std::string& params) {
    try {
      build_problem(model, parse_params(params));
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::domain;
  };
  EXPECT_EQ(code("line", "g=1,beta=2"), Errc::invalid_config);
  EXPECT_EQ(code("line", ""), Errc::invalid_config);
  EXPECT_EQ(code("torus", "g=1"), Errc::invalid_config);
  EXPECT_EQ(code("lattice", "g=1.5"), Errc::invalid_config);
  EXPECT_EQ(code("circle", "r0=1.2"), Errc::invalid_config);
  EXPECT_EQ(code("euclid", "theta=3.141592653589793,order=2,w_prime=0;0;1"), Errc::invalid_config);
  EXPECT_EQ(code("euclid", "theta=2.0943951,order=3,l0=0"), Errc::invalid_config);
}

class FlowModelSuites : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(FlowModelSuites, InvariantsHold) {
  for (const auto& [name, suite] : selftest::all_suites()) {
    if (name.rfind("flow_models.", 0) != 0) continue;
    auto r = selftest::run_suite(name, suite, GetParam());
    EXPECT_TRUE(r.passed) << name << ": " << r.failure;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, FlowModelSuites, ::testing::Values(1u, 2u, 3u));
