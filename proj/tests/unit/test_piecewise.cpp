#include <doctest.h>

#include "functionals.hpp"
#include "lagrangian.hpp"
#include "piecewise.hpp"
#include "seeds.hpp"

#include <cmath>

using namespace lagshrink;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::InvalidArgument;
}

TorusMap circles(double r1, double r2, int n) {
  return product_torus_seed(circle_curve(r1), circle_curve(r2), GridSpec::square(n)).first;
}

const double kCliffordEntropy = 2.0 * kPi / std::exp(1.0);

}  // namespace

TEST_CASE("perturbation dictionary: dx, dy, then closed exact forms, reproducible by seed") {
  const GridSpec g = GridSpec::square(32);
  const Differentiator diff(g, Backend::FiniteDifference4);
  const auto dict = perturbation_dictionary(g, 8, 7, Backend::FiniteDifference4);
  REQUIRE(dict.size() == 10);
  CHECK(dict[0].first == "dx");
  CHECK(dict[1].first == "dy");
  CHECK(dict[9].first == "df7");
  CHECK(dict[0].second.p == 1.0);
  CHECK(dict[1].second.q == 1.0);
  for (const auto& [name, a] : dict) {
    CAPTURE(name);
    CHECK(a.closedness_defect(diff) < 1e-10);
  }
  for (std::size_t k = 2; k < dict.size(); ++k) {
    CHECK(dict[k].second.p == 0.0);
    CHECK(dict[k].second.q == 0.0);
    CHECK(dict[k].second.f.cwiseAbs().maxCoeff() > 0.0);
  }
  const auto again = perturbation_dictionary(g, 8, 7, Backend::FiniteDifference4);
  const auto other = perturbation_dictionary(g, 8, 8, Backend::FiniteDifference4);
  CHECK((again[5].second.f - dict[5].second.f).cwiseAbs().maxCoeff() == 0.0);
  CHECK((other[5].second.f - dict[5].second.f).cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("perturbation search lowers the Clifford entropy within the C0 budget") {
  const TorusMap model = clifford_seed(GridSpec::square(32));
  PerturbationOptions o;
  o.delta = 0.1;
  const PerturbationResult r = perturbation_search(model, o);
  CHECK(r.lambda_model == doctest::Approx(kCliffordEntropy).epsilon(1e-4));
  CHECK(r.lambda_model - r.lambda_perturbed >= o.c_min);
  CHECK(r.c0_distance <= 3.0 * r.delta1);
  CHECK(r.delta1 == doctest::Approx(0.1 * std::sqrt(r.area_model) / 6.0));
  CHECK(r.maslov_model.m1 == r.maslov_perturbed.m1);
  CHECK(r.maslov_model.m2 == r.maslov_perturbed.m2);
  CHECK(r.lag_residual <= std::max(tol_lag(model.grid(), o.lag), 10.0 * model.grid().hx() * model.grid().hy()));
  REQUIRE_FALSE(r.tried.empty());
  CHECK(r.tried.back().certified);
  CHECK(r.tried.back().direction == r.direction);
  // The independent entropy evaluation agrees with the reported one.
  CHECK(entropy(r.map).lambda == doctest::Approx(r.lambda_perturbed).epsilon(1e-8));
}

TEST_CASE("perturbation search refuses models that are not admissible") {
  PerturbationOptions o;
  CHECK(code_of([&] { perturbation_search(circles(1.0, 2.0, 32), o); }) == ErrorCode::PreconditionViolated);
  o.area_max = 50.0;  // Clifford area is 8 pi^2
  CHECK(code_of([&] { perturbation_search(clifford_seed(GridSpec::square(32)), o); }) ==
        ErrorCode::PreconditionViolated);
  o.area_max = 100.0;
  o.delta = 0.0;
  CHECK(code_of([&] { perturbation_search(clifford_seed(GridSpec::square(32)), o); }) ==
        ErrorCode::InvalidArgument);
  // A C0 budget too small for any entropy drop of c_min.
  o.delta = 1e-6;
  CHECK(code_of([&] { perturbation_search(clifford_seed(GridSpec::square(16)), o); }) == ErrorCode::NoDecreaseFound);
}

TEST_CASE("rescale_back matches the area and places the map at the singular point") {
  const TorusMap v = clifford_seed(GridSpec::square(32));
  const double a = area(v);
  const Vec4 q(0.3, -0.2, 0.1, 0.5);
  const double T0 = 1.0, t1 = 0.99;
  const RescaledBack b = rescale_back(v, 0.9 * a, T0, t1, q);
  CHECK(b.kappa == doctest::Approx(std::sqrt(0.9)).epsilon(1e-12));
  CHECK(area(b.map) == doctest::Approx((T0 - t1) * 0.9 * a).epsilon(1e-10));
  const Vec4 centre = b.map.values().rowwise().mean();
  CHECK((centre - q).norm() < 1e-12);
  CHECK(code_of([&] { rescale_back(v, a, 1.0, 1.0, q); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { rescale_back(v, -1.0, 1.0, 0.5, q); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("piecewise flow from the Clifford torus: one certified surgery, then a non-compact end") {
  PiecewiseOptions o;
  const PiecewiseLog log = run_piecewise(clifford_seed(GridSpec::square(32)), 100.0, 0.1, o);
  INFO(log.terminal_note);
  CHECK(log.outcome == PiecewiseOutcome::TerminalNonCompact);
  CHECK(log.lambda_initial == doctest::Approx(kCliffordEntropy).epsilon(1e-4));
  CHECK(log.event_cap == std::min(o.k_max, static_cast<int>(std::floor((log.lambda_initial - 1.0) / 1e-4))));
  REQUIRE(log.events.size() >= 1);
  CHECK(static_cast<int>(log.events.size()) <= log.event_cap);
  CHECK(log.legs.size() == log.events.size() + 1);
  CHECK(log.leg_starts.size() == log.legs.size());
  for (const PiecewiseEvent& ev : log.events) {
    CHECK(ev.certified());
    CHECK(ev.lambda_before - ev.lambda_after >= 1e-4);
    CHECK(std::abs(ev.area_after - ev.area_before) <= 1e-6 * ev.area_before);
    CHECK(ev.c0_distance <= ev.delta_bound);
    CHECK(ev.delta_bound == doctest::Approx(0.1 * std::sqrt(ev.area_before)));
    CHECK(ev.maslov_before == std::array<int, 2>{2, 2});
    CHECK(ev.maslov_after == std::array<int, 2>{2, 2});
  }
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    CHECK(log.legs[i].compact_model);
    CHECK(log.legs[i].t_end == log.events[i].t);
    CHECK(log.legs[i + 1].t_start == log.events[i].t);
    CHECK(log.legs[i].max_entropy_increase <= 1e-6);
  }
  CHECK_FALSE(log.legs.back().compact_model);
}

TEST_CASE("piecewise flow rejects bad parameters and reports flow errors as an outcome") {
  PiecewiseOptions o;
  const TorusMap c = clifford_seed(GridSpec::square(16));
  CHECK(code_of([&] { run_piecewise(c, 0.0, 0.1, o); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { run_piecewise(c, 100.0, -1.0, o); }) == ErrorCode::InvalidArgument);
  o.flow.t_max = 0.1;  // no singularity in time
  const PiecewiseLog log = run_piecewise(c, 100.0, 0.1, o);
  CHECK(log.outcome == PiecewiseOutcome::Error);
  REQUIRE(log.legs.size() == 1);
  CHECK(log.legs[0].note.find("NoSingularity") != std::string::npos);
}

TEST_CASE("embeddedness: Clifford torus is embedded, figure-eight times circle is not") {
  const EmbeddednessReport c = embeddedness_check(clifford_seed(GridSpec::square(32)));
  CHECK(c.embedded);
  CHECK(c.flagged_pairs == 0);
  CHECK(c.diameter == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(c.closest > 0.1);
  const EmbeddednessReport f = embeddedness_check(figure_eight_seed(GridSpec::square(32)));
  CHECK_FALSE(f.embedded);
  CHECK(f.flagged_pairs > 0);
  CHECK(f.closest < 1e-12);
}

TEST_CASE("census: perturbed Clifford seeds return to a single Clifford cluster") {
  const auto seeds = perturbed_clifford_seeds(GridSpec::square(32), 2, 1e-2, 20240611);
  REQUIRE(seeds.size() == 3);
  CHECK(seeds[0].label == "clifford");
  const CensusReport rep = entropy_census(seeds, 100.0);
  REQUIRE(rep.entries.size() == 3);
  for (const CensusEntry& e : rep.entries) {
    CAPTURE(e.label);
    CAPTURE(e.notice);
    CHECK(e.accepted);
    CHECK(e.area == doctest::Approx(8.0 * kPi * kPi).epsilon(1e-3));
    CHECK(e.embedding_checked == (e.area <= 32.0 * kPi));
  }
  REQUIRE(rep.clusters.size() == 1);
  CHECK(rep.clusters[0].members.size() == 3);
  CHECK(std::abs(rep.clusters[0].entropy - kCliffordEntropy) < 1e-3);
  CHECK(rep.clusters[0].spread < 1e-3);
}

TEST_CASE("census: empty input, area above Lambda and non-critical seeds") {
  const CensusReport none = entropy_census({}, 100.0);
  CHECK(none.entries.empty());
  CHECK(none.clusters.empty());

  const TorusMap c = clifford_seed(GridSpec::square(16));
  const CensusReport small = entropy_census({{"clifford", c, {0.0, 1.0}}}, 10.0);
  REQUIRE(small.entries.size() == 1);
  CHECK_FALSE(small.entries[0].accepted);
  CHECK(small.entries[0].notice.find("exceeds Lambda") != std::string::npos);
  CHECK(small.clusters.empty());
}
