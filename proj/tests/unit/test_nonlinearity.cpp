#include <doctest.h>

#include <cmath>

#include "nlfd/error.hpp"
#include "nlfd/nonlinearity.hpp"

using namespace nlfd;

TEST_CASE("phi, beta and derivatives") {
  const NonlinearitySpec sq = NonlinearitySpec::pure_power(0.5);
  CHECK(sq.phi(4.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(sq.beta(3.0) == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(sq.phi(0.0) == 0.0);
  const NonlinearitySpec pert = NonlinearitySpec::perturbed_power(0.75, 0.1);
  CHECK(pert.phi(1.0) == doctest::Approx(1.05).epsilon(1e-14));
  CHECK_THROWS_AS(sq.phi(-1.0), Error);
  CHECK_THROWS_AS(sq.beta(-1.0), Error);
  CHECK_THROWS_AS(NonlinearitySpec::pure_power(1.2), Error);
}

TEST_CASE("inverse consistency and derivative reciprocity") {
  for (const NonlinearitySpec& f :
       {NonlinearitySpec::pure_power(0.3), NonlinearitySpec::pure_power(0.75),
        NonlinearitySpec::perturbed_power(0.75, 0.1), NonlinearitySpec::perturbed_power(0.5, 0.4)}) {
    double previous = -1.0;
    for (double s = 1e-8; s < 1e8; s *= 3.7) {
      const double w = f.phi(s);
      CHECK(w > previous);
      previous = w;
      CHECK(f.beta(w) == doctest::Approx(s).epsilon(1e-12));
      CHECK(f.beta_prime(w) * f.phi_prime(s) == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("validate_hphi") {
  const HphiReport ok = validate_hphi(NonlinearitySpec::pure_power(0.5, 1.0));
  CHECK(ok.increasing_ok);
  CHECK(ok.concavity_ok);
  CHECK(ok.envelope_ok);
  const HphiReport bad = validate_hphi(NonlinearitySpec::pure_power(0.5, 1.5));
  CHECK_FALSE(bad.concavity_ok);
  const HphiReport pert = validate_hphi(NonlinearitySpec::perturbed_power(0.75, 0.1, 0.2));
  CHECK(pert.increasing_ok);
  CHECK(pert.concavity_ok);
  CHECK(pert.envelope_ok);
  // Default A is the maximal power value (1 - m) / m.
  CHECK(NonlinearitySpec::pure_power(0.25).A() == doctest::Approx(3.0));
  CHECK(max_concavity_parameter(NonlinearitySpec::pure_power(0.5)) ==
        doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("rescale_phi") {
  const double alpha = 4.0 / 3.0;
  const NonlinearitySpec pure = NonlinearitySpec::pure_power(0.75);
  const NonlinearitySpec pert = NonlinearitySpec::perturbed_power(0.75, 0.1);
  for (double s : {1e-3, 0.5, 2.0, 40.0}) {
    CHECK(rescale_phi(pure, 1e4, alpha).phi(s) == doctest::Approx(pure.phi(s)).epsilon(1e-12));
    CHECK(rescale_phi(pert, 1.0, alpha).phi(s) == doctest::Approx(pert.phi(s)).epsilon(1e-14));
  }
  const double limit = rescale_phi(pert, 1e6, alpha).phi(0.5);
  CHECK(std::abs(limit / std::pow(0.5, 0.75) - pert.c2()) < 1e-3);
  CHECK_THROWS_AS(rescale_phi(pert, 0.9, alpha), Error);

  // Envelope constants do not depend on k.
  for (double k : {1.0, 10.0, 1e3, 1e6}) {
    const NonlinearitySpec r = rescale_phi(pert, k, alpha);
    const HphiReport rep = validate_hphi(r);
    CHECK(rep.envelope_ok);
    CHECK(rep.envelope_min >= pert.envelope_lower() * (1 - 1e-9));
    CHECK(rep.envelope_max <= pert.envelope_upper() * (1 + 1e-9));
  }
}

TEST_CASE("modify_for_boundedness") {
  const NonlinearitySpec sq = NonlinearitySpec::pure_power(0.5);
  const NonlinearitySpec capped = modify_for_boundedness(sq, 1.0);
  CHECK(capped.phi(4.0) == doctest::Approx(2.5).epsilon(1e-14));
  for (double s : {0.0, 0.1, 0.5, 1.0}) CHECK(capped.phi(s) == doctest::Approx(sq.phi(s)));
  CHECK(std::abs(capped.phi_prime(1.0 + 1e-13) - capped.phi_prime(1.0 - 1e-13)) < 1e-12);
  CHECK(capped.beta(capped.phi(7.0)) == doctest::Approx(7.0).epsilon(1e-12));
}
