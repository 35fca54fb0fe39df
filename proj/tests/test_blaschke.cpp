#include <doctest.h>

#include <cmath>
#include <random>

#include "hypdyn/model_classify.hpp"

using namespace hypdyn;

namespace {

// shared build for the suite (stages 0..4 keep the unit tests quick; the
// acceptance run exercises the full six-stage build)
const ModelTower& built4() {
  static ModelTower s = build_model_tower(4);
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("blaschke");

TEST_CASE("critical data in closed form") {
  BlaschkeDeg2 b(0.6);
  CHECK(b.critical_point() == doctest::Approx(-1.0 / 3).epsilon(1e-14));
  CHECK(b.critical_value().real() == doctest::Approx(-1.0 / 9).epsilon(1e-13));
  CHECK(std::abs(b.critical_value().imag()) < 1e-15);
  CHECK(std::abs(b.deriv(Complex(b.critical_point()))) < 1e-12);
  CHECK(std::abs(b.eval(Complex(0.0))) == 0.0);
  for (double a : {0.1, 0.5, 0.9}) CHECK(BlaschkeDeg2(a).deriv(Complex(0.0)).real() ==
                                         doctest::Approx(a).epsilon(1e-14));
}

TEST_CASE("boundary behaviour: |b| < 1 inside, = 1 on the circle") {
  BlaschkeDeg2 b(0.7);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi), r(0.0, 0.999);
  for (int i = 0; i < 200; ++i) {
    Complex inside = std::polar(r(rng), u(rng));
    CHECK(std::abs(b.eval(inside)) < 1.0);
    Complex on = std::polar(1.0, u(rng));
    CHECK(std::abs(b.eval(on)) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("preimages: fibers, the critical double root, residuals") {
  BlaschkeDeg2 b(0.6);
  auto f0 = preimage_points(b, Complex(0.0));
  bool zero_and_minus_a = (std::abs(f0[0]) < 1e-14 && std::abs(f0[1] + 0.6) < 1e-14) ||
                          (std::abs(f0[1]) < 1e-14 && std::abs(f0[0] + 0.6) < 1e-14);
  CHECK(zero_and_minus_a);

  auto fc = preimage_points(b, b.critical_value());
  CHECK(std::abs(fc[0] - Complex(-1.0 / 3)) < 1e-7);
  CHECK(std::abs(fc[1] - Complex(-1.0 / 3)) < 1e-7);

  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi), r(0.0, 0.98);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    Complex w = std::polar(r(rng), u(rng));
    auto roots = preimage_points(b, w);
    for (Complex z : roots) {
      CHECK(std::abs(z) <= 1.0 + 1e-12);
      worst = std::max(worst, std::abs(b.eval(z) - w));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("region machinery: winding, containment, circles") {
  Region disc = circle_region(Complex(0.3, 0.1), 0.2, 256);
  CHECK(region_contains(disc, Complex(0.3, 0.1)));
  CHECK(region_contains(disc, Complex(0.45, 0.1)));
  CHECK_FALSE(region_contains(disc, Complex(0.6, 0.1)));
  CHECK_FALSE(region_contains(disc, Complex(0.0, 0.0)));
  CHECK(distance_to_boundary(disc, Complex(0.3, 0.1)) == doctest::Approx(0.2).epsilon(1e-4));
}

TEST_CASE("pushforward maps boundaries pointwise and keeps the center") {
  BlaschkeDeg2 b(0.6);
  RegionSet rs;
  rs.components.push_back(circle_region(Complex(0.0), 0.15, 256));
  RegionSet img = region_pushforward(b, rs);
  REQUIRE(img.components.size() == 1);
  CHECK(region_contains(img.components[0], Complex(0.0)));  // b(0) = 0
  // every image vertex lies on the image of the source circle
  for (size_t i = 0; i < img.components[0].pts.size(); i += 16) {
    Complex w = img.components[0].pts[i];
    auto roots = preimage_points(b, w);
    double best = std::min(std::abs(std::abs(roots[0]) - 0.15),
                           std::abs(std::abs(roots[1]) - 0.15));
    CHECK(best < 1e-9);
  }
  // regions beyond the injectivity disc are refused
  RegionSet big;
  big.components.push_back(circle_region(Complex(0.0), 0.9, 128));
  CHECK_THROWS_AS(region_pushforward(b, big), std::invalid_argument);
}

TEST_CASE("preimage: fiber components, round trip, branch margin") {
  BlaschkeDeg2 b(0.6);
  RegionSet rs;
  rs.components.push_back(circle_region(Complex(0.0), 0.08, 512));
  RegionSet pre = region_preimage(b, rs);
  REQUIRE(pre.components.size() == 2);  // one component near 0, one near -a
  bool near0 = false, nearA = false;
  for (const Region& r : pre.components) {
    if (region_contains(r, Complex(0.0))) near0 = true;
    if (region_contains(r, Complex(-0.6, 0.0))) nearA = true;
  }
  CHECK(near0);
  CHECK(nearA);
  CHECK(pre.max_residual < 1e-10);

  // push forward then pull back: one branch reproduces the source
  RegionSet src;
  src.components.push_back(circle_region(Complex(0.1, 0.05), 0.08, 256));
  RegionSet fwd = region_pushforward(b, src);
  RegionSet back = region_preimage(b, fwd);
  REQUIRE(back.components.size() == 2);
  double match = 1e9;
  for (const Region& r : back.components) {
    double worst = 0.0;
    for (size_t i = 0; i < src.components[0].pts.size(); i += 8)
      worst = std::max(worst, distance_to_boundary(r, src.components[0].pts[i]));
    match = std::min(match, worst);
  }
  CHECK(match < 1e-9);

  // a region surrounding the critical value comes back connected
  RegionSet around_v;
  around_v.components.push_back(circle_region(b.critical_value(), 0.05, 512));
  RegionSet prev = region_preimage(b, around_v);
  CHECK(prev.components.size() == 1);
  CHECK(region_contains(prev.components[0], Complex(b.critical_point())));

  // a boundary passing through the critical value is refused
  RegionSet touching;
  touching.components.push_back(circle_region(b.critical_value() + Complex(0.03, 0.0), 0.03, 512));
  CHECK_THROWS_AS(region_preimage(b, touching), std::runtime_error);
}

TEST_CASE("model build: stage-0 parameters") {
  const ModelTower& s = built4();
  REQUIRE(s.complete);
  CHECK(s.levels[0].r == 0.5);
  CHECK(s.levels[0].a > 0.8);             // needed for |c_0| > 1/2
  CHECK(s.levels[0].c < -0.5);
  CHECK(s.levels[0].eps > s.levels[0].eps_lo);
  CHECK(s.levels[0].eps < s.levels[0].eps_hi);
  for (size_t m = 1; m < s.levels.size(); ++m) {
    CHECK(s.levels[m].r > s.levels[m - 1].r);
    CHECK(s.levels[m].a >= s.levels[m - 1].a);
    CHECK(std::abs(s.levels[m].c) > s.levels[m].r + 1e-3);
    CHECK(s.levels[m].r < 1.0);
  }
}

TEST_CASE("model build: component accounting doubles down the rows") {
  const ModelTower& s = built4();
  for (int n = 0; n <= s.built_stages(); ++n) {
    // top row: critical disc plus the images of the previous row
    size_t expect_top = 1 + (n >= 1 ? s.table[n - 1][n].components.size() : 0);
    CHECK(s.table[n][n + 1].components.size() == expect_top);
    // descending rows: the component through the critical value stays
    // connected, every other component splits
    for (int k = n; k > 0; --k) {
      CHECK(s.table[n][k - 1].components.size() ==
            2 * s.table[n][k].components.size() - 1);
    }
  }
}

TEST_CASE("model invariants pass at stage 4") {
  InvariantReport rep = verify_model_invariants(built4(), 16, 60, 3u);
  for (const auto& c : rep.checks) {
    INFO(c.name, " level ", c.level, " measured ", c.measured);
    CHECK(c.pass);
  }
  CHECK(rep.all_pass);
}

TEST_CASE("membership: origin inside, critical points outside, monotone in truncation") {
  const ModelTower& s = built4();
  int M = s.built_stages();
  for (int n = 0; n <= M; ++n) {
    CHECK(point_in_domain(s, n, Complex(0.0), M));
    CHECK_FALSE(point_in_domain(s, n, Complex(s.levels[n].c, 0.0), M));
  }
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int i = 0; i < 200; ++i) {
    Complex z(u(rng), u(rng));
    if (std::abs(z) >= 1) continue;
    for (int h = M; h > 1; --h) {
      if (point_in_domain(s, 1, z, h)) CHECK(point_in_domain(s, 1, z, h - 1));
    }
  }
}

TEST_CASE("translated tower: base orbit and forward containment") {
  const ModelTower& s = built4();
  TranslatedTower tt = translate_tower(s);
  int M = s.built_stages();
  for (int n = 0; n < M; ++n) {
    Complex img = tt.apply_map(n, Complex(4.0 * n, 0.0));
    CHECK(std::abs(img - Complex(4.0 * (n + 1), 0.0)) < 1e-12);
  }
  std::mt19937 rng(33);
  std::uniform_real_distribution<double> u(-0.45, 0.45);
  int checked = 0;
  for (int i = 0; i < 300 && checked < 60; ++i) {
    Complex z(u(rng), u(rng));
    if (!point_in_domain(s, 0, z, M)) continue;
    ++checked;
    Complex w = z;
    for (int n = 0; n < M; ++n) {
      w = tt.apply_map(n, w + Complex(4.0 * n, 0.0)) - Complex(4.0 * (n + 1), 0.0);
      CHECK(tt.in_compact(n + 1, w + Complex(4.0 * (n + 1), 0.0), M));
    }
  }
  CHECK(checked >= 50);
}

TEST_CASE("distortion brackets at the origin contain 1 and narrow with truncation") {
  const ModelTower& s = built4();
  int M = s.built_stages();
  for (int n = 0; n < M; ++n) {
    Bracket full = local_isometry_bracket(s, n, Complex(0.0), M);
    CHECK(full.contains(1.0));
    double prev_width = std::numeric_limits<double>::infinity();
    for (int h = n + 1; h <= M; ++h) {
      Bracket b = local_isometry_bracket(s, n, Complex(0.0), h);
      CHECK(b.contains(1.0));
      CHECK(b.width() <= prev_width + 1e-12);
      prev_width = b.width();
    }
  }
  // the equality case: a rotation of the full disc has clearance 1 at the
  // origin, and both comparison densities collapse onto the disc density
  double clear_src = 1.0, clear_dst = 1.0;
  double lo = disc_density(Complex(0.0)) * 1.0 * clear_src / 2.0;
  double hi = (2.0 / clear_dst) * 1.0 / disc_density(Complex(0.0));
  CHECK(lo == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(hi == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("far pair: certified strict decrease and model verdict") {
  const ModelTower& s = built4();
  ModelPairBrackets fp = model_far_pair(s, s.built_stages() - 1);
  CHECK(fp.nonconstant_certified);
  CHECK(fp.drop_at > 0);
  CHECK(fp.lower[0] > 1.0);  // genuinely far at level 0

  ModelVerdict v = classify_model_tower(s);
  CHECK(v.coverings_verified);
  CHECK(v.six.row == 5);
  CHECK(v.six.discrepancies.empty());
  CHECK(v.delta_lower_bound >= 0.2);
  CHECK(v.local_pair.constant_consistent);
  for (const Bracket& b : v.origin_brackets) CHECK(b.contains(1.0));
}

TEST_CASE("build rejects bad level counts and reports margin exhaustion cleanly") {
  CHECK_THROWS_AS(build_model_tower(-1), std::invalid_argument);
  BuildPolicy tight;
  tight.samples = 64;
  tight.eps_gap_frac = 0.9;  // impossible demand: the window is never that wide
  ModelTower s = build_model_tower(3, tight);
  CHECK_FALSE(s.complete);
  CHECK(s.stop_reason.find("margin exhaustion") != std::string::npos);
}

TEST_SUITE_END();
