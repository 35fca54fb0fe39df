#include "hypdyn/surface.hpp"

#include <cmath>
#include <limits>

namespace hypdyn {

namespace {

CMobius cmobius_of(const MobiusDisc& m) {
  // rotation*(z - a)/(1 - conj(a) z)
  return {m.rotation(), -m.rotation() * m.center(), -std::conj(m.center()), Complex(1.0)};
}

}  // namespace

CMobius halfplane_normalizer_for_axis(Complex p_rep, Complex p_att) {
  CMobius n0{Complex(1.0), -p_rep, Complex(1.0), -p_att};
  // rotate so the image of the unit circle (a line through 0) becomes the real axis
  Complex p3(1.0, 0.0);
  for (double th : {0.0, 1.0, 2.0, 3.0, 4.0, 5.0}) {
    p3 = std::polar(1.0, th);
    if (std::abs(p3 - p_rep) > 0.3 && std::abs(p3 - p_att) > 0.3) break;
  }
  double psi = -std::arg(n0.apply(p3));
  Complex u0 = 0.5 * (p_rep + p_att);  // interior chord midpoint
  CMobius n{std::polar(1.0, psi) * n0.a, std::polar(1.0, psi) * n0.b, n0.c, n0.d};
  if (n.apply(u0).imag() < 0) {
    n.a = -n.a;
    n.b = -n.b;
  }
  return n;
}

CMobius halfplane_normalizer_parabolic(Complex p) {
  CMobius n0{Complex(0.0), Complex(1.0), Complex(1.0), -p};  // u -> 1/(u - p)
  Complex q1 = n0.apply(p * std::polar(1.0, 2.0));
  Complex q2 = n0.apply(p * std::polar(1.0, -2.0));
  double psi = -std::arg(q2 - q1);
  for (int attempt = 0; attempt < 2; ++attempt) {
    Complex rot = std::polar(1.0, psi);
    double h0 = (rot * q1).imag();
    CMobius n{rot * n0.a - Complex(0, h0) * n0.c, rot * n0.b - Complex(0, h0) * n0.d,
              n0.c, n0.d};
    if (n.apply(Complex(0.0)).imag() > 0) return n;
    psi += kPi;
  }
  throw std::logic_error("parabolic normalizer: orientation fix failed");
}

MobiusDisc mobius_from_cmobius(const CMobius& f) {
  Complex center = f.inverse().apply(Complex(0.0));
  Complex at0 = f.apply(Complex(0.0));
  Complex rot;
  if (std::abs(center) > 1e-8) {
    rot = -at0 / center;
  } else {
    Complex d = (f.a * f.d - f.b * f.c) / ((f.c * Complex(0.0) + f.d) * f.d);  // f'(0)
    rot = d / std::abs(d);
  }
  rot /= std::abs(rot);
  return MobiusDisc(rot, center);
}

namespace {

CMobius hyperbolic_normalizer(const MobiusDisc& gen, const IsometryClass& cls) {
  Complex p0 = cls.fixed_points.at(0), p1 = cls.fixed_points.at(1);
  // attracting fixed point: |gen'| < 1 there
  Complex p_att = (std::abs(gen.deriv(p0)) < 1.0) ? p0 : p1;
  Complex p_rep = (p_att == p0) ? p1 : p0;
  return halfplane_normalizer_for_axis(p_rep, p_att);
}

CMobius parabolic_normalizer(const MobiusDisc& gen, const IsometryClass& cls) {
  (void)gen;
  return halfplane_normalizer_parabolic(cls.fixed_points.at(0));
}

QuotientData make_quotient_data(const MobiusDisc& gen) {
  // Decide the type from the sign of |beta|^2 - (Im alpha)^2 (normalized
  // coefficients); unlike the banded public classification this stays sharp
  // for generators arbitrarily close to the identity.
  Complex s = std::sqrt(gen.rotation());
  Complex alpha = s, beta = -s * gen.center();
  double det = std::norm(alpha) - std::norm(beta);
  double disc2 = (std::norm(beta) - alpha.imag() * alpha.imag()) / det;
  double scale = (std::norm(beta) + alpha.imag() * alpha.imag()) / det;

  QuotientData q;
  if (disc2 > 1e-12 * scale) {
    q.kind = IsometryKind::hyperbolic;
    q.period = 2.0 * std::asinh(std::sqrt(disc2));
    IsometryClass cls = mobius_classify(gen);
    if (cls.kind != IsometryKind::hyperbolic) {
      // banded classification collapsed a tiny translation; recover the axis
      // from the fixed-point quadratic directly
      Complex A = std::conj(beta), B = std::conj(alpha) - alpha, C = -beta;
      Complex sq = std::sqrt(B * B - 4.0 * A * C);
      Complex qq = (std::norm(B + sq) >= std::norm(B - sq)) ? -(B + sq) / 2.0 : -(B - sq) / 2.0;
      cls.kind = IsometryKind::hyperbolic;
      cls.fixed_points = {qq / A / std::abs(qq / A), (C / qq) / std::abs(C / qq)};
    }
    q.to_h = hyperbolic_normalizer(gen, cls);
  } else if (disc2 >= -1e-12 * scale && std::abs(gen.center()) > kUnitModTol) {
    q.kind = IsometryKind::parabolic;
    IsometryClass cls = mobius_classify(gen);
    if (cls.kind != IsometryKind::parabolic) {
      Complex fp = (alpha - std::conj(alpha)) / (2.0 * std::conj(beta));
      cls.fixed_points = {fp / std::abs(fp)};
    }
    CMobius n = parabolic_normalizer(gen, cls);
    CMobius conj = CMobius::compose(CMobius::compose(n, cmobius_of(gen)), n.inverse());
    Complex kappa = conj.apply(Complex(0.0, 1.0)) - Complex(0.0, 1.0);
    if (std::abs(kappa.imag()) > 1e-9 * std::max(1.0, std::abs(kappa)))
      throw std::logic_error("parabolic normalization failed to produce a translation");
    q.period = std::abs(kappa.real());
    q.to_h = n;
  } else {
    throw std::invalid_argument(
        "cyclic_quotient: generator must be fixed-point free (hyperbolic or parabolic)");
  }
  return q;
}

double quotient_pair_distance(double ell, Complex zw1, Complex zw2) {
  // zw = t + i*phi with e^zw in H; deck action shifts t by ell.
  double dt = std::remainder(zw1.real() - zw2.real(), ell);
  double sh = std::sinh(0.5 * dt);
  double sn = std::sin(0.5 * (zw1.imag() - zw2.imag()));
  double x = (2.0 * sh * sh + 2.0 * sn * sn) / (std::sin(zw1.imag()) * std::sin(zw2.imag()));
  return acosh1p(x);
}

double quotient_inj(double ell, double phi) {
  double sh = std::sinh(0.5 * ell);
  return 0.5 * acosh1p(2.0 * sh * sh / (std::sin(phi) * std::sin(phi)));
}

Complex h_log_coords(const QuotientData& q, Complex u) {
  Complex w = q.to_h.apply(u);
  if (!(w.imag() > 0)) throw std::domain_error("point does not lift into the half-plane model");
  return Complex(std::log(std::abs(w)), std::arg(w));
}

}  // namespace

SurfaceModel SurfaceModel::disc() {
  SurfaceModel s;
  s.kind_ = SurfaceKind::disc;
  return s;
}

SurfaceModel SurfaceModel::round_annulus(double inner_radius) {
  if (!(inner_radius > 0.0 && inner_radius < 1.0))
    throw std::invalid_argument("round_annulus: inner radius must lie in (0,1)");
  return round_annulus_log(std::log(1.0 / inner_radius));
}

SurfaceModel SurfaceModel::round_annulus_log(double L) {
  if (!(L > 0.0) || !std::isfinite(L))
    throw std::invalid_argument("round_annulus: log(1/r) must be positive and finite");
  SurfaceModel s;
  s.kind_ = SurfaceKind::round_annulus;
  s.L_ = L;
  return s;
}

SurfaceModel SurfaceModel::cyclic_quotient(const MobiusDisc& generator) {
  SurfaceModel s;
  s.kind_ = SurfaceKind::cyclic_quotient;
  s.generator_ = generator;
  s.quot_ = make_quotient_data(generator);
  return s;
}

bool SurfaceModel::is_annulus_type() const {
  return kind_ == SurfaceKind::round_annulus ||
         (kind_ == SurfaceKind::cyclic_quotient && quot_.kind == IsometryKind::hyperbolic);
}

bool SurfaceModel::same_as(const SurfaceModel& o, double tol) const {
  if (kind_ != o.kind_) return false;
  switch (kind_) {
    case SurfaceKind::disc: return true;
    case SurfaceKind::round_annulus: return std::abs(L_ - o.L_) <= tol * std::max(1.0, L_);
    case SurfaceKind::cyclic_quotient:
      return quot_.kind == o.quot_.kind &&
             std::abs(generator_.center() - o.generator_.center()) <= tol &&
             std::abs(generator_.rotation() - o.generator_.rotation()) <= tol;
  }
  return false;
}

SurfacePointRep surface_point(const SurfaceModel& s, Complex rep) {
  switch (s.kind()) {
    case SurfaceKind::disc:
    case SurfaceKind::cyclic_quotient:
      (void)DiscPoint(rep);  // validates
      break;
    case SurfaceKind::round_annulus: {
      double a = std::abs(rep);
      if (!(a < 1.0 && std::log(1.0 / a) < s.log_inv_inner_radius()))
        throw std::invalid_argument("annulus point: need inner_radius < |rep| < 1");
      break;
    }
  }
  return SurfacePointRep{s, rep};
}

double surface_density(const SurfacePointRep& p) {
  switch (p.surface.kind()) {
    case SurfaceKind::disc:
    case SurfaceKind::cyclic_quotient:
      return disc_density(p.rep);
    case SurfaceKind::round_annulus: {
      double L = p.surface.log_inv_inner_radius();
      double phi = kPi * std::log(1.0 / std::abs(p.rep)) / L;
      return (kPi / L) / (std::abs(p.rep) * std::sin(phi));
    }
  }
  throw std::logic_error("unreachable");
}

double surface_distance(const SurfacePointRep& x, const SurfacePointRep& y) {
  if (!x.surface.same_as(y.surface))
    throw std::invalid_argument("surface_distance: points live on different surfaces");
  return internal_distance(x.surface, surface_internal(x.surface, x.rep),
                           surface_internal(y.surface, y.rep));
}

double injectivity_radius(const SurfacePointRep& p) {
  return internal_injectivity(p.surface, surface_internal(p.surface, p.rep));
}

double core_geodesic_length(const SurfaceModel& s) {
  switch (s.kind()) {
    case SurfaceKind::round_annulus: return 2.0 * kPi * kPi / s.log_inv_inner_radius();
    case SurfaceKind::cyclic_quotient:
      if (s.quotient().kind != IsometryKind::hyperbolic)
        throw std::invalid_argument("cusp-type surface: no core geodesic");
      return s.quotient().period;
    case SurfaceKind::disc:
      throw std::invalid_argument("core_geodesic_length: surface is simply connected");
  }
  throw std::logic_error("unreachable");
}

double annulus_modulus(const SurfaceModel& s) { return kPi / core_geodesic_length(s); }

SurfaceModel to_cyclic_quotient(const SurfaceModel& s) {
  if (s.kind() != SurfaceKind::round_annulus)
    throw std::invalid_argument("to_cyclic_quotient: expected a round annulus");
  double ell = core_geodesic_length(s);
  double t = std::tanh(0.5 * ell);
  return SurfaceModel::cyclic_quotient(MobiusDisc(Complex(1.0), Complex(-t, 0.0)));
}

CollarBand collar_annulus(const SurfaceModel& s, double eps, double margulis) {
  if (!s.is_annulus_type())
    throw std::invalid_argument("collar_annulus: surface must be annulus-type");
  if (!(eps > 0.0) || eps > margulis)
    throw std::invalid_argument("collar_annulus: need 0 < eps <= Margulis constant");
  CollarBand band;
  band.eps = eps;
  band.core_length = core_geodesic_length(s);
  double ratio = std::sinh(0.5 * band.core_length) / std::sinh(eps);
  if (ratio >= 1.0) return band;  // inj >= ell/2 > eps everywhere
  band.empty = false;
  band.half_width = std::acosh(1.0 / ratio);
  band.phi_min = std::asin(ratio);
  band.modulus = (kPi - 2.0 * band.phi_min) / band.core_length;
  return band;
}

Complex surface_internal(const SurfaceModel& s, Complex rep) {
  if (s.kind() != SurfaceKind::round_annulus) return rep;
  double L = s.log_inv_inner_radius();
  return Complex(kPi * std::arg(rep) / L, kPi * std::log(1.0 / std::abs(rep)) / L);
}

Complex surface_rep(const SurfaceModel& s, Complex internal) {
  if (s.kind() != SurfaceKind::round_annulus) return internal;
  double L = s.log_inv_inner_radius();
  return std::polar(std::exp(-L * internal.imag() / kPi), L * internal.real() / kPi);
}

double internal_distance(const SurfaceModel& s, Complex a, Complex b) {
  switch (s.kind()) {
    case SurfaceKind::disc: return disc_distance(a, b);
    case SurfaceKind::round_annulus:
      return quotient_pair_distance(core_geodesic_length(s), a, b);
    case SurfaceKind::cyclic_quotient: {
      const QuotientData& q = s.quotient();
      if (q.kind == IsometryKind::hyperbolic)
        return quotient_pair_distance(q.period, h_log_coords(q, a), h_log_coords(q, b));
      // parabolic: work in plain half-plane coordinates, deck shifts Re by period
      Complex w1 = q.to_h.apply(a), w2 = q.to_h.apply(b);
      double dx = std::remainder(w1.real() - w2.real(), q.period);
      double dy = w1.imag() - w2.imag();
      return acosh1p((dx * dx + dy * dy) / (2.0 * w1.imag() * w2.imag()));
    }
  }
  throw std::logic_error("unreachable");
}

double internal_injectivity(const SurfaceModel& s, Complex a) {
  switch (s.kind()) {
    case SurfaceKind::disc: return std::numeric_limits<double>::infinity();
    case SurfaceKind::round_annulus: return quotient_inj(core_geodesic_length(s), a.imag());
    case SurfaceKind::cyclic_quotient: {
      const QuotientData& q = s.quotient();
      if (q.kind == IsometryKind::hyperbolic)
        return quotient_inj(q.period, h_log_coords(q, a).imag());
      Complex w = q.to_h.apply(a);
      return 0.5 * acosh1p(q.period * q.period / (2.0 * w.imag() * w.imag()));
    }
  }
  throw std::logic_error("unreachable");
}

double internal_density(const SurfaceModel& s, Complex a) {
  switch (s.kind()) {
    case SurfaceKind::disc:
    case SurfaceKind::cyclic_quotient:
      return disc_density(a);
    case SurfaceKind::round_annulus:
      // strip-coordinate density: 1/sin(phi)
      return 1.0 / std::sin(a.imag());
  }
  throw std::logic_error("unreachable");
}

Complex quotient_strip_coords(const SurfaceModel& s, Complex internal) {
  switch (s.kind()) {
    case SurfaceKind::round_annulus: return internal;
    case SurfaceKind::cyclic_quotient: return h_log_coords(s.quotient(), internal);
    case SurfaceKind::disc:
      throw std::invalid_argument("strip coordinates: surface is simply connected");
  }
  throw std::logic_error("unreachable");
}

std::pair<Complex, Complex> quotient_axis(const SurfaceModel& q) {
  if (q.kind() != SurfaceKind::cyclic_quotient || q.quotient().kind != IsometryKind::hyperbolic)
    throw std::invalid_argument("quotient_axis: not a hyperbolic cyclic quotient");
  CMobius inv = q.quotient().to_h.inverse();
  Complex p_rep = inv.apply(Complex(0.0));
  Complex p_att = inv.a / inv.c;  // image of infinity
  return {p_rep / std::abs(p_rep), p_att / std::abs(p_att)};
}

Complex quotient_parabolic_point(const SurfaceModel& q) {
  if (q.kind() != SurfaceKind::cyclic_quotient || q.quotient().kind != IsometryKind::parabolic)
    throw std::invalid_argument("quotient_parabolic_point: not a parabolic cyclic quotient");
  CMobius inv = q.quotient().to_h.inverse();
  Complex p = inv.a / inv.c;
  return p / std::abs(p);
}

Complex disc_from_zeta(Complex zeta) {
  Complex q = std::exp(zeta);
  return (q - Complex(0, 1)) / (q + Complex(0, 1));
}

Complex zeta_from_disc(Complex u) {
  return std::log(Complex(0, 1) * (1.0 + u) / (1.0 - u));
}

Complex annulus_cover(Complex u, double L) {
  return surface_rep(SurfaceModel::round_annulus_log(L), zeta_from_disc(u));
}

Complex annulus_cover_deriv(Complex u, double L) {
  // z = exp(i L zeta / pi), dzeta/du = 2/(1-u^2)
  Complex z = annulus_cover(u, L);
  return z * Complex(0, L / kPi) * 2.0 / (1.0 - u * u);
}

Complex annulus_lift(Complex z, double L) {
  return disc_from_zeta(surface_internal(SurfaceModel::round_annulus_log(L), z));
}

}  // namespace hypdyn
