#include "hypdyn/tower.hpp"

#include <cmath>
#include <limits>

namespace hypdyn {

namespace {

constexpr double kRepAbort = 1.0 - 1e-10;  // abort traces past this modulus
constexpr double kCompatTol = 1e-9;

// (exponent, post factor) view of a map that acts on an annulus.
bool annulus_params(const MapElement& f, int* d, Complex* s) {
  switch (f.family()) {
    case MapElement::Family::power: *d = f.exponent(); *s = f.factor(); return true;
    case MapElement::Family::scaling: *d = 1; *s = f.factor(); return true;
    case MapElement::Family::rotation: *d = 1; *s = std::polar(1.0, f.angle()); return true;
    default: return false;
  }
}

bool is_disc_automorphism(const MapElement& f) {
  switch (f.family()) {
    case MapElement::Family::rotation: return true;
    case MapElement::Family::mobius: return true;
    case MapElement::Family::scaling: return std::abs(f.factor()) == 1.0;
    case MapElement::Family::power:
      return f.exponent() == 1 && std::abs(f.factor()) == 1.0;
    case MapElement::Family::composite: {
      for (const auto& p : f.parts())
        if (!is_disc_automorphism(p)) return false;
      return true;
    }
    default: return false;
  }
}

MobiusDisc mobius_power(const MobiusDisc& m, int k) {
  MobiusDisc r = MobiusDisc::identity();
  MobiusDisc base = k >= 0 ? m : mobius_inverse(m);
  for (int i = 0; i < std::abs(k); ++i) r = mobius_compose(base, r);
  return r;
}

bool mobius_close(const MobiusDisc& a, const MobiusDisc& b, double tol) {
  return std::abs(a.center() - b.center()) <= tol && std::abs(a.rotation() - b.rotation()) <= tol;
}

StepCheck check_quotient_step(const MapElement& f, const SurfaceModel& src,
                              const SurfaceModel& dst) {
  if (f.family() != MapElement::Family::mobius && f.family() != MapElement::Family::rotation)
    return {false, false, "only Mobius maps act between cyclic quotients"};
  MobiusDisc m = f.family() == MapElement::Family::mobius
                     ? f.mobius_map()
                     : MobiusDisc(std::polar(1.0, f.angle()), Complex(0.0));
  // need m <gamma_src> m^{-1} inside <gamma_dst>, i.e. the conjugated generator
  // is an integer power of the target generator
  if (src.quotient().kind != dst.quotient().kind)
    return {false, false, "source and target deck groups have different types"};
  double ratio = src.quotient().period / dst.quotient().period;
  long j = std::lround(ratio);
  if (j < 1 || std::abs(ratio - double(j)) > 1e-6)
    return {false, false, "deck-group periods are not integer multiples"};
  MobiusDisc conj = mobius_compose(mobius_compose(m, src.generator()), mobius_inverse(m));
  if (j <= 64) {
    MobiusDisc fwd = mobius_power(dst.generator(), long(j));
    MobiusDisc bwd = mobius_power(dst.generator(), -long(j));
    if (!mobius_close(conj, fwd, 1e-8) && !mobius_close(conj, bwd, 1e-8))
      return {false, false, "conjugated generator is not a power of the target generator"};
  }
  return {true, true, ""};
}

}  // namespace

const char* to_string(MapElement::Family f) {
  switch (f) {
    case MapElement::Family::scaling: return "scaling";
    case MapElement::Family::rotation: return "rotation";
    case MapElement::Family::blaschke2: return "blaschke2";
    case MapElement::Family::power: return "power";
    case MapElement::Family::mobius: return "mobius";
    case MapElement::Family::composite: return "composite";
  }
  return "?";
}

MapElement MapElement::scaling(Complex factor) {
  if (std::abs(factor) > 1.0 + kUnitModTol)
    throw std::invalid_argument("scaling: |factor| must be <= 1");
  MapElement e;
  e.family_ = Family::scaling;
  e.factor_ = factor;
  return e;
}

MapElement MapElement::rotation(double angle) {
  MapElement e;
  e.family_ = Family::rotation;
  e.angle_ = angle;
  return e;
}

MapElement MapElement::blaschke2(double a) {
  if (!(a > 0.0 && a < 1.0)) throw std::invalid_argument("blaschke2: a must lie in (0,1)");
  MapElement e;
  e.family_ = Family::blaschke2;
  e.a_ = a;
  return e;
}

MapElement MapElement::power(int exponent, Complex post_scale) {
  if (exponent < 1) throw std::invalid_argument("power: exponent must be >= 1");
  if (std::abs(post_scale) > 1.0 + kUnitModTol)
    throw std::invalid_argument("power: |post_scale| must be <= 1");
  MapElement e;
  e.family_ = Family::power;
  e.exponent_ = exponent;
  e.factor_ = post_scale;
  return e;
}

MapElement MapElement::mobius(const MobiusDisc& m) {
  MapElement e;
  e.family_ = Family::mobius;
  e.mob_ = m;
  return e;
}

MapElement MapElement::composite(std::vector<MapElement> parts) {
  if (parts.empty()) throw std::invalid_argument("composite: empty part list");
  MapElement e;
  e.family_ = Family::composite;
  e.parts_ = std::make_shared<const std::vector<MapElement>>(std::move(parts));
  return e;
}

Complex MapElement::eval(Complex z) const {
  switch (family_) {
    case Family::scaling: return factor_ * z;
    case Family::rotation: return std::polar(1.0, angle_) * z;
    case Family::blaschke2: return z * (z + a_) / (1.0 + a_ * z);
    case Family::power: {
      Complex w = z;
      for (int i = 1; i < exponent_; ++i) w *= z;
      return factor_ * w;
    }
    case Family::mobius: return mob_.apply(z);
    case Family::composite: {
      Complex w = z;
      for (const auto& p : *parts_) w = p.eval(w);
      return w;
    }
  }
  throw std::logic_error("unreachable");
}

Complex MapElement::deriv(Complex z) const {
  switch (family_) {
    case Family::scaling: return factor_;
    case Family::rotation: return std::polar(1.0, angle_);
    case Family::blaschke2: {
      Complex den = 1.0 + a_ * z;
      return (a_ * z * z + 2.0 * z + a_) / (den * den);
    }
    case Family::power: {
      Complex w = 1.0;
      for (int i = 1; i < exponent_; ++i) w *= z;
      return factor_ * double(exponent_) * w;
    }
    case Family::mobius: return mob_.deriv(z);
    case Family::composite: {
      Complex w = z, d = 1.0;
      for (const auto& p : *parts_) {
        d *= p.deriv(w);
        w = p.eval(w);
      }
      return d;
    }
  }
  throw std::logic_error("unreachable");
}

StepCheck check_step(const MapElement& f, const SurfaceModel& src, const SurfaceModel& dst) {
  if (src.kind() == SurfaceKind::disc && dst.kind() == SurfaceKind::disc) {
    switch (f.family()) {
      case MapElement::Family::scaling:
      case MapElement::Family::rotation:
      case MapElement::Family::blaschke2:
      case MapElement::Family::mobius:
      case MapElement::Family::composite:
        break;
      case MapElement::Family::power:
        break;
    }
    // boundary sampling: the closed disc of radius 1-1e-3 must map inside the disc
    for (int i = 0; i < 64; ++i) {
      Complex z = std::polar(1.0 - 1e-3, 2.0 * kPi * i / 64.0);
      if (std::abs(f.eval(z)) >= 1.0)
        return {false, false, "image leaves the unit disc at boundary sample"};
    }
    return {true, is_disc_automorphism(f), ""};
  }

  if (src.kind() == SurfaceKind::round_annulus && dst.kind() == SurfaceKind::round_annulus) {
    int d;
    Complex s;
    if (!annulus_params(f, &d, &s))
      return {false, false, std::string(to_string(f.family())) + " does not act on annuli"};
    double Ls = src.log_inv_inner_radius(), Ld = dst.log_inv_inner_radius();
    double shrink = -std::log(std::abs(s));  // log(1/|s|) >= 0 required
    if (shrink < -kCompatTol) return {false, false, "post-scale exceeds the unit circle"};
    if (d * Ls + shrink > Ld + kCompatTol * std::max(1.0, Ld))
      return {false, false, "image leaves surface: inner radius of image below target"};
    bool covering = std::abs(shrink) <= kCompatTol &&
                    std::abs(d * Ls - Ld) <= kCompatTol * std::max(1.0, Ld);
    return {true, covering, ""};
  }

  if (src.kind() == SurfaceKind::cyclic_quotient && dst.kind() == SurfaceKind::cyclic_quotient)
    return check_quotient_step(f, src, dst);

  return {false, false, "unsupported surface pair for this map family"};
}

ValidationReport tower_validate(const TowerSpec& t) {
  ValidationReport rep;
  int horizon = std::min(t.horizon, kHorizonCap);
  for (int n = 0; n < horizon; ++n) {
    StepCheck c = check_step(t.map_at(n), t.surface_at(n), t.surface_at(n + 1));
    rep.levels.push_back({n, c.ok, c.covering, c.reason});
    if (!c.ok && rep.ok) {
      rep.ok = false;
      rep.first_failure = n;
    }
  }
  return rep;
}

Complex transport_point(const MapElement& f, const SurfaceModel& src, const SurfaceModel& dst,
                        Complex x) {
  switch (src.kind()) {
    case SurfaceKind::disc:
    case SurfaceKind::cyclic_quotient:
      return f.eval(x);
    case SurfaceKind::round_annulus: {
      int d;
      Complex s;
      if (!annulus_params(f, &d, &s))
        throw std::invalid_argument("transport: map does not act on annuli");
      double Ls = src.log_inv_inner_radius(), Ld = dst.log_inv_inner_radius();
      // zeta' = (d Ls / Ld) zeta + (pi/Ld)(arg s - i log|s|)
      return (double(d) * Ls / Ld) * x +
             (kPi / Ld) * Complex(std::arg(s), -std::log(std::abs(s)));
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

double internal_distortion(const MapElement& f, const SurfaceModel& src, const SurfaceModel& dst,
                           Complex x) {
  switch (src.kind()) {
    case SurfaceKind::disc:
    case SurfaceKind::cyclic_quotient: {
      Complex y = f.eval(x);
      return disc_density(y) * std::abs(f.deriv(x)) / disc_density(x);
    }
    case SurfaceKind::round_annulus: {
      int d;
      Complex s;
      annulus_params(f, &d, &s);
      double Ls = src.log_inv_inner_radius(), Ld = dst.log_inv_inner_radius();
      Complex y = transport_point(f, src, dst, x);
      return (std::sin(x.imag()) / std::sin(y.imag())) * (double(d) * Ls / Ld);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

double hyperbolic_distortion(const MapElement& f, const SurfaceModel& src,
                             const SurfaceModel& dst, const SurfacePointRep& p) {
  if (!p.surface.same_as(src))
    throw std::invalid_argument("hyperbolic_distortion: point is not on the source surface");
  StepCheck c = check_step(f, src, dst);
  if (!c.ok) throw std::invalid_argument("hyperbolic_distortion: " + c.reason);
  return internal_distortion(f, src, dst, surface_internal(src, p.rep));
}

OrbitTrace iterate_trace(const TowerSpec& t, Complex base,
                         const std::vector<std::pair<Complex, Complex>>& pairs, int horizon) {
  if (horizon < 0) throw std::invalid_argument("horizon must be >= 0");
  horizon = std::min(horizon, kHorizonCap);

  OrbitTrace tr;
  tr.pair_count = int(pairs.size());

  SurfaceModel s = t.surface_at(0);
  Complex x = surface_internal(s, surface_point(s, base).rep);
  std::vector<std::pair<Complex, Complex>> pts;
  pts.reserve(pairs.size());
  for (const auto& [a, b] : pairs)
    pts.emplace_back(surface_internal(s, surface_point(s, a).rep),
                     surface_internal(s, surface_point(s, b).rep));

  double pending_lambda = 1.0;
  bool pending_exact = false;
  double lambda_product = 1.0;

  for (int n = 0;; ++n) {
    OrbitTrace::Level lv;
    lv.base_rep = surface_rep(s, x);
    lv.lambda = pending_lambda;
    lv.lambda_exact_one = pending_exact;
    lambda_product *= pending_lambda;
    lv.lambda_product = lambda_product;
    lv.delta = internal_injectivity(s, x);
    for (const auto& [a, b] : pts) {
      lv.pair_dist.push_back(internal_distance(s, a, b));
      lv.pair_rep_gap.push_back(std::abs(a - b));
    }
    if (s.is_annulus_type() && lv.delta < 0.2) lv.collar = collar_annulus(s, lv.delta);
    tr.levels.push_back(std::move(lv));
    if (n == horizon) break;

    MapElement f = t.map_at(n);
    SurfaceModel s_next = t.surface_at(n + 1);
    StepCheck chk = check_step(f, s, s_next);
    if (!chk.ok) {
      tr.truncated = true;
      tr.truncated_at = n;
      tr.truncation_reason = "invalid step at level " + std::to_string(n) + ": " + chk.reason;
      break;
    }
    pending_lambda = chk.covering ? 1.0 : internal_distortion(f, s, s_next, x);
    pending_exact = chk.covering;

    x = transport_point(f, s, s_next, x);
    for (auto& [a, b] : pts) {
      a = transport_point(f, s, s_next, a);
      b = transport_point(f, s, s_next, b);
    }
    s = s_next;

    // precision guards
    bool bad = false;
    std::string why;
    if (s.kind() == SurfaceKind::round_annulus) {
      auto check_zeta = [&](Complex z) {
        if (!(z.imag() > 1e-12 && z.imag() < kPi - 1e-12) || std::abs(z.real()) > 1e8) bad = true;
      };
      check_zeta(x);
      for (auto& [a, b] : pts) {
        check_zeta(a);
        check_zeta(b);
      }
      why = "representative reached the annulus boundary strip";
    } else {
      auto check_u = [&](Complex u) {
        if (std::abs(u) > kRepAbort) bad = true;
      };
      check_u(x);
      for (auto& [a, b] : pts) {
        check_u(a);
        check_u(b);
      }
      why = "representative within 1e-10 of the unit circle";
    }
    if (bad) {
      tr.truncated = true;
      tr.truncated_at = n + 1;
      tr.truncation_reason = why;
      break;
    }
  }
  return tr;
}

OrbitTrace iterate_trace(const TowerSpec& t) {
  return iterate_trace(t, t.base, t.tracked_pairs, t.horizon);
}

std::vector<double> lambda_sequence(const TowerSpec& t, Complex p) {
  OrbitTrace tr = iterate_trace(t, p, {}, t.horizon);
  std::vector<double> out;
  for (const auto& lv : tr.levels) out.push_back(lv.lambda);
  return out;
}

std::vector<double> delta_sequence(const TowerSpec& t, Complex p) {
  OrbitTrace tr = iterate_trace(t, p, {}, t.horizon);
  std::vector<double> out;
  for (const auto& lv : tr.levels) out.push_back(lv.delta);
  return out;
}

std::vector<double> distance_sequence(const TowerSpec& t, Complex p, Complex q) {
  OrbitTrace tr = iterate_trace(t, t.base, {{p, q}}, t.horizon);
  std::vector<double> out;
  for (const auto& lv : tr.levels) out.push_back(lv.pair_dist.at(0));
  return out;
}

NormalizedLifts lift_normalize(const TowerSpec& t) {
  NormalizedLifts out;
  int horizon = std::min(t.horizon, kHorizonCap);

  SurfaceModel s = t.surface_at(0);
  Complex x = surface_internal(s, surface_point(s, t.base).rep);

  auto disc_lift_of = [](const SurfaceModel& surf, Complex internal) {
    return surf.kind() == SurfaceKind::round_annulus ? disc_from_zeta(internal) : internal;
  };

  for (int n = 0; n < horizon; ++n) {
    MapElement f = t.map_at(n);
    SurfaceModel s_next = t.surface_at(n + 1);
    StepCheck chk = check_step(f, s, s_next);
    if (!chk.ok) {
      out.truncated = true;
      out.truncated_at = n;
      out.reason = chk.reason;
      break;
    }
    Complex x_next = transport_point(f, s, s_next, x);

    MobiusDisc pre = mobius_inverse(MobiusDisc::center_at(disc_lift_of(s, x)));
    MobiusDisc post = MobiusDisc::center_at(disc_lift_of(s_next, x_next));

    LiftMap lift;
    if (s.kind() == SurfaceKind::round_annulus) {
      double Ls = s.log_inv_inner_radius(), Ld = s_next.log_inv_inner_radius();
      int d;
      Complex sc;
      annulus_params(f, &d, &sc);
      Complex mul = double(d) * Ls / Ld;
      Complex add = (kPi / Ld) * Complex(std::arg(sc), -std::log(std::abs(sc)));
      lift.eval = [pre, post, mul, add](Complex w) {
        Complex zeta = zeta_from_disc(pre.apply(w));
        return post.apply(disc_from_zeta(mul * zeta + add));
      };
      lift.deriv = [pre, post, mul, add](Complex w) {
        Complex u = pre.apply(w);
        Complex zeta = zeta_from_disc(u);
        Complex zeta2 = mul * zeta + add;
        Complex q2 = std::exp(zeta2);
        Complex u2 = (q2 - Complex(0, 1)) / (q2 + Complex(0, 1));
        Complex d_u2_dzeta2 = 2.0 * Complex(0, 1) * q2 / ((q2 + Complex(0, 1)) * (q2 + Complex(0, 1)));
        Complex d_zeta_du = 2.0 / (1.0 - u * u);
        return post.deriv(u2) * d_u2_dzeta2 * mul * d_zeta_du * pre.deriv(w);
      };
    } else {
      lift.eval = [pre, post, f](Complex w) { return post.apply(f.eval(pre.apply(w))); };
      lift.deriv = [pre, post, f](Complex w) {
        Complex u = pre.apply(w);
        return post.deriv(f.eval(u)) * f.deriv(u) * pre.deriv(w);
      };
    }
    out.lambda.push_back(std::abs(lift.deriv(Complex(0.0))));
    out.lifts.push_back(std::move(lift));

    x = x_next;
    s = s_next;
    Complex ulift = disc_lift_of(s, x);
    if (std::abs(ulift) > kRepAbort) {
      out.truncated = true;
      out.truncated_at = n + 1;
      out.reason = "base orbit left the representable region";
      break;
    }
  }
  return out;
}

long long cumulative_core_winding(const TowerSpec& t, int n) {
  long long w = 1;
  for (int k = 0; k < n; ++k) {
    const MapElement f = t.map_at(k);
    switch (f.family()) {
      case MapElement::Family::power: w *= f.exponent(); break;
      case MapElement::Family::rotation:
      case MapElement::Family::scaling: break;  // degree-1 on the core circle
      default:
        throw std::invalid_argument("cumulative_core_winding: level " + std::to_string(k) +
                                    " is not a power-family map");
    }
  }
  return w;
}

namespace towers {

TowerSpec scaling(Complex c, Complex base, int horizon) {
  TowerSpec t;
  t.surface_at = [](int) { return SurfaceModel::disc(); };
  t.map_at = [c](int) { return MapElement::scaling(c); };
  t.base = base;
  t.horizon = horizon;
  t.name = "scaling";
  return t;
}

TowerSpec scaling_semi(double ratio, Complex base, int horizon) {
  TowerSpec t;
  t.surface_at = [](int) { return SurfaceModel::disc(); };
  t.map_at = [ratio](int n) { return MapElement::scaling(1.0 - std::pow(ratio, n + 1)); };
  t.base = base;
  t.horizon = horizon;
  t.name = "scaling_semi";
  return t;
}

TowerSpec rotation(double angle, Complex base, int horizon) {
  TowerSpec t;
  t.surface_at = [](int) { return SurfaceModel::disc(); };
  t.map_at = [angle](int) { return MapElement::rotation(angle); };
  t.base = base;
  t.horizon = horizon;
  t.name = "rotation";
  return t;
}

TowerSpec switch_tower(int switch_at, const MapElement& before, const MapElement& after,
                       Complex base, int horizon) {
  TowerSpec t;
  t.surface_at = [](int) { return SurfaceModel::disc(); };
  t.map_at = [=](int n) { return n < switch_at ? before : after; };
  t.base = base;
  t.horizon = horizon;
  t.name = "switch";
  return t;
}

TowerSpec power_annulus(double L0, int d, double tau0, double tau_decay, Complex base,
                        int horizon) {
  if (!(L0 > 0)) throw std::invalid_argument("power_annulus: L0 must be > 0");
  auto L = std::make_shared<std::vector<double>>();
  L->push_back(L0);
  for (int n = 0; n <= std::min(horizon, kHorizonCap) + 1; ++n) {
    double tau = tau0 * std::pow(tau_decay, n);
    double next = (double(d) + tau) * L->back();
    if (!std::isfinite(next)) next = std::numeric_limits<double>::max() / 4;
    L->push_back(next);
  }
  TowerSpec t;
  t.surface_at = [L](int n) { return SurfaceModel::round_annulus_log(L->at(n)); };
  t.map_at = [L, d](int n) {
    double shrink = L->at(n + 1) - double(d) * L->at(n);  // log(1/|s|)
    return MapElement::power(d, Complex(std::exp(-shrink), 0.0));
  };
  t.base = base;
  t.horizon = horizon;
  t.name = tau0 == 0.0 ? "power_annulus" : "power_annulus_compressed";
  return t;
}

TowerSpec cyclic_refine(double ell0, double ratio, Complex base, int horizon) {
  TowerSpec t;
  t.surface_at = [ell0, ratio](int n) {
    double ell = ell0 * std::pow(ratio, n);
    return SurfaceModel::cyclic_quotient(
        MobiusDisc(Complex(1.0), Complex(-std::tanh(0.5 * ell), 0.0)));
  };
  t.map_at = [](int) { return MapElement::mobius(MobiusDisc::identity()); };
  t.base = base;
  t.horizon = horizon;
  t.name = "cyclic_refine";
  return t;
}

TowerSpec mobius_tower(const MobiusDisc& m, Complex base, int horizon) {
  TowerSpec t;
  t.surface_at = [](int) { return SurfaceModel::disc(); };
  t.map_at = [m](int) { return MapElement::mobius(m); };
  t.base = base;
  t.horizon = horizon;
  t.name = "mobius";
  return t;
}

}  // namespace towers

}  // namespace hypdyn
