#include "hypdyn/classify.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace hypdyn {

namespace {

constexpr double kMonotoneSlack = 1e-9;
constexpr double kMergeGap = 1e-12;   // representatives this close count as merged
constexpr double kMergeJump = 1e-9;   // ...provided they were at least this far apart before
constexpr double kConstJumpFactor = 1e3;

// Least-squares fit of log(y_n) = log(c) + n log(q) over the given window.
bool fit_geometric(const std::vector<double>& y, int from, int to, double* c, double* q) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (int n = from; n < to; ++n) {
    if (!(y[n] > 0)) continue;
    double ln = std::log(y[n]);
    sx += n;
    sy += ln;
    sxx += double(n) * n;
    sxy += n * ln;
    ++m;
  }
  if (m < 3) return false;
  double det = m * sxx - sx * sx;
  if (std::abs(det) < 1e-12) return false;
  double slope = (m * sxy - sx * sy) / det;
  double inter = (sy * sxx - sx * sxy) / det;
  *q = std::exp(slope);
  *c = std::exp(inter);
  return true;
}

Complex nearby_point(const SurfaceModel& s, Complex rep) {
  switch (s.kind()) {
    case SurfaceKind::disc:
    case SurfaceKind::cyclic_quotient: {
      Complex p = 0.5 * rep + Complex(0.17, 0.11);
      if (std::abs(p - rep) < 0.05) p = 0.5 * rep - Complex(0.17, 0.11);
      if (std::abs(p) > 0.9) p *= 0.8 / std::abs(p);
      return p;
    }
    case SurfaceKind::round_annulus: {
      Complex zeta = surface_internal(s, rep);
      Complex zeta2(zeta.real() + 0.3, 0.5 * (zeta.imag() + 0.5 * kPi));
      return surface_rep(s, zeta2);
    }
  }
  throw std::logic_error("unreachable");
}

bool is_merging_pair(const OrbitTrace& tr, int pair_index) {
  // orbits merge when the images collapse onto one point in a single step,
  // either as representatives or modulo the deck group
  const auto& levels = tr.levels;
  if (levels.empty()) return false;
  if (levels[0].pair_rep_gap[pair_index] <= kMergeGap) return true;
  for (size_t n = 1; n < levels.size(); ++n) {
    if (levels[n].pair_rep_gap[pair_index] <= kMergeGap &&
        levels[n - 1].pair_rep_gap[pair_index] >= kMergeJump)
      return true;
    if (levels[n].pair_dist[pair_index] <= kMergeGap &&
        levels[n - 1].pair_dist[pair_index] >= kMergeJump)
      return true;
  }
  return false;
}

}  // namespace

const char* to_string(InfinitesimalType t) {
  switch (t) {
    case InfinitesimalType::contracting: return "contracting";
    case InfinitesimalType::semi_contracting: return "semi_contracting";
    case InfinitesimalType::eventually_isometric: return "eventually_isometric";
    case InfinitesimalType::inconclusive: return "inconclusive";
  }
  return "?";
}

const char* to_string(ThinnessType t) {
  switch (t) {
    case ThinnessType::essentially_thin: return "essentially_thin";
    case ThinnessType::essentially_thick: return "essentially_thick";
    case ThinnessType::inconclusive: return "inconclusive";
  }
  return "?";
}

const char* to_string(PairLabel l) {
  switch (l) {
    case PairLabel::to_zero: return "to_zero";
    case PairLabel::positive_not_attained: return "positive_not_attained";
    case PairLabel::eventually_constant: return "eventually_constant";
    case PairLabel::excluded_merging: return "excluded_merging";
    case PairLabel::inconclusive: return "inconclusive";
  }
  return "?";
}

const char* to_string(Modality m) {
  switch (m) {
    case Modality::unimodal: return "unimodal";
    case Modality::bimodal: return "bimodal";
    case Modality::trimodal: return "trimodal";
    case Modality::none: return "none";
  }
  return "?";
}

InfinitesimalVerdict infinitesimal_type(const TowerSpec& t, Complex p, const Tolerances& tol) {
  tol.validate();
  InfinitesimalVerdict v;
  OrbitTrace tr = iterate_trace(t, p, {}, t.horizon);
  int H = int(tr.levels.size()) - 1;
  if (H < 4) return v;  // inconclusive: not enough levels

  std::vector<double> one_minus(H + 1, 0.0);
  bool exact_tail = true;
  v.exact_from = -1;
  for (int n = H; n >= 1; --n) {
    one_minus[n] = std::max(0.0, 1.0 - tr.levels[n].lambda);
    v.partial_sum += one_minus[n];
    if (exact_tail && tr.levels[n].lambda_exact_one)
      v.exact_from = n;
    else
      exact_tail = false;
  }
  v.exact = v.exact_from >= 1 && v.exact_from <= H;

  int window = std::max(8, H / 4);
  int last_active = 0;  // last index with 1 - lambda above the isometry tolerance
  for (int n = 1; n <= H; ++n)
    if (one_minus[n] > tol.tol_iso) last_active = n;

  if (last_active == 0) {
    v.type = InfinitesimalType::eventually_isometric;
    v.confidence = v.exact ? "exact" : "threshold";
    return v;
  }

  if (last_active <= H - window) {
    // the isometric plateau covers the trailing window; an abrupt entry means a
    // genuine switch to isometries, a gradual ramp means a summable tail that
    // fell below the tolerance
    double plateau_max = 0.0;
    for (int n = last_active + 1; n <= H; ++n) plateau_max = std::max(plateau_max, one_minus[n]);
    if (one_minus[last_active] >= 1e3 * std::max(tol.tol_iso, plateau_max)) {
      v.type = InfinitesimalType::eventually_isometric;
      v.confidence =
          (v.exact && v.exact_from <= last_active + 1) ? "exact" : "threshold";
      return v;
    }
    v.type = InfinitesimalType::semi_contracting;
    v.confidence = "fitted (tail below the isometry tolerance)";
    fit_geometric(one_minus, std::max(1, last_active / 2), last_active + 1, &v.fitted_c,
                  &v.fitted_q);
    return v;
  }

  if (v.partial_sum > tol.divergence_threshold) {
    v.type = InfinitesimalType::contracting;
    v.confidence = "threshold";
    return v;
  }

  int half = std::max(1, H / 2);
  if (fit_geometric(one_minus, half, H + 1, &v.fitted_c, &v.fitted_q)) {
    if (v.fitted_q >= tol.fit_summable_q) {
      v.type = InfinitesimalType::contracting;
      v.confidence = "fitted";
      return v;
    }
    v.tail_estimate = v.fitted_c * std::pow(v.fitted_q, H + 1) / (1.0 - v.fitted_q);
    v.type = InfinitesimalType::semi_contracting;
    v.confidence = "fitted";
    return v;
  }

  // tail has scattered zeros but is not isometric: lambda < 1 infinitely often
  v.type = InfinitesimalType::semi_contracting;
  v.confidence = "threshold";
  return v;
}

ThinnessVerdict thinness(const TowerSpec& t, const Tolerances& tol) {
  tol.validate();
  ThinnessVerdict v;

  auto delta_of = [&](Complex p) {
    OrbitTrace tr = iterate_trace(t, p, {}, t.horizon);
    std::vector<double> d;
    for (const auto& lv : tr.levels) d.push_back(lv.delta);
    return d;
  };
  auto verdict_of = [&](const std::vector<double>& d, double* min_all, double* tail_min) {
    int H = int(d.size()) - 1;
    if (H < 2) return ThinnessType::inconclusive;
    *min_all = *std::min_element(d.begin(), d.end());
    int window = std::max(4, (H + 1) / 4);
    *tail_min = *std::min_element(d.end() - window, d.end());
    if (std::isinf(*min_all)) return ThinnessType::essentially_thick;
    bool tail_decreasing = d[H] <= d[std::max(0, H - window)] + 1e-12;
    if (*tail_min < tol.thin_threshold && tail_decreasing) return ThinnessType::essentially_thin;
    if (*min_all >= tol.thin_threshold && d[H] >= *min_all - 1e-12)
      return ThinnessType::essentially_thick;
    return ThinnessType::inconclusive;
  };

  std::vector<double> d1 = delta_of(t.base);
  v.type = verdict_of(d1, &v.min_delta, &v.tail_min_delta);

  // eventually non-increasing check, meaningful for non-contracting towers
  InfinitesimalVerdict inf = infinitesimal_type(t, t.base, tol);
  if (inf.type != InfinitesimalType::contracting && !std::isinf(v.min_delta)) {
    int H = int(d1.size()) - 1;
    int from = std::max(1, H / 2);
    for (int n = from; n < H; ++n)
      if (d1[n + 1] > d1[n] + 1e-9) v.monotone_tail_ok = false;
  }

  // the verdict must not depend on the sample point
  SurfaceModel s0 = t.surface_at(0);
  double m2, t2;
  std::vector<double> d2 = delta_of(nearby_point(s0, t.base));
  ThinnessType second = verdict_of(d2, &m2, &t2);
  v.second_point_agrees = (second == v.type);
  if (!v.second_point_agrees) {
    v.note = "sample points disagree; verdict downgraded to inconclusive";
    v.type = ThinnessType::inconclusive;
  }
  return v;
}

PairVerdict pair_modality(const std::vector<double>& seq, const Tolerances& tol) {
  tol.validate();
  if (seq.size() < 2) throw std::invalid_argument("pair_modality: sequence too short");
  for (size_t n = 0; n + 1 < seq.size(); ++n)
    if (seq[n + 1] > seq[n] + kMonotoneSlack)
      throw std::invalid_argument("pair_modality: sequence increases at index " +
                                  std::to_string(n) + " beyond slack");

  PairVerdict v;
  double c = seq.back();
  v.limit = c;

  if (c < tol.tol_zero) {
    v.label = PairLabel::to_zero;
    return v;
  }

  // plateau start: first index from which the sequence stays within tol_const of c
  int H = int(seq.size()) - 1;
  int plateau = H;
  while (plateau > 0 && std::abs(seq[plateau - 1] - c) <= tol.tol_const) --plateau;

  if (plateau == 0) {
    v.label = PairLabel::eventually_constant;
    v.constant_from = 0;
    return v;
  }

  // attained limits are entered by a jump; unattained ones by a gradual ramp
  double before = seq[plateau - 1] - c;
  double plateau_var = seq[plateau] - c;
  if (before >= kConstJumpFactor * std::max(tol.tol_const, plateau_var)) {
    v.label = PairLabel::eventually_constant;
    v.constant_from = plateau;
  } else {
    v.label = PairLabel::positive_not_attained;
  }
  return v;
}

namespace {

std::vector<std::pair<Complex, Complex>> sample_pairs(const TowerSpec& t, int count) {
  std::vector<std::pair<Complex, Complex>> pairs;
  SurfaceModel s0 = t.surface_at(0);
  std::mt19937 rng(20240517u);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> rad(0.05, 0.7);

  switch (s0.kind()) {
    case SurfaceKind::disc: {
      pairs.emplace_back(Complex(0.1, 0.0), Complex(0.4, 0.0));
      pairs.emplace_back(Complex(-0.82, 0.0), Complex(0.82, 0.0));  // diameter scale
      MapElement f0 = t.map_at(0);
      if (f0.family() == MapElement::Family::blaschke2) {
        double a = f0.blaschke_param();
        Complex z(0.25, 0.1);
        pairs.emplace_back(z, -(z + a) / (1.0 + a * z));  // merging fiber pair
      }
      while (int(pairs.size()) < count)
        pairs.emplace_back(std::polar(rad(rng), ang(rng)), std::polar(rad(rng), ang(rng)));
      break;
    }
    case SurfaceKind::round_annulus: {
      auto rep = [&](double tt, double phi) {
        return surface_rep(s0, Complex(tt, phi));
      };
      Complex core = rep(0.0, 0.5 * kPi);
      pairs.emplace_back(core, core * std::polar(1.0, kPi / 3.0));       // same circle
      pairs.emplace_back(rep(0.0, 0.35 * kPi), rep(0.0, 0.65 * kPi));    // same radial ray
      pairs.emplace_back(rep(0.0, 0.4 * kPi), rep(0.25, 0.6 * kPi));     // generic
      pairs.emplace_back(core, core * std::polar(1.0, kPi));             // diametral
      MapElement f0 = t.map_at(0);
      if (f0.family() == MapElement::Family::power && f0.exponent() % 2 == 0)
        pairs.emplace_back(core, -core);  // merging fiber pair of z -> z^d
      std::uniform_real_distribution<double> phi(0.3 * kPi, 0.7 * kPi);
      std::uniform_real_distribution<double> tt(-0.5, 0.5);
      while (int(pairs.size()) < count)
        pairs.emplace_back(rep(tt(rng), phi(rng)), rep(tt(rng), phi(rng)));
      break;
    }
    case SurfaceKind::cyclic_quotient: {
      pairs.emplace_back(Complex(0.05, 0.0), Complex(0.3, 0.0));
      pairs.emplace_back(Complex(0.0, 0.25), Complex(0.2, -0.2));
      std::uniform_real_distribution<double> small(-0.4, 0.4);
      while (int(pairs.size()) < count)
        pairs.emplace_back(Complex(small(rng), small(rng)), Complex(small(rng), small(rng)));
      break;
    }
  }
  if (int(pairs.size()) > count + 2) pairs.resize(count + 2);
  return pairs;
}

}  // namespace

ModalityVerdict domain_modality(const TowerSpec& t, int sample_count, const Tolerances& tol) {
  tol.validate();
  ModalityVerdict v;
  auto pairs = sample_pairs(t, sample_count);
  OrbitTrace tr = iterate_trace(t, t.base, pairs, t.horizon);

  std::set<PairLabel> distinct;
  for (int i = 0; i < int(pairs.size()); ++i) {
    if (is_merging_pair(tr, i)) {
      v.pairs.push_back({PairLabel::excluded_merging, 0.0, -1});
      v.excluded.push_back(i);
      continue;
    }
    std::vector<double> seq;
    for (const auto& lv : tr.levels) seq.push_back(lv.pair_dist[i]);
    PairVerdict pv = pair_modality(seq, tol);
    distinct.insert(pv.label);
    v.pairs.push_back(pv);
  }
  for (PairLabel l : distinct) v.distinct_labels.push_back(l);
  switch (distinct.size()) {
    case 1: v.aggregate = Modality::unimodal; break;
    case 2: v.aggregate = Modality::bimodal; break;
    case 3: v.aggregate = Modality::trimodal; break;
    default: v.aggregate = Modality::none; break;
  }
  return v;
}

namespace {

bool labels_are(const std::vector<PairLabel>& got, std::initializer_list<PairLabel> want) {
  if (got.size() != want.size()) return false;
  for (PairLabel w : want)
    if (std::find(got.begin(), got.end(), w) == got.end()) return false;
  return true;
}

}  // namespace

SixTypeVerdict main_type(const TowerSpec& t, const Tolerances& tol, int modality_samples) {
  tol.validate();
  SixTypeVerdict v;
  v.tower_name = t.name;
  v.infinitesimal = infinitesimal_type(t, t.base, tol);
  v.thin = thinness(t, tol);
  if (v.infinitesimal.type == InfinitesimalType::inconclusive ||
      v.thin.type == ThinnessType::inconclusive) {
    v.discrepancies.push_back("classification inconclusive at this horizon");
    return v;
  }
  v.modality = domain_modality(t, modality_samples, tol);
  bool thin = v.thin.type == ThinnessType::essentially_thin;

  switch (v.infinitesimal.type) {
    case InfinitesimalType::contracting:
      v.row = 1;
      v.expected_modality = "to_zero only";
      v.eventual_connectivity = "1, infinity, or none";
      if (!labels_are(v.modality.distinct_labels, {PairLabel::to_zero}))
        v.discrepancies.push_back("row 1 expects every sampled pair to go to zero");
      break;
    case InfinitesimalType::semi_contracting:
      if (!thin) {
        v.row = 2;
        v.expected_modality = "positive_not_attained only";
        v.eventual_connectivity = "1, infinity, or none";
        if (!labels_are(v.modality.distinct_labels, {PairLabel::positive_not_attained}))
          v.discrepancies.push_back("row 2 expects positive unattained limits for all pairs");
      } else {
        v.row = 3;
        v.expected_modality = "to_zero and positive_not_attained (bimodal)";
        v.eventual_connectivity = "infinity";
        if (!labels_are(v.modality.distinct_labels,
                        {PairLabel::to_zero, PairLabel::positive_not_attained}))
          v.discrepancies.push_back("row 3 expects exactly the labels to_zero and positive_not_attained");
      }
      break;
    case InfinitesimalType::eventually_isometric:
      if (thin) {
        v.row = 6;
        v.expected_modality = "all three labels (trimodal)";
        v.eventual_connectivity = "2";
        if (!labels_are(v.modality.distinct_labels,
                        {PairLabel::to_zero, PairLabel::positive_not_attained,
                         PairLabel::eventually_constant}))
          v.discrepancies.push_back("row 6 expects exactly three distinct labels");
      } else {
        bool any_nonconstant = false;
        for (size_t i = 0; i < v.modality.pairs.size(); ++i) {
          PairLabel l = v.modality.pairs[i].label;
          if (l != PairLabel::eventually_constant && l != PairLabel::excluded_merging)
            any_nonconstant = true;
        }
        v.row = any_nonconstant ? 5 : 4;
        v.expected_modality = any_nonconstant
                                  ? "eventually_constant plus at least one non-constant far pair"
                                  : "eventually_constant only";
        v.eventual_connectivity = any_nonconstant ? "infinity" : "finite or infinite";
      }
      break;
    case InfinitesimalType::inconclusive:
      break;
  }

  if (t.surface_at(0).is_annulus_type() && thin) {
    v.notes.push_back(
        "measured annulus moduli grow without bound along this tower (Mod = pi/ell, ell -> 0); "
        "any expectation of shrinking moduli is flagged here rather than asserted");
  }
  return v;
}

AbsorbingAnnuli absorbing_annuli(const TowerSpec& t, double eps, int levels, int boundary_samples,
                                 const Tolerances& tol) {
  tol.validate();
  InfinitesimalVerdict inf = infinitesimal_type(t, t.base, tol);
  if (inf.type == InfinitesimalType::contracting)
    throw std::invalid_argument("absorbing_annuli: tower is infinitesimally contracting");
  ThinnessVerdict th = thinness(t, tol);
  if (th.type != ThinnessType::essentially_thin)
    throw std::invalid_argument("absorbing_annuli: tower is not essentially thin");
  if (!t.surface_at(0).is_annulus_type())
    throw std::invalid_argument("absorbing_annuli: surfaces are not annulus-type");

  AbsorbingAnnuli out;
  out.eps = eps;

  int need = std::min(t.horizon, kHorizonCap);
  OrbitTrace tr = iterate_trace(t, t.base, {}, need);
  int H = int(tr.levels.size()) - 1;
  for (int n = 0; n <= H; ++n) {
    if (tr.levels[n].delta <= eps) {
      out.first_level = n;
      break;
    }
  }
  if (out.first_level < 0) return out;

  // off-core companion point, used for the absorption check
  SurfaceModel s0 = t.surface_at(0);
  Complex probe = surface_internal(s0, nearby_point(s0, t.base));

  Complex probe_x = probe;
  SurfaceModel s = s0;
  std::vector<double> probe_inj;
  for (int n = 0;; ++n) {
    probe_inj.push_back(internal_injectivity(s, probe_x));
    if (n >= H) break;
    SurfaceModel nx = t.surface_at(n + 1);
    probe_x = transport_point(t.map_at(n), s, nx, probe_x);
    s = nx;
  }

  int last = std::min(out.first_level + levels - 1, H - 1);
  bool fwd_all = true, moduli_ok = true;
  double prev_mod = 0;
  for (int n = out.first_level; n <= last; ++n) {
    SurfaceModel sn = t.surface_at(n), sn1 = t.surface_at(n + 1);
    AnnulusRecord rec;
    rec.level = n;
    rec.band = collar_annulus(sn, eps, tol.margulis);
    rec.base_inside = tr.levels[n].delta <= eps + 1e-12;
    if (rec.band.empty) {
      fwd_all = false;
      out.records.push_back(rec);
      continue;
    }
    MapElement f = t.map_at(n);
    double ell = rec.band.core_length;
    int K = std::max(2, boundary_samples / 2);
    double worst = 0.0;
    bool ok = true;
    for (double phi : {rec.band.phi_min, kPi - rec.band.phi_min}) {
      for (int j = 0; j < K; ++j) {
        Complex zeta(ell * j / K, phi);
        Complex img = transport_point(f, sn, sn1, zeta);
        double inj = internal_injectivity(sn1, img);
        worst = std::max(worst, inj);
        if (inj > eps + 1e-9) ok = false;
      }
    }
    rec.worst_image_inj = worst;
    rec.forward_invariant = ok;
    if (!ok) fwd_all = false;
    if (n > out.first_level && rec.band.modulus <= prev_mod) moduli_ok = false;
    prev_mod = rec.band.modulus;
    out.records.push_back(rec);
  }
  out.forward_invariant_all = fwd_all;
  out.moduli_strictly_increasing = moduli_ok && out.records.size() > 1;

  // the probe point must enter the bands and stay inside up to the horizon
  for (int n = out.first_level; n <= H; ++n) {
    if (out.tracked_enters_at < 0 && probe_inj[n] <= eps) out.tracked_enters_at = n;
    if (out.tracked_enters_at >= 0 && probe_inj[n] > eps + 1e-9) {
      out.tracked_absorbed = false;
      return out;
    }
  }
  out.tracked_absorbed = out.tracked_enters_at >= 0;
  return out;
}

MobiusDisc OneParameterLimit::element_at(double s) const {
  if (kind == Kind::hyperbolic_axis) {
    CMobius diag{Complex(std::exp(s)), Complex(0.0), Complex(0.0), Complex(1.0)};
    return mobius_from_cmobius(
        CMobius::compose(flow_normalizer.inverse(), CMobius::compose(diag, flow_normalizer)));
  }
  if (kind == Kind::parabolic_point) {
    CMobius tr{Complex(1.0), Complex(s), Complex(0.0), Complex(1.0)};
    return mobius_from_cmobius(
        CMobius::compose(flow_normalizer.inverse(), CMobius::compose(tr, flow_normalizer)));
  }
  throw std::logic_error("element_at: limit is not a one-parameter flow");
}

OneParameterLimit geometric_limit(const TowerSpec& t, const Tolerances& tol) {
  tol.validate();
  OneParameterLimit out;

  int H = std::min(t.horizon, kHorizonCap);
  std::vector<SurfaceModel> quots;
  for (int n = 0; n <= H; ++n) {
    SurfaceModel s = t.surface_at(n);
    if (s.kind() == SurfaceKind::disc)
      throw std::invalid_argument("geometric_limit: tower levels are simply connected");
    quots.push_back(s.kind() == SurfaceKind::round_annulus ? to_cyclic_quotient(s) : s);
  }
  IsometryKind kind0 = quots[0].quotient().kind;
  for (const auto& q : quots)
    if (q.quotient().kind != kind0) {
      out.note = "deck-group types vary along the tower";
      return out;
    }

  std::vector<double> periods;
  for (const auto& q : quots) periods.push_back(q.quotient().period);
  if (periods.back() > 0.9 * periods.front()) {
    out.kind = OneParameterLimit::Kind::discrete;
    out.note = "discrete — no continuous limit (deck groups do not shrink)";
    return out;
  }
  if (periods.back() > 0.05) {
    out.note = "deck groups shrink too slowly to detect a limit at this horizon";
    return out;
  }
  out.generator_drifts_to_identity =
      std::abs(quots.back().generator().apply(Complex(0.0))) < 1e-3;

  if (kind0 == IsometryKind::hyperbolic) {
    auto [rep, att] = quotient_axis(quots.back());
    out.kind = OneParameterLimit::Kind::hyperbolic_axis;
    out.axis_repelling = rep;
    out.axis_attracting = att;
    out.flow_normalizer = halfplane_normalizer_for_axis(rep, att);
  } else {
    out.kind = OneParameterLimit::Kind::parabolic_point;
    out.boundary_point = quotient_parabolic_point(quots.back());
    out.flow_normalizer = halfplane_normalizer_parabolic(out.boundary_point);
  }

  const double grid[] = {-1.0, -0.75, -0.5, -0.25, 0.25, 0.5, 0.75, 1.0};
  for (int n = 0; n <= H; ++n) {
    const QuotientData& qd = quots[n].quotient();
    double worst = 0.0;
    for (double s : grid) {
      double k = std::round(s / qd.period);
      MobiusDisc approx;
      if (kind0 == IsometryKind::hyperbolic) {
        CMobius diag{Complex(std::exp(k * qd.period)), Complex(0.0), Complex(0.0), Complex(1.0)};
        approx = mobius_from_cmobius(
            CMobius::compose(qd.to_h.inverse(), CMobius::compose(diag, qd.to_h)));
      } else {
        CMobius tr{Complex(1.0), Complex(k * qd.period), Complex(0.0), Complex(1.0)};
        approx = mobius_from_cmobius(
            CMobius::compose(qd.to_h.inverse(), CMobius::compose(tr, qd.to_h)));
      }
      MobiusDisc target = out.element_at(s);
      worst = std::max(worst, std::abs(approx.center() - target.center()) +
                                  std::abs(approx.rotation() - target.rotation()));
    }
    out.defect.push_back(worst);
  }
  return out;
}

namespace {

// Numerical limit of the composed normalized lifts.
struct CompositeLimit {
  const NormalizedLifts* lifts;
  int depth;
  Complex operator()(Complex u) const {
    Complex w = u;
    for (int n = 0; n < depth; ++n) w = lifts->lifts[n].eval(w);
    return w;
  }
};

}  // namespace

std::vector<FoliationDescriptor> foliation_extract(const TowerSpec& t, const Tolerances& tol,
                                                   int leaves_per_kind) {
  tol.validate();
  InfinitesimalVerdict inf = infinitesimal_type(t, t.base, tol);
  if (inf.type == InfinitesimalType::contracting)
    throw std::invalid_argument("contracting tower — no foliation extraction");
  if (inf.type == InfinitesimalType::inconclusive)
    throw std::invalid_argument("foliation_extract: infinitesimal type inconclusive");
  ThinnessVerdict th = thinness(t, tol);
  if (th.type != ThinnessType::essentially_thin)
    throw std::invalid_argument("foliation_extract: tower is not essentially thin");
  OneParameterLimit lim = geometric_limit(t, tol);
  if (lim.kind != OneParameterLimit::Kind::hyperbolic_axis &&
      lim.kind != OneParameterLimit::Kind::parabolic_point)
    throw std::invalid_argument("foliation_extract: no one-parameter limit detected");

  NormalizedLifts lifts = lift_normalize(t);
  // composition depth at which the composite has settled
  int depth = int(lifts.lifts.size());
  {
    Complex probe(0.3, 0.2);
    Complex prev = probe;
    for (int n = 0; n < int(lifts.lifts.size()); ++n) {
      Complex cur = CompositeLimit{&lifts, n + 1}(probe);
      if (n > 2 && std::abs(cur - prev) < 1e-13) {
        depth = n + 1;
        break;
      }
      prev = cur;
    }
    depth = std::min(depth, 48);
  }
  CompositeLimit G{&lifts, depth};

  // flow frame in base-normalized coordinates: conjugate the final deck axis
  // by the Mobius map that sends the final base lift to the origin
  SurfaceModel s0 = t.surface_at(0);
  Complex base_internal = surface_internal(s0, surface_point(s0, t.base).rep);
  Complex base_lift = s0.kind() == SurfaceKind::round_annulus ? disc_from_zeta(base_internal)
                                                              : base_internal;
  MobiusDisc M0 = MobiusDisc::center_at(base_lift);

  OrbitTrace tr = iterate_trace(t, t.base, {}, t.horizon);
  int NL = int(tr.levels.size()) - 1;
  // transport the base in internal coordinates; public reps underflow at deep
  // annulus levels
  Complex xN = base_internal;
  SurfaceModel sN = s0;
  for (int n = 0; n < NL; ++n) {
    SurfaceModel nx = t.surface_at(n + 1);
    xN = transport_point(t.map_at(n), sN, nx, xN);
    sN = nx;
  }
  Complex uN = sN.kind() == SurfaceKind::round_annulus ? disc_from_zeta(xN) : xN;
  MobiusDisc MN = MobiusDisc::center_at(uN);

  SurfaceModel qN = sN.kind() == SurfaceKind::round_annulus ? to_cyclic_quotient(sN) : sN;
  CMobius Nf;
  bool hyper = qN.quotient().kind == IsometryKind::hyperbolic;
  if (hyper) {
    auto [rep, att] = quotient_axis(qN);
    Nf = halfplane_normalizer_for_axis(MN.apply(rep), MN.apply(att));
  } else {
    Nf = halfplane_normalizer_parabolic(MN.apply(quotient_parabolic_point(qN)));
  }

  auto h_contracting = [&](Complex u) {
    Complex w = Nf.apply(G(u));
    return hyper ? std::arg(w) : w.imag();  // hypercycle / horocycle coordinate
  };
  auto h_isometric = [&](Complex u) {
    Complex w = Nf.apply(G(u));
    return hyper ? std::log(std::abs(w)) : w.real();
  };

  auto to_public = [&](Complex u_norm) -> std::optional<Complex> {
    Complex u = mobius_inverse(M0).apply(u_norm);
    if (std::abs(u) > 1.0 - 1e-9) return std::nullopt;
    if (s0.kind() == SurfaceKind::round_annulus) {
      Complex zeta = zeta_from_disc(u);
      if (!(zeta.imag() > 1e-9 && zeta.imag() < kPi - 1e-9)) return std::nullopt;
      return surface_rep(s0, zeta);
    }
    return u;
  };

  auto trace_leaf = [&](auto&& h, Complex seed) {
    FoliationLeaf leaf;
    double target = h(seed);
    const double fd = 1e-6, step = 0.02;
    auto grad = [&](Complex u) {
      double gx = (h(u + Complex(fd, 0)) - h(u - Complex(fd, 0))) / (2 * fd);
      double gy = (h(u + Complex(0, fd)) - h(u - Complex(0, fd))) / (2 * fd);
      return Complex(gx, gy);
    };
    for (double dir : {1.0, -1.0}) {
      Complex u = seed;
      std::vector<Complex> run;
      for (int i = 0; i < 220; ++i) {
        Complex g = grad(u);
        if (std::abs(g) < 1e-12) break;
        Complex tanv = Complex(-g.imag(), g.real()) / std::abs(g);
        Complex next = u + dir * step * tanv;
        for (int c = 0; c < 3; ++c) {
          Complex g2 = grad(next);
          if (std::abs(g2) < 1e-12) break;
          next -= g2 * ((h(next) - target) / std::norm(g2));
        }
        if (std::abs(next) > 0.93) break;
        run.push_back(next);
        u = next;
        if (i > 10 && std::abs(next - seed) < 0.6 * step) break;  // leaf closed up
      }
      if (dir > 0) {
        leaf.points.push_back(seed);
        for (Complex p : run) leaf.points.push_back(p);
      } else {
        std::vector<Complex> rev(run.rbegin(), run.rend());
        rev.insert(rev.end(), leaf.points.begin(), leaf.points.end());
        leaf.points.swap(rev);
      }
    }
    // back to public coordinates, dropping points that fall off the surface
    FoliationLeaf pub;
    for (Complex u : leaf.points)
      if (auto p = to_public(u)) pub.points.push_back(*p);
    return pub;
  };

  std::vector<FoliationDescriptor> out;

  FoliationDescriptor contracting;
  contracting.kind = FoliationDescriptor::Kind::contracting;
  contracting.verified = true;
  for (int k = 0; k < leaves_per_kind; ++k) {
    double y = -0.25 + 0.25 * k;
    Complex seed(0.05, y == 0.0 ? 0.02 : y);
    FoliationLeaf leaf = trace_leaf(h_contracting, seed);
    if (leaf.points.size() < 8) continue;
    Complex p0 = leaf.points.front(), p1 = leaf.points[leaf.points.size() / 2];
    std::vector<double> seq = distance_sequence(t, p0, p1);
    contracting.leaf_check.push_back(seq.back());
    if (seq.back() >= tol.tol_zero) contracting.verified = false;
    contracting.leaves.push_back(std::move(leaf));
  }
  out.push_back(std::move(contracting));

  if (inf.type == InfinitesimalType::eventually_isometric) {
    FoliationDescriptor iso;
    iso.kind = FoliationDescriptor::Kind::eventually_isometric;
    iso.verified = true;
    for (int k = 0; k < leaves_per_kind; ++k) {
      Complex seed(-0.2 + 0.2 * k, 0.05);
      FoliationLeaf leaf = trace_leaf(h_isometric, seed);
      if (leaf.points.size() < 8) continue;
      Complex p0 = leaf.points.front(), p1 = leaf.points[leaf.points.size() / 2];
      std::vector<double> seq = distance_sequence(t, p0, p1);
      double c = seq.back();
      double var = 0.0;
      for (size_t n = seq.size() / 2; n < seq.size(); ++n) var = std::max(var, std::abs(seq[n] - c));
      iso.leaf_check.push_back(var);
      if (var > tol.tol_const) iso.verified = false;
      iso.leaves.push_back(std::move(leaf));
    }
    out.push_back(std::move(iso));
  }
  return out;
}

}  // namespace hypdyn
