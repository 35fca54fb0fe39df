#include "hypdyn/blaschke.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hypdyn {

std::array<Complex, 2> preimage_points(const BlaschkeDeg2& b, Complex w) {
  if (std::abs(w) > 1.0 + 1e-12)
    throw std::invalid_argument("preimage_points: |w| must be <= 1");
  // z^2 + a(1-w) z - w = 0
  Complex B = b.a * (1.0 - w);
  Complex D = std::sqrt(B * B + 4.0 * w);
  if ((std::conj(B) * D).real() < 0) D = -D;  // keep B and D aligned: |B + D| is maximal
  Complex q = -0.5 * (B + D);
  if (std::abs(q) < 1e-300) return {Complex(0.0), -B};
  return {q, -w / q};
}

void Region::finalize() {
  if (pts.size() < 4) throw std::invalid_argument("Region: polyline needs at least 3 points");
  if (std::abs(pts.front() - pts.back()) > 1e-9)
    throw std::invalid_argument("Region: polyline does not close");
  pts.back() = pts.front();

  double area2 = 0.0;
  for (size_t i = 0; i + 1 < pts.size(); ++i)
    area2 += pts[i].real() * pts[i + 1].imag() - pts[i + 1].real() * pts[i].imag();
  if (area2 < 0) std::reverse(pts.begin(), pts.end());

  min_re = max_re = pts[0].real();
  min_im = max_im = pts[0].imag();
  for (Complex p : pts) {
    min_re = std::min(min_re, p.real());
    max_re = std::max(max_re, p.real());
    min_im = std::min(min_im, p.imag());
    max_im = std::max(max_im, p.imag());
  }
}

double Region::max_modulus() const {
  double m = 0;
  for (Complex p : pts) m = std::max(m, std::abs(p));
  return m;
}

double Region::min_modulus() const {
  double m = std::numeric_limits<double>::infinity();
  for (Complex p : pts) m = std::min(m, std::abs(p));
  return m;
}

int winding_number(const std::vector<Complex>& poly, Complex z) {
  int wn = 0;
  for (size_t i = 0; i + 1 < poly.size(); ++i) {
    Complex p = poly[i], q = poly[i + 1];
    double cross = (q.real() - p.real()) * (z.imag() - p.imag()) -
                   (q.imag() - p.imag()) * (z.real() - p.real());
    if (p.imag() <= z.imag()) {
      if (q.imag() > z.imag() && cross > 0) ++wn;
    } else {
      if (q.imag() <= z.imag() && cross < 0) --wn;
    }
  }
  return wn;
}

bool region_contains(const Region& r, Complex z) {
  if (!r.bbox_near(z, 0.0)) return false;
  return winding_number(r.pts, z) != 0;
}

bool set_contains(const RegionSet& rs, Complex z) {
  for (const Region& r : rs.components)
    if (region_contains(r, z)) return true;
  return false;
}

double distance_to_boundary(const Region& r, Complex z) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < r.pts.size(); ++i) {
    Complex p = r.pts[i], d = r.pts[i + 1] - r.pts[i];
    double len2 = std::norm(d);
    double t = len2 > 0 ? std::clamp(((z - p) * std::conj(d)).real() / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, std::abs(z - (p + t * d)));
  }
  return best;
}

Region circle_region(Complex center, double radius, int samples) {
  Region r;
  r.pts.reserve(samples + 1);
  for (int i = 0; i < samples; ++i)
    r.pts.push_back(center + std::polar(radius, 2.0 * kPi * i / samples));
  r.pts.push_back(r.pts.front());
  r.finalize();
  return r;
}

namespace {

struct PushState {
  const BlaschkeDeg2* b;
  const BuildPolicy* pol;
  std::vector<Complex> out;

  void edge(Complex w_from, Complex w_to, int depth) {
    Complex img = b->eval(w_to);
    if (!out.empty() && std::abs(img - out.back()) > pol->refine_gap && depth < 30) {
      Complex mid = 0.5 * (w_from + w_to);
      edge(w_from, mid, depth + 1);
      edge(mid, w_to, depth + 1);
      return;
    }
    if (int(out.size()) > pol->max_samples)
      throw std::runtime_error("region_pushforward: sample budget exhausted");
    out.push_back(img);
  }
};

struct TrackState {
  const BlaschkeDeg2* b;
  const BuildPolicy* pol;
  std::vector<Complex> c1, c2;
  Complex z1, z2;
  double max_resid = 0.0;

  void edge(Complex w_from, Complex w_to, int depth) {
    auto roots = preimage_points(*b, w_to);
    Complex s1 = roots[0], s2 = roots[1];
    double costA = std::max(std::abs(z1 - s1), std::abs(z2 - s2));
    double costB = std::max(std::abs(z1 - s2), std::abs(z2 - s1));
    if (costB < costA) {
      std::swap(s1, s2);
      std::swap(costA, costB);
    }
    double sep = std::abs(s1 - s2);
    bool safe = costA <= 0.35 * std::max(sep, 1e-14);
    bool fine = costA <= pol->refine_gap;
    if (!(safe && fine)) {
      if (depth < 30) {
        Complex mid = 0.5 * (w_from + w_to);
        edge(w_from, mid, depth + 1);
        edge(mid, w_to, depth + 1);
        return;
      }
      if (costA > 0.49 * sep)
        throw std::runtime_error("region_preimage: branch ambiguity near the critical value");
    }
    if (int(c1.size()) > pol->max_samples)
      throw std::runtime_error("region_preimage: sample budget exhausted");
    max_resid = std::max({max_resid, std::abs(b->eval(s1) - w_to), std::abs(b->eval(s2) - w_to)});
    c1.push_back(s1);
    c2.push_back(s2);
    z1 = s1;
    z2 = s2;
  }
};

}  // namespace

RegionSet region_pushforward(const BlaschkeDeg2& b, const RegionSet& rs,
                             const BuildPolicy& policy) {
  double inj_radius = std::abs(b.critical_point());
  RegionSet out;
  out.sub = rs.sub;
  out.stage = rs.stage;
  for (const Region& r : rs.components) {
    if (r.max_modulus() >= inj_radius - 1e-12)
      throw std::invalid_argument(
          "region_pushforward: region leaves the injectivity disc D(0,|c_a|)");
    PushState st{&b, &policy, {}};
    st.out.push_back(b.eval(r.pts.front()));
    for (size_t i = 0; i + 1 < r.pts.size(); ++i) st.edge(r.pts[i], r.pts[i + 1], 0);
    Region img;
    img.pts = std::move(st.out);
    img.pts.back() = img.pts.front();
    img.born_stage = r.born_stage;
    img.finalize();
    out.components.push_back(std::move(img));
  }
  return out;
}

RegionSet region_preimage(const BlaschkeDeg2& b, const RegionSet& rs, const BuildPolicy& policy) {
  Complex v = b.critical_value();
  RegionSet out;
  out.sub = rs.sub;
  out.stage = rs.stage;
  double max_resid = 0.0;

  for (size_t ci = 0; ci < rs.components.size(); ++ci) {
    const Region& r = rs.components[ci];
    // the boundary polyline must keep clear of the critical value
    for (size_t i = 0; i + 1 < r.pts.size(); ++i) {
      double spacing = std::abs(r.pts[i + 1] - r.pts[i]) + 1e-12;
      if (std::abs(r.pts[i] - v) < policy.v_branch_margin * spacing)
        throw std::runtime_error("region_preimage: component " + std::to_string(ci) +
                                 " passes within the branch-safety margin of the critical value");
    }

    TrackState st{&b, &policy, {}, {}, Complex(0), Complex(0), 0.0};
    auto roots = preimage_points(b, r.pts.front());
    st.z1 = roots[0];
    st.z2 = roots[1];
    st.c1.push_back(st.z1);
    st.c2.push_back(st.z2);
    for (size_t i = 0; i + 1 < r.pts.size(); ++i) st.edge(r.pts[i], r.pts[i + 1], 0);
    max_resid = std::max(max_resid, st.max_resid);

    double d_same = std::max(std::abs(st.z1 - st.c1.front()), std::abs(st.z2 - st.c2.front()));
    double d_swap = std::max(std::abs(st.z1 - st.c2.front()), std::abs(st.z2 - st.c1.front()));
    if (d_same <= d_swap) {
      // trivial monodromy: two disjoint preimage components
      for (auto* chain : {&st.c1, &st.c2}) {
        Region pre;
        pre.pts = *chain;
        pre.pts.push_back(chain->front());
        pre.born_stage = r.born_stage;
        pre.finalize();
        out.components.push_back(std::move(pre));
      }
    } else {
      // the two branches swap around the loop: one connected component
      Region pre;
      pre.pts = st.c1;
      pre.pts.insert(pre.pts.end(), st.c2.begin(), st.c2.end());
      pre.pts.push_back(st.c1.front());
      pre.born_stage = r.born_stage;
      pre.finalize();
      out.components.push_back(std::move(pre));
    }
  }
  out.max_residual = max_resid;
  return out;
}

namespace {

double min_dist_to_set(Complex z, const RegionSet& rs) {
  double best = std::numeric_limits<double>::infinity();
  for (const Region& r : rs.components) best = std::min(best, distance_to_boundary(r, z));
  return best;
}

}  // namespace

ModelTower build_model_tower(int levels, const BuildPolicy& policy) {
  if (levels < 0) throw std::invalid_argument("build_model_tower: levels must be >= 0");
  ModelTower s;

  for (int m = 0; m <= levels; ++m) {
    LevelParams lp;

    if (m == 0) {
      lp.r = 0.5;
    } else {
      double maxmod = 0.0;
      for (const Region& r : s.table[m - 1][m].components)
        maxmod = std::max(maxmod, r.max_modulus());
      lp.r = maxmod + policy.r_margin_frac * (1.0 - maxmod);
      lp.r = std::max(lp.r, s.levels[m - 1].r + 1e-9);
      if (lp.r > 1.0 - 1e-7) {
        s.complete = false;
        s.stop_reason = "margin exhaustion at stage " + std::to_string(m) +
                        ": regions crowd the unit circle";
        return s;
      }
    }

    // smallest dyadic-grid parameter whose critical point clears r_m and whose
    // critical value stays inside D(0, r_m)
    double c_need = lp.r + policy.c_margin_frac * (1.0 - lp.r);
    double v_cap = lp.r - policy.v_margin_frac * (1.0 - lp.r);
    bool found = false;
    for (double step = policy.grid_start; step >= policy.grid_floor && !found; step *= 0.5) {
      double a_min = 2.0 * c_need / (1.0 + c_need * c_need);
      double a = std::ceil(a_min / step) * step;
      for (int tries = 0; tries < 3 && a < 1.0; ++tries, a += step) {
        BlaschkeDeg2 cand(a);
        double cmod = std::abs(cand.critical_point());
        double vmod = std::abs(cand.critical_value());
        if (cmod >= c_need && vmod <= v_cap) {
          lp.a = a;
          found = true;
          break;
        }
        if (vmod > v_cap) break;  // larger a only pushes the critical value further out
      }
    }
    if (!found || (m > 0 && lp.a < s.levels[m - 1].a)) {
      s.complete = false;
      s.stop_reason = "margin exhaustion at stage " + std::to_string(m) +
                      ": no admissible Blaschke parameter";
      return s;
    }
    BlaschkeDeg2 bm(lp.a);
    lp.c = bm.critical_point();
    lp.v = bm.critical_value();

    RegionSet old_row;  // A_m^{m-1}
    if (m > 0) old_row = s.table[m - 1][m];
    RegionSet old_push;
    if (m > 0) old_push = region_pushforward(bm, old_row, policy);

    RegionSet rdisc;
    rdisc.components.push_back(circle_region(Complex(0.0), lp.r, policy.samples));
    RegionSet rdisc_img = region_pushforward(bm, rdisc, policy);

    // The excluded disc is centered at the critical value v_m: its preimage is
    // then a single component through c_m, so the critical point is excluded
    // downstairs and b_m stays an unbranched covering between the domains.
    // (A disc centered at c_m could only capture v_m with radius > |c_m - v_m|,
    // which pushes the regions within O((1-r)^2) of the unit circle and makes
    // the scales collapse doubly exponentially.) Any radius below the measured
    // clearance works; half of it is taken.
    double eps_hi = std::min({min_dist_to_set(lp.v, rdisc_img), 1.0 - std::abs(lp.v),
                              std::abs(lp.v)});
    for (const Region& r : old_push.components)
      eps_hi = std::min(eps_hi, distance_to_boundary(r, lp.v));
    if (eps_hi < policy.eps_gap_frac * (1.0 - lp.r)) {
      s.complete = false;
      s.stop_reason = "margin exhaustion at stage " + std::to_string(m) +
                      ": admissible eps window too narrow (0, " + std::to_string(eps_hi) + ")";
      return s;
    }
    lp.eps_lo = 0.0;
    lp.eps_hi = eps_hi;
    lp.eps = 0.5 * eps_hi;

    // top row A_{m+1}^m = closure(D(v, eps)) union b_m(A_m^{m-1})
    RegionSet top;
    top.sub = m + 1;
    top.stage = m;
    Region crit_disc = circle_region(lp.v, lp.eps, policy.samples);
    crit_disc.born_stage = m;
    top.components.push_back(crit_disc);
    for (Region r : old_push.components) {
      r.born_stage = m;  // images are new components at level m+1
      top.components.push_back(std::move(r));
    }

    // new components at subscript m: the connected preimage of the critical disc
    // plus, for every old component, the second branch of its image's preimage
    RegionSet crit_only;
    crit_only.components.push_back(crit_disc);
    RegionSet crit_pre = region_preimage(bm, crit_only, policy);
    s.max_preimage_residual = std::max(s.max_preimage_residual, crit_pre.max_residual);
    if (crit_pre.components.size() != 1) {
      s.complete = false;
      s.stop_reason = "stage " + std::to_string(m) +
                      ": critical-disc preimage did not come back connected";
      return s;
    }

    RegionSet new_sub_m;
    new_sub_m.sub = m;
    new_sub_m.stage = m;
    for (Region& r : crit_pre.components) {
      r.born_stage = m;
      new_sub_m.components.push_back(r);
    }
    double persist_resid = 0.0;
    for (size_t i = 0; i < old_row.components.size(); ++i) {
      RegionSet one;
      one.components.push_back(old_push.components[i]);
      RegionSet back = region_preimage(bm, one, policy);
      s.max_preimage_residual = std::max(s.max_preimage_residual, back.max_residual);
      if (back.components.size() != 2) {
        s.complete = false;
        s.stop_reason = "stage " + std::to_string(m) + ": expected two preimage branches";
        return s;
      }
      // one branch reproduces the old component, the other is its partner
      Complex anchor = old_row.components[i].pts.front();
      double d0 = std::abs(back.components[0].pts.front() - anchor);
      double d1 = std::abs(back.components[1].pts.front() - anchor);
      int match = d0 <= d1 ? 0 : 1;
      persist_resid = std::max(persist_resid, std::min(d0, d1));
      Region partner = back.components[1 - match];
      partner.born_stage = m;
      new_sub_m.components.push_back(std::move(partner));
    }
    s.log.push_back("stage " + std::to_string(m) + ": a=" + std::to_string(lp.a) +
                    " r=" + std::to_string(lp.r) + " eps=" + std::to_string(lp.eps) +
                    " persist-residual=" + std::to_string(persist_resid));

    // assemble row m: A_k^m for k = 0..m+1
    std::vector<RegionSet> row(m + 2);
    row[m + 1] = top;
    row[m] = new_sub_m;
    if (m > 0) {
      for (const Region& r : s.table[m - 1][m].components) row[m].components.push_back(r);
      row[m].sub = m;
      row[m].stage = m;
    }
    RegionSet descend = new_sub_m;  // new components only; old ones already satisfy the relation
    for (int k = m - 1; k >= 0; --k) {
      RegionSet nk = region_preimage(s.map(k), descend, policy);
      s.max_preimage_residual = std::max(s.max_preimage_residual, nk.max_residual);
      for (Region& r : nk.components) r.born_stage = m;
      row[k].sub = k;
      row[k].stage = m;
      row[k].components = s.table[m - 1][k].components;
      for (Region& r : nk.components) row[k].components.push_back(r);
      descend = std::move(nk);
    }

    s.levels.push_back(lp);
    s.table.push_back(std::move(row));
  }
  return s;
}

bool point_in_domain(const ModelTower& s, int n, Complex z, int truncation) {
  if (truncation > s.built_stages())
    throw std::invalid_argument("point_in_domain: truncation exceeds built stages");
  if (n < 0 || n > truncation) throw std::invalid_argument("point_in_domain: bad level");
  if (std::abs(z) >= 1.0) return false;
  for (int k = std::max(n, 0); k <= truncation; ++k) {
    if (n >= int(s.table[k].size())) continue;
    if (set_contains(s.table[k][n], z)) return false;
  }
  return true;
}

double domain_clearance(const ModelTower& s, int n, Complex z, int truncation) {
  if (!point_in_domain(s, n, z, truncation)) return 0.0;
  double r_trunc = s.levels.at(truncation).r;
  double best = std::min(1.0 - std::abs(z), r_trunc - std::abs(z));
  if (best <= 0) return 0.0;
  for (int k = n; k <= truncation; ++k) {
    if (n >= int(s.table[k].size())) continue;
    for (const Region& r : s.table[k][n].components) {
      if (!r.bbox_near(z, best)) continue;
      best = std::min(best, distance_to_boundary(r, z));
    }
  }
  return std::max(best, 0.0);
}

InvariantReport verify_model_invariants(const ModelTower& s, int injectivity_grid,
                                        int covering_targets, unsigned seed) {
  InvariantReport rep;
  int M = s.built_stages();

  for (int m = 0; m <= M; ++m) {
    const LevelParams& lp = s.levels[m];
    BlaschkeDeg2 bm = s.map(m);

    rep.add({"(i) critical point clears D(0,r)", m, std::abs(lp.c) > lp.r,
             std::abs(lp.c) - lp.r, ""});

    // sampled injectivity on D(0, r_m)
    bool inj_ok = true;
    std::vector<Complex> grid, imgs;
    for (int i = 1; i <= injectivity_grid; ++i) {
      double rad = lp.r * i / (injectivity_grid + 1);
      for (int j = 0; j < injectivity_grid; ++j)
        grid.push_back(std::polar(rad, 2.0 * kPi * j / injectivity_grid));
    }
    for (Complex z : grid) imgs.push_back(bm.eval(z));
    for (size_t i = 0; i < grid.size() && inj_ok; ++i)
      for (size_t j = i + 1; j < grid.size(); ++j)
        if (std::abs(imgs[i] - imgs[j]) < 1e-9 && std::abs(grid[i] - grid[j]) > 1e-6) {
          inj_ok = false;
          break;
        }
    rep.add({"(i) injectivity on sampled grid", m, inj_ok, 0.0, ""});

    // argument principle: every sampled target has exactly one preimage in D(0,r)
    std::vector<Complex> circ;
    int N = 1024;
    for (int i = 0; i <= N; ++i)
      circ.push_back(bm.eval(std::polar(lp.r, 2.0 * kPi * i / N)));
    circ.back() = circ.front();
    bool deg_ok = true;
    for (size_t i = 0; i < grid.size(); i += std::max<size_t>(1, grid.size() / 20)) {
      if (winding_number(circ, imgs[i]) != 1) deg_ok = false;
    }
    rep.add({"(i) argument-principle count is 1 on D(0,r)", m, deg_ok, 0.0, ""});
  }

  // (ii) the origin avoids every region; each critical point sits in its row
  for (int n = 0; n <= M; ++n) {
    bool zero_ok = true;
    for (int k = 0; k < int(s.table[n].size()); ++k)
      if (set_contains(s.table[n][k], Complex(0.0))) zero_ok = false;
    rep.add({"(ii) origin outside all regions", n, zero_ok, 0.0, ""});

    bool crit_ok = true;
    for (int k = 0; k <= n; ++k)
      if (!set_contains(s.table[n][k], Complex(s.levels[k].c, 0.0))) crit_ok = false;
    rep.add({"(ii) critical points inside their rows", n, crit_ok, 0.0, ""});
  }

  // (iii) boundary samples of A_k^n map onto the boundary of A_{k+1}^n
  for (int n = 0; n <= M; ++n) {
    double worst = 0.0;
    for (int k = 0; k + 1 < int(s.table[n].size()); ++k) {
      BlaschkeDeg2 bk = s.map(k);
      const RegionSet& src = s.table[n][k];
      const RegionSet& dst = s.table[n][k + 1];
      for (const Region& r : src.components) {
        for (size_t i = 0; i + 1 < r.pts.size(); i += 8) {
          Complex w = bk.eval(r.pts[i]);
          double best = std::numeric_limits<double>::infinity();
          for (const Region& t : dst.components) {
            if (!t.bbox_near(w, 1e-4 + best)) continue;
            best = std::min(best, distance_to_boundary(t, w));
            if (best < 1e-12) break;
          }
          worst = std::max(worst, best);
        }
      }
    }
    rep.add({"(iii) preimage relation holds on boundary samples", n, worst <= 1e-8, worst, ""});
  }

  // (iv) new components with subscript <= n avoid D(0, r_{n-1}); in this
  // construction they in fact avoid D(0, r_n). The top row (subscript n+1)
  // first exists at stage n and is exempt.
  for (int n = 1; n <= M; ++n) {
    double minmod = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n; ++k)
      for (const Region& r : s.table[n][k].components)
        if (r.born_stage == n) minmod = std::min(minmod, r.min_modulus());
    rep.add({"(iv) new components avoid the prior injectivity disc", n,
             minmod >= s.levels[n - 1].r - 1e-9, minmod - s.levels[n - 1].r, ""});
  }

  // unbranched degree-2 covering between consecutive truncated domains
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int n = 0; n < M; ++n) {
    BlaschkeDeg2 bn = s.map(n);
    int good = 0, tried = 0, attempts = 0;
    double cap = 0.98 * s.levels[M].r;
    while (tried < covering_targets && attempts < covering_targets * 200) {
      ++attempts;
      Complex w(unif(rng) * cap, unif(rng) * cap);
      if (std::abs(w) >= cap) continue;
      if (!point_in_domain(s, n + 1, w, M)) continue;
      ++tried;
      auto roots = preimage_points(bn, w);
      bool ok = std::abs(bn.eval(roots[0]) - w) < 1e-10 && std::abs(bn.eval(roots[1]) - w) < 1e-10;
      ok = ok && point_in_domain(s, n, roots[0], M) && point_in_domain(s, n, roots[1], M);
      ok = ok && std::abs(roots[0] - roots[1]) > 1e-9;
      if (ok) ++good;
    }
    rep.add({"covering: two preimages in the truncated domain", n,
             tried == covering_targets && good == tried, double(good),
             std::to_string(good) + "/" + std::to_string(tried)});
  }

  rep.add({"quadratic preimage residuals", -1, s.max_preimage_residual < 1e-10,
           s.max_preimage_residual, ""});
  return rep;
}

TranslatedTower translate_tower(const ModelTower& s) {
  TranslatedTower t;
  t.model = &s;
  return t;
}

Bracket local_isometry_bracket(const ModelTower& s, int n, Complex z, int truncation) {
  if (n + 1 > truncation)
    throw std::invalid_argument("local_isometry_bracket: need truncation >= n+1");
  BlaschkeDeg2 bn = s.map(n);
  Complex w = bn.eval(z);
  double clear_src = domain_clearance(s, n, z, truncation);
  double clear_dst = domain_clearance(s, n + 1, w, truncation);
  if (clear_src <= 1e-6 || clear_dst <= 1e-6)
    throw std::invalid_argument(
        "local_isometry_bracket: point too close to a region boundary (inscribed disc degenerate)");
  double dmod = std::abs(bn.deriv(z));
  Bracket b;
  b.lo = disc_density(w) * dmod * clear_src / 2.0;
  b.hi = (2.0 / clear_dst) * dmod / disc_density(z);
  return b;
}

}  // namespace hypdyn
