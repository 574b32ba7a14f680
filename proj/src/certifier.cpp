#include "nsopt/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace nsopt {

GoldsteinSample sample_goldstein(Oracle& oracle, const Vector& x, double delta, std::size_t k, RngStream& rng,
                                 const std::vector<Vector>& hints) {
  if (delta < 0) throw std::invalid_argument("sample_goldstein: delta must be nonnegative");
  GoldsteinSample out;
  auto take = [&](const Vector& p) {
    OracleReply r = oracle.query(p);
    out.points.push_back(p);
    out.subgrads.push_back(r.subgrad);
    if (r.active_set)
      for (const auto& g : r.active_set->generators) {
        if (g.size() == r.subgrad.size() && g == r.subgrad) continue;
        out.points.push_back(p);
        out.subgrads.push_back(g);
      }
  };
  take(x);
  for (const auto& h : hints) {
    require_same_dim(x, h, "sample_goldstein");
    const Vector off = h - x;
    const double dist = off.norm();
    take(dist > delta ? Vector(x + (delta / dist) * off) : h);
  }
  for (std::size_t i = 0; i < k; ++i) take(rng.in_ball(x, delta));
  return out;
}

Certificate certificate_from_sample(const Vector& x, double delta, const GoldsteinSample& sample,
                                    const MinNormOptions& opts) {
  // Identical subgradients add nothing to the hull; keep the first source.
  std::map<std::vector<double>, std::size_t> seen;
  std::vector<Vector> gens;
  std::vector<std::size_t> source;
  for (std::size_t i = 0; i < sample.subgrads.size(); ++i) {
    const Vector& g = sample.subgrads[i];
    std::vector<double> key(g.data(), g.data() + g.size());
    if (seen.emplace(std::move(key), i).second) {
      gens.push_back(g);
      source.push_back(i);
    }
  }
  MinNormResult mn;
  try {
    mn = min_norm_point(gens, opts);
  } catch (const MinNormNotConverged& e) {
    mn = e.best();
  }
  double total = 0.0;
  for (double w : mn.weights) total += w > 0 ? w : 0.0;

  Certificate cert;
  cert.center = x;
  cert.delta = delta;
  for (std::size_t j = 0; j < gens.size(); ++j) {
    if (!(mn.weights[j] > 0)) continue;
    const std::size_t i = source[j];
    cert.probes.push_back({sample.points[i], mn.weights[j] / total, gens[j]});
  }
  refresh_aggregate(cert);
  return cert;
}

std::size_t default_sample_count(Eigen::Index dim) { return static_cast<std::size_t>(16 * dim); }

CertifyResult certify(Oracle& oracle, const Vector& x, double delta, double eps, std::size_t k, RngStream& rng,
                      const std::vector<Vector>& hints) {
  const GoldsteinSample sample = sample_goldstein(oracle, x, delta, k, rng, hints);
  CertifyResult out;
  out.cert = certificate_from_sample(x, delta, sample);
  out.found = out.cert.norm <= eps;
  return out;
}

VerifyResult verify_certificate(Oracle& oracle, const Certificate& cert) {
  auto fail = [](std::string diag, std::string detail) { return VerifyResult{false, std::move(diag), std::move(detail)}; };
  const Eigen::Index d = cert.center.size();
  if (cert.probes.empty()) return fail("shape", "certificate has no probes");
  if (!(cert.delta >= 0) || !std::isfinite(cert.delta)) return fail("shape", "invalid radius");
  for (const auto& p : cert.probes)
    if (p.point.size() != d || p.subgrad.size() != d) return fail("shape", "probe dimension mismatch");
  if (cert.aggregate.size() != d) return fail("shape", "aggregate dimension mismatch");

  double total = 0.0;
  for (const auto& p : cert.probes) {
    if (!(p.weight >= 0) || !std::isfinite(p.weight)) return fail("weights", "negative or non-finite weight");
    total += p.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) return fail("weights", "weights sum to " + std::to_string(total));

  for (std::size_t i = 0; i < cert.probes.size(); ++i) {
    const double dist = (cert.probes[i].point - cert.center).norm();
    if (dist > cert.delta * (1.0 + 1e-12))
      return fail("radius", "probe " + std::to_string(i) + " lies at distance " + std::to_string(dist));
  }

  Vector agg = Vector::Zero(d);
  for (const auto& p : cert.probes) agg += p.weight * p.subgrad;
  if ((agg - cert.aggregate).norm() > 1e-10) return fail("aggregate", "aggregate differs from the weighted sum");
  if (std::abs(cert.norm - cert.aggregate.norm()) > 1e-10) return fail("norm", "norm differs from |aggregate|");

  for (std::size_t i = 0; i < cert.probes.size(); ++i) {
    const auto& p = cert.probes[i];
    const OracleReply r = oracle.query(p.point);
    if (r.subgrad.size() == d && (r.subgrad - p.subgrad).norm() <= 1e-10 * std::max(1.0, r.subgrad.norm())) continue;
    bool in_hull = false;
    if (r.active_set && !r.active_set->generators.empty()) {
      std::vector<Vector> shifted;
      for (const auto& g : r.active_set->generators) shifted.push_back(g - p.subgrad);
      try {
        in_hull = min_norm_point(shifted).v.norm() <= 1e-9;
      } catch (const MinNormNotConverged& e) {
        in_hull = e.best().v.norm() <= 1e-9;
      }
    }
    if (!in_hull) return fail("subgradient", "probe " + std::to_string(i) + " carries an invalid subgradient");
  }
  return {};
}

// ---------------------------------------------------------------------------

bool StationarySet1D::contains(const mpq_class& x) const {
  for (const auto& iv : intervals)
    if ((!iv.lo || *iv.lo <= x) && (!iv.hi || x <= *iv.hi)) return true;
  return false;
}

std::optional<mpq_class> StationarySet1D::distance(const mpq_class& x) const {
  std::optional<mpq_class> best;
  for (const auto& iv : intervals) {
    mpq_class d(0);
    if (iv.lo && x < *iv.lo) d = *iv.lo - x;
    else if (iv.hi && x > *iv.hi) d = x - *iv.hi;
    if (!best || d < *best) best = d;
  }
  return best;
}

StationarySet1D eps_stationary_set_1d(const PiecewiseLinear1D& fn, double eps) {
  fn.validate();
  StationarySet1D out;
  out.epsilon = mpq_class(eps);
  const mpq_class& e = out.epsilon;
  auto small = [&](const mpq_class& s) { return abs(s) <= e; };

  std::vector<Interval1D> raw;
  const std::size_t nb = fn.breakpoints.size();
  for (std::size_t j = 0; j <= nb; ++j) {
    // Piece j spans (b_{j-1}, b_j) with infinite ends at 0 and nb.
    if (small(fn.slopes[j])) {
      Interval1D iv;
      if (j > 0) iv.lo = fn.breakpoints[j - 1];
      if (j < nb) iv.hi = fn.breakpoints[j];
      raw.push_back(iv);
    }
    if (j < nb) {
      const auto [lo, hi] = fn.subdifferential(fn.breakpoints[j]);
      if (lo <= e && hi >= -e) raw.push_back({fn.breakpoints[j], fn.breakpoints[j]});
    }
  }
  // Merge touching intervals; raw is already sorted by left end.
  for (const auto& iv : raw) {
    if (!out.intervals.empty()) {
      Interval1D& last = out.intervals.back();
      if (!last.hi) continue;
      if (iv.lo && *iv.lo <= *last.hi) {
        if (!iv.hi || *iv.hi > *last.hi) last.hi = iv.hi;
        continue;
      }
    }
    out.intervals.push_back(iv);
  }
  return out;
}

StationarySet1D eps_stationary_set_1d(const Instance& inst, double eps) {
  const PiecewiseLinear1D* fn = inst.exact_1d();
  if (!fn) throw std::invalid_argument("eps_stationary_set_1d: instance has no exact piecewise-linear form");
  return eps_stationary_set_1d(*fn, eps);
}

namespace {

class CachingOracle : public Oracle {
 public:
  explicit CachingOracle(const Instance& inst) : inst_(inst) {}
  OracleReply query(const Vector& x) override {
    auto it = cache_.find(x(0));
    if (it != cache_.end()) return it->second;
    return cache_.emplace(x(0), inst_.eval(x)).first->second;
  }
  Eigen::Index dim() const override { return 1; }

 private:
  const Instance& inst_;
  std::unordered_map<double, OracleReply> cache_;
};

}  // namespace

Claim1Report check_claim1_equiv(const Instance& inst, double delta, double eps, std::size_t grid) {
  const PiecewiseLinear1D* fn = inst.exact_1d();
  if (!fn || inst.dim() != 1) throw std::invalid_argument("check_claim1_equiv: needs an exact 1D instance");
  if (!(delta > 0) || !(eps > 0)) throw std::invalid_argument("check_claim1_equiv: delta and eps must be positive");
  const StationarySet1D set = eps_stationary_set_1d(*fn, eps);

  std::vector<double> xs;
  const double lo = fn->breakpoints.front().get_d() - delta - 0.25;
  const double hi = fn->breakpoints.back().get_d() + delta + 0.25;
  for (std::size_t i = 0; i < grid; ++i)
    xs.push_back(grid == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid - 1));
  for (const auto& b : fn->breakpoints) {
    xs.push_back(b.get_d() - delta);
    xs.push_back(b.get_d() + delta);
  }

  CachingOracle oracle(inst);
  RngStream rng(0);
  const mpq_class qd(delta);
  Claim1Report report;
  for (double x : xs) {
    const Vector xv = Vector::Constant(1, x);
    const CertifyResult c = certify(oracle, xv, delta, eps, 0, rng, inst.structural_hints(xv, delta));
    const auto dist = set.distance(mpq_class(x));
    const bool close = dist && *dist < qd;
    ++report.points;
    if (c.found == close) continue;
    const double dd = dist ? dist->get_d() : HUGE_VAL;
    if (std::abs(dd - delta) <= 1e-9) continue;
    report.disagreements.push_back({x, c.found, close, c.cert.norm, dd});
  }
  return report;
}

}  // namespace nsopt
