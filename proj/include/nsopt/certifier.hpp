#pragma once

#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "nsopt/certificate.hpp"
#include "nsopt/core.hpp"
#include "nsopt/instances.hpp"

namespace nsopt {

struct GoldsteinSample {
  std::vector<Vector> points;
  std::vector<Vector> subgrads;
};

/// Subgradients at x, at the hints (pulled into the closed delta-ball), and
/// at k uniform points of the ball.  Generators of any reported active set
/// are added as extra subgradients at the same point.
GoldsteinSample sample_goldstein(Oracle& oracle, const Vector& x, double delta, std::size_t k, RngStream& rng,
                                 const std::vector<Vector>& hints = {});

/// Certificate from the min-norm point of a sample.
Certificate certificate_from_sample(const Vector& x, double delta, const GoldsteinSample& sample,
                                    const MinNormOptions& opts = {});

struct CertifyResult {
  /// False means no certificate was found at this sampling effort; `cert` is
  /// then the best one seen.
  bool found = false;
  Certificate cert;
};

CertifyResult certify(Oracle& oracle, const Vector& x, double delta, double eps, std::size_t k, RngStream& rng,
                      const std::vector<Vector>& hints = {});

std::size_t default_sample_count(Eigen::Index dim);

struct VerifyResult {
  bool ok = true;
  std::string diagnostic;  // "weights", "radius", "aggregate", "norm", "subgradient", "shape"
  std::string detail;
};

VerifyResult verify_certificate(Oracle& oracle, const Certificate& cert);

// ---------------------------------------------------------------------------
// Exact 1D stationarity

struct Interval1D {
  std::optional<mpq_class> lo;  // nullopt is -infinity
  std::optional<mpq_class> hi;  // nullopt is +infinity
};

struct StationarySet1D {
  std::vector<Interval1D> intervals;  // closed, sorted, disjoint
  mpq_class epsilon;

  bool empty() const { return intervals.empty(); }
  bool contains(const mpq_class& x) const;
  /// Distance from x; nullopt when the set is empty.
  std::optional<mpq_class> distance(const mpq_class& x) const;
};

StationarySet1D eps_stationary_set_1d(const PiecewiseLinear1D& fn, double eps);
StationarySet1D eps_stationary_set_1d(const Instance& inst, double eps);

struct Claim1Disagreement {
  double x = 0.0;
  bool certified = false;
  bool close = false;
  double certificate_norm = 0.0;
  double distance = 0.0;
};

struct Claim1Report {
  std::size_t points = 0;
  std::vector<Claim1Disagreement> disagreements;
};

Claim1Report check_claim1_equiv(const Instance& inst, double delta, double eps, std::size_t grid);

}  // namespace nsopt
