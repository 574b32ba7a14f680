#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nsopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws DimensionMismatch unless a and b have the same length.
void require_same_dim(const Vector& a, const Vector& b, const char* where);
bool all_finite(const Vector& a);

double dot(const Vector& a, const Vector& b);
double norm(const Vector& a);
Vector unit_vector(Eigen::Index dim, Eigen::Index i);

// ---------------------------------------------------------------------------
// Oracle replies

/// Description of the full subdifferential at a query point.  `generators`
/// spans it as a convex hull; `indices` names the active pieces (for max-type
/// functions, 1-based) and `at_kink` flags pieces whose own subdifferential is
/// a segment at this point.  For 1D instances `interval` holds [lo, hi].
struct ActiveSet {
  std::vector<std::size_t> indices;
  std::vector<bool> at_kink;
  std::vector<Vector> generators;
  std::optional<std::pair<double, double>> interval;
};

struct OracleReply {
  double value = 0.0;
  Vector subgrad;
  std::optional<ActiveSet> active_set;
};

/// First-order oracle: value and one Clarke subgradient at x.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual OracleReply query(const Vector& x) = 0;
  virtual Eigen::Index dim() const = 0;
};

// ---------------------------------------------------------------------------
// Query accounting

class BudgetExhausted : public std::runtime_error {
 public:
  explicit BudgetExhausted(std::size_t budget);
  std::size_t budget() const { return budget_; }

 private:
  std::size_t budget_;
};

struct QueryRecord {
  Vector x;
  OracleReply reply;
  std::string event;
};

/// Counts and records every call made through it.  A call that would exceed
/// the budget throws BudgetExhausted before reaching the wrapped oracle.
class QueryLedger : public Oracle {
 public:
  explicit QueryLedger(Oracle& inner, std::optional<std::size_t> budget = std::nullopt,
                       bool keep_records = true);

  OracleReply query(const Vector& x) override;
  Eigen::Index dim() const override { return inner_.dim(); }

  std::size_t count() const { return count_; }
  std::optional<std::size_t> budget() const { return budget_; }
  std::size_t remaining() const;
  const std::vector<QueryRecord>& records() const { return records_; }
  std::vector<QueryRecord>& records() { return records_; }

  /// Label attached to subsequent records.
  void set_event(std::string event) { event_ = std::move(event); }
  const std::string& event() const { return event_; }

 private:
  Oracle& inner_;
  std::optional<std::size_t> budget_;
  bool keep_records_;
  std::size_t count_ = 0;
  std::vector<QueryRecord> records_;
  std::string event_ = "query";
};

// ---------------------------------------------------------------------------
// Randomness

/// Reproducible random stream keyed by (seed, stream id).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);     // [lo, hi)
  double normal();
  std::uint64_t next_u64() { return engine_(); }
  std::size_t index(std::size_t n);        // uniform on {0, ..., n-1}
  Vector gaussian_vector(Eigen::Index dim);
  /// Uniform point of the closed ball of given radius around center.
  Vector in_ball(const Vector& center, double radius);
  /// Uniform point of the probability simplex with n vertices.
  std::vector<double> simplex_weights(std::size_t n);

  /// Independent child stream; same (seed, id, child) gives the same stream.
  RngStream split(std::uint64_t child) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Min-norm primitives

struct Combination {
  double lambda;
  Vector v;
};

/// argmin over lambda in [0,1] of ||lambda g + (1 - lambda) q||.
Combination min_norm_combination(const Vector& g, const Vector& q);

struct MinNormResult {
  std::vector<double> weights;
  Vector v;
  double gap = 0.0;
  std::size_t iterations = 0;
};

class MinNormNotConverged : public std::runtime_error {
 public:
  explicit MinNormNotConverged(MinNormResult best);
  const MinNormResult& best() const { return best_; }

 private:
  MinNormResult best_;
};

struct MinNormOptions {
  double tolerance = 1e-9;
  /// Zero means 10 * |points| * dim.
  std::size_t max_iterations = 0;
};

/// Minimum-norm point of conv(points) by Wolfe's algorithm.
MinNormResult min_norm_point(std::span<const Vector> points, const MinNormOptions& opts = {});

// ---------------------------------------------------------------------------
// Orthogonality helpers

/// Unit vector orthogonal to every element of vs.  Deterministic: the first
/// standard basis vector outside span(vs), orthogonalized against it.
Vector orthonormal_complement_vector(std::span<const Vector> vs, Eigen::Index dim);

/// rows x cols matrix with orthonormal columns from a Gaussian draw.
Matrix random_orthogonal(Eigen::Index rows, Eigen::Index cols, RngStream& rng);

}  // namespace nsopt
