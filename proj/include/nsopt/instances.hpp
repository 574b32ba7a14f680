#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "nsopt/certificate.hpp"
#include "nsopt/core.hpp"

namespace nsopt {

struct InstanceMeta {
  double lipschitz = 1.0;
  std::optional<double> smoothness;
  double subopt_bound = 1.0;
  std::optional<double> domain_bound;
  Eigen::Index dim = 1;
  bool convex = false;
};

/// Construction parameters, rendered inline as "name:key=value,key=value".
struct Descriptor {
  std::string name;
  std::map<std::string, std::string> params;

  bool operator==(const Descriptor&) const = default;
  bool has(const std::string& key) const { return params.count(key) > 0; }
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
};

Descriptor parse_descriptor(std::string_view text);
std::string to_string(const Descriptor& d);

struct PiecewiseLinear1D;

/// Immutable hard function with an exact first-order oracle.
class Instance : public Oracle {
 public:
  Instance(InstanceMeta meta, Descriptor descriptor)
      : meta_(std::move(meta)), descriptor_(std::move(descriptor)) {}

  virtual OracleReply eval(const Vector& x) const = 0;
  OracleReply query(const Vector& x) final { return eval(x); }
  Eigen::Index dim() const final { return meta_.dim; }

  const InstanceMeta& meta() const { return meta_; }
  const Descriptor& descriptor() const { return descriptor_; }

  virtual Vector default_start() const { return Vector::Zero(meta_.dim); }
  /// Exact piecewise-linear structure, for 1D instances that have one.
  virtual const PiecewiseLinear1D* exact_1d() const { return nullptr; }
  /// Points inside the closed delta-ball whose subgradients expose the
  /// structure of the delta-subdifferential at x.
  virtual std::vector<Vector> structural_hints(const Vector& x, double delta) const;

 protected:
  void check_dim(const Vector& x) const;

 private:
  InstanceMeta meta_;
  Descriptor descriptor_;
};

using InstancePtr = std::shared_ptr<const Instance>;

/// Oracle view of a shared immutable instance.
class InstanceOracle final : public Oracle {
 public:
  explicit InstanceOracle(const Instance& inst) : inst_(inst) {}
  OracleReply query(const Vector& x) override { return inst_.eval(x); }
  Eigen::Index dim() const override { return inst_.dim(); }

 private:
  const Instance& inst_;
};

// ---------------------------------------------------------------------------
// Elementary instances

/// f(x) = 1/2 ||x||^2, started at distance `radius` from the minimizer.
class QuadraticInstance final : public Instance {
 public:
  QuadraticInstance(Eigen::Index dim, double radius);
  OracleReply eval(const Vector& x) const override;
  Vector default_start() const override;

 private:
  double radius_;
};

/// f(x) = c (constant).
class ConstantInstance final : public Instance {
 public:
  ConstantInstance(Eigen::Index dim, double value);
  OracleReply eval(const Vector& x) const override;

 private:
  double value_;
};

/// f(x) = slope * x_1.
class LinearInstance final : public Instance {
 public:
  LinearInstance(Eigen::Index dim, double slope);
  OracleReply eval(const Vector& x) const override;
  const PiecewiseLinear1D* exact_1d() const override;

 private:
  double slope_;
  std::shared_ptr<PiecewiseLinear1D> exact_;
};

// ---------------------------------------------------------------------------
// Exact piecewise-linear functions of one variable

enum class KinkConvention { left, right };

struct PiecewiseLinear1D {
  std::vector<mpq_class> breakpoints;  // strictly increasing, nonempty
  std::vector<mpq_class> slopes;       // breakpoints.size() + 1
  std::vector<mpq_class> values;       // f at each breakpoint

  std::size_t piece_of(const mpq_class& x) const;  // index into slopes; breakpoints belong left
  mpq_class value_at(const mpq_class& x) const;
  /// [lo, hi] of the Clarke subdifferential at x.
  std::pair<mpq_class, mpq_class> subdifferential(const mpq_class& x) const;
  void validate() const;
};

class PiecewiseLinearInstance final : public Instance {
 public:
  PiecewiseLinearInstance(PiecewiseLinear1D fn, KinkConvention convention, InstanceMeta meta,
                          Descriptor descriptor);
  OracleReply eval(const Vector& x) const override;
  const PiecewiseLinear1D* exact_1d() const override { return &fn_; }
  std::vector<Vector> structural_hints(const Vector& x, double delta) const override;

 private:
  PiecewiseLinear1D fn_;
  KinkConvention convention_;
};

/// f(x) = |x| on the real line; +1 at the kink.
std::shared_ptr<PiecewiseLinearInstance> make_abs_instance();

/// Shared reply builder for exact 1D functions.
OracleReply reply_1d(const PiecewiseLinear1D& fn, double x, KinkConvention convention, const mpq_class& scale);
std::vector<Vector> hints_1d(const PiecewiseLinear1D& fn, double x, double delta);

// ---------------------------------------------------------------------------
// Nemirovski chain max_i |x_i - 1| + 3 alpha (T - i)

OracleReply nemirovski_eval(const Vector& x, long T, double alpha);
OracleReply nemirovski_extended_eval(const Vector& x, const Matrix& U, long T, double alpha);
/// Largest 1-based index with |x_i| > alpha, 0 if none.
long prog_alpha(const Vector& x, double alpha);
/// Temperature-tau log-sum-exp over the 2T affine pieces of the chain.
OracleReply logsumexp_nemirovski_eval(const Vector& x, long T, double alpha, double tau);
double default_lse_temperature(double eps, long T);

class NemirovskiInstance final : public Instance {
 public:
  NemirovskiInstance(long T, double alpha);
  OracleReply eval(const Vector& x) const override;
  std::vector<Vector> structural_hints(const Vector& x, double delta) const override;
  long T() const { return T_; }
  double alpha() const { return alpha_; }

 private:
  long T_;
  double alpha_;
};

class NemirovskiExtendedInstance final : public Instance {
 public:
  NemirovskiExtendedInstance(long T, double alpha, Eigen::Index dim, std::uint64_t seed);
  OracleReply eval(const Vector& x) const override;
  const Matrix& rotation() const { return U_; }

 private:
  long T_;
  double alpha_;
  Matrix U_;
};

class LogSumExpNemirovskiInstance final : public Instance {
 public:
  LogSumExpNemirovskiInstance(long T, double alpha, double tau);
  OracleReply eval(const Vector& x) const override;
  double tau() const { return tau_; }

 private:
  long T_;
  double alpha_;
  double tau_;
};

// ---------------------------------------------------------------------------
// Nested-segment 1D family

struct SigmaWord {
  std::vector<int> bits;

  std::size_t size() const { return bits.size(); }
  std::string str() const;
  static SigmaWord parse(std::string_view text);
  static SigmaWord random(std::size_t n, RngStream& rng);
};

inline constexpr std::size_t kTreeMaxDepth = 32;

/// Affine map t -> scale * t + shift with exact coefficients.
struct AffineQ {
  mpq_class scale{1};
  mpq_class shift{0};
  mpq_class operator()(const mpq_class& t) const { return scale * t + shift; }
  mpq_class inverse(const mpq_class& y) const { return (y - shift) / scale; }
};

class Tree1dInstance final : public Instance {
 public:
  explicit Tree1dInstance(SigmaWord sigma, bool rescaled = false);

  OracleReply eval(const Vector& x) const override;
  const PiecewiseLinear1D* exact_1d() const override { return &pieces_; }
  std::vector<Vector> structural_hints(const Vector& x, double delta) const override;

  const SigmaWord& sigma() const { return sigma_; }
  std::size_t depth() const { return sigma_.size(); }
  bool rescaled() const { return rescaled_; }

  /// Exact value via the nested-composition formula.
  mpq_class value_exact(const mpq_class& x) const;
  /// Value of the piece living on I_k \ I_{k+1} (k = 0..N-1), extended
  /// affinely; k = N is the constant on I_N, k = -1 / -2 the outer rays.
  mpq_class piece_value(long k, const mpq_class& x) const;

  /// I_{sigma_1..sigma_k}; k = 0 gives (0, 1).
  std::pair<mpq_class, mpq_class> interval(std::size_t k) const;
  std::pair<double, double> min_interval() const;
  mpq_class min_value_exact() const;
  const AffineQ& inner_map(std::size_t k) const { return phi_[k]; }    // phi^1 o .. o phi^k
  const AffineQ& value_map(std::size_t k) const { return Phi_[k]; }    // Phi^1 o .. o Phi^k

 private:
  mpq_class scale_factor() const;

  SigmaWord sigma_;
  bool rescaled_;
  std::vector<AffineQ> phi_;
  std::vector<AffineQ> Phi_;
  PiecewiseLinear1D pieces_;
};

/// I^i_b for level i >= 1.
std::pair<mpq_class, mpq_class> tree_segment(long level, int bit);
/// h^i_b(u) on [0,1] minus its gap, extended affinely per side.
mpq_class tree_piece(long level, int bit, const mpq_class& u);
/// Slope of h^i_b on its left / right side.
std::pair<mpq_class, mpq_class> tree_piece_slopes(long level, int bit);

// ---------------------------------------------------------------------------
// Mahalanobis norm sqrt(x' A x), A = diag(2 eps^2, 1, ..., 1)

long mahalanobis_default_dim(double eps);
OracleReply mahalanobis_eval(const Vector& x, double eps, long d);
Certificate mahalanobis_witness(double delta, double eps, long d);
double mahalanobis_witness_norm(double eps, long d);

class MahalanobisInstance final : public Instance {
 public:
  MahalanobisInstance(double eps, long d);
  OracleReply eval(const Vector& x) const override;
  Vector default_start() const override;
  double eps() const { return eps_; }

 private:
  double eps_;
};

// ---------------------------------------------------------------------------
// Resisting function consistent with the uninformative replies

class ResistingInstance final : public Instance {
 public:
  /// Queries are deduplicated; dim must leave room outside span{e1, queries}.
  ResistingInstance(std::vector<Vector> queries, Eigen::Index dim);

  OracleReply eval(const Vector& x) const override;
  OracleReply eval_h(const Vector& x) const;
  std::vector<Vector> structural_hints(const Vector& x, double delta) const override;

  const std::vector<Vector>& queries() const { return queries_; }
  double radius() const { return r_; }
  const Vector& direction() const { return v_; }

 private:
  std::vector<Vector> queries_;
  double r_;
  Vector v_;
};

std::vector<Vector> dedup_points(const std::vector<Vector>& pts);
ResistingInstance resisting_function_build(const std::vector<Vector>& queries, Eigen::Index dim);

// ---------------------------------------------------------------------------

/// Builds an instance from its descriptor; `eps` feeds defaults that depend
/// on the target accuracy (log-sum-exp temperature).
InstancePtr make_instance(const Descriptor& d, std::uint64_t seed = 0, double eps = 0.1);

}  // namespace nsopt
