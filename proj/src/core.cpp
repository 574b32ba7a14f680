#include "nsopt/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace nsopt {

void require_same_dim(const Vector& a, const Vector& b, const char* where) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << where << ": dimension mismatch (" << a.size() << " vs " << b.size() << ")";
    throw DimensionMismatch(os.str());
  }
}

bool all_finite(const Vector& a) { return a.allFinite(); }

double dot(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "dot");
  return a.dot(b);
}

double norm(const Vector& a) { return a.norm(); }

Vector unit_vector(Eigen::Index dim, Eigen::Index i) {
  Vector e = Vector::Zero(dim);
  e(i) = 1.0;
  return e;
}

// ---------------------------------------------------------------------------

BudgetExhausted::BudgetExhausted(std::size_t budget)
    : std::runtime_error("oracle budget of " + std::to_string(budget) + " calls exhausted"),
      budget_(budget) {}

QueryLedger::QueryLedger(Oracle& inner, std::optional<std::size_t> budget, bool keep_records)
    : inner_(inner), budget_(budget), keep_records_(keep_records) {}

OracleReply QueryLedger::query(const Vector& x) {
  if (budget_ && count_ >= *budget_) throw BudgetExhausted(*budget_);
  OracleReply reply = inner_.query(x);
  ++count_;
  if (keep_records_) records_.push_back({x, reply, event_});
  return reply;
}

std::size_t QueryLedger::remaining() const {
  if (!budget_) return std::numeric_limits<std::size_t>::max();
  return *budget_ - count_;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_(stream_id), engine_(make_engine(seed, stream_id)) {}

double RngStream::uniform() { return std::generate_canonical<double, 53>(engine_); }

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RngStream::normal() {
  // Box-Muller on our own uniforms keeps draws independent of library caching.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::size_t RngStream::index(std::size_t n) {
  return static_cast<std::size_t>(std::min<double>(uniform() * static_cast<double>(n),
                                                   static_cast<double>(n - 1)));
}

Vector RngStream::gaussian_vector(Eigen::Index dim) {
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = normal();
  return v;
}

Vector RngStream::in_ball(const Vector& center, double radius) {
  const Eigen::Index d = center.size();
  Vector dir = gaussian_vector(d);
  double n = dir.norm();
  while (n == 0.0) {
    dir = gaussian_vector(d);
    n = dir.norm();
  }
  const double rho = radius * std::pow(uniform(), 1.0 / static_cast<double>(d));
  return center + (rho / n) * dir;
}

std::vector<double> RngStream::simplex_weights(std::size_t n) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& wi : w) {
    double u = uniform();
    while (u <= 0.0) u = uniform();
    wi = -std::log(u);
    total += wi;
  }
  for (auto& wi : w) wi /= total;
  return w;
}

RngStream RngStream::split(std::uint64_t child) const {
  return RngStream(seed_, splitmix64(stream_ ^ splitmix64(child + 1)));
}

// ---------------------------------------------------------------------------

Combination min_norm_combination(const Vector& g, const Vector& q) {
  require_same_dim(g, q, "min_norm_combination");
  const Vector diff = g - q;
  const double denom = diff.squaredNorm();
  if (denom == 0.0) return {1.0, g};
  const double lambda = std::clamp(q.dot(q - g) / denom, 0.0, 1.0);
  return {lambda, lambda * g + (1.0 - lambda) * q};
}

MinNormNotConverged::MinNormNotConverged(MinNormResult best)
    : std::runtime_error("min_norm_point did not converge within the iteration cap"),
      best_(std::move(best)) {}

namespace {

// Affine minimizer of the corral: weights summing to one minimizing
// ||sum a_i p_i||, from the KKT system [G 1; 1' 0].
Eigen::VectorXd affine_minimizer(std::span<const Vector> points, const std::vector<std::size_t>& corral) {
  const auto m = static_cast<Eigen::Index>(corral.size());
  Matrix kkt = Matrix::Zero(m + 1, m + 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      const double gij = points[corral[i]].dot(points[corral[j]]);
      kkt(i, j) = gij;
      kkt(j, i) = gij;
    }
    kkt(i, m) = 1.0;
    kkt(m, i) = 1.0;
  }
  Vector rhs = Vector::Zero(m + 1);
  rhs(m) = 1.0;
  Vector sol = kkt.colPivHouseholderQr().solve(rhs);
  return sol.head(m);
}

Vector combine(std::span<const Vector> points, const std::vector<std::size_t>& corral,
               const std::vector<double>& lambda) {
  Vector x = Vector::Zero(points[corral.front()].size());
  for (std::size_t i = 0; i < corral.size(); ++i) x += lambda[i] * points[corral[i]];
  return x;
}

}  // namespace

MinNormResult min_norm_point(std::span<const Vector> points, const MinNormOptions& opts) {
  if (points.empty()) throw std::invalid_argument("min_norm_point: empty point set");
  const Eigen::Index dim = points.front().size();
  double scale = 0.0;
  std::size_t start = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    require_same_dim(points.front(), points[i], "min_norm_point");
    const double sq = points[i].squaredNorm();
    scale = std::max(scale, sq);
    if (sq < best_sq) {
      best_sq = sq;
      start = i;
    }
  }
  const std::size_t cap = opts.max_iterations > 0
                              ? opts.max_iterations
                              : 10 * points.size() * static_cast<std::size_t>(std::max<Eigen::Index>(dim, 1));
  const double stop = opts.tolerance * std::max(scale, std::numeric_limits<double>::min());

  std::vector<std::size_t> corral{start};
  std::vector<double> lambda{1.0};
  Vector x = points[start];
  std::size_t iterations = 0;
  double gap = 0.0;

  auto result = [&]() {
    MinNormResult r;
    r.weights.assign(points.size(), 0.0);
    for (std::size_t i = 0; i < corral.size(); ++i) r.weights[corral[i]] = lambda[i];
    r.v = x;
    r.gap = gap;
    r.iterations = iterations;
    return r;
  };

  while (true) {
    const double xx = x.squaredNorm();
    std::size_t j = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < points.size(); ++k) {
      const double s = x.dot(points[k]);
      if (s < best) {
        best = s;
        j = k;
      }
    }
    gap = xx - best;
    if (gap <= stop || xx == 0.0) break;
    if (std::find(corral.begin(), corral.end(), j) != corral.end()) break;
    if (++iterations > cap) throw MinNormNotConverged(result());
    corral.push_back(j);
    lambda.push_back(0.0);

    while (true) {
      Eigen::VectorXd alpha = affine_minimizer(points, corral);
      bool interior = alpha.allFinite();
      for (Eigen::Index i = 0; interior && i < alpha.size(); ++i) interior = alpha(i) > 1e-14;
      if (interior) {
        for (std::size_t i = 0; i < corral.size(); ++i) lambda[i] = alpha(static_cast<Eigen::Index>(i));
        x = combine(points, corral, lambda);
        break;
      }
      if (++iterations > cap) throw MinNormNotConverged(result());
      // Step from lambda toward alpha until the first weight hits zero.
      double theta = 1.0;
      for (std::size_t i = 0; i < corral.size(); ++i) {
        const double a = alpha(static_cast<Eigen::Index>(i));
        if (a <= 1e-14 && lambda[i] - a > 0.0) theta = std::min(theta, lambda[i] / (lambda[i] - a));
      }
      if (!alpha.allFinite()) theta = 0.0;
      std::size_t drop = 0;
      double smallest = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < corral.size(); ++i) {
        if (alpha.allFinite()) lambda[i] = (1.0 - theta) * lambda[i] + theta * alpha(static_cast<Eigen::Index>(i));
        if (lambda[i] < smallest) {
          smallest = lambda[i];
          drop = i;
        }
      }
      // Remove every vanished weight, and at least the smallest one.
      std::vector<std::size_t> keep_c;
      std::vector<double> keep_l;
      for (std::size_t i = 0; i < corral.size(); ++i) {
        if (i == drop || lambda[i] <= 1e-14) continue;
        keep_c.push_back(corral[i]);
        keep_l.push_back(lambda[i]);
      }
      if (keep_c.empty()) {
        keep_c.push_back(corral[drop == 0 && corral.size() > 1 ? 1 : 0]);
        keep_l.push_back(1.0);
      }
      double total = 0.0;
      for (double l : keep_l) total += l;
      for (double& l : keep_l) l /= total;
      corral = std::move(keep_c);
      lambda = std::move(keep_l);
      x = combine(points, corral, lambda);
      if (corral.size() == 1) break;
    }
  }
  return result();
}

// ---------------------------------------------------------------------------

Vector orthonormal_complement_vector(std::span<const Vector> vs, Eigen::Index dim) {
  std::vector<Vector> basis;
  for (const Vector& v : vs) {
    if (v.size() != dim) throw DimensionMismatch("orthonormal_complement_vector: input of wrong dimension");
    Vector u = v;
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& q : basis) u -= q.dot(u) * q;
    const double n = u.norm();
    if (n > 1e-10 * std::max(1.0, v.norm())) basis.push_back(u / n);
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    Vector u = unit_vector(dim, i);
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& q : basis) u -= q.dot(u) * q;
    const double n = u.norm();
    if (n > 1e-6) {
      u /= n;
      for (const Vector& q : basis) u -= q.dot(u) * q;
      return u / u.norm();
    }
  }
  throw std::domain_error("orthonormal_complement_vector: inputs span the whole space");
}

Matrix random_orthogonal(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  if (rows < cols || cols < 1) throw std::invalid_argument("random_orthogonal: need rows >= cols >= 1");
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  // Sign fix makes the draw Haar-distributed.
  for (Eigen::Index j = 0; j < cols; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

}  // namespace nsopt
