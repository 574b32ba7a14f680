#include <cassert>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "nsopt/instances.hpp"

namespace nsopt {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_chain_params(long T, double alpha) {
  if (T < 1) throw std::invalid_argument("nemirovski: T must be positive");
  if (!(alpha > 0) || !std::isfinite(alpha)) throw std::invalid_argument("nemirovski: alpha must be positive");
}

double chain_term(const Vector& x, long i, long T, double alpha) {
  return std::abs(x(i) - 1.0) + 3.0 * alpha * static_cast<double>(T - 1 - i);
}

}  // namespace

OracleReply nemirovski_eval(const Vector& x, long T, double alpha) {
  if (x.size() != T) throw DimensionMismatch("nemirovski_eval: expected dimension " + std::to_string(T));
  long best = 0;
  double value = chain_term(x, 0, T, alpha);
  for (long i = 1; i < T; ++i) {
    const double t = chain_term(x, i, T, alpha);
    if (t > value) {
      value = t;
      best = i;
    }
  }
  OracleReply reply;
  reply.value = value;
  reply.subgrad = Vector::Zero(T);
  reply.subgrad(best) = x(best) >= 1.0 ? 1.0 : -1.0;

  ActiveSet as;
  for (long i = 0; i < T; ++i) {
    if (chain_term(x, i, T, alpha) != value) continue;
    const bool kink = x(i) == 1.0;
    as.indices.push_back(static_cast<std::size_t>(i + 1));
    as.at_kink.push_back(kink);
    if (kink) {
      as.generators.push_back(unit_vector(T, i));
      as.generators.push_back(-unit_vector(T, i));
    } else {
      as.generators.push_back((x(i) > 1.0 ? 1.0 : -1.0) * unit_vector(T, i));
    }
  }
  reply.active_set = std::move(as);
  return reply;
}

OracleReply nemirovski_extended_eval(const Vector& x, const Matrix& U, long T, double alpha) {
  if (U.cols() != T) throw std::invalid_argument("nemirovski_extended_eval: U must have T columns");
  if (x.size() != U.rows()) throw DimensionMismatch("nemirovski_extended_eval: x does not match rows of U");
  const Vector y = U.transpose() * x;
  OracleReply inner = nemirovski_eval(y, T, alpha);
  const double nx = x.norm();
  const double outer = 2.0 * (nx - 2.0 * std::sqrt(static_cast<double>(T)));

  OracleReply reply;
  ActiveSet as;
  if (inner.value >= outer) {
    reply.value = inner.value;
    reply.subgrad = U * inner.subgrad;
    for (std::size_t j = 0; j < inner.active_set->indices.size(); ++j) {
      as.indices.push_back(inner.active_set->indices[j]);
      as.at_kink.push_back(inner.active_set->at_kink[j]);
    }
    for (const auto& g : inner.active_set->generators) as.generators.push_back(U * g);
  } else {
    reply.value = outer;
  }
  if (outer >= inner.value) {
    // The inner branch is at least 0 and the outer one is -4 sqrt(T) at the origin.
    assert(nx > 0.0);
    const Vector radial = 2.0 * x / nx;
    if (outer > inner.value) reply.subgrad = radial;
    as.indices.push_back(static_cast<std::size_t>(T + 1));
    as.at_kink.push_back(false);
    as.generators.push_back(radial);
  }
  reply.active_set = std::move(as);
  return reply;
}

long prog_alpha(const Vector& x, double alpha) {
  for (Eigen::Index i = x.size(); i > 0; --i)
    if (std::abs(x(i - 1)) > alpha) return static_cast<long>(i);
  return 0;
}

OracleReply logsumexp_nemirovski_eval(const Vector& x, long T, double alpha, double tau) {
  if (x.size() != T) throw DimensionMismatch("logsumexp_nemirovski_eval: expected dimension " + std::to_string(T));
  if (!(tau > 0)) throw std::invalid_argument("logsumexp_nemirovski_eval: tau must be positive");
  // Pieces +(x_i - 1) + c_i and -(x_i - 1) + c_i.
  double m = -HUGE_VAL;
  for (long i = 0; i < T; ++i) m = std::max(m, chain_term(x, i, T, alpha));
  double total = 0.0;
  Vector grad = Vector::Zero(T);
  for (long i = 0; i < T; ++i) {
    const double c = 3.0 * alpha * static_cast<double>(T - 1 - i);
    const double up = std::exp(((x(i) - 1.0) + c - m) / tau);
    const double down = std::exp((-(x(i) - 1.0) + c - m) / tau);
    total += up + down;
    grad(i) = up - down;
  }
  return {m + tau * std::log(total), grad / total, std::nullopt};
}

double default_lse_temperature(double eps, long T) {
  return eps / (10.0 * std::log(2.0 * static_cast<double>(T)));
}

NemirovskiInstance::NemirovskiInstance(long T, double alpha)
    : Instance(InstanceMeta{1.0, std::nullopt, 1.0, std::sqrt(static_cast<double>(T)), T, true},
               Descriptor{"nemirovski", {{"T", std::to_string(T)}, {"alpha", num(alpha)}}}),
      T_(T),
      alpha_(alpha) {
  check_chain_params(T, alpha);
}

OracleReply NemirovskiInstance::eval(const Vector& x) const {
  check_dim(x);
  return nemirovski_eval(x, T_, alpha_);
}

std::vector<Vector> NemirovskiInstance::structural_hints(const Vector& x, double delta) const {
  std::vector<Vector> out;
  for (long i = 0; i < T_; ++i) {
    out.push_back(x + 0.99 * delta * unit_vector(T_, i));
    out.push_back(x - 0.99 * delta * unit_vector(T_, i));
  }
  return out;
}

NemirovskiExtendedInstance::NemirovskiExtendedInstance(long T, double alpha, Eigen::Index dim, std::uint64_t seed)
    : Instance(InstanceMeta{2.0, std::nullopt, 1.0, std::sqrt(static_cast<double>(T)), dim, true},
               Descriptor{"nemirovski-ext",
                          {{"T", std::to_string(T)},
                           {"alpha", num(alpha)},
                           {"d", std::to_string(dim)},
                           {"seed", std::to_string(seed)}}}),
      T_(T),
      alpha_(alpha) {
  check_chain_params(T, alpha);
  if (dim < T) throw std::invalid_argument("nemirovski-ext: d must be at least T");
  RngStream rng(seed, 0x55);
  U_ = random_orthogonal(dim, T, rng);
}

OracleReply NemirovskiExtendedInstance::eval(const Vector& x) const {
  check_dim(x);
  return nemirovski_extended_eval(x, U_, T_, alpha_);
}

LogSumExpNemirovskiInstance::LogSumExpNemirovskiInstance(long T, double alpha, double tau)
    : Instance(InstanceMeta{1.0, 1.0 / tau, 1.0 + tau * std::log(2.0 * static_cast<double>(T)),
                            std::sqrt(static_cast<double>(T)), T, true},
               Descriptor{"lse-nemirovski", {{"T", std::to_string(T)}, {"alpha", num(alpha)}, {"tau", num(tau)}}}),
      T_(T),
      alpha_(alpha),
      tau_(tau) {
  check_chain_params(T, alpha);
  if (!(tau > 0) || !std::isfinite(tau)) throw std::invalid_argument("lse-nemirovski: tau must be positive");
}

OracleReply LogSumExpNemirovskiInstance::eval(const Vector& x) const {
  check_dim(x);
  return logsumexp_nemirovski_eval(x, T_, alpha_, tau_);
}

}  // namespace nsopt
