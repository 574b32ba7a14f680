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

double first_weight(double eps) { return 2.0 * eps * eps; }

}  // namespace

long mahalanobis_default_dim(double eps) {
  if (!(eps > 0)) throw std::invalid_argument("mahalanobis: eps must be positive");
  return static_cast<long>(std::ceil(3.0 / (eps * eps) - 1e-9));
}

OracleReply mahalanobis_eval(const Vector& x, double eps, long d) {
  if (x.size() != d) throw DimensionMismatch("mahalanobis_eval: expected dimension " + std::to_string(d));
  Vector ax = x;
  ax(0) *= first_weight(eps);
  const double q = x.dot(ax);
  OracleReply reply;
  ActiveSet as;
  if (q > 0.0) {
    reply.value = std::sqrt(q);
    reply.subgrad = ax / reply.value;
    as.generators.push_back(reply.subgrad);
  } else {
    // The subdifferential at the origin is the ellipsoid {g : g' A^-1 g <= 1};
    // its axis endpoints span an inscribed polytope.
    reply.value = 0.0;
    reply.subgrad = Vector::Zero(d);
    for (long i = 0; i < d; ++i) {
      const double a = i == 0 ? std::sqrt(first_weight(eps)) : 1.0;
      as.generators.push_back(a * unit_vector(d, i));
      as.generators.push_back(-a * unit_vector(d, i));
    }
  }
  reply.active_set = std::move(as);
  return reply;
}

double mahalanobis_witness_norm(double eps, long d) {
  return std::sqrt(2.0 * eps * eps / 9.0 + 8.0 / (9.0 * static_cast<double>(d - 1)));
}

Certificate mahalanobis_witness(double delta, double eps, long d) {
  if (d < 2) throw std::invalid_argument("mahalanobis_witness: d must be at least 2");
  if (!(mahalanobis_witness_norm(eps, d) < eps))
    throw std::invalid_argument("mahalanobis_witness: parameters give a witness norm of at least eps");
  Certificate cert;
  cert.center = (delta / (8.0 * eps)) * unit_vector(d, 0);
  cert.delta = delta;
  const double w = 1.0 / static_cast<double>(d - 1);
  for (long j = 1; j < d; ++j) {
    Vector z = cert.center + 0.5 * delta * unit_vector(d, j);
    OracleReply r = mahalanobis_eval(z, eps, d);
    cert.probes.push_back({std::move(z), w, std::move(r.subgrad)});
  }
  refresh_aggregate(cert);
  return cert;
}

MahalanobisInstance::MahalanobisInstance(double eps, long d)
    : Instance(InstanceMeta{1.0, std::nullopt, 1.0, 1.0, d, true},
               Descriptor{"mahalanobis", {{"eps", num(eps)}, {"d", std::to_string(d)}}}),
      eps_(eps) {
  if (!(eps > 0) || first_weight(eps) > 1.0) throw std::invalid_argument("mahalanobis: need 0 < eps <= 1/sqrt(2)");
  if (d < 1) throw std::invalid_argument("mahalanobis: d must be positive");
}

OracleReply MahalanobisInstance::eval(const Vector& x) const {
  check_dim(x);
  return mahalanobis_eval(x, eps_, meta().dim);
}

Vector MahalanobisInstance::default_start() const { return unit_vector(meta().dim, 0); }

}  // namespace nsopt
