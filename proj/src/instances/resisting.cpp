#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nsopt/instances.hpp"

namespace nsopt {

std::vector<Vector> dedup_points(const std::vector<Vector>& pts) {
  std::vector<Vector> out;
  for (const auto& p : pts) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Vector& q) {
      return q.size() == p.size() && q == p;
    });
    if (!seen) out.push_back(p);
  }
  return out;
}

namespace {

double separation_radius(const std::vector<Vector>& q) {
  if (q.size() < 2) return 1.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i)
    for (std::size_t j = i + 1; j < q.size(); ++j) best = std::min(best, (q[i] - q[j]).norm());
  return best / 4.0;
}

}  // namespace

ResistingInstance::ResistingInstance(std::vector<Vector> queries, Eigen::Index dim)
    : Instance(InstanceMeta{1.0, std::nullopt, 1.0, std::nullopt, dim, false},
               Descriptor{"resisting", {{"d", std::to_string(dim)}, {"queries", std::to_string(queries.size())}}}),
      queries_(dedup_points(queries)) {
  for (const auto& q : queries_) {
    if (q.size() != dim) throw DimensionMismatch("resisting: query of dimension " + std::to_string(q.size()));
    if (!all_finite(q)) throw std::invalid_argument("resisting: non-finite query");
  }
  if (dim < static_cast<Eigen::Index>(queries_.size()) + 2)
    throw std::invalid_argument("resisting: dimension must exceed the number of distinct queries by 2");
  r_ = separation_radius(queries_);
  std::vector<Vector> span{unit_vector(dim, 0)};
  span.insert(span.end(), queries_.begin(), queries_.end());
  v_ = orthonormal_complement_vector(span, dim);
}

OracleReply ResistingInstance::eval_h(const Vector& x) const {
  check_dim(x);
  OracleReply reply;
  ActiveSet as;
  const Vector e1 = unit_vector(x.size(), 0);
  for (std::size_t i = 0; i < queries_.size(); ++i) {
    const Vector dz = x - queries_[i];
    const double dist2 = dz.squaredNorm();
    const double r2 = r_ * r_;
    if (dist2 > r2) continue;
    const double s = dist2 / r2;
    const double vx = v_.dot(x);
    const double ez = dz(0);
    const Vector grad = (2.0 * vx / r2) * dz + s * v_ - (2.0 * ez / r2) * dz - s * e1 + e1;
    if (dist2 < r2) {
      reply.value = s * vx + (1.0 - s) * ez;
      reply.subgrad = grad;
      as.indices = {i + 1};
      as.at_kink = {false};
      as.generators = {grad};
    } else {
      // On the sphere both descriptions meet.
      reply.value = vx;
      reply.subgrad = v_;
      as.indices = {0, i + 1};
      as.at_kink = {true, true};
      as.generators = {v_, grad};
    }
    reply.active_set = std::move(as);
    return reply;
  }
  reply.value = v_.dot(x);
  reply.subgrad = v_;
  as.indices = {0};
  as.at_kink = {false};
  as.generators = {v_};
  reply.active_set = std::move(as);
  return reply;
}

OracleReply ResistingInstance::eval(const Vector& x) const {
  OracleReply h = eval_h(x);
  OracleReply reply;
  if (h.value >= -1.0) {
    reply.value = h.value / 7.0;
    reply.subgrad = h.subgrad / 7.0;
    ActiveSet as = *h.active_set;
    for (auto& g : as.generators) g /= 7.0;
    if (h.value == -1.0) as.generators.push_back(Vector::Zero(x.size()));
    reply.active_set = std::move(as);
  } else {
    reply.value = -1.0 / 7.0;
    reply.subgrad = Vector::Zero(x.size());
    reply.active_set = ActiveSet{{}, {}, {Vector::Zero(x.size())}, std::nullopt};
  }
  return reply;
}

std::vector<Vector> ResistingInstance::structural_hints(const Vector& x, double delta) const {
  const Eigen::Index d = x.size();
  const Vector e1 = unit_vector(d, 0);
  const double s2 = std::sqrt(0.5);
  const std::vector<Vector> dirs{v_, -v_, e1, -e1, s2 * (v_ + e1), s2 * (v_ - e1), -s2 * (v_ + e1), -s2 * (v_ - e1)};
  std::vector<Vector> out{x};
  for (const auto& z : queries_) {
    if ((z - x).norm() > delta + 2.0 * r_) continue;
    out.push_back(z);
    for (double rho : {0.5 * r_, r_, 2.0 * r_})
      for (const auto& u : dirs) out.push_back(z + rho * u);
  }
  for (const auto& u : dirs) out.push_back(x + delta * u);
  return out;
}

ResistingInstance resisting_function_build(const std::vector<Vector>& queries, Eigen::Index dim) {
  return ResistingInstance(queries, dim);
}

}  // namespace nsopt
