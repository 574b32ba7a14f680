#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "nsopt/instances.hpp"

namespace nsopt {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

double Descriptor::number(const std::string& key, double fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != it->second.size() || !std::isfinite(v))
    throw std::invalid_argument("parameter '" + key + "' is not a finite number: " + it->second);
  return v;
}

long Descriptor::integer(const std::string& key, long fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(it->second, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != it->second.size()) throw std::invalid_argument("parameter '" + key + "' is not an integer: " + it->second);
  return v;
}

std::string Descriptor::text(const std::string& key, const std::string& fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

Descriptor parse_descriptor(std::string_view text) {
  Descriptor d;
  const auto colon = text.find(':');
  d.name = trim(text.substr(0, colon));
  if (d.name.empty()) throw std::invalid_argument("instance descriptor without a name");
  if (colon == std::string_view::npos) return d;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("descriptor item without '=': " + std::string(item));
    std::string key = trim(item.substr(0, eq));
    std::string value = trim(item.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument("descriptor item with empty key");
    d.params[key] = value;
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return d;
}

std::string to_string(const Descriptor& d) {
  std::string out = d.name;
  char sep = ':';
  for (const auto& [k, v] : d.params) {
    out += sep;
    out += k + "=" + v;
    sep = ',';
  }
  return out;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void refresh_aggregate(Certificate& cert) {
  cert.aggregate = Vector::Zero(cert.center.size());
  for (const auto& p : cert.probes) cert.aggregate += p.weight * p.subgrad;
  cert.norm = cert.aggregate.norm();
}

// ---------------------------------------------------------------------------

std::vector<Vector> Instance::structural_hints(const Vector&, double) const { return {}; }

void Instance::check_dim(const Vector& x) const {
  if (x.size() != meta_.dim)
    throw DimensionMismatch("instance '" + descriptor_.name + "' expects dimension " + std::to_string(meta_.dim) +
                            ", got " + std::to_string(x.size()));
}

QuadraticInstance::QuadraticInstance(Eigen::Index dim, double radius)
    : Instance(InstanceMeta{radius + 1.0, 1.0, 0.5 * radius * radius, radius, dim, true},
               Descriptor{"quadratic", {{"dim", std::to_string(dim)}, {"r", num(radius)}}}),
      radius_(radius) {
  if (dim < 1 || !(radius > 0)) throw std::invalid_argument("quadratic: need dim >= 1 and r > 0");
}

OracleReply QuadraticInstance::eval(const Vector& x) const {
  check_dim(x);
  return {0.5 * x.squaredNorm(), x, std::nullopt};
}

Vector QuadraticInstance::default_start() const {
  return Vector::Constant(meta().dim, radius_ / std::sqrt(static_cast<double>(meta().dim)));
}

ConstantInstance::ConstantInstance(Eigen::Index dim, double value)
    : Instance(InstanceMeta{1.0, 0.0, 0.0, std::nullopt, dim, true},
               Descriptor{"constant", {{"dim", std::to_string(dim)}, {"value", num(value)}}}),
      value_(value) {}

OracleReply ConstantInstance::eval(const Vector& x) const {
  check_dim(x);
  return {value_, Vector::Zero(x.size()), std::nullopt};
}

LinearInstance::LinearInstance(Eigen::Index dim, double slope)
    : Instance(InstanceMeta{std::max(std::abs(slope), 1e-300), 0.0, 1.0, std::nullopt, dim, true},
               Descriptor{"linear", {{"dim", std::to_string(dim)}, {"slope", num(slope)}}}),
      slope_(slope) {
  if (dim == 1) {
    exact_ = std::make_shared<PiecewiseLinear1D>();
    exact_->breakpoints = {mpq_class(0)};
    exact_->slopes = {mpq_class(slope), mpq_class(slope)};
    exact_->values = {mpq_class(0)};
  }
}

OracleReply LinearInstance::eval(const Vector& x) const {
  check_dim(x);
  Vector g = Vector::Zero(x.size());
  g(0) = slope_;
  return {slope_ * x(0), g, std::nullopt};
}

const PiecewiseLinear1D* LinearInstance::exact_1d() const { return exact_.get(); }

// ---------------------------------------------------------------------------

std::size_t PiecewiseLinear1D::piece_of(const mpq_class& x) const {
  // Number of breakpoints strictly below x.
  return static_cast<std::size_t>(
      std::lower_bound(breakpoints.begin(), breakpoints.end(), x) - breakpoints.begin());
}

mpq_class PiecewiseLinear1D::value_at(const mpq_class& x) const {
  const std::size_t j = piece_of(x);
  if (j == 0) return values[0] + slopes[0] * (x - breakpoints[0]);
  return values[j - 1] + slopes[j] * (x - breakpoints[j - 1]);
}

std::pair<mpq_class, mpq_class> PiecewiseLinear1D::subdifferential(const mpq_class& x) const {
  const std::size_t j = piece_of(x);
  if (j < breakpoints.size() && breakpoints[j] == x) {
    const mpq_class& l = slopes[j];
    const mpq_class& r = slopes[j + 1];
    return l <= r ? std::make_pair(l, r) : std::make_pair(r, l);
  }
  return {slopes[j], slopes[j]};
}

void PiecewiseLinear1D::validate() const {
  if (breakpoints.empty() || slopes.size() != breakpoints.size() + 1 || values.size() != breakpoints.size())
    throw std::invalid_argument("PiecewiseLinear1D: inconsistent sizes");
  for (std::size_t i = 1; i < breakpoints.size(); ++i) {
    if (!(breakpoints[i - 1] < breakpoints[i])) throw std::invalid_argument("PiecewiseLinear1D: breakpoints not increasing");
    if (values[i - 1] + slopes[i] * (breakpoints[i] - breakpoints[i - 1]) != values[i])
      throw std::invalid_argument("PiecewiseLinear1D: values inconsistent with slopes");
  }
}

OracleReply reply_1d(const PiecewiseLinear1D& fn, double x, KinkConvention convention, const mpq_class& scale) {
  const mpq_class q(x);
  const std::size_t j = fn.piece_of(q);
  OracleReply reply;
  reply.value = mpq_class(scale * fn.value_at(q)).get_d();
  reply.subgrad = Vector(1);
  ActiveSet as;
  if (j < fn.breakpoints.size() && fn.breakpoints[j] == q) {
    const mpq_class l = scale * fn.slopes[j];
    const mpq_class r = scale * fn.slopes[j + 1];
    reply.subgrad(0) = (convention == KinkConvention::left ? l : r).get_d();
    const double lo = std::min(l, r).get_d();
    const double hi = std::max(l, r).get_d();
    as.interval = std::make_pair(lo, hi);
    as.generators = {Vector::Constant(1, lo), Vector::Constant(1, hi)};
    as.indices = {j, j + 1};
    as.at_kink = {true, true};
  } else {
    const double s = mpq_class(scale * fn.slopes[j]).get_d();
    reply.subgrad(0) = s;
    as.interval = std::make_pair(s, s);
    as.generators = {Vector::Constant(1, s)};
    as.indices = {j};
    as.at_kink = {false};
  }
  reply.active_set = std::move(as);
  return reply;
}

std::vector<Vector> hints_1d(const PiecewiseLinear1D& fn, double x, double delta) {
  // One point inside every piece meeting the window, plus the doubles on
  // either side of every breakpoint inside it.
  if (!(delta > 0)) return {Vector::Constant(1, x)};
  std::vector<double> pts{x};
  const double lo = x - delta;
  const double hi = x + delta;
  const mpq_class qlo(lo), qhi(hi);
  auto first = std::upper_bound(fn.breakpoints.begin(), fn.breakpoints.end(), qlo);
  auto last = std::lower_bound(fn.breakpoints.begin(), fn.breakpoints.end(), qhi);
  double prev = lo;
  for (auto it = first; it != last; ++it) {
    const double b = it->get_d();
    pts.push_back(0.5 * (prev + b));
    pts.push_back(b);
    pts.push_back(std::nextafter(b, -HUGE_VAL));
    pts.push_back(std::nextafter(b, HUGE_VAL));
    prev = b;
  }
  pts.push_back(0.5 * (prev + hi));
  std::vector<Vector> out;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  for (double p : pts)
    if (p > lo && p < hi) out.push_back(Vector::Constant(1, p));
  return out;
}

PiecewiseLinearInstance::PiecewiseLinearInstance(PiecewiseLinear1D fn, KinkConvention convention, InstanceMeta meta,
                                                 Descriptor descriptor)
    : Instance(std::move(meta), std::move(descriptor)), fn_(std::move(fn)), convention_(convention) {
  fn_.validate();
}

OracleReply PiecewiseLinearInstance::eval(const Vector& x) const {
  check_dim(x);
  return reply_1d(fn_, x(0), convention_, mpq_class(1));
}

std::vector<Vector> PiecewiseLinearInstance::structural_hints(const Vector& x, double delta) const {
  return hints_1d(fn_, x(0), delta);
}

std::shared_ptr<PiecewiseLinearInstance> make_abs_instance() {
  PiecewiseLinear1D fn;
  fn.breakpoints = {mpq_class(0)};
  fn.slopes = {mpq_class(-1), mpq_class(1)};
  fn.values = {mpq_class(0)};
  return std::make_shared<PiecewiseLinearInstance>(std::move(fn), KinkConvention::right,
                                                   InstanceMeta{1.0, std::nullopt, 1.0, 1.0, 1, true},
                                                   Descriptor{"abs", {}});
}

// ---------------------------------------------------------------------------

InstancePtr make_instance(const Descriptor& d, std::uint64_t seed, double eps) {
  const auto known = [&](std::initializer_list<const char*> keys) {
    for (const auto& [k, v] : d.params) {
      bool ok = false;
      for (const char* key : keys) ok = ok || k == key;
      if (!ok) throw std::invalid_argument("instance '" + d.name + "' has no parameter '" + k + "'");
    }
  };
  if (d.name == "quadratic") {
    known({"dim", "r"});
    return std::make_shared<QuadraticInstance>(d.integer("dim", 2), d.number("r", 2.0));
  }
  if (d.name == "constant") {
    known({"dim", "value"});
    return std::make_shared<ConstantInstance>(d.integer("dim", 1), d.number("value", 0.0));
  }
  if (d.name == "linear") {
    known({"dim", "slope"});
    return std::make_shared<LinearInstance>(d.integer("dim", 1), d.number("slope", 1.0));
  }
  if (d.name == "abs") {
    known({});
    return make_abs_instance();
  }
  if (d.name == "nemirovski") {
    known({"T", "alpha"});
    const long T = d.integer("T", 16);
    return std::make_shared<NemirovskiInstance>(T, d.number("alpha", 1.0 / (9.0 * static_cast<double>(T))));
  }
  if (d.name == "nemirovski-ext") {
    known({"T", "alpha", "d", "seed"});
    const long T = d.integer("T", 16);
    return std::make_shared<NemirovskiExtendedInstance>(T, d.number("alpha", 1.0 / (9.0 * static_cast<double>(T))),
                                                        d.integer("d", 2 * T),
                                                        static_cast<std::uint64_t>(d.integer("seed", static_cast<long>(seed))));
  }
  if (d.name == "lse-nemirovski") {
    known({"T", "alpha", "tau"});
    const long T = d.integer("T", 16);
    return std::make_shared<LogSumExpNemirovskiInstance>(T, d.number("alpha", 1.0 / (9.0 * static_cast<double>(T))),
                                                         d.number("tau", default_lse_temperature(eps, T)));
  }
  if (d.name == "tree1d") {
    known({"N", "sigma", "rescaled", "seed"});
    const std::string sigma = d.text("sigma", "random");
    SigmaWord word;
    if (sigma == "random") {
      RngStream rng(static_cast<std::uint64_t>(d.integer("seed", static_cast<long>(seed))), 0x7433);
      word = SigmaWord::random(static_cast<std::size_t>(d.integer("N", 6)), rng);
    } else {
      word = SigmaWord::parse(sigma);
      if (d.has("N") && static_cast<std::size_t>(d.integer("N", 0)) != word.size())
        throw std::invalid_argument("tree1d: N does not match the length of sigma");
    }
    return std::make_shared<Tree1dInstance>(std::move(word), d.integer("rescaled", 0) != 0);
  }
  if (d.name == "mahalanobis") {
    known({"eps", "d"});
    const double e = d.number("eps", 0.25);
    return std::make_shared<MahalanobisInstance>(e, d.integer("d", mahalanobis_default_dim(e)));
  }
  throw std::invalid_argument("unknown instance '" + d.name + "'");
}

}  // namespace nsopt
