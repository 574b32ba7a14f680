#include <stdexcept>

#include "nsopt/instances.hpp"

namespace nsopt {

namespace {

mpq_class eight_pow(long e) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 8, static_cast<unsigned long>(e));
  return mpq_class(p);
}

// s_i = 8^{i+1}
mpq_class level_scale(long level) { return eight_pow(level + 1); }

}  // namespace

std::string SigmaWord::str() const {
  std::string out;
  for (int b : bits) out += b ? '1' : '0';
  return out;
}

SigmaWord SigmaWord::parse(std::string_view text) {
  SigmaWord w;
  for (char c : text) {
    if (c != '0' && c != '1') throw std::invalid_argument("sigma must be a string of 0/1 characters");
    w.bits.push_back(c == '1');
  }
  return w;
}

SigmaWord SigmaWord::random(std::size_t n, RngStream& rng) {
  SigmaWord w;
  for (std::size_t i = 0; i < n; ++i) w.bits.push_back(static_cast<int>(rng.index(2)));
  return w;
}

std::pair<mpq_class, mpq_class> tree_segment(long level, int bit) {
  const mpq_class s = level_scale(level);
  const mpq_class half(1, 2);
  if (bit) return {half + 1 / s, half + 2 / s};
  return {half - 2 / s, half - 1 / s};
}

std::pair<mpq_class, mpq_class> tree_piece_slopes(long level, int bit) {
  const mpq_class s = level_scale(level);
  const mpq_class gentle = (s - 2) / (s + 2);
  const mpq_class steep = (s - 2) / (s - 4);
  if (bit) return {-gentle, steep};
  return {-steep, gentle};
}

mpq_class tree_piece(long level, int bit, const mpq_class& u) {
  const mpq_class s = level_scale(level);
  const auto [lo, hi] = tree_segment(level, bit);
  const mpq_class t = bit ? u : mpq_class(1 - u);
  const bool near_side = bit ? (u * 2 < lo + hi) : (u * 2 > lo + hi);
  // h^i_1(t); h^i_0(u) = h^i_1(1 - u).
  if (near_side) return -((s - 2) / (s + 2)) * t + 1;
  return ((s - 2) / (s - 4)) * t - 2 / (s - 4);
}

Tree1dInstance::Tree1dInstance(SigmaWord sigma, bool rescaled)
    : Instance(InstanceMeta{rescaled ? 1.0 : 2.0, std::nullopt, rescaled ? 0.5 : 1.0, 1.0, 1, false},
               Descriptor{"tree1d",
                          {{"N", std::to_string(sigma.size())},
                           {"sigma", sigma.str()},
                           {"rescaled", rescaled ? "1" : "0"}}}),
      sigma_(std::move(sigma)),
      rescaled_(rescaled) {
  // The slope sequence is not monotone, so the family is not convex even
  // though it is unimodal; see the tests for the exact kinks.
  const std::size_t N = sigma_.size();
  if (N < 2 || N > kTreeMaxDepth)
    throw std::invalid_argument("tree1d: N must lie in [2, " + std::to_string(kTreeMaxDepth) + "]");

  phi_.assign(N + 1, AffineQ{});
  Phi_.assign(N + 1, AffineQ{});
  for (std::size_t k = 1; k <= N; ++k) {
    const mpq_class s = level_scale(static_cast<long>(k));
    const mpq_class lo = tree_segment(static_cast<long>(k), sigma_.bits[k - 1]).first;
    phi_[k].scale = phi_[k - 1].scale / s;
    phi_[k].shift = phi_[k - 1](lo);
    Phi_[k].scale = Phi_[k - 1].scale / s;
    Phi_[k].shift = Phi_[k - 1](mpq_class(1, 2));
  }

  std::vector<mpq_class> bp;
  bp.push_back(mpq_class(0));
  for (std::size_t k = 1; k <= N; ++k) bp.push_back(phi_[k].shift);
  for (std::size_t k = N; k >= 1; --k) bp.push_back(phi_[k](mpq_class(1)));
  bp.push_back(mpq_class(1));

  pieces_.breakpoints = bp;
  for (const auto& b : bp) pieces_.values.push_back(value_exact(b));
  pieces_.slopes.push_back(-scale_factor());
  for (std::size_t j = 1; j < bp.size(); ++j)
    pieces_.slopes.push_back((pieces_.values[j] - pieces_.values[j - 1]) / (bp[j] - bp[j - 1]));
  pieces_.slopes.push_back(scale_factor());
  pieces_.validate();
}

mpq_class Tree1dInstance::scale_factor() const { return rescaled_ ? mpq_class(1, 2) : mpq_class(1); }

mpq_class Tree1dInstance::piece_value(long k, const mpq_class& x) const {
  const long N = static_cast<long>(sigma_.size());
  mpq_class raw;
  if (k == -1) {
    raw = 1 - x;
  } else if (k == -2) {
    raw = x;
  } else if (k == N) {
    raw = Phi_[N](mpq_class(1));
  } else if (k >= 0 && k < N) {
    const mpq_class u = phi_[k].inverse(x);
    raw = Phi_[k](tree_piece(k + 1, sigma_.bits[k], u));
  } else {
    throw std::out_of_range("tree1d: piece index out of range");
  }
  return scale_factor() * raw;
}

mpq_class Tree1dInstance::value_exact(const mpq_class& x) const {
  if (x < 0) return piece_value(-1, x);
  if (x > 1) return piece_value(-2, x);
  long k = 0;
  const long N = static_cast<long>(sigma_.size());
  while (k < N) {
    const auto [lo, hi] = interval(static_cast<std::size_t>(k + 1));
    if (!(lo < x && x < hi)) break;
    ++k;
  }
  return piece_value(k, x);
}

std::pair<mpq_class, mpq_class> Tree1dInstance::interval(std::size_t k) const {
  if (k > sigma_.size()) throw std::out_of_range("tree1d: interval depth out of range");
  return {phi_[k](mpq_class(0)), phi_[k](mpq_class(1))};
}

std::pair<double, double> Tree1dInstance::min_interval() const {
  const auto [lo, hi] = interval(sigma_.size());
  return {lo.get_d(), hi.get_d()};
}

mpq_class Tree1dInstance::min_value_exact() const {
  return piece_value(static_cast<long>(sigma_.size()), mpq_class(0));
}

OracleReply Tree1dInstance::eval(const Vector& x) const {
  check_dim(x);
  return reply_1d(pieces_, x(0), KinkConvention::left, mpq_class(1));
}

std::vector<Vector> Tree1dInstance::structural_hints(const Vector& x, double delta) const {
  return hints_1d(pieces_, x(0), delta);
}

}  // namespace nsopt
