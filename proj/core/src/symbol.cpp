#include "finsec/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace finsec {

namespace {

constexpr double kAngleSnap = 1e-12;

Mat mode_value(const std::map<int, Mat>& modes, double theta, int d) {
  Mat v = zeros(d);
  for (const auto& [k, m] : modes) v += m * std::exp(cplx(0.0, k * theta));
  return v;
}

bool modes_close(const std::map<int, Mat>& a, const std::map<int, Mat>& b, int d, double tol) {
  auto norm_of = [&](const std::map<int, Mat>& mm, int k) -> Mat {
    auto it = mm.find(k);
    return it == mm.end() ? zeros(d) : it->second;
  };
  for (const auto& [k, m] : a) {
    (void)m;
    if (!mats_close(norm_of(a, k), norm_of(b, k), tol)) return false;
  }
  for (const auto& [k, m] : b) {
    (void)m;
    if (!mats_close(norm_of(a, k), norm_of(b, k), tol)) return false;
  }
  return true;
}

void drop_zero_modes(std::map<int, Mat>& modes) {
  for (auto it = modes.begin(); it != modes.end();) {
    if (it->second.cwiseAbs().maxCoeff() == 0.0)
      it = modes.erase(it);
    else
      ++it;
  }
}

/// integral of e^{i m x} over [x1, x2]
cplx mode_integral(int m, double x1, double x2) {
  if (m == 0) return cplx(x2 - x1, 0.0);
  const cplx im(0.0, static_cast<double>(m));
  return (std::exp(im * x2) - std::exp(im * x1)) / im;
}

}  // namespace

Mat ArcPiece::value_at(double theta, int d) const { return mode_value(modes, theta, d); }

PCSymbol::PCSymbol(int d, std::vector<ArcPiece> pieces) : d_(d), pieces_(std::move(pieces)) {
  normalize();
  validate();
}

PCSymbol PCSymbol::zero(int d) {
  ArcPiece p;
  p.alpha = 0.0;
  p.beta = two_pi;
  return PCSymbol(d, {p});
}

PCSymbol PCSymbol::constant(const Mat& c) {
  if (c.rows() != c.cols() || c.rows() == 0) throw validation_error("constant: square matrix required");
  ArcPiece p;
  p.alpha = 0.0;
  p.beta = two_pi;
  p.modes[0] = c;
  return PCSymbol(static_cast<int>(c.rows()), {p});
}

PCSymbol PCSymbol::mode(int k, const Mat& c) {
  if (c.rows() != c.cols() || c.rows() == 0) throw validation_error("mode: square matrix required");
  ArcPiece p;
  p.alpha = 0.0;
  p.beta = two_pi;
  p.modes[k] = c;
  return PCSymbol(static_cast<int>(c.rows()), {p});
}

PCSymbol PCSymbol::indicator(double alpha, double beta, int d) {
  if (!(beta > alpha) || beta - alpha > two_pi + kAngleSnap)
    throw validation_error("indicator: need alpha < beta <= alpha + 2*pi");
  alpha = wrap_angle(alpha);
  double len = beta - alpha;
  beta = alpha + len;

  std::vector<ArcPiece> pieces;
  auto push = [&](double a, double b, bool on) {
    if (b - a <= kAngleSnap) return;
    ArcPiece p;
    p.alpha = a;
    p.beta = b;
    if (on) p.modes[0] = eye(d);
    pieces.push_back(p);
  };
  if (beta <= two_pi + kAngleSnap) {
    beta = std::min(beta, two_pi);
    push(0.0, alpha, false);
    push(alpha, beta, true);
    push(beta, two_pi, false);
  } else {
    // arc through angle 0
    double tail = beta - two_pi;
    push(0.0, tail, true);
    push(tail, alpha, false);
    push(alpha, two_pi, true);
  }
  return PCSymbol(d, std::move(pieces));
}

PCSymbol PCSymbol::from_pieces(int d, std::vector<ArcPiece> pieces) { return PCSymbol(d, std::move(pieces)); }

void PCSymbol::normalize() {
  for (auto& p : pieces_) drop_zero_modes(p.modes);
  std::sort(pieces_.begin(), pieces_.end(),
            [](const ArcPiece& a, const ArcPiece& b) { return a.alpha < b.alpha; });
  // snap adjacent boundaries
  for (size_t i = 0; i + 1 < pieces_.size(); ++i) {
    if (std::abs(pieces_[i].beta - pieces_[i + 1].alpha) <= kAngleSnap)
      pieces_[i].beta = pieces_[i + 1].alpha;
  }
  if (!pieces_.empty()) {
    if (std::abs(pieces_.front().alpha) <= kAngleSnap) pieces_.front().alpha = 0.0;
    if (std::abs(pieces_.back().beta - two_pi) <= kAngleSnap) pieces_.back().beta = two_pi;
  }
  // merge adjacent pieces with matching polynomials
  std::vector<ArcPiece> merged;
  for (auto& p : pieces_) {
    if (!merged.empty() && merged.back().beta == p.alpha &&
        modes_close(merged.back().modes, p.modes, d_, kMergeTol)) {
      merged.back().beta = p.beta;
    } else {
      merged.push_back(std::move(p));
    }
  }
  pieces_ = std::move(merged);
}

void PCSymbol::validate() const {
  if (d_ <= 0) throw validation_error("PCSymbol: block dimension must be positive");
  if (pieces_.empty()) throw validation_error("PCSymbol: empty partition");
  if (pieces_.front().alpha != 0.0)
    throw validation_error("PCSymbol: partition must start at angle 0");
  for (size_t i = 0; i < pieces_.size(); ++i) {
    const auto& p = pieces_[i];
    if (!(p.beta > p.alpha)) throw validation_error("PCSymbol: empty arc");
    if (i + 1 < pieces_.size() && pieces_[i + 1].alpha != p.beta)
      throw validation_error("PCSymbol: gap or overlap in partition");
    for (const auto& [k, m] : p.modes) {
      (void)k;
      if (m.rows() != d_ || m.cols() != d_) throw validation_error("PCSymbol: mode dimension mismatch");
      if (!all_finite(m)) throw validation_error("PCSymbol: non-finite mode entry");
    }
  }
  if (pieces_.back().beta != two_pi)
    throw validation_error("PCSymbol: partition must end at angle 2*pi");
}

int PCSymbol::piece_after(double tau) const {
  tau = wrap_angle(tau);
  // piece whose (alpha, beta] lies counterclockwise of tau: alpha == tau, or alpha < tau < beta
  for (size_t i = 0; i < pieces_.size(); ++i) {
    if (std::abs(pieces_[i].alpha - tau) <= kAngleSnap) return static_cast<int>(i);
  }
  for (size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].alpha < tau && tau < pieces_[i].beta) return static_cast<int>(i);
  }
  return 0;  // tau == 0 handled by the first loop; unreachable otherwise
}

int PCSymbol::piece_before(double tau) const {
  tau = wrap_angle(tau);
  if (tau <= kAngleSnap) return static_cast<int>(pieces_.size()) - 1;  // approach 0 from below = last piece
  for (size_t i = 0; i < pieces_.size(); ++i) {
    if (std::abs(pieces_[i].beta - tau) <= kAngleSnap) return static_cast<int>(i);
  }
  for (size_t i = 0; i < pieces_.size(); ++i) {
    if (pieces_[i].alpha < tau && tau < pieces_[i].beta) return static_cast<int>(i);
  }
  return static_cast<int>(pieces_.size()) - 1;
}

Mat PCSymbol::eval(double theta) const {
  theta = wrap_angle(theta);
  if (has_jump_at(theta))
    throw validation_error("eval: ambiguous point; use one_sided_limits");
  return pieces_[piece_after(theta)].value_at(theta, d_);
}

std::pair<Mat, Mat> PCSymbol::one_sided_limits(double tau) const {
  tau = wrap_angle(tau);
  Mat plus = pieces_[piece_after(tau)].value_at(tau, d_);
  Mat minus = pieces_[piece_before(tau)].value_at(tau, d_);
  return {plus, minus};
}

std::vector<double> PCSymbol::jump_angles() const {
  std::vector<double> jumps;
  for (const auto& p : pieces_) {
    double tau = wrap_angle(p.alpha);
    auto [plus, minus] = one_sided_limits(tau);
    if (fro_norm(plus - minus) > kJumpTol) jumps.push_back(tau);
  }
  std::sort(jumps.begin(), jumps.end());
  return jumps;
}

bool PCSymbol::has_jump_at(double tau) const {
  auto [plus, minus] = one_sided_limits(tau);
  return fro_norm(plus - minus) > kJumpTol;
}

Mat PCSymbol::fourier_coeff(int k) const {
  Mat c = zeros(d_);
  for (const auto& p : pieces_) {
    for (const auto& [m, coeff] : p.modes) {
      c += coeff * (mode_integral(m - k, p.alpha, p.beta) / two_pi);
    }
  }
  return c;
}

PCSymbol PCSymbol::adjoint() const {
  std::vector<ArcPiece> pieces;
  pieces.reserve(pieces_.size());
  for (const auto& p : pieces_) {
    ArcPiece q;
    q.alpha = p.alpha;
    q.beta = p.beta;
    for (const auto& [k, m] : p.modes) q.modes[-k] = m.adjoint();
    pieces.push_back(std::move(q));
  }
  return PCSymbol(d_, std::move(pieces));
}

PCSymbol PCSymbol::flipped() const {
  std::vector<ArcPiece> pieces;
  pieces.reserve(pieces_.size());
  for (const auto& p : pieces_) {
    ArcPiece q;
    q.alpha = (p.beta >= two_pi) ? 0.0 : two_pi - p.beta;
    q.beta = (p.alpha <= 0.0) ? two_pi : two_pi - p.alpha;
    for (const auto& [k, m] : p.modes) q.modes[-k] = m;
    pieces.push_back(std::move(q));
  }
  return PCSymbol(d_, std::move(pieces));
}

PCSymbol PCSymbol::scaled(cplx lambda) const {
  std::vector<ArcPiece> pieces = pieces_;
  for (auto& p : pieces)
    for (auto& [k, m] : p.modes) {
      (void)k;
      m *= lambda;
    }
  return PCSymbol(d_, std::move(pieces));
}

PCSymbol PCSymbol::rotated(double tau_angle) const {
  // a(t / tau): the piece over (alpha, beta] moves to (alpha + tau, beta + tau],
  // and each mode k picks up the phase e^{-i k tau}.
  std::vector<ArcPiece> pieces;
  for (const auto& p : pieces_) {
    double a = p.alpha + tau_angle;
    double b = p.beta + tau_angle;
    std::map<int, Mat> modes;
    for (const auto& [k, m] : p.modes) modes[k] = m * std::exp(cplx(0.0, -k * tau_angle));
    // split at multiples of 2*pi so every stored arc stays inside [0, 2*pi]
    double shift = std::floor(a / two_pi) * two_pi;
    a -= shift;
    b -= shift;
    if (std::abs(a) <= kAngleSnap) a = 0.0;
    if (b <= two_pi + kAngleSnap) {
      ArcPiece q;
      q.alpha = a;
      q.beta = std::min(b, two_pi);
      q.modes = modes;
      pieces.push_back(std::move(q));
    } else {
      ArcPiece q1;
      q1.alpha = a;
      q1.beta = two_pi;
      q1.modes = modes;
      pieces.push_back(std::move(q1));
      ArcPiece q2;
      q2.alpha = 0.0;
      q2.beta = b - two_pi;
      q2.modes = modes;
      pieces.push_back(std::move(q2));
    }
  }
  return PCSymbol(d_, std::move(pieces));
}

Mat PCSymbol::fejer_mean(int n, double theta) const {
  if (n < 0) throw validation_error("fejer_mean: n must be >= 0");
  Mat v = zeros(d_);
  for (int k = -n; k <= n; ++k) {
    double w = 1.0 - std::abs(k) / static_cast<double>(n + 1);
    v += w * fourier_coeff(k) * std::exp(cplx(0.0, k * theta));
  }
  return v;
}

Mat PCSymbol::moving_average(double lambda, double theta) const {
  if (lambda < 1.0) throw validation_error("moving_average: lambda >= 1 required");
  const double lo = theta - pi / lambda;
  const double hi = theta + pi / lambda;
  Mat acc = zeros(d_);
  // unroll the circle over three periods so any window position is covered
  for (int s = -1; s <= 1; ++s) {
    double off = s * two_pi;
    for (const auto& p : pieces_) {
      double a = std::max(p.alpha + off, lo);
      double b = std::min(p.beta + off, hi);
      if (b <= a) continue;
      for (const auto& [k, m] : p.modes)
        acc += m * (mode_integral(k, a - off, b - off) * std::exp(cplx(0.0, k * off)));
    }
  }
  return acc * (lambda / two_pi);
}

Mat PCSymbol::poisson_mean(double r, double theta) const {
  if (r < 0.0 || r >= 1.0) throw validation_error("poisson_mean: 0 <= r < 1 required");
  Mat v = fourier_coeff(0);
  if (r == 0.0) return v;
  const double bound = std::max(sup_bound(), 1.0);
  int kmax = 1;
  while (std::pow(r, kmax) * bound / (1.0 - r) > 1e-15 && kmax < 2000000) ++kmax;
  for (int k = 1; k <= kmax; ++k) {
    double w = std::pow(r, k);
    v += w * fourier_coeff(k) * std::exp(cplx(0.0, k * theta));
    v += w * fourier_coeff(-k) * std::exp(cplx(0.0, -k * theta));
  }
  return v;
}

double PCSymbol::sup_bound() const {
  double b = 0.0;
  for (const auto& p : pieces_) {
    double s = 0.0;
    for (const auto& [k, m] : p.modes) {
      (void)k;
      s += m.operatorNorm();
    }
    b = std::max(b, s);
  }
  return b;
}

namespace {

std::vector<double> refined_boundaries(const PCSymbol& a, const PCSymbol& b) {
  std::vector<double> cuts;
  for (const auto& p : a.pieces()) cuts.push_back(p.alpha);
  for (const auto& p : b.pieces()) cuts.push_back(p.alpha);
  cuts.push_back(two_pi);
  std::sort(cuts.begin(), cuts.end());
  std::vector<double> out;
  for (double c : cuts) {
    if (out.empty() || c - out.back() > kAngleSnap) out.push_back(c);
  }
  if (std::abs(out.back() - two_pi) > kAngleSnap) out.push_back(two_pi);
  out.back() = two_pi;
  out.front() = 0.0;
  return out;
}

const ArcPiece& piece_containing(const PCSymbol& s, double mid) {
  for (const auto& p : s.pieces())
    if (p.alpha <= mid && mid <= p.beta) return p;
  return s.pieces().back();
}

}  // namespace

PCSymbol add(const PCSymbol& a, const PCSymbol& b) {
  if (a.dim() != b.dim()) throw validation_error("add: block dimension mismatch");
  auto cuts = refined_boundaries(a, b);
  std::vector<ArcPiece> pieces;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    ArcPiece q;
    q.alpha = cuts[i];
    q.beta = cuts[i + 1];
    q.modes = piece_containing(a, mid).modes;
    for (const auto& [k, m] : piece_containing(b, mid).modes) {
      auto it = q.modes.find(k);
      if (it == q.modes.end())
        q.modes[k] = m;
      else
        it->second += m;
    }
    pieces.push_back(std::move(q));
  }
  return PCSymbol::from_pieces(a.dim(), std::move(pieces));
}

PCSymbol mul(const PCSymbol& a, const PCSymbol& b) {
  if (a.dim() != b.dim()) throw validation_error("mul: block dimension mismatch");
  auto cuts = refined_boundaries(a, b);
  std::vector<ArcPiece> pieces;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    ArcPiece q;
    q.alpha = cuts[i];
    q.beta = cuts[i + 1];
    const auto& pa = piece_containing(a, mid).modes;
    const auto& pb = piece_containing(b, mid).modes;
    for (const auto& [k1, m1] : pa)
      for (const auto& [k2, m2] : pb) {
        Mat prod = m1 * m2;
        auto it = q.modes.find(k1 + k2);
        if (it == q.modes.end())
          q.modes[k1 + k2] = prod;
        else
          it->second += prod;
      }
    pieces.push_back(std::move(q));
  }
  return PCSymbol::from_pieces(a.dim(), std::move(pieces));
}

bool approx_equal(const PCSymbol& a, const PCSymbol& b, double tol) {
  if (a.dim() != b.dim()) return false;
  auto cuts = refined_boundaries(a, b);
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    if (!modes_close(piece_containing(a, mid).modes, piece_containing(b, mid).modes, a.dim(), tol))
      return false;
  }
  return true;
}

}  // namespace finsec
