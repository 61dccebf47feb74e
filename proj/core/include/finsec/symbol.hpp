#ifndef FINSEC_SYMBOL_HPP
#define FINSEC_SYMBOL_HPP

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "finsec/util.hpp"

namespace finsec {

/// One arc (alpha, beta] of the circle carrying a matrix-valued trigonometric
/// polynomial sum_k modes[k] * e^{i k theta}.  0 <= alpha < beta <= 2*pi.
struct ArcPiece {
  double alpha = 0.0;
  double beta = two_pi;
  std::map<int, Mat> modes;

  Mat value_at(double theta, int d) const;
};

/// Matrix-valued piecewise continuous symbol on the unit circle, restricted to
/// piecewise trigonometric polynomials.  Pieces partition [0, 2*pi); Fourier
/// coefficients, products, adjoints and the flip a(t) -> a(1/t) are exact.
///
/// One-sided limits follow p(tau +- 0) = lim_{x->+-0} p(tau e^{ix}), i.e. the
/// plus limit approaches counterclockwise.
class PCSymbol {
 public:
  static constexpr double kJumpTol = 1e-12;
  static constexpr double kMergeTol = 1e-14;

  PCSymbol() : PCSymbol(zero(1)) {}

  static PCSymbol zero(int d);
  static PCSymbol constant(const Mat& c);
  static PCSymbol constant(cplx c) { return constant(c * eye(1)); }
  static PCSymbol mode(int k, const Mat& c);
  static PCSymbol mode(int k, cplx c) { return mode(k, c * eye(1)); }
  /// Indicator of the arc (alpha, beta) times the identity; beta may exceed
  /// 2*pi to describe arcs through angle 0.
  static PCSymbol indicator(double alpha, double beta, int d = 1);
  /// chi_+ of the upper semicircle.
  static PCSymbol chi_plus(int d = 1) { return indicator(0.0, pi, d); }
  static PCSymbol chi_minus(int d = 1) { return indicator(pi, two_pi, d); }
  /// Builds a symbol from explicit pieces; they must partition [0, 2*pi).
  static PCSymbol from_pieces(int d, std::vector<ArcPiece> pieces);

  int dim() const { return d_; }
  const std::vector<ArcPiece>& pieces() const { return pieces_; }

  /// Pointwise value; throws validation_error at a jump angle
  /// ("ambiguous point; use one_sided_limits").
  Mat eval(double theta) const;

  /// {plus, minus} one-sided limits at tau.
  std::pair<Mat, Mat> one_sided_limits(double tau) const;

  /// Exact k-th Fourier coefficient.
  Mat fourier_coeff(int k) const;

  /// Angles where the one-sided limits disagree (Frobenius norm > kJumpTol).
  std::vector<double> jump_angles() const;
  bool has_jump_at(double tau) const;

  PCSymbol adjoint() const;
  PCSymbol flipped() const;
  PCSymbol scaled(cplx lambda) const;

  /// Fejer-Cesaro mean sum_{|k|<=n} (1 - |k|/(n+1)) a_k e^{ik theta}.
  Mat fejer_mean(int n, double theta) const;

  /// Moving average over (theta - pi/lambda, theta + pi/lambda); exact per-arc
  /// integration.  Requires lambda >= 1.
  Mat moving_average(double lambda, double theta) const;

  /// Poisson mean sum_k r^{|k|} a_k e^{ik theta}, 0 <= r < 1; the tail is
  /// truncated once the geometric envelope drops below 1e-15.
  Mat poisson_mean(double r, double theta) const;

  /// Rotated symbol a(t / tau) for |tau| = 1 given by its angle; used by the
  /// Y_tau reduction to the point 1.
  PCSymbol rotated(double tau_angle) const;

  /// Crude sup-norm bound: max over pieces of the mode-norm sum.
  double sup_bound() const;

  friend PCSymbol add(const PCSymbol& a, const PCSymbol& b);
  friend PCSymbol mul(const PCSymbol& a, const PCSymbol& b);

  /// Piece-level comparison after normalization.
  friend bool approx_equal(const PCSymbol& a, const PCSymbol& b, double tol);

 private:
  PCSymbol(int d, std::vector<ArcPiece> pieces);
  void normalize();
  void validate() const;
  /// Piece index owning the plus (counterclockwise) side of tau.
  int piece_after(double tau) const;
  /// Piece index owning the minus side of tau.
  int piece_before(double tau) const;

  int d_ = 1;
  std::vector<ArcPiece> pieces_;
};

PCSymbol add(const PCSymbol& a, const PCSymbol& b);
PCSymbol mul(const PCSymbol& a, const PCSymbol& b);
bool approx_equal(const PCSymbol& a, const PCSymbol& b, double tol = 1e-12);

}  // namespace finsec

#endif
