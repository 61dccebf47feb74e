#ifndef FINSEC_LOCALSYM_HPP
#define FINSEC_LOCALSYM_HPP

#include "finsec/linemodels.hpp"
#include "finsec/symbolmaps.hpp"

namespace finsec {

/// Fiber point tau in [0, pi] (tau and its conjugate share one fiber).
struct LocalPoint {
  enum class Kind { Interior, PlusOne, MinusOne };
  Kind kind = Kind::Interior;
  double tau = 0.0;

  static LocalPoint from_folded_angle(double tau, double tol = 1e-9);
  std::string label() const;
};

/// Local symbol: interior points carry a 2 x 2 matrix of unit-compressed line
/// operators (no flip inside), the points +-1 a single flip-type operator.
struct LocalSymbol {
  bool interior = false;
  std::array<std::array<LineOp, 2>, 2> entries{
      {{LineOp::zero(), LineOp::zero()}, {LineOp::zero(), LineOp::zero()}}};
  LineOp boundary = LineOp::zero();

  static LocalSymbol interior_of(std::array<std::array<LineOp, 2>, 2> e);
  static LocalSymbol boundary_of(LineOp e);
  static LocalSymbol zero_like(const LocalSymbol& other);

  std::string text() const;
};

/// a(tau+0) (I - S_R)/2 + a(tau-0) (I + S_R)/2, with equal limits collapsed
/// to the constant.
LineOp pc_local_operator(const Mat& limit_plus, const Mat& limit_minus);

/// Jump angles of every symbol in s (and of its flip) folded to [0, pi];
/// +-1 are always present once a flip occurs or a jump sits there.
std::vector<LocalPoint> fiber_points(const SeqExpr& s);

/// Uncompressed whole-line image of a single operator at an interior point.
std::array<std::array<LineOp, 2>, 2> local_symbol_interior(const OpExpr& a, const LocalPoint& p);
/// Uncompressed image at +-1 (flip maps to tau * J^).
LineOp local_symbol_boundary(const OpExpr& a, const LocalPoint& p);

/// Image of a sequence expression: section atoms are compressed entrywise
/// after the operator-level homomorphism, ideal atoms vanish, and products of
/// atoms multiply after compression.
LocalSymbol local_symbol_seq(const SeqExpr& s, const LocalPoint& p);

/// Block matrix of the local symbol on a grid with `cells` total cells
/// (cells even; the symmetric grid on [-1,1] uses cells/2 per unit).
Mat discretize_local(const LocalSymbol& ls, int cells);

enum class InvVerdict { Invertible, Singular, Inconclusive };
std::string inv_verdict_name(InvVerdict v);

struct LocalEvidence {
  LocalPoint point;
  std::string symbol_text;
  std::vector<std::pair<int, double>> sigma;  // (cells, sigma_min)
  InvVerdict verdict = InvVerdict::Inconclusive;
};

LocalEvidence check_local_invertibility(const LocalSymbol& ls, const std::vector<int>& grids,
                                        double floor_value, int trend_window = 3);

}  // namespace finsec

#endif
