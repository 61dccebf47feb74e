#ifndef FINSEC_LINEMODELS_HPP
#define FINSEC_LINEMODELS_HPP

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "finsec/util.hpp"

namespace finsec {

/// Sign conventions: the whole-line singular integral operator is
/// (S_R f)(x) = (1/(pi i)) int f(y)/(y - x) dy, so that its compression to the
/// half line is S and the doubling table reads Phi(S_R) = [[S, -N], [N, -S]].
/// On the half line, (S f)(x) = (1/(pi i)) int_0^inf f(y)/(y - x) dy and
/// (N f)(x) = (1/(pi i)) int_0^inf f(y)/(y + x) dy.
class LineOp {
 public:
  enum class Kind {
    IdentL,
    ChiPos,     // multiplication by chi_{[0,inf)}
    SingR,      // S_R on the whole line
    FlipL,      // (J^ f)(x) = f(-x)
    ConstL,     // constant L(H) factor
    CompressUnit,  // chi_{[-1,1]} e chi_{[-1,1]}
    SingHalf,   // S on R+
    HankelHalf, // N on R+
    MellinConv, // M^0(b) via its cell discretization G(b)
    Sum,
    Prod,
    Scale,
    Adjoint
  };

  using MellinHandle = std::function<cplx(double)>;

  static LineOp ident();
  static LineOp chi_pos();
  /// chi_{(-inf, 0]} = I - chi_{[0,inf)}.
  static LineOp chi_neg();
  static LineOp sing_r();
  static LineOp flip_l();
  static LineOp constant(const Mat& a);
  static LineOp constant(cplx a) { return constant(a * eye(1)); }
  static LineOp compress_unit(LineOp e);
  static LineOp sing_half();
  static LineOp hankel_half();
  static LineOp mellin_conv(MellinHandle b);
  static LineOp sum(std::vector<LineOp> terms);
  static LineOp prod(std::vector<LineOp> factors);
  static LineOp scale(cplx lambda, LineOp e);
  static LineOp adjoint_of(LineOp e);
  static LineOp zero() { return scale(0.0, ident()); }

  Kind kind() const { return node_->kind; }
  const Mat& const_value() const { return node_->value; }
  cplx scale_factor() const { return node_->lambda; }
  const std::vector<LineOp>& children() const { return node_->kids; }
  const MellinHandle& mellin_handle() const { return node_->handle; }

  int dim() const;
  bool whole_line() const;  // false when a half-line atom occurs

 private:
  struct Node {
    Kind kind;
    Mat value;
    cplx lambda{1.0, 0.0};
    std::vector<LineOp> kids;
    MellinHandle handle;
  };
  explicit LineOp(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static LineOp make(Node n) { return LineOp(std::make_shared<const Node>(std::move(n))); }
  std::shared_ptr<const Node> node_;
};

/// Deterministic prefix rendering; scalars printed with 17 digits.
std::string print_line_op(const LineOp& op);

/// Light canonicalization: flattens sums/products, folds scalar factors and
/// identity/zero constants.  print(canonical(a)) == print(canonical(b)) is
/// the structural-equality test used on the symbol tables.
LineOp canonical_line_op(const LineOp& op);
bool struct_equal(const LineOp& a, const LineOp& b);

/// Cell grid of the discretizers: unit_interval_symmetric covers [-1,1] with
/// cells [i/n, (i+1)/n], i in Z_n; half_line_window covers [0, m/n] with m
/// cells (m defaults to 8n).
struct GridSpec {
  enum class Support { UnitIntervalSymmetric, HalfLineWindow };
  Support support = Support::UnitIntervalSymmetric;
  int n = 1;
  int m = 0;  // cells of the half-line window; 0 = 8n

  static GridSpec unit_symmetric(int n) { return {Support::UnitIntervalSymmetric, n, 0}; }
  static GridSpec half_line(int m, int n = 1) { return {Support::HalfLineWindow, n, m}; }

  int cell_count() const;
  /// cell index -> [a, b] endpoints
  std::pair<double, double> cell(int idx) const;
};

/// E_{-n} op E_n on the grid cells.  Analytic entries for the multiplier-type
/// atoms, closed-form double-cell Cauchy integrals for S_R, S and N, Mellin
/// quadrature for M^0(b).  Products discretize as matrix products (exact for
/// multiplier factors, the sequence-algebra product at the matrix level).
Mat discretize(const LineOp& op, const GridSpec& grid);

/// kron(scalar_part, I_d): lifts a scalar cell matrix to d x d blocks.
Mat expand_blocks(const Mat& scalar_part, int d);

/// Closed-form integral of 1/(y - x) over [a1,a2] x [b1,b2] (x in the first
/// factor).  Principal value on touching cells; vanishes on the diagonal.
double cauchy_cell_integral(double a1, double a2, double b1, double b2);
/// Same for the kernel 1/(y + x) (half-line Hankel).
double hankel_cell_integral(double a1, double a2, double b1, double b2);

/// Doubling homomorphism: whole-line operators to 2 x 2 half-line tables,
/// Phi(chi_+) = [[I,0],[0,0]], Phi(S_R) = [[S,-N],[N,-S]], Phi(J^) = [[0,I],[I,0]].
std::array<std::array<LineOp, 2>, 2> phi_omega(const LineOp& op);

/// Permutation realizing omega f = (f(x), f(-x)) on the symmetric grid: row
/// block 1 lists cells 0..n-1, block 2 their reflections.
Eigen::MatrixXd doubling_permutation(int n, int d = 1);

/// Function sampled on a geometric (log-equispaced) grid.
struct LogGridFn {
  double t_min = -40.0;  // log x bounds
  double t_max = 0.0;
  std::vector<cplx> values;  // samples at t_min + i*h including both ends
};

/// Mellin transform int_0^inf x^{-iz-1/2} f(x) dx by Simpson quadrature on
/// the log grid.
cplx mellin_transform(const LogGridFn& f, double z);
/// Convenience: samples the handle on [x_lo, x_hi] first.
cplx mellin_transform(const std::function<cplx(double)>& f, double x_lo, double x_hi, double z,
                      int nodes = 8193);

struct MellinQuadrature {
  double z_max = 40.0;
  int nodes = 4096;
};

/// Matrix of G(b) = E_{-1} M^0(b) E_1 on the first n cells of Z+.  The
/// constant part of b is split off exactly (G(c) = c I), the remainder is
/// integrated by the trapezoid rule on [-z_max, z_max].
Mat mellin_conv_matrix(const LineOp::MellinHandle& b, int n,
                       const MellinQuadrature& quad = {});

}  // namespace finsec

#endif
