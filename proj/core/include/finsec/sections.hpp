#ifndef FINSEC_SECTIONS_HPP
#define FINSEC_SECTIONS_HPP

#include <functional>
#include <string>
#include <vector>

#include "finsec/opexpr.hpp"

namespace finsec {

/// Dense complex matrix indexed by Z_n = {-n, ..., n-1} with d x d blocks;
/// block (i, j) sits at rows/cols (i + n) * d.
struct SectionMatrix {
  int n = 0;
  int d = 1;
  Mat data;

  static SectionMatrix zero(int n, int d);
  static SectionMatrix identity(int n, int d);

  Eigen::Block<Mat> block(int i, int j);
  Eigen::Block<const Mat> block(int i, int j) const;
};

SectionMatrix sec_add(const SectionMatrix& a, const SectionMatrix& b);
SectionMatrix sec_mul(const SectionMatrix& a, const SectionMatrix& b);
SectionMatrix sec_scale(cplx lambda, const SectionMatrix& a);
SectionMatrix sec_adjoint(const SectionMatrix& a);

enum class StructuredKind { Pn, Wn, U, V, Ytau, J, P, Q };
StructuredKind structured_kind_from_name(const std::string& name);

/// Exact matrix of the compression P_n Op P_n for the named operator.
/// `shift` is the k of U_k / V_k (|k| may be any size; entries leaving the
/// window are cut), `tau` the unimodular parameter of Y_tau.
SectionMatrix structured_op(StructuredKind kind, int n, int d = 1, int shift = 0,
                            cplx tau = cplx(1.0, 0.0));

/// Exact section of L(a)P + L(b)Q + L(c)JP + L(d)JQ + k; block (j, l) is
/// a_{j-l}[l>=0] + b_{j-l}[l<0] + c_{j+l+1}[l>=0] + d_{j+l+1}[l<0] + k_{jl}.
SectionMatrix assemble_canonical(const PCSymbol& a, const PCSymbol& b, const PCSymbol& c,
                                 const PCSymbol& d, const FiniteRankOp& k, int n);

/// Composes the compressions of the normal-form factors on the enlarged
/// window Z_{n+margin} and cuts back to Z_n.  Exact for canonical shapes with
/// banded symbols; otherwise the error decays as the margin grows.
SectionMatrix assemble_windowed(const OpExpr& e, int n, int margin);

/// Default margin used when none is given (margin = factor * n).
inline constexpr int kDefaultMarginFactor = 4;

/// Section of the operator, canonical entries when the expression has a
/// canonical form, windowed composition otherwise.
SectionMatrix assemble(const OpExpr& e, int n, int margin = -1);

struct SweepRow {
  int n;
  double sigma_min;
  double cond;  // +inf when sigma_min is 0
};

struct SweepResult {
  std::vector<SweepRow> rows;
};

/// Smallest singular value and condition number per window, via full SVD.
/// sigma_min below 1e-12 * sigma_max is reported as 0.
SweepResult sv_sweep(const std::function<SectionMatrix(int)>& builder, const std::vector<int>& ns);

std::pair<double, double> sigma_extents(const Mat& m);

enum class Verdict { Stable, Unstable, Inconclusive };
std::string verdict_name(Verdict v);

/// Trend classification: stable when sigma_min stays >= floor over the last
/// trend_window rows; unstable when it hits 0 or decays monotonically below
/// the floor; inconclusive otherwise.
Verdict verdict_numeric(const SweepResult& sweep, double floor_value, int trend_window);

}  // namespace finsec

#endif
