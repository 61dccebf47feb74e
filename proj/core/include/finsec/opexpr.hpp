#ifndef FINSEC_OPEXPR_HPP
#define FINSEC_OPEXPR_HPP

#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "finsec/symbol.hpp"

namespace finsec {

/// Finitely supported operator matrix: entries (i, j) -> d x d block, i, j in Z.
/// Models the compact-perturbation atoms; closed under products with the
/// generators P, Q, J and with Laurent operators of pure trig polynomials.
struct FiniteRankOp {
  int d = 1;
  std::map<std::pair<int, int>, Mat> entries;

  static FiniteRankOp zero(int d = 1) { return FiniteRankOp{d, {}}; }
  static FiniteRankOp single(int i, int j, const Mat& block);

  bool is_zero() const { return entries.empty(); }
  void add_block(int i, int j, const Mat& block);
  FiniteRankOp adjoint() const;
  FiniteRankOp scaled(cplx lambda) const;

  friend FiniteRankOp add(const FiniteRankOp& a, const FiniteRankOp& b);
  friend FiniteRankOp mul(const FiniteRankOp& a, const FiniteRankOp& b);
};

FiniteRankOp add(const FiniteRankOp& a, const FiniteRankOp& b);
FiniteRankOp mul(const FiniteRankOp& a, const FiniteRankOp& b);
bool approx_equal(const FiniteRankOp& a, const FiniteRankOp& b, double tol = 1e-12);

/// Expression over the generators I, P, Q, J, L(a) and finite-rank atoms,
/// closed under sum, product, scalar multiple and adjoint.  Values are
/// immutable trees; every operation returns a fresh expression.
///
/// P, Q, J, I are block-dimension neutral; Laurent and finite-rank leaves fix
/// the dimension, and mixing two different concrete dimensions is an error.
class OpExpr {
 public:
  enum class Kind { Ident, Proj, CoProj, Flip, Laurent, Rank, Sum, Prod, Scale, Adjoint };

  static OpExpr ident();
  static OpExpr proj();
  static OpExpr coproj();
  static OpExpr flip();
  static OpExpr laurent(PCSymbol sym);
  static OpExpr finite_rank(FiniteRankOp k);
  static OpExpr sum(std::vector<OpExpr> terms);
  static OpExpr prod(std::vector<OpExpr> factors);
  static OpExpr scale(cplx lambda, OpExpr e);
  static OpExpr adjoint_of(OpExpr e);

  Kind kind() const { return node_->kind; }
  const PCSymbol& symbol() const { return node_->sym; }
  const FiniteRankOp& rank_op() const { return node_->fr; }
  cplx scale_factor() const { return node_->lambda; }
  const std::vector<OpExpr>& children() const { return node_->kids; }

  /// Concrete block dimension fixed by some leaf; 0 when fully neutral.
  int dim() const;

 private:
  struct Node {
    Kind kind;
    PCSymbol sym;
    FiniteRankOp fr;
    cplx lambda{1.0, 0.0};
    std::vector<OpExpr> kids;
  };
  explicit OpExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static OpExpr make(Node n) { return OpExpr(std::make_shared<const Node>(std::move(n))); }
  std::shared_ptr<const Node> node_;
};

/// Adjoint pushed to the leaves: P -> P, J -> J, L(a) -> L(a*), products reversed.
OpExpr adjoint(const OpExpr& e);

/// Flattened sum of reduced words.  Letter alphabet of a reduced word:
/// optional leading Laurent, then alternating projector/Laurent letters, with
/// at most one trailing J; a finite-rank leaf absorbs every neighbour it can.
struct NfLetter {
  enum class Kind { P, Q, J, L, R };
  Kind kind;
  PCSymbol sym;    // for L
  FiniteRankOp fr; // for R
};

struct NfMonomial {
  cplx coeff{1.0, 0.0};
  std::vector<NfLetter> word;  // empty word = identity
};

struct NormalForm {
  int d = 0;  // 0 = neutral
  std::vector<NfMonomial> monomials;

  bool is_zero() const { return monomials.empty(); }
};

/// Deterministic normal form; rule order is merge Laurents, push J right,
/// collapse projector words.  The result acts identically on every vector.
NormalForm normal_form(const OpExpr& e);

/// normal_form rebuilt as an expression tree.
OpExpr normalize(const OpExpr& e);

OpExpr to_expr(const NormalForm& nf);

bool approx_equal(const NormalForm& a, const NormalForm& b, double tol = 1e-10);
bool equivalent(const OpExpr& a, const OpExpr& b, double tol = 1e-10);

/// Decomposition L(a)P + L(b)Q + L(c)JP + L(d)JQ + k when the normal form
/// matches that shape; absent otherwise (e.g. genuine Toeplitz compressions).
struct CanonicalForm {
  PCSymbol a, b, c, d;
  FiniteRankOp k;
};
std::optional<CanonicalForm> canonical_form(const OpExpr& e);

/// Reassembles a CanonicalForm into the expression it denotes.
OpExpr from_canonical(const CanonicalForm& cf);

}  // namespace finsec

#endif
