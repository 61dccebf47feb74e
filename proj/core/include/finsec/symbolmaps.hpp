#ifndef FINSEC_SYMBOLMAPS_HPP
#define FINSEC_SYMBOLMAPS_HPP

#include <array>
#include <memory>

#include "finsec/sections.hpp"

namespace finsec {

/// Sequence expression: atoms are whole section sequences (P_n A P_n) and
/// ideal atoms (P_n K P_n + W_n L W_n); closed under sum, product, scalar
/// multiple and adjoint.  This is the object whose stability is analyzed.
class SeqExpr {
 public:
  enum class Kind { Section, JIdeal, Sum, Prod, Scale, Adjoint };

  static SeqExpr section(OpExpr op);
  static SeqExpr j_ideal(FiniteRankOp k, FiniteRankOp l);
  static SeqExpr sum(std::vector<SeqExpr> terms);
  static SeqExpr prod(std::vector<SeqExpr> factors);
  static SeqExpr scale(cplx lambda, SeqExpr s);
  static SeqExpr adjoint_of(SeqExpr s);

  Kind kind() const { return node_->kind; }
  const OpExpr& op() const { return node_->op; }
  const FiniteRankOp& ideal_k() const { return node_->k; }
  const FiniteRankOp& ideal_l() const { return node_->l; }
  cplx scale_factor() const { return node_->lambda; }
  const std::vector<SeqExpr>& children() const { return node_->kids; }

  int dim() const;

 private:
  struct Node {
    Kind kind;
    OpExpr op = OpExpr::ident();
    FiniteRankOp k, l;
    cplx lambda{1.0, 0.0};
    std::vector<SeqExpr> kids;
  };
  explicit SeqExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static SeqExpr make(Node n) { return SeqExpr(std::make_shared<const Node>(std::move(n))); }
  std::shared_ptr<const Node> node_;
};

/// Adjoints pushed into the atoms: (P_n A P_n)* = P_n A* P_n and
/// (P_n K P_n + W_n L W_n)* = P_n K* P_n + W_n L* W_n.
SeqExpr push_adjoint(const SeqExpr& s);

/// The n-th member of the sequence as a dense section matrix.
SectionMatrix realize_member(const SeqExpr& s, int n, int margin = -1);

/// 2 x 2 matrix of operator expressions (the codomain of the corner map).
using TwoByTwoExpr = std::array<std::array<OpExpr, 2>, 2>;

TwoByTwoExpr two_by_two_mul(const TwoByTwoExpr& a, const TwoByTwoExpr& b);

/// Center map: (P_n A P_n) -> A, ideal atom -> K; structural elsewhere.
OpExpr map_P(const SeqExpr& s);

/// Corner map on operators: P -> diag(I, 0), L(a) -> diag(L(a), L(a)),
/// J -> offdiag(J, J); finite-rank atoms are annihilated.
TwoByTwoExpr map_U(const OpExpr& a);

/// Reflection map: (P_n A P_n) -> (PJ, QJ) U(A) (JP; JQ) evaluated
/// symbolically, ideal atom -> L; the result is normalized.
OpExpr map_W(const SeqExpr& s);

enum class StrongLimitKind { CenterP, ReflectW };

/// Finitely supported probe vector: blocks of size d at indices in Z.
struct ProbeVector {
  int d = 1;
  std::map<int, Vec> blocks;  // index -> d-vector

  static ProbeVector unit(int index, int component, int d);
  int support_radius() const;
};

/// Max residual over probes of ||W_n s_n W_n v - predicted v|| (reflect mode)
/// or ||s_n v - predicted v|| (center mode), compared on the observation
/// window |i| < obs_n.  The predicted action is evaluated on a reference
/// window well beyond obs_n.
double strong_limit_oracle(const SeqExpr& s, const OpExpr& predicted, int n,
                           const std::vector<ProbeVector>& probes, StrongLimitKind kind,
                           int obs_n = 8);

}  // namespace finsec

#endif
