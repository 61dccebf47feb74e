#include "finsec/symbolmaps.hpp"

#include <cmath>

namespace finsec {

SeqExpr SeqExpr::section(OpExpr op) {
  Node n{Kind::Section, std::move(op), {}, {}, {1.0, 0.0}, {}};
  return make(std::move(n));
}

SeqExpr SeqExpr::j_ideal(FiniteRankOp k, FiniteRankOp l) {
  if (!k.is_zero() && !l.is_zero() && k.d != l.d)
    throw validation_error("j_ideal: dimension mismatch");
  Node n{Kind::JIdeal, OpExpr::ident(), std::move(k), std::move(l), {1.0, 0.0}, {}};
  return make(std::move(n));
}

SeqExpr SeqExpr::sum(std::vector<SeqExpr> terms) {
  Node n{Kind::Sum, OpExpr::ident(), {}, {}, {1.0, 0.0}, std::move(terms)};
  return make(std::move(n));
}

SeqExpr SeqExpr::prod(std::vector<SeqExpr> factors) {
  Node n{Kind::Prod, OpExpr::ident(), {}, {}, {1.0, 0.0}, std::move(factors)};
  return make(std::move(n));
}

SeqExpr SeqExpr::scale(cplx lambda, SeqExpr s) {
  Node n{Kind::Scale, OpExpr::ident(), {}, {}, lambda, {std::move(s)}};
  return make(std::move(n));
}

SeqExpr SeqExpr::adjoint_of(SeqExpr s) {
  Node n{Kind::Adjoint, OpExpr::ident(), {}, {}, {1.0, 0.0}, {std::move(s)}};
  return make(std::move(n));
}

int SeqExpr::dim() const {
  int d = 0;
  auto join = [&](int other) {
    if (other == 0) return;
    if (d == 0)
      d = other;
    else if (d != other)
      throw validation_error("SeqExpr: mixed block dimensions");
  };
  switch (kind()) {
    case Kind::Section:
      join(op().dim());
      break;
    case Kind::JIdeal:
      if (!ideal_k().is_zero()) join(ideal_k().d);
      if (!ideal_l().is_zero()) join(ideal_l().d);
      break;
    default:
      for (const auto& c : children()) join(c.dim());
      break;
  }
  return d;
}

SeqExpr push_adjoint(const SeqExpr& s) {
  using K = SeqExpr::Kind;
  switch (s.kind()) {
    case K::Section:
    case K::JIdeal:
      return s;
    case K::Sum: {
      std::vector<SeqExpr> kids;
      for (const auto& c : s.children()) kids.push_back(push_adjoint(c));
      return SeqExpr::sum(std::move(kids));
    }
    case K::Prod: {
      std::vector<SeqExpr> kids;
      for (const auto& c : s.children()) kids.push_back(push_adjoint(c));
      return SeqExpr::prod(std::move(kids));
    }
    case K::Scale:
      return SeqExpr::scale(s.scale_factor(), push_adjoint(s.children().front()));
    case K::Adjoint: {
      // distribute the star over the child
      const SeqExpr& c = s.children().front();
      switch (c.kind()) {
        case K::Section:
          return SeqExpr::section(adjoint(c.op()));
        case K::JIdeal:
          return SeqExpr::j_ideal(c.ideal_k().adjoint(), c.ideal_l().adjoint());
        case K::Sum: {
          std::vector<SeqExpr> kids;
          for (const auto& t : c.children()) kids.push_back(push_adjoint(SeqExpr::adjoint_of(t)));
          return SeqExpr::sum(std::move(kids));
        }
        case K::Prod: {
          std::vector<SeqExpr> kids;
          for (auto it = c.children().rbegin(); it != c.children().rend(); ++it)
            kids.push_back(push_adjoint(SeqExpr::adjoint_of(*it)));
          return SeqExpr::prod(std::move(kids));
        }
        case K::Scale:
          return SeqExpr::scale(std::conj(c.scale_factor()),
                                push_adjoint(SeqExpr::adjoint_of(c.children().front())));
        case K::Adjoint:
          return push_adjoint(c.children().front());
      }
    }
  }
  throw validation_error("push_adjoint: unknown node");
}

SectionMatrix realize_member(const SeqExpr& s, int n, int margin) {
  using K = SeqExpr::Kind;
  switch (s.kind()) {
    case K::Section:
      return assemble(s.op(), n, margin);
    case K::JIdeal: {
      int d = s.dim() == 0 ? 1 : s.dim();
      SectionMatrix kk = SectionMatrix::zero(n, d);
      for (const auto& [ij, m] : s.ideal_k().entries)
        if (ij.first >= -n && ij.first < n && ij.second >= -n && ij.second < n)
          kk.block(ij.first, ij.second) += m;
      SectionMatrix ll = SectionMatrix::zero(n, d);
      for (const auto& [ij, m] : s.ideal_l().entries)
        if (ij.first >= -n && ij.first < n && ij.second >= -n && ij.second < n)
          ll.block(ij.first, ij.second) += m;
      SectionMatrix w = structured_op(StructuredKind::Wn, n, d);
      return sec_add(kk, sec_mul(sec_mul(w, ll), w));
    }
    case K::Sum: {
      int d = s.dim() == 0 ? 1 : s.dim();
      SectionMatrix acc = SectionMatrix::zero(n, d);
      for (const auto& c : s.children()) acc = sec_add(acc, realize_member(c, n, margin));
      return acc;
    }
    case K::Prod: {
      int d = s.dim() == 0 ? 1 : s.dim();
      SectionMatrix acc = SectionMatrix::identity(n, d);
      for (const auto& c : s.children()) acc = sec_mul(acc, realize_member(c, n, margin));
      return acc;
    }
    case K::Scale:
      return sec_scale(s.scale_factor(), realize_member(s.children().front(), n, margin));
    case K::Adjoint:
      return sec_adjoint(realize_member(s.children().front(), n, margin));
  }
  throw validation_error("realize_member: unknown node");
}

// ---------------------------------------------------------------------------
// homomorphisms

OpExpr map_P(const SeqExpr& s) {
  using K = SeqExpr::Kind;
  switch (s.kind()) {
    case K::Section:
      return s.op();
    case K::JIdeal:
      return OpExpr::finite_rank(s.ideal_k());
    case K::Sum: {
      std::vector<OpExpr> kids;
      for (const auto& c : s.children()) kids.push_back(map_P(c));
      return OpExpr::sum(std::move(kids));
    }
    case K::Prod: {
      std::vector<OpExpr> kids;
      for (const auto& c : s.children()) kids.push_back(map_P(c));
      return OpExpr::prod(std::move(kids));
    }
    case K::Scale:
      return OpExpr::scale(s.scale_factor(), map_P(s.children().front()));
    case K::Adjoint:
      return adjoint(map_P(s.children().front()));
  }
  throw validation_error("map_P: unknown node");
}

namespace {

TwoByTwoExpr two_by_two_zero() {
  OpExpr z = OpExpr::scale(0.0, OpExpr::ident());
  return {{{z, z}, {z, z}}};
}

TwoByTwoExpr two_by_two_diag(const OpExpr& a, const OpExpr& b) {
  OpExpr z = OpExpr::scale(0.0, OpExpr::ident());
  return {{{a, z}, {z, b}}};
}

}  // namespace

TwoByTwoExpr two_by_two_mul(const TwoByTwoExpr& a, const TwoByTwoExpr& b) {
  TwoByTwoExpr out = two_by_two_zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      out[i][j] = OpExpr::sum({OpExpr::prod({a[i][0], b[0][j]}), OpExpr::prod({a[i][1], b[1][j]})});
    }
  return out;
}

TwoByTwoExpr map_U(const OpExpr& a) {
  using K = OpExpr::Kind;
  OpExpr z = OpExpr::scale(0.0, OpExpr::ident());
  switch (a.kind()) {
    case K::Ident:
      return two_by_two_diag(OpExpr::ident(), OpExpr::ident());
    case K::Proj:
      return two_by_two_diag(OpExpr::ident(), z);
    case K::CoProj:
      return two_by_two_diag(z, OpExpr::ident());
    case K::Laurent:
      return two_by_two_diag(a, a);
    case K::Flip:
      return {{{z, OpExpr::flip()}, {OpExpr::flip(), z}}};
    case K::Rank:
      return two_by_two_zero();  // the corner map annihilates K
    case K::Sum: {
      TwoByTwoExpr acc = two_by_two_zero();
      for (const auto& c : a.children()) {
        TwoByTwoExpr u = map_U(c);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) acc[i][j] = OpExpr::sum({acc[i][j], u[i][j]});
      }
      return acc;
    }
    case K::Prod: {
      TwoByTwoExpr acc = two_by_two_diag(OpExpr::ident(), OpExpr::ident());
      for (const auto& c : a.children()) acc = two_by_two_mul(acc, map_U(c));
      return acc;
    }
    case K::Scale: {
      TwoByTwoExpr u = map_U(a.children().front());
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) u[i][j] = OpExpr::scale(a.scale_factor(), u[i][j]);
      return u;
    }
    case K::Adjoint: {
      TwoByTwoExpr u = map_U(a.children().front());
      TwoByTwoExpr out = two_by_two_zero();
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out[i][j] = adjoint(u[j][i]);
      return out;
    }
  }
  throw validation_error("map_U: unknown node");
}

OpExpr map_W(const SeqExpr& s) {
  using K = SeqExpr::Kind;
  switch (s.kind()) {
    case K::Section: {
      TwoByTwoExpr u = map_U(s.op());
      OpExpr pj = OpExpr::prod({OpExpr::proj(), OpExpr::flip()});
      OpExpr qj = OpExpr::prod({OpExpr::coproj(), OpExpr::flip()});
      OpExpr jp = OpExpr::prod({OpExpr::flip(), OpExpr::proj()});
      OpExpr jq = OpExpr::prod({OpExpr::flip(), OpExpr::coproj()});
      OpExpr w = OpExpr::sum({
          OpExpr::prod({pj, u[0][0], jp}),
          OpExpr::prod({pj, u[0][1], jq}),
          OpExpr::prod({qj, u[1][0], jp}),
          OpExpr::prod({qj, u[1][1], jq}),
      });
      return normalize(w);
    }
    case K::JIdeal:
      return OpExpr::finite_rank(s.ideal_l());
    case K::Sum: {
      std::vector<OpExpr> kids;
      for (const auto& c : s.children()) kids.push_back(map_W(c));
      return OpExpr::sum(std::move(kids));
    }
    case K::Prod: {
      std::vector<OpExpr> kids;
      for (const auto& c : s.children()) kids.push_back(map_W(c));
      return OpExpr::prod(std::move(kids));
    }
    case K::Scale:
      return OpExpr::scale(s.scale_factor(), map_W(s.children().front()));
    case K::Adjoint:
      return adjoint(map_W(s.children().front()));
  }
  throw validation_error("map_W: unknown node");
}

// ---------------------------------------------------------------------------
// strong-limit oracle

ProbeVector ProbeVector::unit(int index, int component, int d) {
  ProbeVector p;
  p.d = d;
  Vec v = Vec::Zero(d);
  v(component) = 1.0;
  p.blocks[index] = v;
  return p;
}

int ProbeVector::support_radius() const {
  int r = 0;
  for (const auto& [i, v] : blocks) {
    (void)v;
    r = std::max({r, i + 1, -i});
  }
  return r;
}

namespace {

Vec embed_probe(const ProbeVector& p, int n) {
  Vec v = Vec::Zero(2 * n * p.d);
  for (const auto& [i, b] : p.blocks) {
    if (i < -n || i >= n) throw validation_error("strong_limit_oracle: probe support exceeds window");
    v.segment((i + n) * p.d, p.d) = b;
  }
  return v;
}

}  // namespace

double strong_limit_oracle(const SeqExpr& s, const OpExpr& predicted, int n,
                           const std::vector<ProbeVector>& probes, StrongLimitKind kind,
                           int obs_n) {
  if (probes.empty()) throw validation_error("strong_limit_oracle: no probes");
  const int d = probes.front().d;
  if (obs_n > n) throw validation_error("strong_limit_oracle: observation window exceeds n");

  SectionMatrix member = realize_member(s, n);
  Mat mapped;
  if (kind == StrongLimitKind::ReflectW) {
    Mat w = structured_op(StructuredKind::Wn, n, d).data;
    mapped = w * member.data * w;
  } else {
    mapped = member.data;
  }

  // reference action of the predicted operator, on a window comfortably larger
  // than the observation window
  const int ref_n = std::max(4 * obs_n, 32);
  SectionMatrix ref = assemble(predicted, ref_n);

  double worst = 0.0;
  for (const auto& p : probes) {
    if (p.d != d) throw validation_error("strong_limit_oracle: probe dimension mismatch");
    Vec vn = embed_probe(p, n);
    Vec out_n = mapped * vn;
    Vec vr = embed_probe(p, ref_n);
    Vec out_ref = ref.data * vr;

    double err2 = 0.0;
    for (int i = -obs_n; i < obs_n; ++i) {
      Eigen::VectorXcd a = out_n.segment((i + n) * d, d);
      Eigen::VectorXcd b = out_ref.segment((i + ref_n) * d, d);
      err2 += (a - b).squaredNorm();
    }
    worst = std::max(worst, std::sqrt(err2));
  }
  return worst;
}

}  // namespace finsec
