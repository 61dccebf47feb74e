#include "finsec/localsym.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace finsec {

LocalPoint LocalPoint::from_folded_angle(double tau, double tol) {
  LocalPoint p;
  p.tau = tau;
  if (std::abs(tau) <= tol) {
    p.kind = Kind::PlusOne;
    p.tau = 0.0;
  } else if (std::abs(tau - pi) <= tol) {
    p.kind = Kind::MinusOne;
    p.tau = pi;
  } else {
    p.kind = Kind::Interior;
  }
  return p;
}

std::string LocalPoint::label() const {
  switch (kind) {
    case Kind::PlusOne:
      return "tau=+1";
    case Kind::MinusOne:
      return "tau=-1";
    case Kind::Interior:
      return "tau=" + fmt_g17(tau);
  }
  return "?";
}

LocalSymbol LocalSymbol::interior_of(std::array<std::array<LineOp, 2>, 2> e) {
  LocalSymbol ls;
  ls.interior = true;
  ls.entries = std::move(e);
  return ls;
}

LocalSymbol LocalSymbol::boundary_of(LineOp e) {
  LocalSymbol ls;
  ls.interior = false;
  ls.boundary = std::move(e);
  return ls;
}

LocalSymbol LocalSymbol::zero_like(const LocalSymbol& other) {
  LocalSymbol ls;
  ls.interior = other.interior;
  return ls;
}

std::string LocalSymbol::text() const {
  if (!interior) return print_line_op(canonical_line_op(boundary));
  std::ostringstream os;
  os << "[[" << print_line_op(canonical_line_op(entries[0][0])) << ", "
     << print_line_op(canonical_line_op(entries[0][1])) << "], ["
     << print_line_op(canonical_line_op(entries[1][0])) << ", "
     << print_line_op(canonical_line_op(entries[1][1])) << "]]";
  return os.str();
}

LineOp pc_local_operator(const Mat& limit_plus, const Mat& limit_minus) {
  const int d = static_cast<int>(limit_plus.rows());
  if (mats_close(limit_plus, limit_minus, 1e-14)) {
    cplx lambda;
    if (is_scalar_matrix(limit_plus, lambda))
      return lambda == cplx(1.0, 0.0) ? LineOp::ident() : LineOp::scale(lambda, LineOp::ident());
    return LineOp::constant(limit_plus);
  }
  LineOp half_minus_s = LineOp::scale(0.5, LineOp::sum({LineOp::ident(), LineOp::scale(-1.0, LineOp::sing_r())}));
  LineOp half_plus_s = LineOp::scale(0.5, LineOp::sum({LineOp::ident(), LineOp::sing_r()}));
  auto weighted = [&](const Mat& m, const LineOp& half) -> LineOp {
    if (m.cwiseAbs().maxCoeff() == 0.0) return LineOp::zero();
    cplx lambda;
    if (is_scalar_matrix(m, lambda))
      return lambda == cplx(1.0, 0.0) ? half : LineOp::scale(lambda, half);
    return LineOp::prod({LineOp::constant(m), half});
  };
  (void)d;
  return canonical_line_op(
      LineOp::sum({weighted(limit_plus, half_minus_s), weighted(limit_minus, half_plus_s)}));
}

namespace {

void collect_ops(const SeqExpr& s, std::vector<OpExpr>& ops) {
  switch (s.kind()) {
    case SeqExpr::Kind::Section:
      ops.push_back(s.op());
      return;
    case SeqExpr::Kind::JIdeal:
      return;
    default:
      for (const auto& c : s.children()) collect_ops(c, ops);
      return;
  }
}

void collect_symbols_and_flips(const OpExpr& e, std::vector<PCSymbol>& syms, bool& has_flip) {
  using K = OpExpr::Kind;
  switch (e.kind()) {
    case K::Laurent:
      syms.push_back(e.symbol());
      return;
    case K::Flip:
      has_flip = true;
      return;
    default:
      for (const auto& c : e.children()) collect_symbols_and_flips(c, syms, has_flip);
      return;
  }
}

double fold_angle(double theta) {
  theta = wrap_angle(theta);
  return theta <= pi ? theta : two_pi - theta;
}

}  // namespace

std::vector<LocalPoint> fiber_points(const SeqExpr& s) {
  std::vector<OpExpr> ops;
  collect_ops(s, ops);
  std::vector<PCSymbol> syms;
  bool has_flip = false;
  for (const auto& op : ops) collect_symbols_and_flips(op, syms, has_flip);

  std::vector<double> folded;
  bool endpoint_plus = has_flip, endpoint_minus = has_flip;
  for (const auto& sym : syms) {
    for (double tau : sym.jump_angles()) {
      double f = fold_angle(tau);
      if (f <= 1e-9)
        endpoint_plus = true;
      else if (std::abs(f - pi) <= 1e-9)
        endpoint_minus = true;
      else
        folded.push_back(f);
    }
  }
  std::sort(folded.begin(), folded.end());
  std::vector<LocalPoint> points;
  if (endpoint_plus) points.push_back(LocalPoint{LocalPoint::Kind::PlusOne, 0.0});
  double last = -1.0;
  for (double f : folded) {
    if (last >= 0.0 && std::abs(f - last) <= 1e-9) continue;
    last = f;
    points.push_back(LocalPoint{LocalPoint::Kind::Interior, f});
  }
  if (endpoint_minus) points.push_back(LocalPoint{LocalPoint::Kind::MinusOne, pi});
  return points;
}

namespace {

using Table2x2 = std::array<std::array<LineOp, 2>, 2>;

Table2x2 table_zero() {
  return {{{LineOp::zero(), LineOp::zero()}, {LineOp::zero(), LineOp::zero()}}};
}

Table2x2 table_diag(LineOp a, LineOp b) {
  return {{{std::move(a), LineOp::zero()}, {LineOp::zero(), std::move(b)}}};
}

Table2x2 table_mul(const Table2x2& a, const Table2x2& b) {
  Table2x2 out = table_zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out[i][j] = LineOp::sum({LineOp::prod({a[i][0], b[0][j]}), LineOp::prod({a[i][1], b[1][j]})});
  return out;
}

}  // namespace

std::array<std::array<LineOp, 2>, 2> local_symbol_interior(const OpExpr& a, const LocalPoint& p) {
  if (p.kind != LocalPoint::Kind::Interior)
    throw validation_error("local_symbol_interior: point is not interior");
  using K = OpExpr::Kind;
  switch (a.kind()) {
    case K::Ident:
      return table_diag(LineOp::ident(), LineOp::ident());
    case K::Proj:
      return table_diag(LineOp::chi_pos(), LineOp::chi_neg());
    case K::CoProj:
      return table_diag(LineOp::chi_neg(), LineOp::chi_pos());
    case K::Flip:
      return {{{LineOp::zero(), LineOp::ident()}, {LineOp::ident(), LineOp::zero()}}};
    case K::Rank:
      return table_zero();
    case K::Laurent: {
      auto [plus, minus] = a.symbol().one_sided_limits(p.tau);
      auto [fplus, fminus] = a.symbol().flipped().one_sided_limits(p.tau);
      return table_diag(pc_local_operator(plus, minus), pc_local_operator(fplus, fminus));
    }
    case K::Sum: {
      Table2x2 acc = table_zero();
      for (const auto& c : a.children()) {
        Table2x2 t = local_symbol_interior(c, p);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) acc[i][j] = LineOp::sum({acc[i][j], t[i][j]});
      }
      return acc;
    }
    case K::Prod: {
      Table2x2 acc = table_diag(LineOp::ident(), LineOp::ident());
      for (const auto& c : a.children()) acc = table_mul(acc, local_symbol_interior(c, p));
      return acc;
    }
    case K::Scale: {
      Table2x2 t = local_symbol_interior(a.children().front(), p);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) t[i][j] = LineOp::scale(a.scale_factor(), t[i][j]);
      return t;
    }
    case K::Adjoint: {
      Table2x2 t = local_symbol_interior(a.children().front(), p);
      Table2x2 out = table_zero();
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out[i][j] = LineOp::adjoint_of(t[j][i]);
      return out;
    }
  }
  throw validation_error("local_symbol_interior: unknown node");
}

LineOp local_symbol_boundary(const OpExpr& a, const LocalPoint& p) {
  if (p.kind == LocalPoint::Kind::Interior)
    throw validation_error("local_symbol_boundary: point is interior");
  const double tau_sign = p.kind == LocalPoint::Kind::PlusOne ? 1.0 : -1.0;
  const double angle = p.kind == LocalPoint::Kind::PlusOne ? 0.0 : pi;
  using K = OpExpr::Kind;
  switch (a.kind()) {
    case K::Ident:
      return LineOp::ident();
    case K::Proj:
      return LineOp::chi_pos();
    case K::CoProj:
      return LineOp::chi_neg();
    case K::Flip:
      return tau_sign > 0 ? LineOp::flip_l() : LineOp::scale(-1.0, LineOp::flip_l());
    case K::Rank:
      return LineOp::zero();
    case K::Laurent: {
      auto [plus, minus] = a.symbol().one_sided_limits(angle);
      return pc_local_operator(plus, minus);
    }
    case K::Sum: {
      std::vector<LineOp> terms;
      for (const auto& c : a.children()) terms.push_back(local_symbol_boundary(c, p));
      return LineOp::sum(std::move(terms));
    }
    case K::Prod: {
      std::vector<LineOp> factors;
      for (const auto& c : a.children()) factors.push_back(local_symbol_boundary(c, p));
      return LineOp::prod(std::move(factors));
    }
    case K::Scale:
      return LineOp::scale(a.scale_factor(), local_symbol_boundary(a.children().front(), p));
    case K::Adjoint:
      return LineOp::adjoint_of(local_symbol_boundary(a.children().front(), p));
  }
  throw validation_error("local_symbol_boundary: unknown node");
}

LocalSymbol local_symbol_seq(const SeqExpr& s, const LocalPoint& p) {
  const bool interior = p.kind == LocalPoint::Kind::Interior;
  using K = SeqExpr::Kind;
  switch (s.kind()) {
    case K::Section: {
      if (interior) {
        Table2x2 t = local_symbol_interior(s.op(), p);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) t[i][j] = LineOp::compress_unit(t[i][j]);
        return LocalSymbol::interior_of(std::move(t));
      }
      return LocalSymbol::boundary_of(LineOp::compress_unit(local_symbol_boundary(s.op(), p)));
    }
    case K::JIdeal: {
      LocalSymbol z;
      z.interior = interior;
      return z;
    }
    case K::Sum: {
      LocalSymbol acc;
      acc.interior = interior;
      for (const auto& c : s.children()) {
        LocalSymbol t = local_symbol_seq(c, p);
        if (interior) {
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) acc.entries[i][j] = LineOp::sum({acc.entries[i][j], t.entries[i][j]});
        } else {
          acc.boundary = LineOp::sum({acc.boundary, t.boundary});
        }
      }
      return acc;
    }
    case K::Prod: {
      // the sequence algebra multiplies after compression
      LocalSymbol acc;
      acc.interior = interior;
      if (interior)
        acc.entries = table_diag(LineOp::compress_unit(LineOp::ident()),
                                 LineOp::compress_unit(LineOp::ident()));
      else
        acc.boundary = LineOp::compress_unit(LineOp::ident());
      for (const auto& c : s.children()) {
        LocalSymbol t = local_symbol_seq(c, p);
        if (interior)
          acc.entries = table_mul(acc.entries, t.entries);
        else
          acc.boundary = LineOp::prod({acc.boundary, t.boundary});
      }
      return acc;
    }
    case K::Scale: {
      LocalSymbol t = local_symbol_seq(s.children().front(), p);
      if (interior) {
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) t.entries[i][j] = LineOp::scale(s.scale_factor(), t.entries[i][j]);
      } else {
        t.boundary = LineOp::scale(s.scale_factor(), t.boundary);
      }
      return t;
    }
    case K::Adjoint: {
      LocalSymbol t = local_symbol_seq(s.children().front(), p);
      LocalSymbol out;
      out.interior = interior;
      if (interior) {
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) out.entries[i][j] = LineOp::adjoint_of(t.entries[j][i]);
      } else {
        out.boundary = LineOp::adjoint_of(t.boundary);
      }
      return out;
    }
  }
  throw validation_error("local_symbol_seq: unknown node");
}

Mat discretize_local(const LocalSymbol& ls, int cells) {
  if (cells < 2 || cells % 2 != 0)
    throw validation_error("discretize_local: cell count must be even and >= 2");
  GridSpec grid = GridSpec::unit_symmetric(cells / 2);
  if (!ls.interior) return discretize(ls.boundary, grid);

  int d = 0;
  for (int i = 0; i < 2 && d == 0; ++i)
    for (int j = 0; j < 2 && d == 0; ++j) d = ls.entries[i][j].dim();
  if (d == 0) d = 1;

  const int blk = cells * d;
  Mat out = Mat::Zero(2 * blk, 2 * blk);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      Mat e = discretize(ls.entries[i][j], grid);
      if (e.rows() != blk)  // dimension-neutral entry next to a d-blocked one
        e = expand_blocks(e, d);
      out.block(i * blk, j * blk, blk, blk) = e;
    }
  return out;
}

LocalEvidence check_local_invertibility(const LocalSymbol& ls, const std::vector<int>& grids,
                                        double floor_value, int trend_window) {
  if (grids.empty()) throw validation_error("check_local_invertibility: no grids");
  for (size_t i = 0; i + 1 < grids.size(); ++i)
    if (grids[i + 1] <= grids[i]) throw validation_error("check_local_invertibility: grids must increase");

  LocalEvidence ev;
  ev.symbol_text = ls.text();
  ev.sigma.resize(grids.size());
  parallel_for(static_cast<int>(grids.size()), [&](int i) {
    Mat m = discretize_local(ls, grids[i]);
    auto [smin, smax] = sigma_extents(m);
    (void)smax;
    ev.sigma[i] = {grids[i], smin};
  });

  SweepResult sweep;
  for (auto& [cells, smin] : ev.sigma) sweep.rows.push_back({cells, smin, 0.0});
  Verdict v = verdict_numeric(sweep, floor_value, trend_window);
  ev.verdict = v == Verdict::Stable     ? InvVerdict::Invertible
               : v == Verdict::Unstable ? InvVerdict::Singular
                                        : InvVerdict::Inconclusive;
  return ev;
}

std::string inv_verdict_name(InvVerdict v) {
  switch (v) {
    case InvVerdict::Invertible:
      return "invertible";
    case InvVerdict::Singular:
      return "singular";
    case InvVerdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

}  // namespace finsec
