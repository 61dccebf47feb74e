#include "finsec/sections.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>

namespace finsec {

SectionMatrix SectionMatrix::zero(int n, int d) {
  SectionMatrix s;
  s.n = n;
  s.d = d;
  s.data = Mat::Zero(2 * n * d, 2 * n * d);
  return s;
}

SectionMatrix SectionMatrix::identity(int n, int d) {
  SectionMatrix s = zero(n, d);
  s.data.setIdentity();
  return s;
}

Eigen::Block<Mat> SectionMatrix::block(int i, int j) {
  return data.block((i + n) * d, (j + n) * d, d, d);
}
Eigen::Block<const Mat> SectionMatrix::block(int i, int j) const {
  return data.block((i + n) * d, (j + n) * d, d, d);
}

namespace {

void check_same_shape(const SectionMatrix& a, const SectionMatrix& b, const char* what) {
  if (a.n != b.n || a.d != b.d) throw validation_error(std::string(what) + ": shape mismatch");
}

}  // namespace

SectionMatrix sec_add(const SectionMatrix& a, const SectionMatrix& b) {
  check_same_shape(a, b, "sec_add");
  SectionMatrix out = a;
  out.data += b.data;
  return out;
}

SectionMatrix sec_mul(const SectionMatrix& a, const SectionMatrix& b) {
  check_same_shape(a, b, "sec_mul");
  SectionMatrix out = a;
  out.data = a.data * b.data;
  return out;
}

SectionMatrix sec_scale(cplx lambda, const SectionMatrix& a) {
  SectionMatrix out = a;
  out.data *= lambda;
  return out;
}

SectionMatrix sec_adjoint(const SectionMatrix& a) {
  SectionMatrix out = a;
  out.data = a.data.adjoint();
  return out;
}

StructuredKind structured_kind_from_name(const std::string& name) {
  if (name == "P_n" || name == "Pn") return StructuredKind::Pn;
  if (name == "W_n" || name == "Wn") return StructuredKind::Wn;
  if (name == "U_k" || name == "U") return StructuredKind::U;
  if (name == "V_k" || name == "V") return StructuredKind::V;
  if (name == "Y_tau" || name == "Y") return StructuredKind::Ytau;
  if (name == "J") return StructuredKind::J;
  if (name == "P") return StructuredKind::P;
  if (name == "Q") return StructuredKind::Q;
  throw validation_error("structured_op: unknown name '" + name + "'");
}

SectionMatrix structured_op(StructuredKind kind, int n, int d, int shift, cplx tau) {
  if (n <= 0) throw validation_error("structured_op: n must be positive");
  SectionMatrix s = SectionMatrix::zero(n, d);
  const Mat id = eye(d);
  auto in_window = [n](int i) { return i >= -n && i < n; };

  switch (kind) {
    case StructuredKind::Pn:
      s.data.setIdentity();
      break;
    case StructuredKind::Wn:
      for (int k = -n; k < n; ++k) {
        int src = (k >= 0) ? (n - 1 - k) : (-n - 1 - k);
        s.block(k, src) = id;
      }
      break;
    case StructuredKind::U:
      for (int k = -n; k < n; ++k)
        if (in_window(k - shift)) s.block(k, k - shift) = id;
      break;
    case StructuredKind::V: {
      int m = std::abs(shift);
      if (shift >= 0) {
        for (int k = -n; k < n; ++k) {
          if (k >= m && in_window(k - m)) s.block(k, k - m) = id;
          if (k < -m && in_window(k + m)) s.block(k, k + m) = id;
        }
      } else {
        for (int k = -n; k < n; ++k) {
          if (k >= 0 && in_window(k + m)) s.block(k, k + m) = id;
          if (k < 0 && in_window(k - m)) s.block(k, k - m) = id;
        }
      }
      break;
    }
    case StructuredKind::Ytau:
      for (int k = -n; k < n; ++k) s.block(k, k) = std::pow(tau, -k) * id;
      break;
    case StructuredKind::J:
      for (int k = -n; k < n; ++k) s.block(k, -k - 1) = id;
      break;
    case StructuredKind::P:
      for (int k = 0; k < n; ++k) s.block(k, k) = id;
      break;
    case StructuredKind::Q:
      for (int k = -n; k < 0; ++k) s.block(k, k) = id;
      break;
  }
  return s;
}

SectionMatrix assemble_canonical(const PCSymbol& a, const PCSymbol& b, const PCSymbol& c,
                                 const PCSymbol& d, const FiniteRankOp& k, int n) {
  const int dim = a.dim();
  if (b.dim() != dim || c.dim() != dim || d.dim() != dim)
    throw validation_error("assemble_canonical: dimension mismatch");
  SectionMatrix s = SectionMatrix::zero(n, dim);

  // Laurent coefficients are shared along diagonals; precompute the ranges.
  std::vector<Mat> ac(4 * n), bc(4 * n), cc(4 * n), dc(4 * n);
  for (int m = -2 * n; m < 2 * n; ++m) {
    ac[m + 2 * n] = a.fourier_coeff(m);
    bc[m + 2 * n] = b.fourier_coeff(m);
    cc[m + 2 * n] = c.fourier_coeff(m);
    dc[m + 2 * n] = d.fourier_coeff(m);
  }
  auto coeff = [&](const std::vector<Mat>& v, int m) -> const Mat& { return v[m + 2 * n]; };

  for (int j = -n; j < n; ++j) {
    for (int l = -n; l < n; ++l) {
      Mat blockv = zeros(dim);
      if (l >= 0) {
        blockv += coeff(ac, j - l);
        int m = j + l + 1;
        if (m >= -2 * n && m < 2 * n) blockv += coeff(cc, m);
      } else {
        blockv += coeff(bc, j - l);
        int m = j + l + 1;
        if (m >= -2 * n && m < 2 * n) blockv += coeff(dc, m);
      }
      s.block(j, l) = blockv;
    }
  }
  for (const auto& [ij, m] : k.entries) {
    if (ij.first >= -n && ij.first < n && ij.second >= -n && ij.second < n)
      s.block(ij.first, ij.second) += m;
  }
  return s;
}

namespace {

Mat letter_matrix(const NfLetter& letter, int n, int d) {
  using LK = NfLetter::Kind;
  switch (letter.kind) {
    case LK::P:
      return structured_op(StructuredKind::P, n, d).data;
    case LK::Q:
      return structured_op(StructuredKind::Q, n, d).data;
    case LK::J:
      return structured_op(StructuredKind::J, n, d).data;
    case LK::L: {
      SectionMatrix s = SectionMatrix::zero(n, d);
      std::vector<Mat> coeffs(4 * n);
      for (int m = -2 * n; m < 2 * n; ++m) coeffs[m + 2 * n] = letter.sym.fourier_coeff(m);
      for (int j = -n; j < n; ++j)
        for (int l = -n; l < n; ++l) s.block(j, l) = coeffs[j - l + 2 * n];
      return s.data;
    }
    case LK::R: {
      SectionMatrix s = SectionMatrix::zero(n, d);
      for (const auto& [ij, m] : letter.fr.entries)
        if (ij.first >= -n && ij.first < n && ij.second >= -n && ij.second < n)
          s.block(ij.first, ij.second) = m;
      return s.data;
    }
  }
  throw validation_error("letter_matrix: unknown letter");
}

}  // namespace

SectionMatrix assemble_windowed(const OpExpr& e, int n, int margin) {
  if (margin < 0) throw validation_error("assemble_windowed: margin must be >= 0");
  NormalForm nf = normal_form(e);
  const int d = nf.d == 0 ? 1 : nf.d;
  const int big = n + margin;

  Mat acc = Mat::Zero(2 * big * d, 2 * big * d);
  for (const auto& mono : nf.monomials) {
    Mat m = Mat::Identity(2 * big * d, 2 * big * d);
    for (const auto& letter : mono.word) m = m * letter_matrix(letter, big, d);
    acc += mono.coeff * m;
  }
  SectionMatrix out;
  out.n = n;
  out.d = d;
  out.data = acc.block((big - n) * d, (big - n) * d, 2 * n * d, 2 * n * d);
  return out;
}

SectionMatrix assemble(const OpExpr& e, int n, int margin) {
  if (auto cf = canonical_form(e)) {
    return assemble_canonical(cf->a, cf->b, cf->c, cf->d, cf->k, n);
  }
  if (margin < 0) margin = kDefaultMarginFactor * n;
  return assemble_windowed(e, n, margin);
}

std::pair<double, double> sigma_extents(const Mat& m) {
  Eigen::BDCSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  double smax = sv.size() ? sv(0) : 0.0;
  double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
  if (smin < 1e-12 * smax) smin = 0.0;
  return {smin, smax};
}

SweepResult sv_sweep(const std::function<SectionMatrix(int)>& builder, const std::vector<int>& ns) {
  if (ns.empty()) throw validation_error("sv_sweep: empty window list");
  for (size_t i = 0; i + 1 < ns.size(); ++i)
    if (ns[i + 1] <= ns[i]) throw validation_error("sv_sweep: windows must be increasing");

  SweepResult result;
  result.rows.resize(ns.size());
  parallel_for(static_cast<int>(ns.size()), [&](int i) {
    SectionMatrix s = builder(ns[i]);
    auto [smin, smax] = sigma_extents(s.data);
    double cond = smin == 0.0 ? std::numeric_limits<double>::infinity() : smax / smin;
    result.rows[i] = {ns[i], smin, cond};
  });
  return result;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Stable:
      return "stable";
    case Verdict::Unstable:
      return "unstable";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

Verdict verdict_numeric(const SweepResult& sweep, double floor_value, int trend_window) {
  if (sweep.rows.empty()) throw validation_error("verdict_numeric: empty sweep");
  int w = std::min<int>(trend_window, static_cast<int>(sweep.rows.size()));
  if (w <= 0) w = static_cast<int>(sweep.rows.size());
  auto tail_begin = sweep.rows.end() - w;

  bool hits_zero = false;
  bool all_above = true;
  bool monotone_down = true;
  double prev = std::numeric_limits<double>::infinity();
  for (auto it = tail_begin; it != sweep.rows.end(); ++it) {
    if (it->sigma_min == 0.0) hits_zero = true;
    if (it->sigma_min < floor_value) all_above = false;
    if (it->sigma_min > prev * (1.0 + 1e-12)) monotone_down = false;
    prev = it->sigma_min;
  }
  if (hits_zero) return Verdict::Unstable;
  if (all_above) return Verdict::Stable;
  if (monotone_down && sweep.rows.back().sigma_min < floor_value) return Verdict::Unstable;
  return Verdict::Inconclusive;
}

}  // namespace finsec
