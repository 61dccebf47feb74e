#include "finsec/linemodels.hpp"

#include <cmath>
#include <sstream>

namespace finsec {

// ---------------------------------------------------------------------------
// LineOp construction

LineOp LineOp::ident() { return make({Kind::IdentL, {}, {1.0, 0.0}, {}, {}}); }
LineOp LineOp::chi_pos() { return make({Kind::ChiPos, {}, {1.0, 0.0}, {}, {}}); }
LineOp LineOp::chi_neg() { return sum({ident(), scale(-1.0, chi_pos())}); }
LineOp LineOp::sing_r() { return make({Kind::SingR, {}, {1.0, 0.0}, {}, {}}); }
LineOp LineOp::flip_l() { return make({Kind::FlipL, {}, {1.0, 0.0}, {}, {}}); }

LineOp LineOp::constant(const Mat& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw validation_error("LineOp constant: square matrix");
  return make({Kind::ConstL, a, {1.0, 0.0}, {}, {}});
}

LineOp LineOp::compress_unit(LineOp e) {
  return make({Kind::CompressUnit, {}, {1.0, 0.0}, {std::move(e)}, {}});
}

LineOp LineOp::sing_half() { return make({Kind::SingHalf, {}, {1.0, 0.0}, {}, {}}); }
LineOp LineOp::hankel_half() { return make({Kind::HankelHalf, {}, {1.0, 0.0}, {}, {}}); }

LineOp LineOp::mellin_conv(MellinHandle b) {
  return make({Kind::MellinConv, {}, {1.0, 0.0}, {}, std::move(b)});
}

LineOp LineOp::sum(std::vector<LineOp> terms) {
  return make({Kind::Sum, {}, {1.0, 0.0}, std::move(terms), {}});
}

LineOp LineOp::prod(std::vector<LineOp> factors) {
  if (factors.empty()) return ident();
  return make({Kind::Prod, {}, {1.0, 0.0}, std::move(factors), {}});
}

LineOp LineOp::scale(cplx lambda, LineOp e) {
  return make({Kind::Scale, {}, lambda, {std::move(e)}, {}});
}

LineOp LineOp::adjoint_of(LineOp e) {
  return make({Kind::Adjoint, {}, {1.0, 0.0}, {std::move(e)}, {}});
}

int LineOp::dim() const {
  int d = 0;
  auto join = [&](int other) {
    if (other == 0) return;
    if (d == 0)
      d = other;
    else if (d != other)
      throw validation_error("LineOp: mixed block dimensions");
  };
  if (kind() == Kind::ConstL)
    join(static_cast<int>(const_value().rows()));
  else
    for (const auto& k : children()) join(k.dim());
  return d;
}

bool LineOp::whole_line() const {
  switch (kind()) {
    case Kind::SingHalf:
    case Kind::HankelHalf:
    case Kind::MellinConv:
      return false;
    default:
      for (const auto& k : children())
        if (!k.whole_line()) return false;
      return true;
  }
}

// ---------------------------------------------------------------------------
// printing / structural comparison

namespace {

void print_rec(const LineOp& op, std::ostream& os) {
  using K = LineOp::Kind;
  switch (op.kind()) {
    case K::IdentL:
      os << "I";
      return;
    case K::ChiPos:
      os << "chi+";
      return;
    case K::SingR:
      os << "S_R";
      return;
    case K::FlipL:
      os << "J^";
      return;
    case K::SingHalf:
      os << "S";
      return;
    case K::HankelHalf:
      os << "N";
      return;
    case K::MellinConv:
      os << "M0(b)";
      return;
    case K::ConstL: {
      os << "const[";
      const Mat& m = op.const_value();
      for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
          os << fmt_cplx(m(i, j)) << ((i == m.rows() - 1 && j == m.cols() - 1) ? "" : " ");
      os << "]";
      return;
    }
    case K::CompressUnit:
      os << "(compress ";
      print_rec(op.children().front(), os);
      os << ")";
      return;
    case K::Sum: {
      os << "(sum";
      for (const auto& k : op.children()) {
        os << ' ';
        print_rec(k, os);
      }
      os << ')';
      return;
    }
    case K::Prod: {
      os << "(prod";
      for (const auto& k : op.children()) {
        os << ' ';
        print_rec(k, os);
      }
      os << ')';
      return;
    }
    case K::Scale:
      os << "(scale " << fmt_cplx(op.scale_factor()) << ' ';
      print_rec(op.children().front(), os);
      os << ')';
      return;
    case K::Adjoint:
      os << "(adj ";
      print_rec(op.children().front(), os);
      os << ')';
      return;
  }
}

bool is_zero_line(const LineOp& op) {
  using K = LineOp::Kind;
  if (op.kind() == K::Scale && op.scale_factor() == cplx(0.0, 0.0)) return true;
  if (op.kind() == K::ConstL && op.const_value().cwiseAbs().maxCoeff() == 0.0) return true;
  if (op.kind() == K::Sum && op.children().empty()) return true;
  return false;
}

}  // namespace

std::string print_line_op(const LineOp& op) {
  std::ostringstream os;
  print_rec(op, os);
  return os.str();
}

LineOp canonical_line_op(const LineOp& op) {
  using K = LineOp::Kind;
  switch (op.kind()) {
    case K::Sum: {
      std::vector<LineOp> flat;
      for (const auto& k : op.children()) {
        LineOp c = canonical_line_op(k);
        if (is_zero_line(c)) continue;
        if (c.kind() == K::Sum)
          flat.insert(flat.end(), c.children().begin(), c.children().end());
        else
          flat.push_back(std::move(c));
      }
      if (flat.empty()) return LineOp::zero();
      if (flat.size() == 1) return flat.front();
      return LineOp::sum(std::move(flat));
    }
    case K::Prod: {
      cplx lambda(1.0, 0.0);
      std::vector<LineOp> flat;
      for (const auto& k : op.children()) {
        LineOp c = canonical_line_op(k);
        if (is_zero_line(c)) return LineOp::zero();
        if (c.kind() == K::Scale) {
          lambda *= c.scale_factor();
          c = c.children().front();
        }
        if (c.kind() == K::IdentL) continue;
        cplx mu;
        if (c.kind() == K::ConstL && is_scalar_matrix(c.const_value(), mu)) {
          lambda *= mu;
          continue;
        }
        if (!flat.empty() && flat.back().kind() == K::ConstL && c.kind() == K::ConstL) {
          Mat merged = flat.back().const_value() * c.const_value();
          flat.back() = LineOp::constant(merged);
          continue;
        }
        if (c.kind() == K::Prod)
          flat.insert(flat.end(), c.children().begin(), c.children().end());
        else
          flat.push_back(std::move(c));
      }
      LineOp body = flat.empty() ? LineOp::ident()
                  : flat.size() == 1 ? flat.front()
                                     : LineOp::prod(std::move(flat));
      if (lambda == cplx(1.0, 0.0)) return body;
      if (lambda == cplx(0.0, 0.0)) return LineOp::zero();
      return LineOp::scale(lambda, body);
    }
    case K::Scale: {
      LineOp c = canonical_line_op(op.children().front());
      cplx lambda = op.scale_factor();
      if (c.kind() == K::Scale) {
        lambda *= c.scale_factor();
        c = c.children().front();
      }
      if (lambda == cplx(0.0, 0.0) || is_zero_line(c)) return LineOp::zero();
      if (lambda == cplx(1.0, 0.0)) return c;
      return LineOp::scale(lambda, c);
    }
    case K::CompressUnit:
      return LineOp::compress_unit(canonical_line_op(op.children().front()));
    case K::Adjoint: {
      LineOp c = canonical_line_op(op.children().front());
      return LineOp::adjoint_of(std::move(c));
    }
    case K::ConstL: {
      cplx mu;
      if (is_scalar_matrix(op.const_value(), mu)) {
        if (mu == cplx(0.0, 0.0)) return LineOp::zero();
        if (mu == cplx(1.0, 0.0)) return LineOp::ident();
        return LineOp::scale(mu, LineOp::ident());
      }
      return op;
    }
    default:
      return op;
  }
}

bool struct_equal(const LineOp& a, const LineOp& b) {
  return print_line_op(canonical_line_op(a)) == print_line_op(canonical_line_op(b));
}

// ---------------------------------------------------------------------------
// grids and discretization

int GridSpec::cell_count() const {
  if (support == Support::UnitIntervalSymmetric) return 2 * n;
  return m > 0 ? m : 8 * n;
}

std::pair<double, double> GridSpec::cell(int idx) const {
  if (support == Support::UnitIntervalSymmetric) {
    int i = idx - n;
    return {static_cast<double>(i) / n, static_cast<double>(i + 1) / n};
  }
  return {static_cast<double>(idx) / n, static_cast<double>(idx + 1) / n};
}

double cauchy_cell_integral(double a1, double a2, double b1, double b2) {
  auto h = [](double u) { return u == 0.0 ? 0.0 : u * std::log(std::abs(u)) - u; };
  return h(b2 - a1) - h(b2 - a2) - h(b1 - a1) + h(b1 - a2);
}

double hankel_cell_integral(double a1, double a2, double b1, double b2) {
  auto h = [](double u) { return u == 0.0 ? 0.0 : u * std::log(std::abs(u)) - u; };
  return h(b2 + a2) - h(b2 + a1) - h(b1 + a2) + h(b1 + a1);
}

Mat expand_blocks(const Mat& scalar_part, int d) {
  if (d == 1) return scalar_part;
  const int c = static_cast<int>(scalar_part.rows());
  Mat out = Mat::Zero(c * d, c * d);
  for (int i = 0; i < c; ++i)
    for (int j = 0; j < c; ++j)
      if (scalar_part(i, j) != cplx(0.0, 0.0))
        out.block(i * d, j * d, d, d) = scalar_part(i, j) * eye(d);
  return out;
}

namespace {

Mat kron_identity(const Mat& scalar_part, int d) { return expand_blocks(scalar_part, d); }

Mat cauchy_matrix(const GridSpec& grid, bool hankel) {
  const int c = grid.cell_count();
  Mat m = Mat::Zero(c, c);
  const cplx pref = 1.0 / cplx(0.0, pi);  // 1/(pi i)
  for (int i = 0; i < c; ++i) {
    auto [x1, x2] = grid.cell(i);
    for (int j = 0; j < c; ++j) {
      auto [y1, y2] = grid.cell(j);
      double v = hankel ? hankel_cell_integral(x1, x2, y1, y2)
                        : cauchy_cell_integral(x1, x2, y1, y2);
      m(i, j) = pref * (static_cast<double>(grid.n) * v);
    }
  }
  return m;
}

void require_unit(const GridSpec& grid, const char* what) {
  if (grid.support != GridSpec::Support::UnitIntervalSymmetric)
    throw validation_error(std::string(what) + ": whole-line operator needs the symmetric grid");
}

void require_half(const GridSpec& grid, const char* what) {
  if (grid.support != GridSpec::Support::HalfLineWindow)
    throw validation_error(std::string(what) + ": half-line operator needs a half-line grid");
}

}  // namespace

Mat discretize(const LineOp& op, const GridSpec& grid) {
  using K = LineOp::Kind;
  const int d = std::max(op.dim(), 1);
  const int c = grid.cell_count();
  const int size = c * d;

  switch (op.kind()) {
    case K::IdentL:
      return Mat::Identity(size, size);
    case K::ChiPos: {
      Mat m = Mat::Zero(c, c);
      for (int i = 0; i < c; ++i)
        if (grid.cell(i).first >= 0.0) m(i, i) = 1.0;
      return kron_identity(m, d);
    }
    case K::SingR:
      require_unit(grid, "S_R");
      return kron_identity(cauchy_matrix(grid, false), d);
    case K::FlipL: {
      require_unit(grid, "J^");
      Mat m = Mat::Zero(c, c);
      for (int i = 0; i < c; ++i) m(i, c - 1 - i) = 1.0;  // cell i <-> cell -1-i
      return kron_identity(m, d);
    }
    case K::ConstL: {
      Mat out = Mat::Zero(size, size);
      for (int i = 0; i < c; ++i) out.block(i * d, i * d, d, d) = op.const_value();
      return out;
    }
    case K::CompressUnit:
      // the symmetric grid already covers exactly [-1,1]
      require_unit(grid, "compress");
      return discretize(op.children().front(), grid);
    case K::SingHalf:
      require_half(grid, "S");
      return kron_identity(cauchy_matrix(grid, false), d);
    case K::HankelHalf:
      require_half(grid, "N");
      return kron_identity(cauchy_matrix(grid, true), d);
    case K::MellinConv:
      require_half(grid, "M0(b)");
      return kron_identity(mellin_conv_matrix(op.mellin_handle(), c), d);
    case K::Sum: {
      Mat acc = Mat::Zero(size, size);
      for (const auto& k : op.children()) acc += discretize(k, grid);
      return acc;
    }
    case K::Prod: {
      Mat acc = Mat::Identity(size, size);
      for (const auto& k : op.children()) acc = acc * discretize(k, grid);
      return acc;
    }
    case K::Scale:
      return op.scale_factor() * discretize(op.children().front(), grid);
    case K::Adjoint:
      return discretize(op.children().front(), grid).adjoint();
  }
  throw validation_error("discretize: unknown node");
}

// ---------------------------------------------------------------------------
// doubling

std::array<std::array<LineOp, 2>, 2> phi_omega(const LineOp& op) {
  using K = LineOp::Kind;
  LineOp z = LineOp::zero();
  auto diag = [&](LineOp a, LineOp b) {
    return std::array<std::array<LineOp, 2>, 2>{{{std::move(a), z}, {z, std::move(b)}}};
  };
  switch (op.kind()) {
    case K::IdentL:
      return diag(LineOp::ident(), LineOp::ident());
    case K::ChiPos:
      return diag(LineOp::ident(), LineOp::zero());
    case K::ConstL:
      return diag(op, op);
    case K::SingR:
      return {{{LineOp::sing_half(), LineOp::scale(-1.0, LineOp::hankel_half())},
               {LineOp::hankel_half(), LineOp::scale(-1.0, LineOp::sing_half())}}};
    case K::FlipL:
      return {{{z, LineOp::ident()}, {LineOp::ident(), z}}};
    case K::Sum: {
      auto acc = diag(z, z);
      for (const auto& k : op.children()) {
        auto t = phi_omega(k);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j) acc[i][j] = LineOp::sum({acc[i][j], t[i][j]});
      }
      return acc;
    }
    case K::Prod: {
      auto acc = diag(LineOp::ident(), LineOp::ident());
      for (const auto& k : op.children()) {
        auto t = phi_omega(k);
        std::array<std::array<LineOp, 2>, 2> next = diag(z, z);
        for (int i = 0; i < 2; ++i)
          for (int j = 0; j < 2; ++j)
            next[i][j] = LineOp::sum(
                {LineOp::prod({acc[i][0], t[0][j]}), LineOp::prod({acc[i][1], t[1][j]})});
        acc = next;
      }
      return acc;
    }
    case K::Scale: {
      auto t = phi_omega(op.children().front());
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) t[i][j] = LineOp::scale(op.scale_factor(), t[i][j]);
      return t;
    }
    case K::Adjoint: {
      auto t = phi_omega(op.children().front());
      std::array<std::array<LineOp, 2>, 2> out = diag(z, z);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out[i][j] = LineOp::adjoint_of(t[j][i]);
      return out;
    }
    default:
      throw validation_error("phi_omega: not a whole-line operator");
  }
}

Eigen::MatrixXd doubling_permutation(int n, int d) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2 * n * d, 2 * n * d);
  for (int i = 0; i < n; ++i) {
    // output block 1, cell i  <- symmetric-grid cell index (i + n)
    for (int k = 0; k < d; ++k) p(i * d + k, (i + n) * d + k) = 1.0;
    // output block 2, cell i  <- reflected cell -1-i, grid index (n - 1 - i)
    for (int k = 0; k < d; ++k) p((n + i) * d + k, (n - 1 - i) * d + k) = 1.0;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Mellin

cplx mellin_transform(const LogGridFn& f, double z) {
  const size_t count = f.values.size();
  if (count < 3) throw validation_error("mellin_transform: need at least 3 samples");
  if (!(f.t_max > f.t_min)) throw validation_error("mellin_transform: empty log grid");
  const double h = (f.t_max - f.t_min) / static_cast<double>(count - 1);
  const cplx expo(0.5, -z);

  auto g = [&](size_t i) {
    double t = f.t_min + h * static_cast<double>(i);
    return f.values[i] * std::exp(expo * t);
  };

  cplx acc(0.0, 0.0);
  size_t i = 0;
  // composite Simpson over as many even strips as possible
  size_t pairs = (count - 1) / 2;
  for (size_t p = 0; p < pairs; ++p, i += 2) acc += (h / 3.0) * (g(i) + 4.0 * g(i + 1) + g(i + 2));
  if (i + 1 < count) acc += (h / 2.0) * (g(i) + g(i + 1));  // trapezoid leftover
  if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag()))
    throw numerical_error("mellin_transform: divergent quadrature");
  return acc;
}

cplx mellin_transform(const std::function<cplx(double)>& f, double x_lo, double x_hi, double z,
                      int nodes) {
  if (!(x_hi > x_lo) || x_lo <= 0.0)
    throw validation_error("mellin_transform: need 0 < x_lo < x_hi");
  LogGridFn grid;
  grid.t_min = std::log(x_lo);
  grid.t_max = std::log(x_hi);
  grid.values.resize(nodes);
  const double h = (grid.t_max - grid.t_min) / (nodes - 1);
  for (int i = 0; i < nodes; ++i) grid.values[i] = f(std::exp(grid.t_min + i * h));
  return mellin_transform(grid, z);
}

Mat mellin_conv_matrix(const LineOp::MellinHandle& b, int n, const MellinQuadrature& quad) {
  if (n <= 0) throw validation_error("mellin_conv_matrix: need n >= 1");
  const double Z = quad.z_max;
  const int M = quad.nodes;

  cplx b_hi = b(Z), b_lo = b(-Z);
  if (!std::isfinite(b_hi.real()) || !std::isfinite(b_hi.imag()) || !std::isfinite(b_lo.real()) ||
      !std::isfinite(b_lo.imag()))
    throw numerical_error("mellin_conv_matrix: divergent quadrature (b unbounded)");
  const cplx c = 0.5 * (b_hi + b_lo);  // split off exactly: G(c) = c I

  Mat g = c * Mat::Identity(n, n);
  const double h = 2.0 * Z / (M - 1);

  // F_k(z) = ((k+1)^{1/2 - iz} - k^{1/2 - iz}) / (1/2 - iz)
  auto pow_half = [](int k, cplx expo) -> cplx {
    return k == 0 ? cplx(0.0, 0.0) : std::exp(expo * std::log(static_cast<double>(k)));
  };

  Mat f(n, M);
  Eigen::VectorXcd w(M);
  for (int m = 0; m < M; ++m) {
    double z = -Z + m * h;
    cplx bz = b(z);
    if (!std::isfinite(bz.real()) || !std::isfinite(bz.imag()))
      throw numerical_error("mellin_conv_matrix: divergent quadrature (b unbounded)");
    double wm = (m == 0 || m == M - 1) ? 0.5 * h : h;
    w(m) = wm * (bz - c) / two_pi;
    cplx expo(0.5, -z);
    cplx denom(0.5, -z);
    for (int k = 0; k < n; ++k) f(k, m) = (pow_half(k + 1, expo) - pow_half(k, expo)) / denom;
  }
  g += f.conjugate() * w.asDiagonal() * f.transpose();
  if (!g.allFinite()) throw numerical_error("mellin_conv_matrix: divergent quadrature");
  return g;
}

}  // namespace finsec
