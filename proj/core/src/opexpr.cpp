#include "finsec/opexpr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace finsec {

// ---------------------------------------------------------------------------
// FiniteRankOp

FiniteRankOp FiniteRankOp::single(int i, int j, const Mat& block) {
  FiniteRankOp k;
  k.d = static_cast<int>(block.rows());
  if (block.rows() != block.cols()) throw validation_error("finite rank: square blocks required");
  k.entries[{i, j}] = block;
  return k;
}

void FiniteRankOp::add_block(int i, int j, const Mat& block) {
  auto it = entries.find({i, j});
  if (it == entries.end())
    entries[{i, j}] = block;
  else
    it->second += block;
  if (entries[{i, j}].cwiseAbs().maxCoeff() == 0.0) entries.erase({i, j});
}

FiniteRankOp FiniteRankOp::adjoint() const {
  FiniteRankOp out;
  out.d = d;
  for (const auto& [ij, m] : entries) out.entries[{ij.second, ij.first}] = m.adjoint();
  return out;
}

FiniteRankOp FiniteRankOp::scaled(cplx lambda) const {
  FiniteRankOp out;
  out.d = d;
  if (lambda == cplx(0.0, 0.0)) return out;
  for (const auto& [ij, m] : entries) out.entries[ij] = lambda * m;
  return out;
}

FiniteRankOp add(const FiniteRankOp& a, const FiniteRankOp& b) {
  if (a.d != b.d && !a.is_zero() && !b.is_zero())
    throw validation_error("finite rank add: dimension mismatch");
  FiniteRankOp out = a;
  out.d = a.is_zero() ? b.d : a.d;
  for (const auto& [ij, m] : b.entries) out.add_block(ij.first, ij.second, m);
  return out;
}

FiniteRankOp mul(const FiniteRankOp& a, const FiniteRankOp& b) {
  if (a.d != b.d) throw validation_error("finite rank mul: dimension mismatch");
  FiniteRankOp out;
  out.d = a.d;
  for (const auto& [ij, ma] : a.entries)
    for (const auto& [kl, mb] : b.entries)
      if (ij.second == kl.first) out.add_block(ij.first, kl.second, ma * mb);
  return out;
}

bool approx_equal(const FiniteRankOp& a, const FiniteRankOp& b, double tol) {
  FiniteRankOp diff = add(a, b.scaled(-1.0));
  for (const auto& [ij, m] : diff.entries) {
    (void)ij;
    if (m.cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

namespace {

FiniteRankOp rank_left_proj(const FiniteRankOp& k) {
  FiniteRankOp out;
  out.d = k.d;
  for (const auto& [ij, m] : k.entries)
    if (ij.first >= 0) out.entries[ij] = m;
  return out;
}

FiniteRankOp rank_right_proj(const FiniteRankOp& k) {
  FiniteRankOp out;
  out.d = k.d;
  for (const auto& [ij, m] : k.entries)
    if (ij.second >= 0) out.entries[ij] = m;
  return out;
}

FiniteRankOp rank_left_flip(const FiniteRankOp& k) {
  FiniteRankOp out;
  out.d = k.d;
  for (const auto& [ij, m] : k.entries) out.entries[{-ij.first - 1, ij.second}] = m;
  return out;
}

FiniteRankOp rank_right_flip(const FiniteRankOp& k) {
  FiniteRankOp out;
  out.d = k.d;
  for (const auto& [ij, m] : k.entries) out.entries[{ij.first, -ij.second - 1}] = m;
  return out;
}

bool is_pure_trig(const PCSymbol& s) { return s.pieces().size() == 1; }

// L(a) K with a a pure trig polynomial
FiniteRankOp rank_left_laurent(const PCSymbol& a, const FiniteRankOp& k) {
  FiniteRankOp out;
  out.d = k.d;
  const auto& modes = a.pieces().front().modes;
  for (const auto& [km, coeff] : modes)
    for (const auto& [ij, m] : k.entries) out.add_block(ij.first + km, ij.second, coeff * m);
  return out;
}

FiniteRankOp rank_right_laurent(const FiniteRankOp& k, const PCSymbol& a) {
  FiniteRankOp out;
  out.d = k.d;
  const auto& modes = a.pieces().front().modes;
  for (const auto& [km, coeff] : modes)
    for (const auto& [ij, m] : k.entries) out.add_block(ij.first, ij.second - km, m * coeff);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// OpExpr construction

OpExpr OpExpr::ident() { return make({Kind::Ident, {}, {}, {1.0, 0.0}, {}}); }
OpExpr OpExpr::proj() { return make({Kind::Proj, {}, {}, {1.0, 0.0}, {}}); }
OpExpr OpExpr::coproj() { return make({Kind::CoProj, {}, {}, {1.0, 0.0}, {}}); }
OpExpr OpExpr::flip() { return make({Kind::Flip, {}, {}, {1.0, 0.0}, {}}); }

OpExpr OpExpr::laurent(PCSymbol sym) {
  Node n{Kind::Laurent, std::move(sym), {}, {1.0, 0.0}, {}};
  return make(std::move(n));
}

OpExpr OpExpr::finite_rank(FiniteRankOp k) {
  Node n{Kind::Rank, {}, std::move(k), {1.0, 0.0}, {}};
  return make(std::move(n));
}

OpExpr OpExpr::sum(std::vector<OpExpr> terms) {
  Node n{Kind::Sum, {}, {}, {1.0, 0.0}, std::move(terms)};
  return make(std::move(n));
}

OpExpr OpExpr::prod(std::vector<OpExpr> factors) {
  if (factors.empty()) return ident();
  Node n{Kind::Prod, {}, {}, {1.0, 0.0}, std::move(factors)};
  return make(std::move(n));
}

OpExpr OpExpr::scale(cplx lambda, OpExpr e) {
  Node n{Kind::Scale, {}, {}, lambda, {std::move(e)}};
  return make(std::move(n));
}

OpExpr OpExpr::adjoint_of(OpExpr e) {
  Node n{Kind::Adjoint, {}, {}, {1.0, 0.0}, {std::move(e)}};
  return make(std::move(n));
}

int OpExpr::dim() const {
  int d = 0;
  auto join = [&](int other) {
    if (other == 0) return;
    if (d == 0)
      d = other;
    else if (d != other)
      throw validation_error("OpExpr: mixed block dimensions");
  };
  switch (kind()) {
    case Kind::Laurent:
      join(symbol().dim());
      break;
    case Kind::Rank:
      if (!rank_op().is_zero()) join(rank_op().d);
      break;
    default:
      for (const auto& k : children()) join(k.dim());
      break;
  }
  return d;
}

OpExpr adjoint(const OpExpr& e) {
  using K = OpExpr::Kind;
  switch (e.kind()) {
    case K::Ident:
    case K::Proj:
    case K::CoProj:
    case K::Flip:
      return e;  // self-adjoint generators
    case K::Laurent:
      return OpExpr::laurent(e.symbol().adjoint());
    case K::Rank:
      return OpExpr::finite_rank(e.rank_op().adjoint());
    case K::Sum: {
      std::vector<OpExpr> kids;
      for (const auto& k : e.children()) kids.push_back(adjoint(k));
      return OpExpr::sum(std::move(kids));
    }
    case K::Prod: {
      std::vector<OpExpr> kids;
      for (auto it = e.children().rbegin(); it != e.children().rend(); ++it)
        kids.push_back(adjoint(*it));
      return OpExpr::prod(std::move(kids));
    }
    case K::Scale:
      return OpExpr::scale(std::conj(e.scale_factor()), adjoint(e.children().front()));
    case K::Adjoint:
      return e.children().front();
  }
  throw validation_error("adjoint: unknown node");
}

// ---------------------------------------------------------------------------
// Normalization.  Q is eliminated up front (Q = I - P) so that the reduced
// words form a linear basis; otherwise P J + Q J and J would normalize
// differently.

namespace {

using Word = std::vector<NfLetter>;

NfLetter letter_p() { return {NfLetter::Kind::P, {}, {}}; }
NfLetter letter_j() { return {NfLetter::Kind::J, {}, {}}; }
NfLetter letter_l(PCSymbol s) { return {NfLetter::Kind::L, std::move(s), {}}; }
NfLetter letter_r(FiniteRankOp k) { return {NfLetter::Kind::R, {}, std::move(k)}; }

struct RawMonomial {
  cplx coeff{1.0, 0.0};
  Word word;
};

void expand(const OpExpr& e, std::vector<RawMonomial>& out, cplx coeff, Word prefix);

void expand_product(const std::vector<OpExpr>& factors, size_t idx, std::vector<RawMonomial>& out,
                    cplx coeff, Word prefix) {
  if (idx == factors.size()) {
    out.push_back({coeff, std::move(prefix)});
    return;
  }
  std::vector<RawMonomial> heads;
  expand(factors[idx], heads, {1.0, 0.0}, {});
  for (auto& h : heads) {
    Word w = prefix;
    w.insert(w.end(), h.word.begin(), h.word.end());
    expand_product(factors, idx + 1, out, coeff * h.coeff, std::move(w));
  }
}

void expand(const OpExpr& e, std::vector<RawMonomial>& out, cplx coeff, Word prefix) {
  using K = OpExpr::Kind;
  switch (e.kind()) {
    case K::Ident:
      out.push_back({coeff, std::move(prefix)});
      return;
    case K::Proj:
      prefix.push_back(letter_p());
      out.push_back({coeff, std::move(prefix)});
      return;
    case K::CoProj: {  // Q = I - P
      Word with_p = prefix;
      with_p.push_back(letter_p());
      out.push_back({coeff, std::move(prefix)});
      out.push_back({-coeff, std::move(with_p)});
      return;
    }
    case K::Flip:
      prefix.push_back(letter_j());
      out.push_back({coeff, std::move(prefix)});
      return;
    case K::Laurent:
      prefix.push_back(letter_l(e.symbol()));
      out.push_back({coeff, std::move(prefix)});
      return;
    case K::Rank:
      prefix.push_back(letter_r(e.rank_op()));
      out.push_back({coeff, std::move(prefix)});
      return;
    case K::Sum:
      for (const auto& k : e.children()) expand(k, out, coeff, prefix);
      return;
    case K::Scale:
      expand(e.children().front(), out, coeff * e.scale_factor(), std::move(prefix));
      return;
    case K::Adjoint:
      expand(adjoint(e.children().front()), out, coeff, std::move(prefix));
      return;
    case K::Prod:
      expand_product(e.children(), 0, out, coeff, std::move(prefix));
      return;
  }
}

bool is_const_scalar(const PCSymbol& s, cplx& lambda) {
  if (s.pieces().size() != 1) return false;
  const auto& modes = s.pieces().front().modes;
  if (modes.empty()) {
    lambda = 0.0;
    return true;
  }
  if (modes.size() != 1 || modes.begin()->first != 0) return false;
  return is_scalar_matrix(modes.begin()->second, lambda);
}

// single-monomial reductions on the last two letters (no J involved)
bool reduce_tail(Word& w) {
  if (w.size() < 2) return false;
  NfLetter& y = w[w.size() - 2];
  NfLetter& x = w[w.size() - 1];
  using LK = NfLetter::Kind;

  if (y.kind == LK::L && x.kind == LK::L) {
    y.sym = mul(y.sym, x.sym);
    w.pop_back();
    return true;
  }
  if (y.kind == LK::P && x.kind == LK::P) {
    w.pop_back();
    return true;
  }
  if (y.kind == LK::R) {
    if (x.kind == LK::P) {
      y.fr = rank_right_proj(y.fr);
      w.pop_back();
      return true;
    }
    if (x.kind == LK::J) {
      y.fr = rank_right_flip(y.fr);
      w.pop_back();
      return true;
    }
    if (x.kind == LK::R) {
      y.fr = mul(y.fr, x.fr);
      w.pop_back();
      return true;
    }
    if (x.kind == LK::L && is_pure_trig(x.sym)) {
      y.fr = rank_right_laurent(y.fr, x.sym);
      w.pop_back();
      return true;
    }
  }
  if (x.kind == LK::R) {
    if (y.kind == LK::P) {
      x.fr = rank_left_proj(x.fr);
      w.erase(w.end() - 2);
      return true;
    }
    if (y.kind == LK::L && is_pure_trig(y.sym)) {
      x.fr = rank_left_laurent(y.sym, x.fr);
      w.erase(w.end() - 2);
      return true;
    }
  }
  return false;
}

constexpr double kCoeffDrop = 1e-15;

// fully reduces one raw monomial; emits the resulting (possibly several) words
void reduce_monomial(RawMonomial start, std::vector<RawMonomial>& out) {
  std::vector<RawMonomial> work{std::move(start)};
  while (!work.empty()) {
    RawMonomial m = std::move(work.back());
    work.pop_back();
    if (std::abs(m.coeff) <= kCoeffDrop) continue;

    // leftmost flip followed by another letter
    size_t ji = m.word.size();
    for (size_t i = 0; i + 1 < m.word.size(); ++i) {
      if (m.word[i].kind == NfLetter::Kind::J) {
        ji = i;
        break;
      }
    }
    if (ji < m.word.size()) {
      const NfLetter& x = m.word[ji + 1];
      using LK = NfLetter::Kind;
      switch (x.kind) {
        case LK::J: {  // J J = I
          m.word.erase(m.word.begin() + ji, m.word.begin() + ji + 2);
          work.push_back(std::move(m));
          break;
        }
        case LK::L: {  // J L(a) = L(~a) J
          PCSymbol flipped = x.sym.flipped();
          m.word[ji] = letter_l(std::move(flipped));
          m.word[ji + 1] = letter_j();
          work.push_back(std::move(m));
          break;
        }
        case LK::P: {  // J P = (I - P) J = J - P J
          RawMonomial keep = m;
          keep.word.erase(keep.word.begin() + ji + 1);
          work.push_back(std::move(keep));
          RawMonomial swapped = std::move(m);
          swapped.coeff = -swapped.coeff;
          swapped.word[ji] = letter_p();
          swapped.word[ji + 1] = letter_j();
          work.push_back(std::move(swapped));
          break;
        }
        case LK::R: {  // J K is again finite rank
          m.word[ji + 1] = letter_r(rank_left_flip(x.fr));
          m.word.erase(m.word.begin() + ji);
          work.push_back(std::move(m));
          break;
        }
        default:
          throw validation_error("normal_form: unexpected letter");
      }
      continue;
    }

    // no internal flip left: collapse adjacent letters and extract constants
    Word cleaned;
    bool dead = false;
    for (auto& letter : m.word) {
      cplx lambda;
      if (letter.kind == NfLetter::Kind::L && is_const_scalar(letter.sym, lambda)) {
        m.coeff *= lambda;
        if (std::abs(m.coeff) <= kCoeffDrop) {
          dead = true;
          break;
        }
        continue;
      }
      if (letter.kind == NfLetter::Kind::R && letter.fr.is_zero()) {
        dead = true;
        break;
      }
      cleaned.push_back(std::move(letter));
      while (reduce_tail(cleaned)) {
      }
      if (!cleaned.empty() && cleaned.back().kind == NfLetter::Kind::R &&
          cleaned.back().fr.is_zero()) {
        dead = true;
        break;
      }
    }
    if (dead || std::abs(m.coeff) <= kCoeffDrop) continue;

    // collapsing may have produced a new constant Laurent; rerun if so
    bool requeue = false;
    for (const auto& letter : cleaned) {
      cplx lambda;
      if (letter.kind == NfLetter::Kind::L && is_const_scalar(letter.sym, lambda)) requeue = true;
    }
    m.word = std::move(cleaned);
    if (requeue) {
      work.push_back(std::move(m));
    } else {
      out.push_back(std::move(m));
    }
  }
}

bool letters_equal(const NfLetter& a, const NfLetter& b, double tol) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NfLetter::Kind::L:
      return approx_equal(a.sym, b.sym, tol);
    case NfLetter::Kind::R:
      return approx_equal(a.fr, b.fr, tol);
    default:
      return true;
  }
}

bool words_equal(const Word& a, const Word& b, double tol) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!letters_equal(a[i], b[i], tol)) return false;
  return true;
}

// words identical except possibly for a leading Laurent letter
bool mergeable_tails(const Word& a, const Word& b, double tol) {
  bool la = !a.empty() && a.front().kind == NfLetter::Kind::L;
  bool lb = !b.empty() && b.front().kind == NfLetter::Kind::L;
  auto ta = a.begin() + (la ? 1 : 0);
  auto tb = b.begin() + (lb ? 1 : 0);
  if (std::distance(ta, a.end()) != std::distance(tb, b.end())) return false;
  for (; ta != a.end(); ++ta, ++tb)
    if (!letters_equal(*ta, *tb, tol)) return false;
  return true;
}

std::string word_key(const Word& w) {
  std::ostringstream os;
  os << w.size() << ':';
  for (const auto& letter : w) {
    switch (letter.kind) {
      case NfLetter::Kind::P:
        os << 'P';
        break;
      case NfLetter::Kind::Q:
        os << 'Q';
        break;
      case NfLetter::Kind::J:
        os << 'J';
        break;
      case NfLetter::Kind::L:
        os << "L(" << letter.sym.pieces().size() << ')';
        break;
      case NfLetter::Kind::R:
        os << "R(" << letter.fr.entries.size() << ')';
        break;
    }
  }
  return os.str();
}

}  // namespace

NormalForm normal_form(const OpExpr& e) {
  NormalForm nf;
  nf.d = e.dim();
  const int d_eff = nf.d == 0 ? 1 : nf.d;

  std::vector<RawMonomial> raw;
  expand(e, raw, {1.0, 0.0}, {});

  std::vector<RawMonomial> reduced;
  for (auto& m : raw) reduce_monomial(std::move(m), reduced);

  // combine identical words
  std::vector<RawMonomial> combined;
  for (auto& m : reduced) {
    bool merged = false;
    for (auto& c : combined) {
      if (words_equal(c.word, m.word, 1e-12)) {
        c.coeff += m.coeff;
        merged = true;
        break;
      }
    }
    if (!merged) combined.push_back(std::move(m));
  }

  // merge monomials differing only in a leading Laurent; bare finite-rank
  // words merge additively
  std::vector<RawMonomial> groups;
  for (auto& m : combined) {
    if (std::abs(m.coeff) <= kCoeffDrop) continue;
    bool merged = false;
    for (auto& g : groups) {
      if (g.word.size() == 1 && m.word.size() == 1 && g.word.front().kind == NfLetter::Kind::R &&
          m.word.front().kind == NfLetter::Kind::R) {
        FiniteRankOp total = add(g.word.front().fr.scaled(g.coeff), m.word.front().fr.scaled(m.coeff));
        g.word.front().fr = std::move(total);
        g.coeff = {1.0, 0.0};
        merged = true;
        break;
      }
      bool g_has_l = !g.word.empty() && g.word.front().kind == NfLetter::Kind::L;
      bool m_has_l = !m.word.empty() && m.word.front().kind == NfLetter::Kind::L;
      if (!g_has_l && !m_has_l) continue;  // identical words were already merged
      if (!mergeable_tails(g.word, m.word, 1e-12)) continue;
      PCSymbol gs = g_has_l ? g.word.front().sym.scaled(g.coeff)
                            : PCSymbol::constant(g.coeff * eye(d_eff));
      PCSymbol ms = m_has_l ? m.word.front().sym.scaled(m.coeff)
                            : PCSymbol::constant(m.coeff * eye(d_eff));
      if (gs.dim() != ms.dim()) continue;
      PCSymbol total = add(gs, ms);
      Word tail(g.word.begin() + (g_has_l ? 1 : 0), g.word.end());
      g.word.clear();
      g.word.push_back(letter_l(total));
      g.word.insert(g.word.end(), tail.begin(), tail.end());
      g.coeff = {1.0, 0.0};
      merged = true;
      break;
    }
    if (!merged) groups.push_back(std::move(m));
  }

  // final cleanup: re-extract constant leads, drop vanished monomials
  std::vector<NfMonomial> monos;
  for (auto& g : groups) {
    std::vector<RawMonomial> finals;
    reduce_monomial(std::move(g), finals);
    for (auto& f : finals) {
      if (std::abs(f.coeff) <= kCoeffDrop) continue;
      if (!f.word.empty() && f.word.front().kind == NfLetter::Kind::L &&
          approx_equal(f.word.front().sym, PCSymbol::zero(f.word.front().sym.dim()), 1e-14))
        continue;
      if (f.word.size() == 1 && f.word.front().kind == NfLetter::Kind::R &&
          f.word.front().fr.is_zero())
        continue;
      monos.push_back({f.coeff, std::move(f.word)});
    }
  }

  // re-combine (reduce_monomial of merged groups can resurface equal words)
  std::vector<NfMonomial> final_monos;
  for (auto& m : monos) {
    bool merged = false;
    for (auto& c : final_monos) {
      if (words_equal(c.word, m.word, 1e-12)) {
        c.coeff += m.coeff;
        merged = true;
        break;
      }
    }
    if (!merged) final_monos.push_back(std::move(m));
  }
  final_monos.erase(std::remove_if(final_monos.begin(), final_monos.end(),
                                   [](const NfMonomial& m) { return std::abs(m.coeff) <= kCoeffDrop; }),
                    final_monos.end());

  std::stable_sort(final_monos.begin(), final_monos.end(),
                   [](const NfMonomial& a, const NfMonomial& b) {
                     return word_key(a.word) < word_key(b.word);
                   });
  nf.monomials = std::move(final_monos);
  return nf;
}

OpExpr to_expr(const NormalForm& nf) {
  if (nf.monomials.empty()) return OpExpr::scale(0.0, OpExpr::ident());
  std::vector<OpExpr> terms;
  for (const auto& m : nf.monomials) {
    std::vector<OpExpr> factors;
    for (const auto& letter : m.word) {
      switch (letter.kind) {
        case NfLetter::Kind::P:
          factors.push_back(OpExpr::proj());
          break;
        case NfLetter::Kind::Q:
          factors.push_back(OpExpr::coproj());
          break;
        case NfLetter::Kind::J:
          factors.push_back(OpExpr::flip());
          break;
        case NfLetter::Kind::L:
          factors.push_back(OpExpr::laurent(letter.sym));
          break;
        case NfLetter::Kind::R:
          factors.push_back(OpExpr::finite_rank(letter.fr));
          break;
      }
    }
    OpExpr body = factors.empty() ? OpExpr::ident()
                 : factors.size() == 1 ? factors.front()
                                       : OpExpr::prod(std::move(factors));
    terms.push_back(m.coeff == cplx(1.0, 0.0) ? body : OpExpr::scale(m.coeff, body));
  }
  return terms.size() == 1 ? terms.front() : OpExpr::sum(std::move(terms));
}

OpExpr normalize(const OpExpr& e) { return to_expr(normal_form(e)); }

bool approx_equal(const NormalForm& a, const NormalForm& b, double tol) {
  if (a.monomials.size() != b.monomials.size()) return false;
  std::vector<bool> used(b.monomials.size(), false);
  for (const auto& ma : a.monomials) {
    bool found = false;
    for (size_t i = 0; i < b.monomials.size(); ++i) {
      if (used[i]) continue;
      const auto& mb = b.monomials[i];
      if (std::abs(ma.coeff - mb.coeff) > tol) continue;
      if (!words_equal(ma.word, mb.word, tol)) continue;
      used[i] = true;
      found = true;
      break;
    }
    if (!found) return false;
  }
  return true;
}

bool equivalent(const OpExpr& a, const OpExpr& b, double tol) {
  return approx_equal(normal_form(a), normal_form(b), tol);
}

std::optional<CanonicalForm> canonical_form(const OpExpr& e) {
  NormalForm nf = normal_form(e);
  const int d = nf.d == 0 ? 1 : nf.d;
  CanonicalForm cf{PCSymbol::zero(d), PCSymbol::zero(d), PCSymbol::zero(d), PCSymbol::zero(d),
                   FiniteRankOp::zero(d)};
  using LK = NfLetter::Kind;

  for (const auto& m : nf.monomials) {
    const Word& w = m.word;
    bool lead = !w.empty() && w.front().kind == LK::L;
    std::vector<LK> tail;
    for (size_t i = lead ? 1 : 0; i < w.size(); ++i) tail.push_back(w[i].kind);

    auto lead_sym = [&]() {
      return lead ? w.front().sym.scaled(m.coeff) : PCSymbol::constant(m.coeff * eye(d));
    };

    if (!lead && w.size() == 1 && w.front().kind == LK::R) {
      cf.k = add(cf.k, w.front().fr.scaled(m.coeff));
      continue;
    }
    if (tail.empty()) {             // L(e) or lambda I
      cf.a = add(cf.a, lead_sym());  // both halves
      cf.b = add(cf.b, lead_sym());
      continue;
    }
    if (tail == std::vector<LK>{LK::P}) {
      cf.a = add(cf.a, lead_sym());
      continue;
    }
    if (tail == std::vector<LK>{LK::J}) {  // L(c) J = L(c) J P + L(c) J Q
      cf.c = add(cf.c, lead_sym());
      cf.d = add(cf.d, lead_sym());
      continue;
    }
    if (tail == std::vector<LK>{LK::P, LK::J}) {  // P J = J Q
      cf.d = add(cf.d, lead_sym());
      continue;
    }
    return std::nullopt;
  }

  // the plain-Laurent contribution entered both a and b; the P-word carries
  // a - b, so b holds the Q part already.  Same bookkeeping for c/d via P J.
  return cf;
}

OpExpr from_canonical(const CanonicalForm& cf) {
  std::vector<OpExpr> terms;
  terms.push_back(OpExpr::prod({OpExpr::laurent(cf.a), OpExpr::proj()}));
  terms.push_back(OpExpr::prod({OpExpr::laurent(cf.b), OpExpr::coproj()}));
  terms.push_back(OpExpr::prod({OpExpr::laurent(cf.c), OpExpr::flip(), OpExpr::proj()}));
  terms.push_back(OpExpr::prod({OpExpr::laurent(cf.d), OpExpr::flip(), OpExpr::coproj()}));
  if (!cf.k.is_zero()) terms.push_back(OpExpr::finite_rank(cf.k));
  return OpExpr::sum(std::move(terms));
}

}  // namespace finsec
