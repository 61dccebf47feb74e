#include "finsec/stability.hpp"

#include <algorithm>
#include <cmath>

namespace finsec {

namespace {

double min_sigma_of_value(const Mat& m) {
  Eigen::BDCSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  return sv.size() ? sv(sv.size() - 1) : 0.0;
}

/// pure Laurent detection: one monomial, word = [L(a)] or empty (lambda I)
std::optional<PCSymbol> pure_laurent_symbol(const NormalForm& nf) {
  if (nf.monomials.size() != 1) return std::nullopt;
  const auto& m = nf.monomials.front();
  const int d = nf.d == 0 ? 1 : nf.d;
  if (m.word.empty()) return PCSymbol::constant(m.coeff * eye(d));
  if (m.word.size() == 1 && m.word.front().kind == NfLetter::Kind::L)
    return m.word.front().sym.scaled(m.coeff);
  return std::nullopt;
}

}  // namespace

OperatorEvidence check_operator_invertibility(const OpExpr& a, const StabilityConfig& cfg) {
  OperatorEvidence ev;
  NormalForm nf = normal_form(a);
  ev.op = to_expr(nf);

  if (auto sym = pure_laurent_symbol(nf)) {
    ev.method = "exact-symbol";
    double worst = std::numeric_limits<double>::infinity();
    const int grid = std::max(cfg.laurent_grid, 16);
    for (int k = 0; k < grid; ++k) {
      double theta = two_pi * (k + 0.37) / grid;  // offset keeps jumps off the grid
      if (sym->has_jump_at(theta)) continue;
      worst = std::min(worst, min_sigma_of_value(sym->eval(theta)));
    }
    for (double tau : sym->jump_angles()) {
      auto [plus, minus] = sym->one_sided_limits(tau);
      worst = std::min({worst, min_sigma_of_value(plus), min_sigma_of_value(minus)});
    }
    ev.symbol_min_sigma = worst;
    ev.verdict = worst > cfg.floor_value ? InvVerdict::Invertible : InvVerdict::Singular;
    return ev;
  }

  ev.method = "trend-heuristic";
  ev.sweep = sv_sweep(
      [&](int n) { return assemble(ev.op, n, cfg.margin); },
      cfg.windows);
  Verdict v = verdict_numeric(ev.sweep, cfg.floor_value, cfg.trend_window);
  ev.verdict = v == Verdict::Stable     ? InvVerdict::Invertible
               : v == Verdict::Unstable ? InvVerdict::Singular
                                        : InvVerdict::Inconclusive;
  return ev;
}

Verdict combine_predicted(const StabilityReport& r) {
  std::vector<InvVerdict> all{r.cond_a.verdict, r.cond_b.verdict};
  for (const auto& e : r.cond_c) all.push_back(e.verdict);
  for (const auto& e : r.cond_d) all.push_back(e.verdict);
  bool any_singular = false, any_open = false;
  for (auto v : all) {
    if (v == InvVerdict::Singular) any_singular = true;
    if (v == InvVerdict::Inconclusive) any_open = true;
  }
  if (any_singular) return Verdict::Unstable;
  if (any_open) return Verdict::Inconclusive;
  return Verdict::Stable;
}

StabilityReport stability_report(const SeqExpr& s_in, const StabilityConfig& cfg) {
  StabilityReport r;
  SeqExpr s = push_adjoint(s_in);

  r.cond_a = check_operator_invertibility(map_P(s), cfg);
  r.cond_b = check_operator_invertibility(map_W(s), cfg);

  std::vector<LocalPoint> points = fiber_points(s);
  for (double tau : cfg.extra_taus) {
    LocalPoint p = LocalPoint::from_folded_angle(std::abs(tau) <= pi ? std::abs(tau) : wrap_angle(tau));
    bool dup = false;
    for (const auto& q : points)
      if (q.kind == p.kind && std::abs(q.tau - p.tau) <= 1e-9) dup = true;
    if (!dup) points.push_back(p);
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const LocalPoint& a, const LocalPoint& b) { return a.tau < b.tau; });

  for (const auto& p : points) {
    LocalSymbol ls = local_symbol_seq(s, p);
    LocalEvidence ev = check_local_invertibility(ls, cfg.local_grids, cfg.floor_value, cfg.trend_window);
    ev.point = p;
    if (p.kind == LocalPoint::Kind::Interior)
      r.cond_c.push_back(std::move(ev));
    else
      r.cond_d.push_back(std::move(ev));
  }

  r.predicted = combine_predicted(r);

  r.observed_sweep = sv_sweep([&](int n) { return realize_member(s, n, cfg.margin); }, cfg.observed_ns);
  r.observed = verdict_numeric(r.observed_sweep, cfg.floor_value, cfg.trend_window);

  if (r.predicted == Verdict::Inconclusive || r.observed == Verdict::Inconclusive)
    r.agreement = "n/a";
  else
    r.agreement = (r.predicted == r.observed) ? "yes" : "no";
  return r;
}

}  // namespace finsec
