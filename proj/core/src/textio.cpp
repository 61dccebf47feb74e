#include "finsec/textio.hpp"

#include <json.hpp>
#include <ostream>
#include <sstream>

namespace finsec {

using nlohmann::json;

// ---------------------------------------------------------------------------
// symbol literals

namespace {

cplx parse_cplx(const json& j) {
  if (j.is_number()) return cplx(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return cplx(j[0].get<double>(), j[1].get<double>());
  throw parse_error("complex literal must be [re, im]");
}

Mat parse_matrix(const json& j) {
  if (j.is_number() || (j.is_array() && j.size() == 2 && j[0].is_number())) {
    Mat m(1, 1);
    m(0, 0) = parse_cplx(j);
    return m;
  }
  if (!j.is_array() || j.empty()) throw parse_error("matrix literal must be a nested array");
  const int d = static_cast<int>(j.size());
  Mat m(d, d);
  for (int i = 0; i < d; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != d)
      throw parse_error("matrix literal must be square");
    for (int k = 0; k < d; ++k) m(i, k) = parse_cplx(j[i][k]);
  }
  return m;
}

json cplx_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < m.cols(); ++k) row.push_back(cplx_to_json(m(i, k)));
    rows.push_back(row);
  }
  return rows;
}

PCSymbol symbol_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw parse_error("symbol literal must be a list of pieces");
  int d = -1;
  std::vector<ArcPiece> pieces;
  for (const auto& pj : j) {
    if (!pj.contains("arc")) throw parse_error("piece needs an 'arc' field");
    const auto& arc = pj["arc"];
    if (!arc.is_array() || arc.size() != 2) throw parse_error("'arc' must be [alpha, beta]");
    ArcPiece p;
    p.alpha = arc[0].get<double>();
    p.beta = arc[1].get<double>();
    if (pj.contains("modes")) {
      for (const auto& [key, mj] : pj["modes"].items()) {
        int k = std::stoi(key);
        Mat m = parse_matrix(mj);
        if (d < 0) d = static_cast<int>(m.rows());
        if (m.rows() != d) throw parse_error("symbol literal: inconsistent block dimension");
        p.modes[k] = std::move(m);
      }
    }
    pieces.push_back(std::move(p));
  }
  if (d < 0) d = 1;
  return PCSymbol::from_pieces(d, std::move(pieces));
}

json symbol_to_json(const PCSymbol& s) {
  json out = json::array();
  for (const auto& p : s.pieces()) {
    json pj;
    pj["arc"] = json::array({p.alpha, p.beta});
    json modes = json::object();
    for (const auto& [k, m] : p.modes) modes[std::to_string(k)] = matrix_to_json(m);
    pj["modes"] = std::move(modes);
    out.push_back(std::move(pj));
  }
  return out;
}

}  // namespace

PCSymbol parse_symbol_literal(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw parse_error(std::string("symbol literal: ") + e.what());
  }
  return symbol_from_json(j);
}

std::string symbol_literal(const PCSymbol& s) { return symbol_to_json(s).dump(); }

// ---------------------------------------------------------------------------
// s-expression tokenizer

namespace {

struct Token {
  enum class Type { LParen, RParen, Atom, Str, Blob } type;
  std::string text;
};

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '(') {
      out.push_back({Token::Type::LParen, "("});
      ++i;
      continue;
    }
    if (c == ')') {
      out.push_back({Token::Type::RParen, ")"});
      ++i;
      continue;
    }
    if (c == '"') {
      size_t j = text.find('"', i + 1);
      if (j == std::string::npos) throw parse_error("unterminated string");
      out.push_back({Token::Type::Str, text.substr(i + 1, j - i - 1)});
      i = j + 1;
      continue;
    }
    if (c == '[' || c == '{') {  // balanced JSON blob
      int depth = 0;
      size_t j = i;
      for (; j < text.size(); ++j) {
        if (text[j] == '[' || text[j] == '{') ++depth;
        if (text[j] == ']' || text[j] == '}') {
          --depth;
          if (depth == 0) break;
        }
      }
      if (depth != 0) throw parse_error("unbalanced bracket literal");
      out.push_back({Token::Type::Blob, text.substr(i, j - i + 1)});
      i = j + 1;
      continue;
    }
    size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) && text[j] != '(' &&
           text[j] != ')')
      ++j;
    out.push_back({Token::Type::Atom, text.substr(i, j - i)});
    i = j;
  }
  return out;
}

struct SNode {
  // either an atom/string/blob or a list
  Token token{Token::Type::Atom, ""};
  bool is_list = false;
  std::vector<SNode> items;
};

SNode parse_snode(const std::vector<Token>& toks, size_t& pos) {
  if (pos >= toks.size()) throw parse_error("unexpected end of expression");
  const Token& t = toks[pos];
  if (t.type == Token::Type::LParen) {
    ++pos;
    SNode list;
    list.is_list = true;
    while (pos < toks.size() && toks[pos].type != Token::Type::RParen)
      list.items.push_back(parse_snode(toks, pos));
    if (pos >= toks.size()) throw parse_error("missing ')'");
    ++pos;
    return list;
  }
  if (t.type == Token::Type::RParen) throw parse_error("unexpected ')'");
  ++pos;
  SNode leaf;
  leaf.token = t;
  return leaf;
}

SNode parse_sexpr(const std::string& text) {
  auto toks = tokenize(text);
  size_t pos = 0;
  SNode n = parse_snode(toks, pos);
  if (pos != toks.size()) throw parse_error("trailing tokens after expression");
  return n;
}

cplx parse_cplx_blob(const SNode& n) {
  if (n.is_list || n.token.type != Token::Type::Blob) throw parse_error("expected [re, im]");
  return parse_cplx(json::parse(n.token.text));
}

FiniteRankOp parse_finite_rank(const SNode& n) {
  if (n.is_list || n.token.type != Token::Type::Blob)
    throw parse_error("finiterank expects [[i, j, matrix], ...]");
  json j = json::parse(n.token.text);
  if (!j.is_array()) throw parse_error("finiterank literal must be a list");
  FiniteRankOp k;
  bool first = true;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3) throw parse_error("finiterank entry must be [i, j, matrix]");
    Mat m = parse_matrix(e[2]);
    if (first) {
      k.d = static_cast<int>(m.rows());
      first = false;
    }
    k.add_block(e[0].get<int>(), e[1].get<int>(), m);
  }
  return k;
}

OpExpr parse_op_node(const SNode& n, const SymbolTable& symbols);

std::vector<OpExpr> parse_op_list(const SNode& n, size_t from, const SymbolTable& symbols) {
  std::vector<OpExpr> out;
  for (size_t i = from; i < n.items.size(); ++i) out.push_back(parse_op_node(n.items[i], symbols));
  return out;
}

OpExpr parse_op_node(const SNode& n, const SymbolTable& symbols) {
  if (!n.is_list) {
    if (n.token.type == Token::Type::Atom) {
      if (n.token.text == "I") return OpExpr::ident();
      if (n.token.text == "P") return OpExpr::proj();
      if (n.token.text == "Q") return OpExpr::coproj();
      if (n.token.text == "J") return OpExpr::flip();
      throw parse_error("unknown operator atom '" + n.token.text + "'");
    }
    throw parse_error("expected an operator expression");
  }
  if (n.items.empty() || n.items.front().is_list) throw parse_error("expected an operator form");
  const std::string& head = n.items.front().token.text;
  if (head == "laurent") {
    if (n.items.size() != 2) throw parse_error("(laurent <symbol>)");
    const SNode& arg = n.items[1];
    if (!arg.is_list && arg.token.type == Token::Type::Str) {
      auto it = symbols.find(arg.token.text);
      if (it == symbols.end()) throw validation_error("unresolved symbol name '" + arg.token.text + "'");
      return OpExpr::laurent(it->second);
    }
    if (!arg.is_list && arg.token.type == Token::Type::Blob)
      return OpExpr::laurent(symbol_from_json(json::parse(arg.token.text)));
    throw parse_error("(laurent ...) expects a name or an inline literal");
  }
  if (head == "finiterank") {
    if (n.items.size() != 2) throw parse_error("(finiterank <entries>)");
    return OpExpr::finite_rank(parse_finite_rank(n.items[1]));
  }
  if (head == "sum") return OpExpr::sum(parse_op_list(n, 1, symbols));
  if (head == "prod") return OpExpr::prod(parse_op_list(n, 1, symbols));
  if (head == "scale") {
    if (n.items.size() != 3) throw parse_error("(scale [re,im] e)");
    return OpExpr::scale(parse_cplx_blob(n.items[1]), parse_op_node(n.items[2], symbols));
  }
  if (head == "adjoint") {
    if (n.items.size() != 2) throw parse_error("(adjoint e)");
    return OpExpr::adjoint_of(parse_op_node(n.items[1], symbols));
  }
  throw parse_error("unknown operator form '" + head + "'");
}

SeqExpr parse_seq_node(const SNode& n, const SymbolTable& symbols, const OperatorTable& operators) {
  if (!n.is_list) throw parse_error("expected a sequence expression");
  if (n.items.empty() || n.items.front().is_list) throw parse_error("expected a sequence form");
  const std::string& head = n.items.front().token.text;
  if (head == "section") {
    if (n.items.size() != 2) throw parse_error("(section <operator>|\"name\")");
    const SNode& arg = n.items[1];
    if (!arg.is_list && arg.token.type == Token::Type::Str) {
      auto it = operators.find(arg.token.text);
      if (it == operators.end())
        throw validation_error("unresolved operator name '" + arg.token.text + "'");
      return SeqExpr::section(it->second);
    }
    return SeqExpr::section(parse_op_node(arg, symbols));
  }
  if (head == "jideal") {
    if (n.items.size() != 3) throw parse_error("(jideal <K> <L>)");
    return SeqExpr::j_ideal(parse_finite_rank(n.items[1]), parse_finite_rank(n.items[2]));
  }
  if (head == "sum" || head == "prod") {
    std::vector<SeqExpr> kids;
    for (size_t i = 1; i < n.items.size(); ++i)
      kids.push_back(parse_seq_node(n.items[i], symbols, operators));
    return head == "sum" ? SeqExpr::sum(std::move(kids)) : SeqExpr::prod(std::move(kids));
  }
  if (head == "scale") {
    if (n.items.size() != 3) throw parse_error("(scale [re,im] s)");
    return SeqExpr::scale(parse_cplx_blob(n.items[1]), parse_seq_node(n.items[2], symbols, operators));
  }
  if (head == "adjoint") {
    if (n.items.size() != 2) throw parse_error("(adjoint s)");
    return SeqExpr::adjoint_of(parse_seq_node(n.items[1], symbols, operators));
  }
  throw parse_error("unknown sequence form '" + head + "'");
}

}  // namespace

OpExpr parse_op_expr(const std::string& text, const SymbolTable& symbols) {
  return parse_op_node(parse_sexpr(text), symbols);
}

SeqExpr parse_seq_expr(const std::string& text, const SymbolTable& symbols,
                       const OperatorTable& operators) {
  return parse_seq_node(parse_sexpr(text), symbols, operators);
}

// ---------------------------------------------------------------------------
// printing

namespace {

std::string laurent_name(const PCSymbol& s, const SymbolTable* names) {
  if (names) {
    for (const auto& [name, sym] : *names) {
      if (sym.dim() == s.dim() && approx_equal(sym, s, 1e-12)) return "\"" + name + "\"";
    }
  }
  return symbol_literal(s);
}

std::string finite_rank_literal(const FiniteRankOp& k) {
  json out = json::array();
  for (const auto& [ij, m] : k.entries)
    out.push_back(json::array({ij.first, ij.second, matrix_to_json(m)}));
  return out.dump();
}

void print_op_rec(const OpExpr& e, std::ostream& os, const SymbolTable* names) {
  using K = OpExpr::Kind;
  switch (e.kind()) {
    case K::Ident:
      os << "I";
      return;
    case K::Proj:
      os << "P";
      return;
    case K::CoProj:
      os << "Q";
      return;
    case K::Flip:
      os << "J";
      return;
    case K::Laurent:
      os << "(laurent " << laurent_name(e.symbol(), names) << ")";
      return;
    case K::Rank:
      os << "(finiterank " << finite_rank_literal(e.rank_op()) << ")";
      return;
    case K::Sum:
    case K::Prod:
      os << (e.kind() == K::Sum ? "(sum" : "(prod");
      for (const auto& c : e.children()) {
        os << ' ';
        print_op_rec(c, os, names);
      }
      os << ')';
      return;
    case K::Scale:
      os << "(scale " << fmt_cplx(e.scale_factor()) << ' ';
      print_op_rec(e.children().front(), os, names);
      os << ')';
      return;
    case K::Adjoint:
      os << "(adjoint ";
      print_op_rec(e.children().front(), os, names);
      os << ')';
      return;
  }
}

void print_seq_rec(const SeqExpr& s, std::ostream& os, const SymbolTable* names) {
  using K = SeqExpr::Kind;
  switch (s.kind()) {
    case K::Section:
      os << "(section ";
      print_op_rec(s.op(), os, names);
      os << ')';
      return;
    case K::JIdeal:
      os << "(jideal " << finite_rank_literal(s.ideal_k()) << ' ' << finite_rank_literal(s.ideal_l())
         << ')';
      return;
    case K::Sum:
    case K::Prod:
      os << (s.kind() == K::Sum ? "(sum" : "(prod");
      for (const auto& c : s.children()) {
        os << ' ';
        print_seq_rec(c, os, names);
      }
      os << ')';
      return;
    case K::Scale:
      os << "(scale " << fmt_cplx(s.scale_factor()) << ' ';
      print_seq_rec(s.children().front(), os, names);
      os << ')';
      return;
    case K::Adjoint:
      os << "(adjoint ";
      print_seq_rec(s.children().front(), os, names);
      os << ')';
      return;
  }
}

}  // namespace

std::string print_op_expr(const OpExpr& e, const SymbolTable* names) {
  std::ostringstream os;
  print_op_rec(e, os, names);
  return os.str();
}

std::string print_seq_expr(const SeqExpr& s, const SymbolTable* names) {
  std::ostringstream os;
  print_seq_rec(s, os, names);
  return os.str();
}

// ---------------------------------------------------------------------------
// CSV / report

void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
  os << "n,sigma_min,cond\n";
  for (const auto& r : sweep.rows) {
    os << r.n << ',' << fmt_g17(r.sigma_min) << ',';
    if (std::isinf(r.cond))
      os << "inf";
    else
      os << fmt_g17(r.cond);
    os << '\n';
  }
}

void write_residual_csv(std::ostream& os, const std::vector<std::pair<int, double>>& rows) {
  os << "n,residual\n";
  for (const auto& [n, r] : rows) os << n << ',' << fmt_g17(r) << '\n';
}

void write_sigma_csv(std::ostream& os, const std::vector<std::pair<int, double>>& rows) {
  os << "cells,sigma_min\n";
  for (const auto& [n, r] : rows) os << n << ',' << fmt_g17(r) << '\n';
}

void write_matrix_csv(std::ostream& os, const Mat& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << fmt_g17(m(i, j).real()) << ',' << fmt_g17(m(i, j).imag());
    }
    os << '\n';
  }
}

namespace {

void write_operator_evidence(std::ostream& os, const char* tag, const OperatorEvidence& ev,
                             const SymbolTable* names) {
  os << tag << ".operator = " << print_op_expr(ev.op, names) << '\n';
  os << tag << ".method = " << ev.method << '\n';
  os << tag << ".verdict = " << inv_verdict_name(ev.verdict) << '\n';
  if (ev.method == "exact-symbol") {
    os << tag << ".symbol_min_sigma = " << fmt_g17(ev.symbol_min_sigma) << '\n';
  } else {
    for (const auto& r : ev.sweep.rows)
      os << tag << ".sigma[" << r.n << "] = " << fmt_g17(r.sigma_min) << '\n';
  }
}

void write_local_evidence(std::ostream& os, const char* tag, const LocalEvidence& ev) {
  os << tag << ".point = " << ev.point.label() << '\n';
  os << tag << ".symbol = " << ev.symbol_text << '\n';
  os << tag << ".method = discretized-trend\n";
  os << tag << ".verdict = " << inv_verdict_name(ev.verdict) << '\n';
  for (const auto& [cells, smin] : ev.sigma)
    os << tag << ".sigma[" << cells << "] = " << fmt_g17(smin) << '\n';
}

}  // namespace

void write_report(std::ostream& os, const StabilityReport& r, const SymbolTable* names) {
  os << "report.version = 1\n";
  write_operator_evidence(os, "cond_a", r.cond_a, names);
  write_operator_evidence(os, "cond_b", r.cond_b, names);
  for (size_t i = 0; i < r.cond_c.size(); ++i)
    write_local_evidence(os, ("cond_c[" + std::to_string(i) + "]").c_str(), r.cond_c[i]);
  if (r.cond_c.empty()) os << "cond_c = vacuous (no interior fiber points)\n";
  for (size_t i = 0; i < r.cond_d.size(); ++i)
    write_local_evidence(os, ("cond_d[" + std::to_string(i) + "]").c_str(), r.cond_d[i]);
  if (r.cond_d.empty()) os << "cond_d = vacuous (no boundary fiber points)\n";
  os << "predicted = " << verdict_name(r.predicted) << '\n';
  for (const auto& row : r.observed_sweep.rows)
    os << "observed.sigma[" << row.n << "] = " << fmt_g17(row.sigma_min) << '\n';
  os << "observed = " << verdict_name(r.observed) << '\n';
  os << "agreement = " << r.agreement << '\n';
}

}  // namespace finsec
