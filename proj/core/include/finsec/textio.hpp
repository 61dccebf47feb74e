#ifndef FINSEC_TEXTIO_HPP
#define FINSEC_TEXTIO_HPP

#include <iosfwd>
#include <map>
#include <string>

#include "finsec/stability.hpp"

namespace finsec {

class parse_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using SymbolTable = std::map<std::string, PCSymbol>;
using OperatorTable = std::map<std::string, OpExpr>;

/// Symbol literal: JSON list of pieces {"arc": [alpha, beta], "modes":
/// {"k": d x d matrix of [re, im] pairs}}.  A bare [re, im] is accepted as a
/// 1 x 1 matrix.
PCSymbol parse_symbol_literal(const std::string& json_text);
std::string symbol_literal(const PCSymbol& s);

/// Prefix expression format, e.g.
///   (sum (prod (laurent "a") P) (prod (laurent "b") Q) (scale [0,1] J))
/// Atoms: I P Q J, (laurent "name"|<inline literal>),
/// (finiterank [[i, j, mat], ...]); combiners sum, prod, scale, adjoint.
OpExpr parse_op_expr(const std::string& text, const SymbolTable& symbols);

/// Sequence expressions add (section <op>|"name") and
/// (jideal <finiterank-literal> <finiterank-literal>).
SeqExpr parse_seq_expr(const std::string& text, const SymbolTable& symbols,
                       const OperatorTable& operators);

/// Deterministic rendering; Laurent symbols print by name when a table entry
/// matches, inline otherwise.
std::string print_op_expr(const OpExpr& e, const SymbolTable* names = nullptr);
std::string print_seq_expr(const SeqExpr& s, const SymbolTable* names = nullptr);

// CSV writers (header + 17-significant-digit floats)
void write_sweep_csv(std::ostream& os, const SweepResult& sweep);
void write_residual_csv(std::ostream& os, const std::vector<std::pair<int, double>>& rows);
void write_sigma_csv(std::ostream& os, const std::vector<std::pair<int, double>>& rows);
/// row-major matrix dump, entries as re,im pairs
void write_matrix_csv(std::ostream& os, const Mat& m);

/// Full report document: per-condition verdicts with methods, the predicted
/// and observed verdicts and the agreement line.
void write_report(std::ostream& os, const StabilityReport& r, const SymbolTable* names = nullptr);

}  // namespace finsec

#endif
