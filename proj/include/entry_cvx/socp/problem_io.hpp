#ifndef ENTRY_CVX_SOCP_PROBLEM_IO_HPP
#define ENTRY_CVX_SOCP_PROBLEM_IO_HPP

#include "entry_cvx/socp/cone_program.hpp"

#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace entry_cvx::socp {

// Plain-text cone program format (whitespace separated, '#' starts a comment line):
//
//   CONEPROGRAM 1
//   dims <n> <p> <m>
//   orthant <size>
//   soc <count> <q_1> ... <q_count>
//   c <n values>
//   b <p values>
//   h <m values>
//   A <nnz>   followed by nnz triplets "row col value" (0-based)
//   G <nnz>   followed by nnz triplets
//   end

namespace detail {

inline void write_vector(std::ostream& os, const char* tag, const VectorXd& v) {
  os << tag;
  for (int i = 0; i < v.size(); ++i) os << (i % 8 == 0 ? "\n" : " ") << v(i);
  os << "\n";
}

inline void write_matrix(std::ostream& os, const char* tag, const SpMat& M) {
  os << tag << " " << M.nonZeros() << "\n";
  for (int j = 0; j < M.outerSize(); ++j)
    for (SpMat::InnerIterator it(M, j); it; ++it) os << it.row() << " " << j << " " << it.value() << "\n";
}

class TokenReader {
 public:
  explicit TokenReader(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens_.push_back(tok);
    }
  }

  std::string word() {
    if (pos_ >= tokens_.size()) throw std::runtime_error("problem file: unexpected end of input");
    return tokens_[pos_++];
  }
  void expect(const std::string& w) {
    const std::string got = word();
    if (got != w) throw std::runtime_error("problem file: expected '" + w + "', found '" + got + "'");
  }
  long integer() {
    const std::string w = word();
    try {
      std::size_t used = 0;
      const long v = std::stol(w, &used);
      if (used != w.size()) throw std::invalid_argument(w);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("problem file: expected integer, found '" + w + "'");
    }
  }
  double real() {
    const std::string w = word();
    try {
      std::size_t used = 0;
      const double v = std::stod(w, &used);
      if (used != w.size()) throw std::invalid_argument(w);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("problem file: expected number, found '" + w + "'");
    }
  }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

inline VectorXd read_vector(TokenReader& r, const char* tag, int size) {
  r.expect(tag);
  VectorXd v(size);
  for (int i = 0; i < size; ++i) v(i) = r.real();
  return v;
}

inline SpMat read_matrix(TokenReader& r, const char* tag, int rows, int cols) {
  r.expect(tag);
  const long nnz = r.integer();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(nnz));
  for (long k = 0; k < nnz; ++k) {
    const long i = r.integer(), j = r.integer();
    const double v = r.real();
    if (i < 0 || i >= rows || j < 0 || j >= cols)
      throw std::runtime_error(std::string("problem file: ") + tag + " entry out of range");
    t.emplace_back(static_cast<int>(i), static_cast<int>(j), v);
  }
  SpMat M(rows, cols);
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

}  // namespace detail

inline void write_problem(std::ostream& os, const ConeProgram& p) {
  os << std::setprecision(17);
  os << "CONEPROGRAM 1\n";
  os << "dims " << p.n() << " " << p.p() << " " << p.m() << "\n";
  os << "orthant " << p.cones.orthant << "\n";
  os << "soc " << p.cones.soc.size();
  for (int q : p.cones.soc) os << " " << q;
  os << "\n";
  detail::write_vector(os, "c", p.c);
  detail::write_vector(os, "b", p.b);
  detail::write_vector(os, "h", p.h);
  SpMat A = p.A;
  if (A.rows() == 0) A.resize(0, p.n());
  detail::write_matrix(os, "A", A);
  detail::write_matrix(os, "G", p.G);
  os << "end\n";
}

inline ConeProgram read_problem(std::istream& is) {
  detail::TokenReader r(is);
  r.expect("CONEPROGRAM");
  if (r.integer() != 1) throw std::runtime_error("problem file: unsupported format version");
  r.expect("dims");
  const long n = r.integer(), p = r.integer(), m = r.integer();
  if (n < 0 || p < 0 || m < 0) throw std::runtime_error("problem file: negative dimension");
  ConeProgram prog;
  r.expect("orthant");
  prog.cones.orthant = static_cast<int>(r.integer());
  r.expect("soc");
  const long k = r.integer();
  for (long i = 0; i < k; ++i) prog.cones.soc.push_back(static_cast<int>(r.integer()));
  prog.c = detail::read_vector(r, "c", static_cast<int>(n));
  prog.b = detail::read_vector(r, "b", static_cast<int>(p));
  prog.h = detail::read_vector(r, "h", static_cast<int>(m));
  prog.A = detail::read_matrix(r, "A", static_cast<int>(p), static_cast<int>(n));
  prog.G = detail::read_matrix(r, "G", static_cast<int>(m), static_cast<int>(n));
  r.expect("end");
  prog.validate();
  return prog;
}

inline void write_problem_file(const std::string& path, const ConeProgram& p) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_problem(os, p);
}

inline ConeProgram read_problem_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_problem(is);
}

}  // namespace entry_cvx::socp

#endif
