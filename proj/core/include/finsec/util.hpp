#ifndef FINSEC_UTIL_HPP
#define FINSEC_UTIL_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace finsec {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double two_pi = 6.2831853071795864769;
inline constexpr double pi = 3.1415926535897932385;

/// Angle folded into [0, 2*pi).
inline double wrap_angle(double theta) {
  double t = std::fmod(theta, two_pi);
  if (t < 0.0) t += two_pi;
  if (t >= two_pi) t = 0.0;
  return t;
}

inline bool angle_close(double a, double b, double tol = 1e-12) {
  double diff = std::abs(wrap_angle(a) - wrap_angle(b));
  return diff <= tol || std::abs(diff - two_pi) <= tol;
}

inline bool all_finite(const Mat& m) { return m.allFinite(); }

inline Mat eye(int d) { return Mat::Identity(d, d); }
inline Mat zeros(int d) { return Mat::Zero(d, d); }

/// Largest singular value is overkill for invariant checks; Frobenius suffices.
inline double fro_norm(const Mat& m) { return m.norm(); }

inline bool mats_close(const Mat& a, const Mat& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a - b).cwiseAbs().maxCoeff() <= tol;
}

/// true when m == lambda * I for some scalar lambda (within tol); lambda returned through out.
inline bool is_scalar_matrix(const Mat& m, cplx& lambda, double tol = 1e-14) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  lambda = m(0, 0);
  return mats_close(m, lambda * Mat::Identity(m.rows(), m.cols()), tol);
}

/// Fixed-format float used by every CSV/report writer (17 significant digits).
std::string fmt_g17(double x);
std::string fmt_cplx(cplx z);

/// Thread cap taken from FINSEC_THREADS (>=1); 1 when unset or unparsable.
int thread_cap();

/// index-parallel map; results are merged by index so output order is deterministic.
void parallel_for(int count, const std::function<void(int)>& body);

class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace finsec

#endif
