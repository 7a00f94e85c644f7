#ifndef ENTRY_CVX_SOCP_LDL_HPP
#define ENTRY_CVX_SOCP_LDL_HPP

#include <Eigen/Core>
#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace entry_cvx::socp {

/// Up-looking sparse LDL' for symmetric quasi-definite matrices.
///
/// The caller supplies the expected sign of every pivot; a pivot that comes out
/// with the wrong sign or too small in magnitude is replaced by sign*delta
/// (dynamic regularization).  A fill-reducing AMD permutation is computed once
/// per sparsity pattern.
class QuasiDefiniteLDL {
 public:
  using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  using Perm = Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int>;

  double dyn_eps = 1e-13;
  double dyn_delta = 7e-8;

  /// upper: upper triangle (including diagonal) of the symmetric matrix.
  void analyze(const SpMat& upper) {
    n_ = static_cast<int>(upper.rows());
    Eigen::AMDOrdering<int> amd;
    amd(upper, pinv_);
    p_ = pinv_.inverse();
    analyzed_ = true;
  }

  /// Returns the number of dynamically regularized pivots.
  int factor(const SpMat& upper, const Eigen::VectorXd& signs) {
    if (!analyzed_) analyze(upper);
    permuted_.resize(n_, n_);
    permuted_.selfadjointView<Eigen::Upper>() = upper.selfadjointView<Eigen::Upper>().twistedBy(p_);
    permuted_.makeCompressed();
    psigns_ = p_ * signs;
    symbolic();
    return numeric();
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = p_ * b;
    for (int i = 0; i < n_; ++i)
      for (int j = Lp_[i]; j < Lp_[i + 1]; ++j) x(Li_[j]) -= Lx_[j] * x(i);
    for (int i = 0; i < n_; ++i) x(i) *= Dinv_[i];
    for (int i = n_ - 1; i >= 0; --i)
      for (int j = Lp_[i]; j < Lp_[i + 1]; ++j) x(i) -= Lx_[j] * x(Li_[j]);
    return pinv_ * x;
  }

  int rows() const { return n_; }

 private:
  void symbolic() {
    const int* Ap = permuted_.outerIndexPtr();
    const int* Ai = permuted_.innerIndexPtr();
    etree_.assign(n_, -1);
    Lnz_.assign(n_, 0);
    std::vector<int> work(n_, 0);
    for (int j = 0; j < n_; ++j) {
      work[j] = j;
      for (int p = Ap[j]; p < Ap[j + 1]; ++p) {
        int i = Ai[p];
        if (i > j) throw std::logic_error("LDL: matrix is not upper triangular");
        while (work[i] != j) {
          if (etree_[i] == -1) etree_[i] = j;
          Lnz_[i]++;
          work[i] = j;
          i = etree_[i];
        }
      }
    }
    Lp_.assign(n_ + 1, 0);
    for (int i = 0; i < n_; ++i) Lp_[i + 1] = Lp_[i] + Lnz_[i];
    Li_.assign(Lp_[n_], 0);
    Lx_.assign(Lp_[n_], 0.0);
  }

  double regularize(double d, int k, int& count) const {
    const double sgn = psigns_(k);
    if (sgn * d <= dyn_eps) {
      ++count;
      return sgn * dyn_delta;
    }
    return d;
  }

  int numeric() {
    const int* Ap = permuted_.outerIndexPtr();
    const int* Ai = permuted_.innerIndexPtr();
    const double* Ax = permuted_.valuePtr();
    D_.assign(n_, 0.0);
    Dinv_.assign(n_, 0.0);
    std::vector<int> next(Lp_.begin(), Lp_.end() - 1);
    std::vector<char> marked(n_, 0);
    std::vector<double> y(n_, 0.0);
    std::vector<int> yidx(n_), buf(n_);
    int count = 0;

    for (int k = 0; k < n_; ++k) {
      int ny = 0;
      double dk = 0.0;
      for (int p = Ap[k]; p < Ap[k + 1]; ++p) {
        const int b = Ai[p];
        if (b == k) {
          dk = Ax[p];
          continue;
        }
        y[b] = Ax[p];
        if (marked[b]) continue;
        // walk the elimination tree up to k, collecting the reach in reverse
        int ne = 0;
        int i = b;
        while (i != -1 && i < k && !marked[i]) {
          marked[i] = 1;
          buf[ne++] = i;
          i = etree_[i];
        }
        while (ne > 0) yidx[ny++] = buf[--ne];
      }
      for (int t = ny - 1; t >= 0; --t) {
        const int c = yidx[t];
        const double yc = y[c];
        const int end = next[c];
        for (int j = Lp_[c]; j < end; ++j) y[Li_[j]] -= Lx_[j] * yc;
        Li_[end] = k;
        const double l = yc * Dinv_[c];
        Lx_[end] = l;
        dk -= yc * l;
        next[c]++;
        y[c] = 0.0;
        marked[c] = 0;
      }
      D_[k] = regularize(dk, k, count);
      Dinv_[k] = 1.0 / D_[k];
    }
    return count;
  }

  int n_ = 0;
  bool analyzed_ = false;
  Perm pinv_, p_;
  SpMat permuted_;
  Eigen::VectorXd psigns_;
  std::vector<int> etree_, Lnz_, Lp_, Li_;
  std::vector<double> Lx_, D_, Dinv_;
};

}  // namespace entry_cvx::socp

#endif
