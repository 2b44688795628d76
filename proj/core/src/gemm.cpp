#include "gemm.hpp"

#include <Eigen/Core>

namespace atagan::detail {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

template <class Lhs, class Rhs>
void assign(Map& c, const Lhs& lhs, const Rhs& rhs, bool accumulate) {
  if (accumulate) {
    c.noalias() += lhs * rhs;
  } else {
    c.noalias() = lhs * rhs;
  }
}

}  // namespace

void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c, bool accumulate) {
  const auto M = static_cast<Eigen::Index>(m);
  const auto N = static_cast<Eigen::Index>(n);
  const auto K = static_cast<Eigen::Index>(k);
  Map cm(c, M, N);
  if (M == 0 || N == 0) return;
  if (K == 0) {
    if (!accumulate) cm.setZero();
    return;
  }
  // A stored [m,k] or [k,m]; B stored [k,n] or [n,k].
  ConstMap am(a, trans_a ? K : M, trans_a ? M : K);
  ConstMap bm(b, trans_b ? N : K, trans_b ? K : N);
  if (!trans_a && !trans_b) {
    assign(cm, am, bm, accumulate);
  } else if (trans_a && !trans_b) {
    assign(cm, am.transpose(), bm, accumulate);
  } else if (!trans_a && trans_b) {
    assign(cm, am, bm.transpose(), accumulate);
  } else {
    assign(cm, am.transpose(), bm.transpose(), accumulate);
  }
}

}  // namespace atagan::detail
