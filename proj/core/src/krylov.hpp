#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace spikelab::detail {

// MINRES for a symmetric (possibly indefinite) operator, x0 = 0.
// Returns the iterate with minimal residual norm; res_out gets the final
// relative residual.  Suitable for the saddle-point linearizations here,
// which have a few negative eigenvalues.
template <typename Op>
std::vector<double> minres(const Op& apply, const std::vector<double>& b,
                           double rel_tol, int max_iter, double* res_out = nullptr) {
  const std::size_t n = b.size();
  std::vector<double> x(n, 0.0);
  auto dot = [n](const std::vector<double>& a, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * c[i];
    return s;
  };
  double beta1 = std::sqrt(dot(b, b));
  if (res_out) *res_out = 0.0;
  if (beta1 == 0.0) return x;

  std::vector<double> v_prev(n, 0.0), v_cur(b), v_next(n), tmp(n);
  for (std::size_t i = 0; i < n; ++i) v_cur[i] /= beta1;

  std::vector<double> w_1(n, 0.0), w_2(n, 0.0);  // w_{k-1}, w_{k-2}
  double c_1 = 1.0, s_1 = 0.0, c_2 = 1.0, s_2 = 0.0;
  double beta_sub = 0.0;  // subdiagonal entering this column (0 on the first)
  double eta = beta1;

  for (int k = 0; k < max_iter; ++k) {
    apply(v_cur, v_next);
    double alpha = dot(v_next, v_cur);
    for (std::size_t i = 0; i < n; ++i)
      v_next[i] -= alpha * v_cur[i] + beta_sub * v_prev[i];
    double beta_next = std::sqrt(dot(v_next, v_next));

    double delta = c_1 * alpha - s_1 * c_2 * beta_sub;
    double rho2 = s_1 * alpha + c_1 * c_2 * beta_sub;
    double rho3 = s_2 * beta_sub;
    double rho1 = std::hypot(delta, beta_next);
    if (rho1 == 0.0) break;  // exact breakdown; x is the best iterate
    double c_new = delta / rho1, s_new = beta_next / rho1;

    for (std::size_t i = 0; i < n; ++i)
      tmp[i] = (v_cur[i] - rho2 * w_1[i] - rho3 * w_2[i]) / rho1;
    double step = c_new * eta;
    for (std::size_t i = 0; i < n; ++i) x[i] += step * tmp[i];
    eta = -s_new * eta;

    w_2.swap(w_1);
    w_1.swap(tmp);
    c_2 = c_1; s_2 = s_1;
    c_1 = c_new; s_1 = s_new;

    if (std::abs(eta) <= rel_tol * beta1) break;
    if (beta_next == 0.0) break;
    for (std::size_t i = 0; i < n; ++i) v_next[i] /= beta_next;
    v_prev.swap(v_cur);
    v_cur.swap(v_next);
    beta_sub = beta_next;
  }
  if (res_out) *res_out = std::abs(eta) / beta1;
  return x;
}

}  // namespace spikelab::detail
