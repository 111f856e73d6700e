// Independent numerical oracles for the test suites.  These deliberately
// avoid the library's own code paths: plain bisection, golden section,
// composite quadrature, and fixed-step RK4 shooting live here so expected
// values are derived through a second route.
#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iters = 200) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  for (int i = 0; i < iters; ++i) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double golden_max(const std::function<double(double)>& f, double lo,
                         double hi, int iters = 200) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
  double fa = f(a), fb = f(b);
  for (int i = 0; i < iters; ++i) {
    if (fa > fb) {
      hi = b; b = a; fb = fa;
      a = hi - phi * (hi - lo);
      fa = f(a);
    } else {
      lo = a; a = b; fa = fb;
      b = lo + phi * (hi - lo);
      fb = f(b);
    }
  }
  return f(0.5 * (lo + hi));
}

inline double golden_min(const std::function<double(double)>& f, double lo,
                         double hi, int iters = 200) {
  return -golden_max([&](double x) { return -f(x); }, lo, hi, iters);
}

// Composite Simpson on [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int n = 4096) {
  if (n % 2) ++n;
  double h = (b - a) / n, acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// Fixed-step RK4 radial shooting for -U'' - (dim-1)/r U' + k U = f(U).
// Returns the grid values for amplitude b; used with its own bisection to
// cross-check the library's adaptive solver.
struct Rk4Shot {
  double k = 1.0;
  int dim = 2;
  std::function<double(double)> f;     // nonlinearity
  std::function<double(double)> fp;    // its derivative

  // integrate to r_end with n steps; returns (U, U') trajectory endpoints
  // and flags
  struct Result {
    bool crossed = false;   // U < 0 happened
    bool turned = false;    // U' > 0 happened
    std::vector<double> u, du;
  };

  Result run(double b, double r_end, int n) const {
    Result res;
    res.u.resize(n + 1);
    res.du.resize(n + 1);
    double h = r_end / n;
    double r0 = 1e-6;
    double c2 = (k * b - f(b)) / (2.0 * dim);
    double u = b + c2 * r0 * r0;
    double du = 2.0 * c2 * r0;
    res.u[0] = b;
    res.du[0] = 0.0;
    auto rhs = [&](double r, double y0, double y1, double& d0, double& d1) {
      d0 = y1;
      d1 = k * y0 - f(y0) - (dim - 1) / r * y1;
    };
    double r = r0;
    for (int i = 1; i <= n; ++i) {
      double target = h * i;
      int sub = 8;
      double hs = (target - r) / sub;
      for (int sstep = 0; sstep < sub; ++sstep) {
        double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
        rhs(r, u, du, k1a, k1b);
        rhs(r + hs / 2, u + hs / 2 * k1a, du + hs / 2 * k1b, k2a, k2b);
        rhs(r + hs / 2, u + hs / 2 * k2a, du + hs / 2 * k2b, k3a, k3b);
        rhs(r + hs, u + hs * k3a, du + hs * k3b, k4a, k4b);
        u += hs / 6 * (k1a + 2 * k2a + 2 * k3a + k4a);
        du += hs / 6 * (k1b + 2 * k2b + 2 * k3b + k4b);
        r += hs;
      }
      res.u[i] = u;
      res.du[i] = du;
      if (u < 0.0) {
        res.crossed = true;
        break;
      }
      if (du > 0.0) {
        res.turned = true;
        break;
      }
    }
    return res;
  }

  // bisection on the amplitude; returns U(0)
  double shoot(double r_end = 14.0, int n = 7000, int iters = 90) const {
    double lo = 0.0, hi = 0.0, b = 2.0;
    for (int i = 0; i < 200 && (lo == 0.0 || hi == 0.0); ++i) {
      Result r = run(b, r_end, n);
      if (r.crossed) {
        hi = b;
        b *= 0.7;
      } else {
        lo = b;
        b = hi == 0.0 ? b * 1.6 : 0.5 * (lo + hi);
      }
    }
    if (lo == 0.0 || hi == 0.0) throw std::runtime_error("oracle shoot: no bracket");
    for (int i = 0; i < iters; ++i) {
      double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (run(mid, r_end, n).crossed ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
  }
};

inline std::mt19937_64 rng(unsigned long long seed = 0x51e11abULL) {
  return std::mt19937_64(seed);
}

}  // namespace oracle
