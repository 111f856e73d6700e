#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "spikelab/grid.hpp"
#include "spikelab/limit_problem.hpp"

namespace spikelab {

struct ConeOptions {
  int nt = 41;            // t-grid on [0, 1]
  int nxi = 41;           // xi-grid per axis (dim E = 1)
  int n_radii = 9;        // radial xi samples (dim E = 2)
  int n_angles = 16;      // angular xi samples for the interior scan (dim E = 2)
  int n_boundary = 64;    // boundary samples of |xi| = R0/eps (dim E = 2)
};

// Samples of the topological cone {gamma_t(. - xi) : t in [0,1],
// xi in closure(B0/eps) meet E}.  Interior grids drive the max scan, boundary
// grids (t = 1 and |xi| = R0/eps) drive the gap estimate and the degree map.
class ConeSampler {
public:
  using Options = ConeOptions;

  ConeSampler(const MPCurve& curve, const GroundState& state, double xi_max,
              int dim_E, Options opts = {});

  const MPCurve& curve() const { return curve_; }
  const RadialProfile& profile() const { return *profile_; }
  double base_energy() const { return m_base_; }  // ground-state level m
  double xi_max() const { return xi_max_; }
  int dim_E() const { return dim_E_; }
  const Options& options() const { return opts_; }

  std::vector<double> t_grid() const;
  // xi offsets in the plane, expressed in E coordinates of the problem
  std::vector<std::array<double, 2>> interior_xi() const;   // includes 0
  std::vector<std::array<double, 2>> boundary_xi(int n_override = 0) const;

private:
  MPCurve curve_;
  const RadialProfile* profile_;
  double m_base_;
  double xi_max_;
  int dim_E_;
  Options opts_;
};

// gamma_t(. - xi) realized on the problem grid (xi given in E coordinates).
GridField cone_element(const EpsProblem& p, const ConeSampler& s, double t,
                       std::array<double, 2> xi_E);

struct ConeScanResult {
  double max_energy = 0.0;
  double t_arg = 0.0;
  std::array<double, 2> xi_arg{0.0, 0.0};
};

// Max of the truncated energy over the sampled cone.
ConeScanResult cone_max_energy(const EpsProblem& p, const ConeSampler& s);

struct BoundaryGapResult {
  double delta = 0.0;          // reference_level - max boundary energy
  double reference_level = 0.0;
  double max_side_energy = 0.0;  // over |xi| = R0/eps, t in [0, 1]
  double max_top_energy = 0.0;   // over t = 1 (must be negative)
  bool top_negative = false;
};

// Boundary estimate: the cone boundary must stay strictly below the
// mountain-pass level.  reference_level defaults to the radial ground-state
// energy; pass a grid-measured autonomous level to compare at matched
// resolution.
BoundaryGapResult boundary_gap(const EpsProblem& p, const ConeSampler& s,
                               std::optional<double> reference_level = std::nullopt);

// psi_t(xi) = barycenter(gamma_t(. - xi)) in E coordinates.
std::vector<double> psi_map(const EpsProblem& p, const ConeSampler& s, double t,
                            std::array<double, 2> xi_E);

struct DegreeResult {
  int degree = 0;
  double t = 0.0;
  // boundary trace: xi components then psi components per sample
  std::vector<std::array<double, 4>> trace;
};

// Topological degree of psi_t on B0/eps meet E: sign change count for a 1-D E,
// winding number on a sampled circle for a 2-D E.  Throws if psi vanishes on
// the boundary sample.
DegreeResult degree_check(const EpsProblem& p, const ConeSampler& s, double t,
                          int n_boundary = 256);

struct SaddleResult {
  GridField u;
  std::vector<double> lambda;     // multiplier, E coordinates
  double energy = 0.0;
  double residual_sup = 0.0;      // sup norm of the constrained equation residual
  double barycenter_norm = 0.0;
  int iterations = 0;
};

// Newton on the bordered system for the barycenter-constrained critical point:
//   -Lap u + V(eps x) u - g_eps(x, u) - (lambda . h_eps(x)) u = 0,
//   barycenter(u) = 0.
// Converges quadratically from a cone-element seed near the energy max.
// Throws on divergence or on collapse to the zero field.
SaddleResult constrained_saddle(const EpsProblem& p, const GridField& seed,
                                double tol, int max_iter,
                                double min_energy_accept = 0.0);

struct MEpsBracket {
  double lower = 0.0;  // constrained saddle energy
  double upper = 0.0;  // cone max
};

// Two-sided estimate of the min-max level: the constrained saddle energy from
// the cone argmax seed, and the sampled cone max.  Both converge to the
// limit-problem level as eps -> 0, so the bracket width is the error bar.
MEpsBracket estimate_m_eps(const EpsProblem& p, const ConeSampler& s,
                           const ConeScanResult& scan, const SaddleResult& saddle);

}  // namespace spikelab
