#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "entrobound/expr.hpp"
#include "entrobound/geometry.hpp"

namespace entrobound {

/// Dense row-major matrix; only used for the small system matrices.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  static Matrix from_rows(const std::vector<std::vector<double>>& rows_in);

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::vector<std::vector<double>> to_rows() const;
};

enum class SystemKind { affine, polynomial, sampled_ode };

std::string_view to_string(SystemKind k);
SystemKind system_kind_from_string(std::string_view s);

/// x+ = f(x,u) (+ W when a disturbance box is given).
struct SystemDef {
  std::string name;
  SystemKind kind = SystemKind::affine;
  std::size_t state_dim = 0;
  std::size_t input_dim = 0;
  Matrix A;                     // affine
  Matrix B;                     // affine
  std::vector<Expr> map;        // polynomial map, or ODE right-hand side
  double sampling_time = 0;     // sampled-ode
  double growth_bound = 0;      // sampled-ode, per-axis exponential growth constant L
  std::optional<HyperRect> disturbance;

  bool set_valued() const { return disturbance.has_value(); }
  /// False when a disturbance box is present but does not contain the origin.
  bool disturbance_contains_origin() const;
  void validate() const;
};

struct ReachResult {
  HyperRect enclosure;
  bool exact = false;  ///< enclosure is the exact interval hull of the image
};

/// Signature of a one-step reachability over-approximation.
using ReachOracle = std::function<ReachResult(const HyperRect&, std::span<const double>)>;

ReachResult reach_affine(const Matrix& A, const Matrix& B, const HyperRect& rect,
                         std::span<const double> u, const std::optional<HyperRect>& W);

/// B*u + center(W); the per-input constant of the affine image center.
std::vector<double> affine_offset(const Matrix& B, std::span<const double> u,
                                  const std::optional<HyperRect>& W);

ReachResult reach_interval(const std::vector<Expr>& map, const HyperRect& rect,
                           std::span<const double> u, const std::optional<HyperRect>& W);

/// RK4 image of the cell center (100 substeps), inflated by r * exp(L * T_s).
ReachResult reach_ode(const std::vector<Expr>& rhs, const HyperRect& rect,
                      std::span<const double> u, double sampling_time, double growth_bound);

ReachResult reach(const SystemDef& sys, const HyperRect& rect, std::span<const double> u);
ReachOracle make_oracle(const SystemDef& sys);

/// Concrete nominal successor f(x,u); disturbance not added.
std::vector<double> step_point(const SystemDef& sys, std::span<const double> x,
                               std::span<const double> u);

/// RK4 flow of an ODE right-hand side over [0, T] with `substeps` steps.
std::vector<double> rk4_flow(const std::vector<Expr>& rhs, std::span<const double> x0,
                             std::span<const double> u, double T, int substeps = 100);

using StateSet = std::variant<HyperRect, Polytope>;

bool rect_in_set(const HyperRect& rect, const StateSet& q);

enum class GridAlignment { tile, lattice };

/// A system together with its invariance problem and grid parameters.
struct Problem {
  SystemDef system;
  std::optional<SystemDef> reversed;  ///< time-reversed system for forward/backward iteration
  StateSet q;
  HyperRect state_box;                ///< Q_X
  GridAlignment alignment = GridAlignment::lattice;
  std::vector<double> eta_s;
  HyperRect input_box;                ///< U
  std::vector<double> eta_i;
  int tau = 1;
  /// Entropy reference from theory, in bits per time unit (per step for maps).
  std::optional<double> theory;
  std::string theory_note;

  /// Time per step: T_s for sampled ODEs, 1 otherwise.
  double time_scale() const;
  UniformGrid state_grid() const;
};

struct BuiltinParams {
  std::optional<double> rho;       // pendulum control range
  std::optional<double> b;         // pendulum damping
  std::optional<double> sampling;  // pendulum T_s
  std::optional<double> growth;    // pendulum growth bound L; default bounds |df/dx| near Q
  std::optional<double> epsilon;   // henon control range
};

std::vector<std::string> builtin_names();
Problem builtin_system(std::string_view name, const BuiltinParams& params = {});

}  // namespace entrobound
