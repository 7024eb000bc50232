#include "chpar/ddm.hpp"

#include <Eigen/LU>

#include <cmath>
#include <sstream>

namespace chpar {

Decomposition::Decomposition(const SpatialGrid &grid, int subdomains) : grid_(grid) {
  if (grid.dim() != 1)
    throw std::invalid_argument("domain decomposition is implemented for 1D grids only");
  if (subdomains < 2)
    throw std::invalid_argument("decomposition needs at least 2 subdomains");
  const int cells = grid.nodes_per_axis() - 1;
  const int m = grid.interior_per_axis();
  left_.push_back(-1);
  for (int i = 1; i < subdomains; ++i) {
    const int node = static_cast<int>(std::lround(static_cast<double>(i) * cells / subdomains));
    interfaces_.push_back(node - 1);
    right_.push_back(node - 1);
    left_.push_back(node - 1);
  }
  right_.push_back(m);
  for (int s = 0; s < subdomains; ++s)
    if (right_[static_cast<std::size_t>(s)] - left_[static_cast<std::size_t>(s)] < 2)
      throw std::invalid_argument("too many subdomains for the grid: subdomain " +
                                  std::to_string(s) + " has no interior node");
}

namespace {

// Local Dirichlet and Neumann operators of one subdomain, frozen for one time
// step. Unknowns are interleaved (u_j, v_j).
struct LocalProblem {
  int left = 0, right = 0;
  bool left_interface = false, right_interface = false;
  Eigen::PartialPivLU<Eigen::MatrixXd> dirichlet;
  Eigen::PartialPivLU<Eigen::MatrixXd> neumann;
  int neumann_offset = 0; // local node index of node `left` in the Neumann system
};

struct Coefficients {
  double h, dt, eps2;
  const Vector &un;
  Vector c;
};

// Full interior rows of the mixed system at node j. `col(k)` maps a global
// interior index to a local node slot or -1 when the value is prescribed.
template <class ColFn>
void fill_interior_rows(Eigen::MatrixXd &a, int row_node, int j, const Coefficients &k,
                        ColFn col) {
  const double s = k.dt / k.h;
  const double e = k.eps2 / k.h;
  const int ru = 2 * row_node, rv = ru + 1;
  a(ru, 2 * row_node) += k.h;
  a(rv, 2 * row_node + 1) += k.h;
  a(ru, 2 * row_node + 1) += 2.0 * s;
  a(rv, 2 * row_node) += -2.0 * e - k.h * k.c[j];
  for (int nb : {j - 1, j + 1}) {
    const int cn = col(nb);
    if (cn < 0)
      continue;
    a(ru, 2 * cn + 1) += -s;
    a(rv, 2 * cn) += e;
  }
}

// Half-cell rows at an interface endpoint `j` whose inner neighbour is `q`.
void fill_interface_rows(Eigen::MatrixXd &a, int row_node, int inner_node, int j,
                         const Coefficients &k) {
  const double s = k.dt / k.h;
  const double e = k.eps2 / k.h;
  const int ru = 2 * row_node, rv = ru + 1;
  a(ru, 2 * row_node) += 0.5 * k.h;
  a(ru, 2 * row_node + 1) += s;
  a(ru, 2 * inner_node + 1) += -s;
  a(rv, 2 * inner_node) += e;
  a(rv, 2 * row_node) += -e - 0.5 * k.h * k.c[j];
  a(rv, 2 * row_node + 1) += 0.5 * k.h;
}

LocalProblem build_local(const Decomposition &d, int sub, const Coefficients &k) {
  LocalProblem p;
  p.left = d.left_end(sub);
  p.right = d.right_end(sub);
  p.left_interface = sub > 0;
  p.right_interface = sub + 1 < d.subdomains();
  const int m = p.right - p.left - 1;

  Eigen::MatrixXd ad = Eigen::MatrixXd::Zero(2 * m, 2 * m);
  auto dcol = [&](int g) { return (g > p.left && g < p.right) ? g - p.left - 1 : -1; };
  for (int j = p.left + 1; j < p.right; ++j)
    fill_interior_rows(ad, j - p.left - 1, j, k, dcol);
  p.dirichlet.compute(ad);

  p.neumann_offset = p.left_interface ? 0 : -1;
  const int first = p.left_interface ? p.left : p.left + 1;
  const int last = p.right_interface ? p.right : p.right - 1;
  const int n = last - first + 1;
  Eigen::MatrixXd an = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  auto ncol = [&](int g) { return (g >= first && g <= last) ? g - first : -1; };
  for (int j = p.left + 1; j < p.right; ++j)
    fill_interior_rows(an, j - first, j, k, ncol);
  if (p.left_interface)
    fill_interface_rows(an, 0, 1, p.left, k);
  if (p.right_interface)
    fill_interface_rows(an, n - 1, n - 2, p.right, k);
  p.neumann.compute(an);
  return p;
}

double trace_value(const Vector &traces, const Decomposition &, int iface) {
  return traces[iface];
}

// Dirichlet solve on subdomain `sub` with interface data (g, h).
Vector dirichlet_solve(const LocalProblem &p, int sub, const Coefficients &k,
                       const InterfaceTraces &t, const Decomposition &d) {
  const int m = p.right - p.left - 1;
  const double s = k.dt / k.h;
  const double e = k.eps2 / k.h;
  Vector rhs(2 * m);
  for (int j = p.left + 1; j < p.right; ++j) {
    const int r = j - p.left - 1;
    rhs[2 * r] = k.h * k.un[j];
    rhs[2 * r + 1] = -k.h * k.un[j];
  }
  if (p.left_interface) {
    const double g = trace_value(t.g, d, sub - 1), hv = trace_value(t.h, d, sub - 1);
    rhs[0] += s * hv;
    rhs[1] -= e * g;
  }
  if (p.right_interface) {
    const double g = trace_value(t.g, d, sub), hv = trace_value(t.h, d, sub);
    rhs[2 * (m - 1)] += s * hv;
    rhs[2 * (m - 1) + 1] -= e * g;
  }
  return p.dirichlet.solve(rhs);
}

// Local half-cell residual of the Dirichlet solution at interface node j.
std::pair<double, double> interface_residual(double g, double hv, double u_in,
                                             double v_in, int j, const Coefficients &k) {
  const double s = k.dt / k.h;
  const double e = k.eps2 / k.h;
  const double ru = 0.5 * k.h * (g - k.un[j]) - s * (v_in - hv);
  const double rv = e * (u_in - g) + 0.5 * k.h * (-k.c[j] * g + hv + k.un[j]);
  return {ru, rv};
}

} // namespace

NNStepResult nn_time_step(const Field &u_n, const Decomposition &decomp,
                          const NNParams &params, double dt, double eps,
                          const InterfaceTraces *initial) {
  if (!(u_n.grid() == decomp.grid()))
    throw std::invalid_argument("field and decomposition use different grids");
  if (!(params.theta > 0.0 && params.theta < 1.0))
    throw std::invalid_argument("relaxation theta must lie in (0, 1)");

  const int subs = decomp.subdomains();
  const int ni = decomp.interface_count();
  Coefficients k{u_n.grid().h(), dt, eps * eps, u_n.values(),
                 u_n.values().cwiseProduct(u_n.values())};

  std::vector<LocalProblem> local(static_cast<std::size_t>(subs));
#pragma omp parallel for schedule(static)
  for (int s = 0; s < subs; ++s)
    local[static_cast<std::size_t>(s)] = build_local(decomp, s, k);

  InterfaceTraces t;
  if (initial && initial->g.size() == ni && initial->h.size() == ni) {
    t.g = initial->g;
    t.h = initial->h;
  } else {
    t.g = Vector::Zero(ni);
    t.h = Vector::Zero(ni);
  }

  std::vector<Vector> dsol(static_cast<std::size_t>(subs));
  std::vector<Vector> nsol(static_cast<std::size_t>(subs));
  NNStepResult out{Field(u_n.grid()), {}, {}};

  auto dirichlet_all = [&] {
#pragma omp parallel for schedule(static)
    for (int s = 0; s < subs; ++s)
      dsol[static_cast<std::size_t>(s)] =
          dirichlet_solve(local[static_cast<std::size_t>(s)], s, k, t, decomp);
  };

  bool converged = false;
  for (int nu = 1; nu <= params.max_iter; ++nu) {
    dirichlet_all();

    // Jump of the discrete Neumann traces: sum of both one-sided residuals.
    Vector ru(ni), rv(ni);
    for (int i = 0; i < ni; ++i) {
      const int j = decomp.interface_node(i);
      const Vector &lsol = dsol[static_cast<std::size_t>(i)];
      const Vector &rsol = dsol[static_cast<std::size_t>(i + 1)];
      const auto lm = lsol.size() / 2;
      auto [lu, lv] = interface_residual(t.g[i], t.h[i], lsol[2 * (lm - 1)],
                                         lsol[2 * (lm - 1) + 1], j, k);
      auto [qu, qv] = interface_residual(t.g[i], t.h[i], rsol[0], rsol[1], j, k);
      ru[i] = lu + qu;
      rv[i] = lv + qv;
    }

#pragma omp parallel for schedule(static)
    for (int s = 0; s < subs; ++s) {
      const LocalProblem &p = local[static_cast<std::size_t>(s)];
      const int first = p.left_interface ? p.left : p.left + 1;
      const int last = p.right_interface ? p.right : p.right - 1;
      const int n = last - first + 1;
      Vector rhs = Vector::Zero(2 * n);
      if (p.left_interface) {
        rhs[0] = ru[s - 1];
        rhs[1] = rv[s - 1];
      }
      if (p.right_interface) {
        rhs[2 * (n - 1)] = ru[s];
        rhs[2 * (n - 1) + 1] = rv[s];
      }
      nsol[static_cast<std::size_t>(s)] = p.neumann.solve(rhs);
    }

    Vector dg(ni), dh(ni);
    for (int i = 0; i < ni; ++i) {
      const Vector &l = nsol[static_cast<std::size_t>(i)];
      const Vector &r = nsol[static_cast<std::size_t>(i + 1)];
      const auto ln = l.size() / 2;
      dg[i] = params.theta * (l[2 * (ln - 1)] + r[0]);
      dh[i] = params.theta * (l[2 * (ln - 1) + 1] + r[1]);
    }
    t.g -= dg;
    t.h -= dh;
    t.iterations = nu;
    t.last_increment_g = dg.norm();
    t.last_increment_h = dh.norm();
    out.increment_history.push_back(std::max(t.last_increment_g, t.last_increment_h));
    if (!std::isfinite(t.last_increment_g) || !std::isfinite(t.last_increment_h))
      break;
    if (t.last_increment_g <= params.tol && t.last_increment_h <= params.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "neumann-neumann: no convergence after " << t.iterations
       << " iterations, increments g=" << t.last_increment_g
       << " h=" << t.last_increment_h;
    throw SolverError(os.str(), std::max(t.last_increment_g, t.last_increment_h));
  }

  dirichlet_all();
  Vector &u = out.u.values();
  for (int s = 0; s < subs; ++s) {
    const LocalProblem &p = local[static_cast<std::size_t>(s)];
    const Vector &x = dsol[static_cast<std::size_t>(s)];
    for (int j = p.left + 1; j < p.right; ++j)
      u[j] = x[2 * (j - p.left - 1)];
  }
  for (int i = 0; i < ni; ++i)
    u[decomp.interface_node(i)] = t.g[i];
  out.traces = std::move(t);
  return out;
}

PropagatorSpec nn_propagator(const Decomposition &decomp, const NNParams &params,
                             double dt, double eps) {
  NNParams p = params;
  p.subdomains = decomp.subdomains();
  PropagatorSpec spec;
  spec.scheme = Scheme::NeumannNeumannLinearA;
  spec.dt = dt;
  spec.eps = eps;
  spec.nn = p;
  spec.validate();
  return spec;
}

} // namespace chpar
