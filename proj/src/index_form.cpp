#include "wkbconj/index_form.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Sparse>

namespace wkbconj {

namespace {

using Sparse = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Unknown ordering interleaves the two components node by node, keeping the
// bandwidth at 3.
inline int dof_f(int node) { return 2 * (node - 1); }
inline int dof_g(int node) { return 2 * (node - 1) + 1; }

// Count of eigenvalues of the pencil (K, M) below `shift` = number of
// negative pivots of K - shift M (Sylvester's law of inertia).
int inertia_below(const Sparse& k, const Sparse& m, double shift, int& factorizations) {
  Sparse a = k - shift * m;
  for (int attempt = 0; attempt < 6; ++attempt) {
    Eigen::SimplicialLDLT<Sparse> ldlt(a);
    ++factorizations;
    bool clean = ldlt.info() == Eigen::Success;
    int neg = 0;
    if (clean) {
      const auto d = ldlt.vectorD();
      double dmax = 0.0;
      for (int i = 0; i < d.size(); ++i) dmax = std::max(dmax, std::abs(d[i]));
      for (int i = 0; i < d.size(); ++i) {
        if (!std::isfinite(d[i]) || std::abs(d[i]) < 1e-14 * dmax) {
          clean = false;
          break;
        }
        if (d[i] < 0.0) ++neg;
      }
    }
    if (clean) return neg;
    // Hit a near-singular shift; nudge it.
    const double nudge = 1e-10 * (1.0 + std::abs(shift)) * (attempt + 1);
    a = k - (shift + nudge) * m;
  }
  throw EigSolveFailure("LDLT inertia count failed near shift");
}

}  // namespace

IndexFormResult index_form_lambda(const std::function<Mat2(double)>& lambda_tilde,
                                  double omega_tilde, double T,
                                  const IndexFormOptions& opts) {
  if (!(T > 0.0)) throw std::invalid_argument("index form needs T > 0");
  const int ne = opts.elements;
  const int nn = ne - 1;  // interior nodes
  const int dim = 2 * nn;
  const double h = T / ne;

  // Two-point Gauss quadrature for the coefficient averages per element.
  const double gq = 0.5 / std::sqrt(3.0);
  std::vector<Triplet> kt, mt;
  kt.reserve(16 * ne);
  mt.reserve(8 * ne);

  auto add = [dim](std::vector<Triplet>& out, int r, int c, double v) {
    if (r >= 0 && r < dim && c >= 0 && c < dim && v != 0.0) out.emplace_back(r, c, v);
  };

  for (int e = 0; e < ne; ++e) {
    const double t0 = e * h;
    const Mat2 a1 = lambda_tilde(t0 + h * (0.5 - gq));
    const Mat2 a2 = lambda_tilde(t0 + h * (0.5 + gq));
    const Mat2 abar = 0.5 * (a1 + a2);

    const int nl = e, nr = e + 1;  // global node indices of the element ends
    const int fl = dof_f(nl), fr = dof_f(nr), gl = dof_g(nl), gr = dof_g(nr);

    // Stiffness blocks: int A_ij phi_a' phi_b' = Abar_ij / h * [[1,-1],[-1,1]].
    const double s11 = abar(0, 0) / h, s12 = abar(0, 1) / h, s22 = abar(1, 1) / h;
    add(kt, fl, fl, s11); add(kt, fr, fr, s11); add(kt, fl, fr, -s11); add(kt, fr, fl, -s11);
    add(kt, gl, gl, s22); add(kt, gr, gr, s22); add(kt, gl, gr, -s22); add(kt, gr, gl, -s22);
    // f-g cross stiffness (symmetric).
    add(kt, fl, gl, s12); add(kt, gl, fl, s12);
    add(kt, fr, gr, s12); add(kt, gr, fr, s12);
    add(kt, fl, gr, -s12); add(kt, gr, fl, -s12);
    add(kt, fr, gl, -s12); add(kt, gl, fr, -s12);

    // Derivative coupling, assembled antisymmetrically:
    // C[a][b] = w0 int phi_a phi_b' ; element matrix w0/2 [[-1, 1], [-1, 1]].
    // Contributes C to the (f,g) block and C^T to the (g,f) block.
    const double w2 = 0.5 * omega_tilde;
    add(kt, fl, gl, -w2); add(kt, gl, fl, -w2);
    add(kt, fl, gr, w2);  add(kt, gr, fl, w2);
    add(kt, fr, gl, -w2); add(kt, gl, fr, -w2);
    add(kt, fr, gr, w2);  add(kt, gr, fr, w2);

    // Mass h/6 [[2,1],[1,2]] for both components.
    const double m2 = 2.0 * h / 6.0, m1 = h / 6.0;
    add(mt, fl, fl, m2); add(mt, fr, fr, m2); add(mt, fl, fr, m1); add(mt, fr, fl, m1);
    add(mt, gl, gl, m2); add(mt, gr, gr, m2); add(mt, gl, gr, m1); add(mt, gr, gl, m1);
  }

  Sparse k(dim, dim), m(dim, dim);
  k.setFromTriplets(kt.begin(), kt.end());
  m.setFromTriplets(mt.begin(), mt.end());

  IndexFormResult res;

  // Bound |lambda| <= ||K||_inf / lambda_min(M); P1 mass eigenvalues are >= h/3.
  double knorm = 0.0;
  for (int c = 0; c < k.outerSize(); ++c) {
    double rowsum = 0.0;
    for (Sparse::InnerIterator it(k, c); it; ++it) rowsum += std::abs(it.value());
    knorm = std::max(knorm, rowsum);
  }
  double lo = -knorm * 3.0 / h - 1.0;
  double hi = knorm * 3.0 / h + 1.0;

  if (inertia_below(k, m, lo, res.factorizations) != 0)
    throw EigSolveFailure("eigenvalue lower bound not valid");

  // Bisect for the smallest pencil eigenvalue.
  while (hi - lo > opts.eig_tol) {
    const double mid = 0.5 * (lo + hi);
    if (inertia_below(k, m, mid, res.factorizations) == 0)
      lo = mid;
    else
      hi = mid;
  }
  res.lambda = 0.5 * (lo + hi);

  // Polish with inverse iteration shifted just below the eigenvalue, where
  // K - shift M is positive definite.
  const double shift = lo - 10.0 * opts.eig_tol;
  Eigen::SimplicialLDLT<Sparse> ldlt(Sparse(k - shift * m));
  ++res.factorizations;
  if (ldlt.info() == Eigen::Success) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(dim);
    v.normalize();
    double rho = res.lambda;
    for (int it = 0; it < 12; ++it) {
      Eigen::VectorXd w = ldlt.solve(m * v);
      const double nw = w.norm();
      if (!std::isfinite(nw) || nw == 0.0) break;
      v = w / nw;
      rho = v.dot(k * v) / v.dot(m * v);
    }
    const double resid = (k * v - rho * m * v).norm() / v.norm();
    if (std::isfinite(rho) && std::abs(rho - res.lambda) < 100.0 * opts.eig_tol + 1e-6) {
      res.lambda = rho;
      res.residual = resid;
    }
  }
  return res;
}

}  // namespace wkbconj
