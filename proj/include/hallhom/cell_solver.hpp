// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HALLHOM_CELL_SOLVER_HPP
#define HALLHOM_CELL_SOLVER_HPP

// Periodic cell problem on a uniform grid with conforming Q1 elements
// (bilinear in 2D, trilinear in 3D) and one constant tensor per element:
//
//   find a periodic, mean-free phi with
//   int_Y Sigma (lambda + grad phi) . grad v = 0   for all periodic Q1 v,
//
// so that W = lambda . y + phi. Periodicity is built into the node
// numbering (indices wrap), and the constant null space is projected out
// inside the Krylov iteration.

#include <array>
#include <cmath>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

#include "hallhom/error.hpp"
#include "hallhom/krylov.hpp"
#include "hallhom/microstructure.hpp"
#include "hallhom/tensor.hpp"

namespace hallhom
{

template <int D>
struct CorrectorField
{
  CellGeometry geometry;
  Vec<D> lambda{};
  std::vector<double> fluctuation;      // nodal values of phi, mean zero
  std::vector<Vec<D>> element_gradient; // element mean of grad W = lambda + grad phi
  SolveStats stats;
};

template <int D>
struct EffectiveTensor
{
  Mat<D> matrix;
  std::array<int, 3> grid{1, 1, 1};
  std::array<double, D> residuals{};
  std::array<std::size_t, D> iterations{};
  double coercivity = 0.0;
  double contrast = 1.0;
  KrylovMethod method = KrylovMethod::Auto;
};

template <int D>
struct Homogenization
{
  EffectiveTensor<D> tensor;
  std::array<CorrectorField<D>, D> correctors;
};

/// Exact element integrals of Q1 shape functions on a box element.
template <int D>
class Q1Element
{
public:
  static constexpr int kNodes = 1 << D;

  explicit Q1Element(const std::array<double, D> &h) : h_(h)
  {
    volume_ = 1.0;
    for (double s : h)
      volume_ *= s;
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b)
        for (int i = 0; i < kNodes; ++i)
          for (int j = 0; j < kNodes; ++j) {
            double v = 1.0;
            for (int d = 0; d < D; ++d) {
              const int p = bit(i, d), q = bit(j, d);
              if (d == a && d == b)
                v *= (p == q ? 1.0 : -1.0) / h[d];
              else if (d == a)
                v *= sign(p) / 2.0; // int phi'_p phi_q
              else if (d == b)
                v *= sign(q) / 2.0; // int phi_p phi'_q
              else
                v *= h[d] * (p == q ? 1.0 / 3.0 : 1.0 / 6.0);
            }
            g_[a][b][i][j] = v;
          }
    for (int i = 0; i < kNodes; ++i)
      for (int a = 0; a < D; ++a) {
        double v = sign(bit(i, a));
        for (int d = 0; d < D; ++d)
          if (d != a)
            v *= h[d] / 2.0;
        grad_int_[i][a] = v;
      }
  }

  static int bit(int node, int axis) { return (node >> axis) & 1; }

  /// K[i][j] = int A grad N_j . grad N_i
  std::array<std::array<double, kNodes>, kNodes> stiffness(const Mat<D> &a) const
  {
    std::array<std::array<double, kNodes>, kNodes> k{};
    for (int p = 0; p < D; ++p)
      for (int q = 0; q < D; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0)
          continue;
        for (int i = 0; i < kNodes; ++i)
          for (int j = 0; j < kNodes; ++j)
            k[i][j] += apq * g_[p][q][i][j];
      }
    return k;
  }

  /// int_e grad N_i
  const Vec<D> &gradient_integral(int i) const { return grad_int_[i]; }

  double volume() const { return volume_; }

private:
  static double sign(int b) { return b ? 1.0 : -1.0; }

  std::array<double, D> h_;
  double volume_;
  std::array<std::array<std::array<std::array<double, kNodes>, kNodes>, D>, D> g_{};
  std::array<Vec<D>, kNodes> grad_int_{};
};

/// Assembled periodic operator for one conductivity field; reused for every
/// load direction.
template <int D>
class CellProblem
{
public:
  static constexpr int kNodes = Q1Element<D>::kNodes;
  static constexpr int kStencil = D == 2 ? 9 : 27;

  explicit CellProblem(const ConductivityField<D> &field)
    : field_(field), element_(spacings(field.geometry()))
  {
    const CellGeometry &g = field.geometry();
    for (int a = 0; a < D; ++a)
      if (g.n[a] < 3)
        throw InvalidArgument("cell solver needs at least 3 elements per axis");
    for (const auto &a : field.palette())
      stiffness_.push_back(element_.stiffness(a));

    const std::size_t n = g.num_elements();
    matrix_.rows = n;
    matrix_.row_ptr.resize(n + 1);
    matrix_.col.resize(n * kStencil);
    matrix_.val.assign(n * kStencil, 0.0);
    for (std::size_t r = 0; r <= n; ++r)
      matrix_.row_ptr[r] = r * kStencil;
    for_each_cell([&](int i, int j, int k, std::size_t row) {
      for (int s = 0; s < kStencil; ++s) {
        std::array<int, 3> o{s % 3 - 1, (s / 3) % 3 - 1, D == 3 ? s / 9 - 1 : 0};
        matrix_.col[row * kStencil + s] = static_cast<std::uint32_t>(wrap_index(i + o[0], j + o[1], k + o[2]));
      }
    });
    for_each_cell([&](int i, int j, int k, std::size_t e) {
      const auto &ke = stiffness_[field_.phase_index()[e]];
      for (int li = 0; li < kNodes; ++li) {
        const std::size_t row = local_node(i, j, k, li);
        for (int lj = 0; lj < kNodes; ++lj) {
          int s = 0, stride = 1;
          for (int d = 0; d < D; ++d, stride *= 3)
            s += (Q1Element<D>::bit(lj, d) - Q1Element<D>::bit(li, d) + 1) * stride;
          matrix_.val[row * kStencil + s] += ke[li][lj];
        }
      }
    });
  }

  const CsrMatrix &matrix() const { return matrix_; }
  const ConductivityField<D> &field() const { return field_; }

  CorrectorField<D> solve(Vec<D> lambda, const SolverConfig &cfg) const
  {
    double len = 0.0;
    for (double v : lambda)
      len += v * v;
    len = std::sqrt(len);
    if (!(len > 0.0))
      throw InvalidArgument("load direction lambda must be nonzero");
    for (auto &v : lambda)
      v /= len;

    const CellGeometry &g = field_.geometry();
    const std::size_t n = g.num_elements();
    std::vector<double> rhs(n, 0.0), rhs_abs(n, 0.0);
    for_each_cell([&](int i, int j, int k, std::size_t e) {
      const Vec<D> flux = field_.tensor(e) * lambda;
      for (int l = 0; l < kNodes; ++l) {
        double c = 0.0;
        for (int a = 0; a < D; ++a)
          c -= flux[a] * element_.gradient_integral(l)[a];
        const std::size_t node = local_node(i, j, k, l);
        rhs[node] += c;
        rhs_abs[node] += std::abs(c);
      }
    });

    CorrectorField<D> out;
    out.geometry = g;
    out.lambda = lambda;
    out.fluctuation.assign(n, 0.0);
    // Loads that cancel exactly (constant fields, tangential laminate
    // loading) leave only round-off in the right-hand side.
    if (detail::norm2(rhs) > 1e-12 * detail::norm2(rhs_abs))
      out.stats = hallhom::solve(matrix_, rhs, out.fluctuation, cfg, field_.is_symmetric(), true);
    else
      out.stats = {0, 0.0, cfg.method};

    out.element_gradient.resize(n);
    for_each_cell([&](int i, int j, int k, std::size_t e) {
      Vec<D> grad = lambda;
      for (int l = 0; l < kNodes; ++l) {
        const double phi = out.fluctuation[local_node(i, j, k, l)];
        for (int a = 0; a < D; ++a)
          grad[a] += phi * element_.gradient_integral(l)[a] / element_.volume();
      }
      out.element_gradient[e] = grad;
    });
    return out;
  }

  /// Relative residual of the discrete weak form for a corrector.
  double weak_form_residual(const CorrectorField<D> &c) const
  {
    const std::size_t n = field_.geometry().num_elements();
    std::vector<double> r(n, 0.0), scale(n, 0.0), kx(n);
    for_each_cell([&](int i, int j, int k, std::size_t e) {
      const Vec<D> flux = field_.tensor(e) * c.lambda;
      for (int l = 0; l < kNodes; ++l) {
        double v = 0.0;
        for (int a = 0; a < D; ++a)
          v += flux[a] * element_.gradient_integral(l)[a];
        r[local_node(i, j, k, l)] += v;
        scale[local_node(i, j, k, l)] += std::abs(v);
      }
    });
    matrix_.apply(c.fluctuation, kx);
    for (std::size_t i = 0; i < n; ++i)
      r[i] += kx[i];
    return detail::norm2(r) / std::max(detail::norm2(scale), 1e-300);
  }

  /// (1/|Y|) int_Y Sigma grad W^lambda . grad W^mu, integrated exactly.
  double energy_form(const CorrectorField<D> &wl, const CorrectorField<D> &wm) const
  {
    double total = 0.0;
    const double vol = element_.volume();
    for_each_cell([&](int i, int j, int k, std::size_t e) {
      const Mat<D> &a = field_.tensor(e);
      const auto &ke = stiffness_[field_.phase_index()[e]];
      std::array<double, kNodes> phi{}, psi{};
      Vec<D> int_grad_phi{}, int_grad_psi{};
      for (int l = 0; l < kNodes; ++l) {
        const std::size_t node = local_node(i, j, k, l);
        phi[l] = wl.fluctuation[node];
        psi[l] = wm.fluctuation[node];
        for (int d = 0; d < D; ++d) {
          int_grad_phi[d] += phi[l] * element_.gradient_integral(l)[d];
          int_grad_psi[d] += psi[l] * element_.gradient_integral(l)[d];
        }
      }
      const Vec<D> al = a * wl.lambda;
      const Vec<D> agphi = a * int_grad_phi;
      double v = 0.0;
      for (int d = 0; d < D; ++d)
        v += vol * al[d] * wm.lambda[d] + al[d] * int_grad_psi[d] + agphi[d] * wm.lambda[d];
      for (int li = 0; li < kNodes; ++li)
        for (int lj = 0; lj < kNodes; ++lj)
          v += psi[li] * ke[li][lj] * phi[lj];
      total += v;
    });
    return total / field_.geometry().cell_volume();
  }

private:
  static std::array<double, D> spacings(const CellGeometry &g)
  {
    std::array<double, D> h{};
    for (int a = 0; a < D; ++a)
      h[a] = g.spacing(a);
    return h;
  }

  std::size_t wrap_index(int i, int j, int k) const
  {
    const auto &n = field_.geometry().n;
    auto w = [](int v, int m) { return ((v % m) + m) % m; };
    return field_.geometry().index(w(i, n[0]), w(j, n[1]), w(k, n[2]));
  }

  std::size_t local_node(int i, int j, int k, int l) const
  {
    return wrap_index(i + Q1Element<D>::bit(l, 0), j + Q1Element<D>::bit(l, 1),
                      D == 3 ? k + Q1Element<D>::bit(l, 2) : 0);
  }

  template <class F>
  void for_each_cell(F &&f) const
  {
    const auto &g = field_.geometry();
    std::size_t e = 0;
    for (int k = 0; k < g.n[2]; ++k)
      for (int j = 0; j < g.n[1]; ++j)
        for (int i = 0; i < g.n[0]; ++i, ++e)
          f(i, j, k, e);
  }

  const ConductivityField<D> &field_;
  Q1Element<D> element_;
  std::vector<std::array<std::array<double, kNodes>, kNodes>> stiffness_;
  CsrMatrix matrix_;
};

template <int D>
CorrectorField<D> solve_corrector(const ConductivityField<D> &field, const Vec<D> &lambda,
                                  const SolverConfig &cfg = {})
{
  return CellProblem<D>(field).solve(lambda, cfg);
}

/// Effective tensor with entries (sigma* e_c) . e_r = (1/|Y|) int Sigma grad W^{e_c} . grad W^{e_r},
/// together with the d correctors. The d solves run on up to `threads`
/// threads; results do not depend on the thread count.
template <int D>
Homogenization<D> homogenize(const ConductivityField<D> &field, const SolverConfig &cfg = {}, int threads = 1)
{
  cfg.validate();
  const CellProblem<D> problem(field);
  Homogenization<D> out;
  auto solve_dir = [&](int c) {
    Vec<D> e{};
    e[c] = 1.0;
    out.correctors[c] = problem.solve(e, cfg);
  };
  if (threads > 1) {
    std::vector<std::thread> pool;
    std::array<std::exception_ptr, D> errors{};
    for (int c = 0; c < D; ++c)
      pool.emplace_back([&, c] {
        try {
          solve_dir(c);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    for (auto &t : pool)
      t.join();
    for (auto &err : errors)
      if (err)
        std::rethrow_exception(err);
  } else {
    for (int c = 0; c < D; ++c)
      solve_dir(c);
  }

  EffectiveTensor<D> &t = out.tensor;
  for (int r = 0; r < D; ++r)
    for (int c = 0; c < D; ++c)
      t.matrix(r, c) = problem.energy_form(out.correctors[c], out.correctors[r]);
  t.grid = field.geometry().n;
  for (int c = 0; c < D; ++c) {
    t.residuals[c] = out.correctors[c].stats.relative_residual;
    t.iterations[c] = out.correctors[c].stats.iterations;
  }
  t.coercivity = field.coercivity();
  t.contrast = field.contrast();
  t.method = out.correctors[0].stats.method;
  return out;
}

template <int D>
EffectiveTensor<D> effective_tensor(const ConductivityField<D> &field, const SolverConfig &cfg = {}, int threads = 1)
{
  return homogenize(field, cfg, threads).tensor;
}

/// Mean of grad W over the phase-2 elements of `mask`.
template <int D>
Vec<D> fiber_average_gradient(const CorrectorField<D> &corrector, const PhaseMask &mask)
{
  if (!(mask.geometry == corrector.geometry))
    throw InvalidArgument("corrector and mask live on different grids");
  Vec<D> sum{};
  std::size_t count = 0;
  for (std::size_t e = 0; e < mask.flags.size(); ++e) {
    if (!mask.flags[e])
      continue;
    ++count;
    for (int a = 0; a < D; ++a)
      sum[a] += corrector.element_gradient[e][a];
  }
  if (count == 0)
    throw InvalidArgument("fiber_average_gradient: mask has no phase-2 elements");
  for (auto &v : sum)
    v /= static_cast<double>(count);
  return sum;
}

} // namespace hallhom

#endif // HALLHOM_CELL_SOLVER_HPP
