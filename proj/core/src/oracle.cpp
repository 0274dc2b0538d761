#include "rht/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rht/errors.hpp"
#include "rht/logsum.hpp"
#include "rht/simplex_lp.hpp"

namespace rht {

namespace {

std::vector<double> log_table_of(const JointPmf& p) {
  std::vector<double> lp(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) lp[i] = p[i] > 0.0 ? std::log(p[i]) : kNegInf;
  return lp;
}

OracleResult finish_result(const TypeSystem& ts, std::vector<double> accept, int n,
                           const std::vector<double>& log_p_class) {
  OracleResult res;
  res.test.n = n;
  res.test.accept = std::move(accept);
  double la = kNegInf, lc = kNegInf;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (log_p_class[i] == kNegInf) continue;
    double t = res.test.accept[i];
    if (t < 1.0) la = log_add(la, log_p_class[i] + std::log1p(-t));
    if (t > 0.0) lc = log_add(lc, log_p_class[i] + std::log(t));
  }
  res.log_alpha = la;
  res.log_complement = lc;
  res.alpha = std::exp(la);
  return res;
}

}  // namespace

OracleResult np_simple(const JointPmf& p, const JointPmf& q, int n, double log_mu,
                       std::size_t cap) {
  if (p.shape() != q.shape()) throw StructuralError("np_simple: shape mismatch");
  if (std::isnan(log_mu)) throw StructuralError("np_simple: budget is NaN");
  TypeSystem ts(p.size(), n, cap);
  const std::size_t nt = ts.size();
  const auto lp = log_table_of(p);
  const auto lq = log_table_of(q);
  std::vector<double> log_p_class(nt), log_q_class(nt), lr(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    log_p_class[i] = ts.log_class_mass(lp, i);
    log_q_class[i] = ts.log_class_mass(lq, i);
    if (log_p_class[i] == kNegInf)
      lr[i] = kNegInf;  // invisible under P: spend no budget on it
    else if (log_q_class[i] == kNegInf)
      lr[i] = kPosInf;  // free acceptance
    else
      lr[i] = log_p_class[i] - log_q_class[i];
  }

  std::vector<std::size_t> order(nt);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return lr[a] > lr[b]; });

  std::vector<double> accept(nt, 0.0);
  if (log_mu >= 0.0) {
    // budget of one or more admits everything
    for (std::size_t i = 0; i < nt; ++i) accept[i] = 1.0;
    return finish_result(ts, std::move(accept), n, log_p_class);
  }
  double log_cum = kNegInf;
  for (std::size_t k = 0; k < nt; ++k) {
    std::size_t i = order[k];
    if (lr[i] == kNegInf) break;  // nothing below matters for alpha
    if (log_q_class[i] == kNegInf) {
      accept[i] = 1.0;
      continue;
    }
    double new_cum = log_add(log_cum, log_q_class[i]);
    if (new_cum <= log_mu) {
      accept[i] = 1.0;
      log_cum = new_cum;
      continue;
    }
    double log_rem = log_sub(log_mu, log_cum);
    if (log_rem != kNegInf) {
      double t = std::exp(log_rem - log_q_class[i]);
      accept[i] = std::min(1.0, std::max(0.0, t));
    }
    break;  // budget exhausted; later classes stay rejected
  }
  return finish_result(ts, std::move(accept), n, log_p_class);
}

OracleResult np_simple(const Pmf& p, const Pmf& q, int n, double log_mu, std::size_t cap) {
  return np_simple(JointPmf::from_pmf(p), JointPmf::from_pmf(q), n, log_mu, cap);
}

OracleResult composite_lp(const JointPmf& p, const FamilySpec& family, int n, double log_mu,
                          std::span<const JointPmf> members, std::size_t cap) {
  family.validate_against(p);
  if (members.empty()) throw StructuralError("composite_lp: empty member grid");
  if (std::isnan(log_mu)) throw StructuralError("composite_lp: budget is NaN");
  TypeSystem ts(p.size(), n, cap);
  const std::size_t nt = ts.size();
  const auto lp = log_table_of(p);
  std::vector<double> log_p_class(nt);
  for (std::size_t i = 0; i < nt; ++i) log_p_class[i] = ts.log_class_mass(lp, i);

  // maximize accepted null mass subject to per-member budgets, with rows
  // scaled by the budget so the right hand side is one
  std::vector<std::vector<double>> rows;
  rows.reserve(members.size());
  for (const JointPmf& mem : members) {
    if (mem.size() != p.size())
      throw StructuralError("composite_lp: member alphabet does not match the null");
    const auto lqm = log_table_of(mem);
    std::vector<double> row(nt, 0.0);
    for (std::size_t i = 0; i < nt; ++i) {
      double lc = ts.log_class_mass(lqm, i);
      if (lc != kNegInf) row[i] = std::exp(lc - log_mu);
    }
    rows.push_back(std::move(row));
  }
  std::vector<double> b(members.size(), 1.0);
  std::vector<double> c(nt, 0.0);
  for (std::size_t i = 0; i < nt; ++i)
    c[i] = log_p_class[i] == kNegInf ? 0.0 : std::exp(log_p_class[i]);
  std::vector<double> upper(nt, 1.0);

  LpResult lpres = solve_box_lp(rows, b, c, upper);

  std::vector<double> accept(nt);
  for (std::size_t i = 0; i < nt; ++i)
    accept[i] = std::min(1.0, std::max(0.0, lpres.x[i]));
  OracleResult res = finish_result(ts, std::move(accept), n, log_p_class);
  res.binding_members = std::move(lpres.tight_rows);
  return res;
}

std::vector<JointPmf> family_member_grid(const JointPmf& p, const FamilySpec& family,
                                         int points_per_axis) {
  family.validate_against(p);
  if (points_per_axis < 2) throw StructuralError("family_member_grid: need at least 2 points");
  const int res = points_per_axis - 1;  // lattice denominator

  // grids are cartesian products of simplex lattices over the free factors;
  // refuse blow-ups instead of silently sampling
  constexpr double kMemberCap = 20000.0;
  {
    auto lattice_size = [&](std::size_t d) {
      return static_cast<double>(count_types(d, res));
    };
    double total = 1.0;
    switch (family.kind()) {
      case FamilySpec::Kind::kSingleton:
        total = 1.0;
        break;
      case FamilySpec::Kind::kFixedMarginalProduct:
        total = lattice_size(p.size() / p.shape()[0]);
        break;
      case FamilySpec::Kind::kGeneralProduct:
        for (std::size_t a = 0; a < p.rank(); ++a) total *= lattice_size(p.shape()[a]);
        break;
      case FamilySpec::Kind::kMarkovRecovery:
        total = std::pow(lattice_size(p.shape()[2]), static_cast<double>(p.shape()[1]));
        break;
      case FamilySpec::Kind::kMarkovAll:
        total = lattice_size(p.shape()[1]) *
                std::pow(lattice_size(p.shape()[0]) * lattice_size(p.shape()[2]),
                         static_cast<double>(p.shape()[1]));
        break;
    }
    if (total > kMemberCap) {
      std::ostringstream os;
      os << "family_member_grid: " << total << " members at " << points_per_axis
         << " points per axis exceeds the cap " << static_cast<std::size_t>(kMemberCap)
         << "; lower oracle.grid_points";
      throw CapacityError(os.str());
    }
  }

  auto lattice = [&](std::size_t d) {
    std::vector<Pmf> pts;
    for (const TypeClass& t : enumerate_types(d, res)) {
      std::vector<double> w(d);
      for (std::size_t i = 0; i < d; ++i) w[i] = static_cast<double>(t.counts[i]) / res;
      pts.push_back(Pmf::normalized(std::move(w)));
    }
    return pts;
  };

  std::vector<JointPmf> members;
  switch (family.kind()) {
    case FamilySpec::Kind::kSingleton:
      members.push_back(family.member());
      break;
    case FamilySpec::Kind::kFixedMarginalProduct: {
      const Pmf& t = family.fixed_marginal();
      const std::size_t tail = p.size() / p.shape()[0];
      auto assemble = [&](const Pmf& qy) {
        std::vector<double> w(p.size());
        for (std::size_t x = 0; x < p.shape()[0]; ++x)
          for (std::size_t y = 0; y < tail; ++y) w[x * tail + y] = t[x] * qy[y];
        return JointPmf::normalized(p.shape(), std::move(w), p.axis_names());
      };
      const JointPmf grouped = p.rank() == 2 ? p : p.group_trailing_axes(1);
      members.push_back(assemble(grouped.marginal(1)));
      for (const Pmf& qy : lattice(tail)) members.push_back(assemble(qy));
      break;
    }
    case FamilySpec::Kind::kGeneralProduct: {
      std::vector<Pmf> own;
      for (std::size_t a = 0; a < p.rank(); ++a) own.push_back(p.marginal(a));
      members.push_back(JointPmf::product(own, p.axis_names()));
      std::vector<std::vector<Pmf>> axis_pts;
      for (std::size_t a = 0; a < p.rank(); ++a) axis_pts.push_back(lattice(p.shape()[a]));
      std::vector<std::size_t> pick(p.rank(), 0);
      while (true) {
        std::vector<Pmf> fs;
        for (std::size_t a = 0; a < p.rank(); ++a) fs.push_back(axis_pts[a][pick[a]]);
        members.push_back(JointPmf::product(fs, p.axis_names()));
        std::size_t a = p.rank();
        bool done = true;
        while (a > 0) {
          --a;
          if (++pick[a] < axis_pts[a].size()) {
            done = false;
            break;
          }
          pick[a] = 0;
        }
        if (done) break;
      }
      break;
    }
    case FamilySpec::Kind::kMarkovRecovery: {
      const auto& shape = p.shape();
      const std::size_t nx = shape[0], ny = shape[1], nz = shape[2];
      std::array<std::size_t, 2> xy_axes{0, 1};
      const JointPmf pxy = p.marginal_axes(xy_axes);
      auto assemble = [&](const std::vector<Pmf>& rows) {
        std::vector<double> w(nx * ny * nz);
        for (std::size_t x = 0; x < nx; ++x)
          for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t z = 0; z < nz; ++z)
              w[(x * ny + y) * nz + z] = pxy[x * ny + y] * rows[y][z];
        return JointPmf::normalized(shape, std::move(w), p.axis_names());
      };
      // the null's own recovery channel first
      {
        std::vector<Pmf> rows;
        const Pmf py = p.marginal(1);
        std::array<std::size_t, 2> yz_axes{1, 2};
        const JointPmf pyz = p.marginal_axes(yz_axes);
        for (std::size_t y = 0; y < ny; ++y) {
          std::vector<double> r(nz, 1.0);
          if (py[y] > 0.0)
            for (std::size_t z = 0; z < nz; ++z) r[z] = pyz[y * nz + z] / py[y];
          rows.push_back(Pmf::normalized(std::move(r)));
        }
        members.push_back(assemble(rows));
      }
      auto zrows = lattice(nz);
      std::vector<std::size_t> pick(ny, 0);
      while (true) {
        std::vector<Pmf> rows;
        for (std::size_t y = 0; y < ny; ++y) rows.push_back(zrows[pick[y]]);
        members.push_back(assemble(rows));
        std::size_t y = ny;
        bool done = true;
        while (y > 0) {
          --y;
          if (++pick[y] < zrows.size()) {
            done = false;
            break;
          }
          pick[y] = 0;
        }
        if (done) break;
      }
      break;
    }
    case FamilySpec::Kind::kMarkovAll: {
      const auto& shape = p.shape();
      const std::size_t nx = shape[0], ny = shape[1], nz = shape[2];
      auto assemble = [&](const Pmf& qy, const std::vector<Pmf>& xrows,
                          const std::vector<Pmf>& zrows) {
        std::vector<double> w(nx * ny * nz);
        for (std::size_t x = 0; x < nx; ++x)
          for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t z = 0; z < nz; ++z)
              w[(x * ny + y) * nz + z] = qy[y] * xrows[y][x] * zrows[y][z];
        return JointPmf::normalized(shape, std::move(w), p.axis_names());
      };
      // null's Markov projection
      {
        const Pmf py = p.marginal(1);
        std::array<std::size_t, 2> xy_axes{0, 1};
        std::array<std::size_t, 2> yz_axes{1, 2};
        const JointPmf pxy = p.marginal_axes(xy_axes);
        const JointPmf pyz = p.marginal_axes(yz_axes);
        std::vector<Pmf> xrows, zrows;
        for (std::size_t y = 0; y < ny; ++y) {
          std::vector<double> rx(nx, 1.0), rz(nz, 1.0);
          if (py[y] > 0.0) {
            for (std::size_t x = 0; x < nx; ++x) rx[x] = pxy[x * ny + y] / py[y];
            for (std::size_t z = 0; z < nz; ++z) rz[z] = pyz[y * nz + z] / py[y];
          }
          xrows.push_back(Pmf::normalized(std::move(rx)));
          zrows.push_back(Pmf::normalized(std::move(rz)));
        }
        members.push_back(assemble(py, xrows, zrows));
      }
      auto ypts = lattice(ny);
      auto xpts = lattice(nx);
      auto zpts = lattice(nz);
      // full product over (q_y, per-y x-rows, per-y z-rows)
      std::vector<std::size_t> pick(1 + 2 * ny, 0);
      std::vector<std::size_t> sizes(1 + 2 * ny);
      sizes[0] = ypts.size();
      for (std::size_t y = 0; y < ny; ++y) {
        sizes[1 + y] = xpts.size();
        sizes[1 + ny + y] = zpts.size();
      }
      while (true) {
        std::vector<Pmf> xrows, zrows;
        for (std::size_t y = 0; y < ny; ++y) {
          xrows.push_back(xpts[pick[1 + y]]);
          zrows.push_back(zpts[pick[1 + ny + y]]);
        }
        members.push_back(assemble(ypts[pick[0]], xrows, zrows));
        std::size_t k = pick.size();
        bool done = true;
        while (k > 0) {
          --k;
          if (++pick[k] < sizes[k]) {
            done = false;
            break;
          }
          pick[k] = 0;
        }
        if (done) break;
      }
      break;
    }
  }
  return members;
}

namespace {

FitResult least_squares_fit(const std::vector<double>& ns, const std::vector<double>& ys,
                            bool include_log_n) {
  const std::size_t m = ns.size();
  const std::size_t k = include_log_n ? 3 : 2;
  // columns: 1, n, [log n]; classic Gram-Schmidt QR is plenty at this size
  std::vector<std::vector<double>> cols(k, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i) {
    cols[0][i] = 1.0;
    cols[1][i] = ns[i];
    if (include_log_n) cols[2][i] = std::log(ns[i]);
  }
  std::vector<std::vector<double>> q(k, std::vector<double>(m));
  std::vector<std::vector<double>> r(k, std::vector<double>(k, 0.0));
  for (std::size_t j = 0; j < k; ++j) {
    q[j] = cols[j];
    for (std::size_t l = 0; l < j; ++l) {
      double dot = 0.0;
      for (std::size_t i = 0; i < m; ++i) dot += q[l][i] * cols[j][i];
      r[l][j] = dot;
      for (std::size_t i = 0; i < m; ++i) q[j][i] -= dot * q[l][i];
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < m; ++i) nrm += q[j][i] * q[j][i];
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0)) throw StructuralError("exponent_fit: collinear regressors");
    r[j][j] = nrm;
    for (std::size_t i = 0; i < m; ++i) q[j][i] /= nrm;
  }
  std::vector<double> qty(k, 0.0);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < m; ++i) qty[j] += q[j][i] * ys[i];
  std::vector<double> beta(k, 0.0);
  for (std::size_t j = k; j-- > 0;) {
    double v = qty[j];
    for (std::size_t l = j + 1; l < k; ++l) v -= r[j][l] * beta[l];
    beta[j] = v / r[j][j];
  }
  FitResult fit;
  fit.intercept = beta[0];
  fit.slope = beta[1];
  fit.log_n_coeff = include_log_n ? beta[2] : 0.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double pred = beta[0] + beta[1] * ns[i] + (include_log_n ? beta[2] * std::log(ns[i]) : 0.0);
    ss += (ys[i] - pred) * (ys[i] - pred);
  }
  fit.residual_rms = std::sqrt(ss / m);
  fit.points_used = static_cast<int>(m);
  return fit;
}

}  // namespace

FitResult exponent_fit(std::span<const FitPoint> points, FitMode mode, bool include_log_n) {
  std::vector<double> ns, ys;
  for (const FitPoint& pt : points) {
    double ly = mode == FitMode::kErrorExponent ? pt.log_alpha : pt.log_complement;
    // alpha in {0,1} makes the relevant log exactly zero or -inf
    if (ly == 0.0 || ly == kNegInf || !std::isfinite(ly)) continue;
    ns.push_back(static_cast<double>(pt.n));
    ys.push_back(-ly);
  }
  if (ns.size() < 3)
    throw StructuralError("exponent_fit: fewer than 3 usable points after exclusions");
  return least_squares_fit(ns, ys, include_log_n);
}

FitResult exponent_fit(std::span<const std::pair<int, double>> points, FitMode mode,
                       bool include_log_n) {
  std::vector<FitPoint> pts;
  for (const auto& [n, alpha] : points) {
    FitPoint p;
    p.n = n;
    p.log_alpha = alpha > 0.0 ? std::log(alpha) : kNegInf;
    p.log_complement = alpha < 1.0 ? std::log1p(-alpha) : kNegInf;
    pts.push_back(p);
  }
  return exponent_fit(std::span<const FitPoint>(pts), mode, include_log_n);
}

}  // namespace rht
