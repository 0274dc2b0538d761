#include "rht/families.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rht/errors.hpp"
#include "rht/logsum.hpp"

namespace rht {

namespace {

std::vector<double> log_table(std::span<const double> p) {
  std::vector<double> lp(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) lp[i] = p[i] > 0.0 ? std::log(p[i]) : kNegInf;
  return lp;
}

// Coordinates of every flat index along every axis, row-major.
std::vector<std::vector<std::size_t>> coordinate_table(const std::vector<std::size_t>& shape,
                                                       std::size_t total) {
  std::vector<std::size_t> strides(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) strides[i - 1] = strides[i] * shape[i];
  std::vector<std::vector<std::size_t>> coord(shape.size(), std::vector<std::size_t>(total));
  for (std::size_t flat = 0; flat < total; ++flat)
    for (std::size_t a = 0; a < shape.size(); ++a)
      coord[a][flat] = (flat / strides[a]) % shape[a];
  return coord;
}

XReal divergence_against(const JointPmf& p, const JointPmf& q, const RenyiOrder& s) {
  return renyi_divergence(p.flatten(), q.probs(), s);
}

// Markov projection P_Y x P_{X|Y} x P_{Z|Y} of a three-axis joint.
JointPmf markov_projection(const JointPmf& p) {
  const auto& shape = p.shape();
  const std::size_t nx = shape[0], ny = shape[1], nz = shape[2];
  std::vector<double> py(ny, 0.0), pxy(nx * ny, 0.0), pyz(ny * nz, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t z = 0; z < nz; ++z) {
        double v = p[(x * ny + y) * nz + z];
        py[y] += v;
        pxy[x * ny + y] += v;
        pyz[y * nz + z] += v;
      }
  std::vector<double> out(nx * ny * nz, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t z = 0; z < nz; ++z)
        if (py[y] > 0.0)
          out[(x * ny + y) * nz + z] = pxy[x * ny + y] * pyz[y * nz + z] / py[y];
  return JointPmf::normalized(shape, std::move(out), p.axis_names());
}

// min/max over Q_{Z|Y} of D_s(P_XYZ || P_XY x Q_{Z|Y}); the per-y problems
// are independent and each is the closed-form optimizer with exponent 1/s.
MinimizerResult recovery_minimize(const JointPmf& p, const RenyiOrder& s) {
  if (p.rank() != 3) throw StructuralError("recovery family needs a three-axis joint");
  const auto& shape = p.shape();
  const std::size_t nx = shape[0], ny = shape[1], nz = shape[2];
  const Pmf py = p.marginal(1);
  std::array<std::size_t, 2> xy_axes{0, 1};
  const JointPmf pxy = p.marginal_axes(xy_axes);

  std::vector<double> rows(ny * nz, 0.0);
  if (s.is_one()) {
    // optimizer is the null's own conditional P_{Z|Y}
    for (std::size_t y = 0; y < ny; ++y) {
      if (!(py[y] > 0.0)) {
        for (std::size_t z = 0; z < nz; ++z) rows[y * nz + z] = 1.0;
        continue;
      }
      for (std::size_t x = 0; x < nx; ++x)
        for (std::size_t z = 0; z < nz; ++z) rows[y * nz + z] += p[(x * ny + y) * nz + z];
      for (std::size_t z = 0; z < nz; ++z) rows[y * nz + z] /= py[y];
    }
  } else {
    const double sv = s.value();
    for (std::size_t y = 0; y < ny; ++y) {
      if (!(py[y] > 0.0)) {
        for (std::size_t z = 0; z < nz; ++z) rows[y * nz + z] = 1.0;
        continue;
      }
      std::vector<double> logw(nz, kNegInf);
      for (std::size_t z = 0; z < nz; ++z) {
        double acc = kNegInf;
        for (std::size_t x = 0; x < nx; ++x) {
          double pv = p[(x * ny + y) * nz + z];
          if (!(pv > 0.0)) continue;
          double tx = pxy[x * ny + y] / py[y];
          acc = log_add(acc, sv * std::log(pv) + (1.0 - sv) * std::log(tx));
        }
        logw[z] = acc == kNegInf ? kNegInf : acc / sv;
      }
      double norm = log_sum_exp(logw);
      for (std::size_t z = 0; z < nz; ++z)
        rows[y * nz + z] = logw[z] == kNegInf ? 0.0 : std::exp(logw[z] - norm);
    }
  }
  Channel q_z(Channel::normalized(ny, nz, rows));

  std::vector<double> joint(nx * ny * nz, 0.0);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y)
      for (std::size_t z = 0; z < nz; ++z)
        joint[(x * ny + y) * nz + z] = pxy[x * ny + y] * q_z.at(y, z);
  JointPmf argmin = JointPmf::normalized(shape, std::move(joint), p.axis_names());
  XReal d = divergence_against(p, argmin, s);
  MinimizerResult res{d, d, std::move(argmin), {}, 0, true, true};
  res.factors.emplace_back("q_z_given_y", std::move(q_z));
  return res;
}

MinimizerResult singleton_result(const JointPmf& p, JointPmf member, const RenyiOrder& s) {
  XReal d = divergence_against(p, member, s);
  return MinimizerResult{d, d, std::move(member), {}, 0, true, true};
}

}  // namespace

FamilySpec FamilySpec::singleton(JointPmf member) {
  FamilySpec f(Kind::kSingleton);
  f.member_ = std::move(member);
  return f;
}

FamilySpec FamilySpec::fixed_marginal_product(Pmf fixed_axis0) {
  if (!fixed_axis0.full_support())
    throw StructuralError("fixed marginal must have full support");
  FamilySpec f(Kind::kFixedMarginalProduct);
  f.fixed_marginal_ = std::move(fixed_axis0);
  return f;
}

FamilySpec FamilySpec::general_product(int free_factors, bool unconstrained_tail) {
  if (free_factors < 1) throw StructuralError("general product needs at least one free factor");
  FamilySpec f(Kind::kGeneralProduct);
  f.free_factors_ = free_factors;
  f.unconstrained_tail_ = unconstrained_tail;
  return f;
}

FamilySpec FamilySpec::markov_recovery() { return FamilySpec(Kind::kMarkovRecovery); }
FamilySpec FamilySpec::markov_all() { return FamilySpec(Kind::kMarkovAll); }

const JointPmf& FamilySpec::member() const {
  if (!member_) throw StructuralError("family has no singleton member");
  return *member_;
}

const Pmf& FamilySpec::fixed_marginal() const {
  if (!fixed_marginal_) throw StructuralError("family has no fixed marginal");
  return *fixed_marginal_;
}

double FamilySpec::order_lower() const {
  switch (kind_) {
    case Kind::kGeneralProduct:
      return static_cast<double>(free_factors_) / (free_factors_ + 1.0);
    case Kind::kMarkovAll:
      return 2.0 / 3.0;
    default:
      return 0.0;
  }
}

double FamilySpec::order_upper() const { return kPosInf; }

bool FamilySpec::order_valid(const RenyiOrder& s) const {
  if (s.is_one()) return true;
  if (s.is_zero() || s.is_infinity()) return kind_ == Kind::kSingleton;
  return s.value() > order_lower();
}

void FamilySpec::require_order(const RenyiOrder& s) const {
  if (order_valid(s)) return;
  std::ostringstream os;
  os << "order outside the validity interval (" << order_lower() << ", inf) of family "
     << variant_name();
  throw OrderError(os.str());
}

void FamilySpec::validate_against(const JointPmf& null_dist) const {
  switch (kind_) {
    case Kind::kSingleton:
      if (member().shape() != null_dist.shape())
        throw StructuralError("singleton member shape does not match the null distribution");
      break;
    case Kind::kFixedMarginalProduct:
      if (null_dist.rank() < 2)
        throw StructuralError("fixed-marginal product family needs at least two axes");
      if (fixed_marginal().size() != null_dist.shape()[0])
        throw StructuralError("fixed marginal size does not match axis 0 of the null");
      break;
    case Kind::kGeneralProduct: {
      std::size_t expected = static_cast<std::size_t>(free_factors_) + (unconstrained_tail_ ? 1 : 0);
      if (null_dist.rank() != expected) {
        std::ostringstream os;
        os << "general product family expects " << expected << " axes, null has "
           << null_dist.rank();
        throw StructuralError(os.str());
      }
      break;
    }
    case Kind::kMarkovRecovery:
    case Kind::kMarkovAll:
      if (null_dist.rank() != 3)
        throw StructuralError("Markov families need a three-axis joint");
      break;
  }
}

std::string FamilySpec::variant_name() const {
  switch (kind_) {
    case Kind::kSingleton: return "singleton";
    case Kind::kFixedMarginalProduct: return "fixed-marginal-product";
    case Kind::kGeneralProduct: return "general-product";
    case Kind::kMarkovRecovery: return "markov-recovery";
    case Kind::kMarkovAll: return "markov-all";
  }
  return "?";
}

MinimizerResult sibson_minimize(const JointPmf& p_xy, const Pmf& t_x, const RenyiOrder& s) {
  if (p_xy.rank() != 2) throw StructuralError("sibson_minimize needs a two-axis joint");
  const std::size_t nx = p_xy.shape()[0], ny = p_xy.shape()[1];
  if (t_x.size() != nx) throw StructuralError("T_X size does not match axis 0");
  if (!t_x.full_support()) throw StructuralError("T_X must have full support");
  if (s.is_zero() || s.is_infinity())
    throw OrderError("sibson_minimize: order must be in (0,1) u (1,inf), or 1 for the KL branch");

  const Pmf py = p_xy.marginal(1);
  std::vector<double> q(ny, 0.0);
  if (s.is_one()) {
    for (std::size_t y = 0; y < ny; ++y) q[y] = py[y];
  } else {
    const double sv = s.value();
    std::vector<double> logw(ny, kNegInf);
    for (std::size_t y = 0; y < ny; ++y) {
      double acc = kNegInf;
      for (std::size_t x = 0; x < nx; ++x) {
        double pv = p_xy[x * ny + y];
        if (!(pv > 0.0)) continue;
        acc = log_add(acc, sv * std::log(pv) + (1.0 - sv) * std::log(t_x[x]));
      }
      logw[y] = acc == kNegInf ? kNegInf : acc / sv;
    }
    double norm = log_sum_exp(logw);
    for (std::size_t y = 0; y < ny; ++y) q[y] = logw[y] == kNegInf ? 0.0 : std::exp(logw[y] - norm);
  }
  Pmf q_y = Pmf::normalized(std::move(q));

  std::vector<double> joint(nx * ny);
  for (std::size_t x = 0; x < nx; ++x)
    for (std::size_t y = 0; y < ny; ++y) joint[x * ny + y] = t_x[x] * q_y[y];
  JointPmf argmin = JointPmf::normalized(p_xy.shape(), std::move(joint), p_xy.axis_names());
  XReal d = divergence_against(p_xy, argmin, s);
  MinimizerResult res{d, d, std::move(argmin), {}, 0, true, true};
  res.factors.emplace_back("t_x", t_x);
  res.factors.emplace_back("q_y", std::move(q_y));
  return res;
}

XReal cond_mutual_info_recovery_value(const JointPmf& p, const RenyiOrder& s) {
  if (p.rank() != 3) throw StructuralError("needs a three-axis joint");
  if (!s.is_general()) throw OrderError("closed form is for s in (0,1) u (1,inf)");
  const double sv = s.value();
  const auto& shape = p.shape();
  const std::size_t nx = shape[0], ny = shape[1], nz = shape[2];
  const Pmf py = p.marginal(1);

  // sum_y P_Y(y) ( sum_z P_{Z|Y=y}(z) ( sum_x P_{X|YZ}(x|y,z)^s P_{X|Y}(x|y)^{1-s} )^{1/s} )^s
  double outer = kNegInf;
  for (std::size_t y = 0; y < ny; ++y) {
    if (!(py[y] > 0.0)) continue;
    std::vector<double> pxz(nx * nz);
    double norm_y = py[y];
    std::vector<double> px_given_y(nx, 0.0);
    std::vector<double> pz_given_y(nz, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t z = 0; z < nz; ++z) {
        double v = p[(x * ny + y) * nz + z] / norm_y;
        pxz[x * nz + z] = v;
        px_given_y[x] += v;
        pz_given_y[z] += v;
      }
    double mid = kNegInf;
    for (std::size_t z = 0; z < nz; ++z) {
      if (!(pz_given_y[z] > 0.0)) continue;
      double inner = kNegInf;
      for (std::size_t x = 0; x < nx; ++x) {
        double v = pxz[x * nz + z];
        if (!(v > 0.0)) continue;
        double x_given_yz = v / pz_given_y[z];
        if (!(px_given_y[x] > 0.0)) continue;
        inner = log_add(inner, sv * std::log(x_given_yz) + (1.0 - sv) * std::log(px_given_y[x]));
      }
      if (inner == kNegInf) continue;
      mid = log_add(mid, std::log(pz_given_y[z]) + inner / sv);
    }
    if (mid == kNegInf) continue;
    outer = log_add(outer, std::log(py[y]) + sv * mid);
  }
  if (outer == kNegInf) return XReal::infinity();
  return XReal::finite(outer / (sv - 1.0));
}

MinimizerResult closed_form_measure(MeasureKind kind, const JointPmf& p, const RenyiOrder& s) {
  switch (kind) {
    case MeasureKind::kMutualInfoFixedMarginals: {
      if (p.rank() != 2) throw StructuralError("measure needs a two-axis joint");
      std::array<Pmf, 2> factors{p.marginal(0), p.marginal(1)};
      MinimizerResult res =
          singleton_result(p, JointPmf::product(factors, p.axis_names()), s);
      res.factors.emplace_back("q_x", factors[0]);
      res.factors.emplace_back("q_y", factors[1]);
      return res;
    }
    case MeasureKind::kMutualInfoSibson: {
      if (p.rank() != 2) throw StructuralError("measure needs a two-axis joint");
      return sibson_minimize(p, p.marginal(0), s);
    }
    case MeasureKind::kCondEntropyFixedMarginal: {
      if (p.rank() != 2) throw StructuralError("measure needs a two-axis joint");
      std::array<Pmf, 2> factors{Pmf::uniform(p.shape()[0]), p.marginal(1)};
      MinimizerResult res =
          singleton_result(p, JointPmf::product(factors, p.axis_names()), s);
      res.factors.emplace_back("r_x", factors[0]);
      res.factors.emplace_back("q_y", factors[1]);
      res.value = res.divergence.is_infinite()
                      ? XReal::infinity()
                      : XReal::finite(std::log(static_cast<double>(p.shape()[0])) -
                                      res.divergence.value());
      return res;
    }
    case MeasureKind::kCondEntropyArimoto: {
      if (p.rank() != 2) throw StructuralError("measure needs a two-axis joint");
      MinimizerResult res = sibson_minimize(p, Pmf::uniform(p.shape()[0]), s);
      res.value = res.divergence.is_infinite()
                      ? XReal::infinity()
                      : XReal::finite(std::log(static_cast<double>(p.shape()[0])) -
                                      res.divergence.value());
      return res;
    }
    case MeasureKind::kCondMutualInfoFixedAll: {
      if (p.rank() != 3) throw StructuralError("measure needs a three-axis joint");
      return singleton_result(p, markov_projection(p), s);
    }
    case MeasureKind::kCondMutualInfoRecovery: {
      if (!s.is_one() && (s.is_zero() || s.is_infinity()))
        throw OrderError("measure order must be in (0,1) u (1,inf) or 1");
      return recovery_minimize(p, s);
    }
  }
  throw Error("unreachable");
}

double gallager_e0(double rho, const Pmf& p_x, const Channel& w) {
  if (!(rho < 1.0)) throw OrderError("gallager_e0: rho must be < 1");
  if (p_x.size() != w.in_size()) throw StructuralError("gallager_e0: input alphabet mismatch");
  const double expo = 1.0 / (1.0 - rho);
  double outer = kNegInf;
  for (std::size_t y = 0; y < w.out_size(); ++y) {
    double inner = kNegInf;
    for (std::size_t x = 0; x < w.in_size(); ++x) {
      if (!(p_x[x] > 0.0) || !(w.at(x, y) > 0.0)) continue;
      inner = log_add(inner, std::log(p_x[x]) + expo * std::log(w.at(x, y)));
    }
    if (inner == kNegInf) continue;
    outer = log_add(outer, (1.0 - rho) * inner);
  }
  return outer;
}

MinimizerResult alt_min_product(const JointPmf& p, const FamilySpec& family, const RenyiOrder& s,
                                const AltMinOptions& options) {
  if (family.kind() != FamilySpec::Kind::kGeneralProduct)
    throw StructuralError("alt_min_product expects a general-product family");
  family.validate_against(p);
  const std::size_t m = p.rank();
  const auto& shape = p.shape();
  const std::size_t total = p.size();

  std::vector<Pmf> blocks;
  blocks.reserve(m);
  for (std::size_t a = 0; a < m; ++a) blocks.push_back(p.marginal(a));

  auto finish = [&](std::vector<Pmf> q, int iters, bool conv) {
    JointPmf argmin = JointPmf::product(q, p.axis_names());
    XReal d = divergence_against(p, argmin, s);
    MinimizerResult res{d, d, std::move(argmin), {}, iters, conv, true};
    for (std::size_t a = 0; a < m; ++a)
      res.factors.emplace_back("q_" + p.axis_names()[a], std::move(q[a]));
    return res;
  };

  if (s.is_one()) return finish(std::move(blocks), 0, true);
  family.require_order(s);
  const double sv = s.value();

  const auto coord = coordinate_table(shape, total);
  std::vector<double> logp(total);
  for (std::size_t f = 0; f < total; ++f) logp[f] = p[f] > 0.0 ? std::log(p[f]) : kNegInf;

  std::vector<std::vector<double>> q(m), logq(m);
  for (std::size_t a = 0; a < m; ++a) {
    q[a].assign(blocks[a].probs().begin(), blocks[a].probs().end());
    logq[a] = log_table(q[a]);
  }

  int sweep = 0;
  bool converged = false;
  for (; sweep < options.max_sweeps; ++sweep) {
    double delta = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> logw(shape[i], kNegInf);
      for (std::size_t f = 0; f < total; ++f) {
        if (logp[f] == kNegInf) continue;
        double t = sv * logp[f];
        for (std::size_t j = 0; j < m; ++j)
          if (j != i) t += (1.0 - sv) * logq[j][coord[j][f]];
        std::size_t v = coord[i][f];
        logw[v] = log_add(logw[v], t);
      }
      for (double& lw : logw)
        if (lw != kNegInf) lw /= sv;
      double norm = log_sum_exp(logw);
      for (std::size_t v = 0; v < shape[i]; ++v) {
        double nv = logw[v] == kNegInf ? 0.0 : std::exp(logw[v] - norm);
        delta = std::max(delta, std::abs(nv - q[i][v]));
        q[i][v] = nv;
        logq[i][v] = nv > 0.0 ? std::log(nv) : kNegInf;
      }
    }
    if (delta < options.tol) {
      converged = true;
      ++sweep;
      break;
    }
  }

  std::vector<Pmf> out;
  out.reserve(m);
  for (std::size_t a = 0; a < m; ++a) out.push_back(Pmf::normalized(q[a]));
  return finish(std::move(out), sweep, converged);
}

MinimizerResult alt_min_markov(const JointPmf& p, const RenyiOrder& s,
                               const AltMinOptions& options) {
  if (p.rank() != 3) throw StructuralError("alt_min_markov needs a three-axis joint");
  const auto& shape = p.shape();
  const std::size_t nx = shape[0], ny = shape[1], nz = shape[2];

  const Pmf py = p.marginal(1);
  std::array<std::size_t, 2> xy_axes{0, 1};
  std::array<std::size_t, 2> yz_axes{1, 2};
  const JointPmf pxy = p.marginal_axes(xy_axes);
  const JointPmf pyz = p.marginal_axes(yz_axes);

  auto assemble = [&](const std::vector<double>& qy, const std::vector<double>& qx,
                      const std::vector<double>& qz) {
    std::vector<double> joint(nx * ny * nz, 0.0);
    for (std::size_t x = 0; x < nx; ++x)
      for (std::size_t y = 0; y < ny; ++y)
        for (std::size_t z = 0; z < nz; ++z)
          joint[(x * ny + y) * nz + z] = qy[y] * qx[y * nx + x] * qz[y * nz + z];
    return JointPmf::normalized(shape, std::move(joint), p.axis_names());
  };

  auto finish = [&](std::vector<double> qy, std::vector<double> qx, std::vector<double> qz,
                    int iters, bool conv) {
    JointPmf argmin = assemble(qy, qx, qz);
    XReal d = divergence_against(p, argmin, s);
    MinimizerResult res{d, d, std::move(argmin), {}, iters, conv, true};
    res.factors.emplace_back("q_y", Pmf::normalized(std::move(qy)));
    res.factors.emplace_back("q_x_given_y", Channel::normalized(ny, nx, std::move(qx)));
    res.factors.emplace_back("q_z_given_y", Channel::normalized(ny, nz, std::move(qz)));
    return res;
  };

  // initial blocks: the null's own Markov pieces
  std::vector<double> qy(ny), qx(ny * nx), qz(ny * nz);
  for (std::size_t y = 0; y < ny; ++y) {
    qy[y] = py[y];
    for (std::size_t x = 0; x < nx; ++x)
      qx[y * nx + x] = py[y] > 0.0 ? pxy[x * ny + y] / py[y] : 1.0 / nx;
    for (std::size_t z = 0; z < nz; ++z)
      qz[y * nz + z] = py[y] > 0.0 ? pyz[y * nz + z] / py[y] : 1.0 / nz;
  }

  if (s.is_one()) return finish(std::move(qy), std::move(qx), std::move(qz), 0, true);
  FamilySpec::markov_all().require_order(s);
  const double sv = s.value();

  std::vector<double> logp(nx * ny * nz);
  for (std::size_t f = 0; f < logp.size(); ++f) logp[f] = p[f] > 0.0 ? std::log(p[f]) : kNegInf;
  auto lg = [](double v) { return v > 0.0 ? std::log(v) : kNegInf; };

  int sweep = 0;
  bool converged = false;
  for (; sweep < options.max_sweeps; ++sweep) {
    double delta = 0.0;

    // Q_Y update against both current channels
    {
      std::vector<double> logw(ny, kNegInf);
      for (std::size_t y = 0; y < ny; ++y) {
        double acc = kNegInf;
        for (std::size_t x = 0; x < nx; ++x)
          for (std::size_t z = 0; z < nz; ++z) {
            double lp = logp[(x * ny + y) * nz + z];
            if (lp == kNegInf) continue;
            acc = log_add(acc, sv * lp + (1.0 - sv) * (lg(qx[y * nx + x]) + lg(qz[y * nz + z])));
          }
        logw[y] = acc == kNegInf ? kNegInf : acc / sv;
      }
      double norm = log_sum_exp(logw);
      for (std::size_t y = 0; y < ny; ++y) {
        double nv = logw[y] == kNegInf ? 0.0 : std::exp(logw[y] - norm);
        delta = std::max(delta, std::abs(nv - qy[y]));
        qy[y] = nv;
      }
    }

    // per-y channel updates; rows decouple
    for (std::size_t y = 0; y < ny; ++y) {
      if (!(py[y] > 0.0)) continue;
      std::vector<double> logw(nx, kNegInf);
      for (std::size_t x = 0; x < nx; ++x) {
        double acc = kNegInf;
        for (std::size_t z = 0; z < nz; ++z) {
          double lp = logp[(x * ny + y) * nz + z];
          if (lp == kNegInf) continue;
          acc = log_add(acc, sv * lp + (1.0 - sv) * lg(qz[y * nz + z]));
        }
        logw[x] = acc == kNegInf ? kNegInf : acc / sv;
      }
      double norm = log_sum_exp(logw);
      for (std::size_t x = 0; x < nx; ++x) {
        double nv = logw[x] == kNegInf ? 0.0 : std::exp(logw[x] - norm);
        delta = std::max(delta, std::abs(nv - qx[y * nx + x]));
        qx[y * nx + x] = nv;
      }
    }

    for (std::size_t y = 0; y < ny; ++y) {
      if (!(py[y] > 0.0)) continue;
      std::vector<double> logw(nz, kNegInf);
      for (std::size_t z = 0; z < nz; ++z) {
        double acc = kNegInf;
        for (std::size_t x = 0; x < nx; ++x) {
          double lp = logp[(x * ny + y) * nz + z];
          if (lp == kNegInf) continue;
          acc = log_add(acc, sv * lp + (1.0 - sv) * lg(qx[y * nx + x]));
        }
        logw[z] = acc == kNegInf ? kNegInf : acc / sv;
      }
      double norm = log_sum_exp(logw);
      for (std::size_t z = 0; z < nz; ++z) {
        double nv = logw[z] == kNegInf ? 0.0 : std::exp(logw[z] - norm);
        delta = std::max(delta, std::abs(nv - qz[y * nz + z]));
        qz[y * nz + z] = nv;
      }
    }

    if (delta < options.tol) {
      converged = true;
      ++sweep;
      break;
    }
  }

  return finish(std::move(qy), std::move(qx), std::move(qz), sweep, converged);
}

MinimizerResult family_divergence(const JointPmf& p, const FamilySpec& family, const RenyiOrder& s,
                                  const AltMinOptions& options) {
  family.validate_against(p);
  switch (family.kind()) {
    case FamilySpec::Kind::kSingleton:
      return singleton_result(p, family.member(), s);
    case FamilySpec::Kind::kFixedMarginalProduct: {
      family.require_order(s);
      const JointPmf grouped = p.rank() == 2 ? p : p.group_trailing_axes(1);
      MinimizerResult res = sibson_minimize(grouped, family.fixed_marginal(), s);
      return res;
    }
    case FamilySpec::Kind::kGeneralProduct:
      return alt_min_product(p, family, s, options);
    case FamilySpec::Kind::kMarkovRecovery:
      family.require_order(s);
      return recovery_minimize(p, s);
    case FamilySpec::Kind::kMarkovAll:
      return alt_min_markov(p, s, options);
  }
  throw Error("unreachable");
}

}  // namespace rht
