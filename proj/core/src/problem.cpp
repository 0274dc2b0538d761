#include "rht/problem.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <future>
#include <random>
#include <sstream>

#include <json.hpp>

#include "rht/errors.hpp"
#include "rht/exponents.hpp"
#include "rht/logsum.hpp"
#include "rht/oracle.hpp"

namespace rht {

namespace {

using nlohmann::json;

constexpr const char* kToolName = "rht";
constexpr const char* kToolVersion = "0.1.0";

[[noreturn]] void spec_fail(const std::string& path, const std::string& what) {
  throw SpecError(path + ": " + what);
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) spec_fail(path + "." + key, "unknown key");
  }
}

double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) spec_fail(path, "expected a number");
  return j.get<double>();
}

JointPmf parse_table(const json& j, const std::string& path, const std::string& base_dir) {
  if (!j.is_object()) spec_fail(path, "expected an object");
  if (j.contains("file")) {
    reject_unknown_keys(j, path, {"file"});
    std::string fname = j.at("file").get<std::string>();
    std::ifstream in(base_dir + "/" + fname);
    if (!in) spec_fail(path + ".file", "cannot open '" + fname + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    json sub = json::parse(ss.str(), nullptr, /*allow_exceptions=*/false);
    if (sub.is_discarded()) spec_fail(path + ".file", "referenced file is not valid JSON");
    return parse_table(sub, path + ".file:" + fname, base_dir);
  }
  reject_unknown_keys(j, path, {"shape", "probs", "axes"});
  if (!j.contains("shape") || !j.contains("probs")) spec_fail(path, "needs 'shape' and 'probs'");
  std::vector<std::size_t> shape;
  for (const auto& v : j.at("shape")) {
    if (!v.is_number_unsigned() || v.get<std::size_t>() == 0)
      spec_fail(path + ".shape", "axis sizes must be positive integers");
    shape.push_back(v.get<std::size_t>());
  }
  std::vector<double> probs;
  for (const auto& v : j.at("probs")) probs.push_back(require_number(v, path + ".probs"));
  std::vector<std::string> names;
  if (j.contains("axes"))
    for (const auto& v : j.at("axes")) names.push_back(v.get<std::string>());
  try {
    return JointPmf(std::move(shape), std::move(probs), std::move(names));
  } catch (const StructuralError& e) {
    spec_fail(path, e.what());
  }
  throw SpecError("unreachable");
}

Pmf parse_pmf(const json& j, const std::string& path) {
  if (!j.is_object()) spec_fail(path, "expected an object");
  reject_unknown_keys(j, path, {"probs"});
  if (!j.contains("probs")) spec_fail(path, "needs 'probs'");
  std::vector<double> probs;
  for (const auto& v : j.at("probs")) probs.push_back(require_number(v, path + ".probs"));
  try {
    return Pmf(std::move(probs));
  } catch (const StructuralError& e) {
    spec_fail(path, e.what());
  }
  throw SpecError("unreachable");
}

FamilySpec parse_family(const json& j, const std::string& path, const JointPmf& null_dist,
                        const std::string& base_dir) {
  if (!j.is_object() || !j.contains("variant")) spec_fail(path, "needs a 'variant'");
  std::string variant = j.at("variant").get<std::string>();
  try {
    if (variant == "singleton") {
      reject_unknown_keys(j, path, {"variant", "member"});
      if (!j.contains("member")) spec_fail(path, "singleton needs 'member'");
      return FamilySpec::singleton(parse_table(j.at("member"), path + ".member", base_dir));
    }
    if (variant == "fixed-marginal-product") {
      reject_unknown_keys(j, path, {"variant", "fixed"});
      Pmf fixed = j.contains("fixed") ? parse_pmf(j.at("fixed"), path + ".fixed")
                                      : null_dist.marginal(0);
      return FamilySpec::fixed_marginal_product(std::move(fixed));
    }
    if (variant == "general-product") {
      reject_unknown_keys(j, path, {"variant", "free_factors", "unconstrained_tail"});
      int k = j.contains("free_factors") ? j.at("free_factors").get<int>()
                                         : static_cast<int>(null_dist.rank()) - 1;
      bool tail = j.contains("unconstrained_tail") ? j.at("unconstrained_tail").get<bool>() : true;
      return FamilySpec::general_product(k, tail);
    }
    if (variant == "markov-recovery") {
      reject_unknown_keys(j, path, {"variant"});
      return FamilySpec::markov_recovery();
    }
    if (variant == "markov-all") {
      reject_unknown_keys(j, path, {"variant"});
      return FamilySpec::markov_all();
    }
  } catch (const StructuralError& e) {
    spec_fail(path, e.what());
  }
  spec_fail(path + ".variant", "unknown family variant '" + variant + "'");
}

json table_echo(const JointPmf& t) {
  json j;
  j["shape"] = t.shape();
  j["probs"] = std::vector<double>(t.probs().begin(), t.probs().end());
  j["axes"] = t.axis_names();
  return j;
}

json family_echo(const FamilySpec& f) {
  json j;
  j["variant"] = f.variant_name();
  switch (f.kind()) {
    case FamilySpec::Kind::kSingleton:
      j["member"] = table_echo(f.member());
      break;
    case FamilySpec::Kind::kFixedMarginalProduct:
      j["fixed"] = {{"probs", std::vector<double>(f.fixed_marginal().probs().begin(),
                                                  f.fixed_marginal().probs().end())}};
      break;
    case FamilySpec::Kind::kGeneralProduct:
      j["free_factors"] = f.free_factors();
      j["unconstrained_tail"] = f.unconstrained_tail();
      break;
    default:
      break;
  }
  return j;
}

// ---------------------------------------------------------------------------
// job helpers

template <typename F>
void parallel_rows(int threads, std::size_t count, F&& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::future<void>> futs;
  std::size_t stride = static_cast<std::size_t>(threads);
  for (std::size_t t = 0; t < stride; ++t) {
    futs.push_back(std::async(std::launch::async, [&, t]() {
      for (std::size_t i = t; i < count; i += stride) body(i);
    }));
  }
  for (auto& f : futs) f.get();
}

json factor_echo(const std::vector<std::pair<std::string, FamilyFactor>>& factors) {
  json arr = json::array();
  for (const auto& [name, fac] : factors) {
    json f;
    f["name"] = name;
    if (std::holds_alternative<Pmf>(fac)) {
      const Pmf& p = std::get<Pmf>(fac);
      f["type"] = "pmf";
      f["probs"] = std::vector<double>(p.probs().begin(), p.probs().end());
    } else {
      const Channel& c = std::get<Channel>(fac);
      f["type"] = "channel";
      f["in_size"] = c.in_size();
      f["out_size"] = c.out_size();
      json rows = json::array();
      for (std::size_t x = 0; x < c.in_size(); ++x)
        rows.push_back(std::vector<double>(c.row(x).begin(), c.row(x).end()));
      f["rows"] = rows;
    }
    arr.push_back(f);
  }
  return arr;
}

json xreal_json(const XReal& v) {
  if (v.is_infinite()) return json("inf");
  return json(v.value());
}

json run_measure(const ProblemSpec& spec, const RunOptions& opt, bool& nonconverged) {
  if (spec.orders.empty()) throw SpecError("measure: the spec has no 'orders' grid");
  json rows = json::array();
  std::vector<json> slot(spec.orders.size());
  std::vector<char> bad(spec.orders.size(), 0);
  parallel_rows(opt.threads, spec.orders.size(), [&](std::size_t i) {
    double s = spec.orders[i];
    json row;
    row["order"] = s;
    RenyiOrder order = RenyiOrder::of(s);
    if (!spec.family.order_valid(order)) {
      row["in_validity"] = false;
      row["skipped"] = true;
      slot[i] = std::move(row);
      return;
    }
    row["in_validity"] = true;
    MinimizerResult res = family_divergence(spec.null_dist, spec.family, order);
    row["divergence_nats"] = xreal_json(res.divergence);
    row["iterations"] = res.iterations;
    row["converged"] = res.converged;
    row["argmin_factors"] = factor_echo(res.factors);
    if (!res.converged) bad[i] = 1;
    slot[i] = std::move(row);
  });
  for (auto& r : slot) rows.push_back(std::move(r));
  for (char b : bad) nonconverged |= (b != 0);

  json out;
  out["rows"] = std::move(rows);
  try {
    PhiCurve curve(spec.null_dist, spec.family);
    out["threshold_nats_per_symbol"] = curve.threshold();
    out["variance_nats2"] = curve.variance();
  } catch (const SupportError&) {
    // family cannot reproduce the null's support; the threshold is infinite
    out["threshold_nats_per_symbol"] = "inf";
  }
  return out;
}

json exponent_report_json(const ExponentReport& rep) {
  json j;
  j["rate_nats_per_symbol"] = rep.rate;
  j["value_nats_per_symbol"] = rep.value;
  j["s_hat"] = rep.s_hat;
  j["equality_guaranteed"] = rep.equality_guaranteed;
  return j;
}

std::vector<double> resolve_rates(const ProblemSpec& spec, double threshold) {
  std::vector<double> rates = spec.rates;
  for (double rel : spec.relative_rates) rates.push_back(rel * threshold);
  return rates;
}

json run_exponents(const ProblemSpec& spec, const RunOptions& opt) {
  PhiCurve curve(spec.null_dist, spec.family);
  std::vector<double> rates = resolve_rates(spec, curve.threshold());
  if (rates.empty()) throw SpecError("exponents: the spec has no 'rates' or 'relative_rates'");
  json out;
  out["threshold_nats_per_symbol"] = curve.threshold();
  out["variance_nats2"] = curve.variance();
  out["critical_rate_low_nats_per_symbol"] = critical_rate(curve, curve.order_lower());
  out["critical_rate_high_nats_per_symbol"] = critical_rate(curve, curve.order_upper());
  out["critical_rate_high_is_estimate"] = std::isinf(curve.order_upper());

  std::vector<json> slot(rates.size());
  parallel_rows(opt.threads, rates.size(), [&](std::size_t i) {
    json row;
    row["rate_nats_per_symbol"] = rates[i];
    row["error_exponent"] = exponent_report_json(error_exponent(curve, rates[i]));
    row["strong_converse_exponent"] = exponent_report_json(sc_exponent(curve, rates[i]));
    slot[i] = std::move(row);
  });
  json rows = json::array();
  for (auto& r : slot) rows.push_back(std::move(r));
  out["rates"] = std::move(rows);

  std::vector<double> rs = spec.second_order_r;
  if (rs.empty()) rs = {-2.0, -1.0, 0.0, 1.0, 2.0};
  if (curve.variance() > 0.0) {
    json so = json::array();
    for (double r : rs) {
      json e;
      e["r"] = r;
      e["alpha_limit"] = second_order_alpha(curve, r);
      so.push_back(e);
    }
    out["second_order"] = std::move(so);
  } else {
    out["second_order_degenerate"] = true;
  }
  return out;
}

json run_verify(const ProblemSpec& spec, const RunOptions& opt) {
  if (spec.block_lengths.empty()) throw SpecError("verify: the spec has no 'block_lengths'");
  PhiCurve curve(spec.null_dist, spec.family);
  std::vector<double> rates = resolve_rates(spec, curve.threshold());
  if (rates.empty()) throw SpecError("verify: the spec has no 'rates' or 'relative_rates'");
  const bool simple = spec.family.kind() == FamilySpec::Kind::kSingleton;

  json out;
  out["threshold_nats_per_symbol"] = curve.threshold();
  json rate_rows = json::array();
  for (double rate : rates) {
    json row;
    row["rate_nats_per_symbol"] = rate;
    ExponentReport err = error_exponent(curve, rate);
    ExponentReport sc = sc_exponent(curve, rate);
    row["error_exponent_theory"] = err.value;
    row["strong_converse_theory"] = sc.value;

    std::vector<JointPmf> members;
    if (!simple)
      members = family_member_grid(spec.null_dist, spec.family, spec.oracle.grid_points);

    std::vector<json> sweep(spec.block_lengths.size());
    std::vector<FitPoint> pts(spec.block_lengths.size());
    parallel_rows(opt.threads, spec.block_lengths.size(), [&](std::size_t i) {
      int n = spec.block_lengths[i];
      double log_mu = -static_cast<double>(n) * rate;
      json e;
      e["n"] = n;
      e["log_mu"] = log_mu;
      if (simple) {
        OracleResult orc =
            np_simple(spec.null_dist, spec.family.member(), n, log_mu, spec.oracle.type_cap);
        e["alpha_hat"] = orc.alpha;
        e["log_alpha"] = orc.log_alpha;
        e["log_one_minus_alpha"] = orc.log_complement;
        pts[i] = FitPoint{n, orc.log_alpha, orc.log_complement};
      } else {
        OracleResult orc = composite_lp(spec.null_dist, spec.family, n, log_mu, members,
                                        spec.oracle.type_cap);
        e["alpha_hat_grid_lp"] = orc.alpha;
        e["log_alpha"] = orc.log_alpha;
        e["grid_members"] = members.size();
        e["binding_members"] = orc.binding_members.size();
        pts[i] = FitPoint{n, orc.log_alpha, orc.log_complement};

        // universal likelihood-ratio test at the optimizing order
        FamilyUniversal fu(spec.null_dist, spec.family, n, spec.oracle.type_cap);
        RenyiOrder shat = RenyiOrder::of(err.s_hat);
        double dsn = fu.renyi_divergence_vs_null(shat);
        double lambda = lr_threshold(n, rate, shat, dsn, fu.log_v());
        PerTypeTest test = build_lr_test(fu, lambda);
        double la = log_alpha_of_test(test, fu);
        double lb = log_beta_universal_bound(test, fu);
        e["universal_test"] = {
            {"s_hat", err.s_hat},
            {"lambda", lambda},
            {"log_alpha", la},
            {"log_beta_bound", lb},
            {"beta_certified", lb <= log_mu + 1e-9},
            {"sandwich_lp_below_test", orc.log_alpha <= la + 1e-9},
        };
      }
      sweep[i] = std::move(e);
    });
    json sw = json::array();
    for (auto& s : sweep) sw.push_back(std::move(s));
    row["sweep"] = std::move(sw);

    auto fit_block = [&](FitMode mode, double theory) {
      json f;
      try {
        FitResult fit = exponent_fit(std::span<const FitPoint>(pts), mode, true);
        f["slope_nats_per_symbol"] = fit.slope;
        f["intercept"] = fit.intercept;
        f["log_n_coeff"] = fit.log_n_coeff;
        f["residual_rms"] = fit.residual_rms;
        f["points_used"] = fit.points_used;
        f["theory_nats_per_symbol"] = theory;
        if (theory > 0.0) f["relative_error"] = std::abs(fit.slope - theory) / theory;
      } catch (const StructuralError& e) {
        f["error"] = e.what();
      }
      return f;
    };
    row["fit_error_exponent"] = fit_block(FitMode::kErrorExponent, err.value);
    row["fit_strong_converse"] = fit_block(FitMode::kStrongConverse, sc.value);
    rate_rows.push_back(std::move(row));
  }
  out["rates"] = std::move(rate_rows);

  std::vector<double> rs = spec.second_order_r;
  if (!rs.empty() && simple) {
    json so = json::array();
    int n = spec.block_lengths.back();
    for (double r : rs) {
      double log_mu = -n * curve.threshold() - std::sqrt(static_cast<double>(n)) * r;
      OracleResult orc =
          np_simple(spec.null_dist, spec.family.member(), n, log_mu, spec.oracle.type_cap);
      json e;
      e["r"] = r;
      e["n"] = n;
      e["alpha_hat"] = orc.alpha;
      e["alpha_limit"] = second_order_alpha(curve, r);
      so.push_back(e);
    }
    out["second_order"] = std::move(so);
  }
  return out;
}

json run_universal(const ProblemSpec& spec, const RunOptions& opt) {
  if (spec.block_lengths.empty()) throw SpecError("universal: the spec has no 'block_lengths'");
  json out;
  std::vector<json> slot(spec.block_lengths.size());
  parallel_rows(opt.threads, spec.block_lengths.size(), [&](std::size_t i) {
    int n = spec.block_lengths[i];
    FamilyUniversal fu(spec.null_dist, spec.family, n, spec.oracle.type_cap);
    json e;
    e["n"] = n;
    e["type_count"] = fu.types().size();
    e["log_v"] = fu.log_v();
    // total mass of the universal object
    double acc = kNegInf;
    for (std::size_t t = 0; t < fu.types().size(); ++t) acc = log_add(acc, fu.log_u_class(t));
    e["normalization_log_mass"] = acc;

    // per-type dominance against random i.i.d. members of the family
    std::mt19937 rng(spec.oracle.seed + static_cast<unsigned>(n));
    std::uniform_real_distribution<double> unif(0.05, 1.0);
    int violations = 0;
    double worst = kNegInf;
    for (int mtry = 0; mtry < spec.oracle.probe_members; ++mtry) {
      JointPmf member = [&]() {
        switch (spec.family.kind()) {
          case FamilySpec::Kind::kSingleton:
            return spec.family.member();
          case FamilySpec::Kind::kFixedMarginalProduct: {
            std::size_t tail = spec.null_dist.size() / spec.null_dist.shape()[0];
            std::vector<double> qy(tail);
            for (auto& v : qy) v = unif(rng);
            std::vector<double> w(spec.null_dist.size());
            const Pmf& t = spec.family.fixed_marginal();
            Pmf q = Pmf::normalized(std::move(qy));
            for (std::size_t x = 0; x < spec.null_dist.shape()[0]; ++x)
              for (std::size_t y = 0; y < tail; ++y) w[x * tail + y] = t[x] * q[y];
            return JointPmf::normalized(spec.null_dist.shape(), std::move(w));
          }
          case FamilySpec::Kind::kGeneralProduct: {
            std::vector<Pmf> fs;
            for (std::size_t a = 0; a < spec.null_dist.rank(); ++a) {
              std::vector<double> w(spec.null_dist.shape()[a]);
              for (auto& v : w) v = unif(rng);
              fs.push_back(Pmf::normalized(std::move(w)));
            }
            return JointPmf::product(fs, spec.null_dist.axis_names());
          }
          case FamilySpec::Kind::kMarkovRecovery:
          case FamilySpec::Kind::kMarkovAll: {
            const auto& shape = spec.null_dist.shape();
            const std::size_t nx = shape[0], ny = shape[1], nz = shape[2];
            std::vector<double> qy(ny), w(nx * ny * nz);
            for (auto& v : qy) v = unif(rng);
            Pmf qyp = Pmf::normalized(std::move(qy));
            std::vector<double> qx(ny * nx), qz(ny * nz);
            for (auto& v : qx) v = unif(rng);
            for (auto& v : qz) v = unif(rng);
            Channel cx = Channel::normalized(ny, nx, std::move(qx));
            Channel cz = Channel::normalized(ny, nz, std::move(qz));
            if (spec.family.kind() == FamilySpec::Kind::kMarkovRecovery) {
              std::array<std::size_t, 2> xy_axes{0, 1};
              const JointPmf pxy = spec.null_dist.marginal_axes(xy_axes);
              for (std::size_t x = 0; x < nx; ++x)
                for (std::size_t y = 0; y < ny; ++y)
                  for (std::size_t z = 0; z < nz; ++z)
                    w[(x * ny + y) * nz + z] = pxy[x * ny + y] * cz.at(y, z);
            } else {
              for (std::size_t x = 0; x < nx; ++x)
                for (std::size_t y = 0; y < ny; ++y)
                  for (std::size_t z = 0; z < nz; ++z)
                    w[(x * ny + y) * nz + z] = qyp[y] * cx.at(y, x) * cz.at(y, z);
            }
            return JointPmf::normalized(shape, std::move(w));
          }
        }
        throw Error("unreachable");
      }();
      std::vector<double> lq(member.size());
      for (std::size_t c = 0; c < member.size(); ++c)
        lq[c] = member[c] > 0.0 ? std::log(member[c]) : kNegInf;
      for (std::size_t t = 0; t < fu.types().size(); ++t) {
        double lmem = fu.types().log_seq_prob(lq, t);
        if (lmem == kNegInf) continue;
        double bound = fu.log_v() + fu.log_u_seq(t);
        double slack = lmem - bound;
        worst = std::max(worst, slack);
        if (slack > 1e-9) ++violations;
      }
    }
    e["dominance"] = {{"members", spec.oracle.probe_members},
                      {"violations", violations},
                      {"max_log_slack", worst}};

    // universal channel row normalization where the family carries one
    if (spec.family.kind() == FamilySpec::Kind::kMarkovRecovery ||
        spec.family.kind() == FamilySpec::Kind::kMarkovAll) {
      const auto& shape = spec.null_dist.shape();
      UniversalChannel uc(shape[1], shape[2], n, spec.oracle.type_cap);
      if (uc.joint_types().size() <= 50000) {
        double max_dev = 0.0;
        for (const TypeClass& t : enumerate_types(shape[1], n, spec.oracle.type_cap))
          max_dev = std::max(max_dev, std::abs(uc.row_normalization(t.counts) - 1.0));
        e["channel_row_normalization_max_dev"] = max_dev;
      }
    }
    slot[i] = std::move(e);
  });
  json rows = json::array();
  for (auto& r : slot) rows.push_back(std::move(r));
  out["per_n"] = std::move(rows);
  return out;
}

// ---------------------------------------------------------------------------
// rendering

std::string csv_cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::string render_table(const std::string& command, const json& results) {
  std::ostringstream os;
  if (command == "measure") {
    os << "order,in_validity,divergence_nats,iterations,converged\n";
    for (const auto& r : results.at("rows")) {
      os << csv_cell(r.at("order")) << "," << csv_cell(r.at("in_validity")) << ",";
      if (r.contains("divergence_nats"))
        os << csv_cell(r.at("divergence_nats")) << "," << csv_cell(r.at("iterations")) << ","
           << csv_cell(r.at("converged"));
      else
        os << ",,";
      os << "\n";
    }
  } else if (command == "exponents") {
    os << "rate_nats_per_symbol,error_exponent,error_s_hat,error_equality,"
          "sc_exponent,sc_s_hat,sc_equality\n";
    for (const auto& r : results.at("rates")) {
      const auto& e = r.at("error_exponent");
      const auto& s = r.at("strong_converse_exponent");
      os << csv_cell(r.at("rate_nats_per_symbol")) << "," << csv_cell(e.at("value_nats_per_symbol"))
         << "," << csv_cell(e.at("s_hat")) << "," << csv_cell(e.at("equality_guaranteed")) << ","
         << csv_cell(s.at("value_nats_per_symbol")) << "," << csv_cell(s.at("s_hat")) << ","
         << csv_cell(s.at("equality_guaranteed")) << "\n";
    }
  } else if (command == "verify") {
    os << "rate_nats_per_symbol,n,log_alpha,log_one_minus_alpha\n";
    for (const auto& r : results.at("rates"))
      for (const auto& e : r.at("sweep"))
        os << csv_cell(r.at("rate_nats_per_symbol")) << "," << csv_cell(e.at("n")) << ","
           << csv_cell(e.at("log_alpha"))
           << "," << (e.contains("log_one_minus_alpha") ? csv_cell(e.at("log_one_minus_alpha")) : "")
           << "\n";
  } else if (command == "universal") {
    os << "n,type_count,log_v,normalization_log_mass,dominance_violations\n";
    for (const auto& e : results.at("per_n"))
      os << csv_cell(e.at("n")) << "," << csv_cell(e.at("type_count")) << ","
         << csv_cell(e.at("log_v")) << "," << csv_cell(e.at("normalization_log_mass")) << ","
         << csv_cell(e.at("dominance").at("violations")) << "\n";
  }
  return os.str();
}

std::string iso_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

}  // namespace

ProblemSpec parse_spec(const std::string& text, const std::string& base_dir) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw SpecError("document is not valid JSON");
  if (!doc.is_object()) throw SpecError("document root must be an object");
  reject_unknown_keys(doc, "$",
                      {"spec_version", "title", "null", "family", "orders", "rates",
                       "relative_rates", "block_lengths", "second_order_r", "oracle", "output"});
  if (!doc.contains("spec_version") || !doc.at("spec_version").is_number_integer())
    spec_fail("$.spec_version", "required integer");
  int version = doc.at("spec_version").get<int>();
  if (version != 1) spec_fail("$.spec_version", "unsupported version");
  if (!doc.contains("null")) spec_fail("$.null", "required");
  if (!doc.contains("family")) spec_fail("$.family", "required");

  JointPmf null_dist = parse_table(doc.at("null"), "$.null", base_dir);
  FamilySpec family = parse_family(doc.at("family"), "$.family", null_dist, base_dir);
  try {
    family.validate_against(null_dist);
  } catch (const StructuralError& e) {
    spec_fail("$.family", e.what());
  }

  ProblemSpec spec{version,
                   doc.value("title", std::string{}),
                   std::move(null_dist),
                   std::move(family),
                   {},
                   {},
                   {},
                   {},
                   {},
                   {},
                   "report",
                   {},
                   {}};

  auto read_numbers = [&](const char* key, std::vector<double>& out, bool nonneg) {
    if (!doc.contains(key)) return;
    const json& arr = doc.at(key);
    if (!arr.is_array()) spec_fail(std::string("$.") + key, "expected an array");
    for (const auto& v : arr) {
      double x = require_number(v, std::string("$.") + key);
      if (nonneg && x < 0.0) spec_fail(std::string("$.") + key, "values must be nonnegative");
      out.push_back(x);
    }
  };
  read_numbers("orders", spec.orders, true);
  read_numbers("rates", spec.rates, true);
  read_numbers("relative_rates", spec.relative_rates, true);
  read_numbers("second_order_r", spec.second_order_r, false);
  if (doc.contains("block_lengths")) {
    for (const auto& v : doc.at("block_lengths")) {
      if (!v.is_number_integer() || v.get<int>() < 1)
        spec_fail("$.block_lengths", "entries must be positive integers");
      spec.block_lengths.push_back(v.get<int>());
    }
  }
  if (doc.contains("oracle")) {
    const json& o = doc.at("oracle");
    reject_unknown_keys(o, "$.oracle", {"grid_points", "type_cap", "seed", "probe_members"});
    if (o.contains("grid_points")) spec.oracle.grid_points = o.at("grid_points").get<int>();
    if (o.contains("type_cap")) spec.oracle.type_cap = o.at("type_cap").get<std::size_t>();
    if (o.contains("seed")) spec.oracle.seed = o.at("seed").get<unsigned>();
    if (o.contains("probe_members")) spec.oracle.probe_members = o.at("probe_members").get<int>();
    if (spec.oracle.grid_points < 2) spec_fail("$.oracle.grid_points", "must be at least 2");
    if (spec.oracle.probe_members < 1) spec_fail("$.oracle.probe_members", "must be positive");
  }
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    reject_unknown_keys(o, "$.output", {"format"});
    if (o.contains("format")) {
      spec.format = o.at("format").get<std::string>();
      if (spec.format != "report" && spec.format != "table")
        spec_fail("$.output.format", "must be 'report' or 'table'");
    }
  }

  for (double s : spec.orders) {
    RenyiOrder order = RenyiOrder::of(s);
    if (!spec.family.order_valid(order)) {
      std::ostringstream os;
      os << "order " << s << " lies outside the validity interval (" << spec.family.order_lower()
         << ", inf) of family " << spec.family.variant_name() << "; the row will be skipped";
      spec.warnings.push_back(os.str());
    }
  }

  json echo;
  echo["spec_version"] = spec.spec_version;
  if (!spec.title.empty()) echo["title"] = spec.title;
  echo["null"] = table_echo(spec.null_dist);
  echo["family"] = family_echo(spec.family);
  echo["orders"] = spec.orders;
  echo["rates"] = spec.rates;
  echo["relative_rates"] = spec.relative_rates;
  echo["block_lengths"] = spec.block_lengths;
  echo["second_order_r"] = spec.second_order_r;
  echo["oracle"] = {{"grid_points", spec.oracle.grid_points},
                    {"type_cap", spec.oracle.type_cap},
                    {"seed", spec.oracle.seed},
                    {"probe_members", spec.oracle.probe_members}};
  echo["output"] = {{"format", spec.format}};
  spec.canonical_echo = echo.dump();
  return spec;
}

RunResult run(const ProblemSpec& spec, const RunOptions& options) {
  bool nonconverged = false;
  json results;
  if (options.command == "measure")
    results = run_measure(spec, options, nonconverged);
  else if (options.command == "exponents")
    results = run_exponents(spec, options);
  else if (options.command == "verify")
    results = run_verify(spec, options);
  else if (options.command == "universal")
    results = run_universal(spec, options);
  else
    throw SpecError("unknown command '" + options.command + "'");

  RunResult out;
  out.any_nonconverged = nonconverged;
  if (spec.format == "table") {
    out.report = render_table(options.command, results);
    return out;
  }

  json report;
  report["spec_version"] = spec.spec_version;
  report["command"] = options.command;
  json prov;
  prov["tool"] = kToolName;
  prov["version"] = kToolVersion;
  prov["units"] = {{"divergence", "nats"},
                   {"rate", "nats/symbol"},
                   {"exponent", "nats/symbol"},
                   {"variance", "nats^2"}};
  prov["tolerances"] = {{"normalization", kNormalizationTol},
                        {"altmin_tol", AltMinOptions{}.tol},
                        {"altmin_max_sweeps", AltMinOptions{}.max_sweeps},
                        {"bisection", 1e-10}};
  if (options.with_timestamp) prov["timestamp"] = iso_timestamp();
  report["provenance"] = std::move(prov);
  report["spec_echo"] = json::parse(spec.canonical_echo);
  report["warnings"] = spec.warnings;
  report["results"] = std::move(results);
  out.report = report.dump(2) + "\n";
  return out;
}

}  // namespace rht
