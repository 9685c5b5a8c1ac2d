#include "qcons/conservation.hpp"

#include "qcons/errors.hpp"
#include "qcons/format.hpp"
#include "qcons/parallel.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace qcons {

DynamicEnsemble single_trajectory(const PhaseState& s, SurfacePtr surface) {
  DynamicEnsemble e;
  e.groups.push_back({s});
  e.weights.push_back(1.0);
  e.surfaces.push_back(std::move(surface));
  return e;
}

namespace {

void validate(const DynamicEnsemble& e) {
  if (e.groups.empty() || e.groups.size() != e.weights.size() || e.groups.size() != e.surfaces.size())
    throw InvalidParameterError("ensemble needs one weight and one surface per group");
  for (std::size_t j = 0; j < e.groups.size(); ++j) {
    if (!e.surfaces[j]) throw InvalidParameterError("missing surface for ensemble group");
    if (!(e.weights[j] >= 0.0)) throw InvalidParameterError("ensemble weights must be nonnegative");
    if (e.weights[j] > 0.0 && e.groups[j].empty()) throw InvalidParameterError("weighted group has no states");
  }
}

}  // namespace

DynamicEnsemble advance(const DynamicEnsemble& e, double dt) {
  validate(e);
  DynamicEnsemble out = e;
  for (std::size_t j = 0; j < e.groups.size(); ++j)
    for (auto& s : out.groups[j]) s = verlet_step(s, dt, *e.surfaces[j]);
  return out;
}

Ensemble prepare_ensemble(const DynamicEnsemble& e) {
  validate(e);
  Ensemble out;
  out.weights = e.weights;
  out.groups.resize(e.groups.size());
  for (std::size_t j = 0; j < e.groups.size(); ++j)
    for (const auto& s : e.groups[j]) out.groups[j].push_back(prepare_state(s, *e.surfaces[j]));
  return out;
}

namespace {

// Per-state [d_tau rho, d_tau mom, d_tau E, div mass, div mom, div E].
constexpr int kTerms = 10;

Vec conserved(const FieldValues& f) {
  Vec v(5);
  v << f.rho, f.mom, f.energy;
  return v;
}

Vec divergences(const FieldValues& f) {
  Vec v(5);
  v << f.div_mass, f.div_mom, f.div_energy;
  return v;
}

struct Snapshots {
  Ensemble minus, center, plus;
};

ProbeResidual probe_residual(const Snapshots& snap, const Mollifier& m, const Vec3& y, FieldMode mode,
                             double h) {
  ProbeResidual r;
  r.y = y;
  FieldSample sm, sc, sp;
  const auto fm = per_state_fields(snap.minus, m, y, mode, &sm);
  const auto fc = per_state_fields(snap.center, m, y, mode, &sc);
  const auto fp = per_state_fields(snap.plus, m, y, mode, &sp);
  if (sm.vacuum || sc.vacuum || sp.vacuum) {
    r.masked = true;
    return r;
  }
  std::vector<std::vector<Vec>> values(fc.size());
  double rho = 0.0;
  for (std::size_t j = 0; j < fc.size(); ++j)
    for (std::size_t i = 0; i < fc[j].size(); ++i) {
      Vec v(kTerms);
      v.head(5) = (conserved(fp[j][i]) - conserved(fm[j][i])) / (2.0 * h);
      v.tail(5) = divergences(fc[j][i]);
      values[j].push_back(std::move(v));
      rho += snap.center.weights[j] * fc[j][i].rho / fc[j].size();
    }
  if (rho < kRhoFloor) {
    r.masked = true;
    return r;
  }
  const WeightedStats st = weighted_stats(values, snap.center.weights);
  const Vec res = st.mean.head(5) + st.mean.tail(5);
  const Vec se = (st.stderr_.head(5).cwiseAbs2() + st.stderr_.tail(5).cwiseAbs2()).cwiseSqrt();
  r.mass = res(0);
  r.mom = res.segment<3>(1);
  r.energy = res(4);
  r.mass_se = se(0);
  r.mom_se = se.segment<3>(1);
  r.energy_se = se(4);
  r.scale = st.mean.cwiseAbs().maxCoeff();
  return r;
}

struct Pass {
  std::vector<ProbeResidual> probes;
  ResidualNorm mass, mom, energy;
  double scale = 0.0;
  int masked = 0;
};

Pass run_pass(const DynamicEnsemble& e, const Ensemble& center, const Mollifier& m, const std::vector<Vec3>& probes,
              double h, FieldMode mode, int workers) {
  Snapshots snap{prepare_ensemble(advance(e, -h)), center, prepare_ensemble(advance(e, h))};
  Pass p;
  p.probes.resize(probes.size());
  parallel_for(static_cast<int>(probes.size()), workers,
               [&](int k) { p.probes[k] = probe_residual(snap, m, probes[k], mode, h); });
  int live = 0;
  for (const auto& r : p.probes) {
    if (r.masked) {
      ++p.masked;
      continue;
    }
    ++live;
    p.mass.max = std::max(p.mass.max, std::abs(r.mass));
    p.mom.max = std::max(p.mom.max, r.mom.norm());
    p.energy.max = std::max(p.energy.max, std::abs(r.energy));
    p.mass.rms += r.mass * r.mass;
    p.mom.rms += r.mom.squaredNorm();
    p.energy.rms += r.energy * r.energy;
    p.scale = std::max(p.scale, r.scale);
  }
  if (live > 0) {
    p.mass.rms = std::sqrt(p.mass.rms / live);
    p.mom.rms = std::sqrt(p.mom.rms / live);
    p.energy.rms = std::sqrt(p.energy.rms / live);
  }
  return p;
}

double order_of(double coarse, double fine, double scale) {
  const double floor = 1e-13 * std::max(scale, 1e-300);
  if (coarse <= floor && fine <= floor) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(coarse / fine);
}

}  // namespace

ResidualReport residuals(const DynamicEnsemble& e, const Mollifier& m, const std::vector<Vec3>& probes,
                         double dt_check, FieldMode mode, const ResidualOptions& options) {
  validate(e);
  if (!(dt_check > 0.0) || !std::isfinite(dt_check)) throw InvalidParameterError("dt_check must be positive");
  if (probes.empty()) throw InvalidParameterError("residuals need at least one probe");
  const Ensemble center = prepare_ensemble(e);
  const Pass coarse = run_pass(e, center, m, probes, dt_check, mode, options.workers);
  ResidualReport r;
  r.mode = mode;
  r.time = e.groups.front().empty() ? 0.0 : e.groups.front().front().time;
  r.dt_check = dt_check;
  r.probes = coarse.probes;
  r.masked = coarse.masked;
  r.mass = coarse.mass;
  r.mom = coarse.mom;
  r.energy = coarse.energy;
  r.field_scale = coarse.scale;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.order_mass = r.order_mom = r.order_energy = r.richardson_order = nan;
  if (options.richardson) {
    const Pass fine = run_pass(e, center, m, probes, 0.5 * dt_check, mode, options.workers);
    r.order_mass = order_of(coarse.mass.max, fine.mass.max, coarse.scale);
    r.order_mom = order_of(coarse.mom.max, fine.mom.max, coarse.scale);
    r.order_energy = order_of(coarse.energy.max, fine.energy.max, coarse.scale);
    const double a = coarse.mass.max, b = coarse.mom.max, c = coarse.energy.max;
    r.richardson_order = a >= b && a >= c ? r.order_mass : (b >= c ? r.order_mom : r.order_energy);
  }
  return r;
}

double scaled_max_residual(const ResidualReport& r) {
  const double worst = std::max({r.mass.max, r.mom.max, r.energy.max});
  return r.field_scale > 0.0 ? worst / r.field_scale : worst;
}

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

nlohmann::json norm_json(const ResidualNorm& n) { return {{"max", n.max}, {"rms", n.rms}}; }

}  // namespace

nlohmann::json residual_report_json(const ResidualReport& r) {
  return {{"mode", r.mode == FieldMode::Canonical ? "canonical" : "per-trajectory"},
          {"time", r.time},
          {"dt_check", r.dt_check},
          {"probes", r.probes.size()},
          {"masked_probes", r.masked},
          {"field_scale", r.field_scale},
          {"scaled_max_residual", scaled_max_residual(r)},
          {"norms", {{"mass", norm_json(r.mass)}, {"momentum", norm_json(r.mom)}, {"energy", norm_json(r.energy)}}},
          {"richardson_order",
           {{"mass", finite_or_null(r.order_mass)},
            {"momentum", finite_or_null(r.order_mom)},
            {"energy", finite_or_null(r.order_energy)},
            {"dominant", finite_or_null(r.richardson_order)}}}};
}

void write_residual_csv(std::ostream& out, const ResidualReport& r, const std::string& comment) {
  out << "# " << comment << '\n';
  out << "# units: y bohr, residuals per unit scaled time of mass/bohr^3, momentum/bohr^3 and hartree/bohr^3\n";
  out << "y_1,y_2,y_3,masked,r_mass,r_mom_1,r_mom_2,r_mom_3,r_energy,se_mass,se_mom_1,se_mom_2,se_mom_3,se_energy,"
         "scale\n";
  for (const auto& p : r.probes) {
    out << num(p.y(0)) << ',' << num(p.y(1)) << ',' << num(p.y(2)) << ',' << (p.masked ? 1 : 0);
    for (double v : {p.mass, p.mom(0), p.mom(1), p.mom(2), p.energy, p.mass_se, p.mom_se(0), p.mom_se(1),
                     p.mom_se(2), p.energy_se, p.scale})
      out << ',' << num(v);
    out << '\n';
  }
}

}  // namespace qcons
