#include "qcons/fields.hpp"

#include "qcons/errors.hpp"
#include "qcons/format.hpp"
#include "qcons/geometry.hpp"
#include "qcons/parallel.hpp"

#include <cmath>
#include <ostream>

namespace qcons {

StateData prepare_state(const PhaseState& s, const Surface& surface) {
  validate_state(s);
  const int n_particles = static_cast<int>(s.masses.size());
  if (surface.particles() != n_particles) throw InvalidParameterError("surface and state particle counts differ");
  StateData d;
  d.x = s.x;
  d.p = s.p;
  d.masses = s.masses;
  d.lambda = surface.partition(s.x);
  const Mat dl = surface.partition_gradient(s.x);
  d.power.resize(n_particles, n_particles);
  for (int n = 0; n < n_particles; ++n)
    for (int m = 0; m < n_particles; ++m)
      d.power(n, m) = dl.block<1, 3>(n, 3 * m).dot(s.p.segment<3>(3 * m)) / s.masses(m);
  if (n_particles >= 2) {
    const Vec g = surface.gradient(s.x);
    d.pair_deriv = g.isZero(0.0) ? Vec::Zero(geometry::pair_count(n_particles))
                                 : geometry::lift_gradient_to_distances(s.x, g, surface.gradient_tolerance());
  }
  return d;
}

Vec FieldValues::pack() const {
  Vec v(kPackedSize);
  int i = 0;
  auto put = [&](const auto& m) {
    for (int k = 0; k < m.size(); ++k) v(i++) = m.data()[k];
  };
  v(i++) = rho;
  put(mom);
  v(i++) = energy;
  put(sigma);
  put(q);
  put(grad_rho);
  put(grad_mom);
  put(grad_energy);
  for (const auto& g : grad_sigma) put(g);
  put(grad_q);
  v(i++) = div_mass;
  put(div_mom);
  v(i++) = div_energy;
  return v;
}

FieldValues FieldValues::unpack(const Vec& v) {
  if (v.size() != kPackedSize) throw InvalidParameterError("packed field vector has the wrong size");
  FieldValues f;
  int i = 0;
  auto get = [&](auto& m) {
    for (int k = 0; k < m.size(); ++k) m.data()[k] = v(i++);
  };
  f.rho = v(i++);
  get(f.mom);
  f.energy = v(i++);
  get(f.sigma);
  get(f.q);
  get(f.grad_rho);
  get(f.grad_mom);
  get(f.grad_energy);
  for (auto& g : f.grad_sigma) get(g);
  get(f.grad_q);
  f.div_mass = v(i++);
  get(f.div_mom);
  f.div_energy = v(i++);
  return f;
}

DensityValues instantaneous_density(const StateData& s, const Mollifier& m, const Vec3& y) {
  const FieldValues f = density_fields(s, m, y);
  return {f.rho, f.mom, f.energy};
}

FieldValues density_fields(const StateData& s, const Mollifier& m, const Vec3& y) {
  FieldValues f;
  for (int n = 0; n < s.masses.size(); ++n) {
    const Vec3 r = y - s.x.segment<3>(3 * n);
    const double eta = m.eval(r);
    if (eta == 0.0) continue;
    const Vec3 g = m.grad(r);
    const Vec3 p = s.p.segment<3>(3 * n);
    const double mass = s.masses(n);
    const double e = p.squaredNorm() / (2.0 * mass) + s.lambda(n);
    f.rho += mass * eta;
    f.grad_rho += mass * g;
    f.mom += eta * p;
    f.grad_mom += g * p.transpose();
    f.energy += eta * e;
    f.grad_energy += e * g;
  }
  f.div_mass = f.grad_mom.trace();
  return f;
}

namespace {

// Bond term P(l, j) = sum_{n<k} B_nk d_l v_nk e_j, its gradient, and the ordered-pair power flux.
struct BondTerms {
  Mat3 stress = Mat3::Zero();
  std::array<Mat3, 3> grad_stress{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  Vec3 power = Vec3::Zero();
  Mat3 grad_power = Mat3::Zero();  // (k, l) = d_k power_l
};

BondTerms bond_terms(const StateData& s, const Mollifier& m, const Vec3& y, bool with_power) {
  BondTerms b;
  const int n_particles = static_cast<int>(s.masses.size());
  int pair = 0;
  for (int n = 0; n < n_particles; ++n)
    for (int k = n + 1; k < n_particles; ++k, ++pair) {
      const Vec3 xn = s.x.segment<3>(3 * n), xk = s.x.segment<3>(3 * k);
      const auto bond = m.bond(y, xn, xk);
      if (bond.value == 0.0 && bond.grad.isZero(0.0)) continue;
      const Vec3 d = xn - xk;
      const double r = d.norm();
      if (!(r > 0.0)) throw CoincidentPointsError("coincident particles in bond term");
      const Mat3 outer = s.pair_deriv(pair) / r * d * d.transpose();
      b.stress += bond.value * outer;
      for (int c = 0; c < 3; ++c) b.grad_stress[c] += bond.grad(c) * outer;
      if (with_power) {
        const double a = s.power(n, k) - s.power(k, n);
        b.power += bond.value * a * d;
        b.grad_power += a * bond.grad * d.transpose();
      }
    }
  return b;
}

}  // namespace

Mat3 instantaneous_momentum_flux(const StateData& s, const Mollifier& m, const Vec3& y) {
  Mat3 kin = Mat3::Zero();
  for (int n = 0; n < s.masses.size(); ++n) {
    const double eta = m.eval(y - s.x.segment<3>(3 * n));
    const Vec3 p = s.p.segment<3>(3 * n);
    kin += eta / s.masses(n) * p * p.transpose();
  }
  if (s.masses.size() < 2) return kin;
  return kin - bond_terms(s, m, y, false).stress;
}

FieldValues state_fields(const StateData& s, const Mollifier& m, const Vec3& y, const Vec3& u, const Mat3& du) {
  FieldValues f = density_fields(s, m, y);
  Mat3 sigma_kin = Mat3::Zero();
  std::array<Mat3, 3> grad_sigma_kin{Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  Vec3 q_kin = Vec3::Zero();
  Mat3 grad_q_kin = Mat3::Zero();
  for (int n = 0; n < s.masses.size(); ++n) {
    const Vec3 r = y - s.x.segment<3>(3 * n);
    const double eta = m.eval(r);
    if (eta == 0.0) continue;
    const Vec3 g = m.grad(r);
    const double mass = s.masses(n);
    const Vec3 v = s.p.segment<3>(3 * n) / mass - u;
    const double w = 0.5 * mass * v.squaredNorm() + s.lambda(n);
    const Mat3 vv = v * v.transpose();
    sigma_kin -= mass * eta * vv;
    const Vec3 duv = du * v;  // (k) = sum_j d_k u_j v_j
    for (int k = 0; k < 3; ++k) {
      const Vec3 dv = -du.row(k).transpose();  // d_k v
      grad_sigma_kin[k] -= mass * (g(k) * vv + eta * (dv * v.transpose() + v * dv.transpose()));
      grad_q_kin.row(k) += (g(k) * w * v + eta * w * dv - eta * mass * duv(k) * v).transpose();
    }
    q_kin += eta * w * v;
  }
  f.sigma = sigma_kin;
  f.grad_sigma = grad_sigma_kin;
  f.q = q_kin;
  f.grad_q = grad_q_kin;
  if (s.masses.size() >= 2) {
    const BondTerms b = bond_terms(s, m, y, true);
    f.sigma += b.stress;
    f.q += b.power + b.stress * u;
    for (int k = 0; k < 3; ++k) {
      f.grad_sigma[k] += b.grad_stress[k];
      f.grad_q.row(k) += (b.grad_power.row(k).transpose() + b.grad_stress[k] * u +
                          b.stress * du.row(k).transpose())
                             .transpose();
    }
  }
  const bool split = !u.isZero(0.0) || !du.isZero(0.0);
  f.div_mass = split ? f.grad_rho.dot(u) + f.rho * du.trace() : f.grad_mom.trace();
  for (int j = 0; j < 3; ++j) {
    double s_mom = 0.0;
    for (int l = 0; l < 3; ++l)
      s_mom += f.grad_rho(l) * u(l) * u(j) + f.rho * (du(l, l) * u(j) + u(l) * du(l, j)) - f.grad_sigma[l](l, j);
    f.div_mom(j) = s_mom;
  }
  double s_en = 0.0;
  for (int l = 0; l < 3; ++l) {
    s_en += f.grad_energy(l) * u(l) + f.energy * du(l, l) + f.grad_q(l, l);
    for (int j = 0; j < 3; ++j) s_en -= f.grad_sigma[l](l, j) * u(j) + f.sigma(l, j) * du(l, j);
  }
  f.div_energy = s_en;
  return f;
}

Ensemble single_state(StateData s) {
  Ensemble e;
  e.groups.push_back({std::move(s)});
  e.weights.push_back(1.0);
  return e;
}

WeightedStats weighted_stats(const std::vector<std::vector<Vec>>& values, const std::vector<double>& weights) {
  if (values.size() != weights.size() || values.empty())
    throw InvalidParameterError("one weight per ensemble group is required");
  WeightedStats out;
  Eigen::Index dim = -1;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j].empty()) {
      if (weights[j] != 0.0) throw InvalidParameterError("ensemble group with positive weight has no states");
      continue;
    }
    const Eigen::Index nj = static_cast<Eigen::Index>(values[j].size());
    if (dim < 0) {
      dim = values[j].front().size();
      out.mean = Vec::Zero(dim);
      out.stderr_ = Vec::Zero(dim);
    }
    Vec mean = Vec::Zero(dim);
    for (const auto& v : values[j]) mean += v;
    mean /= static_cast<double>(nj);
    Vec var = Vec::Zero(dim);
    if (nj > 1) {
      for (const auto& v : values[j]) var += (v - mean).cwiseAbs2();
      var /= static_cast<double>(nj - 1);
    }
    out.mean += weights[j] * mean;
    out.stderr_ += weights[j] * weights[j] * var / static_cast<double>(nj);
  }
  if (dim < 0) throw InvalidParameterError("ensemble has no states");
  out.stderr_ = out.stderr_.cwiseSqrt();
  return out;
}

VelocityField velocity_field(const Ensemble& e, const Mollifier& m, const Vec3& y) {
  std::vector<std::vector<Vec>> vals(e.groups.size());
  for (std::size_t j = 0; j < e.groups.size(); ++j)
    for (const auto& s : e.groups[j]) vals[j].push_back(density_fields(s, m, y).pack());
  const FieldValues mean = FieldValues::unpack(weighted_stats(vals, e.weights).mean);
  if (!(mean.rho >= kRhoFloor)) throw VacuumProbeError("ensemble density below the vacuum floor at probe");
  VelocityField out;
  out.rho = mean.rho;
  out.u = mean.mom / mean.rho;
  out.grad_u = (mean.grad_mom - mean.grad_rho * out.u.transpose()) / mean.rho;
  return out;
}

std::vector<std::vector<FieldValues>> per_state_fields(const Ensemble& e, const Mollifier& m, const Vec3& y,
                                                       FieldMode mode, FieldSample* sample) {
  Vec3 u = Vec3::Zero();
  Mat3 du = Mat3::Zero();
  bool vacuum = false;
  if (mode == FieldMode::Canonical) {
    try {
      const VelocityField vf = velocity_field(e, m, y);
      u = vf.u;
      du = vf.grad_u;
    } catch (const VacuumProbeError&) {
      vacuum = true;
    }
  }
  if (sample) {
    sample->y = y;
    sample->u = u;
    sample->grad_u = du;
    sample->vacuum = vacuum;
  }
  std::vector<std::vector<FieldValues>> out(e.groups.size());
  if (vacuum) return out;
  for (std::size_t j = 0; j < e.groups.size(); ++j)
    for (const auto& s : e.groups[j]) out[j].push_back(state_fields(s, m, y, u, du));
  return out;
}

FieldSample field_sample(const Ensemble& e, const Mollifier& m, const Vec3& y, FieldMode mode) {
  FieldSample sample;
  const auto per_state = per_state_fields(e, m, y, mode, &sample);
  if (sample.vacuum) return sample;
  std::vector<std::vector<Vec>> vals(per_state.size());
  for (std::size_t j = 0; j < per_state.size(); ++j)
    for (const auto& f : per_state[j]) vals[j].push_back(f.pack());
  const WeightedStats st = weighted_stats(vals, e.weights);
  sample.mean = FieldValues::unpack(st.mean);
  sample.stderr_ = FieldValues::unpack(st.stderr_);
  if (mode == FieldMode::PerTrajectory && !(sample.mean.rho >= kRhoFloor)) sample.vacuum = true;
  return sample;
}

Mat3 stress_tensor(const Ensemble& e, const Mollifier& m, const Vec3& y) {
  const FieldSample s = field_sample(e, m, y, FieldMode::Canonical);
  if (s.vacuum) throw VacuumProbeError("stress undefined at a vacuum probe");
  return s.mean.sigma;
}

Vec3 heat_flux(const Ensemble& e, const Mollifier& m, const Vec3& y) {
  const FieldSample s = field_sample(e, m, y, FieldMode::Canonical);
  if (s.vacuum) throw VacuumProbeError("heat flux undefined at a vacuum probe");
  return s.mean.q;
}

std::vector<Vec3> probe_lattice(const Vec3& lo, const Vec3& hi, const std::array<int, 3>& counts) {
  for (int c : counts)
    if (c < 1) throw InvalidParameterError("probe counts must be positive");
  std::vector<Vec3> out;
  for (int i = 0; i < counts[0]; ++i)
    for (int j = 0; j < counts[1]; ++j)
      for (int k = 0; k < counts[2]; ++k) {
        const int idx[3] = {i, j, k};
        Vec3 y;
        for (int a = 0; a < 3; ++a)
          y(a) = counts[a] == 1 ? lo(a) : lo(a) + (hi(a) - lo(a)) * idx[a] / (counts[a] - 1);
        out.push_back(y);
      }
  return out;
}

ProbeGrid field_grid(const Ensemble& e, const Mollifier& m, const std::vector<Vec3>& probes, FieldMode mode,
                     double time, int workers) {
  ProbeGrid grid;
  grid.mode = mode;
  grid.time = time;
  grid.weights = e.weights;
  grid.samples.resize(probes.size());
  parallel_for(static_cast<int>(probes.size()), workers,
               [&](int i) { grid.samples[i] = field_sample(e, m, probes[i], mode); });
  return grid;
}

namespace {

void write_fields(std::ostream& out, const FieldValues& f) {
  out << ',' << num(f.rho);
  for (int i = 0; i < 3; ++i) out << ',' << num(f.mom(i));
  out << ',' << num(f.energy);
  for (int l = 0; l < 3; ++l)
    for (int j = 0; j < 3; ++j) out << ',' << num(f.sigma(l, j));
  for (int i = 0; i < 3; ++i) out << ',' << num(f.q(i));
}

void write_names(std::ostream& out, const std::string& suffix) {
  out << ",rho" << suffix << ",mom_1" << suffix << ",mom_2" << suffix << ",mom_3" << suffix << ",E" << suffix;
  for (int l = 1; l <= 3; ++l)
    for (int j = 1; j <= 3; ++j) out << ",sigma_" << l << j << suffix;
  for (int i = 1; i <= 3; ++i) out << ",q_" << i << suffix;
}

}  // namespace

void write_probe_grid_csv(std::ostream& out, const ProbeGrid& grid, const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "# units: y bohr, rho mass/bohr^3, mom momentum/bohr^3, E hartree/bohr^3, sigma hartree/bohr^3, "
         "q hartree*velocity/bohr^3; tau="
      << num(grid.time) << " mode=" << (grid.mode == FieldMode::Canonical ? "canonical" : "per_trajectory")
      << " weights=";
  for (std::size_t j = 0; j < grid.weights.size(); ++j) out << (j ? ";" : "") << num(grid.weights[j]);
  out << "\n";
  const bool with_se = grid.mode == FieldMode::Canonical;
  out << "y_1,y_2,y_3,vacuum";
  write_names(out, "");
  if (with_se) write_names(out, "_se");
  out << "\n";
  for (const auto& s : grid.samples) {
    out << num(s.y(0)) << ',' << num(s.y(1)) << ',' << num(s.y(2)) << ',' << (s.vacuum ? 1 : 0);
    write_fields(out, s.mean);
    if (with_se) write_fields(out, s.stderr_);
    out << "\n";
  }
}

}  // namespace qcons
