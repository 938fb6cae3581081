#include "co2i/asis.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

namespace co2i {
namespace {

constexpr double kTonnesPerGWh = 1000.0;  // (t/MWh) * GWh -> t

class Assembler {
 public:
  int unknown(std::string tag) {
    tags_.push_back(std::move(tag));
    return static_cast<int>(tags_.size()) - 1;
  }
  int equation(std::string tag, double rhs) {
    eq_tags_.push_back(std::move(tag));
    rhs_.push_back(rhs);
    return static_cast<int>(rhs_.size()) - 1;
  }
  void coef(int eq, int var, double v) {
    if (v != 0.0) trip_.emplace_back(eq, var, v);
  }
  void finish(AsIsSystem& out) {
    const auto n = static_cast<Eigen::Index>(tags_.size());
    out.A.resize(static_cast<Eigen::Index>(rhs_.size()), n);
    out.A.setFromTriplets(trip_.begin(), trip_.end());
    out.A.makeCompressed();
    out.b = Eigen::Map<Eigen::VectorXd>(rhs_.data(), static_cast<Eigen::Index>(rhs_.size()));
    out.unknown_tags = std::move(tags_);
    out.equation_tags = std::move(eq_tags_);
  }

 private:
  std::vector<std::string> tags_, eq_tags_;
  std::vector<double> rhs_;
  std::vector<Eigen::Triplet<double>> trip_;
};

std::string at(const std::string& a, int t) { return "(" + a + "," + std::to_string(t) + ")"; }

}  // namespace

AsIsSystem build_asis_system(const EnergySystem& system, const FlowData& flows,
                             const AsIsOptions& options) {
  const int steps = system.horizon;
  const auto& procs = system.processes;
  const int np = static_cast<int>(procs.size());
  const int nc = static_cast<int>(system.commodities.size());
  const double eps = options.epsilon;

  AsIsSystem sys;
  AsIsLayout& L = sys.layout;
  Assembler as;
  L.I.assign(nc, std::vector<int>(steps, -1));
  L.I_stor.assign(np, {});
  L.M_in.assign(np, {});
  L.M_stor.assign(np, {});
  L.M_out.resize(np);
  for (int c = 0; c < nc; ++c)
    for (int t = 0; t < steps; ++t) L.I[c][t] = as.unknown("I" + at(system.commodities[c].id, t));
  for (int p = 0; p < np; ++p) {
    const auto& proc = procs[p];
    if (proc.kind != ProcessKind::Import) {
      L.M_in[p].resize(steps);
      for (int t = 0; t < steps; ++t) L.M_in[p][t] = as.unknown("M_in" + at(proc.id, t));
    }
    L.M_out[p].assign(proc.outputs.size(), std::vector<int>(steps, -1));
    for (size_t k = 0; k < proc.outputs.size(); ++k)
      for (int t = 0; t < steps; ++t)
        L.M_out[p][k][t] = as.unknown("M_out" + at(proc.id + "," + proc.outputs[k].commodity, t));
    if (proc.kind == ProcessKind::Storage) {
      L.I_stor[p].resize(steps);
      L.M_stor[p].resize(steps);
      for (int t = 0; t < steps; ++t) {
        L.I_stor[p][t] = as.unknown("I_stor" + at(proc.id, t));
        L.M_stor[p][t] = as.unknown("M_stor" + at(proc.id, t));
      }
    }
  }

  sys.thresholded.assign(nc, std::vector<char>(steps, 0));
  sys.stor_thresholded.assign(np, std::vector<char>(steps, 0));
  sys.output_pinned.assign(np, std::vector<char>(steps, 0));
  sys.initial_stor_intensity.assign(np, 0.0);

  // Commodity intensities: I * production = sum of CO2 carried by outputs.
  for (int c = 0; c < nc; ++c) {
    const auto& co = system.commodities[c].id;
    for (int t = 0; t < steps; ++t) {
      const double prod = flows.production(system, co, t);
      if (prod < eps) {
        const int e = as.equation("IntensityPinned" + at(co, t), 0.0);
        as.coef(e, L.I[c][t], 1.0);
        sys.thresholded[c][t] = 1;
        continue;
      }
      const int e = as.equation("Intensity" + at(co, t), 0.0);
      as.coef(e, L.I[c][t], kTonnesPerGWh * prod);
      for (int p = 0; p < np; ++p)
        for (size_t k = 0; k < procs[p].outputs.size(); ++k)
          if (procs[p].outputs[k].commodity == co) as.coef(e, L.M_out[p][k][t], -1.0);
    }
  }

  for (int p = 0; p < np; ++p) {
    const auto& proc = procs[p];
    for (int t = 0; t < steps; ++t) {
      // CO2 entering with the inputs.
      if (proc.kind != ProcessKind::Import) {
        const int e = as.equation("Inflow" + at(proc.id, t), 0.0);
        as.coef(e, L.M_in[p][t], 1.0);
        for (size_t k = 0; k < proc.inputs.size(); ++k) {
          const int c = system.commodity_index(proc.inputs[k]);
          as.coef(e, L.I[c][t], -kTonnesPerGWh * flows.E_in[p][k][t]);
        }
      }

      switch (proc.kind) {
        case ProcessKind::Import:
          for (size_t k = 0; k < proc.outputs.size(); ++k) {
            const double direct =
                kTonnesPerGWh * proc.outputs[k].emission_factor * flows.E_out[p][k][t];
            const int e = as.equation("Emission" + at(proc.id + "," + proc.outputs[k].commodity, t),
                                      direct);
            as.coef(e, L.M_out[p][k][t], 1.0);
          }
          break;
        case ProcessKind::Standard: {
          const double total = flows.output_total(p, t);
          if (total < eps) sys.output_pinned[p][t] = 1;
          for (size_t k = 0; k < proc.outputs.size(); ++k) {
            const auto& out = proc.outputs[k];
            const double e_out = flows.E_out[p][k][t];
            const std::string name = at(proc.id + "," + out.commodity, t);
            if (total < eps) {
              const int e = as.equation("OutflowPinned" + name, 0.0);
              as.coef(e, L.M_out[p][k][t], 1.0);
              continue;
            }
            const int e = as.equation("Outflow" + name,
                                      kTonnesPerGWh * out.emission_factor * e_out);
            as.coef(e, L.M_out[p][k][t], 1.0);
            as.coef(e, L.M_in[p][t], -e_out / total);
          }
          break;
        }
        case ProcessKind::Storage: {
          const auto& sp = *proc.storage;
          const double init_int =
              sp.initial_level > eps ? sp.initial_co2 / (kTonnesPerGWh * sp.initial_level) : 0.0;
          sys.initial_stor_intensity[p] = init_int;
          // Discharged CO2 at the intensity held at the start of the step.
          for (size_t k = 0; k < proc.outputs.size(); ++k) {
            const double e_out = flows.E_out[p][k][t];
            const std::string name = at(proc.id + "," + proc.outputs[k].commodity, t);
            if (t == 0) {
              const int e = as.equation("Discharge" + name, kTonnesPerGWh * init_int * e_out);
              as.coef(e, L.M_out[p][k][t], 1.0);
            } else {
              const int e = as.equation("Discharge" + name, 0.0);
              as.coef(e, L.M_out[p][k][t], 1.0);
              as.coef(e, L.I_stor[p][t - 1], -kTonnesPerGWh * e_out);
            }
          }
          // Stored CO2 carried over.
          {
            const int e = as.equation("StoredCO2" + at(proc.id, t), t == 0 ? sp.initial_co2 : 0.0);
            as.coef(e, L.M_stor[p][t], 1.0);
            if (t > 0) as.coef(e, L.M_stor[p][t - 1], -1.0);
            as.coef(e, L.M_in[p][t], -1.0);
            for (size_t k = 0; k < proc.outputs.size(); ++k) as.coef(e, L.M_out[p][k][t], 1.0);
          }
          // Storage intensity.
          const double level = flows.SL[p][t];
          if (level < eps) {
            sys.stor_thresholded[p][t] = 1;
            const int e = as.equation("StorageIntensityPinned" + at(proc.id, t),
                                      t == 0 ? init_int : 0.0);
            as.coef(e, L.I_stor[p][t], 1.0);
            if (t > 0) as.coef(e, L.I_stor[p][t - 1], -1.0);
          } else {
            const int e = as.equation("StorageIntensity" + at(proc.id, t), 0.0);
            as.coef(e, L.I_stor[p][t], kTonnesPerGWh * level);
            as.coef(e, L.M_stor[p][t], -1.0);
          }
          break;
        }
        case ProcessKind::Demand:
          break;
      }
    }
  }
  as.finish(sys);
  L.size = static_cast<int>(sys.A.cols());
  return sys;
}

AsIsResult compute_asis(const EnergySystem& system, const FlowData& flows,
                        const AsIsOptions& options) {
  AsIsSystem sys = build_asis_system(system, flows, options);
  if (sys.A.rows() != sys.A.cols())
    throw SingularTraceSystem("trace system is not square");

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(sys.A);
  if (lu.info() != Eigen::Success)
    throw SingularTraceSystem("trace system is singular: " + lu.lastErrorMessage());
  Eigen::VectorXd z = lu.solve(sys.b);

  Eigen::SparseMatrix<double> absA = sys.A.cwiseAbs();
  auto scale_of = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd s = absA * v.cwiseAbs();
    return std::max({1.0, sys.b.lpNorm<Eigen::Infinity>(), s.lpNorm<Eigen::Infinity>()});
  };
  Eigen::VectorXd r = sys.b - sys.A * z;
  double scale = scale_of(z);
  if (r.lpNorm<Eigen::Infinity>() > options.residual_tol * scale) {
    z += lu.solve(r);
    r = sys.b - sys.A * z;
    scale = scale_of(z);
  }
  if (!z.allFinite() || r.lpNorm<Eigen::Infinity>() > options.residual_tol * scale)
    throw SingularTraceSystem("trace system residual too large");

  const auto& L = sys.layout;
  AsIsResult res;
  res.max_residual = r.lpNorm<Eigen::Infinity>();
  res.residual_scale = scale;
  auto pick = [&](const std::vector<int>& ids) {
    std::vector<double> v(ids.size());
    for (size_t i = 0; i < ids.size(); ++i) v[i] = z[ids[i]];
    return v;
  };
  for (const auto& row : L.I) res.I.push_back(pick(row));
  for (const auto& row : L.I_stor) res.I_stor.push_back(pick(row));
  for (const auto& row : L.M_in) res.M_in.push_back(pick(row));
  for (const auto& row : L.M_stor) res.M_stor.push_back(pick(row));
  for (const auto& slots : L.M_out) {
    res.M_out.emplace_back();
    for (const auto& row : slots) res.M_out.back().push_back(pick(row));
  }
  res.thresholded = std::move(sys.thresholded);
  res.stor_thresholded = std::move(sys.stor_thresholded);
  return res;
}

Co2Balance co2_balance(const EnergySystem& system, const FlowData& flows, const AsIsResult& r) {
  Co2Balance b;
  const int steps = system.horizon;
  for (size_t p = 0; p < system.processes.size(); ++p) {
    const auto& proc = system.processes[p];
    if (proc.kind != ProcessKind::Storage && proc.kind != ProcessKind::Demand)
      for (size_t k = 0; k < proc.outputs.size(); ++k)
        for (int t = 0; t < steps; ++t)
          b.emitted += kTonnesPerGWh * proc.outputs[k].emission_factor * flows.E_out[p][k][t];
    if (proc.kind == ProcessKind::Demand)
      for (int t = 0; t < steps; ++t) b.delivered += r.M_in[p][t];
    if (proc.kind == ProcessKind::Storage) {
      b.initial_stored += proc.storage->initial_co2;
      b.final_stored += r.M_stor[p][steps - 1];
    }
    if (proc.kind == ProcessKind::Standard)
      for (int t = 0; t < steps; ++t) {
        double out = 0.0;
        for (const auto& slot : r.M_out[p]) out += slot[t];
        double direct = 0.0;
        for (size_t k = 0; k < proc.outputs.size(); ++k)
          direct += kTonnesPerGWh * proc.outputs[k].emission_factor * flows.E_out[p][k][t];
        b.dropped += r.M_in[p][t] + direct - out;
      }
  }
  return b;
}

}  // namespace co2i
