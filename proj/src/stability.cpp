// Copyright (c) 2026 The elastmf authors
//
// SPDX-License-Identifier: Apache-2.0

#include "elastmf/stability.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace emf {

const char* to_string(SweepModel m) {
  switch (m) {
    case SweepModel::cnh: return "cNH";
    case SweepModel::inh: return "iNH";
    case SweepModel::fiber: return "fiber";
    case SweepModel::svk: return "svk";
  }
  return "?";
}

const char* to_string(SweepQuantity q) {
  return q == SweepQuantity::stress ? "stress" : "tangent";
}

std::string formulation_label(Formulation f) {
  return std::string(to_string(f.stability)) + "-" + to_string(f.domain);
}

std::vector<double> SweepConfig::log_scales(double lo, double hi, int count) {
  std::vector<double> s(count);
  const double la = std::log10(lo), lb = std::log10(hi);
  for (int i = 0; i < count; ++i)
    s[i] = std::pow(10.0, la + (lb - la) * i / (count - 1));
  return s;
}

SweepConfig SweepConfig::defaults() {
  SweepConfig cfg;
  cfg.scales = log_scales(1e-8, 1e2, 200);
  return cfg;
}

namespace {

std::uint64_t splitmix_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

SweepRng SweepRng::stream(std::uint64_t seed, std::uint64_t scale_idx,
                          std::uint64_t sample_idx) {
  // stream splitting: fold the cell indices through two splitmix64 steps
  std::uint64_t s = seed ^ (0x632be59bd9b4e019ull * (scale_idx + 1));
  std::uint64_t mixed = splitmix_next(s);
  std::uint64_t s2 = mixed ^ (0x9e3779b97f4a7c15ull * (sample_idx + 1));
  return SweepRng{splitmix_next(s2)};
}

double SweepRng::next01() { return (splitmix_next(state) >> 11) * 0x1.0p-53; }

Tensor2<double> sample_gradient(SweepRng& rng, double eps) {
  Tensor2<double> g;
  for (int i = 0; i < 9; ++i) {
    const double mag = eps * (0.1 + 0.9 * rng.next01());
    const double sgn = rng.next01() < 0.5 ? -1.0 : 1.0;
    g.a[i] = sgn * mag;
  }
  return g;
}

namespace {

Tensor2<float> to_single(const Tensor2<double>& g) {
  Tensor2<float> r;
  for (int i = 0; i < 9; ++i) r.a[i] = static_cast<float>(g.a[i]);
  return r;
}

template <typename N>
SymTensor2<N> svk_stress(const MaterialParams& p, const StrainData<N>& s) {
  const N mu(scalar_of<N>(p.mu)), lam(scalar_of<N>(p.lambda));
  SymTensor2<N> r = (N(2) * mu) * s.E;
  const N v = lam * trace(s.E);
  r.s[0] += v;
  r.s[1] += v;
  r.s[2] += v;
  return r;
}

template <typename N>
SymTensor2<N> svk_tangent(const MaterialParams& p, const StrainData<N>& s,
                          const Tensor2<N>& dg) {
  const N mu(scalar_of<N>(p.mu)), lam(scalar_of<N>(p.lambda));
  const SymTensor2<N> de = sym_part(matmul(transpose(s.F), dg));
  SymTensor2<N> r = (N(2) * mu) * de;
  const N v = lam * trace(de);
  r.s[0] += v;
  r.s[1] += v;
  r.s[2] += v;
  return r;
}

/// One quantity evaluation in precision N. Returns up to 9 entries.
template <typename N>
int evaluate_cell(SweepModel model, Formulation form, SweepQuantity quantity,
                  const MaterialParams& params, const StructureTensors& st,
                  const KernelConfig& cfg, const Tensor2<N>& g,
                  const Tensor2<N>& dir, N out[9]) {
  if (model == SweepModel::svk) {
    const StrainData<N> s = make_strain(g, form.stability);
    if (quantity == SweepQuantity::stress) {
      const SymTensor2<N> S = svk_stress(params, s);
      if (form.domain == Domain::spatial) {
        const SymTensor2<N> tau = push_forward(s.F, S);
        for (int i = 0; i < 6; ++i) out[i] = tau.s[i];
        return 6;
      }
      for (int i = 0; i < 6; ++i) out[i] = S.s[i];
      return 6;
    }
    const SymTensor2<N> ds = svk_tangent(params, s, dir);
    if (form.domain == Domain::spatial) {
      // push-forward of the material derivative plus the geometric term
      const SymTensor2<N> tau = push_forward(s.F, svk_stress(params, s));
      const Tensor2<N> x = matmul(dir, s.Finv);
      const Tensor2<N> w = to_tensor(push_forward(s.F, ds)) + matmul(x, tau);
      for (int i = 0; i < 9; ++i) out[i] = w.a[i];
      return 9;
    }
    for (int i = 0; i < 6; ++i) out[i] = ds.s[i];
    return 6;
  }

  const ModelKind mk = model == SweepModel::cnh   ? ModelKind::cnh
                       : model == SweepModel::inh ? ModelKind::inh
                                                  : ModelKind::fiber;
  if (quantity == SweepQuantity::stress) {
    const SymTensor2<N> v = form.domain == Domain::material
                                ? second_pk(mk, params, st, g, form, cfg)
                                : kirchhoff(mk, params, st, g, form, cfg);
    for (int i = 0; i < 6; ++i) out[i] = v.s[i];
    return 6;
  }
  if (form.domain == Domain::material) {
    const SymTensor2<N> v = tangent_material(mk, params, st, g, dir, form, cfg);
    for (int i = 0; i < 6; ++i) out[i] = v.s[i];
    return 6;
  }
  const Tensor2<N> v = tangent_spatial(mk, params, st, g, dir, form, cfg);
  for (int i = 0; i < 9; ++i) out[i] = v.a[i];
  return 9;
}

}  // namespace

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg) {
  if (cfg.scales.empty() || cfg.models.empty() || cfg.formulations.empty() ||
      cfg.quantities.empty())
    throw ConfigError("run_sweep: empty sweep axes");
  for (std::size_t i = 0; i < cfg.scales.size(); ++i) {
    if (cfg.scales[i] <= 0 || (i > 0 && cfg.scales[i] <= cfg.scales[i - 1]))
      throw ConfigError("run_sweep: scales must be positive and increasing");
  }
  const StructureTensors st = build_structure_tensors(cfg.params);

  struct Cell {
    double max_err = 0;
    long invalid = 0;
  };
  const std::size_t ncells = cfg.models.size() * cfg.formulations.size() *
                             cfg.quantities.size();
  std::vector<std::vector<Cell>> cells(cfg.scales.size(),
                                       std::vector<Cell>(ncells));

  for (std::size_t is = 0; is < cfg.scales.size(); ++is) {
    const double eps = cfg.scales[is];
    for (int sample = 0; sample < cfg.samples_per_scale; ++sample) {
      SweepRng rng = SweepRng::stream(cfg.seed, is, sample);
      const Tensor2<double> g64 = sample_gradient(rng, eps);
      const Tensor2<double> d64 = sample_gradient(rng, eps);
      const Tensor2<float> g32 = to_single(g64);
      const Tensor2<float> d32 = to_single(d64);

      std::size_t cell = 0;
      for (const SweepModel model : cfg.models)
        for (const Formulation form : cfg.formulations)
          for (const SweepQuantity quantity : cfg.quantities) {
            Cell& c = cells[is][cell++];
            double v64[9];
            float v32[9];
            int n64 = 0, n32 = 0;
            bool bad = false;
            try {
              n64 = evaluate_cell<double>(model, form, quantity, cfg.params,
                                          st, cfg.kernels, g64, d64, v64);
              n32 = evaluate_cell<float>(model, form, quantity, cfg.params,
                                         st, cfg.kernels, g32, d32, v32);
            } catch (const NonPositiveJacobian&) {
              bad = true;
            } catch (const SingularTensor&) {
              bad = true;
            }
            if (!bad && n64 == n32) {
              for (int i = 0; i < n64; ++i)
                if (!std::isfinite(v64[i]) ||
                    !std::isfinite(static_cast<double>(v32[i])))
                  bad = true;  // out-of-range fast kernels at large strain
            } else {
              bad = true;
            }
            if (bad) {
              ++c.invalid;
              continue;
            }
            // Componentwise deviations normalized by the tensor's largest
            // double-precision entry (floored at 1e-30). Entry-local
            // denominators would let entries that cancel by chance amplify
            // plain input rounding without bound.
            double denom = 1e-30;
            for (int i = 0; i < n64; ++i)
              denom = std::max(denom, std::abs(v64[i]));
            for (int i = 0; i < n64; ++i) {
              const double err =
                  std::abs(v64[i] - static_cast<double>(v32[i])) / denom;
              if (err > c.max_err) c.max_err = err;
            }
          }
    }
  }

  std::vector<SweepRecord> records;
  records.reserve(cfg.scales.size() * ncells);
  for (std::size_t is = 0; is < cfg.scales.size(); ++is) {
    std::size_t cell = 0;
    for (const SweepModel model : cfg.models)
      for (const Formulation form : cfg.formulations)
        for (const SweepQuantity quantity : cfg.quantities) {
          const Cell& c = cells[is][cell++];
          records.push_back({cfg.scales[is], model, form, quantity, c.max_err,
                             c.invalid});
        }
  }
  return records;
}

void write_csv(const std::vector<SweepRecord>& records,
               const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("write_csv: cannot open " + path);
  std::fprintf(f, "scale,model,formulation,quantity,max_rel_error,count_invalid\n");
  for (const auto& r : records)
    std::fprintf(f, "%.9e,%s,%s,%s,%.9e,%ld\n", r.scale, to_string(r.model),
                 formulation_label(r.formulation).c_str(),
                 to_string(r.quantity), r.max_rel_error, r.count_invalid);
  std::fclose(f);
}

}  // namespace emf
